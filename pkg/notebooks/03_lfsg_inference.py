# %% [markdown]
# # Posterior inference for the LFSG
#
# The sampler sweeps coordinates, segment distributions, block
# intensities, pairwise labels and the smoothing parameter.  Here it runs on
# a small synthetic network with two assortative groups.

# %%
import numpy as np

from smoothgraphon.evaluation import label_proportions, node_order
from smoothgraphon.inference import SamplerConfig, run_sampler
from smoothgraphon.models import Hyperparameters, LatentState, ModelKind, generate
from smoothgraphon.relational import Cell, row_wise_split

rng = np.random.default_rng(2)
n = 60
truth = LatentState(ModelKind.LFSG, [0.5, 0.5], [0.5, 0.5], [[0.85, 0.1], [0.1, 0.85]],
                    u1=rng.random(n), u2=rng.random(n), lam=30.0)
R = row_wise_split(generate(truth, rng), 0.9, rng)
sparsity = float(R.entries[R.mask == Cell.TRAIN].mean())
h = Hyperparameters.from_sparsity(sparsity, 2)

# %%
cfg = SamplerConfig(ModelKind.LFSG, seed=3, iterations=600, burn_in=300, thin=5)
trace = run_sampler(R, h, cfg)
print("retained samples:", trace.n_samples)
print("acceptance rates:", {k: round(v, 4) for k, v in trace.acceptance_rates().items()})
print("posterior mean lambda:", round(float(trace.lam.mean()), 2))
print("posterior mean B:\n", np.round(trace.B.mean(0), 3))

# %% [markdown]
# ## Label proportions
#
# Pooling each node's sender labels over partners and retained sweeps gives
# a per-node group profile.  Sorting by dominant label groups the nodes.
# Label names are arbitrary, so agreement with the true groups is up to a
# swap of 0 and 1.

# %%
props = label_proportions(trace, "sender")
order = node_order(props)
true_group = (truth.u1 >= 0.5).astype(int)
print("dominant label, in sorted order:", props[order].argmax(1))
print("true group, same order:        ", true_group[order])
