# %% [markdown]
# # Sampling networks from the four models
#
# Every model draws block intensities from a Beta prior.  They differ in
# how a cell picks its block:
# - the block model uses one label per node;
# - the integrated smoothing graphon (ISG) uses the mixture intensity at
#   the node coordinates;
# - the latent-feature smoothing graphon (LFSG) draws a sender and a
#   receiver label for every cell from the coordinate weights;
# - the mixed-membership model draws per-cell labels from free membership
#   vectors.

# %%
import numpy as np

from smoothgraphon.models import (Hyperparameters, ModelKind, generate, sample_mmsb_prior,
                                  sample_prior)
from smoothgraphon.relational import summarize

h = Hyperparameters.symmetric(3, alpha0=0.5, beta0=0.5)
rng = np.random.default_rng(1)

# %%
for kind in (ModelKind.SBM, ModelKind.ISG, ModelKind.LFSG):
    state = sample_prior(h, 60, rng, kind)
    R = generate(state, rng)
    s = summarize(R)
    print(f"{kind.value:>4}: links={s.positive_links:>4} sparsity={s.sparsity:.3f}")
mmsb = sample_mmsb_prior(h, 60, rng)
s = summarize(generate(mmsb, rng))
print(f"mmsb: links={s.positive_links} sparsity={s.sparsity:.3f}")

# %% [markdown]
# ## ISG and LFSG agree in distribution
#
# Summing the LFSG label probabilities gives exactly the ISG intensity, so
# for fixed coordinates the two models produce each cell with the same
# frequency.  Regenerating the same LFSG state many times shows this.

# %%
state = sample_prior(h, 8, rng, ModelKind.LFSG)
target = state.weights()[0] @ state.B @ state.weights()[1].T
freq = np.mean([generate(state, rng).entries for _ in range(4000)], axis=0)
off = ~np.eye(8, dtype=bool)
print("largest gap between LFSG frequency and ISG intensity:",
      round(float(np.abs(freq - target)[off].max()), 4))
