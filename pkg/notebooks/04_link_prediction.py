# %% [markdown]
# # Held-out link prediction
#
# All four models are fitted to the same row-wise split of a smooth
# two-group network and scored on the held-out cells.  The scores are
# posterior-mean predictive intensities.

# %%
import numpy as np

from smoothgraphon.evaluation import (auc_roc, average_precision, precision_at_k,
                                      scored_test_cells)
from smoothgraphon.inference import SamplerConfig, run_sampler
from smoothgraphon.models import Hyperparameters, LatentState, ModelKind, generate
from smoothgraphon.relational import Cell, row_wise_split

rng = np.random.default_rng(4)
n = 80
truth = LatentState(ModelKind.LFSG, [0.5, 0.5], [0.5, 0.5], [[0.9, 0.1], [0.1, 0.9]],
                    u1=rng.random(n), u2=rng.random(n), lam=50.0)
R = row_wise_split(generate(truth, rng), 0.9, np.random.default_rng(5))
h = Hyperparameters.from_sparsity(float(R.entries[R.mask == Cell.TRAIN].mean()), 2)

# %%
print(f"{'model':>5}  {'AUC':>6}  {'AP':>6}  {'P@k':>6}")
for kind in (ModelKind.SBM, ModelKind.MMSB, ModelKind.ISG, ModelKind.LFSG):
    trace = run_sampler(R, h, SamplerConfig(kind, seed=6, iterations=800, burn_in=400))
    sc = scored_test_cells(trace, R)
    print(f"{kind.value:>5}  {auc_roc(sc):.3f}  {average_precision(sc):.3f}  "
          f"{precision_at_k(sc):.3f}")
