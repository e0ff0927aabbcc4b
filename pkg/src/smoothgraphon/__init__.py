"""Smoothing graphons (ISG, LFSG) and block-model baselines for relational data."""

from .evaluation import (ScoredCells, auc_roc, average_precision, label_proportions,
                         node_order, precision_at_k)
from .exceptions import DataError, NumericalError
from .graphon import (Partition, SegmentDistribution, block_weight, intensity_grid,
                      laplace_cdf, mixture_intensity, piecewise_intensity, segment_lookup,
                      segment_weights)
from .inference import (SamplerConfig, SufficientCounts, Trace, counts_from_labels,
                        posterior_predictive, run_isg_sampler, run_lfsg_sampler,
                        run_mmsb_sampler, run_sampler, run_sbm_sampler,
                        spectral_coordinates)
from .models import (Hyperparameters, LatentState, MmsbState, ModelKind, generate,
                     generate_isg, generate_lfsg, generate_mmsb, generate_sbm,
                     log_likelihood, sample_mmsb_prior, sample_prior)
from .relational import (Cell, DatasetSummary, RelationalMatrix, load_edge_list,
                         row_wise_split, summarize, top_active_subsample)

__version__ = "0.1.0"
