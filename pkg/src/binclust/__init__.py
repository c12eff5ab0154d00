"""Bayesian clustering of binned univariate data.

Observations are known only through bin counts.  Latent values are
sampled inside their bins, clusters are contiguous blocks of the
bin-ordered observations with a restricted Dirichlet-process prior, and
each cluster is normal with a normal-gamma prior.
"""

from .binning import edges_from_midpoints, expand_memberships
from .estimators import (
    conditional_density,
    conditional_param_estimates,
    default_grid,
    mixing_weights,
    modal_partition,
    summarize_trace,
)
from .files import parse_input, write_dataset, write_outputs
from .prior import enumerate_compositions, log_eppf, log_restricted_prior
from .sampler import SamplerConfig, init_state, run_chain
from .types import BinLayout, BinnedDataset, ChainState, Hyperparams, Partition, Trace, validate_dataset

__version__ = "0.1.0"
