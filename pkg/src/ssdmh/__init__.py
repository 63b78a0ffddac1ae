"""Bayesian variable selection for pairwise binary item-response networks.

Spike-and-slab double Metropolis-Hastings for the inhomogeneous ERGM
(Ising) model, an elasso baseline, a class/group data generator and
posterior predictive diagnostics.
"""
from .diagnostics import (
    PppConfig,
    adjacency_rmse,
    batch_means_mcse,
    posterior_predictive_pvalues,
    pvalue_rmse,
)
from .inner import AuxChainConfig, gibbs_sweep, sample_auxiliary, sample_exact_rows
from .model import (
    ParamVector,
    SuffStats,
    log_partition_exact,
    n_params,
    row_conditional_prob,
    sufficient_statistics,
    unnormalized_log_density,
)
from .pseudolikelihood import ElassoConfig, ebic_score, fit_elasso, nodewise_l1_logistic
from .sampler import (
    Chain,
    ChainRecord,
    NetworkEstimate,
    SamplerConfig,
    SelectionState,
    posterior_summary,
    run_chain,
)
from .simulation import SimDesign, generate_dataset, true_signed_adjacency

__version__ = "0.1.0"
