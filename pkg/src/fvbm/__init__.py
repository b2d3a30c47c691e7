"""Fully-visible Boltzmann machines on +/-1 data.

Exact enumeration-based evaluation and sampling, maximum pseudolikelihood
fitting by monotone block updates, sandwich-covariance Wald inference with
FDR adjustment, a vote-record preparation pipeline, and network export.
"""

from .errors import DataError, NumericalError
from .fit import FitConfig, FitResult, fit
from .graph import NetworkSpec, build_network, emit_dot, network_to_json_dict
from .inference import (
    InferenceReport,
    build_report,
    default_groups,
    empirical_info_1,
    empirical_info_2,
    fdr_adjust,
    format_report_tables,
    normal_cdf,
    sandwich_covariance,
    standard_errors,
    wald_test,
)
from .model import (
    ENUMERATION_CAP,
    PmfTable,
    concordance,
    enumerate_pmf,
    index_state,
    log_normalization,
    log_unnormalized,
    marginal_probability,
    normalization_constant,
    pairwise_joint,
    pmf,
    sample,
    state_index,
)
from .params import (
    FvbmParams,
    as_spin_matrix,
    as_spin_vector,
    flat_labels,
    flat_length,
    pair_indices,
)
from .pseudolikelihood import (
    conditional_pmf,
    log_pseudolikelihood,
    per_observation_scores,
    pseudo_hessian,
    pseudo_score,
)
from .votes import (
    AgreementMatrix,
    ImputeConfig,
    SplitResolution,
    Vote,
    VoteTable,
    drop_sparse_columns,
    empirical_proportions,
    encode_agreement,
    knn_impute,
    knn_impute_cells,
    parse_split_records,
    parse_votes,
    read_spin_csv,
    resolve_splits,
    spin_matrix_from_json_dict,
    spin_matrix_to_json_dict,
    write_spin_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AgreementMatrix",
    "DataError",
    "ENUMERATION_CAP",
    "FitConfig",
    "FitResult",
    "FvbmParams",
    "ImputeConfig",
    "InferenceReport",
    "NetworkSpec",
    "NumericalError",
    "PmfTable",
    "SplitResolution",
    "Vote",
    "VoteTable",
    "as_spin_matrix",
    "as_spin_vector",
    "build_network",
    "build_report",
    "concordance",
    "conditional_pmf",
    "default_groups",
    "drop_sparse_columns",
    "emit_dot",
    "empirical_info_1",
    "empirical_info_2",
    "empirical_proportions",
    "encode_agreement",
    "enumerate_pmf",
    "fdr_adjust",
    "fit",
    "flat_labels",
    "flat_length",
    "format_report_tables",
    "index_state",
    "knn_impute",
    "knn_impute_cells",
    "log_normalization",
    "log_pseudolikelihood",
    "log_unnormalized",
    "marginal_probability",
    "network_to_json_dict",
    "normal_cdf",
    "normalization_constant",
    "pair_indices",
    "pairwise_joint",
    "parse_split_records",
    "parse_votes",
    "per_observation_scores",
    "pmf",
    "pseudo_hessian",
    "pseudo_score",
    "read_spin_csv",
    "resolve_splits",
    "sample",
    "sandwich_covariance",
    "spin_matrix_from_json_dict",
    "spin_matrix_to_json_dict",
    "standard_errors",
    "state_index",
    "wald_test",
    "write_spin_csv",
    "__version__",
]
