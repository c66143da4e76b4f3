"""Bayesian local causal discovery over marker/trait triplets.

The package scores every (marker, trait, trait) triplet by closed-form
Bayes factors over the eleven Gaussian covariance structures on three
variables, combines them with graph-counting priors, and aggregates the
chain-model posteriors into a trait-by-trait regulation probability
matrix.  Simulators with known ground truth and ROC/PR/calibration
metrics round out the workflow; the ``triscan`` command line wires them
together.
"""

from .data import (
    ConstantColumnError,
    DatasetError,
    DimensionMismatchError,
    ExpressionDataset,
    JointCorrelation,
    MissingValueError,
    NonNumericValueError,
    as_sample_matrix,
    correlation_matrix,
    load_dataset,
    standardize_columns,
    write_dataset,
)
from .graphs import (
    PRIOR_PRESETS,
    CausalGraph3,
    Mark,
    PriorSpec,
    build_prior,
    ci_model_of,
    count_by_model,
    enumerate_graphs,
    prior_weights,
)
from .metrics import calibration_table, pair_scores, pr_auc, roc_auc
from .models import CanonicalCase, CiModel, N_MODELS, canonical_case
from .scan import (
    MediationFinding,
    MediationReport,
    RegulationScanner,
    ScanResult,
    full_scan,
    mediation_scan,
    rank_edges,
    scan_pair,
)
from .scoring import (
    DET_TOL,
    DegenerateCorrelationError,
    TripletCorrelation,
    classify_zero_pattern,
    compute_log_bayes_factors,
    correlation_determinant,
    log_prefactors,
    posterior_over_models,
    posterior_upper_bound,
)
from .simulate import (
    GRN_PRESETS,
    GrnSpec,
    GroundTruth,
    TripletSpec,
    gen_grn,
    gen_triplet_data,
    make_grn_dataset,
    preset_spec,
    sample_grn_data,
    transitive_closure,
)

__version__ = "1.0.0"

__all__ = [
    "CanonicalCase",
    "CausalGraph3",
    "CiModel",
    "ConstantColumnError",
    "DatasetError",
    "DegenerateCorrelationError",
    "DET_TOL",
    "DimensionMismatchError",
    "ExpressionDataset",
    "GRN_PRESETS",
    "GrnSpec",
    "GroundTruth",
    "JointCorrelation",
    "Mark",
    "MediationFinding",
    "MediationReport",
    "MissingValueError",
    "N_MODELS",
    "NonNumericValueError",
    "PRIOR_PRESETS",
    "PriorSpec",
    "RegulationScanner",
    "ScanResult",
    "TripletCorrelation",
    "TripletSpec",
    "as_sample_matrix",
    "build_prior",
    "calibration_table",
    "canonical_case",
    "ci_model_of",
    "classify_zero_pattern",
    "compute_log_bayes_factors",
    "correlation_determinant",
    "correlation_matrix",
    "count_by_model",
    "enumerate_graphs",
    "full_scan",
    "gen_grn",
    "gen_triplet_data",
    "load_dataset",
    "log_prefactors",
    "make_grn_dataset",
    "mediation_scan",
    "pair_scores",
    "posterior_over_models",
    "posterior_upper_bound",
    "pr_auc",
    "preset_spec",
    "prior_weights",
    "rank_edges",
    "roc_auc",
    "sample_grn_data",
    "scan_pair",
    "standardize_columns",
    "transitive_closure",
    "write_dataset",
]
