"""Bayesian evidence for choosing regression basis sets.

Given noisy data and a family of candidate basis sets for a linear model,
this package computes each candidate's exact marginal likelihood (model
evidence), normalizes the evidences into posterior model probabilities,
searches large subset families exhaustively, and averages predictions over
the posterior. See README.md for the workflow and the CLI.
"""

__version__ = "0.1.0"

from .basis import (
    BasisFunction,
    BasisSet,
    DesignMatrix,
    build_design_matrix,
    enumerate_subsets,
    eval_basis,
    legendre_value,
    subset_at,
    subset_count,
    total_degree_set,
)
from .data import DataSample, ingest_csv, simulate, simulate_2d, write_sample
from .evidence import (
    EvidenceInput,
    EvidenceResult,
    closed_vs_quadrature_grid,
    log_evidence_asymptotic,
    log_evidence_bad_data_limit,
    log_evidence_closed,
    log_evidence_quadrature,
    log_gamma,
    log_lower_incomplete_gamma,
    log_reg_hyp2f1,
    log_upper_incomplete_gamma,
)
from .regression import FitResult, RankDeficiencyError, fit
from .selection import (
    AveragedPrediction,
    ModelCandidate,
    PosteriorRow,
    PosteriorTable,
    evaluate_models,
    model_average,
    subset_search,
)

__all__ = [
    "__version__",
    "BasisFunction",
    "BasisSet",
    "DesignMatrix",
    "build_design_matrix",
    "enumerate_subsets",
    "eval_basis",
    "legendre_value",
    "subset_at",
    "subset_count",
    "total_degree_set",
    "DataSample",
    "ingest_csv",
    "simulate",
    "simulate_2d",
    "write_sample",
    "EvidenceInput",
    "EvidenceResult",
    "closed_vs_quadrature_grid",
    "log_evidence_asymptotic",
    "log_evidence_bad_data_limit",
    "log_evidence_closed",
    "log_evidence_quadrature",
    "log_gamma",
    "log_lower_incomplete_gamma",
    "log_reg_hyp2f1",
    "log_upper_incomplete_gamma",
    "FitResult",
    "RankDeficiencyError",
    "fit",
    "AveragedPrediction",
    "ModelCandidate",
    "PosteriorRow",
    "PosteriorTable",
    "evaluate_models",
    "model_average",
    "subset_search",
]
