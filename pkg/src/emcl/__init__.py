"""Expectation-maximization subspace routing for paired cross-modal embeddings.

The package reconstructs stacked video/text embedding batches in a rank-K
semantic subspace via iterative EM routing, and ships the surrounding
toolbox: contrastive similarity metrics, retrieval evaluation, a Gaussian
mixture reference implementation, a synthetic-data lab, and a CLI with
reproducible run manifests.
"""

__version__ = "0.1.0"

from .contrastive import cosine_similarity, info_nce, inverted_softmax
from .core import (
    EmclConfig,
    InitialState,
    apply_residual,
    cold_start_state,
    e_step,
    emcl_iterate,
    init_bases,
    kernel_eval,
    m_step,
    normalize_bases,
    update_initial_state,
)
from .errors import DeadSubspaceWarning, EmclError, NumericalError, ParseError, ShapeError
from .gmm import GmmParams, gmm_e_step, gmm_fit, gmm_m_step, log_likelihood
from .retrieval import RetrievalReport, compute_report, rank_matrix
from .synthetic import (
    LabeledBatch,
    SyntheticSpec,
    VarianceTrace,
    generate,
    numerical_rank,
    pca_project,
    run_iteration_study,
    variance_diagnostics,
)

__all__ = [
    "__version__",
    "EmclConfig",
    "InitialState",
    "apply_residual",
    "cold_start_state",
    "e_step",
    "emcl_iterate",
    "init_bases",
    "kernel_eval",
    "m_step",
    "normalize_bases",
    "update_initial_state",
    "cosine_similarity",
    "info_nce",
    "inverted_softmax",
    "GmmParams",
    "gmm_e_step",
    "gmm_fit",
    "gmm_m_step",
    "log_likelihood",
    "RetrievalReport",
    "compute_report",
    "rank_matrix",
    "LabeledBatch",
    "SyntheticSpec",
    "VarianceTrace",
    "generate",
    "numerical_rank",
    "pca_project",
    "run_iteration_study",
    "variance_diagnostics",
    "DeadSubspaceWarning",
    "EmclError",
    "NumericalError",
    "ParseError",
    "ShapeError",
]
