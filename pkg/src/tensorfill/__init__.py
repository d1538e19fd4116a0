"""Low-rank completion of dense third-order tensors.

Recovers missing entries of a partially observed tensor by alternating
per-mode singular value shrinkage with a consensus step (ADMM), optionally
decomposing observations into low-rank structure plus sparse anomalies.
Includes mask/corruption generators and MAPE/RMSE evaluation for building
reproducible completion experiments.
"""

from .datagen import CorruptionSpec, SyntheticSpec, corrupt, nm_mask, rm_mask, synthesize
from .errors import InputError, NumericError, TensorfillError, UsageError
from .io import ingest_csv, read_mask, read_tensor, write_mask, write_tensor
from .metrics import EvalReport, anomaly_score, evaluate
from .prox import (
    DEFAULT_EPSILON,
    ShrinkageSpec,
    SvdFactors,
    apply_shrinkage,
    log_surrogate,
    log_weights,
    plain_svt,
    soft_threshold,
    svd,
    truncated_svt,
    weighted_svt,
)
from .solvers import (
    METHODS,
    SolverConfig,
    SolverResult,
    SolverState,
    check_convergence,
    complete,
    default_lambda,
    halrtc,
    lrtc_tnn,
    objective,
    rtc_pfnc,
    tc_pfnc,
)
from .tensor import apply_constraint, fold, frobenius, project, unfold

__version__ = "0.1.0"
