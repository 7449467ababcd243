"""Robust rotation synchronization on SO(d)^n.

Generate corrupted pairwise rotation measurements, initialize from the
leading eigenspace of the data matrix, and recover the ground-truth stack
with a Riemannian subgradient method using geometrically decaying steps.
"""

from .errors import (
    DegenerateProjection,
    InvalidParams,
    NoConvergence,
    NonSmoothPoint,
    ParseError,
    RankDeficient,
    RotsyncError,
)
from .model import (
    Instance,
    ObservationGraph,
    RcmParams,
    dense_data_matrix,
    generate_instance,
    load_instance,
    log_cube_ratio,
    save_instance,
)
from .rotgroup import (
    align,
    dist,
    dist1,
    dist_inf,
    distances,
    is_rotation,
    project_so,
    qr_retract,
    random_rotation,
    random_tangent,
    tangent_project,
)
from .solver import (
    IterationTrace,
    SolverConfig,
    default_mu0,
    euclidean_subgradient,
    euclidean_subgradient_block,
    objective,
    objective_parts,
    read_trace_csv,
    resync_run,
    resync_step,
    riemannian_subgradient,
)
from .spectrin import (
    EigenPairSet,
    init_from_basis,
    leading_eigenpairs,
    naive_spectrin,
    spectrin,
)

__all__ = [
    "DegenerateProjection",
    "EigenPairSet",
    "Instance",
    "InvalidParams",
    "IterationTrace",
    "NoConvergence",
    "NonSmoothPoint",
    "ObservationGraph",
    "ParseError",
    "RankDeficient",
    "RcmParams",
    "RotsyncError",
    "SolverConfig",
    "align",
    "default_mu0",
    "dense_data_matrix",
    "dist",
    "dist1",
    "dist_inf",
    "distances",
    "euclidean_subgradient",
    "euclidean_subgradient_block",
    "generate_instance",
    "init_from_basis",
    "is_rotation",
    "leading_eigenpairs",
    "load_instance",
    "log_cube_ratio",
    "naive_spectrin",
    "objective",
    "objective_parts",
    "project_so",
    "qr_retract",
    "random_rotation",
    "random_tangent",
    "read_trace_csv",
    "resync_run",
    "resync_step",
    "riemannian_subgradient",
    "save_instance",
    "spectrin",
    "tangent_project",
]

__version__ = "0.1.0"
