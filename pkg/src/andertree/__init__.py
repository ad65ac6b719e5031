"""Anderson localization experiments on sparse trees.

Tools for the tight-binding model H = Laplacian + lambda*V on rooted
trees whose generation-n edges are stretched to length floor(gamma^n):
exact ball counting and dimension estimates, linear-time resolvent
columns with a dense oracle, disorder-averaged fractional moments with
decay fits, a path-segmentation construction with verified properties,
dense spectral diagnostics, and a CLI wrapping all of it.

Hot kernels run through numba when importable (ANDERTREE_BACKEND=numpy
forces the pure-numpy lane; the lanes agree to floating-point roundoff).
"""

from ._kernels import available_backends, current_backend, use_backend
from .config import ConfigError, ExperimentConfig
from .diagnostics import (
    LocalizationMetrics,
    SpacingStatistics,
    SpectralDecomposition,
    eigen_metrics,
    spacing_statistics,
    spectral_measure,
    spectrum_full,
    spectrum_values,
    stieltjes_residual,
)
from .green import (
    SpectralPoint,
    check_resolvent_identity,
    dense_oracle,
    green_entry,
    resolvent_column,
)
from .hamiltonian import (
    GEOMETRY_STREAM,
    DisorderSpec,
    HamiltonianMatrix,
    LaplacianKind,
    assemble,
    hopping_difference,
    restrict_dirichlet,
    restrict_outside,
    sample_potential,
)
from .moments import (
    DecayFit,
    EtaProbe,
    MomentEstimate,
    MomentRequest,
    bound_probe,
    fit_decay,
    fractional_moment,
    minami_scan,
)
from .segmentation import (
    MIN_L0,
    PreconditionError,
    SegmentationReport,
    SegmentationResult,
    random_instance,
    segment_path,
    verify_segmentation,
)
from .tree import (
    BallSizeError,
    PathSegment,
    Region,
    TreeBall,
    TreeParams,
    ball_size_exact,
    build_ball,
    build_segment,
    dimension_estimate,
    expand,
    junction_distance,
    junction_radii_upto,
    leftmost_ray,
    path,
    shell_radius,
    theta,
)

__version__ = "0.1.0"
