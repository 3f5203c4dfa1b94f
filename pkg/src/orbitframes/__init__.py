"""Frames of operator orbits: unilateral model-space certification and
bilateral fiber analysis, with a deterministic CLI front end."""

from .backend import active_backend, apply_thread_cap, set_backend
from .bilateral import (
    Arc,
    BilateralReport,
    BilateralSimilarityNote,
    PiecewiseSymbol,
    bessel_symbol_check,
    bilateral_frame_number,
    bilateral_similarity_note,
    direct_bilateral_sum,
    fiber_frame_bounds,
    minimality_check,
    mult_adjoint_norm_sq,
    sample_on_circle,
    validate_projection_symbol,
)
from .corona import (
    CoronaCertificate,
    FrameNumberResult,
    corona_infimum,
    frame_number_witnesses,
    interpolate_kernel_spanning_symbol,
    obstruction_witness,
    stacked_adjoint_gap,
    toeplitz_lower_bound,
    unilateral_frame_number,
)
from .errors import OrbitFramesError
from .hardy import (
    AnalyticMatrixFunction,
    BlaschkeProduct,
    ComplexPoly,
    DiskGrid,
    RationalFn,
    blaschke_from_zeros,
    make_grid,
    taylor_coeffs,
)
from .modelspace import (
    ModelSpace,
    model_space_diagonal,
    model_space_scalar,
    model_space_truncated,
)
from .orbits import (
    FrameReport,
    OrbitSystem,
    frame_bounds,
    frame_operator_stein,
    orbit_coeff_identity_check,
    rank_one_classifier,
)
from .similarity import (
    SimilarityResult,
    coinvariant_complement,
    orbit_synthesis_matrix,
    similarity_verify,
)
from .toeplitz import (
    BlockToeplitz,
    TruncatedHardy,
    model_projection_matrix,
    rigidity_check,
    toeplitz_adjoint_matrix,
    toeplitz_matrix,
    truncated_shift,
)

__version__ = "0.1.0"

__all__ = [
    "Arc",
    "AnalyticMatrixFunction",
    "BilateralReport",
    "BilateralSimilarityNote",
    "BlaschkeProduct",
    "BlockToeplitz",
    "ComplexPoly",
    "CoronaCertificate",
    "DiskGrid",
    "FrameNumberResult",
    "FrameReport",
    "ModelSpace",
    "OrbitFramesError",
    "OrbitSystem",
    "PiecewiseSymbol",
    "RationalFn",
    "SimilarityResult",
    "TruncatedHardy",
    "active_backend",
    "apply_thread_cap",
    "bessel_symbol_check",
    "bilateral_frame_number",
    "bilateral_similarity_note",
    "blaschke_from_zeros",
    "coinvariant_complement",
    "corona_infimum",
    "direct_bilateral_sum",
    "fiber_frame_bounds",
    "frame_bounds",
    "frame_number_witnesses",
    "frame_operator_stein",
    "interpolate_kernel_spanning_symbol",
    "make_grid",
    "minimality_check",
    "model_projection_matrix",
    "model_space_diagonal",
    "model_space_scalar",
    "model_space_truncated",
    "mult_adjoint_norm_sq",
    "obstruction_witness",
    "orbit_coeff_identity_check",
    "orbit_synthesis_matrix",
    "rank_one_classifier",
    "rigidity_check",
    "sample_on_circle",
    "set_backend",
    "similarity_verify",
    "stacked_adjoint_gap",
    "taylor_coeffs",
    "toeplitz_adjoint_matrix",
    "toeplitz_lower_bound",
    "toeplitz_matrix",
    "truncated_shift",
    "unilateral_frame_number",
    "validate_projection_symbol",
]
