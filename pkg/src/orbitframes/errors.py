"""Exception types shared across the package.

Every guard that rejects an input raises one of these, so callers (and the
CLI) can distinguish bad data from genuine computation failures.
"""


class OrbitFramesError(Exception):
    """Base class for all package errors."""


# ---------------------------------------------------------------------------
# rational symbol layer


class ZeroOutsideDisk(OrbitFramesError):
    """A Blaschke zero has modulus >= 1."""


class NotUnimodular(OrbitFramesError):
    """A constant that must have modulus 1 does not."""


class PoleTooClose(OrbitFramesError):
    """A denominator root lies within the evaluation guard distance."""


class PoleInsideDisk(OrbitFramesError):
    """A denominator root has modulus <= 1 + 1e-9; symbol not analytic."""


class DegreeZero(OrbitFramesError):
    """A nonconstant inner function was required."""


# ---------------------------------------------------------------------------
# truncation / model space


class NotRigid(OrbitFramesError):
    """Boundary values are not partial isometries with common initial space."""


class NoSpectralGap(OrbitFramesError):
    """Singular values do not split cleanly at the rank tolerance."""


class DimensionMismatch(OrbitFramesError):
    """Matrix shapes are incompatible."""


# ---------------------------------------------------------------------------
# orbit analysis


class SpectralRadiusTooLarge(OrbitFramesError):
    """Exact series summation requires spectral radius < 1 - 1e-9."""


class ZeroVector(OrbitFramesError):
    """A vector that must be nonzero is zero."""


# ---------------------------------------------------------------------------
# frame number / corona


class RepeatedZeros(OrbitFramesError):
    """Determinant zeros are not simple (pairwise distance < 1e-6)."""


class CertificationFailed(OrbitFramesError):
    """A corona certificate could not be established on any retry grid."""


# ---------------------------------------------------------------------------
# bilateral


class NotProjection(OrbitFramesError):
    """A symbol piece is not an orthogonal projection matrix."""


class ColumnsNotInRange(OrbitFramesError):
    """Generator columns leave the fiber range of the projection symbol."""


class NotNormal(OrbitFramesError):
    """A matrix that must be normal is not."""


class SpectrumOffCircle(OrbitFramesError):
    """Eigenvalues are not on the unit circle within tolerance."""


# ---------------------------------------------------------------------------
# CLI


class ParseError(OrbitFramesError):
    """Problem file is not well-formed JSON."""


class SchemaError(OrbitFramesError):
    """Problem file violates the strict schema; message carries a JSON pointer."""


class ComputeError(OrbitFramesError):
    """A module raised during task execution."""
