"""Finite orthonormal realizations of model spaces and compressed shifts.

Three construction routes. Scalar and diagonal Blaschke data get explicit
rational orthonormal bases (products of elementary disk automorphisms with
normalizing factors), truncated to coefficient coordinates and re-polished
by QR. General rigid symbols go through the numerical kernel of the
truncated adjoint Toeplitz matrix, with an explicit spectral-gap demand so
rank decisions are never silent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DegreeZero, NoSpectralGap
from .hardy import (
    AnalyticMatrixFunction,
    BlaschkeProduct,
    ComplexPoly,
    RationalFn,
    complex_matrix_to_json,
    matrix_symbol_to_json,
)
from .toeplitz import (
    default_order,
    model_projection_matrix,
    toeplitz_adjoint_matrix,
    truncated_shift,
)

RANK_TOL = 1e-7
GAP_RATIO = 1e3


@dataclass(frozen=True)
class ModelSpace:
    """Orthonormal coordinates for the orthogonal complement of the range
    of the inner symbol's Toeplitz operator inside TruncatedHardy(m, order).
    """

    theta: AnalyticMatrixFunction
    dim: int
    basis: np.ndarray  # (m*order, dim), orthonormal columns
    order: int
    shift_matrix: np.ndarray  # compression of the truncated shift
    construction: str  # exact-scalar | exact-diagonal | truncated-svd

    @property
    def mult(self) -> int:
        return self.theta.rows

    # -- projection ----------------------------------------------------

    def _projection(self) -> np.ndarray:
        return model_projection_matrix(self.theta, self.order)

    def project(self, f: AnalyticMatrixFunction):
        """Coordinates of the model-space projection of a rational column.

        Returns (coords, residual). The residual is the norm of the
        projection defect (I - P) applied to the projected vector; it
        collects truncation error, and is zero for exact inner data.
        """
        if f.cols != 1 or f.rows != self.mult:
            raise ValueError("expected a column symbol matching the space")
        vec = f.taylor_tensor(self.order).reshape(-1)
        P = self._projection()
        p = P @ vec
        residual = float(np.linalg.norm(p - P @ p))
        coords = self.basis.conj().T @ p
        return coords, residual

    def lift(self, coords: np.ndarray) -> np.ndarray:
        """Coefficient-space vector of basis coordinates."""
        return self.basis @ np.asarray(coords, dtype=np.complex128)

    # -- serialization ---------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "theta": matrix_symbol_to_json(self.theta),
            "dim": int(self.dim),
            "order": int(self.order),
            "basis": complex_matrix_to_json(self.basis),
            "shift_matrix": complex_matrix_to_json(self.shift_matrix),
            "construction": self.construction,
        }


# ---------------------------------------------------------------------------
# construction helpers


def _qr_polish(B: np.ndarray) -> np.ndarray:
    """Orthonormalize columns, keeping orientation (positive R diagonal)."""
    Q, R = np.linalg.qr(B)
    d = np.diag(R).copy()
    d[np.abs(d) < 1e-300] = 1.0
    return Q @ np.diag(d / np.abs(d))


def _phase_fix(B: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-modulus entry is positive real."""
    out = B.copy()
    for j in range(out.shape[1]):
        i = int(np.argmax(np.abs(out[:, j])))
        v = out[i, j]
        if abs(v) > 0:
            out[:, j] *= np.conj(v) / abs(v)
    return out


def _tm_basis_columns(zeros: np.ndarray, N: int) -> np.ndarray:
    """Truncated coefficients of the orthonormal rational basis of K_u.

    Column k is sqrt(1-|a_k|^2)/(1-conj(a_k) z) times the product of the
    first k elementary factors (z-a_j)/(1-conj(a_j) z).
    """
    d = len(zeros)
    cols = np.zeros((N, d), dtype=np.complex128)
    prefix = RationalFn.constant(1.0)
    for k in range(d):
        a = zeros[k]
        c = np.sqrt(1.0 - abs(a) ** 2)
        phi = prefix * RationalFn(ComplexPoly([c]), ComplexPoly([1.0, -np.conj(a)]),
                                  reduce=False)
        cols[:, k] = phi.taylor(N)
        prefix = prefix * RationalFn(ComplexPoly([-a, 1.0]),
                                     ComplexPoly([1.0, -np.conj(a)]), reduce=False)
    return cols


def _compress_shift(basis: np.ndarray, m: int, N: int) -> np.ndarray:
    S = truncated_shift(m, N)
    return basis.conj().T @ S @ basis


def model_space_scalar(u: BlaschkeProduct, N: int | None = None) -> ModelSpace:
    """Model space of a scalar finite Blaschke product."""
    d = u.degree
    if d == 0:
        raise DegreeZero("constant inner function has trivial model space")
    if N is None:
        N = default_order(d, d)
    if N < 2 * d + 8:
        raise ValueError("order too small for the basis truncation")
    basis = _qr_polish(_tm_basis_columns(u.zeros, N))
    basis.setflags(write=False)
    shift = _compress_shift(basis, 1, N)
    theta = AnalyticMatrixFunction([[u.as_rational()]])
    return ModelSpace(theta, d, basis, N, shift, "exact-scalar")


def model_space_diagonal(blocks, N: int | None = None) -> ModelSpace:
    """Direct sum of scalar model spaces for a diagonal inner symbol."""
    blocks = list(blocks)
    m = len(blocks)
    if m == 1:
        return model_space_scalar(blocks[0], N)
    degs = [b.degree for b in blocks]
    if any(dg == 0 for dg in degs):
        raise DegreeZero("every diagonal entry must be nonconstant")
    dim = sum(degs)
    if N is None:
        N = default_order(max(degs), dim)
    if N < 2 * max(degs) + 8:
        raise ValueError("order too small for the basis truncation")
    basis = np.zeros((m * N, dim), dtype=np.complex128)
    col = 0
    for i, b in enumerate(blocks):
        scalar_cols = _tm_basis_columns(b.zeros, N)  # (N, deg)
        # embed component i at stride m
        basis[i::m, col : col + degs[i]] = scalar_cols
        col += degs[i]
    basis = _qr_polish(basis)
    basis.setflags(write=False)
    shift = _compress_shift(basis, m, N)
    theta = AnalyticMatrixFunction.diagonal([b.as_rational() for b in blocks])
    return ModelSpace(theta, dim, basis, N, shift, "exact-diagonal")


def model_space_truncated(theta: AnalyticMatrixFunction, N: int | None = None,
                          rank_tol: float = RANK_TOL) -> ModelSpace:
    """Model space as the numerical kernel of the truncated adjoint Toeplitz.

    Requires a clean spectral split: every singular value below rank_tol is
    treated as kernel, and the smallest survivor must exceed the largest
    kernel value by GAP_RATIO, else NoSpectralGap.
    """
    m = theta.rows
    if N is None:
        N = default_order(theta.degree, m * max(theta.degree, 1))
    if theta.is_zero():
        basis = np.eye(m * N, dtype=np.complex128)
        basis.setflags(write=False)
        shift = _compress_shift(basis, m, N)
        return ModelSpace(theta, m * N, basis, N, shift, "truncated-svd")
    A = toeplitz_adjoint_matrix(theta, N)
    _, s, vh = np.linalg.svd(A)
    s = s[::-1]  # ascending
    vh = vh[::-1]
    below = int(np.searchsorted(s, rank_tol))
    if 0 < below < len(s):
        floor = max(float(s[below - 1]), 1e-300)
        if float(s[below]) / floor < GAP_RATIO:
            raise NoSpectralGap(
                f"singular values {s[below - 1]:.3e} and {s[below]:.3e} do not "
                f"split at {rank_tol:g} with ratio {GAP_RATIO:g}; raise the order "
                f"or check rigidity"
            )
    basis = _phase_fix(vh[:below].conj().T)
    basis.setflags(write=False)
    shift = _compress_shift(basis, m, N)
    return ModelSpace(theta, below, basis, N, shift, "truncated-svd")


# ---------------------------------------------------------------------------
# diagnostics


def match_distance(got, want) -> float:
    """Max pairwise distance under optimal bipartite matching of two multisets."""
    got = np.asarray(got, dtype=np.complex128).ravel()
    want = np.asarray(want, dtype=np.complex128).ravel()
    if len(got) != len(want):
        return np.inf
    if len(got) == 0:
        return 0.0
    cost = np.abs(got[:, None] - want[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols]))


def principal_angles(B1: np.ndarray, B2: np.ndarray) -> np.ndarray:
    """Principal angles between the column spans of two orthonormal bases."""
    sv = np.linalg.svd(B1.conj().T @ B2, compute_uv=False)
    return np.arccos(np.clip(sv, -1.0, 1.0))
