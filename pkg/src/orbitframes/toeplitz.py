"""Truncated block-Toeplitz realizations on vector Hardy coefficients.

Truncated vectors are graded by power then component: coefficient of z^n in
component i sits at flat index n*m + i. Analytic symbols give block
lower-triangular Toeplitz matrices, so truncation commutes with the
operator action on low-degree inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotRigid
from .hardy import AnalyticMatrixFunction

# rigidity: boundary singular values within this of {0, 1}
RIGID_SV_TOL = 1e-8
# and the initial-space projector constant across points within this
RIGID_PROJ_TOL = 1e-6
RIGID_BOUNDARY_POINTS = 256


@dataclass(frozen=True)
class TruncatedHardy:
    """Coordinate frame for truncations: m components, powers 0..order-1."""

    mult: int
    order: int

    @property
    def dim(self) -> int:
        return self.mult * self.order

    def flat_index(self, power: int, component: int) -> int:
        return power * self.mult + component

    def blocks(self, vec: np.ndarray) -> np.ndarray:
        """Reshape a flat vector to (order, mult) coefficient rows."""
        return np.asarray(vec, dtype=np.complex128).reshape(self.order, self.mult)


def truncated_shift(m: int, N: int) -> np.ndarray:
    """Block down-shift on TruncatedHardy(m, N); isometric below the top power."""
    return np.eye(m * N, m * N, -m, dtype=np.complex128)


@dataclass(frozen=True)
class BlockToeplitz:
    symbol: AnalyticMatrixFunction
    order: int
    matrix: np.ndarray

    @property
    def shape(self):
        return self.matrix.shape


def toeplitz_matrix(F: AnalyticMatrixFunction, N: int) -> BlockToeplitz:
    """Truncation of the analytic Toeplitz operator with symbol F.

    Block (i, j) is the Taylor coefficient c_{i-j}, zero above the block
    diagonal. Exact on inputs of degree <= N-1-deg(F) for polynomial F.
    """
    if N < 1:
        raise ValueError("order must be >= 1")
    m, k = F.shape
    c = F.taylor_tensor(N)  # (N, m, k)
    M = np.zeros((m * N, k * N), dtype=np.complex128)
    for d in range(N):
        block = c[d]
        for j in range(N - d):
            i = j + d
            M[i * m : (i + 1) * m, j * k : (j + 1) * k] = block
    M.setflags(write=False)
    return BlockToeplitz(F, N, M)


def toeplitz_adjoint_matrix(F: AnalyticMatrixFunction, N: int) -> np.ndarray:
    """Truncation of T_{F*}: the conjugate transpose of the truncation of T_F."""
    return toeplitz_matrix(F, N).matrix.conj().T


def rigidity_check(theta: AnalyticMatrixFunction,
                   n_points: int = RIGID_BOUNDARY_POINTS):
    """Boundary partial-isometry test with a common initial space.

    Returns (ok, initial_projector, max_sv_deviation, max_proj_drift).
    The zero symbol passes with the zero projector.
    """
    m, k = theta.shape
    if m != k:
        return False, None, np.inf, np.inf
    pts = np.exp(2j * np.pi * np.arange(n_points) / n_points)
    vals = theta.eval_grid(pts)  # (P, m, m)
    sv = np.linalg.svd(vals, compute_uv=False)
    dev = float(np.max(np.abs(sv - np.round(sv))))
    if dev > RIGID_SV_TOL or np.any(np.round(sv) > 1):
        return False, None, dev, np.inf
    proj0 = None
    drift = 0.0
    for p in range(n_points):
        _, s, wh = np.linalg.svd(vals[p])
        w1 = wh[s > 0.5].conj().T
        proj = w1 @ w1.conj().T if w1.size else np.zeros((m, m), dtype=np.complex128)
        if proj0 is None:
            proj0 = proj
        else:
            drift = max(drift, float(np.linalg.norm(proj - proj0, 2)))
    ok = drift <= RIGID_PROJ_TOL
    return ok, proj0, dev, drift


def model_projection_matrix(theta: AnalyticMatrixFunction, N: int) -> np.ndarray:
    """Truncation of the model-space projection I - T_Theta T_{Theta*}.

    Requires a rigid symbol (boundary partial isometries with common
    initial space, or identically zero). Self-adjoint by construction; for
    inner Theta it is idempotent up to the truncation tail.
    """
    ok, _, dev, drift = rigidity_check(theta)
    if not ok:
        raise NotRigid(
            f"symbol fails the boundary partial-isometry test "
            f"(singular value deviation {dev:.3g}, projector drift {drift:.3g})"
        )
    T = toeplitz_matrix(theta, N).matrix
    P = np.eye(T.shape[0], dtype=np.complex128) - T @ T.conj().T
    P = 0.5 * (P + P.conj().T)
    P.setflags(write=False)
    return P


def idempotency_defect(P: np.ndarray, active_dim: int | None = None) -> float:
    """Spectral norm of P^2 - P, optionally restricted to leading coordinates."""
    D = P @ P - P
    if active_dim is not None:
        D = D[:, :active_dim]
    return float(np.linalg.norm(D, 2))


def default_order(symbol_degree: int, model_dim: int = 0) -> int:
    """Truncation order heuristic: max(2*degree, 4*model dim, 32)."""
    return max(2 * int(symbol_degree), 4 * int(model_dim), 32)


def matrix_to_csv(M: np.ndarray, path: str) -> None:
    """Debug export, row-major with "re,im" per cell (no stable format)."""
    M = np.atleast_2d(np.asarray(M, dtype=np.complex128))
    with open(path, "w") as fh:
        for row in M:
            fh.write(",".join(f"{float(v.real)!r},{float(v.imag)!r}" for v in row))
            fh.write("\n")
