"""Frame and Bessel analysis of unilateral operator orbits.

For a d x d matrix T and generator columns G, the orbit {T^n g_j : n >= 0}
is a frame exactly when the series Phi = sum T^n G G* T*^n converges to an
operator with positive lower bound. When the spectral radius is strictly
inside the disk, Phi solves the Stein equation Phi - T Phi T* = G G* and
the frame bounds are its extreme eigenvalues. Otherwise only truncated
partial sums are available: lower bounds are monotone and trustworthy,
upper bounds are subject to divergence detection, and a frame verdict is
never claimed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_discrete_lyapunov

from .errors import SpectralRadiusTooLarge, ZeroVector
from .modelspace import ModelSpace
from .hardy import AnalyticMatrixFunction, ComplexPoly, RationalFn
from .toeplitz import toeplitz_adjoint_matrix

# strictly-inside-the-disk guard shared with the synthesis module
RHO_MARGIN = 1e-9
# dense Stein solves are capped at this dimension; larger systems take the
# truncated route even when the spectral radius is small
STEIN_DIM_CAP = 200
STEIN_RESIDUAL_TOL = 1e-10
STEIN_REFINE_ROUNDS = 3

TRUNC_MAX_TERMS = 2048
DIVERGENCE_CAP_FACTOR = 1e6


@dataclass(frozen=True)
class OrbitSystem:
    """Finite-dimensional orbit data: matrix T and generator columns G."""

    T: np.ndarray
    G: np.ndarray
    spectral_radius: float = field(init=False)

    def __post_init__(self):
        T = np.atleast_2d(np.asarray(self.T, dtype=np.complex128))
        G = np.asarray(self.G, dtype=np.complex128)
        if G.ndim == 1:
            G = G[:, None]
        if T.shape[0] != T.shape[1]:
            raise ValueError("T must be square")
        if G.shape[0] != T.shape[0]:
            raise ValueError("generator rows must match dim of T")
        T.setflags(write=False)
        G.setflags(write=False)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "G", G)
        rho = float(np.max(np.abs(np.linalg.eigvals(T)))) if T.size else 0.0
        object.__setattr__(self, "spectral_radius", rho)

    @property
    def dim(self) -> int:
        return self.T.shape[0]

    @property
    def n_generators(self) -> int:
        return self.G.shape[1]


@dataclass(frozen=True)
class FrameReport:
    is_bessel: bool
    is_frame: bool
    lower_bound_A: float
    upper_bound_B: float
    method: str  # stein-exact | truncated
    tail_bound: float
    diagnostics: dict

    def to_json_dict(self) -> dict:
        return {
            "is_bessel": self.is_bessel,
            "is_frame": self.is_frame,
            "lower_bound_A": self.lower_bound_A,
            "upper_bound_B": self.upper_bound_B,
            "method": self.method,
            "tail_bound": self.tail_bound,
            "diagnostics": dict(self.diagnostics),
        }


def frame_operator_stein(sys: OrbitSystem) -> np.ndarray:
    """Exact frame operator Phi = sum T^n G G* T*^n via the Stein equation.

    Solved dense (Schur-based) with iterative refinement until the residual
    Phi - T Phi T* - G G* drops below 1e-10 relative.
    """
    if sys.spectral_radius >= 1.0 - RHO_MARGIN:
        raise SpectralRadiusTooLarge(
            f"spectral radius {sys.spectral_radius:.12g} >= 1 - 1e-9; "
            f"use the truncated orbit path"
        )
    if sys.dim > STEIN_DIM_CAP:
        raise ValueError(f"dense Stein solve capped at dimension {STEIN_DIM_CAP}")
    T = sys.T
    Q = sys.G @ sys.G.conj().T
    Phi = solve_discrete_lyapunov(T, Q)
    for _ in range(STEIN_REFINE_ROUNDS):
        R = Phi - T @ Phi @ T.conj().T - Q
        err = np.linalg.norm(R, "fro")
        if err <= STEIN_RESIDUAL_TOL * (1.0 + np.linalg.norm(Phi, "fro")):
            break
        Phi = Phi - solve_discrete_lyapunov(T, R)
    Phi = 0.5 * (Phi + Phi.conj().T)
    return Phi


def _stein_report(sys: OrbitSystem, frame_tol) -> FrameReport:
    Phi = frame_operator_stein(sys)
    w = np.linalg.eigvalsh(Phi)
    A = float(max(w[0], 0.0))
    B = float(max(w[-1], 0.0))
    tol = frame_tol if frame_tol is not None else 1e-9 * B
    resid = float(np.linalg.norm(Phi - sys.T @ Phi @ sys.T.conj().T
                                 - sys.G @ sys.G.conj().T, "fro"))
    diag = {
        "spectral_radius": sys.spectral_radius,
        "stein_residual": resid,
        "frame_tol": float(tol),
        "near_degenerate": bool(0.0 < A <= tol),
    }
    return FrameReport(True, bool(A > tol), A, B, "stein-exact", 0.0, diag)


def _window_means(vals, n_windows):
    chunks = np.array_split(np.asarray(vals, dtype=float), n_windows)
    return [float(np.mean(c)) for c in chunks]


def _truncated_report(sys: OrbitSystem, frame_tol, n_terms) -> FrameReport:
    T, G = sys.T, sys.G
    d = sys.dim
    gnorm2 = float(np.sum(np.abs(G) ** 2))
    cap = DIVERGENCE_CAP_FACTOR * max(gnorm2, 1e-300)
    Phi = np.zeros((d, d), dtype=np.complex128)
    X = G.copy()
    increments = []
    exact = False
    capped = False
    used = 0
    for n in range(n_terms):
        inc = float(np.sum(np.abs(X) ** 2))
        if inc <= 1e-300:
            exact = True  # orbit terminated: the partial sum is the series
            break
        Phi += X @ X.conj().T
        increments.append(inc)
        used = n + 1
        X = T @ X
        if (n + 1) % 64 == 0 and float(np.trace(Phi).real) > cap:
            capped = True
            break
    Phi = 0.5 * (Phi + Phi.conj().T)
    w = np.linalg.eigvalsh(Phi) if d else np.zeros(1)
    A = float(max(w[0], 0.0))
    B = float(max(w[-1], 0.0))
    tol = frame_tol if frame_tol is not None else 1e-9 * B
    diag = {
        "spectral_radius": sys.spectral_radius,
        "terms_used": used,
        "frame_tol": float(tol),
        "near_degenerate": bool(0.0 < A <= tol),
    }

    if capped or B > cap:
        diag["divergence"] = "partial-sum-cap"
        return FrameReport(False, False, A, B, "truncated", float("inf"), diag)

    if exact:
        diag["termination"] = "orbit-nilpotent-on-generators"
        return FrameReport(True, bool(A > tol), A, B, "truncated", 0.0, diag)

    # series did not terminate within the budget: decide from the increments
    if sys.spectral_radius >= 1.0 - RHO_MARGIN:
        half = increments[len(increments) // 2 :]
        wm = _window_means(half, 8) if len(half) >= 16 else None
        floor = 1e-12 * gnorm2 / max(d, 1)
        if wm is not None and min(wm[4:]) >= 0.5 * max(wm[:4]) and wm[-1] > floor:
            # non-decaying energy increments certify a divergent series
            diag["divergence"] = "non-decaying-increments"
            return FrameReport(False, False, A, B, "truncated", float("inf"), diag)
        diag["note"] = ("partial sums only: spectral radius at or above the "
                        "unit circle, no frame verdict is claimable")
        return FrameReport(True, False, A, B, "truncated", float("inf"), diag)

    # rho < 1 here (large dimension routed past the Stein cap): estimate the
    # geometric tail from the observed increment decay
    lag = min(16, len(increments) - 1)
    q = (increments[-1] / increments[-1 - lag]) ** (1.0 / lag)
    if q < 0.999:
        tail = 10.0 * increments[-1] * q / (1.0 - q)
    else:
        tail = float("inf")
    diag["tail_ratio"] = float(q)
    certain = np.isfinite(tail)
    return FrameReport(
        True,
        bool(certain and A > tol),
        A,
        B,
        "truncated",
        float(tail),
        diag,
    )


def frame_bounds(sys: OrbitSystem, frame_tol: float | None = None,
                 n_terms: int = TRUNC_MAX_TERMS) -> FrameReport:
    """Frame report for the unilateral orbit of sys.

    Exact (Stein) route when the spectral radius is strictly inside the
    disk and the dimension is within the dense cap; truncated partial sums
    otherwise. The truncated route never claims a frame at spectral radius
    1 or above.
    """
    if sys.spectral_radius < 1.0 - RHO_MARGIN and sys.dim <= STEIN_DIM_CAP:
        return _stein_report(sys, frame_tol)
    return _truncated_report(sys, frame_tol, n_terms)


# ---------------------------------------------------------------------------
# rank-one orbits


def rank_one_classifier(f: np.ndarray, g: np.ndarray, X: np.ndarray,
                        frame_tol: float | None = None) -> FrameReport:
    """Orbit analysis for T = f g* acting on generator columns X.

    The verdict depends only on |<f, g>|: below 1 the orbit of X is a
    frame exactly when the columns of X already are; at 1 or above it is
    never a frame, and fails to be Bessel as soon as some column is not
    orthogonal to g. The analytic verdict is cross-checked against the
    numeric frame_bounds report.
    """
    f = np.asarray(f, dtype=np.complex128).ravel()
    g = np.asarray(g, dtype=np.complex128).ravel()
    if not np.any(f) or not np.any(g):
        raise ZeroVector("rank-one factors must be nonzero")
    X = np.asarray(X, dtype=np.complex128)
    if X.ndim == 1:
        X = X[:, None]
    T = np.outer(f, g.conj())
    ip = np.vdot(g, f)  # <f, g>
    sys = OrbitSystem(T, X)
    report = frame_bounds(sys, frame_tol)

    cols_lambda_min = float(np.linalg.eigvalsh(X @ X.conj().T)[0])
    cols_frame = cols_lambda_min > (frame_tol if frame_tol is not None else 1e-12)
    overlap = float(np.max(np.abs(X.conj().T @ g))) if X.size else 0.0

    if abs(ip) < 1e-12:
        case = "orthogonal-pair"
        claim_frame, claim_bessel = cols_frame, True
    elif abs(ip) >= 1.0 - 1e-12:
        case = "expansive"
        claim_bessel = overlap <= 1e-12
        claim_frame = False
    else:
        case = "contractive"
        claim_frame, claim_bessel = cols_frame, True

    agree = (claim_frame == report.is_frame) and (claim_bessel == report.is_bessel)
    diag = dict(report.diagnostics)
    diag.update({
        "case": case,
        "inner_product_modulus": float(abs(ip)),
        "columns_lambda_min": cols_lambda_min,
        "classifier_is_frame": claim_frame,
        "classifier_is_bessel": claim_bessel,
        "classifier_agrees": bool(agree),
    })
    return FrameReport(report.is_bessel, report.is_frame, report.lower_bound_A,
                       report.upper_bound_B, report.method, report.tail_bound, diag)


# ---------------------------------------------------------------------------
# coefficient identity on a model space


def orbit_coeff_identity_check(K: ModelSpace, gen_coords: np.ndarray,
                               h_coords: np.ndarray, n_terms: int) -> float:
    """Difference between orbit coefficient energy and the adjoint Toeplitz norm.

    Left side: sum over n < n_terms and generators j of |<h, S^n g_j>|^2,
    computed in model-space coordinates with the compressed shift. Right
    side: squared norm of the truncated adjoint Toeplitz matrix (symbol
    assembled from the lifted generators) applied to the lifted h. Both
    sides realize the same quantity; the return value is their absolute
    difference, bounded by the orbit tail.
    """
    gen_coords = np.asarray(gen_coords, dtype=np.complex128)
    if gen_coords.ndim == 1:
        gen_coords = gen_coords[:, None]
    h = np.asarray(h_coords, dtype=np.complex128).ravel()

    total = 0.0
    cur = gen_coords.copy()
    for _ in range(n_terms):
        total += float(np.sum(np.abs(cur.conj().T @ h) ** 2))
        cur = K.shift_matrix @ cur

    m, N = K.mult, K.order
    lifted = K.basis @ gen_coords  # (m*N, k) coefficient columns
    entries = []
    for i in range(m):
        row = []
        for j in range(gen_coords.shape[1]):
            row.append(RationalFn(ComplexPoly(lifted[i::m, j])))
        entries.append(row)
    Gsym = AnalyticMatrixFunction(entries)
    A = toeplitz_adjoint_matrix(Gsym, N)
    rhs = float(np.linalg.norm(A @ (K.basis @ h)) ** 2)
    return abs(total - rhs)
