"""Grid certification of the matrix corona bound and frame numbers.

The pointwise condition F(z)F*(z) + Theta(z)Theta*(z) >= eta^2 I over the
closed disk is certified by minimizing the smallest eigenvalue over a polar
grid, with one automatic refinement pass clustered at the grid minimizer.
Frame-number computation finds the determinant zeros of an inner symbol,
measures kernel dimensions there, and synthesizes a certified generator
symbol by rational interpolation through those kernels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    DegreeZero,
    DimensionMismatch,
    NoSpectralGap,
    RepeatedZeros,
)
from .hardy import (
    AnalyticMatrixFunction,
    ComplexPoly,
    DiskGrid,
    RationalFn,
    cluster_points,
    complex_to_pair,
    make_grid,
    matrix_symbol_to_json,
)
from .modelspace import GAP_RATIO, RANK_TOL, model_space_truncated
from .toeplitz import toeplitz_adjoint_matrix, toeplitz_matrix

# one-round refinement cluster around the grid minimizer
REFINE_RADIUS = 1e-2
REFINE_RINGS = 4
REFINE_ANGLES = 8
# det zeros closer than this are treated as repeated
ZERO_CLUSTER_TOL = 1e-6
DEFAULT_THRESHOLD = 1e-6


@dataclass(frozen=True)
class CoronaCertificate:
    eta_sq: float
    grid: DiskGrid
    argmin_point: complex
    passed: bool
    threshold: float
    # per-point values on the recorded grid, for CSV dumps and audits
    lambda_values: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "eta_sq": self.eta_sq,
            "grid": {
                "radii": [float(r) for r in self.grid.radii],
                "angles_per_radius": int(self.grid.angles_per_radius),
                "extra_points": [complex_to_pair(p) for p in self.grid.extra_points],
                "size": int(self.grid.size),
            },
            "argmin_point": complex_to_pair(self.argmin_point),
            "passed": self.passed,
            "threshold": self.threshold,
        }


@dataclass(frozen=True)
class FrameNumberResult:
    p: int
    witnesses: list  # (det zero, kernel dimension) pairs
    F_constructed: AnalyticMatrixFunction | None
    construction_certificate: CoronaCertificate | None

    def to_json_dict(self) -> dict:
        return {
            "p": int(self.p),
            "witnesses": [[complex_to_pair(z), int(d)] for z, d in self.witnesses],
            "F_constructed": (None if self.F_constructed is None
                              else matrix_symbol_to_json(self.F_constructed)),
            "construction_certificate": (
                None if self.construction_certificate is None
                else self.construction_certificate.to_json_dict()),
        }


def grid_lambda_min(F: AnalyticMatrixFunction, theta: AnalyticMatrixFunction,
                    pts) -> np.ndarray:
    """Smallest eigenvalue of F(z)F*(z) + Theta(z)Theta*(z) per point."""
    pts = np.asarray(pts, dtype=np.complex128).ravel()
    fvals = F.eval_grid(pts)
    tvals = theta.eval_grid(pts)
    return kernels.gram_lambda_min(fvals, tvals)


def corona_infimum(F: AnalyticMatrixFunction, theta: AnalyticMatrixFunction,
                   grid: DiskGrid, threshold: float = DEFAULT_THRESHOLD,
                   refine: bool = True) -> CoronaCertificate:
    """Certified grid infimum of the corona quadratic form.

    The argmin is the first occurrence in grid order (radius-major,
    angle-minor, refinement points appended), so reruns are deterministic.
    With refine=True one cluster of extra points of radius 1e-2 is added
    around the minimizer and the infimum recomputed.
    """
    if theta.rows != theta.cols:
        raise DimensionMismatch("second symbol must be square")
    if F.rows != theta.rows:
        raise DimensionMismatch(
            f"row counts differ: {F.rows} vs {theta.rows}")
    lam = grid_lambda_min(F, theta, grid.points)
    idx = int(np.argmin(lam))
    if refine:
        extra = cluster_points(grid.points[idx], REFINE_RADIUS,
                               n_rings=REFINE_RINGS, n_angles=REFINE_ANGLES)
        grid = grid.with_extra(extra)
        lam = np.concatenate([lam, grid_lambda_min(F, theta, extra)])
        idx = int(np.argmin(lam))
    eta_sq = float(lam[idx])
    lam.setflags(write=False)
    return CoronaCertificate(eta_sq, grid, complex(grid.points[idx]),
                             bool(eta_sq > threshold), float(threshold), lam)


def toeplitz_lower_bound(F: AnalyticMatrixFunction,
                         theta: AnalyticMatrixFunction,
                         N: int | None = None) -> float:
    """Smallest eigenvalue of the compressed T_F T_{F*} on the model space.

    Numerical surrogate for the squared lower bound of the adjoint symbol
    operator restricted to the model space of theta; vanishes (up to
    truncation) exactly when the corona condition fails somewhere on the disk.
    """
    K = model_space_truncated(theta, N)
    if K.dim == 0:
        return float("inf")  # nothing to bound below on a trivial space
    T = toeplitz_matrix(F, K.order).matrix
    M = K.basis.conj().T @ (T @ T.conj().T) @ K.basis
    M = 0.5 * (M + M.conj().T)
    return float(max(np.linalg.eigvalsh(M)[0], 0.0))


def stacked_adjoint_gap(F: AnalyticMatrixFunction,
                        theta: AnalyticMatrixFunction, N: int) -> float:
    """Smallest singular value of the stacked truncated adjoints.

    Stacking [T_{F*}; T_{Theta*}] certifies the quadratic form
    |T_{F*}h|^2 + |T_{Theta*}h|^2 >= gap^2 |h|^2, the squared-sum version
    of the two-term lower bound (equivalent up to sqrt(2)).
    """
    A1 = toeplitz_adjoint_matrix(F, N)
    A2 = toeplitz_adjoint_matrix(theta, N)
    stacked = np.vstack([A1, A2])
    return float(np.linalg.svd(stacked, compute_uv=False)[-1])


# ---------------------------------------------------------------------------
# frame number


def _kernel_dim(M: np.ndarray, rank_tol: float) -> int:
    s = np.linalg.svd(M, compute_uv=False)[::-1]  # ascending
    below = int(np.searchsorted(s, rank_tol))
    if 0 < below < len(s):
        floor = max(float(s[below - 1]), 1e-300)
        if float(s[below]) / floor < GAP_RATIO:
            raise NoSpectralGap(
                f"kernel rank ambiguous: singular values {s[below - 1]:.3e} "
                f"and {s[below]:.3e} straddle {rank_tol:g}")
    return below


def det_zeros_in_disk(theta: AnalyticMatrixFunction) -> np.ndarray:
    """Open-disk zeros of det Theta, via companion roots of the numerator."""
    det = theta.det()
    if det.num.degree <= 0:
        if det.is_zero:
            raise DegreeZero("determinant vanishes identically")
        raise DegreeZero("determinant has no zeros: nothing to witness")
    roots = det.num.roots()
    roots = roots[np.abs(roots) < 1.0 - 1e-9]
    if roots.size == 0:
        raise DegreeZero("determinant has no zeros inside the open disk")
    return roots


def frame_number_witnesses(theta: AnalyticMatrixFunction,
                           rank_tol: float = RANK_TOL):
    """Determinant zeros paired with kernel dimensions; p is their max.

    Zeros are clustered at 1e-6 so a multiple zero is reported once with
    its full multiplicity count available to callers; kernel dimension is
    measured at the cluster representative.
    """
    zeros = det_zeros_in_disk(theta)
    clusters: list[list[complex]] = []
    for z in sorted(zeros, key=lambda w: (round(abs(w), 12), np.angle(w))):
        for c in clusters:
            if abs(z - c[0]) < ZERO_CLUSTER_TOL:
                c.append(z)
                break
        else:
            clusters.append([z])
    witnesses = []
    multiplicities = []
    for c in clusters:
        rep = complex(np.mean(c))
        dim = _kernel_dim(theta.eval(rep), rank_tol)
        witnesses.append((rep, dim))
        multiplicities.append(len(c))
    p = max(d for _, d in witnesses)
    return p, witnesses, multiplicities


def _blaschke_lagrange_basis(nodes: np.ndarray) -> list:
    """Rational cardinal functions on distinct disk nodes.

    L_i has Blaschke-type factors (z - z_j)/(1 - conj(z_j) z), so it stays
    analytic on the closed disk, equals 1 at z_i and 0 at the other nodes.
    """
    out = []
    for i, zi in enumerate(nodes):
        L = RationalFn.constant(1.0)
        for j, zj in enumerate(nodes):
            if j == i:
                continue
            factor = RationalFn(ComplexPoly([-zj, 1.0]),
                                ComplexPoly([1.0, -np.conj(zj)]), reduce=False)
            scale = (1.0 - np.conj(zj) * zi) / (zi - zj)
            L = L * factor.scale(scale)
        out.append(L)
    return out


def interpolate_kernel_spanning_symbol(theta: AnalyticMatrixFunction,
                                       witnesses, p: int) -> AnalyticMatrixFunction:
    """Rational m x p symbol hitting a kernel-spanning constant at each witness.

    At node z_i the columns orthonormally span ker Theta*(z_i) (padded with
    zero columns up to p); between nodes the cardinal-function combination
    keeps everything analytic and bounded on the closed disk.
    """
    m = theta.rows
    nodes = np.array([z for z, _ in witnesses], dtype=np.complex128)
    targets = []
    for z, dim in witnesses:
        U, s, _ = np.linalg.svd(theta.eval(z))
        # left singular vectors for vanishing singular values span ker Theta*
        cols = U[:, m - dim :] if dim > 0 else np.zeros((m, 0))
        Fi = np.zeros((m, p), dtype=np.complex128)
        Fi[:, :dim] = cols
        targets.append(Fi)
    basis = _blaschke_lagrange_basis(nodes)
    entries = [[RationalFn.constant(0.0) for _ in range(p)] for _ in range(m)]
    for Fi, L in zip(targets, basis):
        for r in range(m):
            for c in range(p):
                if Fi[r, c] != 0:
                    entries[r][c] = entries[r][c] + L.scale(Fi[r, c])
    return AnalyticMatrixFunction(entries)


def unilateral_frame_number(theta: AnalyticMatrixFunction,
                            n_radial: int = 48, n_angular: int = 192,
                            threshold: float = DEFAULT_THRESHOLD,
                            max_rounds: int = 3,
                            rank_tol: float = RANK_TOL) -> FrameNumberResult:
    """Frame number of the compressed shift of an inner rational symbol.

    Requires the determinant zeros to be simple (pairwise distance at least
    1e-6). p is the maximal kernel dimension over the zeros; the returned
    symbol is certified by a corona certificate on grids refined near the
    witnesses, doubling in density up to max_rounds. If certification never
    passes, the result still carries the proven lower bound p, with no
    constructed symbol.
    """
    p, witnesses, multiplicities = frame_number_witnesses(theta, rank_tol)
    if any(mult > 1 for mult in multiplicities):
        bad = [complex(z) for (z, _), mult in zip(witnesses, multiplicities)
               if mult > 1]
        raise RepeatedZeros(f"determinant zeros not simple near {bad}")
    F = interpolate_kernel_spanning_symbol(theta, witnesses, p)
    centers = [z for z, _ in witnesses]
    cert = None
    for r in range(max_rounds):
        grid = make_grid(n_radial * 2**r, n_angular * 2**r, refine_near=centers)
        cert = corona_infimum(F, theta, grid, threshold=threshold)
        if cert.passed:
            return FrameNumberResult(p, witnesses, F, cert)
    return FrameNumberResult(p, witnesses, None, cert)


def obstruction_witness(theta: AnalyticMatrixFunction, grid: DiskGrid,
                        eps_theta: float = 1e-3):
    """First grid point where the symbol is uniformly small, if any.

    A point with spectral norm of Theta(z) below eps_theta witnesses that
    fewer than m orbits cannot form a frame near z.
    """
    vals = theta.eval_grid(grid.points)
    norms = np.linalg.svd(vals, compute_uv=False)[:, 0]
    hits = np.nonzero(norms < eps_theta)[0]
    if hits.size:
        return complex(grid.points[int(hits[0])])
    return None
