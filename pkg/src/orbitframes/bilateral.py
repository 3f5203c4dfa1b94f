"""Doubly invariant subspaces of vector-valued L2 via piecewise symbols.

Subspaces invariant under multiplication by z in both directions are cut out
by a measurable projection-valued symbol. Here symbols are constant on
finitely many arcs, which keeps every fiberwise statement an exact finite
eigenvalue computation: frame bounds per arc, minimal generator counts, and
the translation of a normal unimodular-spectrum operator into this picture.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from . import kernels
from .errors import (
    ColumnsNotInRange,
    DimensionMismatch,
    NotNormal,
    NotProjection,
    SpectrumOffCircle,
)
from .hardy import AnalyticMatrixFunction, complex_matrix_to_json, pair_to_complex

TWO_PI = 2.0 * np.pi

PARTITION_TOL = 1e-9
PROJECTION_TOL = 1e-10
EIGENVALUE_TOL = 1e-8
RANGE_TOL = 1e-8
FRAME_TOL_FACTOR = 1e-9
BESSEL_CAP = 1e12
NORMALITY_TOL = 1e-8
CIRCLE_TOL = 1e-6
CLUSTER_TOL = 1e-6

PLANCHEREL_TERMS = 1024
QUADRATURE_POINTS = 4096


# ---------------------------------------------------------------------------
# arcs and piecewise symbols


@dataclass(frozen=True)
class Arc:
    """Half-open circular arc [start_angle, end_angle), no wrap-around."""

    start_angle: float
    end_angle: float

    def __post_init__(self):
        s, e = float(self.start_angle), float(self.end_angle)
        if not (0.0 <= s < e <= TWO_PI + PARTITION_TOL):
            raise ValueError(
                f"arc [{s!r}, {e!r}) must satisfy 0 <= start < end <= 2*pi")
        object.__setattr__(self, "start_angle", s)
        object.__setattr__(self, "end_angle", min(e, TWO_PI))

    @property
    def length(self) -> float:
        return self.end_angle - self.start_angle

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.start_angle + self.end_angle)

    def contains(self, theta: float) -> bool:
        t = float(theta) % TWO_PI
        return self.start_angle <= t < self.end_angle

    def to_json(self) -> list:
        return [_round_angle(self.start_angle), _round_angle(self.end_angle)]


def _round_angle(x: float) -> float:
    # 15 significant digits, the wire precision for angles
    return float(f"{x:.15g}")


class PiecewiseSymbol:
    """Matrix-valued function on the circle, constant on each arc.

    Pieces are stored sorted by start angle and must partition [0, 2*pi).
    All matrices share one shape (m rows, k columns).
    """

    def __init__(self, m: int, pieces):
        self.m = int(m)
        items = []
        for arc, mat in pieces:
            if not isinstance(arc, Arc):
                arc = Arc(float(arc[0]), float(arc[1]))
            mat = np.asarray(mat, dtype=np.complex128)
            if mat.ndim == 1:
                mat = mat.reshape(-1, 1)
            items.append((arc, mat))
        if not items:
            raise ValueError("a piecewise symbol needs at least one piece")
        items.sort(key=lambda p: p[0].start_angle)
        shape = items[0][1].shape
        for arc, mat in items:
            if mat.shape != shape:
                raise DimensionMismatch(
                    f"piece on [{arc.start_angle:.6g}, {arc.end_angle:.6g}) "
                    f"has shape {mat.shape}, expected {shape}")
        if shape[0] != self.m:
            raise DimensionMismatch(
                f"pieces have {shape[0]} rows, symbol dimension is {self.m}")
        if abs(items[0][0].start_angle) > PARTITION_TOL:
            raise ValueError("pieces must start at angle 0")
        for (a, _), (b, _) in zip(items, items[1:]):
            if abs(a.end_angle - b.start_angle) > PARTITION_TOL:
                raise ValueError(
                    f"gap or overlap between {a.end_angle!r} and "
                    f"{b.start_angle!r}")
        if abs(items[-1][0].end_angle - TWO_PI) > PARTITION_TOL:
            raise ValueError("pieces must cover the circle up to 2*pi")
        self.pieces = tuple(items)

    @property
    def cols(self) -> int:
        return self.pieces[0][1].shape[1]

    @classmethod
    def constant(cls, matrix) -> "PiecewiseSymbol":
        matrix = np.asarray(matrix, dtype=np.complex128)
        if matrix.ndim == 1:
            matrix = matrix.reshape(-1, 1)
        return cls(matrix.shape[0], [(Arc(0.0, TWO_PI), matrix)])

    def eval(self, theta: float) -> np.ndarray:
        t = float(theta) % TWO_PI
        for arc, mat in self.pieces:
            if arc.contains(t):
                return mat
        # t can land on the seam at 2*pi - eps rounding to 2*pi
        return self.pieces[-1][1]

    def map_pieces(self, fn) -> "PiecewiseSymbol":
        """New symbol with fn applied to every piece matrix."""
        out = [(arc, fn(mat)) for arc, mat in self.pieces]
        return PiecewiseSymbol(out[0][1].shape[0], out)

    def sup_norm(self) -> float:
        return max(float(np.linalg.norm(mat, 2)) for _, mat in self.pieces)

    def to_json_dict(self) -> dict:
        return {
            "m": self.m,
            "pieces": [
                {"arc": arc.to_json(), "matrix": complex_matrix_to_json(mat)}
                for arc, mat in self.pieces
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "PiecewiseSymbol":
        pieces = []
        for p in d["pieces"]:
            s, e = p["arc"]
            mat = np.array(
                [[pair_to_complex(v) for v in row] for row in p["matrix"]],
                dtype=np.complex128)
            pieces.append((Arc(float(s), float(e)), mat))
        return cls(int(d["m"]), pieces)


def common_refinement(*symbols: PiecewiseSymbol):
    """Joint partition: list of (Arc, piece of each symbol on that arc)."""
    cuts = {0.0, TWO_PI}
    for sym in symbols:
        for arc, _ in sym.pieces:
            cuts.add(arc.start_angle)
            cuts.add(arc.end_angle)
    sorted_cuts = sorted(cuts)
    merged = [sorted_cuts[0]]
    for c in sorted_cuts[1:]:
        if c - merged[-1] > PARTITION_TOL:
            merged.append(c)
    merged[-1] = TWO_PI
    out = []
    for s, e in zip(merged, merged[1:]):
        arc = Arc(s, e)
        out.append((arc, tuple(sym.eval(arc.midpoint) for sym in symbols)))
    return out


# ---------------------------------------------------------------------------
# projection symbols


def _projection_rank(P: np.ndarray, arc: Arc) -> int:
    """Rank of a single projection piece, trace vs eigenvalue cross-check."""
    herm_defect = float(np.linalg.norm(P - P.conj().T, 2))
    idem_defect = float(np.linalg.norm(P @ P - P, 2))
    if herm_defect > PROJECTION_TOL or idem_defect > PROJECTION_TOL:
        raise NotProjection(
            f"piece on [{arc.start_angle:.6g}, {arc.end_angle:.6g}) deviates "
            f"from a projection: hermitian defect {herm_defect:.3e}, "
            f"idempotency defect {idem_defect:.3e}")
    w = np.linalg.eigvalsh(0.5 * (P + P.conj().T))
    near01 = np.minimum(np.abs(w), np.abs(w - 1.0))
    if float(np.max(near01)) > EIGENVALUE_TOL:
        raise NotProjection(
            f"piece on [{arc.start_angle:.6g}, {arc.end_angle:.6g}) has an "
            f"eigenvalue {w[int(np.argmax(near01))]:.6g} away from 0 and 1")
    rank_trace = int(round(float(np.trace(P).real)))
    rank_eigs = int(np.sum(w > 0.5))
    if rank_trace != rank_eigs:
        raise NotProjection(
            f"piece on [{arc.start_angle:.6g}, {arc.end_angle:.6g}): trace "
            f"rank {rank_trace} disagrees with eigenvalue rank {rank_eigs}")
    return rank_trace


def validate_projection_symbol(sigma: PiecewiseSymbol) -> list:
    """Per-arc ranks of a projection-valued symbol."""
    if sigma.cols != sigma.m:
        raise NotProjection(
            f"projection pieces must be square, got {sigma.m} x {sigma.cols}")
    return [_projection_rank(mat, arc) for arc, mat in sigma.pieces]


def _range_basis(P: np.ndarray) -> np.ndarray:
    """Orthonormal basis of ran P for a validated projection piece."""
    w, U = np.linalg.eigh(0.5 * (P + P.conj().T))
    cols = U[:, w > 0.5]
    # deterministic phases: largest-modulus entry positive real
    for j in range(cols.shape[1]):
        i = int(np.argmax(np.abs(cols[:, j])))
        v = cols[i, j]
        if abs(v) > 0:
            cols[:, j] *= np.conj(v) / abs(v)
    return cols


# ---------------------------------------------------------------------------
# fiber frame bounds


@dataclass(frozen=True)
class BilateralReport:
    """Essential frame bounds of a bilateral orbit system over the circle.

    per_arc rows are (Arc, fiber lower, fiber upper, fiber dimension); arcs
    where the fiber dimension is zero carry None bounds and do not enter the
    global reduction.
    """

    is_bessel: bool
    is_frame: bool
    lower_bound_A: float
    upper_bound_B: float
    per_arc: tuple
    frame_number: int | None = None

    def to_json_dict(self) -> dict:
        return {
            "is_bessel": bool(self.is_bessel),
            "is_frame": bool(self.is_frame),
            "lower_bound_A": float(self.lower_bound_A),
            "upper_bound_B": float(self.upper_bound_B),
            "per_arc": [
                {
                    "arc": arc.to_json(),
                    "fiber_lower": None if lo is None else float(lo),
                    "fiber_upper": None if hi is None else float(hi),
                    "fiber_dim": int(dim),
                }
                for arc, lo, hi, dim in self.per_arc
            ],
            "frame_number": (None if self.frame_number is None
                             else int(self.frame_number)),
        }


def fiber_frame_bounds(G: PiecewiseSymbol,
                       sigma: PiecewiseSymbol) -> BilateralReport:
    """Frame bounds of the bilateral orbit of G's columns inside ran sigma.

    Per arc the bounds are the extreme eigenvalues of the Gram G(z)G(z)*
    compressed to an orthonormal basis of ran sigma(z); the global bounds
    are the min and max over arcs of positive fiber dimension. Columns must
    lie in ran sigma on every arc.
    """
    validate_projection_symbol(sigma)
    if G.m != sigma.m:
        raise DimensionMismatch(
            f"generators have {G.m} rows, symbol dimension is {sigma.m}")
    per_arc = []
    lows, highs = [], []
    for arc, (Gp, Pp) in common_refinement(G, sigma):
        defect = float(np.linalg.norm(Gp - Pp @ Gp, 2))
        if defect > RANGE_TOL:
            raise ColumnsNotInRange(
                f"columns leave ran sigma on [{arc.start_angle:.6g}, "
                f"{arc.end_angle:.6g}) by {defect:.3e}")
        U = _range_basis(Pp)
        r = U.shape[1]
        if r == 0:
            per_arc.append((arc, None, None, 0))
            continue
        GU = U.conj().T @ Gp
        w = np.linalg.eigvalsh(GU @ GU.conj().T)
        lo, hi = float(w[0]), float(w[-1])
        per_arc.append((arc, lo, hi, r))
        lows.append(lo)
        highs.append(hi)
    if not lows:
        # sigma vanishes identically: the subspace is {0} and every bound
        # statement holds vacuously
        return BilateralReport(True, True, 0.0, 0.0, tuple(per_arc))
    A = min(lows)
    B = max(highs)
    return BilateralReport(
        is_bessel=B <= BESSEL_CAP,
        is_frame=A > FRAME_TOL_FACTOR * B,
        lower_bound_A=A,
        upper_bound_B=B,
        per_arc=tuple(per_arc),
    )


def bessel_symbol_check(g) -> bool:
    """Boundedness gate for generator data.

    Piecewise symbols are bounded by construction; sampled arrays are
    checked against the cap so unbounded data supplied as samples is
    rejected instead of silently analyzed.
    """
    if isinstance(g, PiecewiseSymbol):
        s = g.sup_norm()
        return bool(np.isfinite(s) and s <= BESSEL_CAP)
    arr = np.asarray(g, dtype=np.complex128)
    if arr.size == 0:
        return True
    if not np.all(np.isfinite(arr)):
        return False
    return bool(np.max(np.abs(arr)) <= BESSEL_CAP)


# ---------------------------------------------------------------------------
# bilateral frame number and minimal generators


def bilateral_frame_number(sigma: PiecewiseSymbol):
    """Minimal generator count p and an m x p generator symbol achieving it.

    The subspace cut out by sigma is annihilated pointwise by I - sigma,
    whose kernel at each point is exactly ran sigma; hence the number of
    bilateral orbits needed is the essential supremum of rank sigma, here a
    max over arcs. Generators on each arc are an orthonormal eigenbasis of
    ran sigma padded with zero columns up to p.
    """
    ranks = validate_projection_symbol(sigma)
    p = max(ranks)
    m = sigma.m
    pieces = []
    for (arc, P), r in zip(sigma.pieces, ranks):
        block = np.zeros((m, p), dtype=np.complex128)
        if r:
            block[:, :r] = _range_basis(P)
        pieces.append((arc, block))
    return p, PiecewiseSymbol(m, pieces)


def minimality_check(sigma: PiecewiseSymbol, p: int,
                     n_candidates: int = 100, seed: int = 0) -> bool:
    """Confirm no family of fewer than p columns can be a frame for sigma.

    Structural direction: on an arc of fiber dimension p, any p-1 columns
    inside the fiber span a proper subspace, so the compressed Gram is
    singular and the fiber lower bound is 0. The random candidates make the
    same point empirically.
    """
    ranks = validate_projection_symbol(sigma)
    if p < 1:
        raise ValueError("minimality is only meaningful for p >= 1")
    if p != max(ranks):
        return False
    top = int(np.argmax(ranks))
    arc, P = sigma.pieces[top]
    U = _range_basis(P)
    if p == 1:
        return True  # zero columns give lower bound 0 on every arc
    rng = np.random.default_rng(seed)
    m = sigma.m
    for _ in range(n_candidates):
        C = rng.standard_normal((m, p - 1)) + 1j * rng.standard_normal((m, p - 1))
        Gp = P @ C
        GU = U.conj().T @ Gp
        w = np.linalg.eigvalsh(GU @ GU.conj().T)
        if float(w[0]) > 1e-8 * max(float(w[-1]), 1.0):
            return False
    return True


# ---------------------------------------------------------------------------
# normal unimodular operators as piecewise models


@dataclass(frozen=True)
class BilateralSimilarityNote:
    """Piecewise-symbol realization of a normal unimodular-spectrum operator."""

    sigma: PiecewiseSymbol
    generators: PiecewiseSymbol
    cluster_centers: tuple
    cluster_multiplicities: tuple
    per_arc_ranks: tuple
    fiber_report: BilateralReport

    def to_json_dict(self) -> dict:
        return {
            "sigma": self.sigma.to_json_dict(),
            "generators": self.generators.to_json_dict(),
            "cluster_centers": [_round_angle(c) for c in self.cluster_centers],
            "cluster_multiplicities": [int(x) for x in
                                       self.cluster_multiplicities],
            "per_arc_ranks": [int(x) for x in self.per_arc_ranks],
            "fiber_report": self.fiber_report.to_json_dict(),
        }


def _cluster_angles(angles: np.ndarray):
    """Group circle angles whose gaps are below CLUSTER_TOL.

    Returns (centers, groups) with groups as index lists; handles the seam
    at 0 by merging first and last cluster when they nearly touch.
    """
    order = np.argsort(angles)
    groups = [[int(order[0])]]
    for idx in order[1:]:
        if angles[idx] - angles[groups[-1][-1]] <= CLUSTER_TOL:
            groups[-1].append(int(idx))
        else:
            groups.append([int(idx)])
    if len(groups) > 1:
        wrap_gap = angles[groups[0][0]] + TWO_PI - angles[groups[-1][-1]]
        if wrap_gap <= CLUSTER_TOL:
            groups[0] = groups.pop() + groups[0]
    centers = []
    for g in groups:
        pts = np.exp(1j * angles[g])
        centers.append(float(np.angle(np.mean(pts)) % TWO_PI))
    order2 = np.argsort(centers)
    return [centers[i] for i in order2], [groups[i] for i in order2]


def bilateral_similarity_note(T: np.ndarray, gens) -> BilateralSimilarityNote:
    """Translate a normal unimodular-spectrum operator into arc symbols.

    Eigenvalue clusters become arcs around their phases; the projection
    symbol on each arc is the orthogonal projection onto the clustered
    eigenspace, and the supplied generators are transported by that
    projection. Non-normal operators and off-circle spectra are refused.
    """
    T = np.asarray(T, dtype=np.complex128)
    G = np.asarray(gens, dtype=np.complex128)
    if G.ndim == 1:
        G = G.reshape(-1, 1)
    d = T.shape[0]
    if T.shape != (d, d) or G.shape[0] != d:
        raise DimensionMismatch("operator and generators disagree in size")
    comm = T @ T.conj().T - T.conj().T @ T
    defect = float(np.linalg.norm(comm, 2))
    if defect > NORMALITY_TOL:
        raise NotNormal(f"commutator norm {defect:.3e} exceeds 1e-8")
    Tq, Q = scipy.linalg.schur(T, output="complex")
    eigs = np.diag(Tq)
    off = float(np.max(np.abs(np.abs(eigs) - 1.0)))
    if off > CIRCLE_TOL:
        raise SpectrumOffCircle(
            f"eigenvalue modulus deviates from 1 by {off:.3e}")
    angles = np.angle(eigs) % TWO_PI
    centers, groups = _cluster_angles(angles)

    if len(centers) == 1:
        cuts = []
    else:
        cuts = []
        for i in range(len(centers)):
            a = centers[i]
            b = centers[(i + 1) % len(centers)]
            if i + 1 < len(centers):
                cuts.append(0.5 * (a + b))
            else:
                cuts.append((0.5 * (a + b + TWO_PI)) % TWO_PI)
        cuts = sorted(c for c in cuts if PARTITION_TOL < c < TWO_PI - PARTITION_TOL)
    bounds = [0.0] + cuts + [TWO_PI]

    projections = []
    for g in groups:
        Qc = Q[:, g]
        projections.append(Qc @ Qc.conj().T)

    def nearest_cluster(theta):
        gaps = [min(abs(theta - c), TWO_PI - abs(theta - c)) for c in centers]
        return int(np.argmin(gaps))

    sigma_pieces, gen_pieces, arc_ranks = [], [], []
    for s, e in zip(bounds, bounds[1:]):
        arc = Arc(s, e)
        c = nearest_cluster(arc.midpoint)
        P = 0.5 * (projections[c] + projections[c].conj().T)
        sigma_pieces.append((arc, P))
        gen_pieces.append((arc, P @ G))
        arc_ranks.append(len(groups[c]))
    sigma = PiecewiseSymbol(d, sigma_pieces)
    transported = PiecewiseSymbol(d, gen_pieces)
    report = fiber_frame_bounds(transported, sigma)
    report = replace(report, frame_number=max(arc_ranks))
    return BilateralSimilarityNote(
        sigma=sigma,
        generators=transported,
        cluster_centers=tuple(centers),
        cluster_multiplicities=tuple(len(g) for g in groups),
        per_arc_ranks=tuple(arc_ranks),
        fiber_report=report,
    )


# ---------------------------------------------------------------------------
# direct Plancherel cross-checks


def sample_on_circle(obj, n_points: int = QUADRATURE_POINTS) -> np.ndarray:
    """Uniform boundary samples of a symbol: (n_points, m, k).

    Accepts a PiecewiseSymbol, an AnalyticMatrixFunction (evaluated at the
    corresponding circle points), or a pre-sampled array passed through.
    """
    thetas = TWO_PI * np.arange(n_points) / n_points
    if isinstance(obj, PiecewiseSymbol):
        out = np.empty((n_points, obj.m, obj.cols), dtype=np.complex128)
        assigned = np.zeros(n_points, dtype=bool)
        for arc, mat in obj.pieces:
            mask = (thetas >= arc.start_angle) & (thetas < arc.end_angle)
            out[mask] = mat
            assigned |= mask
        # seam gaps below the partition tolerance can strand a sample
        for i in np.nonzero(~assigned)[0]:
            out[i] = obj.eval(thetas[i])
        return out
    if isinstance(obj, AnalyticMatrixFunction):
        return obj.eval_grid(np.exp(1j * thetas))
    arr = np.asarray(obj, dtype=np.complex128)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.shape[0] != n_points:
        raise DimensionMismatch(
            f"expected {n_points} samples, got {arr.shape[0]}")
    return arr


def mult_adjoint_norm_sq(G_samples: np.ndarray,
                         h_samples: np.ndarray) -> float:
    """Quadrature value of the squared norm of the adjoint multiplier image.

    G_samples is (P, m, k), h_samples is (P, m) or (P, m, 1); the result is
    the boundary mean of ||G(z)* h(z)||^2.
    """
    h = h_samples[:, :, 0] if h_samples.ndim == 3 else h_samples
    phi = np.einsum("pmk,pm->pk", G_samples.conj(), h)
    return float(np.mean(np.sum(np.abs(phi) ** 2, axis=1)))


def direct_bilateral_sum(G_samples: np.ndarray, h_samples: np.ndarray,
                         n_terms: int = PLANCHEREL_TERMS) -> float:
    """Truncated sum of squared correlations against the shifted generators.

    Each term is |<h, z^n g_j>|^2 with the inner product taken by boundary
    quadrature over the sample grid; n runs over |n| <= n_terms and j over
    the generator columns.
    """
    h = h_samples[:, :, 0] if h_samples.ndim == 3 else h_samples
    phi = np.einsum("pmk,pm->pk", G_samples.conj(), h)
    total = 0.0
    for j in range(phi.shape[1]):
        total += float(kernels.coeff_power_sum(
            np.ascontiguousarray(phi[:, j]), n_terms))
    return total
