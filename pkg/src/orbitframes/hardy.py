"""Rational bounded analytic functions on the closed unit disk.

Scalar layer: complex polynomials, reduced rational functions whose poles
stay outside the closed disk, and finite Blaschke products. Matrix layer:
rectangular matrices of rational entries with vectorized grid evaluation.
Evaluation grids over the disk (polar lattices plus refinement clusters)
live here too, since every "for all z in the disk" check in the package is
certified by sampling such a grid.

All symbol values are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import kernels
from .errors import (
    DegreeZero,
    NotUnimodular,
    PoleInsideDisk,
    PoleTooClose,
    ZeroOutsideDisk,
)

# pole margin: denominator roots must satisfy |root| > 1 + POLE_MARGIN
POLE_MARGIN = 1e-9
# num/den common-root matching tolerance for reduction
REDUCE_TOL = 1e-10
UNIMODULAR_TOL = 1e-12
# Blaschke zeros must keep this distance from the boundary so the mirror
# pole at 1/conj(a) clears POLE_MARGIN
ZERO_MARGIN = 1e-9
# relative junk threshold when normalizing rationals after float arithmetic
_COEFF_JUNK = 1e-14


def _strip_exact(arr: np.ndarray) -> np.ndarray:
    nz = np.nonzero(arr)[0]
    if nz.size == 0:
        return arr[:0]
    return arr[: nz[-1] + 1]


class ComplexPoly:
    """Complex polynomial with ascending coefficients; empty list is zero."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        arr = np.asarray(coeffs, dtype=np.complex128).ravel()
        arr = _strip_exact(arr.copy())
        arr.setflags(write=False)
        self.coeffs = arr

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    def __call__(self, z):
        if self.is_zero:
            return np.zeros_like(np.asarray(z, dtype=np.complex128))
        return npoly.polyval(np.asarray(z, dtype=np.complex128), self.coeffs)

    def __add__(self, other):
        other = _as_poly(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        return ComplexPoly(npoly.polyadd(self.coeffs, other.coeffs))

    def __sub__(self, other):
        other = _as_poly(other)
        if other.is_zero:
            return self
        if self.is_zero:
            return ComplexPoly(-other.coeffs)
        return ComplexPoly(npoly.polysub(self.coeffs, other.coeffs))

    def __mul__(self, other):
        other = _as_poly(other)
        if self.is_zero or other.is_zero:
            return ComplexPoly(())
        return ComplexPoly(npoly.polymul(self.coeffs, other.coeffs))

    __rmul__ = __mul__
    __radd__ = __add__

    def roots(self) -> np.ndarray:
        """Companion-matrix roots; empty for degree <= 0."""
        if self.degree <= 0:
            return np.zeros(0, dtype=np.complex128)
        return np.asarray(npoly.polyroots(self.coeffs), dtype=np.complex128)

    def deflate(self, root: complex) -> "ComplexPoly":
        """Synthetic division by (z - root); remainder discarded."""
        c = self.coeffs
        n = len(c)
        if n <= 1:
            return ComplexPoly(())
        q = np.empty(n - 1, dtype=np.complex128)
        acc = c[-1]
        for i in range(n - 2, -1, -1):
            q[i] = acc
            acc = c[i] + acc * root
        return ComplexPoly(q)

    def __repr__(self):
        return f"ComplexPoly({list(self.coeffs)!r})"


def _as_poly(x) -> ComplexPoly:
    if isinstance(x, ComplexPoly):
        return x
    if np.isscalar(x):
        return ComplexPoly([x])
    return ComplexPoly(x)


_ONE = ComplexPoly([1.0])


def _trim_junk(p: ComplexPoly) -> ComplexPoly:
    """Drop trailing coefficients that are pure float noise (relative)."""
    c = p.coeffs
    if len(c) == 0:
        return p
    cap = np.max(np.abs(c)) * _COEFF_JUNK
    keep = len(c)
    while keep > 1 and abs(c[keep - 1]) <= cap:
        keep -= 1
    return ComplexPoly(c[:keep]) if keep < len(c) else p


class RationalFn:
    """Reduced rational function analytic on the closed unit disk.

    Denominator roots are required to have modulus > 1 + POLE_MARGIN and
    the stored representation is normalized with den(0) = 1.
    """

    __slots__ = ("num", "den", "_den_roots")

    def __init__(self, num, den=_ONE, reduce: bool = True):
        num = _trim_junk(_as_poly(num))
        den = _trim_junk(_as_poly(den))
        if den.is_zero:
            raise ZeroDivisionError("rational function with zero denominator")
        if reduce and not num.is_zero and den.degree > 0:
            num, den = _cancel_common_roots(num, den)
        den_roots = den.roots()
        if den_roots.size and np.min(np.abs(den_roots)) <= 1.0 + POLE_MARGIN:
            worst = den_roots[np.argmin(np.abs(den_roots))]
            raise PoleInsideDisk(
                f"denominator root {worst} has modulus {abs(worst):.12g} <= 1 + 1e-9"
            )
        # normalize: den(0) = 1 keeps representations comparable
        scale = den.coeffs[0]
        num = ComplexPoly(num.coeffs / scale) if not num.is_zero else num
        den = ComplexPoly(den.coeffs / scale)
        self.num = num
        self.den = den
        self._den_roots = den_roots  # roots unchanged by coefficient scaling
        self._den_roots.setflags(write=False)

    # -- constructors -------------------------------------------------

    @classmethod
    def constant(cls, c) -> "RationalFn":
        return cls(ComplexPoly([c]), _ONE, reduce=False)

    @classmethod
    def from_poly(cls, p) -> "RationalFn":
        return cls(_as_poly(p), _ONE, reduce=False)

    # -- basic queries ------------------------------------------------

    @property
    def degree(self) -> int:
        """max(deg num, deg den); crude size measure for truncation orders."""
        return max(self.num.degree, self.den.degree, 0)

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def pole_moduli(self) -> np.ndarray:
        return np.abs(self._den_roots)

    # -- evaluation ---------------------------------------------------

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        if np.any(np.abs(z) > 1.0 + POLE_MARGIN):
            raise ValueError("evaluation point outside the closed unit disk")
        if self._den_roots.size:
            dist = np.abs(z[..., None] - self._den_roots)
            if np.min(dist) <= POLE_MARGIN:
                raise PoleTooClose(f"denominator root within 1e-9 of {z}")
        out = self.num(z) / self.den(z)
        return out

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other):
        other = _as_rational(other)
        num = self.num * other.den + other.num * self.den
        return RationalFn(num, self.den * other.den)

    def __sub__(self, other):
        other = _as_rational(other)
        num = self.num * other.den - other.num * self.den
        return RationalFn(num, self.den * other.den)

    def __mul__(self, other):
        other = _as_rational(other)
        return RationalFn(self.num * other.num, self.den * other.den)

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return RationalFn(ComplexPoly(-self.num.coeffs), self.den, reduce=False)

    def scale(self, c) -> "RationalFn":
        return RationalFn(self.num * _as_poly(c), self.den, reduce=False)

    # -- power series -------------------------------------------------

    def taylor(self, N: int) -> np.ndarray:
        """First N power-series coefficients via den * series = num."""
        N = int(N)
        a = np.zeros(N, dtype=np.complex128)
        nc = self.num.coeffs
        dc = self.den.coeffs  # dc[0] == 1 by normalization
        for n in range(N):
            v = nc[n] if n < len(nc) else 0.0
            top = min(n, len(dc) - 1)
            for k in range(1, top + 1):
                v -= dc[k] * a[n - k]
            a[n] = v
        return a

    def taylor_tail_bound(self, N: int) -> tuple[float, float]:
        """(C, r) with |a_n| <= C / r^n observed over the first N+64 terms.

        r is the smallest pole modulus (inf for polynomials, where the tail
        is exactly zero past the degree).
        """
        if not self._den_roots.size:
            return 0.0, np.inf
        r = float(np.min(np.abs(self._den_roots)))
        coeffs = self.taylor(N + 64)
        n = np.arange(len(coeffs))
        return float(np.max(np.abs(coeffs) * r**n)), r

    def __repr__(self):
        return f"RationalFn(num={self.num!r}, den={self.den!r})"


def _as_rational(x) -> RationalFn:
    if isinstance(x, RationalFn):
        return x
    if isinstance(x, BlaschkeProduct):
        return x.as_rational()
    if isinstance(x, ComplexPoly):
        return RationalFn.from_poly(x)
    if np.isscalar(x):
        return RationalFn.constant(x)
    raise TypeError(f"cannot interpret {type(x).__name__} as a rational function")


def _cancel_common_roots(num: ComplexPoly, den: ComplexPoly):
    """Deflate root pairs with |num_root - den_root| < REDUCE_TOL."""
    den_roots = list(den.roots())
    changed = True
    while changed and not num.is_zero and den_roots:
        changed = False
        num_roots = num.roots()
        if not num_roots.size:
            break
        for i, dr in enumerate(den_roots):
            j = int(np.argmin(np.abs(num_roots - dr)))
            if abs(num_roots[j] - dr) < REDUCE_TOL:
                num = num.deflate(dr)
                den = den.deflate(dr)
                del den_roots[i]
                changed = True
                break
    return num, den


class BlaschkeProduct:
    """Finite Blaschke product c * prod (z - a_i) / (1 - conj(a_i) z)."""

    __slots__ = ("zeros", "unimodular_constant")

    def __init__(self, zeros=(), c=1.0):
        zs = np.asarray(list(zeros), dtype=np.complex128)
        if zs.size and np.max(np.abs(zs)) >= 1.0 - ZERO_MARGIN:
            worst = zs[np.argmax(np.abs(zs))]
            raise ZeroOutsideDisk(
                f"Blaschke zero {worst} has modulus {abs(worst):.12g} >= 1 - 1e-9"
            )
        c = complex(c)
        if abs(abs(c) - 1.0) > UNIMODULAR_TOL:
            raise NotUnimodular(f"|c| = {abs(c):.15g} != 1")
        zs.setflags(write=False)
        self.zeros = zs
        self.unimodular_constant = c

    @property
    def degree(self) -> int:
        return len(self.zeros)

    def __call__(self, z):
        # factored form keeps |B| = 1 on the boundary to rounding error
        z = np.asarray(z, dtype=np.complex128)
        out = np.full_like(z, self.unimodular_constant)
        for a in self.zeros:
            out = out * (z - a) / (1.0 - np.conj(a) * z)
        return out

    def as_rational(self) -> RationalFn:
        num = ComplexPoly([self.unimodular_constant])
        den = _ONE
        for a in self.zeros:
            num = num * ComplexPoly([-a, 1.0])
            den = den * ComplexPoly([1.0, -np.conj(a)])
        return RationalFn(num, den, reduce=False)

    def __mul__(self, other):
        if not isinstance(other, BlaschkeProduct):
            return NotImplemented
        return BlaschkeProduct(
            np.concatenate([self.zeros, other.zeros]),
            self.unimodular_constant * other.unimodular_constant,
        )

    def __repr__(self):
        return f"BlaschkeProduct(zeros={list(self.zeros)!r}, c={self.unimodular_constant!r})"


def blaschke_from_zeros(zeros, c=1.0) -> BlaschkeProduct:
    """Construct a finite Blaschke product, validating zeros and constant."""
    return BlaschkeProduct(zeros, c)


def taylor_coeffs(f, N: int) -> np.ndarray:
    """First N power-series coefficients of a scalar symbol.

    Computed by the linear recurrence den * series = num. The geometric
    tail bound is available from RationalFn.taylor_tail_bound.
    """
    return _as_rational(f).taylor(N)


class AnalyticMatrixFunction:
    """m x k matrix of rational functions analytic on the closed disk."""

    __slots__ = ("rows", "cols", "entries", "_tensors")

    def __init__(self, entries):
        grid = [[_as_rational(e) for e in row] for row in entries]
        if not grid or not grid[0]:
            raise ValueError("matrix symbol needs at least one entry")
        k = len(grid[0])
        if any(len(row) != k for row in grid):
            raise ValueError("ragged entry grid")
        self.rows = len(grid)
        self.cols = k
        self.entries = tuple(tuple(row) for row in grid)
        self._tensors = None

    # -- constructors -------------------------------------------------

    @classmethod
    def constant(cls, matrix) -> "AnalyticMatrixFunction":
        M = np.atleast_2d(np.asarray(matrix, dtype=np.complex128))
        return cls([[RationalFn.constant(M[i, j]) for j in range(M.shape[1])]
                    for i in range(M.shape[0])])

    @classmethod
    def identity(cls, m: int) -> "AnalyticMatrixFunction":
        return cls.constant(np.eye(m))

    @classmethod
    def zero(cls, m: int, k: int) -> "AnalyticMatrixFunction":
        return cls.constant(np.zeros((m, k)))

    @classmethod
    def diagonal(cls, diag_entries) -> "AnalyticMatrixFunction":
        m = len(diag_entries)
        zero = RationalFn.constant(0.0)
        return cls([[_as_rational(diag_entries[i]) if i == j else zero
                     for j in range(m)] for i in range(m)])

    @classmethod
    def column(cls, entries) -> "AnalyticMatrixFunction":
        return cls([[e] for e in entries])

    # -- structure ----------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def degree(self) -> int:
        return max(e.degree for row in self.entries for e in row)

    def is_zero(self) -> bool:
        return all(e.is_zero for row in self.entries for e in row)

    def _coeff_tensors(self):
        if self._tensors is None:
            dn = max(max(e.num.degree, 0) for row in self.entries for e in row) + 1
            dd = max(max(e.den.degree, 0) for row in self.entries for e in row) + 1
            num = np.zeros((self.rows, self.cols, dn), dtype=np.complex128)
            den = np.zeros((self.rows, self.cols, dd), dtype=np.complex128)
            for i, row in enumerate(self.entries):
                for j, e in enumerate(row):
                    nc = e.num.coeffs
                    num[i, j, : len(nc)] = nc
                    dc = e.den.coeffs
                    den[i, j, : len(dc)] = dc
            self._tensors = (num, den)
        return self._tensors

    # -- evaluation ---------------------------------------------------

    def eval(self, z: complex) -> np.ndarray:
        out = np.empty((self.rows, self.cols), dtype=np.complex128)
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                out[i, j] = e(z)
        return out

    def eval_grid(self, pts) -> np.ndarray:
        """Vectorized evaluation: (P, m, k). Pole guard as in scalar eval."""
        pts = np.asarray(pts, dtype=np.complex128).ravel()
        if pts.size and np.max(np.abs(pts)) > 1.0 + POLE_MARGIN:
            raise ValueError("grid point outside the closed unit disk")
        num, den = self._coeff_tensors()
        return kernels.ratmat_eval_grid(num, den, pts)

    def boundary_adjoint_eval(self, theta: float) -> np.ndarray:
        """Conjugate transpose of the boundary value at e^{i theta}."""
        return self.eval(np.exp(1j * theta)).conj().T

    def boundary_sup_norm(self, n_points: int = 256) -> float:
        """Max spectral norm over a uniform boundary grid."""
        pts = np.exp(2j * np.pi * np.arange(n_points) / n_points)
        vals = self.eval_grid(pts)
        return float(np.max(np.linalg.svd(vals, compute_uv=False)[:, 0]))

    # -- algebra ------------------------------------------------------

    def __matmul__(self, other: "AnalyticMatrixFunction") -> "AnalyticMatrixFunction":
        if self.cols != other.rows:
            raise ValueError("inner dimensions differ")
        zero = RationalFn.constant(0.0)
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = zero
                for l in range(self.cols):
                    acc = acc + self.entries[i][l] * other.entries[l][j]
                row.append(acc)
            out.append(row)
        return AnalyticMatrixFunction(out)

    def det(self) -> RationalFn:
        """Determinant by cofactor expansion (desk-scale m)."""
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square symbol")
        return _det_recursive(self.entries)

    def taylor_tensor(self, N: int) -> np.ndarray:
        """(N, m, k) tensor of matrix Taylor coefficients."""
        out = np.zeros((N, self.rows, self.cols), dtype=np.complex128)
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                out[:, i, j] = e.taylor(N)
        return out

    def __repr__(self):
        return f"AnalyticMatrixFunction({self.rows}x{self.cols})"


def _det_recursive(entries) -> RationalFn:
    n = len(entries)
    if n == 1:
        return entries[0][0]
    if n == 2:
        return entries[0][0] * entries[1][1] - entries[0][1] * entries[1][0]
    acc = RationalFn.constant(0.0)
    for j in range(n):
        minor = tuple(row[:j] + row[j + 1 :] for row in entries[1:])
        term = entries[0][j] * _det_recursive(minor)
        acc = acc + (term if j % 2 == 0 else -term)
    return acc


# ---------------------------------------------------------------------------
# disk grids


@dataclass(frozen=True)
class DiskGrid:
    """Polar lattice over the closed disk plus appended refinement points.

    Lattice order is radius-major, angle-minor; extra points follow in
    insertion order, so a first-occurrence argmin realizes the
    lexicographic (radius, angle) tie-break.
    """

    radii: tuple
    angles_per_radius: int
    extra_points: tuple = ()
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        if np.any(radii < 0) or np.any(radii > 1) or np.any(np.diff(radii) <= 0):
            raise ValueError("radii must be ascending in [0, 1]")
        angles = 2.0 * np.pi * np.arange(self.angles_per_radius) / self.angles_per_radius
        lattice = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
        extras = np.asarray(self.extra_points, dtype=np.complex128)
        pts = np.concatenate([lattice, extras]) if extras.size else lattice
        if pts.size and np.max(np.abs(pts)) > 1.0 + 1e-12:
            raise ValueError("grid point outside the closed disk")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def size(self) -> int:
        return len(self.points)

    def with_extra(self, pts) -> "DiskGrid":
        extras = tuple(self.extra_points) + tuple(complex(p) for p in pts)
        return DiskGrid(self.radii, self.angles_per_radius, extras)


# ---------------------------------------------------------------------------
# JSON wire forms: complex as [re, im], polynomials ascending by degree,
# rationals {"num": ..., "den": ...}, Blaschke {"zeros": ..., "c": ...},
# matrices as row-major nested arrays


def complex_to_pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def pair_to_complex(p) -> complex:
    return complex(float(p[0]), float(p[1]))


def poly_to_json(p: ComplexPoly) -> list:
    return [complex_to_pair(c) for c in p.coeffs]


def poly_from_json(data) -> ComplexPoly:
    return ComplexPoly([pair_to_complex(c) for c in data])


def rational_to_json(f: RationalFn) -> dict:
    return {"num": poly_to_json(f.num), "den": poly_to_json(f.den)}


def rational_from_json(data) -> RationalFn:
    return RationalFn(poly_from_json(data["num"]), poly_from_json(data["den"]))


def blaschke_to_json(b: BlaschkeProduct) -> dict:
    return {"zeros": [complex_to_pair(a) for a in b.zeros],
            "c": complex_to_pair(b.unimodular_constant)}


def blaschke_from_json(data) -> BlaschkeProduct:
    return BlaschkeProduct([pair_to_complex(a) for a in data["zeros"]],
                           pair_to_complex(data["c"]))


def matrix_symbol_to_json(F: AnalyticMatrixFunction) -> list:
    return [[rational_to_json(e) for e in row] for row in F.entries]


def matrix_symbol_from_json(data) -> AnalyticMatrixFunction:
    return AnalyticMatrixFunction([[rational_from_json(e) for e in row] for row in data])


def complex_matrix_to_json(M) -> list:
    M = np.atleast_2d(np.asarray(M, dtype=np.complex128))
    return [[complex_to_pair(v) for v in row] for row in M]


def complex_matrix_from_json(data) -> np.ndarray:
    return np.array([[pair_to_complex(v) for v in row] for row in data],
                    dtype=np.complex128)


def _clip_to_disk(pts: np.ndarray) -> np.ndarray:
    mod = np.abs(pts)
    mask = mod > 1.0
    out = pts.copy()
    out[mask] = pts[mask] / mod[mask]
    return out


def cluster_points(center: complex, radius: float, n_rings: int = 2,
                   n_angles: int = 8) -> np.ndarray:
    """Center plus concentric rings, clipped to the closed disk.

    Ring radii stay below radius/2 so that center distance survives the
    boundary clip (clip displacement <= ring radius).
    """
    center = complex(center)
    ring_r = np.linspace(0.0, 0.49 * radius, n_rings + 1)[1:]
    pts = [np.array([center], dtype=np.complex128)]
    for i, r in enumerate(ring_r):
        k = n_angles * (i + 1)
        ang = 2.0 * np.pi * np.arange(k) / k
        pts.append(center + r * np.exp(1j * ang))
    return _clip_to_disk(np.concatenate(pts))


def make_grid(n_radial: int, n_angular: int, refine_near=None,
              include_origin: bool = False) -> DiskGrid:
    """Polar grid with outermost ring on the boundary.

    refine_near: centers that receive a cluster of extra points within
    distance 1e-3 each (at least 16 points per center).
    """
    if n_radial < 1 or n_angular < 8:
        raise ValueError("need n_radial >= 1 and n_angular >= 8")
    radii = tuple((i + 1) / n_radial for i in range(n_radial))
    extras: list[complex] = []
    if include_origin:
        extras.append(0j)
    if refine_near is not None:
        # ring radius r keeps clipped points within 2r < 1e-3 of the center
        for center in refine_near:
            extras.extend(cluster_points(center, 1e-3, n_rings=2, n_angles=8))
    return DiskGrid(radii, n_angular, tuple(extras))
