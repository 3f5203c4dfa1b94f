"""Scalar and matrix symbol layer: construction, evaluation, power series."""

import numpy as np
import pytest

from orbitframes.errors import (
    NotUnimodular,
    PoleInsideDisk,
    PoleTooClose,
    ZeroOutsideDisk,
)
from orbitframes.hardy import (
    AnalyticMatrixFunction,
    BlaschkeProduct,
    ComplexPoly,
    RationalFn,
    blaschke_from_zeros,
    make_grid,
    taylor_coeffs,
)

# ---------------------------------------------------------------------------
# oracles, written before the implementations they check


def cauchy_coeff_oracle(f, n_max, radius=0.7, n_samples=1024):
    """Power-series coefficients by discrete Cauchy integral on |z|=radius.

    Independent of the linear-recurrence path: samples the function on a
    circle and applies the inverse transform a_n = r^-n <f(r e^it), e^int>.
    """
    t = 2.0 * np.pi * np.arange(n_samples) / n_samples
    vals = np.asarray([complex(f(radius * np.exp(1j * ti))) for ti in t])
    out = np.empty(n_max, dtype=np.complex128)
    for n in range(n_max):
        out[n] = np.mean(vals * np.exp(-1j * n * t)) / radius**n
    return out


def blaschke_direct_oracle(zeros, c, z):
    """Evaluate c * prod (z-a)/(1 - conj(a) z) with plain complex arithmetic."""
    out = complex(c)
    for a in zeros:
        out *= (z - a) / (1.0 - a.conjugate() * z)
    return out


# frozen from the long-division / Cauchy oracle above
MOEBIUS_HALF_COEFFS = np.array([-0.5, 0.75, 0.375])


def test_cauchy_oracle_agrees_with_frozen_values():
    f = RationalFn(ComplexPoly([-0.5, 1.0]), ComplexPoly([1.0, -0.5]))
    got = cauchy_coeff_oracle(f, 3)
    assert np.allclose(got, MOEBIUS_HALF_COEFFS, atol=1e-10)


# ---------------------------------------------------------------------------
# ComplexPoly basics


def test_poly_zero_degree_and_eval():
    p = ComplexPoly(())
    assert p.degree == -1
    assert p.is_zero
    assert complex(p(0.3)) == 0


def test_poly_trailing_zeros_stripped():
    p = ComplexPoly([1.0, 2.0, 0.0, 0.0])
    assert p.degree == 1


def test_poly_deflate_exact():
    # (z-2)(z-3) = 6 - 5z + z^2
    p = ComplexPoly([6.0, -5.0, 1.0])
    q = p.deflate(2.0)
    assert np.allclose(q.coeffs, [-3.0, 1.0])


def test_poly_roots_roundtrip():
    rng = np.random.default_rng(7)
    for _ in range(20):
        roots = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        coeffs = npoly_from_roots(roots)
        got = np.sort_complex(ComplexPoly(coeffs).roots())
        assert np.allclose(got, np.sort_complex(roots), atol=1e-8)


def npoly_from_roots(roots):
    c = np.array([1.0 + 0j])
    for r in roots:
        c = np.convolve(c, np.array([-r, 1.0]))
    return c


# ---------------------------------------------------------------------------
# RationalFn construction and domain guards


def test_pole_inside_disk_rejected():
    with pytest.raises(PoleInsideDisk):
        RationalFn(ComplexPoly([1.0]), ComplexPoly([1.0, -2.0]))  # root at 0.5


def test_pole_on_boundary_rejected():
    with pytest.raises(PoleInsideDisk):
        RationalFn(ComplexPoly([1.0]), ComplexPoly([1.0, -1.0]))  # root at 1


def test_common_root_reduction():
    # (z-2)(z+5) / (z-2)(1 - z/3): factor z-2 cancels
    num = ComplexPoly(np.convolve([-2.0, 1.0], [5.0, 1.0]))
    den = ComplexPoly(np.convolve([-2.0, 1.0], [1.0, -1.0 / 3.0]))
    f = RationalFn(num, den)
    assert f.num.degree == 1
    assert f.den.degree == 1
    g = RationalFn(ComplexPoly([5.0, 1.0]), ComplexPoly([1.0, -1.0 / 3.0]))
    pts = 0.9 * np.exp(2j * np.pi * np.arange(7) / 7)
    assert np.allclose(f(pts), g(pts), atol=1e-10)


def test_eval_outside_disk_rejected():
    f = RationalFn.constant(1.0)
    with pytest.raises(ValueError):
        f(1.5)


def test_pole_too_close_guard():
    # den root at 1 + 1.5e-9 passes construction; evaluating inside the
    # modulus tolerance band next to it trips the proximity guard
    root = 1.0 + 1.5e-9
    f = RationalFn(ComplexPoly([1.0]), ComplexPoly([1.0, -1.0 / root]))
    with pytest.raises(PoleTooClose):
        f(1.0 + 0.9e-9)


def test_den_normalized_at_origin():
    f = RationalFn(ComplexPoly([4.0]), ComplexPoly([2.0, -1.0 / 3.0]))
    assert abs(f.den.coeffs[0] - 1.0) < 1e-15
    assert abs(complex(f(0.0)) - 2.0) < 1e-14


# ---------------------------------------------------------------------------
# blaschke_from_zeros


def test_blaschke_empty_is_constant_one():
    b = blaschke_from_zeros([], 1.0)
    assert b.degree == 0
    assert abs(complex(b(0.37 + 0.1j)) - 1.0) < 1e-15


def test_blaschke_single_zero_at_origin_value():
    b = blaschke_from_zeros([0.5], 1.0)
    assert abs(complex(b(0.0)) - (-0.5)) < 1e-15


def test_blaschke_boundary_unimodular_64_points():
    b = blaschke_from_zeros([0.5, 0.5j], 1.0)
    theta = 2.0 * np.pi * np.arange(64) / 64
    vals = b(np.exp(1j * theta))
    assert np.max(np.abs(np.abs(vals) - 1.0)) <= 1e-12
    # and the class agrees with the direct product formula
    for t in theta[:8]:
        z = complex(np.exp(1j * t))
        assert abs(complex(b(z)) - blaschke_direct_oracle([0.5, 0.5j], 1.0, z)) < 1e-13


def test_blaschke_zero_outside_disk_rejected():
    with pytest.raises(ZeroOutsideDisk):
        blaschke_from_zeros([1.0])
    with pytest.raises(ZeroOutsideDisk):
        blaschke_from_zeros([0.3, 1.2j])


def test_blaschke_constant_must_be_unimodular():
    with pytest.raises(NotUnimodular):
        blaschke_from_zeros([0.5], 0.9)


def test_blaschke_as_rational_pole_mirror():
    b = blaschke_from_zeros([0.6, -0.3j], 1j)
    r = b.as_rational()
    moduli = np.sort(r.pole_moduli())
    assert np.allclose(moduli, np.sort([1 / 0.6, 1 / 0.3]), atol=1e-10)
    pts = 0.8 * np.exp(2j * np.pi * np.arange(11) / 11)
    assert np.allclose(b(pts), r(pts), atol=1e-12)


def test_blaschke_unimodularity_random_products():
    rng = np.random.default_rng(101)
    theta = np.exp(2j * np.pi * np.arange(32) / 32)
    for _ in range(25):
        k = int(rng.integers(1, 6))
        zeros = 0.95 * rng.uniform(0, 1, k) * np.exp(2j * np.pi * rng.uniform(0, 1, k))
        c = np.exp(2j * np.pi * rng.uniform())
        b = blaschke_from_zeros(zeros, c)
        assert np.max(np.abs(np.abs(b(theta)) - 1.0)) <= 1e-12


# ---------------------------------------------------------------------------
# matrix eval


def test_eval_identity_constant():
    f = AnalyticMatrixFunction.identity(2)
    assert np.allclose(f.eval(0.3), np.eye(2))


def test_eval_diag_monomials_at_origin():
    z = RationalFn(ComplexPoly([0.0, 1.0]))
    z2 = RationalFn(ComplexPoly([0.0, 0.0, 1.0]))
    f = AnalyticMatrixFunction.diagonal([z, z2])
    assert np.allclose(f.eval(0.0), np.zeros((2, 2)))


def test_eval_moebius_at_origin():
    b = RationalFn(ComplexPoly([-0.5, 1.0]), ComplexPoly([1.0, -0.5]))
    f = AnalyticMatrixFunction([[b]])
    assert abs(f.eval(0.0)[0, 0] - (-0.5)) < 1e-15


def test_eval_grid_matches_pointwise():
    rng = np.random.default_rng(55)
    b1 = blaschke_from_zeros([0.4]).as_rational()
    b2 = blaschke_from_zeros([0.2 + 0.3j]).as_rational()
    f = AnalyticMatrixFunction([[b1, b2], [RationalFn.constant(1.0), b1 * b2]])
    pts = 0.97 * np.sqrt(rng.uniform(0, 1, 40)) * np.exp(2j * np.pi * rng.uniform(0, 1, 40))
    grid_vals = f.eval_grid(pts)
    for idx in range(0, 40, 7):
        assert np.allclose(grid_vals[idx], f.eval(pts[idx]), atol=1e-12)


# ---------------------------------------------------------------------------
# boundary_adjoint_eval


def test_adjoint_constant_column():
    f = AnalyticMatrixFunction.column([RationalFn.constant(1.0), RationalFn.constant(1j)])
    got = f.boundary_adjoint_eval(0.77)
    assert got.shape == (1, 2)
    assert np.allclose(got, [[1.0, -1j]])


def test_adjoint_inner_diagonal_isometry():
    b1 = blaschke_from_zeros([0.5]).as_rational()
    b2 = blaschke_from_zeros([0.3, -0.2j]).as_rational()
    theta_sym = AnalyticMatrixFunction.diagonal([b1, b2])
    for theta in np.linspace(0, 2 * np.pi, 17):
        prod = theta_sym.boundary_adjoint_eval(theta) @ theta_sym.eval(np.exp(1j * theta))
        assert np.max(np.abs(prod - np.eye(2))) <= 1e-12


def test_adjoint_zero_matrix():
    f = AnalyticMatrixFunction.zero(2, 3)
    assert np.allclose(f.boundary_adjoint_eval(1.0), np.zeros((3, 2)))


def test_boundary_sup_norm_finite():
    b = blaschke_from_zeros([0.5]).as_rational()
    f = AnalyticMatrixFunction([[b, RationalFn.constant(2.0)]])
    s = f.boundary_sup_norm()
    assert np.isfinite(s)
    assert s >= 2.0 - 1e-12


# ---------------------------------------------------------------------------
# taylor_coeffs


def test_taylor_geometric():
    f = RationalFn(ComplexPoly([1.0]), ComplexPoly([1.0, -0.5]))
    assert np.allclose(taylor_coeffs(f, 4), [1, 0.5, 0.25, 0.125], atol=1e-14)


def test_taylor_monomial():
    f = RationalFn(ComplexPoly([0.0, 0.0, 1.0]))
    assert np.allclose(taylor_coeffs(f, 5), [0, 0, 1, 0, 0], atol=0)


def test_taylor_moebius_frozen():
    f = RationalFn(ComplexPoly([-0.5, 1.0]), ComplexPoly([1.0, -0.5]))
    assert np.allclose(taylor_coeffs(f, 3), MOEBIUS_HALF_COEFFS, atol=1e-14)


def test_taylor_matches_cauchy_oracle_random():
    rng = np.random.default_rng(202)
    for _ in range(15):
        nc = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        pole = (1.5 + rng.uniform(0, 2)) * np.exp(2j * np.pi * rng.uniform())
        f = RationalFn(ComplexPoly(nc), ComplexPoly([1.0, -1.0 / pole]))
        got = taylor_coeffs(f, 8)
        want = cauchy_coeff_oracle(f, 8)
        assert np.allclose(got, want, atol=1e-9)


def test_taylor_tail_bound_observed():
    f = RationalFn(ComplexPoly([1.0]), ComplexPoly([1.0, -0.5]))
    C, r = f.taylor_tail_bound(10)
    assert abs(r - 2.0) < 1e-10
    coeffs = taylor_coeffs(f, 30)
    n = np.arange(30)
    assert np.all(np.abs(coeffs) <= C / r**n * (1 + 1e-12))


def test_taylor_convolution_invariant():
    rng = np.random.default_rng(303)
    N = 12
    for _ in range(20):
        f = _random_rational(rng)
        g = _random_rational(rng)
        af = taylor_coeffs(f, N)
        ag = taylor_coeffs(g, N)
        conv = np.convolve(af, ag)[:N]
        assert np.allclose(taylor_coeffs(f * g, N), conv, atol=1e-10)


def _random_rational(rng):
    nc = rng.standard_normal(rng.integers(1, 4)) + 1j * rng.standard_normal(1)
    pole = (1.3 + rng.uniform(0, 2)) * np.exp(2j * np.pi * rng.uniform())
    return RationalFn(ComplexPoly(nc), ComplexPoly([1.0, -1.0 / pole]))


# ---------------------------------------------------------------------------
# matrix product invariant


def test_matrix_product_eval_invariant_100_points():
    rng = np.random.default_rng(404)
    b1 = blaschke_from_zeros([0.4, -0.1]).as_rational()
    b2 = blaschke_from_zeros([0.25j]).as_rational()
    F = AnalyticMatrixFunction([[b1, RationalFn.constant(0.5)], [b2, b1 * b2]])
    G = AnalyticMatrixFunction([[b2, RationalFn.constant(1j)], [RationalFn.constant(0.0), b1]])
    H = F @ G
    pts = np.sqrt(rng.uniform(0, 1, 100)) * np.exp(2j * np.pi * rng.uniform(0, 1, 100))
    for z in pts:
        assert np.allclose(H.eval(z), F.eval(z) @ G.eval(z), atol=1e-10)


# ---------------------------------------------------------------------------
# make_grid


def test_grid_single_boundary_ring():
    g = make_grid(1, 8)
    assert g.size == 8
    assert np.allclose(np.abs(g.points), 1.0)


def test_grid_three_rings():
    g = make_grid(3, 16)
    assert g.size == 48
    assert np.max(np.abs(g.points)) <= 1.0 + 1e-15


def test_grid_refine_near_cluster():
    g = make_grid(2, 16, refine_near=[0.5])
    close = np.abs(g.points - 0.5) <= 1e-3
    assert int(np.sum(close)) >= 16


def test_grid_refine_near_boundary_center_clipped():
    g = make_grid(2, 16, refine_near=[1.0])
    assert np.max(np.abs(g.points)) <= 1.0 + 1e-12
    close = np.abs(g.points - 1.0) <= 1e-3
    assert int(np.sum(close)) >= 16


def test_grid_includes_origin_on_request():
    g = make_grid(2, 8, include_origin=True)
    assert np.any(g.points == 0)


def test_grid_lattice_order_radius_major():
    g = make_grid(2, 8)
    # first 8 points on radius 1/2, next 8 on radius 1
    assert np.allclose(np.abs(g.points[:8]), 0.5)
    assert np.allclose(np.abs(g.points[8:16]), 1.0)
    assert abs(g.points[0] - 0.5) < 1e-15  # angle 0 first
