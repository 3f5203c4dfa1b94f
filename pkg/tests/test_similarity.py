"""Synthesis matrices, coinvariant complements, intertwining verification."""

import numpy as np
import pytest

from orbitframes.errors import NoSpectralGap, SpectralRadiusTooLarge
from orbitframes.hardy import (
    AnalyticMatrixFunction,
    RationalFn,
    blaschke_from_zeros,
)
from orbitframes.modelspace import model_space_diagonal, model_space_scalar
from orbitframes.orbits import OrbitSystem, frame_bounds
from orbitframes.similarity import (
    SimilarityResult,
    coinvariant_complement,
    default_truncation_order,
    kernel_invariance_residual,
    orbit_synthesis_matrix,
    similarity_verify,
)


def orbit_stack_oracle(T, F, N):
    """Straightforward per-column orbit stacking, no block reuse."""
    T = np.asarray(T, dtype=np.complex128)
    F = np.asarray(F, dtype=np.complex128)
    if F.ndim == 1:
        F = F.reshape(-1, 1)
    cols = []
    for n in range(N):
        P = np.linalg.matrix_power(T, n)
        for j in range(F.shape[1]):
            cols.append(P @ F[:, j])
    return np.stack(cols, axis=1)


def eig_multiset_distance(A, B):
    """Greedy bipartite matching cost between two eigenvalue multisets."""
    a = sorted(np.linalg.eigvals(A), key=lambda z: (round(z.real, 9), z.imag))
    b = sorted(np.linalg.eigvals(B), key=lambda z: (round(z.real, 9), z.imag))
    if len(a) != len(b):
        return float("inf")
    return max(abs(x - y) for x, y in zip(a, b)) if a else 0.0


def random_contraction(rng, d, rho):
    T = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return T * (rho / max(np.abs(np.linalg.eigvals(T))))


# ---------------------------------------------------------------------------
# orbit_synthesis_matrix


def test_synthesis_zero_operator_identity_gens():
    W = orbit_synthesis_matrix(np.zeros((3, 3)), np.eye(3), N=3)
    expected = np.hstack([np.eye(3), np.zeros((3, 6))])
    assert np.allclose(W, expected, atol=1e-15)


def test_synthesis_scalar_geometric():
    W = orbit_synthesis_matrix(np.array([[0.5]]), np.array([[1.0]]), N=4)
    assert np.allclose(W, [[1.0, 0.5, 0.25, 0.125]], atol=1e-15)


def test_synthesis_recurrence_and_oracle():
    rng = np.random.default_rng(71)
    T = random_contraction(rng, 3, 0.7)
    F = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    W = orbit_synthesis_matrix(T, F, N=6)
    assert W.shape == (3, 12)
    for n in range(1, 6):
        assert np.allclose(W[:, 2 * n:2 * n + 2],
                           T @ W[:, 2 * (n - 1):2 * n], atol=1e-12)
    assert np.allclose(W, orbit_stack_oracle(T, F, 6), atol=1e-10)


def test_synthesis_rejects_large_radius():
    with pytest.raises(SpectralRadiusTooLarge):
        orbit_synthesis_matrix(np.array([[1.0]]), np.array([[1.0]]))
    W = orbit_synthesis_matrix(np.array([[1.0]]), np.array([[1.0]]),
                               N=5, force=True)
    assert np.allclose(W, np.ones((1, 5)), atol=1e-15)


def test_default_order_policy():
    assert default_truncation_order(np.zeros((4, 4))) == 5
    assert default_truncation_order(np.array([[0.5]])) == 40
    # near-unit radius hits the cap
    assert default_truncation_order(np.array([[0.999]])) == 512


# ---------------------------------------------------------------------------
# coinvariant_complement


def test_coinvariant_of_degree_zero_stack():
    W = np.hstack([np.eye(3), np.zeros((3, 6))])
    K, r = coinvariant_complement(W)
    assert r == 3
    assert np.allclose(K.conj().T @ K, np.eye(3), atol=1e-12)
    # complement lives entirely in the first block
    assert np.linalg.norm(K[3:, :]) < 1e-12


def test_coinvariant_full_row_rank():
    rng = np.random.default_rng(72)
    T = random_contraction(rng, 3, 0.5)
    F = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    W = orbit_synthesis_matrix(T, F)
    K, r = coinvariant_complement(W)
    assert r == 3
    assert K.shape == (W.shape[1], 3)


def test_coinvariant_rank_never_exceeds_dim():
    rng = np.random.default_rng(73)
    for d, k in [(2, 1), (4, 2), (5, 3)]:
        T = random_contraction(rng, d, 0.6)
        F = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
        _, r = coinvariant_complement(orbit_synthesis_matrix(T, F))
        assert r <= d


def test_coinvariant_no_spectral_gap_raises():
    rng = np.random.default_rng(74)
    U, _ = np.linalg.qr(rng.standard_normal((3, 3))
                        + 1j * rng.standard_normal((3, 3)))
    V, _ = np.linalg.qr(rng.standard_normal((6, 6))
                        + 1j * rng.standard_normal((6, 6)))
    # singular values straddle 1e-7 with only a factor-100 gap
    W = U @ np.diag([1.0, 1e-6, 1e-8]) @ V[:3, :]
    with pytest.raises(NoSpectralGap):
        coinvariant_complement(W)


def test_zero_synthesis_matrix_has_empty_complement():
    K, r = coinvariant_complement(np.zeros((2, 8)))
    assert r == 0
    assert K.shape == (8, 0)


# ---------------------------------------------------------------------------
# model-space system for the symbol diag(z, elementary factor at 1/2)


@pytest.fixture(scope="module")
def halfpair_system():
    b1 = blaschke_from_zeros([0.0])
    b2 = blaschke_from_zeros([0.5])
    K = model_space_diagonal([b1, b2], N=96)
    one = RationalFn.constant(1.0)
    g, res = K.project(AnalyticMatrixFunction.column([one, one]))
    assert res < 1e-10
    return K, g


def test_halfpair_similarity_eigenvalues(halfpair_system):
    K, g = halfpair_system
    res = similarity_verify(K.shift_matrix, g)
    assert not res.advisory
    assert res.intertwine_residual <= 1e-6
    eigs = sorted(np.linalg.eigvals(res.compressed_shift), key=abs)
    assert abs(eigs[0] - 0.0) < 1e-6
    assert abs(eigs[1] - 0.5) < 1e-6
    assert res.diagnostics["generator_recovery_error"] <= 1e-8


def test_halfpair_kernel_is_product_multiple_space(halfpair_system):
    # Ker W should be the truncation of (b1 b2) H^2: every truncated
    # coefficient column of b1(z) b2(z) z^n must be orthogonal to the
    # coinvariant complement, up to the geometric tail the cut drops.
    K, g = halfpair_system
    res = similarity_verify(K.shift_matrix, g)
    W = res.synthesis
    N = W.shape[1]
    assert res.rank == 2
    prod = (blaschke_from_zeros([0.0]).as_rational()
            * blaschke_from_zeros([0.5]).as_rational())
    base = prod.taylor(N)
    for n in range(0, N - 40, 7):
        v = np.zeros(N, dtype=np.complex128)
        v[n:] = base[:N - n]
        leak = np.linalg.norm(res.coinvariant_basis.conj().T @ v)
        assert leak / np.linalg.norm(v) <= 1e-6


def test_halfpair_kernel_invariance(halfpair_system):
    K, g = halfpair_system
    res = similarity_verify(K.shift_matrix, g)
    assert res.diagnostics["kernel_invariance_residual"] <= 1e-6


# ---------------------------------------------------------------------------
# similarity_verify on canonical systems


def test_nilpotent_shift_orbit_is_unitary_map():
    K = model_space_scalar(blaschke_from_zeros([0.0, 0.0, 0.0]))
    T = K.shift_matrix
    g = np.zeros(3, dtype=np.complex128)
    g[0] = 1.0
    res = similarity_verify(T, g)
    assert res.intertwine_residual <= 1e-10
    assert not res.advisory
    # columns of the similarity map are orthogonal (unitary up to scaling)
    G = res.similarity_map.conj().T @ res.similarity_map
    off = G - np.diag(np.diag(G))
    assert np.linalg.norm(off) <= 1e-10


def test_random_similar_pair_same_spectrum():
    rng = np.random.default_rng(75)
    for _ in range(5):
        d = 4
        T = random_contraction(rng, d, 0.6)
        F = rng.standard_normal((d, 2)) + 1j * rng.standard_normal((d, 2))
        V0 = rng.standard_normal((d, d)) + 0.5 * np.eye(d)
        T2 = np.linalg.solve(V0, T @ V0)
        F2 = np.linalg.solve(V0, F)
        r1 = similarity_verify(T, F)
        r2 = similarity_verify(T2, F2)
        assert r1.intertwine_residual <= 1e-6
        assert r2.intertwine_residual <= 1e-6
        assert eig_multiset_distance(r1.compressed_shift,
                                     r2.compressed_shift) <= 1e-6
        # and both agree with the operator they compress
        assert eig_multiset_distance(r1.compressed_shift, T) <= 1e-6


def test_round_trip_frame_verdict():
    rng = np.random.default_rng(76)
    d, k = 3, 2
    T = random_contraction(rng, d, 0.5)
    F = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    original = frame_bounds(OrbitSystem(T, F))
    assert original.is_frame
    res = similarity_verify(T, F)
    # generators of the compressed system: K-coordinates of the flat
    # standard basis vectors for block 0
    G2 = np.stack([res.coinvariant_basis[j].conj() for j in range(k)], axis=1)
    compressed = frame_bounds(OrbitSystem(res.compressed_shift, G2))
    assert compressed.is_frame == original.is_frame


def test_advisory_flag_for_non_frame():
    # lower frame bound vanishes: single generator never reaches e2
    T = np.diag([0.5, 0.25]).astype(np.complex128)
    g = np.array([1.0, 0.0], dtype=np.complex128)
    res = similarity_verify(T, g)
    assert res.advisory
    assert res.rank == 1


def test_generator_recovery_across_systems():
    rng = np.random.default_rng(77)
    for _ in range(5):
        d = rng.integers(2, 5)
        k = rng.integers(1, 3)
        T = random_contraction(rng, int(d), 0.55)
        F = rng.standard_normal((int(d), int(k))) \
            + 1j * rng.standard_normal((int(d), int(k)))
        res = similarity_verify(T, F)
        assert res.diagnostics["generator_recovery_error"] <= 1e-8
        assert res.rank <= d


def test_kernel_invariance_helper_edge_exclusion():
    # nilpotent stack [I3, 0]: the kernel is exactly the final block, which
    # the helper excludes, so the residual is zero
    W = np.hstack([np.eye(3), np.zeros((3, 3))])
    K, _ = coinvariant_complement(W)
    assert kernel_invariance_residual(W, K, 3) == 0.0


def test_json_dict_matrix_suppression():
    rng = np.random.default_rng(78)
    T = random_contraction(rng, 2, 0.4)
    F = rng.standard_normal((2, 1)) + 1j * rng.standard_normal((2, 1))
    res = similarity_verify(T, F)
    full = res.to_json_dict(include_matrices=True)
    slim = res.to_json_dict(include_matrices=False)
    assert "synthesis" in full and "similarity_map" in full
    assert "synthesis" not in slim and "similarity_map" not in slim
    assert slim["rank"] == res.rank
    assert len(slim["compressed_shift_eigenvalues"]) == res.rank
    assert isinstance(res, SimilarityResult)
