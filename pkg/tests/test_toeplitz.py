"""Block-Toeplitz truncations, adjoints, and the model projection."""

import numpy as np
import pytest

from orbitframes.errors import NotRigid
from orbitframes.hardy import (
    AnalyticMatrixFunction,
    ComplexPoly,
    RationalFn,
    blaschke_from_zeros,
    taylor_coeffs,
)
from orbitframes.toeplitz import (
    BlockToeplitz,
    TruncatedHardy,
    default_order,
    idempotency_defect,
    matrix_to_csv,
    model_projection_matrix,
    rigidity_check,
    toeplitz_adjoint_matrix,
    toeplitz_matrix,
    truncated_shift,
)

Z = RationalFn(ComplexPoly([0.0, 1.0]))
ONE = RationalFn.constant(1.0)


def conv_action_oracle(F, N, x):
    """Apply the truncated Toeplitz operator by explicit coefficient convolution."""
    m, k = F.shape
    c = F.taylor_tensor(N)
    xb = np.asarray(x, dtype=np.complex128).reshape(N, k)
    out = np.zeros((N, m), dtype=np.complex128)
    for n in range(N):
        for j in range(n + 1):
            out[n] += c[n - j] @ xb[j]
    return out.ravel()


# ---------------------------------------------------------------------------
# layout


def test_truncated_hardy_layout():
    th = TruncatedHardy(mult=2, order=3)
    assert th.dim == 6
    assert th.flat_index(power=2, component=1) == 5
    v = np.arange(6, dtype=complex)
    assert np.allclose(th.blocks(v)[2], [4, 5])


def test_truncated_shift_isometric_below_top():
    S = truncated_shift(2, 4)
    I = np.eye(8)
    StS = S.conj().T @ S
    # isometry on the first N-1 blocks, kills nothing there
    assert np.allclose(StS[:6, :6], I[:6, :6])
    assert np.allclose(StS[6:, 6:], 0)


# ---------------------------------------------------------------------------
# toeplitz_matrix


def test_constant_one_gives_identity():
    T = toeplitz_matrix(AnalyticMatrixFunction([[ONE]]), 3)
    assert np.allclose(T.matrix, np.eye(3))


def test_scalar_z_gives_downshift():
    T = toeplitz_matrix(AnalyticMatrixFunction([[Z]]), 3)
    assert np.allclose(T.matrix, np.eye(3, 3, -1))


def test_geometric_symbol_diagonals():
    f = RationalFn(ComplexPoly([1.0]), ComplexPoly([1.0, -0.5]))
    T = toeplitz_matrix(AnalyticMatrixFunction([[f]]), 3).matrix
    want = np.array([[1, 0, 0], [0.5, 1, 0], [0.25, 0.5, 1.0]])
    assert np.allclose(T, want, atol=1e-14)
    # diagonals match taylor_coeffs directly
    assert np.allclose(np.diag(T, -1), taylor_coeffs(f, 3)[1].repeat(2))


def test_block_structure_matches_convolution_action():
    rng = np.random.default_rng(11)
    b = blaschke_from_zeros([0.3, -0.4j]).as_rational()
    F = AnalyticMatrixFunction([[b, ONE], [Z, b]])
    N = 6
    T = toeplitz_matrix(F, N)
    for _ in range(10):
        x = rng.standard_normal(2 * N) + 1j * rng.standard_normal(2 * N)
        assert np.allclose(T.matrix @ x, conv_action_oracle(F, N, x), atol=1e-12)


def test_upper_blocks_zero():
    F = AnalyticMatrixFunction([[Z, ONE], [Z * Z, Z]])
    T = toeplitz_matrix(F, 4).matrix
    m = 2
    for i in range(4):
        for j in range(i + 1, 4):
            assert np.allclose(T[i * m : (i + 1) * m, j * m : (j + 1) * m], 0)


# ---------------------------------------------------------------------------
# adjoint


def test_adjoint_of_z_is_upshift():
    A = toeplitz_adjoint_matrix(AnalyticMatrixFunction([[Z]]), 4)
    assert np.allclose(A, np.eye(4, 4, 1))


def test_adjoint_constant_block_diagonal():
    C = np.array([[1.0, 2j], [0.0, 3.0]])
    A = toeplitz_adjoint_matrix(AnalyticMatrixFunction.constant(C), 3)
    want = np.kron(np.eye(3), C.conj().T)
    assert np.allclose(A, want)


def test_adjoint_identity_50_random_pairs():
    rng = np.random.default_rng(22)
    b = blaschke_from_zeros([0.5]).as_rational()
    F = AnalyticMatrixFunction([[b, Z], [ONE, b * b]])
    N = 5
    T = toeplitz_matrix(F, N).matrix
    A = toeplitz_adjoint_matrix(F, N)
    for _ in range(50):
        x = rng.standard_normal(2 * N) + 1j * rng.standard_normal(2 * N)
        y = rng.standard_normal(2 * N) + 1j * rng.standard_normal(2 * N)
        assert abs(np.vdot(y, T @ x) - np.vdot(A @ y, x)) <= 1e-12 * (
            np.linalg.norm(x) * np.linalg.norm(y)
        )


# ---------------------------------------------------------------------------
# rigidity and the model projection


def test_rigidity_inner_diagonal_passes():
    b1 = blaschke_from_zeros([0.5]).as_rational()
    theta = AnalyticMatrixFunction.diagonal([b1, Z])
    ok, proj, dev, drift = rigidity_check(theta)
    assert ok
    assert np.allclose(proj, np.eye(2), atol=1e-8)
    assert dev <= 1e-10


def test_rigidity_zero_symbol_passes():
    theta = AnalyticMatrixFunction.zero(2, 2)
    ok, proj, dev, drift = rigidity_check(theta)
    assert ok
    assert np.allclose(proj, 0)


def test_rigidity_rank_one_rigid_passes():
    # u(z) w* with u = (1, z)/sqrt(2) on the boundary and w = (1, 1)/sqrt(2):
    # pointwise partial isometry, initial space fixed at span(w)
    half = RationalFn.constant(0.5)
    theta = AnalyticMatrixFunction([[half, half], [Z * half, Z * half]])
    ok, proj, dev, drift = rigidity_check(theta)
    assert ok
    assert np.allclose(proj, np.full((2, 2), 0.5), atol=1e-8)


def test_rigidity_rejects_nonisometric():
    theta = AnalyticMatrixFunction.constant(np.array([[0.5, 0], [0, 1.0]]))
    ok, *_ = rigidity_check(theta)
    assert not ok
    with pytest.raises(NotRigid):
        model_projection_matrix(theta, 4)


def test_rigidity_rejects_varying_initial_space():
    # diag(z, 1) is pointwise unitary-column partial isometry but row space
    # of rank 2 everywhere, actually unitary; use rank-1 with rotating space
    s = np.sqrt(0.5)
    theta = AnalyticMatrixFunction([[RationalFn.constant(s), RationalFn.constant(s) * Z],
                                    [RationalFn.constant(0.0), RationalFn.constant(0.0)]])
    ok, *_ = rigidity_check(theta)
    assert not ok


def test_projection_zero_symbol_is_identity():
    theta = AnalyticMatrixFunction.zero(2, 2)
    P = model_projection_matrix(theta, 3)
    assert np.allclose(P, np.eye(6))


def test_projection_scalar_z_constants():
    theta = AnalyticMatrixFunction([[Z]])
    P = model_projection_matrix(theta, 4)
    assert np.allclose(P, np.diag([1.0, 0, 0, 0]))


def test_projection_diag_z_z2_rank_three():
    theta = AnalyticMatrixFunction.diagonal([Z, Z * Z])
    P = model_projection_matrix(theta, 4)
    sv = np.linalg.svd(P, compute_uv=False)
    assert int(np.sum(sv > 0.5)) == 3
    assert idempotency_defect(P) <= 1e-12


def test_projection_idempotent_on_low_degrees():
    # inner polynomial symbol of entry degree d: restriction to degrees
    # < N - d is idempotent to 1e-10
    theta = AnalyticMatrixFunction.diagonal([Z * Z, Z])
    d, N, m = 2, 8, 2
    P = model_projection_matrix(theta, N)
    assert idempotency_defect(P, active_dim=m * (N - d)) <= 1e-10


def test_projection_blaschke_defect_decays_with_order():
    b = blaschke_from_zeros([0.5]).as_rational()
    theta = AnalyticMatrixFunction([[b]])
    defects = []
    for N in (8, 16, 32):
        P = model_projection_matrix(theta, N)
        defects.append(idempotency_defect(P, active_dim=N // 2))
    assert defects[2] < defects[0]
    assert defects[2] <= 1e-8


# ---------------------------------------------------------------------------
# norm and product invariants


def test_norm_nondecreasing_and_bounded_by_boundary_sup():
    b = blaschke_from_zeros([0.4]).as_rational()
    F = AnalyticMatrixFunction([[b, ONE], [RationalFn.constant(0.0), b]])
    sup = F.boundary_sup_norm(512)
    prev = 0.0
    for N in (2, 4, 8, 16):
        nrm = np.linalg.norm(toeplitz_matrix(F, N).matrix, 2)
        assert nrm >= prev - 1e-12
        assert nrm <= sup + 1e-10
        prev = nrm


def test_product_of_polynomial_symbols():
    rng = np.random.default_rng(33)
    F = AnalyticMatrixFunction([[Z, ONE], [ONE, Z * Z]])
    G = AnalyticMatrixFunction([[ONE, Z], [Z, ONE]])
    N = 8
    dsum = F.degree + G.degree
    TF = toeplitz_matrix(F, N).matrix
    TG = toeplitz_matrix(G, N).matrix
    TFG = toeplitz_matrix(F @ G, N).matrix
    for _ in range(10):
        x = np.zeros(2 * N, dtype=np.complex128)
        low = 2 * (N - dsum)
        x[:low] = rng.standard_normal(low) + 1j * rng.standard_normal(low)
        assert np.allclose(TFG @ x, TF @ (TG @ x), atol=1e-10)


# ---------------------------------------------------------------------------
# helpers


def test_default_order():
    assert default_order(0) == 32
    assert default_order(20) == 40
    assert default_order(3, model_dim=12) == 48


def test_csv_export_roundtrip(tmp_path):
    M = np.array([[1 + 2j, 0.5], [-1j, 3.0]])
    path = tmp_path / "m.csv"
    matrix_to_csv(M, str(path))
    rows = [line.split(",") for line in path.read_text().strip().split("\n")]
    got = np.array([[float(r[0]) + 1j * float(r[1]), float(r[2]) + 1j * float(r[3])]
                    for r in rows])
    assert np.array_equal(got, M)
