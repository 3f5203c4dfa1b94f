"""Constructive similarity of an orbit generator system to a compressed shift.

Stacks the orbit vectors T^n f_j into a synthesis matrix, splits its domain
into kernel and coinvariant complement, and verifies that the restriction of
the synthesis map intertwines the compressed truncated shift with T.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NoSpectralGap, SpectralRadiusTooLarge
from .hardy import complex_matrix_to_json
from .orbits import RHO_MARGIN, OrbitSystem, frame_bounds
from .toeplitz import truncated_shift

KERNEL_TOL = 1e-7
GAP_RATIO = 1e3
TAIL_ACCURACY = 1e-12
MAX_ORDER = 512


def default_truncation_order(T: np.ndarray) -> int:
    """Truncation length that drops the orbit tail below 1e-12.

    Nilpotent-scale spectra get d+1 (the orbit terminates exactly); otherwise
    ceil(log(1e-12)/log(rho)) clamped to [d+1, 512].
    """
    T = np.asarray(T, dtype=np.complex128)
    d = T.shape[0]
    rho = float(np.max(np.abs(np.linalg.eigvals(T)))) if d else 0.0
    if rho < 1e-14:
        return d + 1
    if rho >= 1.0:
        return MAX_ORDER
    n = int(np.ceil(np.log(TAIL_ACCURACY) / np.log(rho)))
    return min(max(n, d + 1), MAX_ORDER)


def orbit_synthesis_matrix(T: np.ndarray, F_gen: np.ndarray,
                           N: int | None = None,
                           force: bool = False) -> np.ndarray:
    """d x (k*N) matrix whose block column n holds the orbit slice T^n F_gen.

    Columns are power-major: flat column n*k + j is T^n f_j.  Refuses
    spectral radius >= 1 - 1e-9 unless force=True, since then no truncation
    length makes the matrix a faithful stand-in for the full orbit.
    """
    T = np.asarray(T, dtype=np.complex128)
    F = np.asarray(F_gen, dtype=np.complex128)
    if F.ndim == 1:
        F = F.reshape(-1, 1)
    d, k = F.shape
    if T.shape != (d, d):
        raise ValueError(f"operator is {T.shape}, generators have {d} rows")
    rho = float(np.max(np.abs(np.linalg.eigvals(T)))) if d else 0.0
    if rho >= 1.0 - RHO_MARGIN and not force:
        raise SpectralRadiusTooLarge(
            f"spectral radius {rho:.6g} >= 1 - 1e-9; pass force=True to "
            "truncate anyway")
    if N is None:
        N = default_truncation_order(T)
    if N < 1:
        raise ValueError("truncation order must be >= 1")
    W = np.empty((d, k * N), dtype=np.complex128)
    block = F.copy()
    for n in range(N):
        W[:, n * k:(n + 1) * k] = block
        if n + 1 < N:
            block = T @ block
    return W


def coinvariant_complement(synthesis: np.ndarray,
                           kernel_tol: float = KERNEL_TOL):
    """Orthonormal basis of the numerical row space of the synthesis matrix
    and its dimension.

    Rank is the count of singular values above kernel_tol * sigma_max.  When
    the cut discards nonzero singular values, the kept/dropped ratio must
    clear 1e3 or the split is ambiguous.
    """
    W = np.asarray(synthesis, dtype=np.complex128)
    _, s, vh = np.linalg.svd(W, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((W.shape[1], 0), dtype=np.complex128), 0
    thresh = kernel_tol * s[0]
    r = int(np.sum(s > thresh))
    if 0 < r < s.size and s[r] > 0.0 and s[r - 1] / s[r] < GAP_RATIO:
        raise NoSpectralGap(
            f"singular values {s[r - 1]:.3e} and {s[r]:.3e} straddle the "
            f"rank cut without a 1e3 gap")
    return vh[:r].conj().T.copy(), r


def kernel_invariance_residual(synthesis: np.ndarray,
                               coinvariant_basis: np.ndarray,
                               block_size: int) -> float:
    """Largest leak of the shifted kernel into the coinvariant complement.

    Measures the spectral norm of the compression of shifted kernel vectors
    onto the complement, over unit kernel vectors that vanish on the final
    block; the final block is excluded because the truncated shift drops it,
    which is a truncation artifact rather than a property of the synthesis
    map.
    """
    W = np.asarray(synthesis, dtype=np.complex128)
    mult = block_size
    kn = W.shape[1]
    if kn % mult != 0:
        raise ValueError("domain size is not a multiple of the block size")
    N = kn // mult
    if N < 2:
        return 0.0
    scale = max(float(np.linalg.norm(W, 2)), 1.0)
    edge = np.zeros((mult, kn), dtype=np.complex128)
    edge[:, (N - 1) * mult:] = scale * np.eye(mult)
    _, s, vh = np.linalg.svd(np.vstack([W, edge]), full_matrices=True)
    rank = int(np.sum(s > KERNEL_TOL * s[0])) if s.size else 0
    null_basis = vh[rank:].conj().T
    if null_basis.shape[1] == 0:
        return 0.0
    S = truncated_shift(mult, N)
    return float(np.linalg.norm(
        coinvariant_basis.conj().T @ (S @ null_basis), 2))


@dataclass(frozen=True)
class SimilarityResult:
    """Outcome of the synthesis / compression / intertwining pipeline."""

    synthesis: np.ndarray
    coinvariant_basis: np.ndarray
    similarity_map: np.ndarray
    compressed_shift: np.ndarray
    intertwine_residual: float
    kernel_tol_used: float
    advisory: bool
    diagnostics: dict = field(default_factory=dict)

    @property
    def rank(self) -> int:
        return self.similarity_map.shape[1]

    def to_json_dict(self, include_matrices: bool = True) -> dict:
        eigs = (np.linalg.eigvals(self.compressed_shift)
                if self.compressed_shift.size else np.array([]))
        out = {
            "rank": self.rank,
            "intertwine_residual": float(self.intertwine_residual),
            "kernel_tol_used": float(self.kernel_tol_used),
            "advisory": bool(self.advisory),
            "compressed_shift_eigenvalues": [
                [float(e.real), float(e.imag)]
                for e in sorted(eigs, key=lambda z: (abs(z), np.angle(z)))],
            "diagnostics": {k: v for k, v in self.diagnostics.items()},
        }
        if include_matrices:
            out["synthesis"] = complex_matrix_to_json(self.synthesis)
            out["coinvariant_basis"] = complex_matrix_to_json(
                self.coinvariant_basis)
            out["similarity_map"] = complex_matrix_to_json(
                self.similarity_map)
            out["compressed_shift"] = complex_matrix_to_json(
                self.compressed_shift)
        return out


def similarity_verify(T: np.ndarray, F_gen: np.ndarray,
                      N: int | None = None,
                      kernel_tol: float = KERNEL_TOL) -> SimilarityResult:
    """Build the synthesis matrix, compress the shift, check the intertwining.

    The result is advisory when the orbit system fails the frame check; the
    construction still runs so the diagnostics stay available.
    """
    T = np.asarray(T, dtype=np.complex128)
    F = np.asarray(F_gen, dtype=np.complex128)
    if F.ndim == 1:
        F = F.reshape(-1, 1)
    d, k = F.shape
    report = frame_bounds(OrbitSystem(T, F))
    advisory = not report.is_frame
    W = orbit_synthesis_matrix(T, F, N=N)
    K_basis, r = coinvariant_complement(W, kernel_tol)
    order = W.shape[1] // k
    S = truncated_shift(k, order)
    S_K = K_basis.conj().T @ S @ K_basis
    V = W @ K_basis
    TV = T @ V
    num = float(np.linalg.norm(V @ S_K - TV, 2)) if r else 0.0
    den = float(np.linalg.norm(TV, 2)) if r else 0.0
    residual = num / den if den > 1e-300 else num

    recovery = 0.0
    for j in range(k):
        coords = K_basis[j].conj()  # K_basis^H e_j, e_j = flat column j
        recovery = max(recovery,
                       float(np.linalg.norm(V @ coords - F[:, j])))
    sv = np.linalg.svd(V, compute_uv=False) if r else np.array([])
    smin = float(sv[-1]) if r else 0.0
    cond = float(sv[0]) / smin if smin > 0.0 else float("inf")
    diagnostics = {
        "truncation_order": order,
        "kernel_invariance_residual": kernel_invariance_residual(W, K_basis, k),
        "generator_recovery_error": recovery,
        "similarity_map_min_singular_value": smin,
        "similarity_map_condition": cond,
        "frame_lower_bound": report.lower_bound_A,
        "frame_upper_bound": report.upper_bound_B,
    }
    return SimilarityResult(
        synthesis=W,
        coinvariant_basis=K_basis,
        similarity_map=V,
        compressed_shift=S_K,
        intertwine_residual=residual,
        kernel_tol_used=kernel_tol,
        advisory=advisory,
        diagnostics=diagnostics,
    )
