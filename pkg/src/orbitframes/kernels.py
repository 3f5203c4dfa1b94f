"""Hot numeric loops with numba/numpy twin implementations.

Every public function here dispatches on the active backend (see
``backend``). The numpy versions are the reference; the numba versions in
``kernels_numba`` must agree to floating-point noise (asserted in tests).

Shapes:
    coefficient tensors are padded per entry: num[m, k, Dn], den[m, k, Dd],
    ascending degree; evaluation points are 1-d complex arrays.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import backend


def _as_c128(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


# ---------------------------------------------------------------------------
# rational matrix evaluation over a point set


def _ratmat_eval_grid_numpy(num, den, pts):
    # polyval contracts the leading (degree) axis; tensors come in as
    # (m, k, D) so move degree to the front.
    nv = npoly.polyval(pts, num.transpose(2, 0, 1))
    dv = npoly.polyval(pts, den.transpose(2, 0, 1))
    return np.ascontiguousarray((nv / dv).transpose(2, 0, 1))


def ratmat_eval_grid(num, den, pts):
    """Evaluate an m x k rational matrix at every point: (P, m, k)."""
    num = _as_c128(num)
    den = _as_c128(den)
    pts = _as_c128(pts)
    if backend.use_numba():
        from . import kernels_numba

        return kernels_numba.ratmat_eval_grid(num, den, pts)
    return _ratmat_eval_grid_numpy(num, den, pts)


# ---------------------------------------------------------------------------
# smallest eigenvalue of F(z)F(z)* + T(z)T(z)* per grid point


def _gram_lambda_min_numpy(fvals, tvals):
    gram = fvals @ fvals.conj().transpose(0, 2, 1)
    gram += tvals @ tvals.conj().transpose(0, 2, 1)
    return np.linalg.eigvalsh(gram)[:, 0]


def gram_lambda_min(fvals, tvals):
    """Per-point smallest eigenvalue of the stacked Hermitian Gram sum.

    fvals: (P, m, k1), tvals: (P, m, k2); returns (P,) float64.
    """
    fvals = _as_c128(fvals)
    tvals = _as_c128(tvals)
    if backend.use_numba():
        from . import kernels_numba

        return kernels_numba.gram_lambda_min(fvals, tvals)
    return _gram_lambda_min_numpy(fvals, tvals)


# ---------------------------------------------------------------------------
# truncated orbit Gram  sum_{n<N} T^n G G* (T*)^n


def _orbit_gram_numpy(T, G, n_terms):
    X = G.copy()
    phi = X @ X.conj().T
    for _ in range(1, n_terms):
        X = T @ X
        phi += X @ X.conj().T
    return phi


def orbit_gram(T, G, n_terms):
    """Partial orbit Gram matrix; exact reference for the Stein solution."""
    T = _as_c128(T)
    G = _as_c128(G)
    n_terms = int(n_terms)
    if backend.use_numba():
        from . import kernels_numba

        return kernels_numba.orbit_gram(T, G, n_terms)
    return _orbit_gram_numpy(T, G, n_terms)


# ---------------------------------------------------------------------------
# bilateral coefficient power sum  sum_{|n|<=n_max} |c_n|^2
# with c_n the quadrature Fourier coefficient of uniformly sampled w


def _coeff_power_sum_numpy(w, n_max):
    P = w.shape[0]
    t = np.arange(P)
    total = 0.0
    for n in range(-n_max, n_max + 1):
        c = np.mean(w * np.exp(-2j * np.pi * n * t / P))
        total += (c.conjugate() * c).real
    return total


def coeff_power_sum(w, n_max):
    """Direct boundary-quadrature partial Plancherel sum for samples w."""
    w = _as_c128(w)
    n_max = int(n_max)
    if backend.use_numba():
        from . import kernels_numba

        return kernels_numba.coeff_power_sum(w, n_max)
    return _coeff_power_sum_numpy(w, n_max)
