"""numba @njit twins of the kernels in ``kernels``.

Import of this module requires numba; the dispatcher only imports it when
the numba backend is active.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def ratmat_eval_grid(num, den, pts):
    P = pts.shape[0]
    m, k, Dn = num.shape
    Dd = den.shape[2]
    out = np.empty((P, m, k), np.complex128)
    for p in range(P):
        z = pts[p]
        for i in range(m):
            for j in range(k):
                nv = 0.0 + 0.0j
                for d in range(Dn - 1, -1, -1):
                    nv = nv * z + num[i, j, d]
                dv = 0.0 + 0.0j
                for d in range(Dd - 1, -1, -1):
                    dv = dv * z + den[i, j, d]
                out[p, i, j] = nv / dv
    return out


@njit(cache=True)
def gram_lambda_min(fvals, tvals):
    P, m, k1 = fvals.shape
    k2 = tvals.shape[2]
    out = np.empty(P, np.float64)
    for p in range(P):
        M = np.empty((m, m), np.complex128)
        for i in range(m):
            for j in range(m):
                acc = 0.0 + 0.0j
                for l in range(k1):
                    acc += fvals[p, i, l] * np.conj(fvals[p, j, l])
                for l in range(k2):
                    acc += tvals[p, i, l] * np.conj(tvals[p, j, l])
                M[i, j] = acc
        out[p] = np.linalg.eigvalsh(M)[0]
    return out


@njit(cache=True)
def orbit_gram(T, G, n_terms):
    X = G.copy()
    phi = X @ np.conj(X.T)
    for _ in range(1, n_terms):
        X = T @ X
        phi += X @ np.conj(X.T)
    return phi


@njit(cache=True)
def coeff_power_sum(w, n_max):
    P = w.shape[0]
    total = 0.0
    for n in range(-n_max, n_max + 1):
        # unit-modulus recurrence instead of one exp per sample
        step = np.exp(-2j * np.pi * n / P)
        u = 1.0 + 0.0j
        c = 0.0 + 0.0j
        for t in range(P):
            c += w[t] * u
            u *= step
        c /= P
        total += (np.conj(c) * c).real
    return total
