"""Complex LLL reduction over the Gaussian integers.

Works on bases of Z[i]-lattices given as complex column matrices.  Size
reduction rounds the Gram-Schmidt coefficients to the nearest Gaussian
integer (so |Re μ| ≤ 1/2 and |Im μ| ≤ 1/2 after reduction) and the Lovász
condition uses a complex parameter δ ∈ (1/2, 1].  The returned transform T
is accumulated exactly over Z[i] and is unimodular: B_reduced = B·T with
det T ∈ {±1, ±i}.
"""

from __future__ import annotations

import numpy as np

from .exact_order import GAUSS_ONE, GAUSS_ZERO, GaussInt, GaussianMatrix

DEFAULT_DELTA = 0.99
MAX_ROUNDS = 10_000


class RankDeficientError(ValueError):
    """Input basis is (numerically) rank deficient."""


def _round_gauss(z: complex) -> complex:
    return complex(np.floor(z.real + 0.5), np.floor(z.imag + 0.5))


def _gram_schmidt(b):
    n = b.shape[1]
    bstar = b.astype(complex).copy()
    mu = np.zeros((n, n), dtype=complex)
    norms = np.zeros(n)
    scale = float(np.max(np.sum(np.abs(b) ** 2, axis=0)))
    for k in range(n):
        v = b[:, k].copy()
        for j in range(k):
            mu[k, j] = np.vdot(bstar[:, j], b[:, k]) / norms[j]
            v -= mu[k, j] * bstar[:, j]
        bstar[:, k] = v
        norms[k] = float(np.real(np.vdot(v, v)))
        if norms[k] <= 1e-24 * scale:
            raise RankDeficientError(f"Gram-Schmidt norm collapsed at column {k}")
    return bstar, mu, norms


def lll_reduce(b, delta: float = DEFAULT_DELTA):
    """Reduce the columns of b; returns (b_reduced, T) with b_reduced = b·T.

    Requires 1/2 < delta ≤ 1 and a full-column-rank basis.
    """
    if not 0.5 < delta <= 1.0:
        raise ValueError("delta must lie in (1/2, 1]")
    b = np.array(b, dtype=complex)
    n = b.shape[1]
    t_cols = [[GAUSS_ONE if i == j else GAUSS_ZERO for i in range(n)]
              for j in range(n)]

    _, mu, norms = _gram_schmidt(b)
    k = 1
    rounds = 0
    while k < n:
        rounds += 1
        if rounds > MAX_ROUNDS:
            raise RuntimeError("LLL failed to converge")
        for j in range(k - 1, -1, -1):
            q = _round_gauss(mu[k, j])
            if q != 0:
                b[:, k] -= q * b[:, j]
                qg = GaussInt(int(q.real), int(q.imag))
                t_cols[k] = [t_cols[k][i] - qg * t_cols[j][i] for i in range(n)]
                mu[k, :j] -= q * mu[j, :j]
                mu[k, j] -= q
        if norms[k] >= (delta - abs(mu[k, k - 1]) ** 2) * norms[k - 1]:
            k += 1
        else:
            b[:, [k - 1, k]] = b[:, [k, k - 1]]
            t_cols[k - 1], t_cols[k] = t_cols[k], t_cols[k - 1]
            _, mu, norms = _gram_schmidt(b)
            k = max(k - 1, 1)
    t = GaussianMatrix([[t_cols[j][i] for j in range(n)] for i in range(n)])
    return b, t
