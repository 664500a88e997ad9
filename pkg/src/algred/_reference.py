"""Pure numpy implementation of the simulation kernels.

This is the fallback backend when the compiled extension is unavailable; it
implements exactly the same per-frame pipeline as `_kernels.pyx` (same tie
rules, same half-up rounding), vectorized over frames where possible.  The
LLL-based schemes fall back to the per-frame exact implementation in
`algred.lll`, so they are markedly slower here.
"""

from __future__ import annotations

import numpy as np

from .lll import lll_reduce

BACKEND_NAME = "python"

TIE_TOL = 1e-12

AR_ZF, AR_ZFDFE, LLL_ZF, LLL_ZFDFE, ML = range(5)
_AR = (AR_ZF, AR_ZFDFE)
_LLL = (LLL_ZF, LLL_ZFDFE)


class NonTermination(RuntimeError):
    pass


def reduce_batch(h1, gmats, gimgs, g_t, g_tinv, max_steps):
    """Tile walk for a batch of determinant-one channels.

    Returns (steps, ubar, t_ubar, t_ubar_inv): the accumulated word matrix
    ū (so the chosen unit is ū^{-1} and E = h1·ū), its lattice transform
    T_ū = T_û^{-1}, and T_û.
    """
    h1 = np.ascontiguousarray(h1, dtype=complex)
    n = h1.shape[0]
    h = h1.copy()
    ubar = np.broadcast_to(np.eye(2, dtype=complex), (n, 2, 2)).copy()
    t_ub = np.broadcast_to(np.eye(4, dtype=complex), (n, 4, 4)).copy()
    t_ub_inv = t_ub.copy()
    steps = np.zeros(n, dtype=np.int32)
    active = np.arange(n)
    while active.size:
        if steps[active].max(initial=0) >= max_steps:
            raise NonTermination(f"tile walk exceeded {max_steps} steps")
        steps[active] += 1
        ha = h[active]
        ga = ha[:, 1, 1]
        gb = -ha[:, 0, 1]
        gc = -ha[:, 1, 0]
        gd = ha[:, 0, 0]
        cc = np.abs(gc) ** 2 + np.abs(gd) ** 2
        z = (gb * np.conj(gd) + ga * np.conj(gc)) / cc
        px, py, pr = z.real, z.imag, 1.0 / cc
        d0 = 1.0 + (px * px + py * py + (pr - 1.0) ** 2) / (2.0 * pr)
        dd = 1.0 + ((px[:, None] - gimgs[None, :, 0]) ** 2
                    + (py[:, None] - gimgs[None, :, 1]) ** 2
                    + (pr[:, None] - gimgs[None, :, 2]) ** 2) / (
            2.0 * pr[:, None] * gimgs[None, :, 2])
        dmin = np.minimum(d0, dd.min(axis=1))
        move = d0 > dmin * (1.0 + TIE_TOL)
        if move.any():
            rows = active[move]
            i0 = np.argmax(dd[move] <= (dmin[move] * (1.0 + TIE_TOL))[:, None],
                           axis=1)
            h[rows] = np.einsum("nij,njk->nik", h[rows], gmats[i0])
            ubar[rows] = np.einsum("nij,njk->nik", ubar[rows], gmats[i0])
            t_ub[rows] = np.einsum("nij,njk->nik", t_ub[rows], g_t[i0])
            t_ub_inv[rows] = np.einsum("nij,njk->nik", g_tinv[i0], t_ub_inv[rows])
        active = active[move]
    return steps, ubar, t_ub, t_ub_inv


def _coset_round(v, offset):
    t = (v - offset) / 2.0
    return offset + 2.0 * (np.floor(t.real + 0.5) + 1j * np.floor(t.imag + 0.5))


def _clamp(v, level):
    re = np.clip(2.0 * np.floor((v.real - 1.0) / 2.0 + 0.5) + 1.0, -level, level)
    im = np.clip(2.0 * np.floor((v.imag - 1.0) / 2.0 + 0.5) + 1.0, -level, level)
    return re + 1j * im


def _block_apply(a, v):
    """blockdiag(a, a) @ v for batches: a (n,2,2), v (n,4)."""
    out = np.empty_like(v)
    out[:, :2] = np.einsum("nij,nj->ni", a, v[:, :2])
    out[:, 2:] = np.einsum("nij,nj->ni", a, v[:, 2:])
    return out


def _adj2(e):
    out = np.empty_like(e)
    out[:, 0, 0] = e[:, 1, 1]
    out[:, 0, 1] = -e[:, 0, 1]
    out[:, 1, 0] = -e[:, 1, 0]
    out[:, 1, 1] = e[:, 0, 0]
    return out


def _left_mult(a, phi):
    """blockdiag(a, a) @ phi for batches: result (n,4,4)."""
    n = a.shape[0]
    g = np.empty((n, 4, 4), dtype=complex)
    g[:, :2, :] = np.einsum("nij,jk->nik", a, phi[:2, :])
    g[:, 2:, :] = np.einsum("nij,jk->nik", a, phi[2:, :])
    return g


def _dfe(g, y1, offsets):
    """Decision feedback on the QR of g: rounds layer 4 down to layer 1."""
    q, r = np.linalg.qr(g)
    yt = np.einsum("nji,nj->ni", np.conj(q), y1)
    z = np.zeros_like(yt)
    for k in range(3, -1, -1):
        v = yt[:, k].copy()
        for j in range(k + 1, 4):
            v -= r[:, k, j] * z[:, j]
        v /= r[:, k, k]
        z[:, k] = _coset_round(v, offsets[:, k])
    return z


def run_frames(scheme, mmse, n0, sym_idx, h_in, w_in, c):
    """Decode a batch of frames; returns (error flags, walk step counts).

    sym_idx indexes the alphabet points; h_in and w_in carry CN(0,1)
    entries, the noise being scaled by sqrt(n0) here.  `c` is a SimConsts.
    """
    n = h_in.shape[0]
    s = c.points[sym_idx]
    x = np.einsum("ij,nj->ni", c.phi, s)
    w = np.stack([w_in[:, 0, 0], w_in[:, 1, 0], w_in[:, 0, 1], w_in[:, 1, 1]],
                 axis=1)
    y = _block_apply(h_in, x) + np.sqrt(n0) * w

    if mmse:
        snr = c.energy / n0
        hh = np.conj(np.transpose(h_in, (0, 2, 1)))
        g11 = np.einsum("ni,ni->n", np.conj(h_in[:, :, 0]), h_in[:, :, 0]).real + 1.0 / snr
        g12 = np.einsum("ni,ni->n", np.conj(h_in[:, :, 0]), h_in[:, :, 1])
        g22 = np.einsum("ni,ni->n", np.conj(h_in[:, :, 1]), h_in[:, :, 1]).real + 1.0 / snr
        r11 = np.sqrt(g11)
        r12 = g12 / r11
        r22 = np.sqrt(g22 - np.abs(r12) ** 2)
        chan = np.zeros_like(h_in)
        chan[:, 0, 0] = r11
        chan[:, 0, 1] = r12
        chan[:, 1, 1] = r22
        # F = R^{-H} H^H by forward substitution on the lower factor R^H
        f = np.empty_like(h_in)
        f[:, 0, :] = hh[:, 0, :] / r11[:, None]
        f[:, 1, :] = (hh[:, 1, :] - np.conj(r12)[:, None] * f[:, 0, :]) / r22[:, None]
        y = _block_apply(f, y)
    else:
        chan = h_in

    det = chan[:, 0, 0] * chan[:, 1, 1] - chan[:, 0, 1] * chan[:, 1, 0]
    sq = np.sqrt(det)
    h1 = chan / sq[:, None, None]
    y1 = y / sq[:, None]

    steps = np.zeros(n, dtype=np.int32)
    if scheme in _AR:
        steps, ubar, t_ub, t_ub_inv = reduce_batch(
            h1, c.gmats, c.gimgs, c.g_t, c.g_tinv, c.max_steps)
        e = np.einsum("nij,njk->nik", h1, ubar)
        offsets = np.einsum("nij,j->ni", t_ub_inv, c.offset4)
        if scheme == AR_ZF:
            yt = np.einsum("ij,nj->ni", c.phi_h, _block_apply(_adj2(e), y1))
            z = _coset_round(yt, offsets)
        else:
            z = _dfe(_left_mult(e, c.phi), y1, offsets)
        shat = _clamp(np.einsum("nij,nj->ni", t_ub, z), c.level)
        err = np.any(shat != s, axis=1)
    elif scheme in _LLL:
        bmats = _left_mult(h1, c.phi)
        err = np.zeros(n, dtype=bool)
        for i in range(n):
            bred, t = lll_reduce(bmats[i], delta=c.lll_delta)
            tc = t.to_complex()
            tinv = t.inverse().to_complex()
            offs = tinv @ c.offset4
            if scheme == LLL_ZF:
                z = _coset_round(np.linalg.solve(bred, y1[i]), offs)
            else:
                z = _dfe(bred[None], y1[i][None], offs[None])[0]
            shat = _clamp(tc @ z, c.level)
            err[i] = bool(np.any(shat != s[i]))
    elif scheme == ML:
        g = _left_mult(h1, c.phi)
        true_idx = ((sym_idx[:, 0] * c.m + sym_idx[:, 1]) * c.m
                    + sym_idx[:, 2]) * c.m + sym_idx[:, 3]
        best = np.full(n, np.inf)
        best_idx = np.zeros(n, dtype=np.int64)
        cand = c.cand
        block = 512
        for k0 in range(0, cand.shape[0], block):
            cb = cand[k0:k0 + block]
            gs = np.einsum("nij,bj->nbi", g, cb)
            d = np.sum(np.abs(y1[:, None, :] - gs) ** 2, axis=2)
            bi = np.argmin(d, axis=1)
            bv = d[np.arange(n), bi]
            upd = bv < best
            best[upd] = bv[upd]
            best_idx[upd] = bi[upd] + k0
        err = best_idx != true_idx
    else:
        raise ValueError(f"unknown scheme id {scheme}")
    return np.asarray(err, dtype=np.uint8), steps
