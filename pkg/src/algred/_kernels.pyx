# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-frame kernels: tile walk, detectors, LLL, exhaustive ML.

Semantics mirror algred._reference (same tie rules, same half-up rounding);
see that module for the readable version.
"""

import numpy as np

cimport cython
from libc.math cimport floor, sqrt, INFINITY

cdef extern from "complex.h" nogil:
    double complex csqrt(double complex)

ctypedef double complex cplx

BACKEND_NAME = "compiled"

DEF TIE_TOL = 1e-12

cdef int LLL_MAX_ROUNDS = 10000


cdef inline double mag2(cplx z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline cplx conjc(cplx z) noexcept nogil:
    return z.real - 1j * z.imag


cdef inline cplx round_gauss(cplx z) noexcept nogil:
    return floor(z.real + 0.5) + 1j * floor(z.imag + 0.5)


cdef inline cplx coset_round(cplx v, cplx o) noexcept nogil:
    cdef cplx t = (v - o) / 2.0
    return o + 2.0 * round_gauss(t)


cdef inline cplx clamp_sym(cplx v, double level) noexcept nogil:
    cdef double re = 2.0 * floor((v.real - 1.0) / 2.0 + 0.5) + 1.0
    cdef double im = 2.0 * floor((v.imag - 1.0) / 2.0 + 0.5) + 1.0
    if re > level: re = level
    if re < -level: re = -level
    if im > level: im = level
    if im < -level: im = -level
    return re + 1j * im


cdef inline void m2mul(cplx a[2][2], cplx b[2][2], cplx o[2][2]) noexcept nogil:
    o[0][0] = a[0][0] * b[0][0] + a[0][1] * b[1][0]
    o[0][1] = a[0][0] * b[0][1] + a[0][1] * b[1][1]
    o[1][0] = a[1][0] * b[0][0] + a[1][1] * b[1][0]
    o[1][1] = a[1][0] * b[0][1] + a[1][1] * b[1][1]


cdef inline void m4mul(cplx a[4][4], cplx b[4][4], cplx o[4][4]) noexcept nogil:
    cdef int i, j, k
    cdef cplx acc
    for i in range(4):
        for j in range(4):
            acc = 0
            for k in range(4):
                acc = acc + a[i][k] * b[k][j]
            o[i][j] = acc


cdef inline void m4copy(cplx a[4][4], cplx o[4][4]) noexcept nogil:
    cdef int i, j
    for i in range(4):
        for j in range(4):
            o[i][j] = a[i][j]


cdef inline void eye2(cplx o[2][2]) noexcept nogil:
    o[0][0] = 1; o[0][1] = 0; o[1][0] = 0; o[1][1] = 1


cdef inline void eye4(cplx o[4][4]) noexcept nogil:
    cdef int i, j
    for i in range(4):
        for j in range(4):
            o[i][j] = 1 if i == j else 0


cdef int walk(cplx h1[2][2], cplx[:, :, ::1] gm, double[:, ::1] gi,
              cplx[:, :, ::1] gt, cplx[:, :, ::1] gti, int max_steps,
              cplx ubar[2][2], cplx tub[4][4], cplx tubi[4][4]) noexcept nogil:
    """Greedy tile walk; fills ū, T_ū, T_ū^{-1}; returns steps or -1."""
    cdef cplx h[2][2]
    cdef cplx gen[2][2]
    cdef cplx tmp2[2][2]
    cdef cplx tg[4][4]
    cdef cplx tmp4[4][4]
    cdef cplx ga, gb, gc, gd, z
    cdef double cc, px, py, pr, d0, dmin, d, dx, dy, dr
    cdef double dloc[16]
    cdef int steps = 0, i, i0, r, c
    h[0][0] = h1[0][0]; h[0][1] = h1[0][1]
    h[1][0] = h1[1][0]; h[1][1] = h1[1][1]
    eye2(ubar)
    eye4(tub)
    eye4(tubi)
    while steps < max_steps:
        steps += 1
        ga = h[1][1]; gb = -h[0][1]; gc = -h[1][0]; gd = h[0][0]
        cc = mag2(gc) + mag2(gd)
        z = (gb * conjc(gd) + ga * conjc(gc)) / cc
        px = z.real; py = z.imag; pr = 1.0 / cc
        d0 = 1.0 + (px * px + py * py + (pr - 1.0) * (pr - 1.0)) / (2.0 * pr)
        dmin = d0
        for i in range(16):
            dx = px - gi[i, 0]; dy = py - gi[i, 1]; dr = pr - gi[i, 2]
            d = 1.0 + (dx * dx + dy * dy + dr * dr) / (2.0 * pr * gi[i, 2])
            dloc[i] = d
            if d < dmin:
                dmin = d
        if d0 <= dmin * (1.0 + TIE_TOL):
            return steps
        i0 = 0
        for i in range(16):
            if dloc[i] <= dmin * (1.0 + TIE_TOL):
                i0 = i
                break
        for r in range(2):
            for c in range(2):
                gen[r][c] = gm[i0, r, c]
        m2mul(h, gen, tmp2); h[0][0] = tmp2[0][0]; h[0][1] = tmp2[0][1]
        h[1][0] = tmp2[1][0]; h[1][1] = tmp2[1][1]
        m2mul(ubar, gen, tmp2); ubar[0][0] = tmp2[0][0]; ubar[0][1] = tmp2[0][1]
        ubar[1][0] = tmp2[1][0]; ubar[1][1] = tmp2[1][1]
        for r in range(4):
            for c in range(4):
                tg[r][c] = gt[i0, r, c]
        m4mul(tub, tg, tmp4); m4copy(tmp4, tub)
        for r in range(4):
            for c in range(4):
                tg[r][c] = gti[i0, r, c]
        m4mul(tg, tubi, tmp4); m4copy(tmp4, tubi)
    return -1


def reduce_batch(h1_in, gmats, gimgs, g_t, g_tinv, int max_steps):
    """Batch tile walk; returns (steps, ubar, t_ubar, t_ubar_inv)."""
    cdef cplx[:, :, ::1] h1 = np.ascontiguousarray(h1_in, dtype=np.complex128)
    cdef cplx[:, :, ::1] gm = np.ascontiguousarray(gmats, dtype=np.complex128)
    cdef double[:, ::1] gi = np.ascontiguousarray(gimgs, dtype=np.float64)
    cdef cplx[:, :, ::1] gt = np.ascontiguousarray(g_t, dtype=np.complex128)
    cdef cplx[:, :, ::1] gti = np.ascontiguousarray(g_tinv, dtype=np.complex128)
    cdef Py_ssize_t n = h1.shape[0]
    steps_arr = np.zeros(n, dtype=np.int32)
    ubar_arr = np.empty((n, 2, 2), dtype=np.complex128)
    tub_arr = np.empty((n, 4, 4), dtype=np.complex128)
    tubi_arr = np.empty((n, 4, 4), dtype=np.complex128)
    cdef int[::1] steps = steps_arr
    cdef cplx[:, :, ::1] ubar_v = ubar_arr
    cdef cplx[:, :, ::1] tub_v = tub_arr
    cdef cplx[:, :, ::1] tubi_v = tubi_arr
    cdef cplx h[2][2]
    cdef cplx ubar[2][2]
    cdef cplx tub[4][4]
    cdef cplx tubi[4][4]
    cdef Py_ssize_t f
    cdef int st, r, c
    cdef bint overflow = False
    with nogil:
        for f in range(n):
            h[0][0] = h1[f, 0, 0]; h[0][1] = h1[f, 0, 1]
            h[1][0] = h1[f, 1, 0]; h[1][1] = h1[f, 1, 1]
            st = walk(h, gm, gi, gt, gti, max_steps, ubar, tub, tubi)
            if st < 0:
                overflow = True
                break
            steps[f] = st
            for r in range(2):
                for c in range(2):
                    ubar_v[f, r, c] = ubar[r][c]
            for r in range(4):
                for c in range(4):
                    tub_v[f, r, c] = tub[r][c]
                    tubi_v[f, r, c] = tubi[r][c]
    if overflow:
        raise RuntimeError(f"tile walk exceeded {max_steps} steps")
    return steps_arr, ubar_arr, tub_arr, tubi_arr


cdef int gs4(cplx b[4][4], cplx mu[4][4], double norms[4]) noexcept nogil:
    """Gram-Schmidt over columns of b; returns -1 on rank collapse."""
    cdef cplx bs[4][4]
    cdef cplx v[4]
    cdef cplx acc
    cdef double scale = 0, colsq
    cdef int k, j, r
    for k in range(4):
        colsq = 0
        for r in range(4):
            colsq += mag2(b[r][k])
        if colsq > scale:
            scale = colsq
    for k in range(4):
        for r in range(4):
            v[r] = b[r][k]
        for j in range(k):
            acc = 0
            for r in range(4):
                acc = acc + conjc(bs[r][j]) * b[r][k]
            mu[k][j] = acc / norms[j]
            for r in range(4):
                v[r] = v[r] - mu[k][j] * bs[r][j]
        colsq = 0
        for r in range(4):
            bs[r][k] = v[r]
            colsq += mag2(v[r])
        norms[k] = colsq
        if colsq <= 1e-24 * scale:
            return -1
    return 0


cdef int lll4(cplx b[4][4], double delta, cplx t[4][4], cplx tinv[4][4]) noexcept nogil:
    """Complex LLL on the columns of b with exact (integer-valued) t, tinv."""
    cdef cplx mu[4][4]
    cdef double norms[4]
    cdef cplx q, tmp
    cdef int k = 1, j, r, rounds = 0
    eye4(t)
    eye4(tinv)
    if gs4(b, mu, norms) < 0:
        return -1
    while k < 4:
        rounds += 1
        if rounds > LLL_MAX_ROUNDS:
            return -2
        for j in range(k - 1, -1, -1):
            q = round_gauss(mu[k][j])
            if q != 0:
                for r in range(4):
                    b[r][k] = b[r][k] - q * b[r][j]
                    t[r][k] = t[r][k] - q * t[r][j]
                    # inverse column op = row op on tinv
                    tinv[j][r] = tinv[j][r] + q * tinv[k][r]
                for r in range(j):
                    mu[k][r] = mu[k][r] - q * mu[j][r]
                mu[k][j] = mu[k][j] - q
        if norms[k] >= (delta - mag2(mu[k][k - 1])) * norms[k - 1]:
            k += 1
        else:
            for r in range(4):
                tmp = b[r][k - 1]; b[r][k - 1] = b[r][k]; b[r][k] = tmp
                tmp = t[r][k - 1]; t[r][k - 1] = t[r][k]; t[r][k] = tmp
                tmp = tinv[k - 1][r]; tinv[k - 1][r] = tinv[k][r]; tinv[k][r] = tmp
            if gs4(b, mu, norms) < 0:
                return -1
            k = k - 1 if k > 1 else 1
    return 0


cdef void qr4(cplx g[4][4], cplx qmat[4][4], cplx rmat[4][4]) noexcept nogil:
    """Modified Gram-Schmidt QR of a well-conditioned 4×4 matrix."""
    cdef cplx v[4]
    cdef cplx acc
    cdef double nrm
    cdef int k, j, r
    for k in range(4):
        for r in range(4):
            v[r] = g[r][k]
            rmat[r][k] = 0
        for j in range(k):
            acc = 0
            for r in range(4):
                acc = acc + conjc(qmat[r][j]) * v[r]
            rmat[j][k] = acc
            for r in range(4):
                v[r] = v[r] - acc * qmat[r][j]
        nrm = 0
        for r in range(4):
            nrm += mag2(v[r])
        nrm = sqrt(nrm)
        rmat[k][k] = nrm
        for r in range(4):
            qmat[r][k] = v[r] / nrm


cdef void dfe4(cplx g[4][4], cplx y[4], cplx offs[4], cplx z[4]) noexcept nogil:
    cdef cplx qmat[4][4]
    cdef cplx rmat[4][4]
    cdef cplx yt[4]
    cdef cplx v
    cdef int k, j, r
    qr4(g, qmat, rmat)
    for k in range(4):
        yt[k] = 0
        for r in range(4):
            yt[k] = yt[k] + conjc(qmat[r][k]) * y[r]
    for k in range(3, -1, -1):
        v = yt[k]
        for j in range(k + 1, 4):
            v = v - rmat[k][j] * z[j]
        v = v / rmat[k][k]
        z[k] = coset_round(v, offs[k])


cdef int solve4(cplx a_in[4][4], cplx b_in[4], cplx x[4]) noexcept nogil:
    """Gaussian elimination with partial pivoting; returns -1 if singular."""
    cdef cplx a[4][4]
    cdef cplx b[4]
    cdef cplx f, tmp
    cdef double best, m
    cdef int col, r, piv, j
    for r in range(4):
        b[r] = b_in[r]
        for j in range(4):
            a[r][j] = a_in[r][j]
    for col in range(4):
        piv = col
        best = mag2(a[col][col])
        for r in range(col + 1, 4):
            m = mag2(a[r][col])
            if m > best:
                best = m
                piv = r
        if best == 0.0:
            return -1
        if piv != col:
            for j in range(4):
                tmp = a[col][j]; a[col][j] = a[piv][j]; a[piv][j] = tmp
            tmp = b[col]; b[col] = b[piv]; b[piv] = tmp
        for r in range(col + 1, 4):
            f = a[r][col] / a[col][col]
            if f != 0:
                for j in range(col, 4):
                    a[r][j] = a[r][j] - f * a[col][j]
                b[r] = b[r] - f * b[col]
    for col in range(3, -1, -1):
        tmp = b[col]
        for j in range(col + 1, 4):
            tmp = tmp - a[col][j] * x[j]
        x[col] = tmp / a[col][col]
    return 0


cdef void left_mult(cplx a[2][2], cplx[:, ::1] phi, cplx g[4][4]) noexcept nogil:
    cdef int i, j
    for j in range(4):
        for i in range(2):
            g[i][j] = a[i][0] * phi[0, j] + a[i][1] * phi[1, j]
            g[2 + i][j] = a[i][0] * phi[2, j] + a[i][1] * phi[3, j]


def run_frames(int scheme, bint mmse, double n0, sym_idx, h_in, w_in, c):
    """Decode a batch of frames; mirrors algred._reference.run_frames."""
    cdef long long[:, ::1] sym = np.ascontiguousarray(sym_idx, dtype=np.int64)
    cdef cplx[:, :, ::1] hh = np.ascontiguousarray(h_in, dtype=np.complex128)
    cdef cplx[:, :, ::1] ww = np.ascontiguousarray(w_in, dtype=np.complex128)
    cdef cplx[:, ::1] phi = np.ascontiguousarray(c.phi, dtype=np.complex128)
    cdef cplx[:, ::1] phi_h = np.ascontiguousarray(c.phi_h, dtype=np.complex128)
    cdef cplx[:, :, ::1] gm = np.ascontiguousarray(c.gmats, dtype=np.complex128)
    cdef double[:, ::1] gi = np.ascontiguousarray(c.gimgs, dtype=np.float64)
    cdef cplx[:, :, ::1] gt = np.ascontiguousarray(c.g_t, dtype=np.complex128)
    cdef cplx[:, :, ::1] gti = np.ascontiguousarray(c.g_tinv, dtype=np.complex128)
    cdef cplx[::1] points = np.ascontiguousarray(c.points, dtype=np.complex128)
    cdef cplx[:, ::1] cand = np.ascontiguousarray(c.cand, dtype=np.complex128)
    cdef double level = c.level
    cdef double energy = c.energy
    cdef double delta = c.lll_delta
    cdef int max_steps = c.max_steps
    cdef int mm = c.m
    cdef Py_ssize_t n = hh.shape[0]
    cdef Py_ssize_t ncand = cand.shape[0]

    err_arr = np.zeros(n, dtype=np.uint8)
    steps_arr = np.zeros(n, dtype=np.int32)
    cdef unsigned char[::1] err = err_arr
    cdef int[::1] steps = steps_arr

    cdef cplx h[2][2]
    cdef cplx chan[2][2]
    cdef cplx e2[2][2]
    cdef cplx adj[2][2]
    cdef cplx ubar[2][2]
    cdef cplx g4[4][4]
    cdef cplx tub[4][4]
    cdef cplx tubi[4][4]
    cdef cplx s[4]
    cdef cplx x[4]
    cdef cplx y[4]
    cdef cplx y1[4]
    cdef cplx v4[4]
    cdef cplx yt[4]
    cdef cplx offs[4]
    cdef cplx z[4]
    cdef cplx shat[4]
    cdef cplx det, sq, g12c, r12, acc
    cdef cplx f0[2]
    cdef cplx f1[2]
    cdef cplx yf[4]
    cdef double g11, g22, r11, r22, snr_inv, best, dtot
    cdef Py_ssize_t f, ci
    cdef int i, j, st
    cdef long long best_idx, true_idx
    cdef bint fail = False

    snr_inv = n0 / energy
    with nogil:
        for f in range(n):
            if fail:
                break
            for i in range(4):
                s[i] = points[sym[f, i]]
            h[0][0] = hh[f, 0, 0]; h[0][1] = hh[f, 0, 1]
            h[1][0] = hh[f, 1, 0]; h[1][1] = hh[f, 1, 1]
            for i in range(4):
                acc = 0
                for j in range(4):
                    acc = acc + phi[i, j] * s[j]
                x[i] = acc
            y[0] = h[0][0] * x[0] + h[0][1] * x[1] + sqrt(n0) * ww[f, 0, 0]
            y[1] = h[1][0] * x[0] + h[1][1] * x[1] + sqrt(n0) * ww[f, 1, 0]
            y[2] = h[0][0] * x[2] + h[0][1] * x[3] + sqrt(n0) * ww[f, 0, 1]
            y[3] = h[1][0] * x[2] + h[1][1] * x[3] + sqrt(n0) * ww[f, 1, 1]

            if mmse:
                g11 = mag2(h[0][0]) + mag2(h[1][0]) + snr_inv
                g22 = mag2(h[0][1]) + mag2(h[1][1]) + snr_inv
                g12c = conjc(h[0][0]) * h[0][1] + conjc(h[1][0]) * h[1][1]
                r11 = sqrt(g11)
                r12 = g12c / r11
                r22 = sqrt(g22 - mag2(r12))
                chan[0][0] = r11; chan[0][1] = r12
                chan[1][0] = 0;   chan[1][1] = r22
                f0[0] = conjc(h[0][0]) / r11
                f0[1] = conjc(h[1][0]) / r11
                f1[0] = (conjc(h[0][1]) - conjc(r12) * f0[0]) / r22
                f1[1] = (conjc(h[1][1]) - conjc(r12) * f0[1]) / r22
                yf[0] = f0[0] * y[0] + f0[1] * y[1]
                yf[1] = f1[0] * y[0] + f1[1] * y[1]
                yf[2] = f0[0] * y[2] + f0[1] * y[3]
                yf[3] = f1[0] * y[2] + f1[1] * y[3]
                for i in range(4):
                    y[i] = yf[i]
            else:
                chan[0][0] = h[0][0]; chan[0][1] = h[0][1]
                chan[1][0] = h[1][0]; chan[1][1] = h[1][1]

            det = chan[0][0] * chan[1][1] - chan[0][1] * chan[1][0]
            sq = csqrt(det)
            chan[0][0] = chan[0][0] / sq; chan[0][1] = chan[0][1] / sq
            chan[1][0] = chan[1][0] / sq; chan[1][1] = chan[1][1] / sq
            for i in range(4):
                y1[i] = y[i] / sq

            if scheme == 0 or scheme == 1:  # AR-ZF / AR-ZFDFE
                st = walk(chan, gm, gi, gt, gti, max_steps, ubar, tub, tubi)
                if st < 0:
                    fail = True
                    break
                steps[f] = st
                m2mul(chan, ubar, e2)
                for i in range(4):
                    acc = 0
                    for j in range(4):
                        acc = acc + tubi[i][j]
                    offs[i] = acc * (1 + 1j)
                if scheme == 0:
                    adj[0][0] = e2[1][1]; adj[0][1] = -e2[0][1]
                    adj[1][0] = -e2[1][0]; adj[1][1] = e2[0][0]
                    v4[0] = adj[0][0] * y1[0] + adj[0][1] * y1[1]
                    v4[1] = adj[1][0] * y1[0] + adj[1][1] * y1[1]
                    v4[2] = adj[0][0] * y1[2] + adj[0][1] * y1[3]
                    v4[3] = adj[1][0] * y1[2] + adj[1][1] * y1[3]
                    for i in range(4):
                        acc = 0
                        for j in range(4):
                            acc = acc + phi_h[i, j] * v4[j]
                        yt[i] = acc
                    for i in range(4):
                        z[i] = coset_round(yt[i], offs[i])
                else:
                    left_mult(e2, phi, g4)
                    dfe4(g4, y1, offs, z)
                for i in range(4):
                    acc = 0
                    for j in range(4):
                        acc = acc + tub[i][j] * z[j]
                    shat[i] = clamp_sym(acc, level)
                for i in range(4):
                    if shat[i] != s[i]:
                        err[f] = 1
                        break
            elif scheme == 2 or scheme == 3:  # LLL-ZF / LLL-ZFDFE
                left_mult(chan, phi, g4)
                if lll4(g4, delta, tub, tubi) < 0:
                    fail = True
                    break
                for i in range(4):
                    acc = 0
                    for j in range(4):
                        acc = acc + tubi[i][j]
                    offs[i] = acc * (1 + 1j)
                if scheme == 2:
                    if solve4(g4, y1, v4) < 0:
                        fail = True
                        break
                    for i in range(4):
                        z[i] = coset_round(v4[i], offs[i])
                else:
                    dfe4(g4, y1, offs, z)
                for i in range(4):
                    acc = 0
                    for j in range(4):
                        acc = acc + tub[i][j] * z[j]
                    shat[i] = clamp_sym(acc, level)
                for i in range(4):
                    if shat[i] != s[i]:
                        err[f] = 1
                        break
            elif scheme == 4:  # exhaustive ML over the candidate table
                left_mult(chan, phi, g4)
                true_idx = ((sym[f, 0] * mm + sym[f, 1]) * mm + sym[f, 2]) * mm \
                    + sym[f, 3]
                best = INFINITY
                best_idx = 0
                for ci in range(ncand):
                    dtot = 0
                    for i in range(4):
                        acc = y1[i]
                        for j in range(4):
                            acc = acc - g4[i][j] * cand[ci, j]
                        dtot += mag2(acc)
                        if dtot >= best:
                            break
                    if dtot < best:
                        best = dtot
                        best_idx = ci
                if best_idx != true_idx:
                    err[f] = 1
            else:
                fail = True
                break
    if fail:
        raise RuntimeError("kernel failure: walk overflow, rank-deficient "
                           "basis, or unknown scheme")
    return err_arr, steps_arr
