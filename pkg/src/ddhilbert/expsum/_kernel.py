"""Numba kernels for streaming exponential sums.

A phase polynomial G(u1, u2) is advanced by forward differences held as
128-bit unsigned integers (two uint64 limbs, wrap-around = reduction mod 1)
plus an optional residue modulo an odd q. Each stripe of rows owns a
private copy of the 2-D difference table at its first row; all
accumulation inside a stripe is compensated (Neumaier).
"""

import numba as nb
import numpy as np

_ZERO = np.uint64(0)
_ONE = np.uint64(1)
_SHIFT = np.uint64(11)
_INV53 = 2.0 ** -53
_TWO_PI = 2.0 * np.pi


@nb.njit(inline="always")
def _add128(hi, lo, i, j, k):
    # (hi, lo)[i] += (hi, lo)[j] on the trailing axis of 2-D arrays, row k
    s = lo[k, i] + lo[k, j]
    c = _ONE if s < lo[k, i] else _ZERO
    hi[k, i] = hi[k, i] + hi[k, j] + c
    lo[k, i] = s


@nb.njit(inline="always")
def _frac(hi, r, q):
    f = np.float64(hi >> _SHIFT) * _INV53
    if q > 1:
        f += r / q
        if f >= 1.0:
            f -= 1.0
    if f >= 0.5:
        f -= 1.0
    return f


@nb.njit(nogil=True, cache=True)
def stripe_sums(s_begin, s_end, st_hi, st_lo, st_r, weights, q,
                a1, b1, half1, a2, b2, half2, kernel, row0, nrows, out):
    """Fill out[s] = (re, im, sum of |weights|) for stripes s_begin..s_end-1.

    Each term is sum_g weights[g] e(-G_g(u1, u2)) times the point weight:
    1/(u1 u2) if kernel else 1, halved on flagged box edges.
    """
    ng = st_hi.shape[1]
    D1 = st_hi.shape[2]
    D2 = st_hi.shape[3]
    S_hi = np.empty((ng * D1, D2), np.uint64)
    S_lo = np.empty((ng * D1, D2), np.uint64)
    S_r = np.empty((ng * D1, D2), np.int64)
    w_hi = np.empty((ng, D1), np.uint64)
    w_lo = np.empty((ng, D1), np.uint64)
    w_r = np.empty((ng, D1), np.int64)
    wabs = 0.0
    for g in range(ng):
        wabs += abs(weights[g])
    for s in range(s_begin, s_end):
        for g in range(ng):
            for i in range(D1):
                for l in range(D2):
                    S_hi[g * D1 + i, l] = st_hi[s, g, i, l]
                    S_lo[g * D1 + i, l] = st_lo[s, g, i, l]
                    S_r[g * D1 + i, l] = st_r[s, g, i, l]
        t_re = 0.0
        c_re = 0.0
        t_im = 0.0
        c_im = 0.0
        t_abs = 0.0
        for row in range(nrows[s]):
            u2 = row0[s] + row
            rw = 1.0
            if half2 and (u2 == a2 or u2 == b2):
                rw = 0.5
            if kernel:
                rw = rw / u2
            for g in range(ng):
                for i in range(D1):
                    w_hi[g, i] = S_hi[g * D1 + i, 0]
                    w_lo[g, i] = S_lo[g * D1 + i, 0]
                    w_r[g, i] = S_r[g * D1 + i, 0]
            r_re = 0.0
            rc_re = 0.0
            r_im = 0.0
            rc_im = 0.0
            r_abs = 0.0
            for u1 in range(a1, b1 + 1):
                cw = 1.0
                if half1 and (u1 == a1 or u1 == b1):
                    cw = 0.5
                if kernel:
                    cw = cw / u1
                x_re = 0.0
                x_im = 0.0
                for g in range(ng):
                    ang = _TWO_PI * _frac(w_hi[g, 0], w_r[g, 0], q)
                    x_re += weights[g] * np.cos(ang)
                    x_im -= weights[g] * np.sin(ang)
                    for i in range(D1 - 1):
                        _add128(w_hi, w_lo, i, i + 1, g)
                        if q > 1:
                            r = w_r[g, i] + w_r[g, i + 1]
                            if r >= q:
                                r -= q
                            w_r[g, i] = r
                x_re *= cw
                x_im *= cw
                t = r_re + x_re
                if abs(r_re) >= abs(x_re):
                    rc_re += (r_re - t) + x_re
                else:
                    rc_re += (x_re - t) + r_re
                r_re = t
                t = r_im + x_im
                if abs(r_im) >= abs(x_im):
                    rc_im += (r_im - t) + x_im
                else:
                    rc_im += (x_im - t) + r_im
                r_im = t
                r_abs += cw
            x_re = (r_re + rc_re) * rw
            x_im = (r_im + rc_im) * rw
            t = t_re + x_re
            if abs(t_re) >= abs(x_re):
                c_re += (t_re - t) + x_re
            else:
                c_re += (x_re - t) + t_re
            t_re = t
            t = t_im + x_im
            if abs(t_im) >= abs(x_im):
                c_im += (t_im - t) + x_im
            else:
                c_im += (x_im - t) + t_im
            t_im = t
            t_abs += r_abs * rw
            # advance the 2-D table one row
            for k in range(ng * D1):
                for l in range(D2 - 1):
                    _add128(S_hi, S_lo, l, l + 1, k)
                    if q > 1:
                        r = S_r[k, l] + S_r[k, l + 1]
                        if r >= q:
                            r -= q
                        S_r[k, l] = r
        out[s, 0] = t_re + c_re
        out[s, 1] = t_im + c_im
        out[s, 2] = t_abs * wabs


@nb.njit(nogil=True, cache=True)
def box_terms(st_hi, st_lo, st_r, q, n1, n2, out):
    """out[k, l] = e(-G(a1 + l, a2 + k)) for a single phase polynomial."""
    D1 = st_hi.shape[0]
    D2 = st_hi.shape[1]
    S_hi = st_hi.copy()
    S_lo = st_lo.copy()
    S_r = st_r.copy()
    w_hi = np.empty((1, D1), np.uint64)
    w_lo = np.empty((1, D1), np.uint64)
    w_r = np.empty(D1, np.int64)
    for k in range(n2):
        for i in range(D1):
            w_hi[0, i] = S_hi[i, 0]
            w_lo[0, i] = S_lo[i, 0]
            w_r[i] = S_r[i, 0]
        for l in range(n1):
            ang = _TWO_PI * _frac(w_hi[0, 0], w_r[0], q)
            out[k, l] = complex(np.cos(ang), -np.sin(ang))
            for i in range(D1 - 1):
                _add128(w_hi, w_lo, i, i + 1, 0)
                if q > 1:
                    r = w_r[i] + w_r[i + 1]
                    if r >= q:
                        r -= q
                    w_r[i] = r
        for i in range(D1):
            for l in range(D2 - 1):
                _add128(S_hi, S_lo, l, l + 1, i)
                if q > 1:
                    r = S_r[i, l] + S_r[i, l + 1]
                    if r >= q:
                        r -= q
                    S_r[i, l] = r
