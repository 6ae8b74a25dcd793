# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.  Same interface and results as ``_kernels_py``."""

import numpy as np

from libc.math cimport fabs

NUM_VARIANTS = 12


cdef inline double _min2(double a, double b) nogil:
    return a if a < b else b


cdef inline double _max2(double a, double b) nogil:
    return a if a > b else b


cdef inline double _min4(double a, double b, double c, double d) nogil:
    return _min2(_min2(a, b), _min2(c, d))


cdef inline double _max4(double a, double b, double c, double d) nogil:
    return _max2(_max2(a, b), _max2(c, d))


def bounds_batch(D, G, klo, khi, ksym, knorm, mlo, mhi, msym, mnorm):
    cdef const double[:, :] d_ = np.asarray(D, dtype=np.float64)
    cdef const double[:, :] g_ = np.asarray(G, dtype=np.float64)
    cdef const double[:, :] klo_ = np.asarray(klo, dtype=np.float64)
    cdef const double[:, :] khi_ = np.asarray(khi, dtype=np.float64)
    cdef const double[:, :] ksym_ = np.asarray(ksym, dtype=np.float64)
    cdef const double[:] kn_ = np.asarray(knorm, dtype=np.float64)
    cdef const double[:, :, :] mlo_ = np.asarray(mlo, dtype=np.float64)
    cdef const double[:, :, :] mhi_ = np.asarray(mhi, dtype=np.float64)
    cdef const double[:, :, :] msym_ = np.asarray(msym, dtype=np.float64)
    cdef const double[:] mn_ = np.asarray(mnorm, dtype=np.float64)
    cdef Py_ssize_t N = d_.shape[0], n = d_.shape[1]
    out = np.empty((N, NUM_VARIANTS), dtype=np.float64)
    cdef double[:, :] o = out
    cdef Py_ssize_t r, i, j
    cdef double di, dj, p, a, b, lin_lo, lin_hi, sym_lin, l1, first, q_lo, q_hi, q_sym, sq

    with nogil:
        for r in range(N):
            lin_lo = 0.0
            lin_hi = 0.0
            sym_lin = 0.0
            l1 = 0.0
            first = 0.0
            sq = 0.0
            q_lo = 0.0
            q_hi = 0.0
            q_sym = 0.0
            for i in range(n):
                di = d_[r, i]
                a = klo_[r, i] * di
                b = khi_[r, i] * di
                lin_lo += _min2(a, b)
                lin_hi += _max2(a, b)
                sym_lin += ksym_[r, i] * fabs(di)
                l1 += fabs(di)
                first += g_[r, i] * di
                sq += di * di
                for j in range(n):
                    dj = d_[r, j]
                    p = di * dj
                    a = mlo_[r, i, j] * p
                    b = mhi_[r, i, j] * p
                    q_lo += _min2(a, b)
                    q_hi += _max2(a, b)
                    q_sym += msym_[r, i, j] * fabs(p)
            o[r, 0] = lin_lo
            o[r, 1] = lin_hi
            o[r, 2] = -sym_lin
            o[r, 3] = sym_lin
            o[r, 4] = -kn_[r] * l1
            o[r, 5] = kn_[r] * l1
            o[r, 6] = first + 0.5 * q_lo
            o[r, 7] = first + 0.5 * q_hi
            o[r, 8] = first - 0.5 * q_sym
            o[r, 9] = first + 0.5 * q_sym
            o[r, 10] = first - 0.5 * mn_[r] * sq
            o[r, 11] = first + 0.5 * mn_[r] * sq
    return out


def enclose_linear(double f0, anchor, lower, upper, klo, khi):
    cdef const double[:] x0 = np.asarray(anchor, dtype=np.float64)
    cdef const double[:] lb = np.asarray(lower, dtype=np.float64)
    cdef const double[:] ub = np.asarray(upper, dtype=np.float64)
    cdef const double[:] kl = np.asarray(klo, dtype=np.float64)
    cdef const double[:] kh = np.asarray(khi, dtype=np.float64)
    cdef Py_ssize_t n = x0.shape[0], i
    witness = np.empty(n, dtype=np.float64)
    cdef double[:] w = witness
    cdef double lo = 0.0, hi = 0.0, dl, du, at_lo, at_hi
    for i in range(n):
        dl = lb[i] - x0[i]
        du = ub[i] - x0[i]
        at_lo = _min2(kl[i] * dl, kh[i] * dl)
        at_hi = _min2(kl[i] * du, kh[i] * du)
        lo += _min2(at_lo, at_hi)
        hi += _max4(kl[i] * dl, kh[i] * dl, kl[i] * du, kh[i] * du)
        w[i] = ub[i] if at_hi < at_lo else lb[i]
    return f0 + lo, f0 + hi, witness


cdef inline double _diag_term(double g, double c, double dl, double du, bint lowest,
                              double* arg) noexcept nogil:
    # extreme of g*t + c*t^2/2 over [dl, du]
    cdef double best = g * dl + 0.5 * c * dl * dl
    cdef double v, v_val, t = dl
    v = g * du + 0.5 * c * du * du
    if (v < best) if lowest else (v > best):
        best = v
        t = du
    if (c > 0.0 if lowest else c < 0.0):
        v = -g / c
        if dl < v < du:
            v_val = g * v + 0.5 * c * v * v
            if (v_val < best) if lowest else (v_val > best):
                best = v_val
                t = v
    arg[0] = t
    return best


def enclose_quadratic(double f0, grad, anchor, lower, upper, mlo, mhi):
    cdef const double[:] g = np.asarray(grad, dtype=np.float64)
    cdef const double[:] x0 = np.asarray(anchor, dtype=np.float64)
    cdef const double[:] lb = np.asarray(lower, dtype=np.float64)
    cdef const double[:] ub = np.asarray(upper, dtype=np.float64)
    cdef const double[:, :] ml = np.asarray(mlo, dtype=np.float64)
    cdef const double[:, :] mh = np.asarray(mhi, dtype=np.float64)
    cdef Py_ssize_t n = x0.shape[0], i, j
    witness = np.empty(n, dtype=np.float64)
    cdef double[:] w = witness
    cdef double d_lo = 0.0, d_hi = 0.0, q_lo = 0.0, q_hi = 0.0
    cdef double dli, dui, dlj, duj, p_lo, p_hi, a, b, c, d, t
    with nogil:
        for i in range(n):
            dli = lb[i] - x0[i]
            dui = ub[i] - x0[i]
            d_lo += _diag_term(g[i], ml[i, i], dli, dui, True, &t)
            w[i] = x0[i] + t
            d_hi += _diag_term(g[i], mh[i, i], dli, dui, False, &t)
            for j in range(n):
                if i == j:
                    continue
                dlj = lb[j] - x0[j]
                duj = ub[j] - x0[j]
                a = dli * dlj
                b = dli * duj
                c = dui * dlj
                d = dui * duj
                p_lo = _min4(a, b, c, d)
                p_hi = _max4(a, b, c, d)
                a = ml[i, j] * p_lo
                b = mh[i, j] * p_lo
                c = ml[i, j] * p_hi
                d = mh[i, j] * p_hi
                q_lo += _min4(a, b, c, d)
                q_hi += _max4(a, b, c, d)
    return f0 + d_lo + 0.5 * q_lo, f0 + d_hi + 0.5 * q_hi, witness
