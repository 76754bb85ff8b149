# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_kernels_py``; same loop order, same results."""
import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin
from libc.stdlib cimport malloc, free
from libc.stdint cimport uint64_t

cnp.import_array()


def cos_product(pw, xi):
    cdef const double[::1] p = np.ascontiguousarray(pw, dtype=np.float64)
    cdef const double[::1] x = np.ascontiguousarray(xi, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], depth = p.shape[0], i, k
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double acc, xv
    with nogil:
        for i in range(n):
            acc = 1.0
            xv = x[i]
            for k in range(depth):
                acc = acc * cos(p[k] * xv)
            o[i] = acc
    return out


def cos_product_dlambda(pw, dpw, xi):
    cdef const double[::1] p = np.ascontiguousarray(pw, dtype=np.float64)
    cdef const double[::1] dp = np.ascontiguousarray(dpw, dtype=np.float64)
    cdef const double[::1] x = np.ascontiguousarray(xi, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], depth = p.shape[0], i, k
    val = np.empty(n)
    der = np.empty(n)
    cdef double[::1] v = val
    cdef double[::1] d = der
    cdef double *c = <double *> malloc(depth * sizeof(double))
    cdef double *s = <double *> malloc(depth * sizeof(double))
    cdef double *pre = <double *> malloc((depth + 1) * sizeof(double))
    cdef double xv, ang, suf, acc
    if c == NULL or s == NULL or pre == NULL:
        free(c); free(s); free(pre)
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                xv = x[i]
                pre[0] = 1.0
                for k in range(depth):
                    ang = p[k] * xv
                    c[k] = cos(ang)
                    s[k] = sin(ang)
                    pre[k + 1] = pre[k] * c[k]
                suf = 1.0
                acc = 0.0
                for k in range(depth - 1, -1, -1):
                    acc = acc + (dp[k] * s[k]) * (pre[k] * suf)
                    suf = suf * c[k]
                v[i] = pre[depth]
                d[i] = -xv * acc
    finally:
        free(c); free(s); free(pre)
    return val, der


def signed_sums(coef):
    cdef const double[::1] cf = np.ascontiguousarray(coef, dtype=np.float64)
    cdef Py_ssize_t b = cf.shape[0], level, j, size = 1
    out = np.zeros(1 << b)
    cdef double[::1] o = out
    cdef double base, cv
    with nogil:
        for level in range(b):
            cv = cf[level]
            # expand in place from the top so parents are read before being overwritten
            for j in range(size - 1, -1, -1):
                base = o[j]
                o[2 * j] = base - cv
                o[2 * j + 1] = base + cv
            size = size * 2
    return out


def bit_signed_sums(bits, coef):
    cdef const uint64_t[::1] w = np.ascontiguousarray(bits, dtype=np.uint64)
    cdef const double[:, ::1] cf = np.ascontiguousarray(coef, dtype=np.float64)
    cdef Py_ssize_t n = w.shape[0], r = cf.shape[0], i, j, m
    out = np.zeros((r, n))
    cdef double[:, ::1] o = out
    cdef double acc
    cdef uint64_t word
    with nogil:
        for j in range(r):
            for i in range(n):
                word = w[i]
                acc = 0.0
                for m in range(64):
                    if (word >> (63 - m)) & 1:
                        acc = acc + cf[j, m]
                    else:
                        acc = acc + (-cf[j, m])
                o[j, i] = acc
    return out


cdef inline Py_ssize_t _locate(const double[::1] knots, double xv) noexcept nogil:
    # index of the last knot <= xv, or -1
    cdef Py_ssize_t lo = 0, hi = knots.shape[0], mid
    while lo < hi:
        mid = (lo + hi) // 2
        if knots[mid] <= xv:
            lo = mid + 1
        else:
            hi = mid
    return lo - 1


def ppoly_eval(knots, coefs, double left, double right, x):
    cdef const double[::1] kn = np.ascontiguousarray(knots, dtype=np.float64)
    cdef const double[:, ::1] cf = np.ascontiguousarray(coefs, dtype=np.float64)
    cdef const double[::1] xs = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xs.shape[0], npieces = cf.shape[0], ncoef = cf.shape[1], i, j, k
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double t, acc
    with nogil:
        for i in range(n):
            j = _locate(kn, xs[i])
            if j < 0:
                o[i] = left
            elif j >= npieces:
                o[i] = right
            else:
                t = (xs[i] - kn[j]) / (kn[j + 1] - kn[j])
                acc = cf[j, ncoef - 1]
                for k in range(ncoef - 2, -1, -1):
                    acc = acc * t + cf[j, k]
                o[i] = acc
    return out


cdef inline double _piece_value(const double[::1] kn, const double[:, ::1] cf, double left,
                                double right, double xv) noexcept nogil:
    cdef Py_ssize_t j = _locate(kn, xv), k, ncoef = cf.shape[1]
    cdef double t, acc
    if j < 0:
        return left
    if j >= cf.shape[0]:
        return right
    t = (xv - kn[j]) / (kn[j + 1] - kn[j])
    acc = cf[j, ncoef - 1]
    for k in range(ncoef - 2, -1, -1):
        acc = acc * t + cf[j, k]
    return acc


def ppoly_increment(knots, coefs, double left, double right, x, d):
    cdef const double[::1] kn = np.ascontiguousarray(knots, dtype=np.float64)
    cdef const double[:, ::1] cf = np.ascontiguousarray(coefs, dtype=np.float64)
    cdef const double[::1] xs = np.ascontiguousarray(x, dtype=np.float64)
    dd = np.ascontiguousarray(np.broadcast_to(d, np.shape(x)), dtype=np.float64)
    cdef const double[::1] ds = dd
    cdef Py_ssize_t n = xs.shape[0], npieces = cf.shape[0], ncoef = cf.shape[1], i, j0, j1, k, s
    out = np.zeros(n)
    cdef double[::1] o = out
    cdef double w, t, dt, acc
    cdef double *b = <double *> malloc(ncoef * sizeof(double))
    if b == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                j0 = _locate(kn, xs[i])
                j1 = _locate(kn, xs[i] + ds[i])
                if j0 != j1:
                    o[i] = (_piece_value(kn, cf, left, right, xs[i] + ds[i])
                            - _piece_value(kn, cf, left, right, xs[i]))
                elif j0 < 0 or j0 >= npieces or ncoef < 2:
                    o[i] = 0.0
                else:
                    w = kn[j0 + 1] - kn[j0]
                    t = (xs[i] - kn[j0]) / w
                    dt = ds[i] / w
                    for k in range(ncoef):
                        b[k] = cf[j0, k]
                    for s in range(ncoef - 1):
                        for k in range(ncoef - 2, s - 1, -1):
                            b[k] = b[k] + t * b[k + 1]
                    acc = b[ncoef - 1]
                    for k in range(ncoef - 2, 0, -1):
                        acc = acc * dt + b[k]
                    o[i] = acc * dt
    finally:
        free(b)
    return out
