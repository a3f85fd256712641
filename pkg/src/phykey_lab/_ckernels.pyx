# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Semantics must match ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def tile_matmul(const cnp.int64_t[:, ::1] mat, const cnp.int64_t[:, ::1] key):
    """Right-multiply every 2x2 row-major tile of `mat` by `key`.

    The caller guarantees even dimensions and that no product overflows int64.
    """
    cdef Py_ssize_t rows = mat.shape[0], cols = mat.shape[1]
    cdef Py_ssize_t i, j
    cdef cnp.int64_t k00 = key[0, 0], k01 = key[0, 1]
    cdef cnp.int64_t k10 = key[1, 0], k11 = key[1, 1]
    cdef cnp.int64_t a, b
    out = np.empty((rows, cols), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] o = out
    with nogil:
        for i in range(rows):
            for j in range(0, cols, 2):
                a = mat[i, j]
                b = mat[i, j + 1]
                o[i, j] = a * k00 + b * k10
                o[i, j + 1] = a * k01 + b * k11
    return out


def psk_nearest(const double[::1] re, const double[::1] im,
                const double[::1] pts_re, const double[::1] pts_im,
                double rel_tol=1e-12):
    """Index of the nearest constellation point; near-ties go to the lower index."""
    cdef Py_ssize_t n = re.shape[0], m = pts_re.shape[0]
    cdef Py_ssize_t i, k, best
    cdef double d, dmin, dr, di, lim
    out = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] o = out
    with nogil:
        for i in range(n):
            dmin = 1e308
            for k in range(m):
                dr = re[i] - pts_re[k]
                di = im[i] - pts_im[k]
                d = dr * dr + di * di
                if d < dmin:
                    dmin = d
            lim = dmin * (1.0 + rel_tol) + 1e-300
            best = 0
            for k in range(m):
                dr = re[i] - pts_re[k]
                di = im[i] - pts_im[k]
                if dr * dr + di * di <= lim:
                    best = k
                    break
            o[i] = best
    return out


def rss_threshold(const double[::1] rss, Py_ssize_t window,
                  double q_plus, double q_minus):
    """Per-window two-threshold quantizer: 1 above, 0 below, -1 dropped."""
    cdef Py_ssize_t n = rss.shape[0]
    cdef Py_ssize_t start, stop, i, w
    cdef double mean, var, s, dv, hi, lo, xmin, xmax
    out = np.empty(n, dtype=np.int8)
    cdef cnp.int8_t[::1] o = out
    with nogil:
        start = 0
        while start < n:
            stop = start + window
            if stop > n:
                stop = n
            w = stop - start
            mean = 0.0
            xmin = rss[start]
            xmax = rss[start]
            for i in range(start, stop):
                mean += rss[i]
                if rss[i] < xmin:
                    xmin = rss[i]
                if rss[i] > xmax:
                    xmax = rss[i]
            mean /= w
            var = 0.0
            for i in range(start, stop):
                dv = rss[i] - mean
                var += dv * dv
            # constant window: rounding in the mean must not leak bits
            s = 0.0 if xmin == xmax else (var / w) ** 0.5
            hi = mean + q_plus * s
            lo = mean + q_minus * s
            for i in range(start, stop):
                if s == 0.0:
                    o[i] = -1
                elif rss[i] > hi:
                    o[i] = 1
                elif rss[i] < lo:
                    o[i] = 0
                else:
                    o[i] = -1
            start = stop
    return out
