"""Pure NumPy versions of the compiled inner loops in ``_ckernels``."""

import numpy as np


def tile_matmul(mat, key):
    rows, cols = mat.shape
    mat = np.asarray(mat)
    key = np.asarray(key)
    tiles = mat.reshape(rows, cols // 2, 2)
    return (tiles @ key).reshape(rows, cols)


def psk_nearest(re, im, pts_re, pts_im, rel_tol=1e-12):
    dr = np.asarray(re)[:, None] - np.asarray(pts_re)[None, :]
    di = np.asarray(im)[:, None] - np.asarray(pts_im)[None, :]
    d = dr * dr + di * di
    lim = d.min(axis=1, keepdims=True) * (1.0 + rel_tol) + 1e-300
    return np.argmax(d <= lim, axis=1).astype(np.int64)


def rss_threshold(rss, window, q_plus, q_minus):
    rss = np.asarray(rss, dtype=np.float64)
    out = np.full(rss.size, -1, dtype=np.int8)
    for start in range(0, rss.size, window):
        x = rss[start:start + window]
        mean = x.sum() / x.size
        s = np.sqrt(((x - mean) ** 2).sum() / x.size)
        if s == 0.0 or x.min() == x.max():
            continue
        seg = out[start:start + window]
        seg[x > mean + q_plus * s] = 1
        seg[x < mean + q_minus * s] = 0
    return out
