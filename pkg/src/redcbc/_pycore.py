"""Numpy versions of the kernels in ``_core.pyx``."""
import numpy as np


def order_sums(X, gamma):
    X = np.asarray(X, dtype=float)
    s, N = X.shape
    P = np.zeros((s + 1, N))
    P[0] = 1.0
    for j in range(s):
        t = gamma[j] * X[j]
        P[1 : j + 2] += t * P[: j + 1]
    return P.sum(axis=1)


def thomas_spd(diag, off, rhs):
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    B, n = diag.shape
    u = np.array(np.broadcast_to(rhs, (B, n)), dtype=float)
    p = np.empty((B, n))
    p[:, 0] = diag[:, 0]
    for i in range(1, n):
        mult = off[:, i - 1] / p[:, i - 1]
        p[:, i] = diag[:, i] - mult * off[:, i - 1]
        u[:, i] -= mult * u[:, i - 1]
    u[:, n - 1] /= p[:, n - 1]
    for i in range(n - 2, -1, -1):
        u[:, i] = (u[:, i] - off[:, i] * u[:, i + 1]) / p[:, i]
    return u, float(p.min())


def omega_matvec_direct(tab, units, v, chunk_elems=1 << 22):
    tab = np.asarray(tab, dtype=float)
    n = tab.size
    units = np.asarray(units, dtype=np.int64)
    k = np.arange(n, dtype=np.int64)
    out = np.empty(units.size)
    rows = max(1, chunk_elems // max(n, 1))
    for start in range(0, units.size, rows):
        zz = units[start : start + rows]
        out[start : start + rows] = tab[(zz[:, None] * k[None, :]) % n] @ v
    return out
