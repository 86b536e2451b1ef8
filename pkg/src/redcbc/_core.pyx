# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. ``_pycore`` holds the numpy equivalents."""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()


def order_sums(const double[:, ::1] X, const double[::1] gamma):
    """S[l] = sum_k P_l(k) with P_l the degree-l elementary symmetric sums of gamma_j X[j, k]."""
    cdef Py_ssize_t s = X.shape[0], N = X.shape[1]
    cdef Py_ssize_t j, k, l
    cdef double t
    out = np.zeros(s + 1, dtype=np.float64)
    cdef double[::1] S = out
    cdef double *P = <double *> malloc((s + 1) * sizeof(double))
    if P == NULL:
        raise MemoryError()
    try:
        for k in range(N):
            P[0] = 1.0
            for l in range(1, s + 1):
                P[l] = 0.0
            for j in range(s):
                t = gamma[j] * X[j, k]
                for l in range(j + 1, 0, -1):
                    P[l] += t * P[l - 1]
            for l in range(s + 1):
                S[l] += P[l]
    finally:
        free(P)
    return out


def thomas_spd(const double[:, ::1] diag, const double[:, ::1] off, const double[:, ::1] rhs):
    """Batched symmetric tridiagonal solve; returns (solution, smallest pivot)."""
    cdef Py_ssize_t B = diag.shape[0], n = diag.shape[1]
    cdef Py_ssize_t bi, i, rb
    cdef Py_ssize_t rstride = 0 if rhs.shape[0] == 1 else 1
    cdef double piv, mult, minpiv = np.inf
    out = np.empty((B, n), dtype=np.float64)
    cdef double[:, ::1] u = out
    cdef double *p = <double *> malloc(n * sizeof(double))
    if p == NULL:
        raise MemoryError()
    try:
        for bi in range(B):
            rb = bi * rstride
            p[0] = diag[bi, 0]
            u[bi, 0] = rhs[rb, 0]
            if p[0] < minpiv:
                minpiv = p[0]
            for i in range(1, n):
                mult = off[bi, i - 1] / p[i - 1]
                p[i] = diag[bi, i] - mult * off[bi, i - 1]
                u[bi, i] = rhs[rb, i] - mult * u[bi, i - 1]
                if p[i] < minpiv:
                    minpiv = p[i]
            u[bi, n - 1] = u[bi, n - 1] / p[n - 1]
            for i in range(n - 2, -1, -1):
                u[bi, i] = (u[bi, i] - off[bi, i] * u[bi, i + 1]) / p[i]
    finally:
        free(p)
    return out, minpiv


def omega_matvec_direct(const double[::1] tab, const long long[::1] units, const double[::1] v):
    """T[i] = sum_k tab[(k * units[i]) mod n] v[k]."""
    cdef Py_ssize_t n = tab.shape[0], nu = units.shape[0]
    cdef Py_ssize_t i, k
    cdef long long r, z
    cdef double acc
    out = np.empty(nu, dtype=np.float64)
    cdef double[::1] T = out
    for i in range(nu):
        z = units[i] % n
        r = 0
        acc = 0.0
        for k in range(n):
            acc += tab[r] * v[k]
            r += z
            if r >= n:
                r -= n
        T[i] = acc
    return out
