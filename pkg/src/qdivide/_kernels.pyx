# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels.

Cyclic-Jacobi diagonalization for small Hermitian matrices and the
trace-norm trajectory of Pauli-diagonal two-qubit evolutions.  The
matrices here are at most 4x4, where a tight Jacobi loop beats the
LAPACK call overhead by a wide margin.  ``qdivide._kernels_py`` is the
API-compatible NumPy fallback.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

from ._pauli import BASIS4

cnp.import_array()

BACKEND = "cython"

DEF MAXN = 16

cdef double complex[:, :, :, ::1] _B4 = np.array(BASIS4, dtype=np.complex128, order="C")


cdef inline double _cabs2(double complex z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef void _jacobi_eigvals(double complex* a, double* w, int n) noexcept nogil:
    """Eigenvalues of the Hermitian n x n matrix a (row-major, destroyed).

    Cyclic Jacobi with complex Givens rotations; eigenvalues are written
    to w in ascending order.
    """
    cdef int p, q, i, j, sweep
    cdef double off2, fro2, app, aqq, r, tau, t, c, s, tmp
    cdef double complex apq, u, xp, xq

    fro2 = 0.0
    for i in range(n):
        for j in range(n):
            fro2 += _cabs2(a[i * n + j])
    # absolute floor keeps the zero matrix from spinning on 0 < 0 tests
    cdef double thresh = 1e-30 * fro2 + 1e-300

    for sweep in range(60):
        off2 = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off2 += _cabs2(a[p * n + q])
        if off2 <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p * n + q]
                r = sqrt(_cabs2(apq))
                if r < 1e-300:
                    continue
                u = apq / r
                app = a[p * n + p].real
                aqq = a[q * n + q].real
                tau = (aqq - app) / (2.0 * r)
                if tau >= 0.0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                # columns: A <- A J with J[p,p]=c, J[p,q]=s, J[q,p]=-s*conj(u), J[q,q]=c*conj(u)
                for i in range(n):
                    xp = a[i * n + p]
                    xq = a[i * n + q]
                    a[i * n + p] = c * xp - s * u.conjugate() * xq
                    a[i * n + q] = s * xp + c * u.conjugate() * xq
                # rows: A <- J^dag A
                for i in range(n):
                    xp = a[p * n + i]
                    xq = a[q * n + i]
                    a[p * n + i] = c * xp - s * u * xq
                    a[q * n + i] = s * xp + c * u * xq

    for i in range(n):
        w[i] = a[i * n + i].real
    # insertion sort, ascending
    for i in range(1, n):
        tmp = w[i]
        j = i - 1
        while j >= 0 and w[j] > tmp:
            w[j + 1] = w[j]
            j -= 1
        w[j + 1] = tmp


def eigvalsh(a):
    """Eigenvalues of a Hermitian matrix, ascending."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] buf = np.array(
        a, dtype=np.complex128, order="C", copy=True
    )
    cdef int n = buf.shape[0]
    if buf.shape[1] != n:
        raise ValueError("matrix must be square")
    if n > MAXN:
        return np.linalg.eigvalsh(buf)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.empty(n, dtype=np.float64)
    _jacobi_eigvals(<double complex*> buf.data, <double*> w.data, n)
    return w


def eigvalsh_batch(a):
    """Eigenvalues of a stack of Hermitian matrices, shape (m, n) ascending."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] buf = np.array(
        a, dtype=np.complex128, order="C", copy=True
    )
    cdef Py_ssize_t m = buf.shape[0]
    cdef int n = buf.shape[1]
    if buf.shape[2] != n:
        raise ValueError("matrices must be square")
    if n > MAXN:
        return np.linalg.eigvalsh(buf)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] w = np.empty((m, n), dtype=np.float64)
    cdef double complex* ap = <double complex*> buf.data
    cdef double* wp = <double*> w.data
    cdef Py_ssize_t k
    with nogil:
        for k in range(m):
            _jacobi_eigvals(ap + k * n * n, wp + k * n, n)
    return w


def trace_norms_batch(a):
    """Trace norms (sum of absolute eigenvalues) of a stack of Hermitian matrices."""
    w = eigvalsh_batch(a)
    return np.abs(w).sum(axis=-1)


def pauli_tensor_trace_norms(coeffs, lam_left, lam_right):
    """Trace-norm trajectory of a two-qubit Pauli-diagonal evolution.

    coeffs:    (4, 4) real Pauli-tensor coefficients c_{mu nu}
    lam_left:  (T, 4) eigenvalue columns (1, l1, l2, l3) of the left factor
    lam_right: (T, 4) for the right factor

    Returns the (T,) array of trace norms of
    sum_{mu nu} lam_left[t, mu] lam_right[t, nu] c_{mu nu} sigma_mu (x) sigma_nu.
    """
    cdef double[:, ::1] cv = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef double[:, ::1] lv = np.ascontiguousarray(lam_left, dtype=np.float64)
    cdef double[:, ::1] rv = np.ascontiguousarray(lam_right, dtype=np.float64)
    if cv.shape[0] != 4 or cv.shape[1] != 4 or lv.shape[1] != 4 or rv.shape[1] != 4:
        raise ValueError("coeffs must be (4, 4) and factors (T, 4)")
    if lv.shape[0] != rv.shape[0]:
        raise ValueError("factor arrays must share the time axis")
    cdef Py_ssize_t T = lv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(T, dtype=np.float64)
    cdef double* op = <double*> out.data
    cdef double complex h[16]
    cdef double w[4]
    cdef double wgt
    cdef Py_ssize_t t
    cdef int mu, nu, e
    with nogil:
        for t in range(T):
            for e in range(16):
                h[e] = 0.0
            for mu in range(4):
                for nu in range(4):
                    wgt = lv[t, mu] * rv[t, nu] * cv[mu, nu]
                    if wgt == 0.0:
                        continue
                    for e in range(16):
                        h[e] = h[e] + wgt * _B4[mu, nu, e >> 2, e & 3]
            _jacobi_eigvals(h, w, 4)
            op[t] = fabs(w[0]) + fabs(w[1]) + fabs(w[2]) + fabs(w[3])
    return out
