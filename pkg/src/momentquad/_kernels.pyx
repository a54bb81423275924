# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled evaluation/assembly kernels.

Mirrors _kernels_py operation-for-operation so results are bitwise identical
to the pure numpy fallback.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()


def poly_tables(a, b, int m_max, x):
    """Values of orthonormal p_0..p_{m_max} at the points x; shape (m_max+1, n)."""
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] sb = np.sqrt(np.ascontiguousarray(b, dtype=np.float64))
    cdef Py_ssize_t npts = xv.shape[0]
    P_arr = np.empty((m_max + 1, npts))
    cdef double[:, ::1] P = P_arr
    cdef Py_ssize_t k, q
    cdef double p0 = 1.0 / sb[0]
    for q in range(npts):
        P[0, q] = p0
    if m_max >= 1:
        for q in range(npts):
            P[1, q] = (xv[q] - av[0]) * P[0, q] / sb[1]
    for k in range(1, m_max):
        for q in range(npts):
            P[k + 1, q] = ((xv[q] - av[k]) * P[k, q] - sb[k] * P[k - 1, q]) / sb[k + 1]
    return P_arr


def poly_tables_with_deriv(a, b, int m_max, x):
    """Values and first derivatives of p_0..p_{m_max} at the points x."""
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] sb = np.sqrt(np.ascontiguousarray(b, dtype=np.float64))
    cdef Py_ssize_t npts = xv.shape[0]
    P_arr = np.empty((m_max + 1, npts))
    D_arr = np.zeros((m_max + 1, npts))
    cdef double[:, ::1] P = P_arr
    cdef double[:, ::1] D = D_arr
    cdef Py_ssize_t k, q
    cdef double p0 = 1.0 / sb[0]
    for q in range(npts):
        P[0, q] = p0
    if m_max >= 1:
        for q in range(npts):
            P[1, q] = (xv[q] - av[0]) * P[0, q] / sb[1]
            D[1, q] = P[0, q] / sb[1]
    for k in range(1, m_max):
        for q in range(npts):
            D[k + 1, q] = ((xv[q] - av[k]) * D[k, q] - sb[k] * D[k - 1, q] + P[k, q]) / sb[k + 1]
            P[k + 1, q] = ((xv[q] - av[k]) * P[k, q] - sb[k] * P[k - 1, q]) / sb[k + 1]
    return P_arr, D_arr


def tensor_products(P_stack, alpha):
    """Basis-evaluation matrix V[m, q] = prod_j P_j[alpha[m, j], q]."""
    cdef double[:, :, ::1] P = np.ascontiguousarray(P_stack, dtype=np.float64)
    cdef const long long[:, ::1] al = np.ascontiguousarray(alpha, dtype=np.int64)
    cdef Py_ssize_t d = P.shape[0]
    cdef Py_ssize_t M = al.shape[0]
    cdef Py_ssize_t n = P.shape[2]
    V_arr = np.empty((M, n))
    cdef double[:, ::1] V = V_arr
    cdef Py_ssize_t m, q, j
    cdef double v
    for m in range(M):
        for q in range(n):
            v = P[0, al[m, 0], q]
            for j in range(1, d):
                v *= P[j, al[m, j], q]
            V[m, q] = v
    return V_arr


def jacobian_dense(P_stack, D_stack, alpha, w, V_in):
    """Dense residual Jacobian over the decision layout (nodes then weights)."""
    cdef double[:, :, ::1] P = np.ascontiguousarray(P_stack, dtype=np.float64)
    cdef double[:, :, ::1] D = np.ascontiguousarray(D_stack, dtype=np.float64)
    cdef const long long[:, ::1] al = np.ascontiguousarray(alpha, dtype=np.int64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[:, ::1] V = np.ascontiguousarray(V_in, dtype=np.float64)
    cdef Py_ssize_t d = P.shape[0]
    cdef Py_ssize_t M = al.shape[0]
    cdef Py_ssize_t n = wv.shape[0]
    J_arr = np.empty((M, (d + 1) * n))
    cdef double[:, ::1] J = J_arr
    cdef Py_ssize_t m, i, j, j2
    cdef double t
    for j in range(d):
        for m in range(M):
            for i in range(n):
                t = D[j, al[m, j], i]
                for j2 in range(d):
                    if j2 != j:
                        t *= P[j2, al[m, j2], i]
                t *= wv[i]
                J[m, i * d + j] = t
    for m in range(M):
        for i in range(n):
            J[m, n * d + i] = V[m, i]
    return J_arr
