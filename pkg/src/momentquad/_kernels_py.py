"""Pure numpy implementation of the hot evaluation/assembly kernels.

Operation order matches the compiled extension exactly (same multiply
sequence per element), so both implementations produce bitwise-identical
arrays.
"""
from __future__ import annotations

import numpy as np


def poly_tables(a, b, m_max, x):
    """Values of orthonormal p_0..p_{m_max} at the points x.

    Returns an array of shape (m_max + 1, len(x)).
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    sb = np.sqrt(np.ascontiguousarray(b, dtype=np.float64))
    a = np.ascontiguousarray(a, dtype=np.float64)
    npts = x.shape[0]
    P = np.empty((m_max + 1, npts))
    P[0] = 1.0 / sb[0]
    if m_max >= 1:
        P[1] = (x - a[0]) * P[0] / sb[1]
    for k in range(1, m_max):
        P[k + 1] = ((x - a[k]) * P[k] - sb[k] * P[k - 1]) / sb[k + 1]
    return P


def poly_tables_with_deriv(a, b, m_max, x):
    """Values and first derivatives of p_0..p_{m_max} at the points x."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    sb = np.sqrt(np.ascontiguousarray(b, dtype=np.float64))
    a = np.ascontiguousarray(a, dtype=np.float64)
    npts = x.shape[0]
    P = np.empty((m_max + 1, npts))
    D = np.zeros((m_max + 1, npts))
    P[0] = 1.0 / sb[0]
    if m_max >= 1:
        P[1] = (x - a[0]) * P[0] / sb[1]
        D[1] = P[0] / sb[1]
    for k in range(1, m_max):
        D[k + 1] = ((x - a[k]) * D[k] - sb[k] * D[k - 1] + P[k]) / sb[k + 1]
        P[k + 1] = ((x - a[k]) * P[k] - sb[k] * P[k - 1]) / sb[k + 1]
    return P, D


def tensor_products(P_stack, alpha):
    """Basis-evaluation matrix V with entries V[m, q] = prod_j P_j[alpha[m, j], q].

    ``P_stack`` has shape (d, m_max + 1, n); ``alpha`` has shape (M, d).
    """
    d = P_stack.shape[0]
    V = P_stack[0][alpha[:, 0], :].copy()
    for j in range(1, d):
        V *= P_stack[j][alpha[:, j], :]
    return V


def jacobian_dense(P_stack, D_stack, alpha, w, V):
    """Dense residual Jacobian over the decision layout (nodes then weights).

    Node-coordinate column of node i, axis j sits at i*d + j and carries the
    axis-j partial of each basis function at node i times w_i; the weight
    column of node i sits at n*d + i and equals the V column.
    """
    d = P_stack.shape[0]
    M = alpha.shape[0]
    n = w.shape[0]
    J = np.empty((M, (d + 1) * n))
    for j in range(d):
        T = D_stack[j][alpha[:, j], :].copy()
        for j2 in range(d):
            if j2 != j:
                T *= P_stack[j2][alpha[:, j2], :]
        T *= w[np.newaxis, :]
        J[:, j : n * d : d] = T
    J[:, n * d :] = V
    return J
