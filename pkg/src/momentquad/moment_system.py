"""Moment-matching residual, analytic Jacobian, and penalty-augmented system."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from . import kernels
from .domains import penalty_jacobian, penalty_values

__all__ = ["DecisionVector", "MomentSystem", "penalty_constant"]


@dataclass
class DecisionVector:
    """Flattened decision variables: n*d node coordinates (node-major), then n weights."""

    dim: int
    n: int
    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.shape != ((self.dim + 1) * self.n,):
            raise ValueError("decision data length must be (d+1)*n")

    @classmethod
    def from_parts(cls, nodes, weights):
        nodes = np.asarray(nodes, dtype=np.float64)
        weights = np.asarray(weights, dtype=np.float64)
        n, d = nodes.shape
        return cls(d, n, np.concatenate([nodes.ravel(), weights]))

    @property
    def nodes(self):
        return self.data[: self.n * self.dim].reshape(self.n, self.dim)

    @property
    def weights(self):
        return self.data[self.n * self.dim :]

    def copy(self):
        return DecisionVector(self.dim, self.n, self.data.copy())


class MomentSystem:
    """Residual V(X) w - target over a basis, an index set, and a domain.

    ``target_scale`` multiplies the first cardinal unit vector; the designer
    runs iterations at scale |Lambda| and rescales back on export.
    """

    def __init__(self, basis, index_set, domain, target_scale=1.0):
        if basis.dim != index_set.dim:
            raise ValueError("basis and index set dimensions differ")
        if (0,) * index_set.dim not in index_set:
            raise ValueError("index set must contain the zero index")
        self.basis = basis
        self.index_set = index_set
        self.domain = domain
        self.target_scale = float(target_scale)
        self._alpha = index_set.as_array()
        self._m_max = int(self._alpha.max())
        for j, table in enumerate(basis.tables):
            if table.max_degree < self._m_max:
                raise ValueError(
                    f"recurrence table for dimension {j} supports degree "
                    f"{table.max_degree} < required {self._m_max}"
                )

    @property
    def M(self):
        return len(self.index_set)

    @property
    def dim(self):
        return self.basis.dim

    @property
    def target(self):
        t = np.zeros(self.M)
        t[0] = self.target_scale
        return t

    def _tables(self, X, with_deriv):
        d = self.dim
        n = X.shape[0]
        P = np.empty((d, self._m_max + 1, n))
        D = np.empty((d, self._m_max + 1, n)) if with_deriv else None
        for j in range(d):
            rec = self.basis.tables[j]
            if with_deriv:
                P[j], D[j] = kernels.poly_tables_with_deriv(
                    rec.a, rec.b, self._m_max, X[:, j]
                )
            else:
                P[j] = kernels.poly_tables(rec.a, rec.b, self._m_max, X[:, j])
        return P, D

    def vandermonde(self, X):
        """Basis-evaluation matrix of shape (M, n): rows follow the index-set order."""
        X = np.ascontiguousarray(X, dtype=np.float64)
        P, _ = self._tables(X, with_deriv=False)
        return kernels.tensor_products(P, self._alpha)

    def residual(self, d_vec):
        """Moment residual V(X) w - target."""
        return self.vandermonde(d_vec.nodes) @ d_vec.weights - self.target

    def jacobian(self, d_vec):
        """Analytic dense Jacobian of the residual, shape (M, (d+1)n)."""
        X = np.ascontiguousarray(d_vec.nodes)
        P, D = self._tables(X, with_deriv=True)
        V = kernels.tensor_products(P, self._alpha)
        return kernels.jacobian_dense(P, D, self._alpha, d_vec.weights, V)

    def augmented(self, d_vec, c):
        """Penalty-augmented residual and Jacobian at penalty constant c."""
        if c <= 0:
            raise ValueError("penalty constant must be positive")
        X = np.ascontiguousarray(d_vec.nodes)
        P, D = self._tables(X, with_deriv=True)
        V = kernels.tensor_products(P, self._alpha)
        R = V @ d_vec.weights - self.target
        J = kernels.jacobian_dense(P, D, self._alpha, d_vec.weights, V)
        pv = penalty_values(self.domain, d_vec)
        pj = penalty_jacobian(self.domain, d_vec)
        R_aug = np.concatenate([R, c * pv])
        J_aug = np.vstack([J, c * pj.toarray()])
        return R_aug, J_aug

    def residual_and_vandermonde(self, d_vec):
        V = self.vandermonde(d_vec.nodes)
        return V @ d_vec.weights - self.target, V

    def jacobian_sparse(self, d_vec):
        """Sparse residual Jacobian for large problems.

        Exploits that a basis function has zero partial along axes with a zero
        exponent, so node columns only receive entries from their active rows.
        """
        X = np.ascontiguousarray(d_vec.nodes)
        w = d_vec.weights
        n, d = X.shape
        alpha = self._alpha
        M = alpha.shape[0]
        P, D = self._tables(X, with_deriv=True)
        p0 = np.array([P[j, 0, 0] for j in range(d)])

        rows = []
        cols = []
        vals = []
        col_base = np.arange(n)
        V = np.empty((M, n))
        for m in range(M):
            active = np.nonzero(alpha[m])[0]
            prod = np.ones(n)
            for j in active:
                prod = prod * P[j, alpha[m, j], :]
            const = float(np.prod(p0[[j for j in range(d) if alpha[m, j] == 0]]))
            V[m] = const * prod
            for j in active:
                term = D[j, alpha[m, j], :].copy()
                for j2 in active:
                    if j2 != j:
                        term *= P[j2, alpha[m, j2], :]
                term *= const * w
                rows.append(np.full(n, m))
                cols.append(col_base * d + j)
                vals.append(term)
        # weight columns are the V entries
        for m in range(M):
            rows.append(np.full(n, m))
            cols.append(n * d + col_base)
            vals.append(V[m])
        J = sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(M, (d + 1) * n),
        ).tocsr()
        R = V @ w - self.target
        return R, J

    def augmented_sparse(self, d_vec, c):
        """Sparse analogue of :meth:`augmented`."""
        if c <= 0:
            raise ValueError("penalty constant must be positive")
        R, J = self.jacobian_sparse(d_vec)
        pv = penalty_values(self.domain, d_vec)
        pj = penalty_jacobian(self.domain, d_vec)
        R_aug = np.concatenate([R, c * pv])
        J_aug = sparse.vstack([J, c * pj], format="csr")
        return R_aug, J_aug


def penalty_constant(R_norm, A=1e3):
    """Penalty constant max(A, 1/||R||); returns A when the residual vanishes."""
    if R_norm < 0:
        raise ValueError("residual norm must be non-negative")
    if R_norm == 0.0:
        return float(A)
    return float(max(A, 1.0 / R_norm))
