"""Independent rule validation: moment exactness, the positive-weight stability
bound, polynomial reproduction, and Lebesgue constants.

Evaluation here goes through the scalar recurrence functions in
:mod:`ortho_basis` (plus a monomial-expansion cross-check at low degree), not
through the assembly kernels, so it constitutes a second code path against the
moment system.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .ortho_basis import eval_univariate
from .sparse_grid import gauss_rule, tensor_rule

__all__ = [
    "ExactnessReport",
    "exactness",
    "stability_gap",
    "discrete_projection",
    "lebesgue_constant",
    "padua_points",
    "oracle_tensor_integrate",
]


@dataclass
class ExactnessReport:
    errors: dict  # exponent tuple -> signed moment error
    epsilon: float  # l2 norm of the error vector
    max_error: float
    weight_min: float
    weight_max: float
    negative_weights: int
    monomial_check: float | None = None  # max deviation between the two paths

    def to_json(self, path):
        payload = {
            "epsilon": self.epsilon,
            "max_error": self.max_error,
            "weight_min": self.weight_min,
            "weight_max": self.weight_max,
            "negative_weights": self.negative_weights,
            "monomial_check": self.monomial_check,
            "errors": {" ".join(map(str, a)): e for a, e in self.errors.items()},
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1)


class _UnivariateCache:
    """Values of p_m at fixed points, per dimension, via the recurrence path."""

    def __init__(self, basis, nodes):
        self.basis = basis
        self.nodes = nodes
        self._vals = {}

    def get(self, j, m):
        key = (j, m)
        if key not in self._vals:
            self._vals[key] = eval_univariate(self.basis.tables[j], m, self.nodes[:, j])
        return self._vals[key]

    def basis_row(self, alpha):
        out = np.ones(self.nodes.shape[0])
        for j, m in enumerate(alpha):
            out = out * self.get(j, m)
        return out


def _monomial_coefs(rec, m_max):
    """Monomial coefficient arrays of p_0..p_{m_max} (independent oracle path)."""
    sb = np.sqrt(rec.b)
    coefs = [np.array([1.0 / sb[0]])]
    if m_max >= 1:
        prev = coefs[0]
        cur = (np.concatenate([[0.0], prev]) - rec.a[0] * np.concatenate([prev, [0.0]])) / sb[1]
        coefs.append(cur)
    for k in range(1, m_max):
        prev, cur = coefs[k - 1], coefs[k]
        nxt = np.concatenate([[0.0], cur])  # x * p_k
        nxt = nxt - rec.a[k] * np.concatenate([cur, [0.0]])
        nxt[: len(prev)] -= sb[k] * prev
        coefs.append(nxt / sb[k + 1])
    return coefs


def exactness(rule, index_set, basis):
    """Recompute every moment of the rule over the index set.

    Per-index error is sum_q w_q pi_alpha(x_q) minus one at the zero index.
    For sets of total degree at most 10 a raw monomial-expansion evaluation is
    cross-checked against the recurrence path and the maximum deviation is
    reported.
    """
    nodes = np.atleast_2d(np.asarray(rule.nodes, dtype=np.float64))
    w = np.asarray(rule.weights, dtype=np.float64)
    if nodes.shape[1] != index_set.dim:
        raise ValueError("rule and index set dimensions differ")
    cache = _UnivariateCache(basis, nodes)
    errors = {}
    for alpha in index_set:
        target = 1.0 if sum(alpha) == 0 else 0.0
        errors[alpha] = float(w @ cache.basis_row(alpha) - target)
    err_vec = np.array(list(errors.values()))

    monomial_check = None
    if index_set.max_degree() <= 10:
        coefs = [
            _monomial_coefs(basis.tables[j], index_set.max_component())
            for j in range(index_set.dim)
        ]
        dev = 0.0
        for alpha in index_set:
            vals = np.ones(nodes.shape[0])
            for j, m in enumerate(alpha):
                vals *= np.polynomial.polynomial.polyval(nodes[:, j], coefs[j][m])
            target = 1.0 if sum(alpha) == 0 else 0.0
            dev = max(dev, abs(float(w @ vals - target) - errors[alpha]))
        monomial_check = dev

    return ExactnessReport(
        errors=errors,
        epsilon=float(np.linalg.norm(err_vec)),
        max_error=float(np.max(np.abs(err_vec))),
        weight_min=float(w.min()),
        weight_max=float(w.max()),
        negative_weights=int(np.sum(w < 0.0)),
        monomial_check=monomial_check,
    )


def oracle_tensor_integrate(f, basis, degree_budget):
    """Tensor-Gauss reference integral under the basis' own weight.

    Builds a per-dimension Gauss rule from each recurrence table with
    ceil((budget + 1) / 2) points, so anisotropic and affinely mapped weights
    integrate correctly. Refuses d > 8.
    """
    d = basis.dim
    if d > 8:
        raise ValueError("tensor oracle limited to d <= 8; use analytic moments")
    n1 = max((degree_budget + 2) // 2, 1)
    rules = [gauss_rule(t, n1) for t in basis.tables]
    nodes, weights = tensor_rule(rules)
    vals = np.asarray(f(nodes), dtype=np.float64)
    return float(weights @ vals)


def stability_gap(rule, f, index_set, basis, projection_budget=None):
    """Left and right sides of the positive-weight quadrature error bound.

    lhs = |reference integral - rule sum|; rhs = epsilon * ||f|| plus the
    largest nodal deviation between f and its weighted-L2 projection onto the
    span of the index set. Projection coefficients come from the tensor-Gauss
    oracle at a budget with aliasing margin.
    """
    nodes = np.atleast_2d(np.asarray(rule.nodes, dtype=np.float64))
    w = np.asarray(rule.weights, dtype=np.float64)
    if projection_budget is None:
        projection_budget = 2 * index_set.max_degree() + 6
    eps = exactness(rule, index_set, basis).epsilon

    rule_sum = float(w @ np.asarray(f(nodes), dtype=np.float64))
    integral = oracle_tensor_integrate(f, basis, projection_budget)
    lhs = abs(integral - rule_sum)

    f_norm = np.sqrt(max(oracle_tensor_integrate(lambda X: np.asarray(f(X)) ** 2, basis, projection_budget), 0.0))
    cache = _UnivariateCache(basis, nodes)
    proj_at_nodes = np.zeros(nodes.shape[0])
    for alpha in index_set:
        def fpi(X, _alpha=alpha):
            out = np.asarray(f(X), dtype=np.float64)
            for j, m in enumerate(_alpha):
                out = out * eval_univariate(basis.tables[j], m, X[:, j])
            return out

        coeff = oracle_tensor_integrate(fpi, basis, projection_budget)
        proj_at_nodes += coeff * cache.basis_row(alpha)
    node_dev = float(np.max(np.abs(np.asarray(f(nodes), dtype=np.float64) - proj_at_nodes)))
    rhs = eps * f_norm + node_dev
    return lhs, rhs


def discrete_projection(f, rule, theta, basis):
    """Approximate expansion coefficients sum_q pi_alpha(x_q) f(x_q) w_q."""
    nodes = np.atleast_2d(np.asarray(rule.nodes, dtype=np.float64))
    w = np.asarray(rule.weights, dtype=np.float64)
    fv = np.asarray(f(nodes), dtype=np.float64)
    cache = _UnivariateCache(basis, nodes)
    return {alpha: float(w @ (cache.basis_row(alpha) * fv)) for alpha in theta}


def padua_points(r):
    """Degree-r Padua points: the interleaved Chebyshev-Lobatto subgrid with
    (r+1)(r+2)/2 points in [-1, 1]^2."""
    if r < 0:
        raise ValueError("need r >= 0")
    if r == 0:
        return np.array([[1.0, 1.0]])
    pts = []
    xi = np.cos(np.pi * np.arange(r + 1) / r)
    eta = np.cos(np.pi * np.arange(r + 2) / (r + 1))
    for j in range(r + 1):
        for k in range(r + 2):
            if (j + k) % 2 == 0:
                pts.append((xi[j], eta[k]))
    pts.sort()
    return np.array(pts)


def lebesgue_constant(nodes, index_set, basis, grid_resolution=200, bounds=(-1.0, 1.0), return_grid=False):
    """Maximum of the summed absolute cardinal functions over a tensor grid.

    Requires as many nodes as basis functions (square interpolation system);
    limited to d <= 2 where the grid search is affordable.
    """
    nodes = np.atleast_2d(np.asarray(nodes, dtype=np.float64))
    n, d = nodes.shape
    if d > 2:
        raise ValueError("Lebesgue computation limited to d <= 2")
    if n != len(index_set):
        raise ValueError("node count must equal the index set size")
    cache = _UnivariateCache(basis, nodes)
    A = np.array([cache.basis_row(alpha) for alpha in index_set])  # (M, n)

    axes = [np.linspace(bounds[0], bounds[1], grid_resolution) for _ in range(d)]
    if d == 1:
        grid = axes[0][:, None]
    else:
        gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
        grid = np.stack([gx.ravel(), gy.ravel()], axis=1)
    gcache = _UnivariateCache(basis, grid)
    Phi = np.array([gcache.basis_row(alpha) for alpha in index_set])  # (M, G)
    try:
        S = np.linalg.solve(A, Phi)
    except np.linalg.LinAlgError:
        raise ValueError("nodes not unisolvent for this index set") from None
    L_vals = np.sum(np.abs(S), axis=0)
    L = float(np.max(L_vals))
    if return_grid:
        return L, grid, L_vals
    return L
