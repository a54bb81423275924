"""Univariate Gauss rules, tensor-product rules, and Smolyak sparse grids.

These serve both as baselines for node-count comparisons and as the reference
integrator (tensor Gauss) used by the verification tools.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .ortho_basis import standard_recurrence

__all__ = [
    "UnivariateRule",
    "SparseGridRule",
    "gauss_rule",
    "clenshaw_curtis",
    "tensor_rule",
    "smolyak",
    "oracle_integrate",
]


@dataclass(frozen=True, eq=False)
class UnivariateRule:
    nodes: np.ndarray
    weights: np.ndarray
    family: str
    order: int

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=np.float64))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=np.float64))
        if self.nodes.shape != self.weights.shape:
            raise ValueError("nodes and weights must have equal length")


@dataclass(frozen=True, eq=False)
class SparseGridRule:
    dim: int
    level: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n(self):
        return len(self.weights)

    @property
    def negative_weight_count(self):
        return int(np.sum(self.weights < 0.0))


def gauss_rule(rec, n):
    """n-point Gauss rule from the symmetric tridiagonal (Jacobi) eigenproblem.

    Weights are b_0 times the squared first eigenvector components, hence
    positive and summing to b_0 (= 1 for probability-normalized weights).
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if len(rec.a) < n + 1:
        raise ValueError(f"recurrence table too short for an {n}-point rule")
    T = np.diag(rec.a[:n])
    if n > 1:
        off = np.sqrt(rec.b[1:n])
        T += np.diag(off, 1) + np.diag(off, -1)
    try:
        x, vecs = np.linalg.eigh(T)
    except np.linalg.LinAlgError as err:
        raise np.linalg.LinAlgError(f"Jacobi eigensolve failed: {err}") from err
    w = rec.b[0] * vecs[0, :] ** 2
    if np.all(rec.a[:n] == rec.a[0]):
        # symmetric weight: enforce exact node symmetry about the center
        center = rec.a[0]
        t = x - center
        t = 0.5 * (t - t[::-1])
        x = center + t
        w = 0.5 * (w + w[::-1])
    return UnivariateRule(x, w, rec.family, n)


def clenshaw_curtis(n):
    """n-point Clenshaw-Curtis rule for the uniform probability weight on [-1, 1].

    Interpolatory weights computed from exact Chebyshev moments; nested under
    the growth n_i = 2^{i-1} + 1.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if n == 1:
        return UnivariateRule(np.array([0.0]), np.array([1.0]), "clenshaw_curtis", 1)
    j = np.arange(n)
    theta = np.pi * j / (n - 1)
    x = np.cos(theta)[::-1]
    k = np.arange(n)
    A = np.cos(np.outer(k, theta))  # A[k, j] = T_k(x_j)
    m = np.zeros(n)
    even = k[k % 2 == 0]
    m[even] = 1.0 / (1.0 - even.astype(float) ** 2)
    w = np.linalg.solve(A, m)[::-1]
    # exact symmetry, as for the Gauss rules
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return UnivariateRule(x, w, "clenshaw_curtis", n)


def tensor_rule(rules):
    """Full tensor grid of univariate rules: nodes (N, d) and product weights."""
    if not rules:
        raise ValueError("need at least one univariate rule")
    node_grids = np.meshgrid(*[r.nodes for r in rules], indexing="ij")
    weight_grids = np.meshgrid(*[r.weights for r in rules], indexing="ij")
    nodes = np.stack([g.ravel() for g in node_grids], axis=1)
    weights = np.ones(nodes.shape[0])
    for g in weight_grids:
        weights *= g.ravel()
    return nodes, weights


def _compositions(total, parts):
    """All tuples of ``parts`` positive integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


GROWTH_MAPS = {
    "gauss": lambda i: i,
    "clenshaw_curtis": lambda i: 1 if i == 1 else 2 ** (i - 1) + 1,
}


def smolyak(d, k, family="legendre", growth="gauss", rec=None):
    """Level-k Smolyak sparse grid via the combination formula.

    ``growth`` maps a level to a univariate point count ("gauss": n_i = i,
    non-nested; "clenshaw_curtis": nested doubling). With univariate rules
    exact through degree 2i-1, the result is exact on total degree 2k-1.
    Nodes from different tensor grids are merged: bitwise for non-nested
    growth, to 1e-12 in each coordinate for nested growth.
    """
    if d < 1 or k < 1:
        raise ValueError("need d >= 1 and k >= 1")
    growth_name = growth if isinstance(growth, str) else "custom"
    growth_fn = GROWTH_MAPS[growth] if isinstance(growth, str) else growth

    max_level = k
    if growth_name == "clenshaw_curtis":
        rules = {i: clenshaw_curtis(growth_fn(i)) for i in range(1, max_level + 1)}
    else:
        if rec is None:
            n_max = growth_fn(max_level)
            rec = standard_recurrence(family, 2 * n_max)
        rules = {i: gauss_rule(rec, growth_fn(i)) for i in range(1, max_level + 1)}

    nested = growth_name == "clenshaw_curtis"
    acc = {}

    def key_of(point):
        if nested:
            return tuple(round(v, 12) for v in point)
        return tuple(point)

    for r in range(max(0, k - d), k):
        coeff = (-1.0) ** (k - 1 - r) * comb(d - 1, k - 1 - r)
        if coeff == 0.0:
            continue
        for levels in _compositions(d + r, d):
            nodes, weights = tensor_rule([rules[i] for i in levels])
            for point, wt in zip(nodes, weights):
                key = key_of(point)
                if key in acc:
                    acc[key] = (acc[key][0], acc[key][1] + coeff * wt)
                else:
                    acc[key] = (point, coeff * wt)

    kept = [(pt, wt) for pt, wt in acc.values() if wt != 0.0]
    kept.sort(key=lambda item: tuple(item[0]))
    nodes = np.array([pt for pt, _ in kept]).reshape(len(kept), d)
    weights = np.array([wt for _, wt in kept])
    return SparseGridRule(d, k, nodes, weights)


def oracle_integrate(f, d, degree_budget, family="legendre", rec=None):
    """Reference tensor-Gauss integral of a black-box function.

    Uses ceil((degree_budget + 1) / 2) points per axis, exact for polynomials
    within the budget. ``f`` must accept an (N, d) array and return (N,).
    Refuses d > 8; use analytic moments beyond that.
    """
    if d > 8:
        raise ValueError("tensor oracle limited to d <= 8; use analytic moments")
    if degree_budget < 0:
        raise ValueError("degree budget must be non-negative")
    n1 = (degree_budget + 2) // 2
    n1 = max(n1, 1)
    if rec is None:
        rec = standard_recurrence(family, max(2 * n1, 1))
    rule = gauss_rule(rec, n1)
    nodes, weights = tensor_rule([rule] * d)
    vals = np.asarray(f(nodes), dtype=np.float64)
    if vals.shape != (nodes.shape[0],):
        raise ValueError("integrand must map (N, d) arrays to (N,) values")
    return float(weights @ vals)
