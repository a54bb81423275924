"""End-to-end quadrature construction: size choice, initialization, solve,
node elimination, and enrichment.

The working normalization scales the weight total (and the constant-moment
target) to |Lambda| during iteration; the exported rule is rescaled to the
probability convention with weights summing to one.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import ndtri

from .domains import penalty_values
from .gauss_newton import SolveAbort, SolverConfig, solve
from .index_sets import half_set_greedy, is_downward_closed
from .moment_system import DecisionVector, MomentSystem
from .sparse_grid import smolyak

log = logging.getLogger(__name__)

__all__ = [
    "DesignConfig",
    "QuadratureRule",
    "DesignError",
    "estimate_sparse_grid_size",
    "initialize",
    "eliminate",
    "enrich",
    "design",
]


@dataclass
class DesignConfig:
    seed: int = 0
    tol: float = 1e-8
    kappa_start: float = 0.9
    kappa_min: float = 0.5  # documented ladder marker; elimination continues
    # below it until the half-set floor or the first failed pass
    enrichment_fraction: float = 0.05
    node_inset: float = 1e-6  # keep iterated nodes this far inside box faces
    max_outer: int = 20
    n_fixed: int | None = None
    initial_nodes: np.ndarray | None = None
    size_estimate: int | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if not (0.0 < self.kappa_min <= self.kappa_start <= 1.0):
            raise ValueError("need 0 < kappa_min <= kappa_start <= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass
class QuadratureRule:
    dim: int
    nodes: np.ndarray
    weights: np.ndarray
    index_set_descriptor: dict
    weight_family: str
    domain_descriptor: dict
    achieved_residual: float
    tolerance: float
    seed: int
    iterations: int = 0
    trace: object = None  # SolveTrace of the converging pass; not serialized

    @property
    def n(self):
        return len(self.weights)


class DesignError(RuntimeError):
    """Raised when no admissible node count converges; carries the best trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


def estimate_sparse_grid_size(d, k, exact_dim_limit=8):
    """Node count of the level-k non-nested Gauss sparse grid.

    Enumerates the exact count when affordable, otherwise the estimate
    (2d)^(k-1) / (k-1)! rounded up.
    """
    if d < 1 or k < 1:
        raise ValueError("need d >= 1 and k >= 1")
    formula = (2 * d) ** (k - 1) / math.factorial(k - 1)
    if d == 1:
        return k
    if d <= exact_dim_limit and formula <= 20000:
        return smolyak(d, k, family="legendre", growth="gauss").n
    return int(math.ceil(formula))


def level_for_index_set(index_set):
    """Smolyak level whose total-degree exactness covers the index set."""
    r = index_set.max_degree()
    return (r + 2) // 2


def _rng(seed, salt=None):
    return np.random.default_rng(seed if salt is None else [seed, salt])


def _sample_nodes(n, domain, dim, rng):
    """Latin hypercube nodes, mapped to the domain; region-infeasible nodes
    are redrawn uniformly."""
    u = np.empty((n, dim))
    for j in range(dim):
        u[:, j] = (rng.permutation(n) + rng.random(n)) / n
    if domain.kind == "box":
        lo = domain.bounds[:, 0]
        hi = domain.bounds[:, 1]
        X = lo + (hi - lo) * u
    else:
        X = ndtri(np.clip(u, 1e-15, 1.0 - 1e-15))
    for _ in range(1000):
        bad = np.array(
            [any(r.contains(x) for r in domain.regions) for x in X], dtype=bool
        )
        if not bad.any():
            break
        m = int(bad.sum())
        if domain.kind == "box":
            X[bad] = lo + (hi - lo) * rng.random((m, dim))
        else:
            X[bad] = ndtri(np.clip(rng.random((m, dim)), 1e-15, 1.0 - 1e-15))
    return X


def _fresh_weights(X, domain, total):
    n = X.shape[0]
    if domain.kind == "gaussian_unbounded":
        w = np.exp(-0.5 * np.sum(X * X, axis=1))
        return w * (total / w.sum())
    return np.full(n, total / n)


def initialize(n, domain, basis, index_set, seed):
    """Feasible starting point: Latin hypercube nodes (inverse-transformed for
    Gaussian domains) and positive weights summing to |Lambda|."""
    if n < 1:
        raise ValueError("need n >= 1")
    rng = _rng(seed)
    X = _sample_nodes(n, domain, basis.dim, rng)
    w = _fresh_weights(X, domain, float(len(index_set)))
    return DecisionVector.from_parts(X, w)


def eliminate(d_vec, count):
    """Drop the ``count`` smallest-weight nodes (ties: larger node index goes
    first); remaining weights are rescaled to the previous total."""
    if count < 0 or count >= d_vec.n:
        raise ValueError("count must satisfy 0 <= count < n")
    if count == 0:
        return d_vec.copy()
    w = d_vec.weights
    order = sorted(range(d_vec.n), key=lambda i: (w[i], -i))
    drop = set(order[:count])
    keep = [i for i in range(d_vec.n) if i not in drop]
    total = w.sum()
    new_w = w[keep]
    new_w = new_w * (total / new_w.sum())
    return DecisionVector.from_parts(d_vec.nodes[keep], new_w)


def enrich(d_vec, count, domain, seed):
    """Append ``count`` freshly initialized nodes and weights; existing node
    positions are untouched and the weight total is preserved."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = _rng(seed)
    total = float(d_vec.weights.sum())
    X_new = _sample_nodes(count, domain, d_vec.dim, rng)
    n_new = d_vec.n + count
    w_new = _fresh_weights(X_new, domain, total * count / n_new)
    X = np.vstack([d_vec.nodes, X_new])
    w = np.concatenate([d_vec.weights, w_new])
    w *= total / w.sum()
    return DecisionVector.from_parts(X, w)


def _descriptor(index_set):
    if index_set.descriptor is not None:
        return index_set.descriptor
    return {"kind": "explicit", "dim": index_set.dim, "indices": [list(a) for a in index_set]}


def design(index_set, domain, basis, cfg):
    """Compute a positive-weight rule matching all moments over the index set.

    Follows the converge / eliminate-smallest-weights / enrich-on-stagnation
    outer loop, stopping when the size stabilizes, a shrink pass fails, the
    half-set floor is reached, or the pass cap runs out.
    """
    if (0,) * index_set.dim not in index_set:
        raise ValueError("index set must contain the zero index")
    if not is_downward_closed(index_set):
        raise ValueError("index set must be downward closed")

    d = index_set.dim
    M = len(index_set)
    lower = max(len(half_set_greedy(index_set)), 1)
    k = level_for_index_set(index_set)
    est = cfg.size_estimate or estimate_sparse_grid_size(d, k)
    dof_cap = math.ceil(2.0 * M / (d + 1))
    n_hi = max(min(est, dof_cap), lower, 1)
    enrich_limit = max(est, n_hi)

    solver_cfg = replace(cfg.solver, tol=cfg.tol)
    if d > 20 and not solver_cfg.high_dim_mode:
        solver_cfg = replace(solver_cfg, high_dim_mode=True)
    # iterate against an inward-inset box so exported nodes are strictly feasible
    work_domain = domain
    if domain.kind == "box" and cfg.node_inset > domain.node_inset:
        work_domain = replace(domain, node_inset=cfg.node_inset)
    system = MomentSystem(basis, index_set, work_domain, target_scale=float(M))

    state = {"attempt": 0}

    def converge_from(dv, n_limit):
        # the attempted size ratchets upward; on failure, first retry the same
        # size from fresh decision variables once, then grow the most
        # promising state seen (a diverged pass leaves an unusable one)
        best = None
        target_n = dv.n
        restarted = set()
        while True:
            try:
                dv_out, trace = solve(system, dv, solver_cfg)
            except SolveAbort as err:
                dv_out, trace = dv, err.trace
            log.debug(
                "solve n=%d: %s after %d iters (res_aug %.3e)",
                dv_out.n, trace.outcome, trace.iterations, trace.final_res_aug,
            )
            if trace.outcome == "converged":
                return True, dv_out, trace
            score = trace.final_res_aug
            if not math.isfinite(score):
                score = math.inf
            if best is None or score < best[0]:
                best = (score, dv_out, trace)
            if target_n not in restarted:
                restarted.add(target_n)
                state["attempt"] += 1
                dv = initialize(target_n, domain, basis, index_set, [cfg.seed, state["attempt"]])
                continue
            if target_n >= n_limit:
                return False, best[1], best[2]
            count = min(
                max(1, math.ceil(cfg.enrichment_fraction * target_n)),
                n_limit - target_n,
            )
            target_n += count
            state["attempt"] += 1
            dv = enrich(best[1], target_n - best[1].n, domain, [cfg.seed, state["attempt"]])

    if cfg.n_fixed is not None:
        n0 = cfg.n_fixed
        dv = _initial_vector(n0, domain, basis, index_set, cfg)
        ok, dv, trace = converge_from(dv, n_limit=n0)
        if not ok:
            raise DesignError(
                f"no convergence at fixed n = {n0} "
                f"(best augmented residual {trace.final_res_aug:.3e})",
                trace,
            )
        return _finalize(dv, trace, system, index_set, domain, basis, cfg)

    n_start = min(max(math.ceil(cfg.kappa_start * n_hi), lower, 1), n_hi)
    dv = _initial_vector(n_start, domain, basis, index_set, cfg)
    ok, best_dv, best_trace = converge_from(dv, n_limit=enrich_limit)
    if not ok:
        raise DesignError(
            f"no convergence for any n up to the sparse-grid estimate {enrich_limit} "
            f"(best augmented residual {best_trace.final_res_aug:.3e})",
            best_trace,
        )

    kappa = cfg.kappa_start
    for _ in range(cfg.max_outer):
        n0 = best_dv.n
        if n0 <= lower:
            break
        kappa = max(kappa - 0.1, 0.05)
        # ladder target, but never shed more than ~10% of the current rule at
        # once: near the optimum large cuts rarely recover
        target = max(lower, math.ceil(kappa * n_hi), n0 - max(1, math.ceil(0.1 * n0)))
        target = min(target, n0 - 1)
        kappa = min(kappa, target / n_hi)
        dv_try = eliminate(best_dv, n0 - target)
        ok, dv2, trace2 = converge_from(dv_try, n_limit=n0)
        if not ok:
            break
        if dv2.n >= n0:
            break
        best_dv, best_trace = dv2, trace2
    return _finalize(best_dv, best_trace, system, index_set, domain, basis, cfg)


def _initial_vector(n, domain, basis, index_set, cfg):
    if cfg.initial_nodes is not None:
        X = np.asarray(cfg.initial_nodes, dtype=np.float64)
        if X.shape != (n, basis.dim):
            raise ValueError("initial_nodes shape must be (n, d)")
        w = _fresh_weights(X, domain, float(len(index_set)))
        return DecisionVector.from_parts(X, w)
    return initialize(n, domain, basis, index_set, cfg.seed)


def _finalize(dv, trace, system, index_set, domain, basis, cfg):
    M = len(index_set)
    w = dv.weights / M
    w = w / w.sum()  # probability normalization, exact
    rule_dv = DecisionVector.from_parts(dv.nodes.copy(), w)
    true_system = MomentSystem(basis, index_set, domain, target_scale=1.0)
    residual = float(np.linalg.norm(true_system.residual(rule_dv)))
    if np.any(w <= 0.0):
        raise DesignError("internal error: converged rule has a non-positive weight", trace)
    if domain.kind == "box" and float(np.sum(penalty_values(domain, rule_dv) ** 2)) > 0.0:
        raise DesignError("internal error: converged rule violates the domain", trace)
    return QuadratureRule(
        dim=dv.dim,
        nodes=rule_dv.nodes,
        weights=w,
        index_set_descriptor=_descriptor(index_set),
        weight_family=domain.weight_family,
        domain_descriptor=domain.descriptor(),
        achieved_residual=residual,
        tolerance=cfg.tol,
        seed=cfg.seed,
        iterations=trace.iterations,
        trace=trace,
    )
