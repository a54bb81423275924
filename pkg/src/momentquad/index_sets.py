"""Downward-closed multi-index sets: constructors, combinations, half-set bounds."""
from __future__ import annotations

import itertools
from math import comb

import numpy as np

__all__ = [
    "MultiIndexSet",
    "total_degree",
    "hyperbolic_cross",
    "pairwise_interaction",
    "union",
    "minkowski_sum",
    "is_downward_closed",
    "half_set_size",
    "half_set_greedy",
    "half_set_lower_bound_total",
]


def _graded_lex_key(alpha):
    return (sum(alpha), alpha)


class MultiIndexSet:
    """Ordered set of d-variate exponent tuples.

    The ordering is graded lexicographic (by total degree, ties broken by
    ascending tuple comparison), which makes every construction of the same
    set produce the identical ordered list.
    """

    def __init__(self, dim, indices):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        seen = set()
        cleaned = []
        for alpha in indices:
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != dim:
                raise ValueError(f"index {alpha} does not have dimension {dim}")
            if any(a < 0 for a in alpha):
                raise ValueError(f"index {alpha} has a negative component")
            if alpha not in seen:
                seen.add(alpha)
                cleaned.append(alpha)
        cleaned.sort(key=_graded_lex_key)
        self.dim = dim
        self.indices = tuple(cleaned)
        self._member = frozenset(cleaned)
        self._array = None
        self.descriptor = None  # compact provenance set by named constructors

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, alpha):
        return tuple(alpha) in self._member

    def __eq__(self, other):
        return (
            isinstance(other, MultiIndexSet)
            and self.dim == other.dim
            and self.indices == other.indices
        )

    def __hash__(self):
        return hash((self.dim, self.indices))

    def __repr__(self):
        return f"MultiIndexSet(dim={self.dim}, size={len(self)})"

    def as_array(self):
        """Indices as an int64 array of shape (len(self), dim)."""
        if self._array is None:
            self._array = np.array(self.indices, dtype=np.int64).reshape(len(self.indices), self.dim)
            self._array.flags.writeable = False
        return self._array

    def max_degree(self):
        """Largest total degree |alpha| over the set."""
        return max(sum(a) for a in self.indices)

    def max_component(self):
        """Largest single exponent over the set."""
        return max(max(a) for a in self.indices)


def total_degree(d, r):
    """All alpha in N_0^d with |alpha| <= r; cardinality C(d+r, d)."""
    if d < 1 or r < 0:
        raise ValueError("need d >= 1 and r >= 0")

    def gen(prefix, remaining, depth):
        if depth == d - 1:
            for a in range(remaining + 1):
                yield prefix + (a,)
            return
        for a in range(remaining + 1):
            yield from gen(prefix + (a,), remaining - a, depth + 1)

    out = MultiIndexSet(d, gen((), r, 0))
    out.descriptor = {"kind": "total", "dim": d, "order": r}
    return out


def hyperbolic_cross(d, r):
    """All alpha with prod_j (alpha_j + 1) <= r + 1."""
    if d < 1 or r < 0:
        raise ValueError("need d >= 1 and r >= 0")
    budget = r + 1

    def gen(prefix, prod, depth):
        if depth == d:
            yield prefix
            return
        a = 0
        while prod * (a + 1) <= budget:
            yield from gen(prefix + (a,), prod * (a + 1), depth + 1)
            a += 1

    out = MultiIndexSet(d, gen((), 1, 0))
    out.descriptor = {"kind": "hyperbolic", "dim": d, "order": r}
    return out


def pairwise_interaction(d, pair_order, max_univariate_order=None):
    """Indices with at most two nonzero components.

    Nonzero components of two-variable indices are bounded by ``pair_order``;
    single-variable indices are bounded by ``max_univariate_order`` (defaults
    to ``pair_order``).
    """
    if d < 2:
        raise ValueError("pairwise interactions need d >= 2")
    if max_univariate_order is None:
        max_univariate_order = pair_order
    indices = [(0,) * d]
    for j in range(d):
        for a in range(1, max_univariate_order + 1):
            alpha = [0] * d
            alpha[j] = a
            indices.append(tuple(alpha))
    for j, k in itertools.combinations(range(d), 2):
        for a in range(1, pair_order + 1):
            for b in range(1, pair_order + 1):
                alpha = [0] * d
                alpha[j] = a
                alpha[k] = b
                indices.append(tuple(alpha))
    return MultiIndexSet(d, indices)


def union(a, b):
    """Set union with the canonical re-ordering."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return MultiIndexSet(a.dim, a.indices + b.indices)


def minkowski_sum(a, b):
    """All pairwise sums alpha + beta, deduplicated."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    sums = set()
    for alpha in a.indices:
        for beta in b.indices:
            sums.add(tuple(x + y for x, y in zip(alpha, beta)))
    return MultiIndexSet(a.dim, sums)


def is_downward_closed(s):
    """True iff every componentwise-smaller index of a member is a member.

    Checking immediate predecessors (alpha - e_j) suffices by induction.
    """
    for alpha in s.indices:
        for j in range(s.dim):
            if alpha[j] > 0:
                beta = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1 :]
                if beta not in s:
                    return False
    return True


def half_set_lower_bound_total(d, r):
    """Closed-form half-set size for a total-degree set: C(d + floor(r/2), d)."""
    if d < 1 or r < 0:
        raise ValueError("need d >= 1 and r >= 0")
    return comb(d + r // 2, d)


def _half_set_candidates(s):
    # Any feasible Theta satisfies 2*alpha in s for each member, and the
    # downward closure of a feasible Theta is feasible with no smaller size,
    # so the search may be restricted to downward-closed subsets of these.
    return [a for a in s.indices if tuple(2 * x for x in a) in s]


def half_set_greedy(s):
    """Feasible half-set built greedily in graded-lex order (a lower bound).

    Returns the found set as a list of tuples.
    """
    chosen = []
    chosen_set = set()
    for alpha in _half_set_candidates(s):
        ok = True
        for j in range(s.dim):
            if alpha[j] > 0:
                beta = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1 :]
                if beta not in chosen_set:
                    ok = False
                    break
        if not ok:
            continue
        for beta in chosen:
            if tuple(x + y for x, y in zip(alpha, beta)) not in s:
                ok = False
                break
        if ok:
            chosen.append(alpha)
            chosen_set.add(alpha)
    return chosen


def half_set_size(s, size_cap=200):
    """Exact maximum size of Theta with Theta + Theta inside ``s``.

    Branch-and-bound over downward-closed subsets of the feasible candidates,
    seeded with the greedy incumbent. Exponential in the worst case, hence the
    ``size_cap`` on |s|.
    """
    if len(s) > size_cap:
        raise ValueError(
            f"search infeasible: |s| = {len(s)} exceeds the size cap {size_cap}"
        )
    if not is_downward_closed(s):
        raise ValueError("half-set search requires a downward-closed input set")

    cands = _half_set_candidates(s)
    ncand = len(cands)
    pos = {a: i for i, a in enumerate(cands)}
    best = [len(half_set_greedy(s))]

    # predecessors of each candidate (positions), for the closure constraint
    preds = []
    for alpha in cands:
        p = []
        for j in range(s.dim):
            if alpha[j] > 0:
                beta = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1 :]
                p.append(pos[beta])
        preds.append(p)

    def dfs(start, chosen, chosen_mask):
        if len(chosen) + (ncand - start) <= best[0]:
            return
        for i in range(start, ncand):
            if len(chosen) + (ncand - i) <= best[0]:
                return
            if any(not chosen_mask[p] for p in preds[i]):
                continue
            alpha = cands[i]
            if any(
                tuple(x + y for x, y in zip(alpha, beta)) not in s for beta in chosen
            ):
                continue
            chosen.append(alpha)
            chosen_mask[i] = True
            if len(chosen) > best[0]:
                best[0] = len(chosen)
            dfs(i + 1, chosen, chosen_mask)
            chosen.pop()
            chosen_mask[i] = False

    dfs(0, [], [False] * ncand)
    return best[0]
