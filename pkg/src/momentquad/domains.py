"""Integration domains, feasibility penalties, and penalty Jacobians.

Penalties are smooth quadratic violation measures: zero on the feasible set,
positive inside infeasible territory, with Lipschitz-continuous gradients.
Slot layout matches the decision vector: n*d node-coordinate slots (node-major)
followed by n weight slots.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

__all__ = [
    "PenaltyRegion",
    "DomainSpec",
    "node_penalties",
    "weight_penalties",
    "penalty_values",
    "penalty_jacobian",
    "read_region_file",
]


@dataclass(frozen=True)
class PenaltyRegion:
    """Axis-aligned infeasible box with per-axis quadratic exit penalties.

    ``bounds`` is one (lo, hi) pair per dimension; use -inf/inf for sides that
    do not bound the region. A node inside the region is charged, for each
    axis in ``penalty_axes``, the squared distance to the nearest finite face
    along that axis, times ``scale``.
    """

    bounds: tuple
    penalty_axes: tuple
    scale: float = 10.0
    inset: float = 0.0  # safety ring: penalties act out to this distance beyond the region

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        axes = tuple(int(a) for a in self.penalty_axes)
        if not axes:
            raise ValueError("a penalty region needs at least one penalty axis")
        for a in axes:
            lo, hi = bounds[a]
            if not (math.isfinite(lo) or math.isfinite(hi)):
                raise ValueError(f"penalty axis {a} has no finite face")
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "penalty_axes", axes)

    @property
    def dim(self):
        return len(self.bounds)

    def _face(self, axis):
        lo, hi = self.bounds[axis]
        if axis in self.penalty_axes:
            lo = lo - self.inset if math.isfinite(lo) else lo
            hi = hi + self.inset if math.isfinite(hi) else hi
        return lo, hi

    def contains(self, x):
        return all(
            self._face(j)[0] <= x[j] <= self._face(j)[1] for j in range(len(self.bounds))
        )

    def axis_penalty(self, x, axis):
        """(value, gradient) of the squared exit distance along one axis.

        Unscaled; assumes the point is inside the region.
        """
        lo, hi = self._face(axis)
        d_lo = x[axis] - lo if math.isfinite(lo) else math.inf
        d_hi = hi - x[axis] if math.isfinite(hi) else math.inf
        if d_lo <= d_hi:
            return d_lo * d_lo, 2.0 * d_lo
        return d_hi * d_hi, -2.0 * d_hi


@dataclass(frozen=True)
class DomainSpec:
    """Integration domain with its probability weight and penalty content."""

    kind: str  # "box" or "gaussian_unbounded"
    weight_family: str
    bounds: np.ndarray | None = None  # (d, 2), box only
    regions: tuple = ()
    weight_floor: float = 1e-6
    space_dim: int | None = None  # unbounded domains only
    node_inset: float = 0.0  # box shrink used while iterating, mirroring the weight floor

    def __post_init__(self):
        if self.kind not in ("box", "gaussian_unbounded"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.weight_floor <= 0:
            raise ValueError("weight_floor must be positive")
        if self.kind == "box":
            b = np.ascontiguousarray(self.bounds, dtype=np.float64)
            if b.ndim != 2 or b.shape[1] != 2:
                raise ValueError("box bounds must have shape (d, 2)")
            if np.any(b[:, 0] >= b[:, 1]):
                raise ValueError("need lo < hi in every dimension")
            object.__setattr__(self, "bounds", b)
        elif self.bounds is not None:
            raise ValueError("gaussian_unbounded takes no bounds")
        object.__setattr__(self, "regions", tuple(self.regions))

    @property
    def dim(self):
        if self.bounds is not None:
            return self.bounds.shape[0]
        if self.space_dim is not None:
            return self.space_dim
        if self.regions:
            return self.regions[0].dim
        raise ValueError("dimension not determined by this domain")

    @classmethod
    def box(cls, bounds, weight_family="uniform", regions=(), weight_floor=1e-6):
        return cls("box", weight_family, np.asarray(bounds, dtype=np.float64), regions, weight_floor)

    @classmethod
    def cube(cls, d, lo=-1.0, hi=1.0, weight_family="uniform", regions=(), weight_floor=1e-6):
        return cls.box(np.tile([lo, hi], (d, 1)), weight_family, regions, weight_floor)

    @classmethod
    def gaussian(cls, d, weight_floor=1e-6):
        return cls("gaussian_unbounded", "gaussian", None, (), weight_floor, d)

    def descriptor(self):
        out = {"kind": self.kind, "weight_floor": self.weight_floor}
        if self.bounds is not None:
            out["bounds"] = self.bounds.tolist()
        elif self.space_dim is not None:
            out["dim"] = self.space_dim
        if self.regions:
            out["regions"] = [
                {
                    "bounds": [list(b) for b in r.bounds],
                    "penalty_axes": list(r.penalty_axes),
                    "scale": r.scale,
                }
                for r in self.regions
            ]
        return out


def node_penalties(domain, X):
    """Per-coordinate quadratic violations, flattened node-major to n*d slots."""
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    out = np.zeros(n * d)
    if domain.kind == "box":
        lo = domain.bounds[:, 0] + domain.node_inset
        hi = domain.bounds[:, 1] - domain.node_inset
        viol = np.maximum(0.0, np.maximum(X - hi, lo - X))
        out[:] = (viol * viol).ravel()
    for region in domain.regions:
        for i in range(n):
            if region.contains(X[i]):
                for axis in region.penalty_axes:
                    value, _ = region.axis_penalty(X[i], axis)
                    out[i * d + axis] += region.scale * value
    return out


def weight_penalties(domain, w):
    """Quadratic violations of the weight floor: (max(0, floor - w_j))^2."""
    w = np.asarray(w, dtype=np.float64)
    viol = np.maximum(0.0, domain.weight_floor - w)
    return viol * viol


def penalty_values(domain, d_vec):
    """All (d+1)n penalty values in decision-slot order."""
    return np.concatenate(
        [node_penalties(domain, d_vec.nodes), weight_penalties(domain, d_vec.weights)]
    )


def penalty_jacobian(domain, d_vec):
    """Sparse (d+1)n x (d+1)n matrix whose rows are penalty gradients.

    Every penalty slot depends only on its own decision variable, so the
    matrix is diagonal; it is returned sparse for direct stacking under the
    moment Jacobian.
    """
    X = d_vec.nodes
    w = d_vec.weights
    n, d = X.shape
    diag = np.zeros((d + 1) * n)
    if domain.kind == "box":
        lo = domain.bounds[:, 0] + domain.node_inset
        hi = domain.bounds[:, 1] - domain.node_inset
        grad = 2.0 * np.maximum(0.0, X - hi) - 2.0 * np.maximum(0.0, lo - X)
        diag[: n * d] = grad.ravel()
    for region in domain.regions:
        for i in range(n):
            if region.contains(X[i]):
                for axis in region.penalty_axes:
                    _, g = region.axis_penalty(X[i], axis)
                    diag[i * d + axis] += region.scale * g
    viol = np.maximum(0.0, domain.weight_floor - w)
    diag[n * d :] = -2.0 * viol
    return sparse.diags(diag, format="csr")


def read_region_file(path):
    """Penalty regions from a JSON list of box descriptors.

    Each entry: {"bounds": [[lo, hi], ...], "penalty_axes": [...], "scale": s};
    null bounds mean unbounded sides.
    """
    with open(path) as fh:
        entries = json.load(fh)
    regions = []
    for e in entries:
        bounds = tuple(
            (
                -math.inf if lo is None else float(lo),
                math.inf if hi is None else float(hi),
            )
            for lo, hi in e["bounds"]
        )
        regions.append(
            PenaltyRegion(bounds, tuple(e["penalty_axes"]), float(e.get("scale", 10.0)))
        )
    return tuple(regions)
