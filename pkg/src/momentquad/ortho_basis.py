"""Orthonormal polynomial bases from three-term recurrences.

All weight functions are normalized to probability densities, so the constant
orthonormal polynomial equals one (b_0 = 1) and tensor-product bases multiply
per-dimension univariate evaluations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RecurrenceTable",
    "BasisFamily",
    "standard_recurrence",
    "map_to_interval",
    "basis_for_domain",
    "read_recurrence_file",
    "eval_univariate",
    "eval_univariate_derivative",
    "eval_multivariate",
    "eval_multivariate_partial",
]

FAMILIES = ("legendre", "hermite_probabilist", "chebyshev_first_kind", "custom")

_ALIASES = {
    "uniform": "legendre",
    "legendre": "legendre",
    "gaussian": "hermite_probabilist",
    "hermite": "hermite_probabilist",
    "hermite_probabilist": "hermite_probabilist",
    "chebyshev": "chebyshev_first_kind",
    "chebyshev_first_kind": "chebyshev_first_kind",
    "custom": "custom",
}


def canonical_family(name):
    try:
        return _ALIASES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown weight family {name!r}") from None


@dataclass(frozen=True, eq=False)
class RecurrenceTable:
    """Coefficients a_m, b_m of x p_m = sqrt(b_m) p_{m-1} + a_m p_m + sqrt(b_{m+1}) p_{m+1}.

    Orthonormal seeding: p_{-1} = 0, p_0 = 1/sqrt(b_0). Arrays hold m = 0..len-1;
    degrees up to len-2 are evaluable.
    """

    family: str
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.a, dtype=np.float64)
        b = np.ascontiguousarray(self.b, dtype=np.float64)
        if a.shape != b.shape or a.ndim != 1 or len(a) < 2:
            raise ValueError("recurrence arrays must be 1-D, equal length >= 2")
        if np.any(b <= 0.0):
            raise ValueError("all b_m must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def max_degree(self):
        return len(self.b) - 2

    def require_degree(self, m):
        if m > self.max_degree:
            raise ValueError(
                f"degree {m} exceeds the table (max degree {self.max_degree})"
            )


def standard_recurrence(family, m_max):
    """Recurrence table of a classical family, long enough for degree ``m_max``.

    Probability-normalized conventions: Legendre for the uniform density on
    [-1, 1], probabilists' Hermite for the standard normal density, Chebyshev
    for the arcsine density on [-1, 1]. In all cases b_0 = 1.
    """
    if m_max < 0:
        raise ValueError("m_max must be >= 0")
    fam = canonical_family(family)
    m = np.arange(m_max + 2, dtype=np.float64)
    a = np.zeros(m_max + 2)
    if fam == "legendre":
        b = np.empty(m_max + 2)
        b[0] = 1.0
        b[1:] = m[1:] ** 2 / (4.0 * m[1:] ** 2 - 1.0)
    elif fam == "hermite_probabilist":
        b = m.copy()
        b[0] = 1.0
    elif fam == "chebyshev_first_kind":
        b = np.full(m_max + 2, 0.25)
        b[0] = 1.0
        if m_max + 2 > 1:
            b[1] = 0.5
    else:
        raise ValueError("custom tables are built from explicit coefficients")
    return RecurrenceTable(fam, a, b)


def map_to_interval(rec, lo, hi):
    """Affine image of a recurrence from its canonical interval onto [lo, hi].

    The mapped polynomials are orthonormal for the affinely transported
    probability density; b_0 stays 1.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    a = center + half * rec.a
    b = half * half * rec.b
    b = b.copy()
    b[0] = rec.b[0]
    return RecurrenceTable(rec.family, a, b)


def read_recurrence_file(path):
    """Custom recurrence table from a text file with lines ``m a_m b_m``."""
    rows = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"bad recurrence line: {line!r}")
            rows[int(parts[0])] = (float(parts[1]), float(parts[2]))
    if not rows or set(rows) != set(range(len(rows))):
        raise ValueError("recurrence file must cover m = 0..m_max without gaps")
    a = np.array([rows[m][0] for m in range(len(rows))])
    b = np.array([rows[m][1] for m in range(len(rows))])
    return RecurrenceTable("custom", a, b)


def eval_univariate(rec, m, x):
    """Orthonormal p_m(x) by forward recurrence; x may be scalar or ndarray."""
    rec.require_degree(m)
    x = np.asarray(x, dtype=np.float64)
    sb = np.sqrt(rec.b)
    p_prev = np.zeros_like(x)
    p = np.full_like(x, 1.0 / sb[0])
    for k in range(m):
        p_next = ((x - rec.a[k]) * p - sb[k] * p_prev) / sb[k + 1]
        p_prev, p = p, p_next
    return p if p.ndim else float(p)


def eval_univariate_derivative(rec, m, x):
    """Derivative p_m'(x) from the differentiated three-term recurrence."""
    rec.require_degree(m)
    x = np.asarray(x, dtype=np.float64)
    sb = np.sqrt(rec.b)
    p_prev = np.zeros_like(x)
    p = np.full_like(x, 1.0 / sb[0])
    d_prev = np.zeros_like(x)
    d = np.zeros_like(x)
    for k in range(m):
        d_next = ((x - rec.a[k]) * d - sb[k] * d_prev + p) / sb[k + 1]
        p_next = ((x - rec.a[k]) * p - sb[k] * p_prev) / sb[k + 1]
        p_prev, p = p, p_next
        d_prev, d = d, d_next
    return d if d.ndim else float(d)


def basis_for_domain(domain, m_max, custom_table=None):
    """Tensor basis matching a domain: per-dimension recurrences, affinely
    mapped onto box bounds for interval families."""
    fam = canonical_family(domain.weight_family) if custom_table is None else "custom"
    if fam == "custom":
        rec = custom_table
        if rec.max_degree < m_max:
            raise ValueError("custom recurrence table too short")
        return BasisFamily.isotropic(domain.dim, rec)
    rec = standard_recurrence(fam, m_max)
    if domain.kind == "box":
        if fam == "hermite_probabilist":
            raise ValueError("the Gaussian weight lives on an unbounded domain")
        tables = tuple(
            map_to_interval(rec, float(lo), float(hi)) for lo, hi in domain.bounds
        )
        return BasisFamily(domain.dim, tables)
    if fam != "hermite_probabilist":
        raise ValueError("unbounded domains take the Gaussian weight")
    return BasisFamily.isotropic(domain.dim, rec)


@dataclass(frozen=True, eq=False)
class BasisFamily:
    """Tensor-product orthonormal basis: one recurrence table per dimension."""

    dim: int
    tables: tuple

    def __post_init__(self):
        if self.dim < 1 or len(self.tables) != self.dim:
            raise ValueError("need one recurrence table per dimension")
        object.__setattr__(self, "tables", tuple(self.tables))

    @property
    def pi0(self):
        """Value of the constant basis function (1 under probability weights)."""
        return float(np.prod([1.0 / np.sqrt(t.b[0]) for t in self.tables]))

    @classmethod
    def isotropic(cls, dim, rec):
        return cls(dim, (rec,) * dim)


def eval_multivariate(basis, alpha, x):
    """Product of per-dimension univariate evaluations at the point x."""
    x = np.asarray(x, dtype=np.float64)
    if len(alpha) != basis.dim or x.shape[-1] != basis.dim:
        raise ValueError("dimension mismatch")
    out = 1.0
    for j in range(basis.dim):
        out = out * eval_univariate(basis.tables[j], alpha[j], x[..., j])
    return out


def eval_multivariate_partial(basis, alpha, x, axis):
    """Partial derivative of the tensor basis function along one axis."""
    if not 0 <= axis < basis.dim:
        raise ValueError(f"axis {axis} out of range for dimension {basis.dim}")
    x = np.asarray(x, dtype=np.float64)
    if len(alpha) != basis.dim or x.shape[-1] != basis.dim:
        raise ValueError("dimension mismatch")
    out = 1.0
    for j in range(basis.dim):
        if j == axis:
            out = out * eval_univariate_derivative(basis.tables[j], alpha[j], x[..., j])
        else:
            out = out * eval_univariate(basis.tables[j], alpha[j], x[..., j])
    return out
