"""Positive-weight multivariate quadrature by penalized, regularized
moment matching, with sparse-grid baselines and verification tools."""

from .designer import (
    DesignConfig,
    DesignError,
    QuadratureRule,
    design,
    eliminate,
    enrich,
    estimate_sparse_grid_size,
    initialize,
)
from .domains import DomainSpec, PenaltyRegion
from .gauss_newton import SolverConfig, SolveTrace, solve
from .index_sets import (
    MultiIndexSet,
    half_set_lower_bound_total,
    half_set_size,
    hyperbolic_cross,
    total_degree,
)
from .moment_system import DecisionVector, MomentSystem
from .ortho_basis import BasisFamily, RecurrenceTable, basis_for_domain, standard_recurrence
from .sparse_grid import gauss_rule, oracle_integrate, smolyak, tensor_rule
from .verifier import exactness, lebesgue_constant, padua_points

__version__ = "0.1.0"

__all__ = [
    "BasisFamily",
    "DecisionVector",
    "DesignConfig",
    "DesignError",
    "DomainSpec",
    "MomentSystem",
    "MultiIndexSet",
    "PenaltyRegion",
    "QuadratureRule",
    "RecurrenceTable",
    "SolveTrace",
    "SolverConfig",
    "basis_for_domain",
    "design",
    "eliminate",
    "enrich",
    "estimate_sparse_grid_size",
    "exactness",
    "gauss_rule",
    "half_set_lower_bound_total",
    "half_set_size",
    "hyperbolic_cross",
    "initialize",
    "lebesgue_constant",
    "oracle_integrate",
    "padua_points",
    "smolyak",
    "solve",
    "standard_recurrence",
    "tensor_rule",
    "total_degree",
]
