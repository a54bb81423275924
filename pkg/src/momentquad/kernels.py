"""Kernel selection: compiled extension when available, numpy fallback otherwise.

Set MOMENTQUAD_PURE=1 to force the pure-Python kernels. Both implementations
produce bitwise-identical results; the benchmark in benchmarks/bench_kernels.py
compares their speed.
"""
from __future__ import annotations

import os

if os.environ.get("MOMENTQUAD_PURE"):
    from . import _kernels_py as _impl

    IMPLEMENTATION = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        IMPLEMENTATION = "compiled"
    except ImportError:
        from . import _kernels_py as _impl

        IMPLEMENTATION = "python"

poly_tables = _impl.poly_tables
poly_tables_with_deriv = _impl.poly_tables_with_deriv
tensor_products = _impl.tensor_products
jacobian_dense = _impl.jacobian_dense
