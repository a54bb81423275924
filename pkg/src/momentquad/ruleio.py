"""File formats: rule JSON/CSV (bit-exact round-trip), index-set files,
run manifests, and the bundled reference rule."""
from __future__ import annotations

import hashlib
import json
import os
import time
from importlib import resources

import numpy as np

from .designer import QuadratureRule
from .domains import DomainSpec, PenaltyRegion
from .index_sets import MultiIndexSet, hyperbolic_cross, total_degree

__all__ = [
    "save_rule",
    "load_rule",
    "index_set_from_descriptor",
    "domain_from_descriptor",
    "read_index_set_file",
    "write_index_set_file",
    "rule_from_univariate",
    "write_manifest",
    "bundled_rule_path",
    "load_bundled_rule",
]

REFERENCE_RULE = "reference_rule_d4_uniform"


def _rule_payload(rule):
    return {
        "dim": rule.dim,
        "family": rule.weight_family,
        "index_set": rule.index_set_descriptor,
        "domain": rule.domain_descriptor,
        "tolerance": rule.tolerance,
        "achieved_residual": rule.achieved_residual,
        "seed": rule.seed,
        "nodes": [[float(v) for v in row] for row in np.atleast_2d(rule.nodes)],
        "weights": [float(v) for v in rule.weights],
    }


def save_rule(rule, path, fmt=None):
    """Write a rule as JSON (canonical) or CSV (d+1 columns, weight last).

    Floats are serialized with shortest round-trip representations, so
    export/import is bit-exact.
    """
    fmt = fmt or ("csv" if str(path).endswith(".csv") else "json")
    if fmt == "json":
        tmp = f"{path}.tmp"
        with open(tmp, "w") as fh:
            json.dump(_rule_payload(rule), fh, indent=1)
            fh.write("\n")
        os.replace(tmp, path)
    elif fmt == "csv":
        tmp = f"{path}.tmp"
        with open(tmp, "w") as fh:
            fh.write(
                "# "
                + json.dumps(
                    {
                        "dim": rule.dim,
                        "family": rule.weight_family,
                        "index_set": rule.index_set_descriptor,
                        "domain": rule.domain_descriptor,
                        "tolerance": rule.tolerance,
                        "achieved_residual": rule.achieved_residual,
                        "seed": rule.seed,
                    }
                )
                + "\n"
            )
            for row, w in zip(np.atleast_2d(rule.nodes), rule.weights):
                cells = [f"{v:.17g}" for v in row] + [f"{w:.17g}"]
                fh.write(",".join(cells) + "\n")
        os.replace(tmp, path)
    else:
        raise ValueError(f"unknown rule format {fmt!r}")


def _rule_from_payload(meta, nodes, weights):
    residual = meta.get("achieved_residual")
    tolerance = meta.get("tolerance")
    return QuadratureRule(
        dim=int(meta["dim"]),
        nodes=np.asarray(nodes, dtype=np.float64).reshape(len(weights), int(meta["dim"])),
        weights=np.asarray(weights, dtype=np.float64),
        index_set_descriptor=meta["index_set"],
        weight_family=meta["family"],
        domain_descriptor=meta["domain"],
        achieved_residual=float("nan") if residual is None else float(residual),
        tolerance=float("nan") if tolerance is None else float(tolerance),
        seed=int(meta.get("seed", 0)),
    )


def load_rule(path):
    """Read a rule file (JSON or CSV, auto-detected)."""
    with open(path) as fh:
        head = fh.read(1)
        fh.seek(0)
        if head == "{":
            payload = json.load(fh)
            return _rule_from_payload(payload, payload["nodes"], payload["weights"])
        meta = None
        nodes = []
        weights = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                meta = json.loads(line[1:])
                continue
            cells = [float(c) for c in line.split(",")]
            nodes.append(cells[:-1])
            weights.append(cells[-1])
        if meta is None:
            raise ValueError(f"{path}: CSV rule file lacks its metadata header")
        return _rule_from_payload(meta, nodes, weights)


def index_set_from_descriptor(desc):
    kind = desc["kind"]
    if kind == "total":
        return total_degree(int(desc["dim"]), int(desc["order"]))
    if kind == "hyperbolic":
        return hyperbolic_cross(int(desc["dim"]), int(desc["order"]))
    if kind == "explicit":
        return MultiIndexSet(int(desc["dim"]), [tuple(a) for a in desc["indices"]])
    raise ValueError(f"unknown index-set descriptor kind {kind!r}")


def domain_from_descriptor(desc, weight_family):
    regions = tuple(
        PenaltyRegion(
            tuple(tuple(b) for b in r["bounds"]),
            tuple(r["penalty_axes"]),
            float(r.get("scale", 10.0)),
        )
        for r in desc.get("regions", ())
    )
    if desc["kind"] == "box":
        return DomainSpec.box(
            desc["bounds"], weight_family, regions, float(desc.get("weight_floor", 1e-6))
        )
    return DomainSpec(
        "gaussian_unbounded",
        weight_family,
        None,
        regions,
        float(desc.get("weight_floor", 1e-6)),
        int(desc["dim"]),
    )


def read_index_set_file(path):
    """Index set from plain text: first line ``d M``, then M exponent rows."""
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise ValueError(f"{path}: missing header")
    d, m = int(tokens[0]), int(tokens[1])
    body = tokens[2:]
    if len(body) != d * m:
        raise ValueError(f"{path}: expected {d * m} exponents, found {len(body)}")
    rows = [tuple(int(v) for v in body[i * d : (i + 1) * d]) for i in range(m)]
    return MultiIndexSet(d, rows)


def write_index_set_file(index_set, path):
    with open(path, "w") as fh:
        fh.write(f"{index_set.dim} {len(index_set)}\n")
        for alpha in index_set:
            fh.write(" ".join(map(str, alpha)) + "\n")


def rule_from_univariate(urule, tolerance=0.0):
    """Package a univariate rule in the shared rule format (d = 1)."""
    n = len(urule.weights)
    family = urule.family
    if family in ("legendre", "chebyshev_first_kind", "clenshaw_curtis"):
        domain = DomainSpec.cube(1, -1.0, 1.0, weight_family=family)
    else:
        domain = DomainSpec.gaussian(1)
    order = 2 * n - 1
    return QuadratureRule(
        dim=1,
        nodes=np.asarray(urule.nodes, dtype=np.float64).reshape(n, 1),
        weights=np.asarray(urule.weights, dtype=np.float64),
        index_set_descriptor={"kind": "total", "dim": 1, "order": order},
        weight_family=family,
        domain_descriptor=domain.descriptor(),
        achieved_residual=0.0,
        tolerance=tolerance,
        seed=0,
    )


def write_manifest(path, command, config, seed, wall_time, outcome, artifacts):
    """Atomically written record sufficient to reproduce the run."""
    payload = {
        "command": command,
        "config": config,
        "seed": seed,
        "wall_time_s": wall_time,
        "outcome": outcome,
        "artifacts": artifacts,
        "written_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
    os.replace(tmp, path)
    return payload


def bundled_rule_path(name=REFERENCE_RULE):
    return resources.files("momentquad.data").joinpath(f"{name}.json")


def load_bundled_rule(name=REFERENCE_RULE):
    """Load a bundled rule after verifying its recorded checksum."""
    ref = bundled_rule_path(name)
    blob = ref.read_bytes()
    expected = (
        resources.files("momentquad.data").joinpath(f"{name}.sha256").read_text().strip()
    )
    digest = hashlib.sha256(blob).hexdigest()
    if digest != expected:
        raise ValueError(f"bundled rule {name} fails its checksum")
    payload = json.loads(blob)
    return _rule_from_payload(payload, payload["nodes"], payload["weights"])
