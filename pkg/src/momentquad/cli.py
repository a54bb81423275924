"""Command-line front end: design, verify, compare, and lebesgue subcommands.

Exit codes: 0 success, 1 invalid input, 2 the computation itself failed
(non-convergence, failed verification, non-unisolvent nodes).
"""
from __future__ import annotations

import argparse
import concurrent.futures
import json
import sys
import time

import numpy as np

from .designer import DesignConfig, DesignError, design
from .domains import DomainSpec, read_region_file
from .gauss_newton import SolverConfig
from .index_sets import hyperbolic_cross, total_degree
from .ortho_basis import basis_for_domain, canonical_family, read_recurrence_file
from .ruleio import (
    bundled_rule_path,
    domain_from_descriptor,
    index_set_from_descriptor,
    load_bundled_rule,
    load_rule,
    read_index_set_file,
    rule_from_univariate,
    save_rule,
    write_manifest,
)
from .sparse_grid import gauss_rule, smolyak
from .verifier import exactness, lebesgue_constant, padua_points


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(1)


def _build_parser():
    p = _Parser(prog="momentquad", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", help="compute a positive-weight rule")
    d.add_argument("--dim", type=int, required=True)
    d.add_argument("--order", type=int, default=None)
    d.add_argument("--index-set", default="total", help="total | hyperbolic | file:<path>")
    d.add_argument("--weight", default="uniform", help="uniform | gaussian | chebyshev | file:<path>")
    d.add_argument("--domain", default=None, help="box bounds lo,hi applied to every dimension")
    d.add_argument("--region", default=None, help="file:<path> with forbidden-region boxes")
    d.add_argument("--tol", type=float, default=1e-8)
    d.add_argument("--seed", type=int, default=None)
    d.add_argument("--seeds", default=None, help="comma list; races runs, first convergence wins")
    d.add_argument("--max-outer", type=int, default=20)
    d.add_argument("--lambda", dest="lam", default="auto", help="auto | fixed:<value>")
    d.add_argument("--n-fixed", type=int, default=None)
    d.add_argument("--max-iters", type=int, default=1000)
    d.add_argument("--format", choices=("json", "csv"), default="json")
    d.add_argument("--extended", action="store_true", help="enable d > 20 / long runs")
    d.add_argument("--out", default="rule.json")
    d.add_argument("--trace", default=None)

    v = sub.add_parser("verify", help="independently check a rule file")
    v.add_argument("rule", help="rule path, or bundled:<name>")
    v.add_argument("--tol", type=float, default=1e-8)
    v.add_argument("--report", default=None, help="write the per-index error report (JSON)")

    c = sub.add_parser("compare", help="designed vs sparse-grid vs tensor node counts")
    c.add_argument("--dim", type=int, required=True)
    c.add_argument("--orders", default=None, help="comma list of orders (default: --order)")
    c.add_argument("--order", type=int, default=None)
    c.add_argument("--index-set", default="total")
    c.add_argument("--weight", default="uniform")
    c.add_argument("--domain", default=None)
    c.add_argument("--tol", type=float, default=1e-8)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", default=None, help="CSV output path (default stdout)")

    l = sub.add_parser("lebesgue", help="Lebesgue constant of an interpolation node set")
    l.add_argument("nodes", help="rule path, padua:<r>, or bundled:<name>")
    l.add_argument("--order", type=int, default=None, help="total order of the index set")
    l.add_argument("--weight", default="chebyshev")
    l.add_argument("--grid", type=int, default=200)
    l.add_argument("--out", default=None, help="write grid samples of the Lebesgue function")
    return p


def _load_index_set(spec, dim, order):
    if spec.startswith("file:"):
        s = read_index_set_file(spec[5:])
        if s.dim != dim:
            raise ValueError(f"index-set file has dimension {s.dim}, expected {dim}")
        return s
    if order is None:
        raise ValueError("--order is required with total/hyperbolic index sets")
    if spec == "total":
        return total_degree(dim, order)
    if spec == "hyperbolic":
        return hyperbolic_cross(dim, order)
    raise ValueError(f"unknown index set {spec!r}")


def _make_domain(args, dim):
    regions = ()
    if args.region:
        path = args.region[5:] if args.region.startswith("file:") else args.region
        regions = read_region_file(path)
    weight = args.weight
    custom = None
    if weight.startswith("file:"):
        custom = read_recurrence_file(weight[5:])
        family = "custom"
    else:
        family = canonical_family(weight)
    if family == "hermite_probabilist":
        if args.domain:
            raise ValueError("--domain does not apply to the Gaussian weight")
        return DomainSpec.gaussian(dim), custom
    lo, hi = -1.0, 1.0
    if args.domain:
        parts = args.domain.split(",")
        if len(parts) != 2:
            raise ValueError("--domain expects lo,hi")
        lo, hi = float(parts[0]), float(parts[1])
    return DomainSpec.cube(dim, lo, hi, weight_family=weight, regions=regions), custom


def _design_once(args, seed):
    index_set = _load_index_set(args.index_set, args.dim, args.order)
    domain, custom = _make_domain(args, args.dim)
    basis = basis_for_domain(domain, index_set.max_component() + 1, custom_table=custom)
    lam = None
    if args.lam != "auto":
        if not args.lam.startswith("fixed:"):
            raise ValueError("--lambda expects auto or fixed:<value>")
        lam = float(args.lam.split(":", 1)[1])
    solver = SolverConfig(
        tol=args.tol,
        max_iters=args.max_iters,
        lambda_override=lam,
        high_dim_mode=args.extended and args.dim > 20,
    )
    cfg = DesignConfig(
        seed=seed,
        tol=args.tol,
        max_outer=1 if args.extended else args.max_outer,
        kappa_start=1.0 if args.extended else 0.9,
        n_fixed=args.n_fixed,
        solver=solver,
    )
    return design(index_set, domain, basis, cfg)


def _design_worker(argv, seed):
    args = _build_parser().parse_args(argv)
    try:
        rule = _design_once(args, seed)
        return seed, rule, None
    except DesignError as err:
        return seed, None, str(err)


def cmd_design(args, argv):
    t0 = time.time()
    if args.seeds:
        seeds = [int(s) for s in args.seeds.split(",")]
    elif args.seed is not None:
        seeds = [args.seed]
    else:
        raise ValueError("provide --seed (or --seeds) for reproducibility")

    rule = None
    failures = []
    if len(seeds) == 1:
        try:
            rule = _design_once(args, seeds[0])
        except DesignError as err:
            failures.append((seeds[0], str(err)))
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=min(len(seeds), 4)) as pool:
            futures = {pool.submit(_design_worker, argv, s): s for s in seeds}
            for fut in concurrent.futures.as_completed(futures):
                seed, got, err = fut.result()
                if got is not None:
                    rule = got
                    pool.shutdown(cancel_futures=True)
                    break
                failures.append((seed, err))

    wall = time.time() - t0
    outcome = "converged" if rule is not None else "failed"
    artifacts = {}
    if rule is not None:
        save_rule(rule, args.out, fmt=args.format)
        artifacts["rule"] = args.out
        if args.trace and rule.trace is not None:
            rule.trace.write_csv(args.trace)
            artifacts["trace"] = args.trace
        print(
            f"designed n={rule.n} nodes (dim {rule.dim}), residual "
            f"{rule.achieved_residual:.3e}, seed {rule.seed}"
        )
    else:
        for seed, msg in failures:
            print(f"seed {seed}: {msg}", file=sys.stderr)
    write_manifest(
        f"{args.out}.manifest.json",
        "design",
        vars(args),
        rule.seed if rule is not None else seeds,
        wall,
        outcome,
        artifacts,
    )
    return 0 if rule is not None else 2


def _resolve_rule(token):
    if token.startswith("bundled:"):
        return load_bundled_rule(token[8:])
    return load_rule(token)


def _rule_context(rule):
    index_set = index_set_from_descriptor(rule.index_set_descriptor)
    domain = domain_from_descriptor(rule.domain_descriptor, rule.weight_family)
    basis = basis_for_domain(domain, index_set.max_component() + 1)
    return index_set, domain, basis


def cmd_verify(args):
    try:
        rule = _resolve_rule(args.rule)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as err:
        print(f"error: cannot read rule: {err}", file=sys.stderr)
        return 1
    index_set, _, basis = _rule_context(rule)
    report = exactness(rule, index_set, basis)
    if args.report:
        report.to_json(args.report)
    print(
        f"max moment error {report.max_error:.3e}, residual {report.epsilon:.3e}, "
        f"weights in [{report.weight_min:.3e}, {report.weight_max:.3e}]"
    )
    ok = report.max_error <= args.tol
    if report.negative_weights:
        bad = int(np.argmin(np.asarray(rule.weights)))
        print(f"negative weight at node {bad}", file=sys.stderr)
        ok = False
    elif report.weight_min <= 0.0:
        print("zero weight present", file=sys.stderr)
        ok = False
    if not ok and report.max_error > args.tol:
        print(f"moment error exceeds tolerance {args.tol:g}", file=sys.stderr)
    return 0 if ok else 2


def cmd_compare(args):
    orders = (
        [int(s) for s in args.orders.split(",")] if args.orders else [args.order]
    )
    if orders == [None]:
        raise ValueError("provide --order or --orders")
    rows = ["method,order,n,max_moment_error,min_weight"]
    for order in orders:
        index_set = _load_index_set(args.index_set, args.dim, order)
        domain, custom = _make_domain(args, args.dim)
        basis = basis_for_domain(domain, index_set.max_component() + 1, custom_table=custom)

        rule = design(
            index_set,
            domain,
            basis,
            DesignConfig(seed=args.seed, tol=args.tol),
        )
        rep = exactness(rule, index_set, basis)
        rows.append(
            f"designed,{order},{rule.n},{rep.max_error:.3e},{rep.weight_min:.3e}"
        )

        if args.dim <= 8:
            k = (index_set.max_degree() + 2) // 2
            sg = smolyak(args.dim, k, growth="gauss", rec=basis.tables[0])
            sg_rule = _as_rule(sg.nodes, sg.weights, rule)
            rep = exactness(sg_rule, index_set, basis)
            rows.append(
                f"sparse_grid,{order},{sg.n},{rep.max_error:.3e},{rep.weight_min:.3e}"
            )

            n1 = index_set.max_component() // 2 + 1
            uni = [gauss_rule(t, n1) for t in basis.tables]
            from .sparse_grid import tensor_rule

            tn, tw = tensor_rule(uni)
            t_rule = _as_rule(tn, tw, rule)
            rep = exactness(t_rule, index_set, basis)
            rows.append(
                f"tensor,{order},{len(tw)},{rep.max_error:.3e},{rep.weight_min:.3e}"
            )
    text = "\n".join(rows) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        write_manifest(
            f"{args.out}.manifest.json", "compare", vars(args), args.seed, 0.0, "ok",
            {"table": args.out},
        )
    else:
        sys.stdout.write(text)
    return 0


def _as_rule(nodes, weights, template):
    from .designer import QuadratureRule

    return QuadratureRule(
        dim=template.dim,
        nodes=np.asarray(nodes),
        weights=np.asarray(weights),
        index_set_descriptor=template.index_set_descriptor,
        weight_family=template.weight_family,
        domain_descriptor=template.domain_descriptor,
        achieved_residual=float("nan"),
        tolerance=float("nan"),
        seed=0,
    )


def cmd_lebesgue(args):
    if args.nodes.startswith("padua:"):
        r = int(args.nodes.split(":", 1)[1])
        nodes = padua_points(r)
        order = args.order if args.order is not None else r
        dim = 2
    else:
        rule = _resolve_rule(args.nodes)
        nodes = np.atleast_2d(rule.nodes)
        dim = rule.dim
        if args.order is None:
            desc = rule.index_set_descriptor
            if desc.get("kind") != "total":
                raise ValueError("--order is required for non-total index sets")
            order = int(desc["order"])
        else:
            order = args.order
    index_set = total_degree(dim, order)
    domain = DomainSpec.cube(dim, -1.0, 1.0, weight_family=args.weight)
    basis = basis_for_domain(domain, index_set.max_component() + 1)
    try:
        L, grid, vals = lebesgue_constant(
            nodes, index_set, basis, grid_resolution=args.grid, return_grid=True
        )
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    print(f"L = {L:.6g}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(",".join([f"x{j}" for j in range(grid.shape[1])]) + ",L\n")
            for row, v in zip(grid, vals):
                fh.write(",".join(f"{c:.17g}" for c in row) + f",{v:.17g}\n")
    return 0


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "design":
            return cmd_design(args, argv)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "compare":
            return cmd_compare(args)
        if args.command == "lebesgue":
            return cmd_lebesgue(args)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 1


if __name__ == "__main__":
    sys.exit(main())
