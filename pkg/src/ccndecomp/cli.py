"""Batch front-end: verify specs, decompose components, dump Stirling
tables, integrate trajectories.  All reports are JSON with sorted keys, so a
fixed seed gives byte-identical output across runs.

Exit codes: 0 success / all checks passed, 1 a verification failed or the
integration diverged, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .basis import BasisFamily, basis_family_check, basis_from_oracle_direct
from .coupling import (
    CouplingFamily,
    coupling_eval_explicit,
    coupling_family_check,
    coupling_order,
    locally_maximal_orders,
)
from .network import DivergenceError, integrate_rk4, parse_network
from .oracle import (
    NeighborInput,
    PolynomialOracle,
    SpecFormatError,
    admissibility_check,
    oracle_specs_from_json,
    type_multiindex,
)
from .stirling import identity_report, table


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecFormatError(f"{path}: {exc}") from exc


def _write(doc, out_path: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _parse_inputs(raw) -> tuple[NeighborInput, ...]:
    out = []
    for entry in raw:
        w = entry["weight"]
        if isinstance(w, list):
            w = tuple(w)
        out.append(NeighborInput(int(entry["type"]), w, float(entry["state"])))
    return tuple(out)


def cmd_verify(args) -> int:
    net = parse_network(_load_json(args.network))
    specs = oracle_specs_from_json(_load_json(args.oracle))
    family_trials = min(args.trials, 1000)
    results = []
    all_ok = True
    for spec in specs:
        oracle = spec.build()
        try:
            monoids = [net.monoid_for(spec.type_index, j + 1) for j in range(oracle.n_types)]
        except SpecFormatError as exc:
            raise SpecFormatError(f"oracle for type {spec.type_index}: {exc}") from exc
        adm = admissibility_check(oracle, monoids, trials=args.trials, seed=args.seed, tol=args.tol)
        if isinstance(oracle, PolynomialOracle):
            fam = CouplingFamily.from_polynomial(oracle)
        else:
            fam = CouplingFamily.from_oracle(oracle)
        fam_report = coupling_family_check(
            fam, monoids, trials=family_trials, seed=args.seed, tol=args.tol
        )
        entry = {
            "oracle": spec.to_jsonable(),
            "admissibility": adm.to_jsonable(),
            "coupling_family": fam_report.to_jsonable(),
        }
        ok = adm.ok and fam_report.ok
        if isinstance(oracle, PolynomialOracle):
            bf = BasisFamily.polynomial(
                oracle.coeffs, n_types=oracle.n_types, f0=oracle.f0, target_type=oracle.target_type
            )
            basis_report = basis_family_check(
                bf, monoids, trials=family_trials, seed=args.seed, tol=args.tol
            )
            entry["basis_family"] = basis_report.to_jsonable()
            ok = ok and basis_report.ok
        results.append(entry)
        all_ok = all_ok and ok
    _write({"results": results, "summary": {"ok": all_ok}}, args.out)
    return 0 if all_ok else 1


def _decompose_point(oracle, x, inputs, to, bound):
    n = len(inputs)
    groups: dict[tuple, list] = {}
    for mask in range(1, 1 << n):
        subset = tuple(inputs[i] for i in range(n) if mask >> i & 1)
        k = type_multiindex(subset, oracle.n_types)
        if to == "coupling":
            value = coupling_eval_explicit(oracle, x, subset)
        else:
            value = basis_from_oracle_direct(oracle, bound, x, subset)
        groups.setdefault(k, []).append(value)
    internal = oracle.evaluate(x, ()) if to == "coupling" else oracle.f0(x)
    components = [{"k": list(k), "values": groups[k]} for k in sorted(groups)]
    return {
        "x": x,
        "internal": internal,
        "components": components,
    }


def cmd_decompose(args) -> int:
    specs = oracle_specs_from_json(_load_json(args.oracle))
    if len(specs) != 1:
        raise SpecFormatError("decompose expects exactly one oracle spec")
    oracle = specs[0].build()

    bound = None
    if args.bound:
        bound = tuple(int(p) for p in args.bound.split(","))
    elif oracle.order_bound is not None:
        bound = oracle.order_bound
    if args.to == "basis" and bound is None:
        print("error: finite support bound required (--bound) for basis decomposition",
              file=sys.stderr)
        return 2

    points_doc = _load_json(args.points)
    if isinstance(points_doc, dict):
        points_doc = points_doc.get("points", [points_doc])
    points = []
    for p in points_doc:
        x = float(p.get("x", 0.0))
        inputs = _parse_inputs(p.get("neighborhood", []))
        points.append(_decompose_point(oracle, x, inputs, args.to, bound))

    report = {"oracle": specs[0].to_jsonable(), "to": args.to, "points": points}
    if oracle.coeffs is not None:
        fam = CouplingFamily.from_polynomial(oracle)
        report["coupling_order"] = {
            str(j + 1): coupling_order(fam, j + 1).order for j in range(oracle.n_types)
        }
        report["locally_maximal_orders"] = sorted(
            [list(k) for k in locally_maximal_orders(fam)]
        )
    if bound is not None:
        report["bound"] = list(bound)
    _write(report, args.out)
    return 0


def cmd_stirling(args) -> int:
    if args.max > 64:
        print(f"error: --max {args.max} exceeds the table cap of 64", file=sys.stderr)
        return 2
    report = {
        "kind": args.kind,
        "r": args.r,
        "max": args.max,
        "rows": table(args.kind, args.max, args.r),
    }
    code = 0
    if args.check:
        checks = identity_report(min(args.max, 12))
        report["checks"] = checks
        code = 0 if all(checks.values()) else 1
    _write(report, args.out)
    return code


def cmd_simulate(args) -> int:
    if args.dt <= 0:
        print(f"error: --dt must be positive, got {args.dt}", file=sys.stderr)
        return 2
    net = parse_network(_load_json(args.network))
    specs = oracle_specs_from_json(_load_json(args.oracle))
    oracles = {spec.type_index: spec.build() for spec in specs}
    x0_doc = _load_json(args.x0)
    if isinstance(x0_doc, dict) and "states" in x0_doc:
        x0_doc = x0_doc["states"]
    try:
        x0 = {cell: float(x0_doc[cell]) for cell in net.cells}
    except KeyError as missing:
        raise SpecFormatError(f"x0 is missing cell {missing}") from None
    try:
        trajectory = integrate_rk4(net, oracles, x0, args.dt, args.steps)
    except DivergenceError as exc:
        _write({"error": "divergence", "step": exc.step}, args.out)
        return 1
    _write(
        {
            "dt": args.dt,
            "steps": args.steps,
            "cells": net.cells,
            "trajectory": [
                {"t": i * args.dt, "states": snap} for i, snap in enumerate(trajectory)
            ],
        },
        args.out,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ccndecomp",
        description="Verify and decompose admissible functions on weighted cell networks.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=10000)
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--out", default=None, help="write the JSON report here instead of stdout")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="run the property checkers on specs")
    p.add_argument("network")
    p.add_argument("oracle")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("decompose", parents=[common], help="per-point component values")
    p.add_argument("oracle")
    p.add_argument("--points", required=True)
    p.add_argument("--to", choices=["coupling", "basis"], default="coupling")
    p.add_argument("--bound", default=None, help="entrywise support bound, e.g. '2,2'")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("stirling", parents=[common], help="dump exact tables")
    p.add_argument("--kind", choices=["1", "2", "r1"], required=True)
    p.add_argument("--r", type=int, default=0)
    p.add_argument("--max", type=int, required=True)
    p.add_argument("--check", action="store_true", help="also run the identity cross-checks")
    p.set_defaults(func=cmd_stirling)

    p = sub.add_parser("simulate", parents=[common], help="fixed-step RK4 trajectory")
    p.add_argument("network")
    p.add_argument("oracle")
    p.add_argument("x0")
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpecFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
