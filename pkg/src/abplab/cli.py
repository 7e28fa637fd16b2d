"""Command line entry point.

Exit status: 0 all checks pass, 1 some check fails, 2 configuration error,
3 hypothesis violation, 4 unwritable output path.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import distortion, transport
from .mmspace import SpaceError, load_space, validate_metric
from .report import ReportError, emit_report, render
from .scenario import (CheckResult, EXIT_CONFIG, EXIT_FAIL, EXIT_HYPOTHESIS, EXIT_PASS, EXIT_UNWRITABLE, ConfigError,
                       ScenarioResult, apply_overrides, bundled_scenarios, load_config, run_config)

log = logging.getLogger("abplab")

OVERRIDES = {
    "K": float, "N": float, "t": float, "kind": str, "tol_eq": float, "tol_dist": float, "H": float,
    "N_prime": float,
}


def _add_overrides(p):
    p.add_argument("--K", type=float)
    p.add_argument("--N", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--kind", choices=["r1", "r2", "r1star"])
    p.add_argument("--tol-eq", dest="tol_eq", type=float)
    p.add_argument("--tol-dist", dest="tol_dist", type=float)


def _add_output(p):
    p.add_argument("--out", help="report path (default: the scenario's 'output' entry, else none)")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--print", dest="print_report", action="store_true", help="print the report to stdout")


def build_parser():
    ap = argparse.ArgumentParser(prog="abplab", description="Discrete metric-measure-space verification lab")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-space", help="check a space file")
    p.add_argument("space")
    p.add_argument("--complete-from-edges", action="store_true")
    _add_output(p)

    p = sub.add_parser("coeff", help="evaluate a distortion coefficient")
    p.add_argument("name", choices=["s", "c", "sigma", "tau", "abp", "exp"])
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--K", type=float, default=0.0)
    p.add_argument("--N", type=float, default=2.0)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--L", type=float, default=0.0)
    p.add_argument("--Theta", type=float, default=0.0)
    p.add_argument("--Phi", type=float, default=0.0)

    for name, helptext in [
        ("w2", "exact W2 with potentials and plan"),
        ("contact", "contact set of a scenario"),
        ("abp-verify", "sharp ABP estimate"),
        ("cd-check", "(K,N)-convexity and CD(K,N') along the interpolation"),
        ("fabp-check", "functional ABP estimate"),
        ("steiner", "Steiner-type neighbourhood growth"),
        ("run", "all checks listed in the scenario"),
    ]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("scenario", help="scenario JSON path or bundled scenario name")
        _add_overrides(p)
        _add_output(p)
        if name == "steiner":
            p.add_argument("--H", type=float)
        if name == "cd-check":
            p.add_argument("--N-prime", dest="N_prime", type=float)

    p = sub.add_parser("batch", help="run several scenarios concurrently")
    p.add_argument("scenarios", nargs="+")
    p.add_argument("--workers", type=int, help="worker processes (env ABPLAB_WORKERS)")
    p.add_argument("--csv", help="CSV summary path")
    p.add_argument("--out-dir", help="directory for per-scenario JSON reports")

    sub.add_parser("list", help="list bundled scenarios")
    return ap


def _overrides(args):
    return {k: getattr(args, k, None) for k in OVERRIDES}


def run_scenario(path, checks=None, overrides=None):
    """Load, validate and run one scenario; returns (result, config)."""
    cfg = apply_overrides(load_config(path), overrides)
    return run_config(cfg, checks), cfg


def _write(results, path, fmt):
    try:
        emit_report(results, path, fmt)
    except (OSError, IsADirectoryError) as exc:
        print(f"error: cannot write report to {path}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_UNWRITABLE
    return EXIT_PASS


def _scenario_command(args, checks):
    try:
        result, cfg = run_scenario(args.scenario, checks, _overrides(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for c in result.checks:
        print(c.summary())
    out = args.out or cfg.get("output")
    if out:
        code = _write([result], out, args.format)
        if code:
            return code
    if args.print_report:
        sys.stdout.write(render([result], args.format))
    return result.exit_code


def _batch_one(path):
    try:
        result, cfg = run_scenario(path)
        return result, cfg.get("name"), None
    except ConfigError as exc:
        return None, path, str(exc)


def _batch(args):
    workers = args.workers or int(os.environ.get("ABPLAB_WORKERS", "1") or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            outcomes = list(ex.map(_batch_one, args.scenarios))
    else:
        outcomes = [_batch_one(p) for p in args.scenarios]
    results, code = [], EXIT_PASS
    for res, name, err in outcomes:
        if err:
            print(f"config error in {name}: {err}", file=sys.stderr)
            code = max(code, EXIT_CONFIG)
            continue
        print(f"{res.status} {res.name}")
        results.append(res)
        code = max(code, res.exit_code) if res.exit_code != EXIT_PASS else code
        if args.out_dir:
            c = _write([res], os.path.join(args.out_dir, f"{res.name}.json"), "json")
            if c:
                return c
    if args.csv and results:
        c = _write(results, args.csv, "csv")
        if c:
            return c
    return code


def _coeff(args):
    try:
        if args.name == "s":
            v = distortion.s_kappa(args.kappa, args.theta)
        elif args.name == "c":
            v = distortion.c_kappa(args.kappa, args.theta)
        elif args.name == "sigma":
            v = distortion.sigma(args.K, args.N, args.t, args.theta)
        elif args.name == "tau":
            v = distortion.tau(args.K, args.N, args.t, args.theta)
        elif args.name == "abp":
            v = distortion.abp_coefficient(args.K, args.N, args.t, args.L, args.Theta, args.Phi)
        else:
            v = distortion.exp_bound(args.t, args.L)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print("inf" if v == float("inf") else format(v, ".15g"))
    return EXIT_PASS


def _validate_space(args):
    try:
        space = load_space(args.space, complete_from_edges=args.complete_from_edges)
    except (SpaceError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rep = validate_metric(space)
    print(f"{'PASS' if rep.ok else 'FAIL'} validate triangle_count={rep.triangle_count}")
    for key in ("diagonal", "symmetry", "positivity", "triangle", "mass"):
        for item in rep.to_dict()[key]:
            print(f"  {key}: {item}")
    if args.out:
        res = ScenarioResult(os.path.basename(args.space))
        res.checks.append(CheckResult("validate", "PASS" if rep.ok else "FAIL", rep.to_dict()))
        code = _write([res], args.out, args.format)
        if code:
            return code
    return EXIT_PASS if rep.ok else EXIT_FAIL


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    np.seterr(all="ignore")
    cmd = args.command
    if cmd == "list":
        for name in bundled_scenarios():
            print(name)
        return EXIT_PASS
    if cmd == "coeff":
        return _coeff(args)
    if cmd == "validate-space":
        return _validate_space(args)
    if cmd == "batch":
        return _batch(args)
    checks = None if cmd == "run" else [cmd]
    try:
        return _scenario_command(args, checks)
    except (transport.TransportError, ReportError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
