"""Command-line driver.

Exit codes: 0 success, 1 usage or configuration error, 2 failed check or
degenerate input.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import io
from .chaos import (
    devaney_density_check,
    devaney_transitivity_check,
    entropy_estimate,
    liyorke_witness,
)
from .gluing import DegenerateError, InconsistentError, glue, labeling_from_seed, reduce_with_trace
from .metric import MetricConfig, distance_report, separation_delta0
from .scenario import (
    DEFAULT_GRID_STEP,
    PeriodicTrajectory,
    Scenario,
    ScenarioError,
    builtin_bump_scenario,
    load_scenario,
    materialize_seed,
)
from .suites import SUITES, SuiteParams, run_suite
from .symbolic import bernoulli_distance, parse_sequence
from .synthetic import INSTANCES, synthetic_instance

GRID_ENV = "BEBUTOV_GRID_STEP"


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _grid_step() -> Optional[float]:
    raw = os.environ.get(GRID_ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        h = float(Fraction(raw.strip()))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"{GRID_ENV}={raw!r} is not a number") from None
    if not h > 0:
        raise UsageError(f"{GRID_ENV} must be positive")
    return h


def _scenario(name: str) -> Scenario:
    h = _grid_step()
    if name == "bump":
        return builtin_bump_scenario(DEFAULT_GRID_STEP if h is None else h)
    path = Path(name)
    if not path.is_file():
        raise UsageError(f"scenario {name!r} is neither 'bump' nor a readable file")
    return load_scenario(path.resolve(), h)


def _window(text: str):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"--window expects 'LO,HI', got {text!r}") from None
    if not lo < hi:
        raise UsageError("--window needs LO < HI")
    return lo, hi


def _emit(obj, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(io.dumps(obj))
    else:
        io.write_json(out, obj)


def _setup(args):
    sc = _scenario(args.scenario)
    lab = labeling_from_seed(materialize_seed(sc))
    return sc, lab, MetricConfig(eval_grid_step=sc.grid_step)


def _require_pass(name: str, report: dict) -> None:
    if report.get("verdict") != "pass":
        raise CheckFailed(name)


def cmd_glue(args) -> None:
    sc, lab, _ = _setup(args)
    eta = parse_sequence(args.eta)
    t, w = glue(lab, eta).sample(_window(args.window), sc.grid_step)
    out = Path(args.out)
    io.write_csv(out, ("t", "w"), t, w)
    labeling = lab.to_json()
    labeling["eta"] = eta.to_json()
    labeling["grid_step"] = sc.grid_step
    io.write_json(out.with_suffix(".labeling.json"), labeling)


def _read_trajectory(path: str, period: Optional[int]) -> PeriodicTrajectory:
    if period is None:
        raise UsageError("--input needs --period")
    t, v = io.read_csv(path, ("t", "value"))
    h = float(t[1] - t[0])
    n = int(round(period / h))
    if abs(n * h - period) > 1e-9 or np.max(np.abs(np.diff(t) - h)) > 1e-9 * h:
        raise ScenarioError(f"{path}: samples are not uniform over period {period}")
    if v.size == n + 1:
        if abs(v[-1] - v[0]) > 1e-9 * max(np.ptp(v), 1e-300):
            raise ScenarioError(f"{path}: endpoint does not close the period")
        v = v[:-1]
    elif v.size != n:
        raise ScenarioError(f"{path}: expected {n} or {n + 1} samples, got {v.size}")
    return PeriodicTrajectory(v, float(period), float(t[0]))


def cmd_reduce(args) -> None:
    if (args.instance is None) == (args.input is None):
        raise UsageError("reduce needs exactly one of --instance or --input")
    if args.instance is not None:
        h = _grid_step()
        u = synthetic_instance(args.instance, DEFAULT_GRID_STEP if h is None else h)
    else:
        u = _read_trajectory(args.input, args.period)
    v, trace = reduce_with_trace(u)
    out = Path(args.out)
    io.write_csv(out, ("t", "value"), v.grid_times(), v.samples)
    io.write_json(
        out.with_suffix(".trace.json"),
        {
            "period_in": int(round(u.period)),
            "period_out": int(round(v.period)),
            "t_base": v.t_base,
            "splices": [r.to_json() for r in trace],
        },
    )


def cmd_distance(args) -> None:
    a, b = parse_sequence(args.a), parse_sequence(args.b)
    if args.metric == "dhat":
        _emit({"dhat": bernoulli_distance(a, b, args.tol or 1e-12), "precision": args.tol or 1e-12}, args.out)
        return
    sc = _scenario(args.scenario)
    lab = labeling_from_seed(materialize_seed(sc))
    cfg = MetricConfig(args.M, sc.grid_step)
    _emit(distance_report(glue(lab, a), glue(lab, b), cfg), args.out)


def cmd_entropy(args) -> None:
    sc, lab, cfg = _setup(args)
    d0 = separation_delta0(lab, cfg)
    eps = d0 / 2 if args.eps is None else args.eps
    rep = entropy_estimate(lab, args.n, eps, cfg, delta0=d0, allow_uncertified=args.allow_uncertified)
    _emit(rep.to_json(), args.out)


def cmd_verify(args) -> None:
    sc, lab, cfg = _setup(args)
    prm = SuiteParams(n=args.n, N=args.N, seed=args.seed, m=args.m, tol=args.tol, input=args.input)
    reports = run_suite(args.suite, lab, sc, cfg, prm)
    if args.out is None:
        sys.stdout.write(io.dumps(dict(reports)))
    else:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        for name, rep in reports:
            io.write_json(outdir / f"{name}.json", rep)
    failed = [name for name, rep in reports if rep.get("verdict") != "pass"]
    if failed:
        raise CheckFailed(", ".join(failed))


def cmd_witness(args) -> None:
    sc, lab, cfg = _setup(args)
    rep = liyorke_witness(lab, seed=args.seed, N=args.N, cfg=cfg).to_json()
    _emit(rep, args.out)
    _require_pass("witness-liyorke", rep)


def cmd_transitivity(args) -> None:
    sc, lab, cfg = _setup(args)
    rep = devaney_transitivity_check(lab, args.u, args.v, args.m, cfg)
    _emit(rep, args.out)
    _require_pass("transitivity", rep)


def cmd_density(args) -> None:
    sc, lab, cfg = _setup(args)
    rep = devaney_density_check(lab, parse_sequence(args.eta), args.m, cfg)
    _emit(rep, args.out)
    _require_pass("density", rep)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--scenario", default="bump", help="'bump' or a scenario JSON path")
    common.add_argument("--out", help="output path (stdout for JSON when omitted)")
    common.add_argument("--tol", type=float, help="tolerance override")

    p = _Parser(prog="periodtwo", description="Glued solutions and chaos checks for 1-periodic scalar ODEs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("glue", parents=[common], help="sample a glued solution to CSV")
    g.add_argument("--eta", required=True, help="sequence literal, e.g. periodic:01")
    g.add_argument("--window", default="-4,4")
    g.set_defaults(func=cmd_glue, need_out=True)

    r = sub.add_parser("reduce", parents=[common], help="reduce an m-periodic solution to period two")
    r.add_argument("--instance", choices=sorted(INSTANCES))
    r.add_argument("--input", help="CSV with header t,value covering one period")
    r.add_argument("--period", type=int)
    r.set_defaults(func=cmd_reduce, need_out=True)

    d = sub.add_parser("distance", parents=[common], help="rho between glued solutions or dhat between sequences")
    d.add_argument("--a", required=True)
    d.add_argument("--b", required=True)
    d.add_argument("--metric", choices=("rho", "dhat"), default="rho")
    d.add_argument("--M", type=int, default=16, help="truncation of rho")
    d.set_defaults(func=cmd_distance)

    e = sub.add_parser("entropy", parents=[common], help="separated-set entropy estimate")
    e.add_argument("--n", type=int, default=10)
    e.add_argument("--eps", type=float, help="separation (default delta0/2)")
    e.add_argument("--allow-uncertified", action="store_true", help="accept eps above delta0")
    e.set_defaults(func=cmd_entropy)

    v = sub.add_parser("verify", parents=[common], help="run a property suite; --out names a report directory")
    v.add_argument("--suite", required=True, choices=list(SUITES) + ["all"])
    v.add_argument("--n", type=int, default=10)
    v.add_argument("--N", type=int, default=4096)
    v.add_argument("--m", type=int, default=2)
    v.add_argument("--seed", type=int, default=1)
    v.add_argument("--input", help="glued CSV (t,w) for the residual suite")
    v.set_defaults(func=cmd_verify)

    w = sub.add_parser("witness-liyorke", parents=[common], help="finite-horizon scrambled-pair witness")
    w.add_argument("--seed", type=int, default=1)
    w.add_argument("--N", type=int, default=4096)
    w.set_defaults(func=cmd_witness)

    t = sub.add_parser("transitivity", parents=[common], help="transitivity witness for two words")
    t.add_argument("--u", required=True)
    t.add_argument("--v", required=True)
    t.add_argument("--m", type=int, default=2)
    t.set_defaults(func=cmd_transitivity)

    n = sub.add_parser("density", parents=[common], help="periodic point near phi(eta)")
    n.add_argument("--eta", required=True)
    n.add_argument("--m", type=int, default=2)
    n.set_defaults(func=cmd_density)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "need_out", False) and args.out is None:
            raise UsageError(f"{args.command} needs --out")
        args.func(args)
    except UsageError as exc:
        print(f"periodtwo: error: {exc}", file=sys.stderr)
        return 1
    except (DegenerateError, InconsistentError) as exc:
        print(f"periodtwo: {exc}", file=sys.stderr)
        return 2
    except CheckFailed as exc:
        print(f"periodtwo: failed: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"periodtwo: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
