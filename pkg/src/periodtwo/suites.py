"""Property suites behind ``periodtwo verify``.

Each suite returns a list of ``(name, report)`` pairs; a report is a plain
dict carrying at least a ``verdict`` of "pass" or "fail".
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from . import io
from .chaos import (
    MACHINE_TOL,
    coin_tossing_check,
    devaney_density_check,
    devaney_transitivity_check,
    entropy_estimate,
    liyorke_witness,
)
from .gluing import BranchLabeling, glue, reduce_with_trace
from .metric import MetricConfig, distance_from_samples, separation_delta0
from .scenario import RESIDUAL_TOL, SampledFunction, Scenario, builtin_bump_scenario, residual_check
from .symbolic import Periodic, random_window_sequence, shift_sigma
from .synthetic import INSTANCES, synthetic_instance

Report = Tuple[str, dict]

SUITES = ("conjugacy", "entropy", "coin-tossing", "liyorke", "devaney", "residual", "cancellation")


@dataclass
class SuiteParams:
    n: int = 10
    N: int = 4096
    seed: int = 1
    m: int = 2
    tol: Optional[float] = None
    input: Optional[Path] = None
    samples: int = 200


def _verdict(ok: bool) -> str:
    return "pass" if ok else "fail"


def conjugacy_suite(lab: BranchLabeling, sc: Scenario, cfg: MetricConfig, prm: SuiteParams) -> List[Report]:
    tol = MACHINE_TOL if prm.tol is None else prm.tol
    rng = np.random.default_rng(prm.seed)
    n1, K = cfg.per_unit, 8
    grid = cfg.grid()
    # psi_k(phi eta) on the metric grid is a slice of phi eta on a widened grid
    wide = cfg.eval_grid_step * np.arange(-(cfg.truncation_M + K) * n1, (cfg.truncation_M + K) * n1 + 1)
    worst = 0.0
    for _ in range(prm.samples):
        eta = random_window_sequence(rng)
        base = np.asarray(glue(lab, eta)(wide), dtype=float)
        for k in range(-K, K + 1):
            lhs = np.asarray(glue(lab, shift_sigma(eta, k))(grid), dtype=float)
            rhs = base[(K + k) * n1:(K + k) * n1 + grid.size]
            worst = max(worst, distance_from_samples(lhs, rhs, cfg))
    report = {
        "sequences": prm.samples,
        "max_shift": K,
        "max_defect": worst,
        "tolerance": tol,
        "verdict": _verdict(worst <= tol),
    }
    return [("conjugacy", report)]


def entropy_suite(lab: BranchLabeling, sc: Scenario, cfg: MetricConfig, prm: SuiteParams) -> List[Report]:
    tol = 1e-12 if prm.tol is None else prm.tol
    d0 = separation_delta0(lab, cfg)
    rep = entropy_estimate(lab, prm.n, d0 / 2, cfg, delta0=d0)
    out = rep.to_json()
    out["expected"] = math.log(2)
    out["verdict"] = _verdict(abs(rep.h_estimate - math.log(2)) <= tol)
    return [("entropy", out)]


def coin_tossing_suite(lab: BranchLabeling, sc: Scenario, cfg: MetricConfig, prm: SuiteParams) -> List[Report]:
    reports = []
    for k in range(1, 7):
        for bits in itertools.product((0, 1), repeat=k):
            word = "".join(map(str, bits))
            reports.append((f"coin-tossing-{word}", coin_tossing_check(lab, Periodic(word), cfg)))
    return reports


def liyorke_suite(lab: BranchLabeling, sc: Scenario, cfg: MetricConfig, prm: SuiteParams) -> List[Report]:
    rep = liyorke_witness(lab, seed=prm.seed, N=prm.N, cfg=cfg)
    return [("liyorke", rep.to_json())]


def devaney_suite(lab: BranchLabeling, sc: Scenario, cfg: MetricConfig, prm: SuiteParams) -> List[Report]:
    rng = np.random.default_rng(prm.seed)
    reports = []
    for m in range(2, 6):
        worst, ok = 0.0, True
        for _ in range(50):
            r = devaney_density_check(lab, random_window_sequence(rng), m, cfg)
            worst = max(worst, r["measured"])
            ok &= r["verdict"] == "pass"
        reports.append((f"density-m{m}", {"m": m, "count": 50, "bound": 2.0**-m, "max_measured": worst, "verdict": _verdict(ok)}))
    words = ["0", "1", "00", "01", "10", "11"]
    for u, v in itertools.product(words, repeat=2):
        reports.append((f"transitivity-{u}-{v}", devaney_transitivity_check(lab, u, v, prm.m, cfg)))
    return reports


def _residual_input(path: Path, lab: BranchLabeling, sc: Scenario) -> SampledFunction:
    t, w = io.read_csv(path, ("t", "w"))
    h = sc.grid_step
    steps = np.diff(t)
    if np.max(np.abs(steps - h)) > 1e-9 * h:
        raise ValueError(f"{path}: sample spacing differs from the grid step {h}")
    side = path.with_suffix(".labeling.json")
    xi = lab.xi
    if side.exists():
        xi = float(json.loads(side.read_text())["xi"])
    singular = [(xi % 1.0, 1.0)] + [(k % 1.0, 1.0) for k in lab.x.kinks]
    return SampledFunction(t[0], h, w, singular)


def residual_suite(lab: BranchLabeling, sc: Scenario, cfg: MetricConfig, prm: SuiteParams) -> List[Report]:
    tol = RESIDUAL_TOL if prm.tol is None else prm.tol
    if prm.input is not None:
        r = residual_check(_residual_input(Path(prm.input), lab, sc), sc)
        return [("residual-input", {"input": str(prm.input), "residual": r, "tolerance": tol, "verdict": _verdict(r <= tol)})]
    x = lab.x
    reports = []
    for name, w in (("residual-seed", x), ("residual-shift", x.shifted(1.0))):
        r = residual_check(w, sc)
        reports.append((name, {"residual": r, "tolerance": tol, "verdict": _verdict(r <= tol)}))
    rng = np.random.default_rng(prm.seed)
    worst = max(residual_check(glue(lab, random_window_sequence(rng)), sc) for _ in range(100))
    reports.append(("residual-glued", {"count": 100, "residual": worst, "tolerance": tol, "verdict": _verdict(worst <= tol)}))
    return reports


def cancellation_suite(lab: BranchLabeling, sc: Scenario, cfg: MetricConfig, prm: SuiteParams) -> List[Report]:
    bump = builtin_bump_scenario(sc.grid_step)
    reports = []
    for name in INSTANCES:
        u = synthetic_instance(name, sc.grid_step)
        v, trace = reduce_with_trace(u)
        r = residual_check(v, bump, window=(v.t_base, v.t_base + v.period))
        two = v.period == 2 and v.is_periodic_with(2.0)
        not_one = not v.is_periodic_with(1.0, tol=1e-9)
        ok = two and not_one and r <= RESIDUAL_TOL
        reports.append(
            (
                f"cancellation-{name}",
                {
                    "period_in": int(u.period),
                    "period_out": v.period,
                    "splices": len(trace),
                    "residual": r,
                    "verdict": _verdict(ok),
                },
            )
        )
    return reports


SUITE_FUNCS: Dict[str, Callable[..., List[Report]]] = {
    "conjugacy": conjugacy_suite,
    "entropy": entropy_suite,
    "coin-tossing": coin_tossing_suite,
    "liyorke": liyorke_suite,
    "devaney": devaney_suite,
    "residual": residual_suite,
    "cancellation": cancellation_suite,
}


def run_suite(name: str, lab: BranchLabeling, sc: Scenario, cfg: MetricConfig, prm: SuiteParams) -> List[Report]:
    if name == "all":
        return [r for s in SUITES for r in SUITE_FUNCS[s](lab, sc, cfg, prm)]
    try:
        fn = SUITE_FUNCS[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {list(SUITES) + ['all']}") from None
    return fn(lab, sc, cfg, prm)
