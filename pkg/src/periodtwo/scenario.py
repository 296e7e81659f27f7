"""Problem definitions: the field f(t, x), the period-two seed, residual checks."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .expr import EvaluationError, Node, evaluate, parse_field, variables

DEFAULT_GRID_STEP = 1.0 / 1024
RESIDUAL_TOL = 1e-3


class ScenarioError(ValueError):
    pass


def _cells(length: float, h: float, what: str) -> int:
    n = length / h
    k = int(round(n))
    if k < 1 or abs(n - k) > 1e-9 * max(1.0, n):
        raise ScenarioError(f"grid step {h!r} does not divide {what} {length!r}")
    return k


def _distance_to_lattice(t, phase: float, period: float):
    r = np.mod(np.asarray(t, dtype=float) - phase, period)
    return np.minimum(r, period - r)


class PeriodicTrajectory:
    """Samples of a P-periodic function on ``t_base + k*h``, k = 0..N-1.

    Evaluation reduces t modulo P and interpolates linearly; at grid points it
    returns the stored sample exactly.  ``kinks`` lists phases in [0, P) where
    the sampled function is not smooth (excluded by the residual check).
    """

    def __init__(self, samples, period: float, t_base: float = 0.0, kinks: Sequence[float] = ()):
        values = np.array(samples, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ScenarioError("a trajectory needs at least two samples")
        if not np.all(np.isfinite(values)):
            raise ScenarioError("trajectory samples must be finite")
        if period <= 0:
            raise ScenarioError("period must be positive")
        values.setflags(write=False)
        self.samples = values
        self.period = float(period)
        self.t_base = float(t_base)
        self.h = self.period / values.size
        self.kinks = tuple(sorted({float(np.mod(k, self.period)) for k in kinks}))

    def __len__(self) -> int:
        return self.samples.size

    def __repr__(self) -> str:
        return (
            f"PeriodicTrajectory(period={self.period}, n={self.samples.size}, "
            f"t_base={self.t_base})"
        )

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        n = self.samples.size
        u = (t - self.t_base) / self.h
        k = np.rint(u)
        on_grid = np.abs(u - k) < 1e-9
        if np.all(on_grid):
            out = self.samples[k.astype(np.int64) % n]
            return out if out.ndim else float(out)
        u = np.mod(t - self.t_base, self.period) / self.h
        k = np.rint(u)
        on_grid = np.abs(u - k) < 1e-9
        lo = np.where(on_grid, k, np.floor(u))
        frac = np.where(on_grid, 0.0, u - lo)
        lo = lo.astype(np.int64) % n
        hi = (lo + 1) % n
        s = self.samples
        out = np.where(on_grid, s[lo], (1.0 - frac) * s[lo] + frac * s[hi])
        return out if out.ndim else float(out)

    def grid_times(self) -> np.ndarray:
        return self.t_base + self.h * np.arange(self.samples.size)

    def shifted(self, s: float) -> "PeriodicTrajectory":
        """The trajectory t -> self(t + s)."""
        k = s / self.h
        kinks = [kk - s for kk in self.kinks]
        if abs(k - round(k)) < 1e-9:
            rolled = np.roll(self.samples, -int(round(k)))
            return PeriodicTrajectory(rolled, self.period, self.t_base, kinks)
        return PeriodicTrajectory(self.samples, self.period, self.t_base - s, kinks)

    def repeated(self, times: int) -> "PeriodicTrajectory":
        """Same function viewed with period ``times * period``."""
        return PeriodicTrajectory(
            np.tile(self.samples, times),
            self.period * times,
            self.t_base,
            [k + j * self.period for j in range(times) for k in self.kinks],
        )

    def singular_points(self):
        return [(k, self.period) for k in self.kinks]

    def residual_grid(self, h: float, window=None):
        if window is None:
            n = _cells(self.period, h, "trajectory period")
            return self.t_base + h * np.arange(n)
        return _window_grid(window, h)

    def is_periodic_with(self, period: float, tol: float = 0.0) -> bool:
        t = self.grid_times()
        return bool(np.max(np.abs(self(t + period) - self(t))) <= tol)


class SampledFunction:
    """A finite table ``t0 + k*h -> values[k]`` evaluated by linear interpolation."""

    def __init__(self, t0: float, h: float, values, singular: Sequence[tuple] = ()):
        self.values = np.array(values, dtype=float)
        self.values.setflags(write=False)
        self.t0 = float(t0)
        self.h = float(h)
        self.singular = list(singular)

    @property
    def t_end(self) -> float:
        return self.t0 + self.h * (self.values.size - 1)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        u = (t - self.t0) / self.h
        n = self.values.size
        if np.any(u < -1e-9) or np.any(u > n - 1 + 1e-9):
            raise ScenarioError("evaluation outside the sampled window")
        k = np.clip(np.rint(u), 0, n - 1)
        on_grid = np.abs(u - k) < 1e-9
        lo = np.clip(np.floor(u), 0, n - 2).astype(np.int64)
        frac = u - lo
        v = self.values
        out = np.where(on_grid, v[k.astype(np.int64)], (1.0 - frac) * v[lo] + frac * v[lo + 1])
        return out if out.ndim else float(out)

    def singular_points(self):
        return self.singular

    def residual_grid(self, h: float, window=None):
        lo, hi = (self.t0 + h, self.t_end - h) if window is None else window
        return _window_grid((lo, hi), h)


def _window_grid(window, h: float) -> np.ndarray:
    lo, hi = window
    k0 = math.ceil(lo / h - 1e-9)
    k1 = math.floor(hi / h + 1e-9)
    return h * np.arange(k0, k1 + 1)


def bump_field(t, u):
    """pi*sin(2 pi t)*clamp(u / sin(pi t)^2, 0, 1), set to 0 at integer t."""
    t = np.asarray(t, dtype=float)
    u = np.asarray(u, dtype=float)
    tr = np.mod(t, 1.0)
    s2 = np.sin(np.pi * tr) ** 2
    integer = (tr == 0.0) | (s2 == 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(integer, 0.0, u / np.where(integer, 1.0, s2))
    out = np.pi * np.sin(2 * np.pi * tr) * np.clip(ratio, 0.0, 1.0)
    out = np.where(integer, 0.0, out)
    return out if out.ndim else float(out)


BUMP_EXPRESSION = "pi*sin(2*pi*t)*clamp(x/(sin(pi*t)^2),0,1)"


def bump_seed_samples(h: float) -> np.ndarray:
    """sin^2(pi t) on [0, 1], 0 on [1, 2], sampled on one 2-period."""
    n1 = _cells(1.0, h, "unit interval")
    k = np.arange(2 * n1)
    tr = (k % n1) * h
    vals = np.where(k < n1, np.sin(np.pi * tr) ** 2, 0.0)
    vals[k % n1 == 0] = 0.0
    return vals


class _ExpressionField:
    def __init__(self, text: str, ast: Node):
        self.text = text
        self.ast = ast

    def __call__(self, t, u):
        return evaluate(self.ast, t, u)

    def __repr__(self) -> str:
        return f"ExpressionField({self.text!r})"


@dataclass(frozen=True)
class Scenario:
    """A 1-periodic field together with the subharmonic seed it admits."""

    field_spec: object
    seed_spec: object
    grid_step: float = DEFAULT_GRID_STEP
    seed_period: int = 2
    seed_kinks: tuple = ()
    time_period: float = 1.0
    field: Callable = field(default=None, compare=False, repr=False)

    def f(self, t, u):
        # reducing t modulo 1 makes the 1-periodicity exact
        t = np.mod(np.asarray(t, dtype=float), self.time_period)
        try:
            out = self.field(t, u)
        except EvaluationError as exc:
            raise ScenarioError(f"field evaluation failed: {exc}") from exc
        if not np.all(np.isfinite(out)):
            raise ScenarioError("field produced a non-finite value")
        return out


def _build_field(spec):
    if isinstance(spec, dict):
        if set(spec) != {"builtin"}:
            raise ScenarioError(f"unknown field keys: {sorted(spec)}")
        if spec["builtin"] != "bump":
            raise ScenarioError(f"unknown builtin field {spec['builtin']!r}")
        return bump_field
    if isinstance(spec, str):
        if spec == "bump":
            return bump_field
        ast = parse_field(spec)
        return _ExpressionField(spec, ast)
    raise ScenarioError(f"field must be a string or builtin object, got {type(spec).__name__}")


def _check_field_periodic(fn) -> None:
    # offset grid keeps removable singularities at integer t out of the probe
    t = (np.arange(64) + 0.5) / 64
    u = np.linspace(-2.0, 2.0, 64)
    tt, uu = np.meshgrid(t, u, indexing="ij")
    try:
        a = np.asarray(fn(tt, uu), dtype=float)
        b = np.asarray(fn(tt + 1.0, uu), dtype=float)
    except EvaluationError:
        return
    if np.max(np.abs(a - b)) > 1e-9 * max(1.0, float(np.max(np.abs(a)))):
        raise ScenarioError("field is not 1-periodic in t")


def make_scenario(
    field_spec,
    seed_spec,
    grid_step: float = DEFAULT_GRID_STEP,
    seed_period: int | None = None,
    seed_kinks: Sequence[float] | None = None,
) -> Scenario:
    grid_step = float(grid_step)
    if not grid_step > 0:
        raise ScenarioError("grid_step must be positive")
    _cells(1.0, grid_step, "the time period")
    fn = _build_field(field_spec)
    _check_field_periodic(fn)
    if isinstance(seed_spec, dict) and seed_spec.get("builtin") == "bump":
        period, kinks = 2, (0.0, 1.0)
    elif isinstance(seed_spec, dict) and "samples" in seed_spec:
        period, kinks = seed_spec.get("period"), ()
        if period is None:
            raise ScenarioError("sample table needs a 'period'")
    elif isinstance(seed_spec, str):
        period, kinks = 2, ()
    else:
        raise ScenarioError(f"unrecognised seed spec {seed_spec!r}")
    if seed_period is not None:
        period = seed_period
    if seed_kinks is not None:
        kinks = tuple(seed_kinks)
    if int(period) != period or period < 2:
        raise ScenarioError("seed period must be an integer >= 2")
    _cells(float(period), grid_step, "seed period")
    return Scenario(field_spec, seed_spec, grid_step, int(period), tuple(kinks), 1.0, fn)


def builtin_bump_scenario(grid_step: float = DEFAULT_GRID_STEP) -> Scenario:
    return make_scenario({"builtin": "bump"}, {"builtin": "bump"}, grid_step)


SCENARIO_KEYS = {"field", "seed", "grid_step", "seed_period", "seed_kinks"}


def scenario_from_dict(data: dict, grid_step: float | None = None) -> Scenario:
    unknown = set(data) - SCENARIO_KEYS
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {sorted(unknown)}")
    if "field" not in data or "seed" not in data:
        raise ScenarioError("scenario needs 'field' and 'seed'")
    h = grid_step if grid_step is not None else data.get("grid_step", DEFAULT_GRID_STEP)
    return make_scenario(
        data["field"], data["seed"], h, data.get("seed_period"), data.get("seed_kinks")
    )


def load_scenario(path, grid_step: float | None = None) -> Scenario:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: scenario must be a JSON object")
    return scenario_from_dict(data, grid_step)


def _wrap_jump_tolerance(values: np.ndarray) -> float:
    # steps touching the wrap are left out so a single bad end sample cannot vouch for itself
    steps = np.abs(np.diff(values[1:-1]))
    spread = float(np.ptp(values)) if values.size else 0.0
    return 4.0 * float(steps.max(initial=0.0)) + 1e-9 * max(spread, 1.0)


def trajectory_from_table(samples, period: float, h: float, kinks=()) -> PeriodicTrajectory:
    """Validate a sample table covering one period.

    Accepts either N = period/h samples (wrap checked against the typical
    step) or N + 1 samples whose last entry repeats the first.
    """
    values = np.asarray(samples, dtype=float)
    n = _cells(float(period), h, "seed period")
    if values.size == n + 1:
        if abs(values[-1] - values[0]) > 1e-9 * max(float(np.ptp(values)), 1.0):
            raise ScenarioError("wrap discontinuity: last sample differs from first")
        values = values[:-1]
    elif values.size == n:
        if abs(values[-1] - values[0]) > _wrap_jump_tolerance(values):
            raise ScenarioError("wrap discontinuity between last and first sample")
    else:
        raise ScenarioError(f"expected {n} samples for period {period}, got {values.size}")
    return PeriodicTrajectory(values, period, 0.0, kinks)


def materialize_seed(sc: Scenario) -> PeriodicTrajectory:
    h = sc.grid_step
    spec = sc.seed_spec
    if isinstance(spec, dict) and spec.get("builtin") == "bump":
        if sc.seed_period != 2:
            raise ScenarioError("the builtin seed has period 2")
        return PeriodicTrajectory(bump_seed_samples(h), 2.0, 0.0, sc.seed_kinks)
    if isinstance(spec, dict):
        return trajectory_from_table(spec["samples"], sc.seed_period, h, sc.seed_kinks)
    ast = parse_field(spec)
    if "x" in variables(ast):
        raise ScenarioError("a seed expression may only depend on t")
    n = _cells(float(sc.seed_period), h, "seed period")
    t = h * np.arange(n + 1)
    try:
        values = np.asarray(evaluate(ast, t, 0.0), dtype=float)
    except EvaluationError as exc:
        raise ScenarioError(f"seed evaluation failed: {exc}") from exc
    return trajectory_from_table(values, sc.seed_period, h, sc.seed_kinks)


def residual_check(w, sc: Scenario, exclusion_radius: float | None = None, window=None) -> float:
    """max |D_h w(t) - f(t, w(t))| over the grid, skipping singular points.

    D_h is the central difference with the scenario grid step.  Grid points
    within ``exclusion_radius`` (default 2h) of a knot or seed kink are skipped.
    """
    h = sc.grid_step
    radius = 2 * h if exclusion_radius is None else float(exclusion_radius)
    if radius < 0:
        raise ValueError("exclusion_radius must be >= 0")
    t = w.residual_grid(h, window)
    keep = np.ones(t.shape, dtype=bool)
    for phase, period in w.singular_points():
        keep &= _distance_to_lattice(t, phase, period) > radius + 1e-12
    t = t[keep]
    if t.size == 0:
        return 0.0
    value = np.asarray(w(t), dtype=float)
    slope = (np.asarray(w(t + h)) - np.asarray(w(t - h))) / (2 * h)
    res = np.abs(slope - sc.f(t, value))
    if not np.all(np.isfinite(res)):
        raise ScenarioError("non-finite residual")
    return float(res.max())
