"""Glued solutions built from a period-two seed and its unit shift.

Given a 2-periodic solution x and y(t) = x(t + 1), the two branches cross at
xi + i for every integer i.  On each interval (xi + i, xi + i + 1) one of them
lies above the other; a binary sequence eta picks "up" (0) or "down" (1) per
interval and the pieces glue into a solution w_eta.  The cancellation splice
reduces an m-periodic solution to a 2-periodic one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.optimize import bisect

from .scenario import PeriodicTrajectory, ScenarioError, _window_grid
from .symbolic import SymbolSequence

BISECT_XTOL = 1e-12


class DegenerateError(ScenarioError):
    """The input violates a hypothesis of the construction (e.g. 1-periodic seed)."""


class InconsistentError(ScenarioError):
    """The numbers contradict the construction (e.g. no crossing where one must exist)."""


def _grid_points(a: float, b: float, h: float) -> np.ndarray:
    n = int(round((b - a) / h))
    return a + h * np.arange(n + 1)


def crossing_events(g: Callable, a: float, b: float, h: float, tol: float) -> List[float]:
    """All zeros of ``g`` in the open interval (a, b), in increasing order.

    Grid pre-scan: a grid value with |g| <= tol is a zero (sign change or
    tangential touch); a strict sign change between neighbours is refined by
    bisection and snapped to the nearest grid point when g is within ``tol``
    there.  Three or more consecutive grid zeros mean the branches are in
    contact on an interval, which is rejected.
    """
    t = _grid_points(a, b, h)
    gv = np.asarray(g(t), dtype=float)
    zero = np.abs(gv) <= tol
    events: List[float] = []
    r = 1
    n = t.size - 1
    while r < n:
        if zero[r]:
            run = r
            while run + 1 < n and zero[run + 1]:
                run += 1
            if run - r + 1 >= 3:
                raise DegenerateError(
                    f"branches coincide on [{t[r]!r}, {t[run]!r}]; contact intervals are not supported"
                )
            events.append(float(t[r]))
            r = run + 1
            continue
        r += 1
    for r in range(n):
        if zero[r] or zero[r + 1] or gv[r] * gv[r + 1] >= 0:
            continue
        root = bisect(lambda s: float(g(s)), t[r], t[r + 1], xtol=BISECT_XTOL)
        snapped = a + h * round((root - a) / h)
        if abs(float(g(snapped))) <= tol:
            root = snapped
        events.append(float(root))
    return sorted(events)


def find_anchor(x: PeriodicTrajectory, tol: Optional[float] = None) -> float:
    """Grid point t1 maximising x(t1 + 1) - x(t1)."""
    if not math.isclose(x.period, 2.0):
        raise ValueError("find_anchor expects a 2-periodic trajectory")
    t = x.t_base + x.h * np.arange(len(x))
    diff = x(t + 1.0) - x(t)
    r = int(np.argmax(diff))
    spread = float(np.ptp(x.samples))
    threshold = 1e-9 * spread if tol is None else tol
    if not diff[r] > threshold:
        raise DegenerateError("degenerate: 1-periodic seed")
    return float(t[r])


def _unit_shift(x) -> Callable:
    return lambda t: x(np.asarray(t, dtype=float) + 1.0)


def find_crossing(x, t1: float, y=None, h: Optional[float] = None, tol: Optional[float] = None) -> float:
    """First instant xi in (t1, t1 + 1) with x(xi) == y(xi); y defaults to x(. + 1)."""
    y = _unit_shift(x) if y is None else y
    h = x.h if h is None else h
    g = lambda t: np.asarray(x(t), dtype=float) - np.asarray(y(t), dtype=float)  # noqa: E731
    gap = -float(g(t1))
    if tol is None:
        tol = 1e-9 * max(abs(gap), 1e-300)
    events = crossing_events(g, t1, t1 + 1.0, h, tol)
    if not events:
        raise InconsistentError(f"no crossing of the branches in ({t1}, {t1 + 1})")
    return events[0]


@dataclass(frozen=True)
class BranchLabeling:
    """Crossing, anchor data and the parity rule selecting the upper branch.

    On the interval (xi + i, xi + i + 1) the upper branch is x when
    ``(i + up_parity)`` is even and y otherwise.
    """

    x: PeriodicTrajectory = field(compare=False, repr=False)
    t1: float
    xi: float
    p: float
    q: float
    s1: float
    up_parity: int = 0

    @property
    def h(self) -> float:
        return self.x.h

    def branch_offset(self, i, eta_i):
        """0 selects x, 1 selects y = x(. + 1) on interval i."""
        return (np.asarray(i) + self.up_parity + np.asarray(eta_i)) % 2

    def upper(self, i: int) -> str:
        return "x" if (i + self.up_parity) % 2 == 0 else "y"

    def to_json(self) -> dict:
        return {
            "t1": self.t1,
            "xi": self.xi,
            "p": self.p,
            "q": self.q,
            "s1": self.s1,
            "up_parity": self.up_parity,
        }


def label_branches(x: PeriodicTrajectory, t1: float, xi: float) -> BranchLabeling:
    p = float(x(t1))
    q = float(x(t1 + 1.0))
    if not q > p:
        raise ValueError("anchor must satisfy x(t1 + 1) > x(t1)")
    tol = 1e-9 * (q - p)
    if not t1 < xi < t1 + 1.0:
        raise ValueError("crossing must lie in (t1, t1 + 1)")
    if abs(float(x(xi)) - float(x(xi + 1.0))) > tol:
        raise InconsistentError(f"x and y do not meet at xi = {xi}")
    # t1 + 1 lies inside interval i = 0; the branch above there is "up"
    probe = float(x(t1 + 1.0)) - float(x(t1 + 2.0))
    if abs(probe) <= tol:
        raise InconsistentError("branches indistinguishable at t1 + 1")
    up_parity = 0 if probe > 0 else 1
    return BranchLabeling(x, float(t1), float(xi), p, q, float(t1) + 1.0, up_parity)


def labeling_from_seed(x: PeriodicTrajectory) -> BranchLabeling:
    t1 = find_anchor(x)
    xi = find_crossing(x, t1)
    return label_branches(x, t1, xi)


class GluedSolution:
    """w_eta(t) = upper/lower branch on [xi + i, xi + i + 1] as chosen by eta_i."""

    def __init__(self, labeling: BranchLabeling, eta: SymbolSequence):
        if eta.alphabet_size != 2:
            raise ValueError("glued solutions need a binary sequence")
        self.labeling = labeling
        self.eta = eta

    def __repr__(self) -> str:
        return f"GluedSolution(xi={self.labeling.xi}, eta={self.eta!r})"

    def interval_index(self, t) -> np.ndarray:
        return np.floor(np.asarray(t, dtype=float) - self.labeling.xi).astype(np.int64)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        i = self.interval_index(t)
        if i.size == 0:
            return np.empty(t.shape)
        lo = int(i.min())
        symbols = self.eta.window(lo, int(i.max()) + 1)
        offset = self.labeling.branch_offset(i, symbols[i - lo])
        out = self.labeling.x(t + offset)
        return out if np.ndim(out) else float(out)

    def knot_jump(self, i: int) -> float:
        """|left limit - right limit| at the knot xi + i."""
        lab = self.labeling
        t = lab.xi + i
        left = lab.branch_offset(i - 1, self.eta.symbol_at(i - 1))
        right = lab.branch_offset(i, self.eta.symbol_at(i))
        return abs(float(lab.x(t + left)) - float(lab.x(t + right)))

    def singular_points(self):
        pts = [(self.labeling.xi % 1.0, 1.0)]
        pts += [(k % 1.0, 1.0) for k in self.labeling.x.kinks]
        return pts

    def residual_grid(self, h: float, window=None):
        return _window_grid((-4.0, 4.0) if window is None else window, h)

    def sample(self, window, h: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
        t = _window_grid(window, self.labeling.h if h is None else h)
        return t, np.asarray(self(t), dtype=float)


def glue(labeling: BranchLabeling, eta: SymbolSequence) -> GluedSolution:
    return GluedSolution(labeling, eta)


# --- cancellation -----------------------------------------------------------


@dataclass(frozen=True)
class SpliceRecord:
    kind: str
    j: int
    k: int
    t_star: float
    junction_residual: float
    period_before: int
    period_after: int

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "j": self.j,
            "k": self.k,
            "t_star": self.t_star,
            "junction_residual": self.junction_residual,
            "period_before": self.period_before,
            "period_after": self.period_after,
        }


def _integer_period(u: PeriodicTrajectory) -> int:
    m = int(round(u.period))
    if abs(u.period - m) > 1e-12:
        raise ValueError(f"trajectory period {u.period} is not an integer")
    return m


def _coincidence_tol(u: PeriodicTrajectory) -> float:
    return 1e-9 * max(float(np.ptp(u.samples)), 1e-300)


def splice(u: PeriodicTrajectory, j: int, k: int, t_star: float, tol: Optional[float] = None) -> PeriodicTrajectory:
    """Join u(t* + j) and u(t* + k): keep u up to t* + j, continue with u(. + k - j).

    The result has period m - (k - j) and is stored on the base t* + j.
    """
    m = _integer_period(u)
    if not (0 <= j < k <= m - 1):
        raise ValueError(f"splice needs 0 <= j < k <= m-1, got j={j}, k={k}, m={m}")
    tol = _coincidence_tol(u) if tol is None else tol
    a, b = t_star + j, t_star + k
    mismatch = abs(float(u(a)) - float(u(b)))
    if mismatch > tol:
        raise InconsistentError(f"junction mismatch {mismatch:.3e} exceeds {tol:.3e}")
    new_period = m - (k - j)
    n = int(round(new_period / u.h))
    t = a + u.h * np.arange(n)
    samples = u(t + (k - j))
    kinks = [0.0]
    for kink in u.kinks:
        # representative of the kink inside the kept arc [t* + k, t* + m + j]
        rep = b + np.mod(kink - b, u.period)
        if rep <= b + new_period:
            kinks.append(rep - (k - j) - a)
    return PeriodicTrajectory(samples, new_period, a, [a + kk for kk in kinks])


def _choose_t_star(u: PeriodicTrajectory) -> float:
    t = u.grid_times()
    jump = np.abs(u(t + 1.0) - u(t))
    r = int(np.argmax(jump))
    if not jump[r] > _coincidence_tol(u):
        raise DegenerateError("degenerate: trajectory is 1-periodic")
    return float(t[r])


def _shortest_coincidence(vals: np.ndarray, tol: float):
    m = vals.size
    for gap in range(1, m):
        for i in range(m):
            if abs(vals[i] - vals[(i + gap) % m]) > tol:
                continue
            kept = vals[(i + gap + np.arange(m - gap)) % m]
            if np.ptp(kept) > tol:
                return i, gap
    return None


def reduce_with_trace(u: PeriodicTrajectory) -> Tuple[PeriodicTrajectory, List[SpliceRecord]]:
    """Cancellation: reduce an m-periodic (m >= 3) solution to a 2-periodic one."""
    m = _integer_period(u)
    if m < 3:
        raise ValueError(f"reduction needs period m >= 3, got {m}")
    t_star = _choose_t_star(u)
    tol = _coincidence_tol(u)
    trace: List[SpliceRecord] = []
    while True:
        m = _integer_period(u)
        vals = u(t_star + np.arange(m))
        hit = _shortest_coincidence(vals, tol)
        if hit is not None:
            i, gap = hit
            ref = t_star + i
            junction = abs(float(u(ref)) - float(u(ref + gap)))
            u = splice(u, 0, gap, ref, tol)
            trace.append(SpliceRecord("dedupe", 0, gap, ref, junction, m, m - gap))
            t_star = ref
            continue
        if np.ptp(vals) <= tol:
            raise DegenerateError("degenerate: trajectory became 1-periodic")
        if m == 2:
            return u, trace
        imin = int(np.argmin(vals))
        t_bar = t_star + imin
        g = lambda t: u(t) - u(np.asarray(t) + (m - 1))  # noqa: E731
        if not (g(t_bar) < 0 < g(t_bar + 1.0)):
            raise InconsistentError("bisection bracket failed in the cancellation step")
        events = crossing_events(g, t_bar, t_bar + 1.0, u.h, tol)
        if not events:
            raise InconsistentError("no coincidence of u and its delay in (t_bar, t_bar + 1)")
        t_tilde = events[0]
        junction = abs(float(u(t_tilde)) - float(u(t_tilde + m - 1)))
        u = splice(u, 0, 1, t_tilde - 1.0, tol)
        trace.append(SpliceRecord("bolzano", 0, 1, t_tilde - 1.0, junction, m, m - 1))
        t_star = t_bar


def reduce_to_period_two(u: PeriodicTrajectory) -> PeriodicTrajectory:
    return reduce_with_trace(u)[0]


# --- multi-crossing alphabet ------------------------------------------------


@dataclass(frozen=True)
class AlphabetMap:
    """Crossings xi_1 < ... < xi_m in (t1, t1 + 1) and the 2^m-symbol coding.

    A choice string over {0, 1}^m (one up/down choice per sub-interval
    (xi_k, xi_{k+1})) maps to its 0-based lexicographic rank.
    """

    crossings: Tuple[float, ...]
    upper: Tuple[str, ...] = ()

    @property
    def m(self) -> int:
        return len(self.crossings)

    @property
    def size(self) -> int:
        return 2**self.m

    def strings(self) -> List[str]:
        return ["".join(bits) for bits in product("01", repeat=self.m)]

    def to_symbol(self, string: str) -> int:
        if len(string) != self.m or set(string) - {"0", "1"}:
            raise ValueError(f"expected a binary string of length {self.m}, got {string!r}")
        return int(string, 2)

    def to_string(self, symbol: int) -> str:
        if not 0 <= symbol < self.size:
            raise ValueError(f"symbol {symbol} outside 0..{self.size - 1}")
        return format(symbol, f"0{self.m}b")


def build_alphabet(x, t1: float, y=None, h: Optional[float] = None, tol: Optional[float] = None) -> AlphabetMap:
    y = _unit_shift(x) if y is None else y
    h = x.h if h is None else h
    g = lambda t: np.asarray(x(t), dtype=float) - np.asarray(y(t), dtype=float)  # noqa: E731
    if tol is None:
        tol = 1e-9 * max(abs(float(g(t1))), 1e-300)
    xs = crossing_events(g, t1, t1 + 1.0, h, tol)
    if not xs:
        raise InconsistentError(f"no crossing of the branches in ({t1}, {t1 + 1})")
    bounds = list(xs) + [xs[0] + 1.0]
    upper = tuple("x" if g(0.5 * (lo + hi)) > 0 else "y" for lo, hi in zip(bounds, bounds[1:]))
    return AlphabetMap(tuple(xs), upper)


class BranchFlip:
    """A deliberately broken gluing: w_eta with the branch flipped on [t_c, next knot).

    With t_c away from the crossing lattice the result jumps by |x - y| at t_c,
    which a residual check must catch.
    """

    def __init__(self, w: GluedSolution, t_c: float):
        self.w = w
        self.t_c = float(t_c)
        self.i = int(np.floor(self.t_c - w.labeling.xi))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.asarray(self.w(t), dtype=float)
        lab = self.w.labeling
        hit = (t >= self.t_c) & (t < lab.xi + self.i + 1)
        if np.any(hit):
            eta_i = self.w.eta.symbol_at(self.i)
            other = lab.branch_offset(self.i, 1 - eta_i)
            out = np.where(hit, lab.x(t + other), out)
        return out if out.ndim else float(out)

    def singular_points(self):
        return self.w.singular_points()

    def residual_grid(self, h: float, window=None):
        return self.w.residual_grid(h, window)
