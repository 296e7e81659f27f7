"""The compact-open metric rho on C(R), time shifts, and the conjugacy map.

rho(f, g) = sum_{m>=1} 2^-m * th_m / (1 + th_m), th_m = max_{|t|<=m} |f - g|,
truncated at M terms (tail below 2^-M) and maximised over the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .gluing import BranchLabeling, GluedSolution, glue
from .scenario import DEFAULT_GRID_STEP
from .symbolic import SymbolSequence, Window, random_window_sequence


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class MetricConfig:
    truncation_M: int = 16
    eval_grid_step: float = DEFAULT_GRID_STEP

    def __post_init__(self):
        if self.truncation_M < 1:
            raise MetricError("truncation_M must be >= 1")
        if not self.eval_grid_step > 0:
            raise MetricError("eval_grid_step must be positive")
        n = 1.0 / self.eval_grid_step
        if abs(n - round(n)) > 1e-9 * n:
            raise MetricError("eval_grid_step must divide 1")

    @property
    def per_unit(self) -> int:
        return int(round(1.0 / self.eval_grid_step))

    @property
    def tail_bound(self) -> float:
        return 2.0**-self.truncation_M

    def grid(self) -> np.ndarray:
        n = self.truncation_M * self.per_unit
        return self.eval_grid_step * np.arange(-n, n + 1)


def _rho_from_theta(theta: np.ndarray) -> float:
    m = np.arange(1, theta.size + 1, dtype=float)
    terms = theta / (1.0 + theta) * 2.0**-m
    # smallest terms first
    return float(np.sum(terms[::-1]))


def theta_profile(diff: np.ndarray, cfg: MetricConfig) -> np.ndarray:
    """th_1..th_M from |f - g| sampled on ``cfg.grid()``."""
    c = diff.size // 2
    outward = np.maximum(diff[c:], diff[c::-1])
    running = np.maximum.accumulate(outward)
    return running[cfg.per_unit * np.arange(1, cfg.truncation_M + 1)]


def sample_window(f: Callable, cfg: MetricConfig) -> np.ndarray:
    values = np.asarray(f(cfg.grid()), dtype=float)
    if not np.all(np.isfinite(values)):
        raise MetricError("non-finite function value on the metric grid")
    return values


def distance_from_samples(a: np.ndarray, b: np.ndarray, cfg: MetricConfig) -> float:
    return _rho_from_theta(theta_profile(np.abs(a - b), cfg))


def bebutov_distance(f: Callable, g: Callable, cfg: MetricConfig = MetricConfig()) -> float:
    """Truncated rho(f, g); the true value lies in [result, result + cfg.tail_bound]."""
    return distance_from_samples(sample_window(f, cfg), sample_window(g, cfg), cfg)


def distance_report(f: Callable, g: Callable, cfg: MetricConfig = MetricConfig()) -> dict:
    return {
        "rho": bebutov_distance(f, g, cfg),
        "tail_bound": cfg.tail_bound,
        "M": cfg.truncation_M,
        "grid_step": cfg.eval_grid_step,
    }


class ShiftedFunction:
    """The view t -> f(t + s); nested shifts collapse into one."""

    def __init__(self, f: Callable, s: float):
        if isinstance(f, ShiftedFunction):
            f, s = f.f, f.s + s
        self.f = f
        self.s = float(s)

    def __call__(self, t):
        return self.f(np.asarray(t, dtype=float) + self.s)

    def __repr__(self) -> str:
        return f"ShiftedFunction({self.f!r}, {self.s})"


def shift_psi(f: Callable, s: float, grid_step: float = DEFAULT_GRID_STEP) -> Callable:
    k = s / grid_step
    if abs(k - round(k)) > 1e-9:
        raise MetricError(f"shift {s} is not a multiple of the grid step {grid_step}")
    if s == 0:
        return f
    return ShiftedFunction(f, s)


def conjugacy_phi(labeling: BranchLabeling, eta: SymbolSequence) -> GluedSolution:
    return glue(labeling, eta)


def continuity_modulus(m: int, xi: float) -> Tuple[int, float]:
    """Smallest m' with [xi - m', xi + m'] covering [-m, m], and delta = 2^-(m'+1)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    m_prime = max(1, math.ceil(m + xi - 1e-12), math.ceil(m - xi - 1e-12))
    return m_prime, 2.0 ** -(m_prime + 1)


def separation_delta0(
    labeling: BranchLabeling,
    cfg: MetricConfig = MetricConfig(),
    contexts: int = 20,
    seed: int = 0,
) -> float:
    """rho between glued solutions whose sequences differ exactly at index 0."""
    rng = np.random.default_rng(seed)
    values = []
    for _ in range(contexts):
        eta = random_window_sequence(rng, radius=cfg.truncation_M + 4)
        core = list(eta.core)
        centre = -eta.offset
        core[centre] ^= 1
        nu = Window(tuple(core), eta.left, eta.right, eta.offset)
        values.append(bebutov_distance(glue(labeling, eta), glue(labeling, nu), cfg))
    delta0 = values[0]
    if max(values) - min(values) > 1e-12:
        raise MetricError(f"delta0 depends on the context: spread {max(values) - min(values):.3e}")
    if delta0 < 1e-9:
        raise MetricError(f"degenerate scenario: delta0 = {delta0:.3e}")
    return delta0


class GluedMetric:
    """rho between glued solutions of one labeling, from the set where the sequences differ.

    |w_eta - w_nu| vanishes on intervals where eta_i == nu_i and equals the
    1-periodic profile D(t) = |x(t) - x(t + 1)| elsewhere, so th_m only needs
    maxima of D over whole or clipped unit intervals.  Requires xi on the grid.
    """

    def __init__(self, labeling: BranchLabeling, truncation_M: int = 16):
        self.labeling = labeling
        self.M = int(truncation_M)
        h = labeling.h
        self.per_unit = n1 = int(round(1.0 / h))
        xi_idx = labeling.xi / h
        if abs(xi_idx - round(xi_idx)) > 1e-9:
            raise MetricError("GluedMetric needs the crossing on the grid")
        self.xi_idx = int(round(xi_idx))
        t = labeling.xi + h * np.arange(n1 + 1)
        x = labeling.x
        prof = np.abs(x(t) - x(t + 1.0))
        self.prefix = np.maximum.accumulate(prof)
        self.suffix = np.maximum.accumulate(prof[::-1])
        self.full = float(self.prefix[-1])
        # intervals j with xi + j + 1 > -M and xi + j < M can meet I_M
        self.j_lo = -((self.M * n1 + self.xi_idx) // n1) - 1
        self.j_hi = (self.M * n1 - self.xi_idx) // n1 + 1

    def thetas(self, differs: np.ndarray, j0: int) -> np.ndarray:
        """th_1..th_M when interval j0 + r differs iff ``differs[r]``."""
        n1 = self.per_unit
        d = np.asarray(differs, dtype=bool)
        cum = np.concatenate([[0], np.cumsum(d)])

        def any_between(a, b):  # intervals a..b inclusive
            a = np.clip(a - j0, 0, d.size)
            b = np.clip(b - j0 + 1, 0, d.size)
            return np.where(b > a, cum[b] - cum[np.minimum(a, b)], 0) > 0

        def flag(j):
            r = j - j0
            ok = (r >= 0) & (r < d.size)
            return ok & d[np.clip(r, 0, max(d.size - 1, 0))]

        m = np.arange(1, self.M + 1)
        mi = m * n1
        # interval j spans grid [xi_idx + j*n1, xi_idx + (j+1)*n1]
        full_lo = -((mi + self.xi_idx) // n1)  # ceil((-mi - xi)/n1)
        full_hi = (mi - self.xi_idx) // n1 - 1
        theta = np.where(any_between(full_lo, full_hi), self.full, 0.0)
        # right end m inside interval jr, covered part [start, m]
        jr = full_hi + 1
        right_len = mi - (self.xi_idx + jr * n1)
        right_val = np.where(right_len < n1, self.prefix[np.clip(right_len, 0, n1)], 0.0)
        theta = np.maximum(theta, np.where(flag(jr), right_val, 0.0))
        # left end -m inside interval jl, covered part [-m, end]
        jl = full_lo - 1
        left_len = self.xi_idx + (jl + 1) * n1 + mi
        left_val = np.where(left_len < n1, self.suffix[np.clip(left_len, 0, n1)], 0.0)
        theta = np.maximum(theta, np.where(flag(jl), left_val, 0.0))
        return theta

    def distance_from_mask(self, differs: np.ndarray, j0: int) -> float:
        return _rho_from_theta(self.thetas(differs, j0))

    def distance(self, eta: SymbolSequence, nu: SymbolSequence, shift: int = 0) -> float:
        """rho(psi_shift w_eta, psi_shift w_nu)."""
        lo, hi = self.j_lo + shift, self.j_hi + shift
        differs = eta.window(lo, hi + 1) != nu.window(lo, hi + 1)
        return self.distance_from_mask(differs, self.j_lo)
