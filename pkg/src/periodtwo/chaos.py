"""Desk-scale certificates of the chaotic behaviour of the shift on glued solutions.

Every check works on the function side (glued solutions, time shifts, rho)
and reports the numbers its verdict rests on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .gluing import BranchLabeling
from .metric import (
    GluedMetric,
    MetricConfig,
    bebutov_distance,
    conjugacy_phi,
    continuity_modulus,
    separation_delta0,
    shift_psi,
)
from .symbolic import (
    Periodic,
    SymbolSequence,
    Window,
    bernoulli_distance,
    periodic_approximant,
    scrambled_pair,
    shift_sigma,
)

MACHINE_TOL = 1e-14
MAX_LIYORKE_M = 1000


@dataclass(frozen=True)
class EntropyReport:
    n: int
    epsilon: float
    separated_count: int
    h_estimate: float
    delta0: float

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "epsilon": self.epsilon,
            "count": self.separated_count,
            "h_estimate": self.h_estimate,
            "delta0": self.delta0,
        }


def _delta0(labeling: BranchLabeling, cfg: MetricConfig, delta0: Optional[float]) -> float:
    return separation_delta0(labeling, cfg) if delta0 is None else delta0


def orbit_distance_table(labeling: BranchLabeling, n: int, cfg: MetricConfig = MetricConfig()) -> np.ndarray:
    """d_n for pairs of words embedded in the all-zero context, indexed by XOR.

    Word integers put symbol 0 in the most significant bit, so integer order
    is lexicographic word order.  ``table[a ^ b]`` is
    max_{0<=k<n} rho(psi_k w_a, psi_k w_b).
    """
    gm = GluedMetric(labeling, cfg.truncation_M)
    table = np.zeros(2**n)
    bits = (np.arange(2**n)[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    for mask in range(1, 2**n):
        differs = bits[mask].astype(bool)
        table[mask] = max(gm.distance_from_mask(differs, -k) for k in range(n))
    return table


def entropy_estimate(
    labeling: BranchLabeling,
    n: int,
    epsilon: float,
    cfg: MetricConfig = MetricConfig(),
    delta0: Optional[float] = None,
    allow_uncertified: bool = False,
) -> EntropyReport:
    """log(#maximal (n, epsilon)-separated set) / n over the 2^n embedded words."""
    if not 1 <= n <= 14:
        raise ValueError("n must lie in 1..14")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    d0 = _delta0(labeling, cfg, delta0)
    if epsilon > d0 and not allow_uncertified:
        raise ValueError(f"epsilon {epsilon} exceeds delta0 {d0}; estimate not certified")
    table = orbit_distance_table(labeling, n, cfg)
    chosen = np.empty(0, dtype=np.int64)
    for word in range(2**n):
        if np.all(table[chosen ^ word] > epsilon):
            chosen = np.append(chosen, word)
    count = int(chosen.size)
    return EntropyReport(n, float(epsilon), count, math.log(count) / n, d0)


def coin_tossing_check(labeling: BranchLabeling, s: Periodic, cfg: MetricConfig = MetricConfig()) -> dict:
    """Orbit of phi(s) under psi visits K_{s_0}, K_{s_1}, ... and closes after k steps."""
    if not isinstance(s, Periodic):
        raise ValueError("coin_tossing_check needs a periodic sequence")
    k = s.period
    w = conjugacy_phi(labeling, s)
    membership = []
    for i in range(k + 1):
        w_i = shift_psi(w, i, labeling.h)
        symbolic = shift_sigma(s, i).symbol_at(0)
        anchor = float(w_i(labeling.s1))
        decoded = 0 if anchor == labeling.q else 1 if anchor == labeling.p else None
        membership.append(symbolic == s.symbol_at(i) and decoded == s.symbol_at(i))
    closure = [
        bebutov_distance(shift_psi(w, i + k, labeling.h), shift_psi(w, i, labeling.h), cfg)
        for i in range(k + 1)
    ]
    ok = all(membership) and max(closure) <= MACHINE_TOL
    return {
        "word": "".join(map(str, s.word)),
        "period": k,
        "membership": all(membership),
        "max_closure_defect": max(closure),
        "verdict": "pass" if ok else "fail",
    }


@dataclass(frozen=True)
class WitnessReport:
    N: int
    min_orbit_distance: float
    max_orbit_distance: float
    liminf_threshold: float
    limsup_threshold: float
    delta0: float
    agreement_depth: int
    truncation_M: int
    verdict: str
    distances: np.ndarray = field(repr=False, compare=False)

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "min": self.min_orbit_distance,
            "max": self.max_orbit_distance,
            "min_in_delta0": self.min_orbit_distance / self.delta0,
            "max_in_delta0": self.max_orbit_distance / self.delta0,
            "liminf_threshold": self.liminf_threshold,
            "limsup_threshold": self.limsup_threshold,
            "delta0": self.delta0,
            "agreement_depth": self.agreement_depth,
            "M": self.truncation_M,
            "verdict": self.verdict,
        }


def _window_bounds(labeling: BranchLabeling, m: int):
    """Interval indices j whose open interval (xi+j, xi+j+1) meets (-m, m)."""
    n1 = int(round(1.0 / labeling.h))
    x_idx = int(round(labeling.xi / labeling.h))
    mi = m * n1
    j_min = (-mi - x_idx) // n1
    j_max = -((x_idx - mi) // n1) - 1
    return j_min, j_max


def agreement_depth(labeling: BranchLabeling, a: SymbolSequence, b: SymbolSequence, N: int, cap: int) -> int:
    """Largest m <= cap such that for some 0 <= k <= N, a and b agree on every
    interval meeting (-m, m) after shifting by k."""
    lo, _ = _window_bounds(labeling, cap)
    _, hi = _window_bounds(labeling, cap)
    idx = np.arange(lo, N + hi + 1)
    differs = (a.at(idx) != b.at(idx)).astype(np.int64)
    cum = np.concatenate([[0], np.cumsum(differs)])
    ks = np.arange(N + 1)
    depth = 0
    for m in range(1, cap + 1):
        j_min, j_max = _window_bounds(labeling, m)
        count = cum[ks + j_max - lo + 1] - cum[ks + j_min - lo]
        if not np.any(count == 0):
            break
        depth = m
    return depth


def liyorke_witness(
    labeling: BranchLabeling,
    seed: int = 1,
    N: int = 4096,
    pair: Optional[Sequence[SymbolSequence]] = None,
    cfg: MetricConfig = MetricConfig(),
    delta0: Optional[float] = None,
    margin: int = 8,
) -> WitnessReport:
    """Finite-horizon proxy for liminf = 0 < limsup of rho(psi^k phi a, psi^k phi b).

    The truncation M is set past the deepest agreement window reachable within
    the horizon, so near-coincidences are resolved rather than hidden.
    """
    if N < 64:
        raise ValueError("N must be >= 64")
    a, b = scrambled_pair(seed) if pair is None else pair
    d0 = _delta0(labeling, cfg, delta0)
    depth = agreement_depth(labeling, a, b, N, MAX_LIYORKE_M - margin)
    M = depth + margin
    gm = GluedMetric(labeling, M)
    idx = np.arange(gm.j_lo, N + gm.j_hi + 1)
    differs = a.at(idx) != b.at(idx)
    width = gm.j_hi - gm.j_lo + 1
    dist = np.array([gm.distance_from_mask(differs[k:k + width], gm.j_lo) for k in range(N + 1)])
    liminf_threshold = 2.0**-depth + 2.0**-M
    limsup_threshold = d0 * (1 - 1e-6)
    ok = (
        liminf_threshold < d0
        and dist.min() <= liminf_threshold
        and dist.max() >= limsup_threshold
    )
    return WitnessReport(
        N,
        float(dist.min()),
        float(dist.max()),
        liminf_threshold,
        limsup_threshold,
        d0,
        depth,
        M,
        "pass" if ok else "fail",
        dist,
    )


def devaney_density_check(
    labeling: BranchLabeling, eta: SymbolSequence, m: int, cfg: MetricConfig = MetricConfig()
) -> dict:
    """A periodic point within 2^-m (in rho) of phi(eta)."""
    m_prime, delta = continuity_modulus(m, labeling.xi)
    nu = eta if isinstance(eta, Periodic) else periodic_approximant(eta, m_prime)
    idx = np.arange(-m_prime, m_prime + 1)
    agree = bool(np.all(eta.at(idx) == nu.at(idx)))
    rho = bebutov_distance(conjugacy_phi(labeling, eta), conjugacy_phi(labeling, nu), cfg)
    bound = 2.0**-m
    return {
        "m": m,
        "m_prime": m_prime,
        "delta": delta,
        "period": nu.period,
        "dhat": bernoulli_distance(eta, nu),
        "agree_on_core": agree,
        "bound": bound,
        "measured": rho,
        "verdict": "pass" if agree and rho <= bound else "fail",
    }


def _decode(w, labeling: BranchLabeling, length: int) -> List[Optional[int]]:
    vals = np.asarray(w(labeling.s1 + np.arange(length)), dtype=float)
    return [0 if v == labeling.q else 1 if v == labeling.p else None for v in vals]


def devaney_transitivity_check(
    labeling: BranchLabeling,
    word_u: str,
    word_v: str,
    m: int = 2,
    cfg: MetricConfig = MetricConfig(),
) -> dict:
    """Witness n >= 1 with psi^n(phi[word_v]) meeting phi[word_u]."""
    if not (0 < len(word_u) <= 16 and 0 < len(word_v) <= 16):
        raise ValueError("words must have length 1..16")
    u = [int(c) for c in word_u]
    v = [int(c) for c in word_v]
    n = len(v)
    eta = Window(tuple(v + u))
    shifted = shift_sigma(eta, n)
    symbols_ok = list(eta.window(0, n)) == v and list(shifted.window(0, len(u))) == u
    w = conjugacy_phi(labeling, eta)
    w_n = shift_psi(w, n, labeling.h)
    decoded_ok = _decode(w, labeling, n) == v and _decode(w_n, labeling, len(u)) == u
    m_prime, _ = continuity_modulus(m, labeling.xi)
    hi = max(m_prime, len(u) - 1)
    rep = Window(tuple(shifted.window(-m_prime, hi + 1)), offset=-m_prime)
    rho = bebutov_distance(w_n, conjugacy_phi(labeling, rep), cfg)
    bound = 2.0**-m
    ok = symbols_ok and decoded_ok and rho <= bound
    return {
        "word_u": word_u,
        "word_v": word_v,
        "n": n,
        "bound": bound,
        "measured": rho,
        "verdict": "pass" if ok else "fail",
    }


def sensitivity_check(
    labeling: BranchLabeling,
    eta: Window,
    m_prime: int,
    cfg: MetricConfig = MetricConfig(),
    delta0: Optional[float] = None,
) -> dict:
    """Flip eta at m'+1: agreement on [-m', m'] yet rho >= delta0 after m'+1 shifts."""
    j = m_prime + 1 - eta.offset
    if not 0 <= j < len(eta.core):
        raise ValueError("index m'+1 must lie in the core of the window sequence")
    core = list(eta.core)
    core[j] ^= 1
    nu = Window(tuple(core), eta.left, eta.right, eta.offset)
    d0 = _delta0(labeling, cfg, delta0)
    shift = m_prime + 1
    rho = bebutov_distance(
        shift_psi(conjugacy_phi(labeling, eta), shift, labeling.h),
        shift_psi(conjugacy_phi(labeling, nu), shift, labeling.h),
        cfg,
    )
    return {
        "m_prime": m_prime,
        "measured": rho,
        "delta0": d0,
        "verdict": "pass" if rho >= d0 * (1 - 1e-12) else "fail",
    }
