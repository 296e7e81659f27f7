"""Bundled subharmonics of the bump field for the cancellation reduction.

For any amplitudes 0 <= c_n <= 1 the function c_n * sin^2(pi t) on [n, n+1]
solves the bump equation; all pieces vanish at integers, so any sequence of
amplitudes glues into a solution.  Taking the amplitudes m-periodic gives an
m-periodic solution whose values at t = 1/2 + n are exactly c_n.
"""

from __future__ import annotations

from typing import Dict, Sequence, Tuple

import numpy as np

from .scenario import DEFAULT_GRID_STEP, PeriodicTrajectory, _cells

INSTANCES: Dict[str, Tuple[float, ...]] = {
    "m3": (0.2, 0.5, 0.9),
    "m4": (0.9, 0.1, 0.6, 0.3),
    "m5": (0.3, 0.7, 0.1, 0.7, 0.5),
    "m5-distinct": (0.4, 0.8, 0.2, 0.6, 1.0),
    "m6": (0.15, 0.8, 0.4, 0.95, 0.05, 0.6),
    "m6-coincident": (0.5, 0.2, 0.5, 0.8, 0.2, 0.9),
}


def amplitude_trajectory(amplitudes: Sequence[float], h: float = DEFAULT_GRID_STEP) -> PeriodicTrajectory:
    c = np.asarray(amplitudes, dtype=float)
    if np.any(c < 0) or np.any(c > 1):
        raise ValueError("amplitudes must lie in [0, 1] to solve the bump equation")
    n1 = _cells(1.0, h, "unit interval")
    k = np.arange(c.size * n1)
    s = np.sin(np.pi * (k % n1) * h) ** 2
    s[k % n1 == 0] = 0.0
    return PeriodicTrajectory(c[k // n1] * s, float(c.size), 0.0, range(c.size))


def synthetic_instance(name: str, h: float = DEFAULT_GRID_STEP) -> PeriodicTrajectory:
    try:
        amplitudes = INSTANCES[name]
    except KeyError:
        raise ValueError(f"unknown instance {name!r}; choose from {sorted(INSTANCES)}") from None
    return amplitude_trajectory(amplitudes, h)
