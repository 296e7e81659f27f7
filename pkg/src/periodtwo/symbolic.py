"""Two-sided symbol sequences, the shift map and the metric on sequence space.

Sequences come in three structural forms so that equality and periodicity
can be decided exactly:

* :class:`Periodic` -- ``word[i mod len(word)]``;
* :class:`Window` -- a finite core with periodic fills to either side;
* :class:`RuleBased` -- a named deterministic index rule (dense orbit,
  scrambled pair, pseudorandom bits).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Tuple

import numpy as np

DEFAULT_PRECISION = 1e-12


class SequenceError(ValueError):
    pass


def _as_word(word, alphabet_size: int) -> Tuple[int, ...]:
    if isinstance(word, str):
        try:
            word = [int(c, 36) for c in word]
        except ValueError as exc:
            raise SequenceError(f"bad symbol in word {word!r}") from exc
    out = tuple(int(s) for s in word)
    if any(s < 0 or s >= alphabet_size for s in out):
        raise SequenceError(f"symbols of {out} exceed alphabet size {alphabet_size}")
    return out


class SymbolSequence:
    """Common interface: ``at(indices)``, ``symbol_at(i)``, ``shift(k)``."""

    alphabet_size: int

    def at(self, indices) -> np.ndarray:
        raise NotImplementedError

    def symbol_at(self, i: int) -> int:
        return int(self.at(np.array([i], dtype=np.int64))[0])

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Symbols at indices lo..hi-1."""
        return self.at(np.arange(lo, hi, dtype=np.int64))

    def shift(self, k: int) -> "SymbolSequence":
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Periodic(SymbolSequence):
    word: Tuple[int, ...]
    alphabet_size: int = 2

    def __post_init__(self):
        if self.alphabet_size < 2:
            raise SequenceError("alphabet size must be >= 2")
        object.__setattr__(self, "word", _as_word(self.word, self.alphabet_size))
        if not self.word:
            raise SequenceError("periodic word must be non-empty")

    @property
    def period(self) -> int:
        return len(self.word)

    def at(self, indices) -> np.ndarray:
        idx = np.asarray(indices, dtype=np.int64)
        return np.asarray(self.word, dtype=np.int64)[idx % len(self.word)]

    def shift(self, k: int) -> "Periodic":
        k %= len(self.word)
        return Periodic(self.word[k:] + self.word[:k], self.alphabet_size)

    def to_json(self) -> dict:
        return {
            "structure": "periodic",
            "word": "".join(str(s) for s in self.word),
            "alphabet": self.alphabet_size,
        }


@dataclass(frozen=True)
class Window(SymbolSequence):
    """``core`` placed at indices offset..offset+len(core)-1.

    Left of the core the sequence repeats ``left`` (anchored so that index
    offset-1 holds ``left[-1]``); right of it, ``right`` starting at
    offset+len(core).
    """

    core: Tuple[int, ...]
    left: Tuple[int, ...] = (0,)
    right: Tuple[int, ...] = (0,)
    offset: int = 0
    alphabet_size: int = 2

    def __post_init__(self):
        if self.alphabet_size < 2:
            raise SequenceError("alphabet size must be >= 2")
        for name in ("core", "left", "right"):
            object.__setattr__(self, name, _as_word(getattr(self, name), self.alphabet_size))
        if not self.left or not self.right:
            raise SequenceError("fill words must be non-empty")

    def at(self, indices) -> np.ndarray:
        j = np.asarray(indices, dtype=np.int64) - self.offset
        n = len(self.core)
        left = np.asarray(self.left, dtype=np.int64)
        right = np.asarray(self.right, dtype=np.int64)
        core = np.asarray(self.core + (0,), dtype=np.int64)
        out = np.where(
            j < 0,
            left[j % len(left)],
            np.where(j >= n, right[(j - n) % len(right)], core[np.clip(j, 0, n)]),
        )
        return out.astype(np.int64)

    def shift(self, k: int) -> "Window":
        return Window(self.core, self.left, self.right, self.offset - k, self.alphabet_size)

    def to_json(self) -> dict:
        join = lambda w: "".join(str(s) for s in w)  # noqa: E731
        return {
            "structure": "window",
            "word": f"{join(self.left)}:{join(self.core)}:{join(self.right)}:{self.offset}",
            "alphabet": self.alphabet_size,
        }


def _splitmix64(values: np.ndarray) -> np.ndarray:
    z = values.astype(np.uint64) + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def random_bits(seed: int, indices) -> np.ndarray:
    """Deterministic pseudorandom bit per integer index."""
    idx = np.asarray(indices, dtype=np.int64).view(np.uint64)
    with np.errstate(over="ignore"):
        key = _splitmix64(np.array([seed], dtype=np.int64).view(np.uint64))[0]
        mixed = _splitmix64(idx ^ key)
    return (mixed >> np.uint64(63)).astype(np.int64)


def scrambled_flip(indices) -> np.ndarray:
    """1 on the blocks [2*4^j, 4^(j+1)), j >= 0; 0 elsewhere (incl. i <= 1)."""
    i = np.asarray(indices, dtype=np.int64)
    out = np.zeros(i.shape, dtype=np.int64)
    pos = i >= 2
    # floor(log2 i) is odd exactly on the flip blocks
    exponent = np.frexp(i[pos].astype(float))[1] - 1
    out[pos] = exponent % 2
    return out


def _word_offset(length: int) -> int:
    # total length of all binary words shorter than ``length``
    return (length - 2) * 2**length + 2


def dense_offset(word) -> int:
    """Index at which ``word`` starts inside the dense-orbit sequence."""
    word = _as_word(word, 2)
    if not word:
        raise SequenceError("word must be non-empty")
    rank = int("".join(map(str, word)), 2)
    return _word_offset(len(word)) + rank * len(word)


def _dense_rule(indices, params) -> np.ndarray:
    i = np.asarray(indices, dtype=np.int64)
    out = np.zeros(i.shape, dtype=np.int64)
    pos = i >= 0
    ip = i[pos]
    length = np.ones(ip.shape, dtype=np.int64)
    n = 1
    while np.any(ip >= _word_offset(n + 1)):
        length[ip >= _word_offset(n + 1)] = n + 1
        n += 1
    rel = ip - ((length - 2) * (np.int64(1) << length) + 2)
    rank, bit = np.divmod(rel, length)
    out[pos] = (rank >> (length - 1 - bit)) & 1
    return out


def _scrambled_rule(indices, params) -> np.ndarray:
    seed, which = params
    base = random_bits(seed, indices)
    if which == "a":
        return base
    return base ^ scrambled_flip(indices)


def _random_rule(indices, params) -> np.ndarray:
    (seed,) = params
    return random_bits(seed, indices)


RULES: Dict[str, Callable] = {
    "dense": _dense_rule,
    "scrambled": _scrambled_rule,
    "random": _random_rule,
}


@dataclass(frozen=True)
class RuleBased(SymbolSequence):
    """``symbol_at(i) = rule(i + offset)`` for a registered binary rule."""

    name: str
    params: tuple = ()
    offset: int = 0
    alphabet_size: int = 2

    def __post_init__(self):
        if self.name not in RULES:
            raise SequenceError(f"unknown rule {self.name!r}")
        if self.name == "scrambled" and (len(self.params) != 2 or self.params[1] not in "ab"):
            raise SequenceError("scrambled rule takes (seed, 'a'|'b')")

    def at(self, indices) -> np.ndarray:
        idx = np.asarray(indices, dtype=np.int64) + self.offset
        return RULES[self.name](idx, self.params)

    def shift(self, k: int) -> "RuleBased":
        return RuleBased(self.name, self.params, self.offset + k, self.alphabet_size)

    def to_json(self) -> dict:
        rule = ":".join([self.name, *map(str, self.params)])
        return {
            "structure": "rule",
            "rule": rule,
            "offset": self.offset,
            "alphabet": self.alphabet_size,
        }


def shift_sigma(s: SymbolSequence, k: int = 1) -> SymbolSequence:
    """sigma^k: the result has symbol_at(i) == s.symbol_at(i + k)."""
    return s.shift(int(k))


def truncation_index(m: int, precision: float) -> int:
    """Smallest I whose two-sided tail bound 2*m^-(I+1) is below ``precision``."""
    if precision <= 0:
        raise ValueError("precision must be positive")
    i = max(0, math.ceil(math.log(2.0 / precision, m)) - 2)
    while 2.0 * float(m) ** -(i + 1) >= precision:
        i += 1
    return i


def bernoulli_distance(s: SymbolSequence, r: SymbolSequence, precision: float = DEFAULT_PRECISION) -> float:
    """sum_i |s_i - r_i| / m^(|i|+1), truncated to within ``precision``."""
    if s.alphabet_size != r.alphabet_size:
        raise SequenceError("alphabet mismatch")
    if s == r:
        return 0.0
    m = s.alphabet_size
    n = truncation_index(m, precision)
    idx = np.arange(-n, n + 1, dtype=np.int64)
    diff = np.abs(s.at(idx) - r.at(idx)).astype(float)
    weights = float(m) ** -(np.abs(idx) + 1.0)
    # sum symmetric pairs from the outside in for reproducible rounding
    order = np.argsort(-np.abs(idx), kind="stable")
    return float(np.sum(diff[order] * weights[order]))


def periodic_approximant(s: SymbolSequence, k: int) -> Periodic:
    """Periodic sequence of period 2k+1 agreeing with ``s`` on [-k, k]."""
    if k < 0:
        raise SequenceError("k must be >= 0")
    idx = np.arange(-k, k + 1, dtype=np.int64)
    vals = s.at(idx)
    word = [0] * (2 * k + 1)
    for i, v in zip(idx, vals):
        word[int(i) % (2 * k + 1)] = int(v)
    return Periodic(tuple(word), s.alphabet_size)


def scrambled_pair(seed: int) -> Tuple[RuleBased, RuleBased]:
    return RuleBased("scrambled", (int(seed), "a")), RuleBased("scrambled", (int(seed), "b"))


def dense_orbit_sequence() -> RuleBased:
    return RuleBased("dense")


def random_window_sequence(rng: np.random.Generator, radius: int = 24, fill_max: int = 4) -> Window:
    """Pseudorandom binary sequence: random core on [-radius, radius], random periodic fills."""
    core = tuple(int(b) for b in rng.integers(0, 2, 2 * radius + 1))
    left = tuple(int(b) for b in rng.integers(0, 2, int(rng.integers(1, fill_max + 1))))
    right = tuple(int(b) for b in rng.integers(0, 2, int(rng.integers(1, fill_max + 1))))
    return Window(core, left, right, -radius)


def parse_sequence(literal: str) -> SymbolSequence:
    """Parse ``periodic:W``, ``window:LEFT:CORE:RIGHT[:OFFSET]``,
    ``rule:dense``, ``rule:random:SEED`` or ``rule:scrambled:SEED:a|b``."""
    kind, _, rest = literal.partition(":")
    if kind == "periodic":
        return Periodic(rest)
    if kind == "window":
        parts = rest.split(":")
        if len(parts) not in (3, 4):
            raise SequenceError(f"bad window literal {literal!r}")
        try:
            offset = int(parts[3]) if len(parts) == 4 else 0
        except ValueError as exc:
            raise SequenceError(f"bad window offset in {literal!r}") from exc
        return Window(parts[1], parts[0], parts[2], offset)
    if kind == "rule":
        parts = rest.split(":")
        try:
            if parts == ["dense"]:
                return dense_orbit_sequence()
            if parts[0] == "random" and len(parts) == 2:
                return RuleBased("random", (int(parts[1]),))
            if parts[0] == "scrambled" and len(parts) == 3:
                return RuleBased("scrambled", (int(parts[1]), parts[2]))
        except ValueError as exc:
            raise SequenceError(f"bad rule literal {literal!r}") from exc
    raise SequenceError(f"unrecognised sequence literal {literal!r}")
