"""Shared domain types plus risk functionals and seeded i.i.d. sampling.

Points are naturals, labels are bits.  A hypothesis is a total 0/1 function
given by an explicit table on a finite window [0, W) together with a named
completion rule for points beyond the window.  All risks and weights are
exact `fractions.Fraction` values; no floating point enters a correctness
path.  Randomness comes from a pinned splitmix64 generator so that every
sample stream is reproducible from its 64-bit seed.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator

Point = int
Label = int

__all__ = [
    "Point",
    "Label",
    "PacLabError",
    "DomainError",
    "HorizonExceededError",
    "EmptySampleError",
    "EmptyClassError",
    "NoWitnessError",
    "FormatError",
    "InvariantViolationError",
    "MASK64",
    "SPLITMIX64_GAMMA",
    "SplitMix64",
    "subseed",
    "check_seed",
    "CONSTANT_ZERO",
    "CONSTANT_ONE",
    "LEFTMOST_TREE",
    "Hypothesis",
    "Sample",
    "FiniteDistribution",
    "evaluate",
    "empirical_risk",
    "true_error",
    "draw_sample",
    "sample_size",
    "as_fraction",
]


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class PacLabError(Exception):
    """Base class for every error this package raises deliberately."""


class DomainError(PacLabError):
    """An argument is outside the operation's declared domain."""


class HorizonExceededError(PacLabError):
    """A point fell beyond a window or tree horizon where no rule applies."""


class EmptySampleError(PacLabError):
    """An operation that needs at least one sample pair got none."""


class EmptyClassError(PacLabError):
    """An operation that needs at least one hypothesis got an empty class."""


class NoWitnessError(PacLabError):
    """Every labeling of the given tuple is realizable (the tuple is shattered)."""


class FormatError(PacLabError):
    """A text payload (file or config) does not match its pinned format."""


class InvariantViolationError(PacLabError):
    """An internal consistency check failed; indicates a bug, not bad input."""


# ---------------------------------------------------------------------------
# Pinned deterministic generator: splitmix64
# ---------------------------------------------------------------------------

MASK64 = (1 << 64) - 1
SPLITMIX64_GAMMA = 0x9E3779B97F4A7C15
_MIX_1 = 0xBF58476D1CE4E5B9
_MIX_2 = 0x94D049BB133111EB


def _mix64(z: int) -> int:
    """The splitmix64 output function on a 64-bit state."""
    z = ((z ^ (z >> 30)) * _MIX_1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX_2) & MASK64
    return z ^ (z >> 31)


def check_seed(seed: int) -> int:
    """Validate a 64-bit unsigned seed and return it."""
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise DomainError(f"seed must be an int, got {type(seed).__name__}")
    if not 0 <= seed <= MASK64:
        raise DomainError(f"seed must fit in 64 unsigned bits, got {seed}")
    return seed


class SplitMix64:
    """splitmix64 stream: state advances by a fixed odd gamma, outputs are mixed.

    Constants (gamma 0x9E3779B97F4A7C15, mixers 0xBF58476D1CE4E5B9 and
    0x94D049BB133111EB) are the widely published ones; the whole generator is
    pinned so two implementations fed the same seed agree bit for bit.
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int) -> None:
        self._state = check_seed(seed)

    def next_u64(self) -> int:
        self._state = (self._state + SPLITMIX64_GAMMA) & MASK64
        return _mix64(self._state)

    def next_below(self, bound: int) -> int:
        """Uniform-ish draw in [0, bound) by modular reduction (test plumbing)."""
        if bound <= 0:
            raise DomainError(f"bound must be positive, got {bound}")
        return self.next_u64() % bound


def subseed(master: int, index: int) -> int:
    """Pinned per-trial seed derivation: the (index+1)-th splitmix64 output.

    subseed(master, i) = mix64((master + (i+1)*gamma) mod 2^64), i.e. trial i
    uses the (i+1)-th raw output of a splitmix64 stream seeded with `master`.
    Parallel trials with distinct indices therefore cannot collide with the
    master stream layout.
    """
    check_seed(master)
    if index < 0:
        raise DomainError(f"subseed index must be >= 0, got {index}")
    return _mix64((master + (index + 1) * SPLITMIX64_GAMMA) & MASK64)


# ---------------------------------------------------------------------------
# Hypotheses
# ---------------------------------------------------------------------------

CONSTANT_ZERO = "constant-zero"
CONSTANT_ONE = "constant-one"
LEFTMOST_TREE = "leftmost-tree"

_COMPLETIONS = (CONSTANT_ZERO, CONSTANT_ONE, LEFTMOST_TREE)


@dataclass(frozen=True)
class Hypothesis:
    """A total 0/1 function: explicit table on [0, window) plus a completion rule.

    `table` holds one byte (0 or 1) per point below the window.  Beyond the
    window, `completion` names the rule: "constant-zero" and "constant-one"
    extend by that constant; "leftmost-tree" marks a tree path that is only
    defined up to its horizon, so evaluation past it raises
    HorizonExceededError.
    """

    window: int
    table: bytes
    completion: str = CONSTANT_ZERO

    def __post_init__(self) -> None:
        if self.window < 0:
            raise DomainError(f"window must be >= 0, got {self.window}")
        if not isinstance(self.table, bytes):
            raise DomainError("table must be bytes of 0/1 values")
        if len(self.table) != self.window:
            raise DomainError(
                f"table length {len(self.table)} does not match window {self.window}"
            )
        if any(b not in (0, 1) for b in self.table):
            raise DomainError("table entries must be 0 or 1")
        if self.completion not in _COMPLETIONS:
            raise DomainError(f"unknown completion rule: {self.completion!r}")

    @classmethod
    def from_bits(
        cls, bits: Iterable[int], completion: str = CONSTANT_ZERO
    ) -> "Hypothesis":
        table = bytes(bits)
        return cls(window=len(table), table=table, completion=completion)

    @classmethod
    def from_string(cls, bits: str, completion: str = CONSTANT_ZERO) -> "Hypothesis":
        if not all(c in "01" for c in bits):
            raise FormatError(f"hypothesis table must be a 0/1 string, got {bits!r}")
        return cls.from_bits((int(c) for c in bits), completion)

    def evaluate(self, x: Point) -> Label:
        if x < 0:
            raise DomainError(f"points are naturals, got {x}")
        if x < self.window:
            return self.table[x]
        if self.completion == CONSTANT_ZERO:
            return 0
        if self.completion == CONSTANT_ONE:
            return 1
        raise HorizonExceededError(
            f"point {x} is beyond the tree horizon {self.window}"
        )

    def table_string(self) -> str:
        return "".join(str(b) for b in self.table)

    def agrees_with(self, other: "Hypothesis", horizon: int) -> bool:
        """Extensional equality checked on [0, horizon) (the decidable surrogate)."""
        if horizon < 0:
            raise DomainError(f"horizon must be >= 0, got {horizon}")
        return all(self.evaluate(x) == other.evaluate(x) for x in range(horizon))


def evaluate(h: Hypothesis, x: Point) -> Label:
    """Apply hypothesis h to point x (table below the window, rule above it)."""
    return h.evaluate(x)


# ---------------------------------------------------------------------------
# Samples
# ---------------------------------------------------------------------------

def _check_pair(x: int, y: int) -> tuple[int, int]:
    if x < 0:
        raise DomainError(f"points are naturals, got {x}")
    if y not in (0, 1):
        raise DomainError(f"labels are bits, got {y}")
    return (x, y)


@dataclass(frozen=True)
class Sample:
    """An ordered sequence of (point, label) pairs; duplicates allowed."""

    pairs: tuple[tuple[Point, Label], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "pairs", tuple(_check_pair(x, y) for x, y in self.pairs)
        )

    @property
    def size(self) -> int:
        return len(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[tuple[Point, Label]]:
        return iter(self.pairs)

    def distinct_points(self) -> tuple[Point, ...]:
        """The sample's distinct points in increasing order."""
        return tuple(sorted({x for x, _ in self.pairs}))

    def pair_counts(self) -> dict[tuple[Point, Label], int]:
        """Multiplicity of each (point, label) pair; risk scans use this."""
        counts: dict[tuple[Point, Label], int] = {}
        for pair in self.pairs:
            counts[pair] = counts.get(pair, 0) + 1
        return counts

    def to_text(self) -> str:
        """One "x,y" line per pair, in sample order."""
        return "".join(f"{x},{y}\n" for x, y in self.pairs)

    @classmethod
    def from_text(cls, text: str) -> "Sample":
        pairs = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise FormatError(f"sample line {lineno}: expected 'x,y', got {raw!r}")
            try:
                x, y = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise FormatError(f"sample line {lineno}: {exc}") from exc
            if x < 0 or y not in (0, 1):
                raise FormatError(
                    f"sample line {lineno}: need natural x and bit y, got {raw!r}"
                )
            pairs.append((x, y))
        return cls(tuple(pairs))


# ---------------------------------------------------------------------------
# Finite distributions
# ---------------------------------------------------------------------------

def as_fraction(value) -> Fraction:
    """Coerce ints, strings like "3/4", and Fractions to an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DomainError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise FormatError(f"not a rational: {value!r}") from exc
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    raise DomainError(f"cannot interpret {type(value).__name__} as a rational")


@dataclass(frozen=True)
class FiniteDistribution:
    """Rational-weighted distribution over (point, label) pairs.

    Support pairs are distinct and stored sorted by (point, label); weights
    are positive Fractions summing to exactly 1 (no tolerance).
    """

    support: tuple[tuple[tuple[Point, Label], Fraction], ...]

    def __post_init__(self) -> None:
        entries = []
        for (x, y), w in self.support:
            _check_pair(x, y)
            w = as_fraction(w)
            if w <= 0:
                raise DomainError(f"weight of ({x},{y}) must be > 0, got {w}")
            entries.append(((x, y), w))
        entries.sort(key=lambda item: item[0])
        pairs = [pair for pair, _ in entries]
        if len(set(pairs)) != len(pairs):
            raise DomainError("support pairs must be distinct")
        total = sum((w for _, w in entries), Fraction(0))
        if total != 1:
            raise DomainError(f"weights must sum to exactly 1, got {total}")
        object.__setattr__(self, "support", tuple(entries))

    @classmethod
    def uniform(cls, pairs: Iterable[tuple[Point, Label]]) -> "FiniteDistribution":
        pairs = list(pairs)
        if not pairs:
            raise DomainError("uniform distribution needs a nonempty support")
        w = Fraction(1, len(pairs))
        return cls(tuple((pair, w) for pair in pairs))

    @classmethod
    def point_mass(cls, x: Point, y: Label) -> "FiniteDistribution":
        return cls((((x, y), Fraction(1)),))

    @cached_property
    def _cdf_thresholds(self) -> tuple[int, ...]:
        """ceil(C_i * 2^64) per support index i, C_i the cumulative weight.

        A draw picks the least i with r < ceil(C_i * 2^64) for a uniform
        64-bit integer r; for integer r this is exactly r/2^64 < C_i, i.e.
        inverse-CDF sampling of the uniform value r/2^64.
        """
        thresholds = []
        cumulative = Fraction(0)
        for _, w in self.support:
            cumulative += w
            thresholds.append(math.ceil(cumulative * (1 << 64)))
        return tuple(thresholds)

    def max_point(self) -> Point:
        return max(x for (x, _), _ in self.support)

    def weight_of(self, x: Point, y: Label) -> Fraction:
        for (px, py), w in self.support:
            if (px, py) == (x, y):
                return w
        return Fraction(0)

    def to_text(self) -> str:
        """One "x,y,p/q" line per support pair, sorted by (x, y)."""
        lines = []
        for (x, y), w in self.support:
            lines.append(f"{x},{y},{w.numerator}/{w.denominator}\n")
        return "".join(lines)

    @classmethod
    def from_text(cls, text: str) -> "FiniteDistribution":
        entries = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise FormatError(
                    f"distribution line {lineno}: expected 'x,y,p/q', got {raw!r}"
                )
            try:
                x, y = int(parts[0]), int(parts[1])
                w = Fraction(parts[2].strip())
            except (ValueError, ZeroDivisionError) as exc:
                raise FormatError(f"distribution line {lineno}: {exc}") from exc
            entries.append(((x, y), w))
        if not entries:
            raise FormatError("distribution file has no support lines")
        try:
            return cls(tuple(entries))
        except DomainError as exc:
            raise FormatError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Risk functionals
# ---------------------------------------------------------------------------

def empirical_risk(h: Hypothesis, sample: Sample) -> Fraction:
    """Fraction of sample pairs mislabeled by h, as an exact rational."""
    m = sample.size
    if m == 0:
        raise EmptySampleError("empirical risk of an empty sample is undefined")
    mistakes = 0
    for (x, y), count in sample.pair_counts().items():
        if h.evaluate(x) != y:
            mistakes += count
    return Fraction(mistakes, m)


def true_error(h: Hypothesis, dist: FiniteDistribution) -> Fraction:
    """Probability mass of support pairs that h mislabels."""
    total = Fraction(0)
    for (x, y), w in dist.support:
        if h.evaluate(x) != y:
            total += w
    return total


def draw_sample(dist: FiniteDistribution, m: int, seed: int) -> Sample:
    """m i.i.d. draws from dist via inverse CDF over the pinned generator.

    Each draw consumes one 64-bit splitmix64 output r and selects the support
    pair at the least index i whose cumulative weight exceeds r/2^64.  The
    discretization to 2^-64 grains is the only deviation from the ideal
    distribution (at most 2^-64 per support pair).
    """
    if m < 0:
        raise DomainError(f"sample size must be >= 0, got {m}")
    rng = SplitMix64(seed)
    thresholds = dist._cdf_thresholds
    support = dist.support
    pairs = []
    for _ in range(m):
        r = rng.next_u64()
        i = bisect_right(thresholds, r)
        pairs.append(support[i][0])
    return Sample(tuple(pairs))


def sample_size(epsilon, delta, d: int) -> int:
    """Pinned sample-complexity formula: ceil(8 * (d + ln(1/delta)) / epsilon^2).

    The constant 8 and the agnostic-style shape are design choices; the
    function is total on (0,1) x (0,1) x N, monotone decreasing in epsilon and
    delta and increasing in d.
    """
    eps = as_fraction(epsilon)
    dlt = as_fraction(delta)
    if not 0 < eps < 1:
        raise DomainError(f"epsilon must lie in (0,1), got {eps}")
    if not 0 < dlt < 1:
        raise DomainError(f"delta must lie in (0,1), got {dlt}")
    if d < 0:
        raise DomainError(f"d must be a natural, got {d}")
    return math.ceil(8.0 * (d + math.log(1.0 / float(dlt))) / float(eps) ** 2)
