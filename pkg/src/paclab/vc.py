"""Shattering checks, capped VC-dimension search, and d-witness certificates.

The VC search is exhaustive in effect — it reports exactly what the naive
"try every k-subset in lexicographic order for k = 1..cap" scan reports,
including the same first shattered set — but prunes using two facts that
never change the answer: shattering is downward monotone (every subset of a
shattered set is shattered), and a k-set can only be shattered if all of its
pairs are.  Candidate points/pairs are found once with per-point bitmask
indexes over the hypothesis list, which keeps the search fast on classes
with thousands of members.

A d-witness assigns to each (d+1)-tuple of distinct points the
lexicographically least labeling that no member of the class realizes;
its existence on every tuple certifies that the VC dimension is at most d.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable, Sequence

from .classes import (
    AnyClass,
    EnumeratedClass,
    LabelVector,
    labeling_realizable,
    realizable_labelings,
    window_of,
)
from .core import (
    DomainError,
    FormatError,
    HorizonExceededError,
    NoWitnessError,
    Point,
)

__all__ = [
    "VcResult",
    "WitnessCertificate",
    "shatters",
    "vc_dimension",
    "vc_dimension_naive",
    "d_witness",
    "make_certificate",
    "check_witness",
    "all_tuples",
]


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VcResult:
    """Outcome of a capped VC search.

    `value` is the largest shattered size found (0 when nothing, not even a
    singleton, is shattered).  `exact` is False when value == cap and a
    cap-sized set was shattered, meaning the true dimension is >= cap.
    `shattered` is the lexicographically first shattered set of size `value`.
    """

    value: int
    exact: bool
    shattered: tuple[Point, ...]

    def render(self) -> str:
        return str(self.value) if self.exact else f">= {self.value}"


# ---------------------------------------------------------------------------
# Shattering
# ---------------------------------------------------------------------------

def shatters(cls_: AnyClass, points: Sequence[Point]) -> bool:
    """True iff every labeling of the (distinct) points is realizable."""
    points = tuple(points)
    return len(realizable_labelings(cls_, points)) == 1 << len(points)


def _window_tables(cls_: AnyClass, window: int) -> list[int]:
    """Each hypothesis/path as an int whose bit x is its value at point x."""
    if window < 0:
        raise DomainError(f"window must be >= 0, got {window}")
    if window > window_of(cls_):
        raise HorizonExceededError(
            f"window {window} exceeds the class window/horizon {window_of(cls_)}"
        )
    tables = []
    if isinstance(cls_, EnumeratedClass):
        for h in cls_.hypotheses:
            t = 0
            for x in range(window):
                if h.table[x]:
                    t |= 1 << x
            tables.append(t)
    else:
        for path in cls_.paths():
            t = 0
            for x in range(window):
                if path[x] == "1":
                    t |= 1 << x
            tables.append(t)
    return tables


def _point_masks(tables: list[int], window: int) -> dict[Point, int]:
    """mask[x] has bit i set iff hypothesis i labels point x with 1.

    Built by iterating each table's set bits, so sparse classes (such as the
    two-point halting family) cost only the total number of ones.
    """
    masks: dict[Point, int] = {}
    for i, t in enumerate(tables):
        bit = 1 << i
        while t:
            low = t & -t
            x = low.bit_length() - 1
            if x >= window:
                break
            masks[x] = masks.get(x, 0) | bit
            t ^= low
    return masks


def _tuple_shattered(
    pts: Sequence[Point], masks: dict[Point, int], full: int
) -> bool:
    """Mask check: every labeling of pts is realized by some hypothesis bit."""
    ones = [masks.get(p, 0) for p in pts]
    zeros = [full & ~m for m in ones]
    for labeling in product((0, 1), repeat=len(pts)):
        hits = full
        for j, b in enumerate(labeling):
            hits &= ones[j] if b else zeros[j]
            if not hits:
                break
        if not hits:
            return False
    return True


def vc_dimension(cls_: AnyClass, window: int, cap: int = 4) -> VcResult:
    """Largest k <= cap with a shattered k-subset of [0, window).

    Search order is pinned: increasing k, lexicographic subsets; the reported
    set is the first shattered subset of the largest achieved size.  An empty
    class has no shattered sets at all and reports 0.
    """
    if cap < 1:
        raise DomainError(f"cap must be >= 1, got {cap}")
    tables = _window_tables(cls_, window)
    if not tables:
        return VcResult(value=0, exact=True, shattered=())
    n = len(tables)
    full = (1 << n) - 1
    masks = _point_masks(tables, window)

    # Size 1: a point is shattered iff some hypothesis says 1 and some says 0.
    singles = [
        x
        for x in range(window)
        if 0 != masks.get(x, 0) != full
    ]
    if not singles:
        return VcResult(value=0, exact=True, shattered=())
    best = VcResult(value=1, exact=True, shattered=(singles[0],))
    if cap == 1:
        return VcResult(value=1, exact=False, shattered=(singles[0],))

    # Size 2: only pairs of shattered singletons can be shattered.
    shattered_pairs: list[tuple[Point, Point]] = []
    for pair in combinations(singles, 2):
        if _tuple_shattered(pair, masks, full):
            shattered_pairs.append(pair)
    if not shattered_pairs:
        return best
    best = VcResult(value=2, exact=True, shattered=shattered_pairs[0])
    if cap == 2:
        return VcResult(value=2, exact=False, shattered=shattered_pairs[0])

    # Sizes >= 3: a k-set needs all its pairs shattered, i.e. it must be a
    # k-clique in the shattered-pair graph; candidates are tried in
    # lexicographic order, which combinations() preserves.
    adjacency: dict[Point, set[Point]] = {}
    for p, q in shattered_pairs:
        adjacency.setdefault(p, set()).add(q)
        adjacency.setdefault(q, set()).add(p)
    candidates = sorted(adjacency)
    for k in range(3, cap + 1):
        found: tuple[Point, ...] | None = None
        for subset in combinations(candidates, k):
            if all(
                q in adjacency[p] for p, q in combinations(subset, 2)
            ) and _tuple_shattered(subset, masks, full):
                found = subset
                break
        if found is None:
            return best
        exact = k < cap
        best = VcResult(value=k, exact=exact, shattered=found)
        if not exact:
            return best
    return best


def vc_dimension_naive(cls_: AnyClass, window: int, cap: int = 4) -> VcResult:
    """Reference implementation: plain subset scan via realizable_labelings.

    Used as the independent oracle for the pruned search; identical output.
    """
    if cap < 1:
        raise DomainError(f"cap must be >= 1, got {cap}")
    # Trigger the same window validation as the fast path.
    _window_tables(cls_, window)
    best = VcResult(value=0, exact=True, shattered=())
    for k in range(1, cap + 1):
        found: tuple[Point, ...] | None = None
        for subset in combinations(range(window), k):
            if shatters(cls_, subset):
                found = subset
                break
        if found is None:
            return best
        best = VcResult(value=k, exact=k < cap, shattered=found)
        if not best.exact:
            return best
    return best


# ---------------------------------------------------------------------------
# d-witnesses
# ---------------------------------------------------------------------------

def d_witness(cls_: AnyClass, d: int, u: Sequence[Point]) -> LabelVector:
    """The lexicographically least labeling of u realized by no class member.

    Bit order: leftmost coordinate most significant, 0 before 1.  Raises
    NoWitnessError when u is shattered (the class realizes everything), which
    signals the VC dimension exceeds d on this tuple.
    """
    if d < 0:
        raise DomainError(f"d must be a natural, got {d}")
    u = tuple(u)
    if len(u) != d + 1:
        raise DomainError(f"witness tuples have d+1 = {d + 1} points, got {len(u)}")
    realizable = realizable_labelings(cls_, u)
    for labeling in product((0, 1), repeat=d + 1):
        if labeling not in realizable:
            return labeling
    raise NoWitnessError(f"tuple {u} is shattered; every labeling is realizable")


def all_tuples(window: int, d: int) -> list[tuple[Point, ...]]:
    """All increasing (d+1)-tuples of points below the window, lexicographic."""
    if d < 0:
        raise DomainError(f"d must be a natural, got {d}")
    return list(combinations(range(window), d + 1))


@dataclass(frozen=True)
class WitnessCertificate:
    """A d-witness restricted to finitely many tuples.

    Each entry pairs a (d+1)-tuple of distinct points with the labeling the
    class cannot realize there; validity additionally requires each labeling
    to be the lexicographically least unrealizable one for its tuple.
    """

    d: int
    entries: tuple[tuple[tuple[Point, ...], LabelVector], ...]

    def __post_init__(self) -> None:
        if self.d < 0:
            raise DomainError(f"d must be a natural, got {self.d}")
        seen: set[tuple[Point, ...]] = set()
        for pts, labeling in self.entries:
            if len(pts) != self.d + 1 or len(labeling) != self.d + 1:
                raise DomainError(
                    f"certificate entries need {self.d + 1} points and labels, "
                    f"got {pts} : {labeling}"
                )
            if len(set(pts)) != len(pts):
                raise DomainError(f"certificate tuple has repeated points: {pts}")
            if any(p < 0 for p in pts):
                raise DomainError(f"points are naturals, got {pts}")
            if any(b not in (0, 1) for b in labeling):
                raise DomainError(f"labelings are bit vectors, got {labeling}")
            if pts in seen:
                raise DomainError(f"duplicate certificate tuple: {pts}")
            seen.add(pts)

    def to_text(self) -> str:
        """One line per entry: "u_0,...,u_d : l_0...l_d"."""
        lines = []
        for pts, labeling in self.entries:
            left = ",".join(str(p) for p in pts)
            right = "".join(str(b) for b in labeling)
            lines.append(f"{left} : {right}\n")
        return "".join(lines)

    @classmethod
    def from_text(cls, text: str, d: int | None = None) -> "WitnessCertificate":
        entries = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if ":" not in line:
                raise FormatError(
                    f"certificate line {lineno}: expected 'u_0,...,u_d : bits'"
                )
            left, right = line.split(":", 1)
            try:
                pts = tuple(int(p) for p in left.strip().split(","))
            except ValueError as exc:
                raise FormatError(f"certificate line {lineno}: {exc}") from exc
            bits = right.strip()
            if not bits or any(c not in "01" for c in bits):
                raise FormatError(
                    f"certificate line {lineno}: labeling must be a 0/1 string"
                )
            entries.append((pts, tuple(int(c) for c in bits)))
        if d is None:
            if not entries:
                raise FormatError("cannot infer d from an empty certificate file")
            d = len(entries[0][0]) - 1
        try:
            return cls(d=d, entries=tuple(entries))
        except DomainError as exc:
            raise FormatError(str(exc)) from exc


def make_certificate(
    cls_: AnyClass, d: int, tuples: Iterable[Sequence[Point]]
) -> WitnessCertificate:
    """Run d_witness on each tuple and collect the results."""
    entries = []
    for u in tuples:
        u = tuple(u)
        entries.append((u, d_witness(cls_, d, u)))
    return WitnessCertificate(d=d, entries=tuple(entries))


def check_witness(cls_: AnyClass, cert: WitnessCertificate) -> bool:
    """Re-derive every entry's defining properties; no trusted replay.

    Each stored labeling must be unrealizable, and every lexicographically
    smaller labeling must be realizable — both checked with the existential
    labeling_realizable scan, not by re-running d_witness.
    """
    for pts, labeling in cert.entries:
        if labeling_realizable(cls_, pts, labeling):
            return False
        for candidate in product((0, 1), repeat=len(pts)):
            if candidate >= labeling:
                break
            if not labeling_realizable(cls_, pts, candidate):
                return False
    return True
