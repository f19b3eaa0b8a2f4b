"""Hypothesis-class representations and builders for the concrete families.

Two representations share one query interface:

* EnumeratedClass — an indexed, materialized list of hypotheses over a common
  window (the finite-stage realization of a listable class).
* TreeClass — a downward-closed membership predicate on binary strings up to
  a horizon; hypotheses are the horizon-length strings (paths).  Builders
  only produce pruned trees: every member string extends to every length up
  to the horizon, so no search can dead-end.

Builders cover the monotone (threshold) family, the cut family, explicit
threshold tables, the full binary tree, the class of all functions on a
window, and the two-point hypotheses used by the halting counterexample
class.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .core import (
    CONSTANT_ONE,
    CONSTANT_ZERO,
    DomainError,
    FormatError,
    HorizonExceededError,
    Hypothesis,
    Label,
    Point,
)

__all__ = [
    "EnumeratedClass",
    "TreeClass",
    "LabelVector",
    "AnyClass",
    "build_monotone_class",
    "build_cut_class",
    "build_threshold_class",
    "build_full_tree",
    "build_all_functions_class",
    "point_pair_hypothesis",
    "realizable_labelings",
    "labeling_realizable",
    "window_of",
]

LabelVector = tuple[Label, ...]


# ---------------------------------------------------------------------------
# Enumerated classes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnumeratedClass:
    """A hypothesis class materialized as an indexed tuple over one window."""

    window: int
    hypotheses: tuple[Hypothesis, ...]

    def __post_init__(self) -> None:
        if self.window < 0:
            raise DomainError(f"window must be >= 0, got {self.window}")
        for i, h in enumerate(self.hypotheses):
            if h.window != self.window:
                raise DomainError(
                    f"hypothesis {i} has window {h.window}, class window is {self.window}"
                )

    @classmethod
    def from_generator(
        cls,
        generator: Callable[[int], Hypothesis],
        stage_bound: int,
        dedup: bool = False,
    ) -> "EnumeratedClass":
        """Materialize indices 0..stage_bound-1; dedup keeps first occurrences."""
        if stage_bound < 0:
            raise DomainError(f"stage bound must be >= 0, got {stage_bound}")
        produced = [generator(i) for i in range(stage_bound)]
        if produced:
            window = produced[0].window
        else:
            window = 0
        if dedup:
            seen: set[tuple[bytes, str]] = set()
            kept = []
            for h in produced:
                key = (h.table, h.completion)
                if key not in seen:
                    seen.add(key)
                    kept.append(h)
            produced = kept
        return cls(window=window, hypotheses=tuple(produced))

    @classmethod
    def from_hypotheses(cls, hypotheses: Sequence[Hypothesis]) -> "EnumeratedClass":
        hypotheses = tuple(hypotheses)
        window = hypotheses[0].window if hypotheses else 0
        return cls(window=window, hypotheses=hypotheses)

    def __len__(self) -> int:
        return len(self.hypotheses)

    def prefix(self, k: int) -> "EnumeratedClass":
        """The subclass of the first k hypotheses (stage realization)."""
        if k < 0:
            raise DomainError(f"prefix length must be >= 0, got {k}")
        return EnumeratedClass(self.window, self.hypotheses[:k])

    def to_text(self) -> str:
        """Header "window W" then one W-bit table line per hypothesis."""
        lines = [f"window {self.window}\n"]
        for h in self.hypotheses:
            lines.append(h.table_string() + "\n")
        return "".join(lines)

    @classmethod
    def from_text(cls, text: str) -> "EnumeratedClass":
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        if not lines or not lines[0].startswith("window "):
            raise FormatError('enumerated-class file must start with "window W"')
        try:
            window = int(lines[0].split()[1])
        except (IndexError, ValueError) as exc:
            raise FormatError(f"bad window header: {lines[0]!r}") from exc
        if window < 0:
            raise FormatError(f"window must be >= 0, got {window}")
        hypotheses = []
        for ln in lines[1:]:
            if len(ln) != window or any(c not in "01" for c in ln):
                raise FormatError(
                    f"hypothesis line must be a {window}-bit 0/1 string, got {ln!r}"
                )
            hypotheses.append(Hypothesis.from_string(ln))
        return cls(window=window, hypotheses=tuple(hypotheses))


# ---------------------------------------------------------------------------
# Tree classes
# ---------------------------------------------------------------------------

def _check_binary(sigma: str) -> str:
    if any(c not in "01" for c in sigma):
        raise DomainError(f"tree strings are binary, got {sigma!r}")
    return sigma


@dataclass(frozen=True, eq=False)
class TreeClass:
    """A binary tree of strings up to a horizon; hypotheses are its paths.

    `membership` must be a pure predicate, downward closed on strings of
    length <= horizon.  `pruned` asserts that every member of length < horizon
    has extensions of every length up to the horizon; builders guarantee it,
    and check_pruned() verifies it exhaustively at desk scale.
    """

    membership: Callable[[str], bool] = field(repr=False)
    horizon: int
    pruned: bool

    def __post_init__(self) -> None:
        if self.horizon < 0:
            raise DomainError(f"horizon must be >= 0, got {self.horizon}")

    @property
    def window(self) -> int:
        return self.horizon

    def contains(self, sigma: str) -> bool:
        _check_binary(sigma)
        if len(sigma) > self.horizon:
            raise HorizonExceededError(
                f"string of length {len(sigma)} exceeds horizon {self.horizon}"
            )
        return bool(self.membership(sigma))

    def is_empty(self) -> bool:
        return not self.contains("")

    def paths(self) -> list[str]:
        """All horizon-length member strings, in lexicographic order."""
        out: list[str] = []
        if not self.contains(""):
            return out

        # DFS trying '0' before '1' yields lexicographic order.
        def walk(sigma: str) -> None:
            if len(sigma) == self.horizon:
                out.append(sigma)
                return
            for bit in ("0", "1"):
                ext = sigma + bit
                if self.contains(ext):
                    walk(ext)

        walk("")
        return out

    def members_at(self, depth: int) -> list[str]:
        """All member strings of exactly the given length, lexicographic."""
        if depth < 0 or depth > self.horizon:
            raise DomainError(f"depth must lie in [0, {self.horizon}], got {depth}")
        out: list[str] = []
        if not self.contains(""):
            return out

        def walk(sigma: str) -> None:
            if len(sigma) == depth:
                out.append(sigma)
                return
            for bit in ("0", "1"):
                ext = sigma + bit
                if self.contains(ext):
                    walk(ext)

        walk("")
        return out

    def check_downward_closed(self) -> bool:
        """Exhaustively verify downward closure up to the horizon."""
        frontier = [""]
        member = {"": self.contains("")}
        for depth in range(self.horizon):
            next_frontier = []
            for sigma in frontier:
                for bit in ("0", "1"):
                    ext = sigma + bit
                    member[ext] = self.contains(ext)
                    if member[ext] and not member[sigma]:
                        return False
                    next_frontier.append(ext)
            frontier = next_frontier
        return True

    def check_pruned(self) -> bool:
        """Exhaustively verify that no member short of the horizon dead-ends."""
        def extends_fully(sigma: str) -> bool:
            if len(sigma) == self.horizon:
                return True
            return any(
                self.contains(sigma + bit) and extends_fully(sigma + bit)
                for bit in ("0", "1")
            )

        stack = [""]
        while stack:
            sigma = stack.pop()
            if not self.contains(sigma):
                continue
            if not extends_fully(sigma):
                return False
            if len(sigma) < self.horizon:
                stack.extend((sigma + "0", sigma + "1"))
        return True

    @classmethod
    def from_maximal(cls, horizon: int, maximal: Iterable[str]) -> "TreeClass":
        """Downward closure of the given horizon-length strings (always pruned)."""
        strings = frozenset(maximal)
        for s in strings:
            _check_binary(s)
            if len(s) != horizon:
                raise FormatError(
                    f"maximal string {s!r} does not have horizon length {horizon}"
                )
        prefixes = frozenset(s[:i] for s in strings for i in range(horizon + 1))

        def membership(sigma: str) -> bool:
            return sigma in prefixes

        return cls(membership=membership, horizon=horizon, pruned=True)

    def to_text(self) -> str:
        """Header "horizon D" then the horizon-length members, one per line."""
        lines = [f"horizon {self.horizon}\n"]
        for path in self.paths():
            lines.append(path + "\n")
        return "".join(lines)

    @classmethod
    def from_text(cls, text: str) -> "TreeClass":
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        if not lines or not lines[0].startswith("horizon "):
            raise FormatError('tree file must start with "horizon D"')
        try:
            horizon = int(lines[0].split()[1])
        except (IndexError, ValueError) as exc:
            raise FormatError(f"bad horizon header: {lines[0]!r}") from exc
        if horizon < 0:
            raise FormatError(f"horizon must be >= 0, got {horizon}")
        maximal = []
        for ln in lines[1:]:
            if len(ln) != horizon or any(c not in "01" for c in ln):
                raise FormatError(
                    f"tree member line must be a {horizon}-bit 0/1 string, got {ln!r}"
                )
            maximal.append(ln)
        return cls.from_maximal(horizon, maximal)


AnyClass = EnumeratedClass | TreeClass


def window_of(cls_: AnyClass) -> int:
    """Common accessor: the window of an enumeration or horizon of a tree."""
    return cls_.window


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def build_monotone_class(window: int) -> TreeClass:
    """Tree of monotone non-decreasing 0/1 strings of length <= window.

    A string is a member iff it never steps down (no "10" substring), so the
    full-length members are exactly the threshold tables 0^t 1^(window-t).
    """
    if window < 1:
        raise DomainError(f"monotone family needs window >= 1, got {window}")

    def membership(sigma: str) -> bool:
        return "10" not in sigma

    return TreeClass(membership=membership, horizon=window, pruned=True)


def build_cut_class(window: int) -> TreeClass:
    """Tree of non-increasing 0/1 strings that use both symbols at full length.

    Members never step up (no "01" substring) and any 0 must follow a leading
    1, so full-length members are exactly 1^a 0^b with a, b >= 1.  The family
    is only inhabited from window 2 upward.
    """
    if window < 2:
        raise DomainError(f"cut family needs window >= 2, got {window}")

    def membership(sigma: str) -> bool:
        if "01" in sigma:
            return False
        if "0" in sigma:
            return sigma[0] == "1"
        # All-ones strings (including the empty one) must leave room for a 0.
        return len(sigma) <= window - 1

    return TreeClass(membership=membership, horizon=window, pruned=True)


def build_threshold_class(window: int) -> EnumeratedClass:
    """Thresholds h_t(x) = [x >= t] for t = 0..window, as an enumeration.

    Index order is t = 0 (all ones) through t = window (all zeros on the
    window); completion is the defining formula's constant-one tail.
    """
    if window < 1:
        raise DomainError(f"threshold family needs window >= 1, got {window}")
    hypotheses = []
    for t in range(window + 1):
        table = bytes(1 if x >= t else 0 for x in range(window))
        hypotheses.append(Hypothesis(window, table, CONSTANT_ONE))
    return EnumeratedClass(window=window, hypotheses=tuple(hypotheses))


def build_full_tree(horizon: int) -> TreeClass:
    """The complete binary tree: every string up to the horizon is a member."""
    if horizon < 0:
        raise DomainError(f"horizon must be >= 0, got {horizon}")

    def membership(sigma: str) -> bool:
        return True

    return TreeClass(membership=membership, horizon=horizon, pruned=True)


def build_all_functions_class(window: int) -> EnumeratedClass:
    """All 2^window tables on the window, indexed by the integer whose bit x
    (least significant bit = point 0) is the value at x; constant-zero tails."""
    if window < 0:
        raise DomainError(f"window must be >= 0, got {window}")
    if window > 20:
        raise DomainError(f"all-functions class is desk-scale only (window <= 20)")
    hypotheses = []
    for n in range(1 << window):
        table = bytes((n >> x) & 1 for x in range(window))
        hypotheses.append(Hypothesis(window, table, CONSTANT_ZERO))
    return EnumeratedClass(window=window, hypotheses=tuple(hypotheses))


def point_pair_hypothesis(s: int, e: int, window: int) -> Hypothesis:
    """The two-point hypothesis that is 1 exactly at 2e and 2s+1.

    The even point encodes a program index, the odd point a stage; parity
    keeps the two coordinates from ever colliding.
    """
    if s < 0 or e < 0:
        raise DomainError(f"stage and index must be naturals, got s={s}, e={e}")
    if 2 * e >= window or 2 * s + 1 >= window:
        raise DomainError(
            f"points 2e={2*e} and 2s+1={2*s+1} must lie below window {window}"
        )
    table = bytearray(window)
    table[2 * e] = 1
    table[2 * s + 1] = 1
    return Hypothesis(window, bytes(table), CONSTANT_ZERO)


# ---------------------------------------------------------------------------
# Realizable labelings
# ---------------------------------------------------------------------------

def _check_points(cls_: AnyClass, points: Sequence[Point]) -> tuple[Point, ...]:
    points = tuple(points)
    if len(set(points)) != len(points):
        raise DomainError(f"points must be distinct, got {points}")
    bound = window_of(cls_)
    for p in points:
        if p < 0:
            raise DomainError(f"points are naturals, got {p}")
        if p >= bound:
            raise HorizonExceededError(
                f"point {p} is outside the class window/horizon {bound}"
            )
    return points


def realizable_labelings(
    cls_: AnyClass, points: Sequence[Point]
) -> set[LabelVector]:
    """Exactly the label vectors some member of the class achieves on `points`.

    Enumerations are scanned member by member; trees are searched depth-first
    down to max(points)+1, which suffices because pruned trees extend every
    such string to a full path.
    """
    points = _check_points(cls_, points)
    if isinstance(cls_, EnumeratedClass):
        return {
            tuple(h.evaluate(p) for p in points) for h in cls_.hypotheses
        }
    if not points:
        return {()} if not cls_.is_empty() else set()
    depth = max(points) + 1
    positions = {p: i for i, p in enumerate(points)}
    found: set[LabelVector] = set()
    assign: list[Label] = [0] * len(points)

    def walk(sigma: str) -> None:
        if len(sigma) == depth:
            # every point is < depth, so every slot has been assigned
            found.add(tuple(assign))
            return
        idx = positions.get(len(sigma))
        for bit in (0, 1):
            ext = sigma + str(bit)
            if not cls_.contains(ext):
                continue
            if idx is not None:
                assign[idx] = bit
            walk(ext)

    if cls_.contains(""):
        walk("")
    return found


def labeling_realizable(
    cls_: AnyClass, points: Sequence[Point], labeling: Sequence[Label]
) -> bool:
    """Existential check: does some member realize this labeling on `points`?

    Independent of realizable_labelings: enumerations short-circuit on the
    first witness, trees prune branches that contradict a forced bit.
    """
    points = _check_points(cls_, points)
    labeling = tuple(labeling)
    if len(labeling) != len(points):
        raise DomainError(
            f"labeling length {len(labeling)} does not match {len(points)} points"
        )
    if any(b not in (0, 1) for b in labeling):
        raise DomainError(f"labelings are bit vectors, got {labeling}")
    if isinstance(cls_, EnumeratedClass):
        return any(
            all(h.evaluate(p) == b for p, b in zip(points, labeling))
            for h in cls_.hypotheses
        )
    if not points:
        return not cls_.is_empty()
    depth = max(points) + 1
    forced = dict(zip(points, labeling))

    def walk(sigma: str) -> bool:
        if len(sigma) == depth:
            return True
        want = forced.get(len(sigma))
        bits = (0, 1) if want is None else (want,)
        for bit in bits:
            ext = sigma + str(bit)
            if cls_.contains(ext) and walk(ext):
                return True
        return False

    return cls_.contains("") and walk("")
