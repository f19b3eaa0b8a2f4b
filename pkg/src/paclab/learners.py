"""Proper learners and their contract validators.

Every learner here is proper (outputs live in the class it was built from)
and deterministic, with all tie-breaking pinned: enumeration ERM returns the
least index achieving the minimum empirical risk; tree ERM picks the
lexicographically least among minimum-risk labelings of the sample's sorted
distinct points and then the leftmost full-length tree string agreeing with
it.  The asymptotic wrapper runs exact ERM over a growing stage prefix of an
enumeration and certifies its regret schedule empirically against a declared
sample battery, because the "for every sample" quantifier is untestable.

Validators re-derive minimality with a plain brute-force scan rather than
trusting the learner's own bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .classes import AnyClass, EnumeratedClass, TreeClass, realizable_labelings
from .core import (
    LEFTMOST_TREE,
    DomainError,
    EmptyClassError,
    FormatError,
    HorizonExceededError,
    Hypothesis,
    InvariantViolationError,
    Sample,
    SplitMix64,
    empirical_risk,
    subseed,
)

__all__ = [
    "Learner",
    "EpsilonSchedule",
    "erm_enumerated",
    "erm_tree",
    "asymptotic_erm",
    "default_battery",
    "brute_force_min_risk",
    "validate_erm",
    "validate_asymptotic_erm",
    "find_erm_violation",
    "find_asymptotic_violation",
]


# ---------------------------------------------------------------------------
# Learners
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Learner:
    """A deterministic map from samples to hypotheses.

    `proper_for` names the class the outputs are promised to belong to (None
    for ad-hoc learners, e.g. constant baselines built in tests).
    """

    apply: Callable[[Sample], Hypothesis] = field(repr=False)
    proper_for: AnyClass | None = None
    name: str = "learner"

    def __call__(self, sample: Sample) -> Hypothesis:
        return self.apply(sample)


def _mistake_count(
    h: Hypothesis, counts: Mapping[tuple[int, int], int]
) -> int:
    return sum(
        mult for (x, y), mult in counts.items() if h.evaluate(x) != y
    )


def erm_enumerated(cls_: EnumeratedClass) -> Learner:
    """Exact ERM over an enumeration; ties go to the least index.

    The empty sample returns the index-0 hypothesis (pinned: with nothing to
    fit, the first listed hypothesis is the canonical choice).
    """
    if not isinstance(cls_, EnumeratedClass):
        raise DomainError("erm_enumerated needs an enumerated class")
    if not cls_.hypotheses:
        raise EmptyClassError("cannot build an ERM learner from an empty class")

    def apply(sample: Sample) -> Hypothesis:
        if sample.size == 0:
            return cls_.hypotheses[0]
        counts = sample.pair_counts()
        best = cls_.hypotheses[0]
        best_mistakes = _mistake_count(best, counts)
        for h in cls_.hypotheses[1:]:
            if best_mistakes == 0:
                break
            mistakes = _mistake_count(h, counts)
            if mistakes < best_mistakes:
                best, best_mistakes = h, mistakes
        return best

    return Learner(apply=apply, proper_for=cls_, name="erm-enumerated")


def _leftmost_agreeing_path(
    tree: TreeClass, constraints: Mapping[int, int]
) -> str | None:
    """Lexicographically least horizon-length member matching the constraints."""

    def walk(sigma: str) -> str | None:
        if len(sigma) == tree.horizon:
            return sigma
        want = constraints.get(len(sigma))
        bits = ("0", "1") if want is None else (str(want),)
        for bit in bits:
            ext = sigma + bit
            if tree.contains(ext):
                found = walk(ext)
                if found is not None:
                    return found
        return None

    if not tree.contains(""):
        return None
    return walk("")


def erm_tree(cls_: TreeClass) -> Learner:
    """Tree ERM: least-risk labeling of the sample's points, leftmost path.

    On sample S the learner lists the labelings of S's sorted distinct points
    realized by the tree, keeps those of minimum empirical risk, breaks the
    tie by lexicographic order, and returns the leftmost horizon-length tree
    string agreeing with the chosen labeling, completed by nothing (points
    past the horizon raise HorizonExceededError).
    """
    if not isinstance(cls_, TreeClass):
        raise DomainError("erm_tree needs a tree class")
    if not cls_.pruned:
        raise DomainError("erm_tree needs a pruned tree (no dead ends)")
    if cls_.is_empty():
        raise EmptyClassError("cannot build an ERM learner from an empty tree")

    def apply(sample: Sample) -> Hypothesis:
        for x, _ in sample.pairs:
            if x >= cls_.horizon:
                raise HorizonExceededError(
                    f"sample point {x} is beyond the tree horizon {cls_.horizon}"
                )
        points = sample.distinct_points()
        if points:
            counts = sample.pair_counts()
            options = []
            for labeling in sorted(realizable_labelings(cls_, points)):
                mistakes = sum(
                    mult
                    for (x, y), mult in counts.items()
                    if labeling[points.index(x)] != y
                )
                options.append((mistakes, labeling))
            _, best_labeling = min(options)
            constraints = dict(zip(points, best_labeling))
        else:
            constraints = {}
        path = _leftmost_agreeing_path(cls_, constraints)
        if path is None:
            raise InvariantViolationError(
                "a realizable labeling has no agreeing path in a pruned tree"
            )
        return Hypothesis.from_string(path, LEFTMOST_TREE)

    return Learner(apply=apply, proper_for=cls_, name="erm-tree")


# ---------------------------------------------------------------------------
# Asymptotic ERM
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EpsilonSchedule:
    """A finitely presented regret schedule m -> eps_m.

    `values[m-1]` is the certified bound for sample size m up to the declared
    horizon; beyond it `tail` applies (0 exactly when the stage schedule has
    reached the full class by the horizon, else the trivial bound 1).  The
    schedule vanishes — certifies eps_m -> 0 — iff tail == 0.  `battery`
    records how the bounds were measured.
    """

    values: tuple[Fraction, ...]
    tail: Fraction
    battery: str = ""

    def __post_init__(self) -> None:
        for v in tuple(self.values) + (self.tail,):
            if not 0 <= v <= 1:
                raise DomainError(f"eps values must lie in [0,1], got {v}")

    @property
    def horizon(self) -> int:
        return len(self.values)

    def eps(self, m: int) -> Fraction:
        if m < 1:
            raise DomainError(f"sample sizes start at 1, got {m}")
        if m <= len(self.values):
            return self.values[m - 1]
        return self.tail

    def vanishes(self) -> bool:
        return self.tail == 0

    def to_text(self) -> str:
        lines = [f"horizon {len(self.values)}\n"]
        for m, v in enumerate(self.values, start=1):
            lines.append(f"{m},{v.numerator}/{v.denominator}\n")
        lines.append(f"tail,{self.tail.numerator}/{self.tail.denominator}\n")
        if self.battery:
            lines.append(f"# battery: {self.battery}\n")
        return "".join(lines)

    @classmethod
    def from_text(cls, text: str) -> "EpsilonSchedule":
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        if not lines or not lines[0].startswith("horizon "):
            raise FormatError('schedule file must start with "horizon M"')
        try:
            horizon = int(lines[0].split()[1])
        except (IndexError, ValueError) as exc:
            raise FormatError(f"bad horizon header: {lines[0]!r}") from exc
        values: dict[int, Fraction] = {}
        tail: Fraction | None = None
        for ln in lines[1:]:
            parts = ln.split(",")
            if len(parts) != 2:
                raise FormatError(f"schedule line must be 'm,p/q', got {ln!r}")
            try:
                value = Fraction(parts[1])
            except (ValueError, ZeroDivisionError) as exc:
                raise FormatError(f"bad rational in schedule: {ln!r}") from exc
            if parts[0] == "tail":
                tail = value
                continue
            try:
                m = int(parts[0])
            except ValueError as exc:
                raise FormatError(f"bad sample size in schedule: {ln!r}") from exc
            values[m] = value
        if tail is None:
            raise FormatError('schedule file must end with a "tail,p/q" line')
        if sorted(values) != list(range(1, horizon + 1)):
            raise FormatError(
                f"schedule must cover sample sizes 1..{horizon} exactly once"
            )
        try:
            return cls(
                values=tuple(values[m] for m in range(1, horizon + 1)), tail=tail
            )
        except DomainError as exc:
            raise FormatError(str(exc)) from exc


def default_battery(
    window: int, sizes: Sequence[int], per_size: int, seed: int
) -> dict[int, list[Sample]]:
    """Deterministic certification battery: per size m, `per_size` samples with
    uniform points below the window and uniform labels, from nested subseeds."""
    if window < 1:
        raise DomainError(f"battery needs window >= 1, got {window}")
    if per_size < 1:
        raise DomainError(f"battery needs per_size >= 1, got {per_size}")
    battery: dict[int, list[Sample]] = {}
    for m in sizes:
        if m < 1:
            raise DomainError(f"battery sizes start at 1, got {m}")
        samples = []
        for j in range(per_size):
            rng = SplitMix64(subseed(subseed(seed, m), j))
            pairs = tuple(
                (rng.next_below(window), rng.next_u64() & 1) for _ in range(m)
            )
            samples.append(Sample(pairs))
        battery[m] = samples
    return battery


def asymptotic_erm(
    cls_: EnumeratedClass,
    stage_schedule: Callable[[int], int],
    *,
    horizon: int = 32,
    battery: Mapping[int, Sequence[Sample]] | None = None,
    battery_per_size: int = 20,
    battery_seed: int = 0,
) -> tuple[Learner, EpsilonSchedule]:
    """Stage-limited ERM plus an empirically certified regret schedule.

    On a size-m sample the learner runs exact least-index ERM over the first
    stage_schedule(m) hypotheses.  The schedule's eps_m is the largest regret
    (stage-ERM risk minus full-class minimum risk) observed over the battery
    samples of size m — identically 0 when the stage covers the whole class,
    with no scan needed.  The battery may be passed explicitly; by default it
    is the deterministic default_battery over the class window.  Values are
    clipped into [0,1] and the tail is 0 exactly when stage_schedule(horizon)
    reaches the full class, else the trivial bound 1.
    """
    if not cls_.hypotheses:
        raise EmptyClassError("cannot build an asymptotic ERM from an empty class")
    if horizon < 1:
        raise DomainError(f"schedule horizon must be >= 1, got {horizon}")
    size = len(cls_.hypotheses)

    stages: dict[int, int] = {}

    def stage_at(m: int) -> int:
        if m not in stages:
            s = stage_schedule(m)
            if s < 1:
                raise EmptyClassError(f"stage schedule gives {s} hypotheses at m={m}")
            stages[m] = min(s, size)
        return stages[m]

    for m in range(1, horizon):
        if stage_at(m + 1) < stage_at(m):
            raise DomainError("stage schedule must be nondecreasing")

    def apply(sample: Sample) -> Hypothesis:
        stage = stage_at(max(sample.size, 1))
        return erm_enumerated(cls_.prefix(stage)).apply(sample)

    learner = Learner(apply=apply, proper_for=cls_, name="asymptotic-erm")

    if battery is None:
        battery = default_battery(
            max(cls_.window, 1),
            sizes=range(1, horizon + 1),
            per_size=battery_per_size,
            seed=battery_seed,
        )
        battery_note = (
            f"default battery: {battery_per_size} samples per size over window "
            f"{max(cls_.window, 1)}, seed {battery_seed}"
        )
    else:
        battery_note = "caller-provided battery"

    full_erm = erm_enumerated(cls_)
    values = []
    for m in range(1, horizon + 1):
        if stage_at(m) >= size:
            values.append(Fraction(0))
            continue
        worst = Fraction(0)
        for sample in battery.get(m, ()):  # type: ignore[union-attr]
            if sample.size != m:
                raise DomainError(
                    f"battery sample of size {sample.size} filed under m={m}"
                )
            regret = empirical_risk(apply(sample), sample) - empirical_risk(
                full_erm.apply(sample), sample
            )
            worst = max(worst, regret)
        values.append(min(max(worst, Fraction(0)), Fraction(1)))
    tail = Fraction(0) if stage_at(horizon) >= size else Fraction(1)
    schedule = EpsilonSchedule(
        values=tuple(values), tail=tail, battery=battery_note
    )
    return learner, schedule


# ---------------------------------------------------------------------------
# Validators (independent brute force)
# ---------------------------------------------------------------------------

def brute_force_min_risk(cls_: AnyClass, sample: Sample) -> Fraction:
    """Minimum empirical risk over the whole class by direct scan.

    Enumerations are scanned with the plain per-pair empirical_risk;
    trees are scanned over all horizon-length paths.  This is the oracle the
    validators trust instead of any learner's internals.
    """
    if sample.size == 0:
        raise DomainError("minimum empirical risk needs a nonempty sample")
    best: Fraction | None = None
    if isinstance(cls_, EnumeratedClass):
        if not cls_.hypotheses:
            raise EmptyClassError("empty class has no minimum risk")
        for h in cls_.hypotheses:
            risk = empirical_risk(h, sample)
            if best is None or risk < best:
                best = risk
    else:
        paths = cls_.paths()
        if not paths:
            raise EmptyClassError("empty tree has no minimum risk")
        for path in paths:
            mistakes = sum(1 for x, y in sample.pairs if int(path[x]) != y)
            risk = Fraction(mistakes, sample.size)
            if best is None or risk < best:
                best = risk
    assert best is not None
    return best


def _is_member(cls_: AnyClass, h: Hypothesis) -> bool:
    """Extensional membership of h in the class, judged on the window."""
    if isinstance(cls_, EnumeratedClass):
        return any(
            h.table == g.table or h.agrees_with(g, cls_.window)
            for g in cls_.hypotheses
        )
    return len(h.table) == cls_.horizon and cls_.contains(h.table_string())


def find_erm_violation(
    learner: Learner, cls_: AnyClass, samples: Sequence[Sample]
) -> tuple[Sample, str] | None:
    """First sample on which the learner breaks the exact-ERM contract.

    Checks properness (output extensionally in the class) on every sample and
    risk minimality on every nonempty one; empty samples cannot constrain the
    risk, so only properness applies there.  Returns (sample, reason) or None.
    """
    for sample in samples:
        h = learner.apply(sample)
        if not _is_member(cls_, h):
            return sample, "output hypothesis is not a member of the class"
        if sample.size == 0:
            continue
        achieved = empirical_risk(h, sample)
        minimum = brute_force_min_risk(cls_, sample)
        if achieved != minimum:
            return (
                sample,
                f"empirical risk {achieved} exceeds brute-force minimum {minimum}",
            )
    return None


def validate_erm(
    learner: Learner, cls_: AnyClass, samples: Sequence[Sample]
) -> bool:
    """True iff the learner is proper and exactly risk-minimal on every sample."""
    return find_erm_violation(learner, cls_, samples) is None


def find_asymptotic_violation(
    learner: Learner,
    cls_: AnyClass,
    eps: EpsilonSchedule,
    samples: Sequence[Sample],
) -> tuple[Sample, str] | None:
    """First sample breaking properness or the eps-relaxed risk inequality."""
    for sample in samples:
        h = learner.apply(sample)
        if not _is_member(cls_, h):
            return sample, "output hypothesis is not a member of the class"
        if sample.size == 0:
            continue
        achieved = empirical_risk(h, sample)
        allowed = brute_force_min_risk(cls_, sample) + eps.eps(sample.size)
        if achieved > allowed:
            return (
                sample,
                f"empirical risk {achieved} exceeds minimum plus eps ({allowed})",
            )
    return None


def validate_asymptotic_erm(
    learner: Learner,
    cls_: AnyClass,
    eps: EpsilonSchedule,
    samples: Sequence[Sample],
) -> bool:
    """True iff outputs stay in the class and risk <= minimum + eps_m throughout."""
    return find_asymptotic_violation(learner, cls_, eps, samples) is None
