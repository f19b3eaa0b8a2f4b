"""Monte-Carlo PAC experiments: configs, trial loops, and CSV reports.

An experiment fixes a hypothesis class, a proper learner for it, a finite
ground-truth distribution, and accuracy/confidence targets.  Each trial draws
an i.i.d. sample of the computed (or overridden) size under its own derived
sub-seed, runs the learner, and records the output's true error and regret
against the best-in-class true error.  The experiment succeeds when the
fraction of trials with regret <= epsilon reaches 1 - delta.

Reports are CSV files with exact rationals ("p/q") next to rounded decimal
columns; re-emitting the same report is byte-identical, and the whole run is
reproducible from the config (including the master seed).
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from typing import Mapping

from .classes import (
    AnyClass,
    EnumeratedClass,
    TreeClass,
    build_all_functions_class,
    build_cut_class,
    build_full_tree,
    build_monotone_class,
    build_threshold_class,
)
from .core import (
    DomainError,
    EmptyClassError,
    FormatError,
    FiniteDistribution,
    InvariantViolationError,
    as_fraction,
    check_seed,
    draw_sample,
    sample_size,
    subseed,
    true_error,
)
from .learners import Learner, erm_enumerated, erm_tree
from .machine import build_counterexample_class, min_window
from .vc import vc_dimension

__all__ = [
    "ExperimentConfig",
    "TrialRecord",
    "ExperimentReport",
    "bayes_risk",
    "build_class",
    "build_distribution",
    "build_learner",
    "run_pac_experiment",
    "run_trials",
    "emit_report",
    "render_report",
    "parse_report",
    "parse_config_text",
    "CONFIG_KEYS",
]

FAMILIES = ("monotone", "cut", "thresholds", "counterexample", "full-tree", "all")

SPOT_CHECK_NOTE = (
    "success rate is a Monte-Carlo spot check over this one configured "
    "distribution; a PAC guarantee quantifies over all distributions"
)


# ---------------------------------------------------------------------------
# Bayes risk
# ---------------------------------------------------------------------------

def bayes_risk(cls_: AnyClass, dist: FiniteDistribution) -> Fraction:
    """Exact minimum true error over the materialized class."""
    best: Fraction | None = None
    if isinstance(cls_, EnumeratedClass):
        if not cls_.hypotheses:
            raise EmptyClassError("empty class has no best-in-class error")
        for h in cls_.hypotheses:
            err = true_error(h, dist)
            if best is None or err < best:
                best = err
    else:
        paths = cls_.paths()
        if not paths:
            raise EmptyClassError("empty tree has no best-in-class error")
        for path in paths:
            err = Fraction(0)
            for (x, y), w in dist.support:
                if x >= len(path):
                    raise DomainError(
                        f"support point {x} is beyond the tree horizon {len(path)}"
                    )
                if int(path[x]) != y:
                    err += w
            if best is None or err < best:
                best = err
    assert best is not None
    return best


# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------

CONFIG_KEYS = (
    "family",
    "window",
    "budget",
    "max_index",
    "learner",
    "distribution",
    "epsilon",
    "delta",
    "trials",
    "seed",
    "m_override",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a PAC experiment needs, in plain values.

    `distribution` is a spec string: "threshold:t" (uniform over the window,
    labeled by the threshold at t), "pointmass:x,y", "uniform:x,y;x,y;...",
    or "file:PATH" (the distribution file format).  `family` picks the class
    builder; counterexample additionally needs budget and max_index.
    """

    family: str
    window: int
    learner: str
    distribution: str
    epsilon: Fraction
    delta: Fraction
    trials: int
    seed: int
    budget: int | None = None
    max_index: int | None = None
    m_override: int | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise DomainError(
                f"unknown family {self.family!r}; expected one of {FAMILIES}"
            )
        if self.learner not in ("erm", "erm-tree"):
            raise DomainError(
                f"unknown learner {self.learner!r}; expected 'erm' or 'erm-tree'"
            )
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        if not 0 < self.epsilon < 1:
            raise DomainError(f"epsilon must lie in (0,1), got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise DomainError(f"delta must lie in (0,1), got {self.delta}")
        if self.m_override is not None and self.m_override < 1:
            raise DomainError(f"m_override must be >= 1, got {self.m_override}")
        check_seed(self.seed)

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, str]) -> "ExperimentConfig":
        unknown = set(mapping) - set(CONFIG_KEYS)
        if unknown:
            raise FormatError(f"unknown config keys: {sorted(unknown)}")
        missing = [
            key
            for key in ("family", "window", "learner", "distribution", "seed")
            if key not in mapping
        ]
        if missing:
            raise FormatError(f"missing config keys: {missing}")

        def get_int(key: str) -> int | None:
            if key not in mapping:
                return None
            try:
                return int(mapping[key])
            except ValueError as exc:
                raise FormatError(f"config {key}: {exc}") from exc

        try:
            epsilon = as_fraction(mapping.get("epsilon", "1/10"))
            delta = as_fraction(mapping.get("delta", "1/10"))
        except FormatError:
            raise
        window = get_int("window")
        seed = get_int("seed")
        trials = get_int("trials")
        assert window is not None and seed is not None
        try:
            return cls(
                family=mapping["family"],
                window=window,
                learner=mapping["learner"],
                distribution=mapping["distribution"],
                epsilon=epsilon,
                delta=delta,
                trials=100 if trials is None else trials,
                seed=seed,
                budget=get_int("budget"),
                max_index=get_int("max_index"),
                m_override=get_int("m_override"),
            )
        except DomainError as exc:
            raise FormatError(str(exc)) from exc


def parse_config_text(text: str) -> dict[str, str]:
    """Parse "key = value" lines (blank lines and # comments allowed)."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"config line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise FormatError(f"config line {lineno}: empty key or value")
        if key in values:
            raise FormatError(f"config line {lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def build_class(
    family: str,
    window: int | None,
    budget: int | None = None,
    max_index: int | None = None,
) -> AnyClass:
    """Materialize a built-in family at the given window.

    The counterexample family may omit the window; the least window wide
    enough for its marked points is used.  Every other family requires one.
    """
    if family == "counterexample":
        if budget is None or max_index is None:
            raise DomainError("counterexample family needs budget and max_index")
        if window is None:
            window = min_window(max_index, budget)
        return build_counterexample_class(max_index, budget, window)
    if window is None:
        raise DomainError(f"family {family!r} needs a window")
    if family == "monotone":
        return build_monotone_class(window)
    if family == "cut":
        return build_cut_class(window)
    if family == "thresholds":
        return build_threshold_class(window)
    if family == "full-tree":
        return build_full_tree(window)
    if family == "all":
        return build_all_functions_class(window)
    raise DomainError(f"unknown family {family!r}; expected one of {FAMILIES}")


def build_distribution(spec: str, window: int) -> FiniteDistribution:
    """Materialize a distribution spec string (see ExperimentConfig)."""
    kind, _, arg = spec.partition(":")
    kind = kind.strip()
    arg = arg.strip()
    if kind == "threshold":
        try:
            t = int(arg)
        except ValueError as exc:
            raise FormatError(f"threshold spec needs an integer, got {arg!r}") from exc
        if not 0 <= t <= window:
            raise DomainError(f"threshold {t} must lie in [0, {window}]")
        return FiniteDistribution.uniform(
            tuple((x, 1 if x >= t else 0) for x in range(window))
        )
    if kind == "pointmass":
        parts = arg.split(",")
        if len(parts) != 2:
            raise FormatError(f"pointmass spec needs 'x,y', got {arg!r}")
        try:
            x, y = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise FormatError(f"pointmass spec: {exc}") from exc
        return FiniteDistribution.point_mass(x, y)
    if kind == "uniform":
        pairs = []
        for chunk in arg.split(";"):
            parts = chunk.split(",")
            if len(parts) != 2:
                raise FormatError(f"uniform spec needs 'x,y;x,y;...', got {arg!r}")
            try:
                pairs.append((int(parts[0]), int(parts[1])))
            except ValueError as exc:
                raise FormatError(f"uniform spec: {exc}") from exc
        return FiniteDistribution.uniform(tuple(pairs))
    if kind == "file":
        try:
            with open(arg, "r", encoding="utf-8") as fh:
                return FiniteDistribution.from_text(fh.read())
        except OSError as exc:
            raise FormatError(f"cannot read distribution file {arg!r}: {exc}") from exc
    raise FormatError(
        f"unknown distribution spec {spec!r}; expected threshold:, pointmass:, "
        f"uniform:, or file:"
    )


def build_learner(kind: str, cls_: AnyClass) -> Learner:
    if kind == "erm":
        if not isinstance(cls_, EnumeratedClass):
            raise DomainError("learner 'erm' needs an enumerated family")
        return erm_enumerated(cls_)
    if kind == "erm-tree":
        if not isinstance(cls_, TreeClass):
            raise DomainError("learner 'erm-tree' needs a tree family")
        return erm_tree(cls_)
    raise DomainError(f"unknown learner {kind!r}; expected 'erm' or 'erm-tree'")


# ---------------------------------------------------------------------------
# Experiment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialRecord:
    trial: int
    seed: int
    true_error: Fraction
    regret: Fraction
    success: bool


@dataclass(frozen=True)
class ExperimentReport:
    """Per-trial records plus the aggregates the verdict is computed from."""

    m: int
    epsilon: Fraction
    delta: Fraction
    bayes: Fraction
    records: tuple[TrialRecord, ...]
    success_rate: Fraction
    verdict: bool

    @property
    def trials(self) -> int:
        return len(self.records)

    @property
    def successes(self) -> int:
        return sum(1 for r in self.records if r.success)


def run_trials(
    learner: Learner,
    cls_: AnyClass,
    dist: FiniteDistribution,
    epsilon: Fraction,
    delta: Fraction,
    m: int,
    trials: int,
    seed: int,
) -> ExperimentReport:
    """The trial loop; exposed so tests can inject arbitrary learners."""
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    bayes = bayes_risk(cls_, dist)
    records = []
    successes = 0
    for i in range(trials):
        trial_seed = subseed(seed, i)
        sample = draw_sample(dist, m, trial_seed)
        output = learner.apply(sample)
        err = true_error(output, dist)
        regret = err - bayes
        if regret < 0:
            raise InvariantViolationError(
                f"trial {i}: output beats the best-in-class error ({err} < {bayes})"
            )
        success = regret <= epsilon
        successes += success
        records.append(
            TrialRecord(
                trial=i,
                seed=trial_seed,
                true_error=err,
                regret=regret,
                success=success,
            )
        )
    rate = Fraction(successes, trials)
    return ExperimentReport(
        m=m,
        epsilon=epsilon,
        delta=delta,
        bayes=bayes,
        records=tuple(records),
        success_rate=rate,
        verdict=rate >= 1 - delta,
    )


def run_pac_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Build class, learner, and distribution from the config and run trials.

    The sample size is cfg.m_override when given, else sampleSize(epsilon,
    delta, d) with d the capped VC search's value on the materialized class
    (cap 4; a ">= 4" outcome uses 4, the best lower bound available).
    """
    cls_ = build_class(cfg.family, cfg.window, cfg.budget, cfg.max_index)
    dist = build_distribution(cfg.distribution, cfg.window)
    learner = build_learner(cfg.learner, cls_)
    if cfg.m_override is not None:
        m = cfg.m_override
    else:
        d = vc_dimension(cls_, cfg.window, cap=4).value
        m = sample_size(cfg.epsilon, cfg.delta, d)
    return run_trials(
        learner, cls_, dist, cfg.epsilon, cfg.delta, m, cfg.trials, cfg.seed
    )


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def _frac_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def _dec_str(f: Fraction) -> str:
    value = Decimal(f.numerator) / Decimal(f.denominator)
    return str(value.quantize(Decimal("0.000001"), rounding=ROUND_HALF_EVEN))


def render_report(report: ExperimentReport) -> str:
    """CSV text: data rows, then a '#'-prefixed footer block of aggregates.

    Exact rationals are rendered "p/q"; the *_dec columns round half-even to
    six places for plotting.
    """
    lines = ["trial,seed,true_error,regret,success,true_error_dec,regret_dec\n"]
    for r in report.records:
        lines.append(
            f"{r.trial},{r.seed},{_frac_str(r.true_error)},{_frac_str(r.regret)},"
            f"{int(r.success)},{_dec_str(r.true_error)},{_dec_str(r.regret)}\n"
        )
    lines.append(f"# m = {report.m}\n")
    lines.append(f"# trials = {report.trials}\n")
    lines.append(f"# epsilon = {_frac_str(report.epsilon)}\n")
    lines.append(f"# delta = {_frac_str(report.delta)}\n")
    lines.append(f"# bayes_risk = {_frac_str(report.bayes)}\n")
    lines.append(f"# successes = {report.successes}\n")
    lines.append(f"# success_rate = {_frac_str(report.success_rate)}\n")
    lines.append(f"# success_rate_dec = {_dec_str(report.success_rate)}\n")
    lines.append(f"# verdict = {'pass' if report.verdict else 'fail'}\n")
    lines.append(f"# note = {SPOT_CHECK_NOTE}\n")
    return "".join(lines)


def emit_report(report: ExperimentReport, path: str) -> None:
    """Write the rendered report; identical reports yield identical bytes."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render_report(report))
    except OSError as exc:
        raise FormatError(f"cannot write report to {path!r}: {exc}") from exc


def parse_report(text: str) -> ExperimentReport:
    """Inverse of render_report; parse(render(r)) == r exactly."""
    records = []
    footer: dict[str, str] = {}
    lines = text.splitlines()
    if not lines or not lines[0].startswith("trial,seed,true_error,regret,success"):
        raise FormatError("report must start with the pinned CSV header")
    for raw in lines[1:]:
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            key, _, value = body.partition("=")
            footer[key.strip()] = value.strip()
            continue
        parts = line.split(",")
        if len(parts) != 7:
            raise FormatError(f"report data row needs 7 columns, got {line!r}")
        try:
            records.append(
                TrialRecord(
                    trial=int(parts[0]),
                    seed=int(parts[1]),
                    true_error=Fraction(parts[2]),
                    regret=Fraction(parts[3]),
                    success=bool(int(parts[4])),
                )
            )
        except (ValueError, ZeroDivisionError) as exc:
            raise FormatError(f"report data row {line!r}: {exc}") from exc
    needed = ("m", "epsilon", "delta", "bayes_risk", "success_rate", "verdict")
    missing = [key for key in needed if key not in footer]
    if missing:
        raise FormatError(f"report footer is missing {missing}")
    try:
        return ExperimentReport(
            m=int(footer["m"]),
            epsilon=Fraction(footer["epsilon"]),
            delta=Fraction(footer["delta"]),
            bayes=Fraction(footer["bayes_risk"]),
            records=tuple(records),
            success_rate=Fraction(footer["success_rate"]),
            verdict=footer["verdict"] == "pass",
        )
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"report footer: {exc}") from exc
