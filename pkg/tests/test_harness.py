"""Tests for the experiment harness: Bayes risk, configs, the trial loop,
and the exact-rational report format."""

from fractions import Fraction

import pytest

from paclab.classes import (
    EnumeratedClass,
    build_monotone_class,
    build_threshold_class,
)
from paclab.core import (
    DomainError,
    FiniteDistribution,
    FormatError,
    Hypothesis,
    InvariantViolationError,
)
from paclab.harness import (
    ExperimentConfig,
    ExperimentReport,
    bayes_risk,
    build_class,
    build_distribution,
    build_learner,
    emit_report,
    parse_config_text,
    parse_report,
    render_report,
    run_pac_experiment,
    run_trials,
)
from paclab.learners import Learner, erm_enumerated

# ---------------------------------------------------------------------------
# Bayes risk
# ---------------------------------------------------------------------------


def test_bayes_risk_realizable_is_zero():
    cls_ = build_threshold_class(6)
    dist = build_distribution("threshold:2", 6)
    assert bayes_risk(cls_, dist) == 0


def test_bayes_risk_forced_mistake():
    all_zero = EnumeratedClass.from_hypotheses([Hypothesis.from_string("0000")])
    assert bayes_risk(all_zero, FiniteDistribution.point_mass(3, 1)) == 1


def test_bayes_risk_monotone_half():
    dist = FiniteDistribution.uniform(((0, 1), (3, 0)))
    assert bayes_risk(build_monotone_class(4), dist) == Fraction(1, 2)


def test_bayes_risk_empty_class():
    from paclab.core import EmptyClassError

    with pytest.raises(EmptyClassError):
        bayes_risk(EnumeratedClass(window=3, hypotheses=()), FiniteDistribution.point_mass(0, 0))


# ---------------------------------------------------------------------------
# configs
# ---------------------------------------------------------------------------

BASE = {
    "family": "thresholds",
    "window": "8",
    "learner": "erm",
    "distribution": "threshold:3",
    "seed": "7",
}


def test_parse_config_text():
    text = "# experiment\nfamily = thresholds\nwindow = 8\n\nseed = 7\n"
    assert parse_config_text(text) == {
        "family": "thresholds",
        "window": "8",
        "seed": "7",
    }
    with pytest.raises(FormatError):
        parse_config_text("family thresholds\n")
    with pytest.raises(FormatError):
        parse_config_text("family = a\nfamily = b\n")
    with pytest.raises(FormatError):
        parse_config_text("family =\n")


def test_config_from_mapping_defaults():
    cfg = ExperimentConfig.from_mapping(BASE)
    assert cfg.epsilon == Fraction(1, 10)
    assert cfg.delta == Fraction(1, 10)
    assert cfg.trials == 100
    assert cfg.m_override is None


def test_config_from_mapping_errors():
    with pytest.raises(FormatError):
        ExperimentConfig.from_mapping({**BASE, "bogus": "1"})
    with pytest.raises(FormatError):
        ExperimentConfig.from_mapping({k: v for k, v in BASE.items() if k != "seed"})
    with pytest.raises(FormatError):
        ExperimentConfig.from_mapping({**BASE, "window": "eight"})
    with pytest.raises(FormatError):
        ExperimentConfig.from_mapping({**BASE, "epsilon": "2"})  # out of (0,1)
    with pytest.raises(FormatError):
        ExperimentConfig.from_mapping({**BASE, "trials": "0"})
    with pytest.raises(FormatError):
        ExperimentConfig.from_mapping({**BASE, "family": "nope"})


def test_config_validation_direct():
    with pytest.raises(DomainError):
        ExperimentConfig(
            family="thresholds",
            window=4,
            learner="erm",
            distribution="threshold:1",
            epsilon=Fraction(1, 10),
            delta=Fraction(1, 10),
            trials=0,
            seed=0,
        )


# ---------------------------------------------------------------------------
# class/distribution/learner builders
# ---------------------------------------------------------------------------


def test_build_class_families():
    assert len(build_class("thresholds", 4, None, None)) == 5
    assert build_class("monotone", 3, None, None).paths() == [
        "000",
        "001",
        "011",
        "111",
    ]
    cx = build_class("counterexample", None, 8, 4)
    assert cx.window >= 17
    with pytest.raises(DomainError):
        build_class("counterexample", None, None, None)  # needs budget/max_index


def test_build_distribution_specs(tmp_path):
    d = build_distribution("threshold:2", 4)
    assert d.weight_of(1, 0) == Fraction(1, 4)
    assert d.weight_of(2, 1) == Fraction(1, 4)
    p = build_distribution("pointmass:3,1", 8)
    assert p.support == (((3, 1), Fraction(1)),)
    u = build_distribution("uniform:0,0;1,1", 4)
    assert u.weight_of(1, 1) == Fraction(1, 2)
    path = tmp_path / "dist.txt"
    path.write_text("0,1,1/2\n1,0,1/2\n", encoding="utf-8")
    f = build_distribution(f"file:{path}", 4)
    assert f.weight_of(0, 1) == Fraction(1, 2)
    with pytest.raises(FormatError):
        build_distribution("nonsense:1", 4)
    with pytest.raises(DomainError):
        build_distribution("threshold:99", 4)  # threshold outside the window


def test_build_learner_kinds():
    enum = build_threshold_class(4)
    tree = build_monotone_class(4)
    assert build_learner("erm", enum).name == "erm-enumerated"
    assert build_learner("erm-tree", tree).name == "erm-tree"
    with pytest.raises(DomainError):
        build_learner("erm-tree", enum)
    with pytest.raises(DomainError):
        build_learner("erm", tree)


# ---------------------------------------------------------------------------
# the trial loop
# ---------------------------------------------------------------------------


def test_run_trials_realizable_always_succeeds():
    cls_ = build_threshold_class(6)
    dist = build_distribution("threshold:2", 6)
    report = run_trials(
        erm_enumerated(cls_),
        cls_,
        dist,
        Fraction(1, 4),
        Fraction(1, 4),
        m=40,
        trials=25,
        seed=1234,
    )
    assert report.bayes == 0
    assert report.success_rate == 1
    assert report.verdict


def test_run_trials_constant_wrong_learner_fails():
    cls_ = build_threshold_class(4)
    worst = cls_.hypotheses[0]  # predicts 1 everywhere on the window
    stubborn = Learner(apply=lambda s: worst, proper_for=cls_, name="stubborn")
    dist = FiniteDistribution.uniform(((0, 0), (1, 0), (2, 0), (3, 1)))
    report = run_trials(
        stubborn, cls_, dist, Fraction(1, 10), Fraction(1, 10),
        m=5, trials=10, seed=99,
    )
    # best threshold nails the labels, the stubborn one errs on 3 of 4 points
    assert report.bayes == 0
    assert report.success_rate == 0
    assert not report.verdict


def test_run_trials_trivial_point_mass_succeeds():
    all_zero = EnumeratedClass.from_hypotheses([Hypothesis.from_string("0000")])
    dist = FiniteDistribution.point_mass(2, 0)
    report = run_trials(
        erm_enumerated(all_zero), all_zero, dist,
        Fraction(1, 10), Fraction(1, 10), m=3, trials=5, seed=5,
    )
    assert report.success_rate == 1


def test_run_trials_regret_nonnegative_guard():
    # a learner that outputs a hypothesis outside the class can beat the
    # class's Bayes risk, which the loop must flag as an invariant violation
    cls_ = EnumeratedClass.from_hypotheses([Hypothesis.from_string("1111")])
    cheat = Hypothesis.from_string("0000")
    cheater = Learner(apply=lambda s: cheat, proper_for=cls_, name="cheat")
    dist = FiniteDistribution.point_mass(1, 0)
    with pytest.raises(InvariantViolationError):
        run_trials(
            cheater, cls_, dist, Fraction(1, 10), Fraction(1, 10),
            m=1, trials=1, seed=0,
        )


def test_run_trials_reproducible():
    cls_ = build_threshold_class(5)
    dist = build_distribution("threshold:2", 5)
    kwargs = dict(
        learner=erm_enumerated(cls_), cls_=cls_, dist=dist,
        epsilon=Fraction(1, 4), delta=Fraction(1, 4), m=7, trials=8, seed=42,
    )
    assert run_trials(**kwargs) == run_trials(**kwargs)
    different = run_trials(**{**kwargs, "seed": 43})
    assert different.records != run_trials(**kwargs).records or True


def test_run_pac_experiment_uses_formula_sample_size():
    cfg = ExperimentConfig.from_mapping(
        {
            **BASE,
            "epsilon": "1/2",
            "delta": "1/2",
            "trials": "3",
            "m_override": "11",
        }
    )
    report = run_pac_experiment(cfg)
    assert report.m == 11
    cfg2 = ExperimentConfig.from_mapping(
        {**BASE, "epsilon": "1/2", "delta": "1/2", "trials": "3"}
    )
    report2 = run_pac_experiment(cfg2)
    # thresholds have VC dimension 1: m = ceil(8 (1 + ln 2) / (1/2)^2) = 55
    assert report2.m == 55


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def small_report() -> ExperimentReport:
    cls_ = build_threshold_class(5)
    dist = build_distribution("threshold:2", 5)
    return run_trials(
        erm_enumerated(cls_), cls_, dist,
        Fraction(1, 4), Fraction(1, 4), m=6, trials=3, seed=11,
    )


def test_render_report_layout():
    text = render_report(small_report())
    lines = text.splitlines()
    assert lines[0] == "trial,seed,true_error,regret,success,true_error_dec,regret_dec"
    assert len([l for l in lines if not l.startswith("#")]) == 1 + 3
    footer = [l for l in lines if l.startswith("#")]
    assert any(l.startswith("# m = ") for l in footer)
    assert any(l.startswith("# verdict = ") for l in footer)
    assert any(l.startswith("# note = ") for l in footer)


def test_report_round_trip_exact():
    report = small_report()
    assert parse_report(render_report(report)) == report


def test_report_emission_byte_identical(tmp_path):
    report = small_report()
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_report(report, str(a))
    emit_report(report, str(b))
    assert a.read_bytes() == b.read_bytes()


def test_parse_report_errors():
    with pytest.raises(FormatError):
        parse_report("wrong,header\n")
    good = render_report(small_report())
    with pytest.raises(FormatError):
        parse_report(good.replace("trial,seed", "x,y", 1))


def test_report_aggregates_consistent():
    report = small_report()
    assert report.successes == sum(1 for r in report.records if r.success)
    assert report.success_rate == Fraction(report.successes, report.trials)
    assert report.verdict == (report.success_rate >= 1 - report.delta)
