"""Tests for the shared kernel: hypotheses, samples, distributions, risk,
sampling, and the deterministic PRNG."""

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from paclab.core import (
    CONSTANT_ONE,
    CONSTANT_ZERO,
    LEFTMOST_TREE,
    DomainError,
    EmptySampleError,
    FiniteDistribution,
    FormatError,
    HorizonExceededError,
    Hypothesis,
    Sample,
    SplitMix64,
    as_fraction,
    check_seed,
    draw_sample,
    empirical_risk,
    sample_size,
    subseed,
    true_error,
)

# ---------------------------------------------------------------------------
# PRNG
# ---------------------------------------------------------------------------


def test_splitmix64_reference_vector():
    # First outputs for seed 0 from the widely published splitmix64 vector.
    rng = SplitMix64(0)
    assert rng.next_u64() == 0xE220A8397B1DCDAF
    assert rng.next_u64() == 0x6E789E6AA1B965F4
    assert rng.next_u64() == 0x06C45D188009454F


def test_splitmix64_determinism():
    a = SplitMix64(987654321)
    b = SplitMix64(987654321)
    assert [a.next_u64() for _ in range(50)] == [b.next_u64() for _ in range(50)]


def test_next_below_range_and_rejection():
    rng = SplitMix64(7)
    values = [rng.next_below(6) for _ in range(2000)]
    assert set(values) <= set(range(6))
    # every residue should appear over a long run
    assert set(values) == set(range(6))
    with pytest.raises(DomainError):
        rng.next_below(0)


def test_subseed_matches_stream():
    # subseed(master, i) is the (i+1)-th raw output of the master stream.
    master = 123456789
    rng = SplitMix64(master)
    stream = [rng.next_u64() for _ in range(5)]
    assert [subseed(master, i) for i in range(5)] == stream


def test_check_seed_bounds():
    assert check_seed(0) == 0
    assert check_seed(2**64 - 1) == 2**64 - 1
    with pytest.raises(DomainError):
        check_seed(-1)
    with pytest.raises(DomainError):
        check_seed(2**64)


# ---------------------------------------------------------------------------
# Hypothesis representation
# ---------------------------------------------------------------------------


def test_hypothesis_from_string_and_evaluate():
    h = Hypothesis.from_string("0110")
    assert h.window == 4
    assert [h.evaluate(x) for x in range(4)] == [0, 1, 1, 0]
    assert h.table_string() == "0110"


def test_hypothesis_completion_rules():
    zero = Hypothesis.from_string("1111", completion=CONSTANT_ZERO)
    one = Hypothesis.from_string("0000", completion=CONSTANT_ONE)
    assert zero.evaluate(100) == 0
    assert one.evaluate(100) == 1
    tree = Hypothesis.from_string("0010", completion=LEFTMOST_TREE)
    assert tree.evaluate(2) == 1
    with pytest.raises(HorizonExceededError):
        tree.evaluate(4)


def test_threshold_style_completion_example():
    # table [x >= 2] on window 8, completed by constant one far out
    table = "".join("1" if x >= 2 else "0" for x in range(8))
    h = Hypothesis.from_string(table, completion=CONSTANT_ONE)
    assert h.evaluate(1) == 0
    assert h.evaluate(2) == 1
    assert h.evaluate(100) == 1


def test_hypothesis_validation():
    # the empty table is legal: it is the horizon-0 tree path
    assert Hypothesis.from_string("").window == 0
    with pytest.raises(FormatError):
        Hypothesis.from_string("01x")
    with pytest.raises(DomainError):
        Hypothesis.from_string("01").evaluate(-1)
    with pytest.raises(DomainError):
        Hypothesis.from_string("01", completion="bogus")


def test_hypothesis_agrees_with():
    a = Hypothesis.from_string("0110")
    b = Hypothesis.from_string("0110")
    c = Hypothesis.from_string("0111")
    assert a.agrees_with(b, 4)
    assert not a.agrees_with(c, 4)
    assert a.agrees_with(c, 3)


# ---------------------------------------------------------------------------
# Samples
# ---------------------------------------------------------------------------


def test_sample_basics():
    s = Sample(((3, 1), (0, 0), (3, 1)))
    assert s.size == 3
    assert s.distinct_points() == (0, 3)
    assert s.pair_counts() == {(3, 1): 2, (0, 0): 1}


def test_sample_validation():
    with pytest.raises(DomainError):
        Sample(((zero_point := -1, 0),))
    with pytest.raises(DomainError):
        Sample(((0, 2),))


def test_sample_text_round_trip():
    s = Sample(((5, 0), (1, 1), (5, 1)))
    text = s.to_text()
    assert text.splitlines() == ["5,0", "1,1", "5,1"]
    assert Sample.from_text(text) == s
    assert Sample.from_text("") == Sample(())
    assert Sample.from_text("# comment\n2,1\n") == Sample(((2, 1),))


def test_sample_text_errors():
    with pytest.raises(FormatError):
        Sample.from_text("1;1")
    with pytest.raises(FormatError):
        Sample.from_text("1,2")
    with pytest.raises(FormatError):
        Sample.from_text("a,1")


# ---------------------------------------------------------------------------
# Distributions
# ---------------------------------------------------------------------------


def test_as_fraction_forms():
    assert as_fraction("3/7") == Fraction(3, 7)
    assert as_fraction(2) == Fraction(2)
    assert as_fraction(Fraction(1, 3)) == Fraction(1, 3)
    assert as_fraction(0.25) == Fraction(1, 4)
    with pytest.raises(FormatError):
        as_fraction("one half")


def test_distribution_constructor_checks():
    with pytest.raises(DomainError):
        FiniteDistribution((((0, 0), Fraction(1, 2)),))  # sums to 1/2
    with pytest.raises(DomainError):
        FiniteDistribution(
            (((0, 0), Fraction(1, 2)), ((0, 0), Fraction(1, 2)))
        )  # duplicate pair
    with pytest.raises(DomainError):
        FiniteDistribution(
            (((0, 0), Fraction(3, 2)), ((1, 1), Fraction(-1, 2)))
        )  # negative weight


def test_distribution_helpers():
    d = FiniteDistribution.uniform(((0, 0), (1, 1), (2, 1), (3, 0)))
    assert d.weight_of(2, 1) == Fraction(1, 4)
    assert d.weight_of(2, 0) == 0
    assert d.max_point() == 3
    p = FiniteDistribution.point_mass(5, 1)
    assert p.support == (((5, 1), Fraction(1)),)
    assert p.weight_of(5, 1) == 1


def test_distribution_text_round_trip():
    d = FiniteDistribution(
        (((0, 1), Fraction(1, 3)), ((2, 0), Fraction(2, 3)))
    )
    text = d.to_text()
    assert text.splitlines() == ["0,1,1/3", "2,0,2/3"]
    assert FiniteDistribution.from_text(text) == d
    with pytest.raises(FormatError):
        FiniteDistribution.from_text("0,1\n")
    with pytest.raises(FormatError):
        FiniteDistribution.from_text("0,1,1/3\n")  # does not sum to 1


# ---------------------------------------------------------------------------
# Risk functionals
# ---------------------------------------------------------------------------


def test_empirical_risk_examples():
    h = Hypothesis.from_string("0110")
    assert empirical_risk(h, Sample(((0, 0), (1, 1)))) == 0
    assert empirical_risk(h, Sample(((0, 1), (1, 1)))) == Fraction(1, 2)
    assert empirical_risk(h, Sample(((0, 1), (1, 0), (2, 1)))) == Fraction(2, 3)
    assert empirical_risk(h, Sample(((3, 1), (3, 1), (3, 0)))) == Fraction(2, 3)


def test_empirical_risk_empty_sample():
    h = Hypothesis.from_string("01")
    with pytest.raises(EmptySampleError):
        empirical_risk(h, Sample(()))


def test_true_error_examples():
    h = Hypothesis.from_string("0110")
    half = FiniteDistribution.uniform(((0, 1), (1, 1)))
    assert true_error(h, half) == Fraction(1, 2)
    exact = FiniteDistribution.uniform(((0, 0), (1, 1), (2, 1), (3, 0)))
    assert true_error(h, exact) == 0
    skew = FiniteDistribution(
        (((0, 1), Fraction(3, 4)), ((1, 1), Fraction(1, 4)))
    )
    assert true_error(h, skew) == Fraction(3, 4)


def test_true_error_singleton_support_is_indicator():
    h = Hypothesis.from_string("0110")
    assert true_error(h, FiniteDistribution.point_mass(1, 1)) == 0
    assert true_error(h, FiniteDistribution.point_mass(1, 0)) == 1


def test_true_error_affine_in_mixture():
    h = Hypothesis.from_string("0101")
    d1 = FiniteDistribution.point_mass(0, 1)  # error 1
    d2 = FiniteDistribution.point_mass(1, 1)  # error 0
    lam = Fraction(2, 7)
    mix = FiniteDistribution(
        (((0, 1), lam), ((1, 1), 1 - lam))
    )
    assert true_error(h, mix) == lam * true_error(h, d1) + (1 - lam) * true_error(h, d2)


@given(
    table=st.integers(min_value=0, max_value=255),
    pairs=st.lists(
        st.tuples(st.integers(0, 7), st.integers(0, 1)), min_size=1, max_size=12
    ),
)
def test_empirical_risk_is_multiple_of_one_over_m(table, pairs):
    h = Hypothesis.from_bits([(table >> i) & 1 for i in range(8)])
    s = Sample(tuple(pairs))
    risk = empirical_risk(h, s)
    assert 0 <= risk <= 1
    assert (risk * s.size).denominator == 1


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def test_draw_sample_point_mass():
    d = FiniteDistribution.point_mass(3, 1)
    s = draw_sample(d, 4, seed=99)
    assert s.pairs == ((3, 1),) * 4


def test_draw_sample_empty():
    d = FiniteDistribution.point_mass(3, 1)
    assert draw_sample(d, 0, seed=99) == Sample(())
    with pytest.raises(DomainError):
        draw_sample(d, -1, seed=99)


def test_draw_sample_deterministic():
    d = FiniteDistribution.uniform(((0, 0), (1, 1), (2, 0)))
    a = draw_sample(d, 200, seed=314159)
    b = draw_sample(d, 200, seed=314159)
    c = draw_sample(d, 200, seed=314160)
    assert a == b
    assert a != c


def test_draw_sample_frequencies_match_law():
    d = FiniteDistribution.uniform(((0, 0), (1, 1)))
    s = draw_sample(d, 10_000, seed=2718281828)
    count0 = sum(1 for p in s.pairs if p == (0, 0))
    freq = Fraction(count0, 10_000)
    assert abs(freq - Fraction(1, 2)) < Fraction(5, 100)


def test_draw_sample_skewed_law():
    d = FiniteDistribution(
        (((0, 0), Fraction(1, 10)), ((1, 1), Fraction(9, 10)))
    )
    s = draw_sample(d, 10_000, seed=1618)
    count1 = sum(1 for p in s.pairs if p == (1, 1))
    assert abs(Fraction(count1, 10_000) - Fraction(9, 10)) < Fraction(5, 100)


# ---------------------------------------------------------------------------
# Sample-size bound
# ---------------------------------------------------------------------------


def test_sample_size_pinned_values():
    assert sample_size(Fraction(1, 10), Fraction(1, 10), 1) == 2643
    assert sample_size(Fraction(1, 2), Fraction(1, 2), 0) == 23


def test_sample_size_monotone():
    for d in range(4):
        m_loose = sample_size(Fraction(1, 2), Fraction(1, 4), d)
        m_tight = sample_size(Fraction(1, 4), Fraction(1, 4), d)
        assert m_tight >= m_loose
        assert sample_size(Fraction(1, 4), Fraction(1, 8), d) >= m_tight
    assert sample_size(Fraction(1, 10), Fraction(1, 10), 2) > sample_size(
        Fraction(1, 10), Fraction(1, 10), 1
    )


def test_sample_size_matches_formula():
    eps, dlt, d = Fraction(1, 7), Fraction(1, 13), 3
    expected = math.ceil(8.0 * (d + math.log(13.0)) / (1.0 / 7.0) ** 2)
    assert sample_size(eps, dlt, d) == expected


def test_sample_size_domain():
    with pytest.raises(DomainError):
        sample_size(Fraction(0), Fraction(1, 2), 1)
    with pytest.raises(DomainError):
        sample_size(Fraction(1, 2), Fraction(1), 1)
    with pytest.raises(DomainError):
        sample_size(Fraction(1, 2), Fraction(1, 2), -1)
