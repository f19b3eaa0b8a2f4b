"""Tests for the register machine, program numbering, staged halting sets,
the halting-based hypothesis class, and the learner reduction."""

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from paclab.core import DomainError, FormatError
from paclab.machine import (
    DECJZ,
    HALT,
    INC,
    MAX_PROGRAM_LENGTH,
    NUM_REGISTERS,
    HaltingTable,
    Instruction,
    MachineProgram,
    build_counterexample_class,
    cantor_pair,
    cantor_unpair,
    decide_via_learner,
    decode_program,
    encode_program,
    halting_approx,
    min_window,
    reduction_csv,
    reduction_rows,
    run_bounded,
    simulate,
)
from paclab.learners import erm_enumerated

# ---------------------------------------------------------------------------
# independent reference simulator (test-local oracle)
# ---------------------------------------------------------------------------


def reference_halts_at(program: MachineProgram, budget: int) -> int | None:
    """Straight-line reimplementation used only to cross-check simulate()."""
    regs = [0] * NUM_REGISTERS
    pc = 0
    for step in range(1, budget + 1):
        ins = program.instructions[pc]
        if ins.op == HALT:
            return step
        if ins.op == INC:
            regs[ins.reg] += 1
            pc += 1
        else:  # DECJZ
            if regs[ins.reg] == 0:
                pc = ins.target
            else:
                regs[ins.reg] -= 1
                pc += 1
        if pc >= len(program.instructions):
            return step
    return None


# ---------------------------------------------------------------------------
# instructions and programs
# ---------------------------------------------------------------------------


def test_instruction_validation():
    Instruction(INC, 3)
    Instruction(DECJZ, 0, 7)
    Instruction(HALT)
    with pytest.raises(DomainError):
        Instruction(INC, NUM_REGISTERS)
    with pytest.raises(DomainError):
        Instruction(HALT, reg=1)
    with pytest.raises(DomainError):
        Instruction("NOP")


def test_program_validation():
    with pytest.raises(DomainError):
        MachineProgram(())
    with pytest.raises(DomainError):
        MachineProgram((Instruction(DECJZ, 0, 3), Instruction(HALT)))  # target 3 > len


def test_program_text_round_trip():
    prog = MachineProgram(
        (Instruction(INC, 0), Instruction(DECJZ, 1, 1), Instruction(HALT))
    )
    text = prog.to_text()
    assert text.splitlines() == ["INC 0", "DECJZ 1 1", "HALT"]
    assert MachineProgram.from_text(text) == prog
    assert MachineProgram.from_text("# loop\nINC 0\nDECJZ 1 1\n") == MachineProgram(
        (Instruction(INC, 0), Instruction(DECJZ, 1, 1))
    )


def test_program_from_text_errors():
    with pytest.raises(FormatError):
        MachineProgram.from_text("")
    with pytest.raises(FormatError):
        MachineProgram.from_text("JMP 0\n")
    with pytest.raises(FormatError):
        MachineProgram.from_text("INC\n")
    with pytest.raises(FormatError):
        MachineProgram.from_text("DECJZ 0 9\n")  # target beyond program end


# ---------------------------------------------------------------------------
# numbering
# ---------------------------------------------------------------------------


@given(a=st.integers(0, 10_000), b=st.integers(0, 10_000))
def test_cantor_pair_round_trip(a, b):
    assert cantor_unpair(cantor_pair(a, b)) == (a, b)


def test_cantor_pair_is_bijective_prefix():
    seen = {cantor_pair(a, b) for a in range(40) for b in range(40)}
    # the pairing enumerates an initial segment on the diagonal triangle
    assert len(seen) == 1600
    assert min(seen) == 0


def test_encode_pinned_values():
    assert encode_program(MachineProgram((Instruction(HALT),))) == 0
    assert encode_program(MachineProgram((Instruction(INC, 0),))) == 2
    assert encode_program(MachineProgram((Instruction(DECJZ, 0, 0),))) == 5
    two = MachineProgram((Instruction(INC, 0), Instruction(DECJZ, 1, 1)))
    assert encode_program(two) == 9314


def test_decode_pinned_values():
    assert decode_program(0) == MachineProgram((Instruction(HALT),))
    assert decode_program(2) == MachineProgram((Instruction(INC, 0),))
    assert decode_program(5) == MachineProgram((Instruction(DECJZ, 0, 0),))
    assert decode_program(9314) == MachineProgram(
        (Instruction(INC, 0), Instruction(DECJZ, 1, 1))
    )


def test_decode_is_total_on_prefix():
    for n in range(2000):
        prog = decode_program(n)
        assert len(prog) >= 1  # constructor validated it


def test_decode_malformed_falls_back_to_halt():
    # instruction code 3 decodes to tag HALT with payload 1: malformed, so the
    # whole program index collapses to the canonical single HALT
    bad = cantor_pair(0, 3)
    assert decode_program(bad) == MachineProgram((Instruction(HALT),))


def test_decode_oversized_length_falls_back():
    huge = cantor_pair(MAX_PROGRAM_LENGTH + 7, 0)
    assert decode_program(huge) == MachineProgram((Instruction(HALT),))


def program_strategy():
    instruction = st.one_of(
        st.just(Instruction(HALT)),
        st.builds(Instruction, st.just(INC), st.integers(0, NUM_REGISTERS - 1)),
        st.builds(
            Instruction,
            st.just(DECJZ),
            st.integers(0, NUM_REGISTERS - 1),
            st.integers(0, 6),
        ),
    )
    return (
        st.lists(instruction, min_size=1, max_size=6)
        .map(tuple)
        .filter(
            lambda ins: all(
                i.op != DECJZ or i.target <= len(ins) for i in ins
            )
        )
        .map(MachineProgram)
    )


@given(prog=program_strategy())
def test_encode_decode_round_trip(prog):
    assert decode_program(encode_program(prog)) == prog


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------


def test_simulate_halt_immediately():
    assert simulate(MachineProgram((Instruction(HALT),)), 1) == 1


def test_simulate_counts_final_instruction():
    prog = MachineProgram((Instruction(INC, 0), Instruction(HALT)))
    assert simulate(prog, 10) == 2
    assert simulate(prog, 1) is None  # budget too small


def test_simulate_fall_off_end_halts():
    prog = MachineProgram((Instruction(INC, 0), Instruction(DECJZ, 0, 0)))
    # INC at step 1; DECJZ sees reg 0 = 1, decrements, pc moves past the end
    assert simulate(prog, 10) == 2


def test_simulate_jump_to_self_loops():
    loop = MachineProgram((Instruction(DECJZ, 0, 0),))
    assert simulate(loop, 10_000) is None
    two = MachineProgram((Instruction(INC, 0), Instruction(DECJZ, 1, 1)))
    assert simulate(two, 10_000) is None


def test_simulate_decjz_taken_branch():
    # DECJZ on a zero register jumps without decrementing
    prog = MachineProgram(
        (Instruction(DECJZ, 0, 2), Instruction(INC, 0), Instruction(HALT))
    )
    assert simulate(prog, 10) == 2  # jump at step 1, HALT at step 2


def test_simulate_validation():
    with pytest.raises(DomainError):
        simulate(MachineProgram((Instruction(HALT),)), -1)
    assert simulate(MachineProgram((Instruction(HALT),)), 0) is None


@given(n=st.integers(0, 3_000), budget=st.integers(0, 64))
def test_simulate_matches_reference(n, budget):
    prog = decode_program(n)
    assert simulate(prog, budget) == reference_halts_at(prog, budget)


@given(n=st.integers(0, 2_000))
def test_halting_step_stable_under_budget_growth(n):
    t = run_bounded(n, 64)
    if t is not None:
        for s in (t, t + 1, t + 17, 200):
            assert run_bounded(n, s) == t
        if t > 1:
            assert run_bounded(n, t - 1) is None


# ---------------------------------------------------------------------------
# staged halting sets
# ---------------------------------------------------------------------------


def test_k_zero_is_empty():
    table = halting_approx(32, 0)
    assert table.k_set() == []


def test_k_monotone_in_stage():
    table = halting_approx(64, 256)
    for e in range(64):
        for s in range(1, 256):
            if table.in_k(e, s):
                assert table.in_k(e, s + 1)


def test_k_known_census():
    # recount with the test-local reference simulator
    table = halting_approx(64, 256)
    expected = []
    for e in range(64):
        if reference_halts_at(decode_program(e), 256) is not None:
            expected.append(e)
    assert table.k_set() == expected
    assert len(expected) == 52
    non_halters = [e for e in range(64) if e not in expected]
    assert non_halters == [5, 13, 18, 20, 24, 31, 39, 43, 48, 52, 58, 62]


def test_halting_table_csv_round_trip():
    table = halting_approx(8, 16)
    text = table.to_csv()
    assert text.splitlines()[0] == "e,halt_step"
    back = HaltingTable.from_csv(text, budget=16)
    assert back == table


def test_halting_table_csv_errors():
    with pytest.raises(FormatError):
        HaltingTable.from_csv("bogus header\n0,1\n", budget=4)
    with pytest.raises(FormatError):
        HaltingTable.from_csv("e,halt_step\n0,notanumber\n", budget=4)


# ---------------------------------------------------------------------------
# the halting-based class
# ---------------------------------------------------------------------------


def test_min_window():
    assert min_window(64, 256) == max(2 * 64, 2 * 256 + 1) + 1
    assert min_window(4, 1) == 9


def test_counterexample_class_budget_zero_is_empty():
    cls_ = build_counterexample_class(16, 0, min_window(16, 0))
    assert len(cls_) == 0


def test_counterexample_class_window_too_small():
    with pytest.raises(DomainError):
        build_counterexample_class(16, 16, 32)


def test_counterexample_members_have_exactly_two_ones():
    window = min_window(8, 16)
    cls_ = build_counterexample_class(8, 16, window)
    for h in cls_.hypotheses:
        ones = [x for x in range(window) if h.evaluate(x)]
        assert len(ones) == 2
        even, odd = ones if ones[0] % 2 == 0 else (ones[1], ones[0])
        assert even % 2 == 0 and odd % 2 == 1


def test_counterexample_members_match_staged_halting():
    max_index, budget = 8, 16
    window = min_window(max_index, budget)
    cls_ = build_counterexample_class(max_index, budget, window)
    table = halting_approx(max_index, budget)

    # reconstruct each member's (s, e) from its two marked points
    seen = []
    for h in cls_.hypotheses:
        ones = [x for x in range(window) if h.evaluate(x)]
        even = next(x for x in ones if x % 2 == 0)
        odd = next(x for x in ones if x % 2 == 1)
        seen.append(((odd - 1) // 2, even // 2))  # (s, e)

    expected = [
        (s, e)
        for s in range(1, budget + 1)
        for e in range(max_index)
        if table.in_k(e, s)
    ]
    assert seen == expected  # same members, same lexicographic (s, e) order

    # h_{s,e} appears exactly for the stages s >= the halting step of e
    for e in range(max_index):
        stages = [s for (s, ee) in seen if ee == e]
        t = run_bounded(e, budget)
        if t is None:
            assert stages == []
        else:
            assert stages == list(range(t, budget + 1))


# ---------------------------------------------------------------------------
# deciding halting through the learner
# ---------------------------------------------------------------------------


def test_decide_via_learner_matches_truth():
    max_index, budget = 8, 16
    cls_ = build_counterexample_class(max_index, budget, min_window(max_index, budget))
    learner = erm_enumerated(cls_)
    table = halting_approx(max_index, budget)
    for e in range(max_index):
        assert decide_via_learner(learner, e, 1) == table.in_k(e)
        assert decide_via_learner(learner, e, 5) == table.in_k(e)


def test_decide_via_learner_validation():
    cls_ = build_counterexample_class(4, 4, min_window(4, 4))
    learner = erm_enumerated(cls_)
    with pytest.raises(DomainError):
        decide_via_learner(learner, 2, 0)
    with pytest.raises(DomainError):
        decide_via_learner(learner, -1, 1)
    with pytest.raises(DomainError):
        decide_via_learner(learner, 10**6, 1)  # 2e outside the class window


def test_reduction_rows_all_agree():
    for m in (1, 3):
        rows = reduction_rows(16, 64, m)
        assert len(rows) == 16
        assert all(agree for (_, _, _, agree) in rows)
        table = halting_approx(16, 64)
        for e, says, truth, _ in rows:
            assert truth == table.in_k(e)
            assert says == truth


def test_reduction_rows_empty_class_budget_zero():
    rows = reduction_rows(8, 0, 1)
    assert all(not says and not truth and agree for (_, says, truth, agree) in rows)


def test_reduction_rows_validation():
    with pytest.raises(DomainError):
        reduction_rows(8, 4, 0)


def test_reduction_csv_layout():
    rows = reduction_rows(4, 8, 1)
    text = reduction_csv(rows)
    lines = text.splitlines()
    assert lines[0] == "e,learner_says,ground_truth,agree"
    assert lines[1] == "0,1,1,1"  # program 0 is HALT: halts at step 1
    assert all(len(line.split(",")) == 4 for line in lines[1:])
