"""Toy register machine, pinned program numbering, staged halting, and the
learner-to-halting reduction.

The machine has 4 registers and three opcodes: `INC r` (increment register r),
`DECJZ r l` (if register r is zero jump to instruction l, otherwise decrement
it and fall through), and `HALT`.  Programs run from all-zero registers; the
step count includes the final executed instruction, and falling off the end
of the program halts.  `K_s` — the set of program indices that halt within s
steps — is the staged approximation driving everything downstream.

The numbering packs instruction lists with the Cantor pairing function.  Any
numbering would do, and none is canonical; this one is pinned so that every
index here means the same program everywhere, and it is total: naturals that
decode to malformed instructions normalize to the one-instruction HALT
program.

The counterexample class contains, for every stage s and every index e that
has halted by stage s, the hypothesis that is 1 exactly at points 2e and
2s+1.  Feeding a proper ERM learner for that class the constant sample
((2e,1), ..., (2e,1)) and reading its output at 2e decides whether e halted
within the budget: parity keeps even "index" points and odd "stage" points
apart, so a zero-risk member exists iff e is in K_budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt
from typing import Callable, Iterable

from .classes import EnumeratedClass, point_pair_hypothesis
from .core import DomainError, FormatError, Sample
from .learners import Learner, erm_enumerated

__all__ = [
    "NUM_REGISTERS",
    "MAX_PROGRAM_LENGTH",
    "Instruction",
    "MachineProgram",
    "Coding",
    "CANTOR_CODING",
    "HaltingTable",
    "cantor_pair",
    "cantor_unpair",
    "encode_program",
    "decode_program",
    "simulate",
    "run_bounded",
    "halting_approx",
    "build_counterexample_class",
    "decide_via_learner",
    "reduction_rows",
    "reduction_csv",
    "min_window",
]

NUM_REGISTERS = 4

# Desk-scale bound on program length; keeps decoding any natural cheap.
MAX_PROGRAM_LENGTH = 1 << 20

INC = "INC"
DECJZ = "DECJZ"
HALT = "HALT"


# ---------------------------------------------------------------------------
# Programs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Instruction:
    """One machine instruction; `reg`/`target` are 0 where unused."""

    op: str
    reg: int = 0
    target: int = 0

    def __post_init__(self) -> None:
        if self.op == HALT:
            if self.reg != 0 or self.target != 0:
                raise DomainError("HALT takes no operands")
        elif self.op == INC:
            if not 0 <= self.reg < NUM_REGISTERS:
                raise DomainError(
                    f"register must lie in [0,{NUM_REGISTERS}), got {self.reg}"
                )
            if self.target != 0:
                raise DomainError("INC takes no jump target")
        elif self.op == DECJZ:
            if not 0 <= self.reg < NUM_REGISTERS:
                raise DomainError(
                    f"register must lie in [0,{NUM_REGISTERS}), got {self.reg}"
                )
            if self.target < 0:
                raise DomainError(f"jump target must be >= 0, got {self.target}")
        else:
            raise DomainError(f"unknown opcode: {self.op!r}")

    def to_text(self) -> str:
        if self.op == HALT:
            return HALT
        if self.op == INC:
            return f"INC {self.reg}"
        return f"DECJZ {self.reg} {self.target}"


@dataclass(frozen=True)
class MachineProgram:
    """A nonempty instruction sequence with jump targets in [0, length]."""

    instructions: tuple[Instruction, ...]

    def __post_init__(self) -> None:
        if not self.instructions:
            raise DomainError("programs have at least one instruction")
        if len(self.instructions) > MAX_PROGRAM_LENGTH:
            raise DomainError(
                f"programs are desk-scale: at most {MAX_PROGRAM_LENGTH} instructions"
            )
        n = len(self.instructions)
        for i, ins in enumerate(self.instructions):
            if ins.op == DECJZ and ins.target > n:
                raise DomainError(
                    f"instruction {i} jumps to {ins.target}, beyond length {n}"
                )

    def __len__(self) -> int:
        return len(self.instructions)

    def to_text(self) -> str:
        return "".join(ins.to_text() + "\n" for ins in self.instructions)

    @classmethod
    def from_text(cls, text: str) -> "MachineProgram":
        instructions = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            op = parts[0].upper()
            try:
                if op == HALT and len(parts) == 1:
                    instructions.append(Instruction(HALT))
                elif op == INC and len(parts) == 2:
                    instructions.append(Instruction(INC, reg=int(parts[1])))
                elif op == DECJZ and len(parts) == 3:
                    instructions.append(
                        Instruction(DECJZ, reg=int(parts[1]), target=int(parts[2]))
                    )
                else:
                    raise FormatError(
                        f"program line {lineno}: expected 'INC r', 'DECJZ r l' "
                        f"or 'HALT', got {raw!r}"
                    )
            except (ValueError, DomainError) as exc:
                raise FormatError(f"program line {lineno}: {exc}") from exc
        if not instructions:
            raise FormatError("program file has no instructions")
        try:
            return cls(tuple(instructions))
        except DomainError as exc:
            raise FormatError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Numbering (Cantor pairing; total decode via HALT normalization)
# ---------------------------------------------------------------------------

def cantor_pair(a: int, b: int) -> int:
    """The Cantor pairing (a+b)(a+b+1)/2 + b, a bijection N^2 -> N."""
    if a < 0 or b < 0:
        raise DomainError(f"pairing is over naturals, got ({a}, {b})")
    return (a + b) * (a + b + 1) // 2 + b

def cantor_unpair(n: int) -> tuple[int, int]:
    if n < 0:
        raise DomainError(f"unpairing is over naturals, got {n}")
    w = (isqrt(8 * n + 1) - 1) // 2
    b = n - w * (w + 1) // 2
    return w - b, b


_CANONICAL = (Instruction(HALT),)

# Opcode tags inside an instruction code c = tag + 3*payload.
_TAG_HALT = 0
_TAG_INC = 1
_TAG_DECJZ = 2


def _encode_instruction(ins: Instruction) -> int:
    if ins.op == HALT:
        return _TAG_HALT
    if ins.op == INC:
        return _TAG_INC + 3 * ins.reg
    return _TAG_DECJZ + 3 * cantor_pair(ins.reg, ins.target)


def _decode_instruction(code: int, length: int) -> Instruction | None:
    """None marks a malformed code (bad register, target, or HALT payload)."""
    tag, payload = code % 3, code // 3
    if tag == _TAG_HALT:
        return Instruction(HALT) if payload == 0 else None
    if tag == _TAG_INC:
        return Instruction(INC, reg=payload) if payload < NUM_REGISTERS else None
    reg, target = cantor_unpair(payload)
    if reg >= NUM_REGISTERS or target > length:
        return None
    return Instruction(DECJZ, reg=reg, target=target)


def encode_program(program: MachineProgram) -> int:
    """code = pair(length-1, chain), chain = right-nested pairing of the
    instruction codes (a single instruction's chain is its own code)."""
    codes = [_encode_instruction(ins) for ins in program.instructions]
    chain = codes[-1]
    for c in reversed(codes[:-1]):
        chain = cantor_pair(c, chain)
    return cantor_pair(len(codes) - 1, chain)


def decode_program(index: int) -> MachineProgram:
    """Total decoding: every natural is some program.

    Indices whose instruction codes are malformed (register out of range,
    jump target beyond the program, nonzero HALT payload) normalize to the
    canonical one-instruction HALT program.
    """
    if index < 0:
        raise DomainError(f"program indices are naturals, got {index}")
    length_minus_one, chain = cantor_unpair(index)
    length = length_minus_one + 1
    if length > MAX_PROGRAM_LENGTH:
        return MachineProgram(_CANONICAL)
    codes = []
    for _ in range(length - 1):
        code, chain = cantor_unpair(chain)
        codes.append(code)
    codes.append(chain)
    instructions = []
    for code in codes:
        ins = _decode_instruction(code, length)
        if ins is None:
            return MachineProgram(_CANONICAL)
        instructions.append(ins)
    return MachineProgram(tuple(instructions))


@dataclass(frozen=True, eq=False)
class Coding:
    """A program numbering: encode/decode with decode total."""

    encode: Callable[[MachineProgram], int]
    decode: Callable[[int], MachineProgram]


CANTOR_CODING = Coding(encode=encode_program, decode=decode_program)


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

def simulate(program: MachineProgram, budget: int) -> int | None:
    """Run from all-zero registers for at most `budget` steps.

    Returns the exact halting step (counting the executed HALT or the
    instruction that ran off the end) or None if still running after the
    budget.
    """
    if budget < 0:
        raise DomainError(f"budget must be >= 0, got {budget}")
    registers = [0] * NUM_REGISTERS
    instructions = program.instructions
    length = len(instructions)
    pc = 0
    for step in range(1, budget + 1):
        ins = instructions[pc]
        if ins.op == HALT:
            return step
        if ins.op == INC:
            registers[ins.reg] += 1
            pc += 1
        else:  # DECJZ: jump on zero, else decrement and fall through
            if registers[ins.reg] == 0:
                pc = ins.target
            else:
                registers[ins.reg] -= 1
                pc += 1
        if pc >= length:
            return step
    return None


def run_bounded(e: int, s: int) -> int | None:
    """Halting step of program index e within s steps, or None (still running)."""
    return simulate(decode_program(e), s)


# ---------------------------------------------------------------------------
# Staged halting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HaltingTable:
    """Halting steps for indices below max_index within a step budget.

    `halted[e]` is the least step at which program e halts, or None.  K_s is
    then {e : halted[e] is not None and halted[e] <= s}, monotone in s by
    construction.
    """

    budget: int
    halted: tuple[int | None, ...]

    def __post_init__(self) -> None:
        if self.budget < 0:
            raise DomainError(f"budget must be >= 0, got {self.budget}")
        for e, t in enumerate(self.halted):
            if t is not None and not 1 <= t <= self.budget:
                raise DomainError(
                    f"halting step of index {e} must lie in [1,{self.budget}], got {t}"
                )

    @property
    def max_index(self) -> int:
        return len(self.halted)

    def in_k(self, e: int, s: int | None = None) -> bool:
        """Whether e is in K_s (s defaults to, and is capped at, the budget)."""
        if not 0 <= e < len(self.halted):
            raise DomainError(f"index {e} outside table range {len(self.halted)}")
        s = self.budget if s is None else s
        if s < 0:
            raise DomainError(f"stage must be >= 0, got {s}")
        t = self.halted[e]
        return t is not None and t <= min(s, self.budget)

    def k_set(self, s: int | None = None) -> list[int]:
        return [e for e in range(len(self.halted)) if self.in_k(e, s)]

    def to_csv(self) -> str:
        """Header "e,halt_step", then one row per index; blank step = running."""
        lines = ["e,halt_step\n"]
        for e, t in enumerate(self.halted):
            lines.append(f"{e},{'' if t is None else t}\n")
        return "".join(lines)

    @classmethod
    def from_csv(cls, text: str, budget: int) -> "HaltingTable":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != "e,halt_step":
            raise FormatError('halting CSV must start with header "e,halt_step"')
        halted: list[int | None] = []
        for lineno, ln in enumerate(lines[1:], start=2):
            parts = ln.split(",")
            if len(parts) != 2:
                raise FormatError(f"halting CSV line {lineno}: got {ln!r}")
            try:
                e = int(parts[0])
                t = None if parts[1] == "" else int(parts[1])
            except ValueError as exc:
                raise FormatError(f"halting CSV line {lineno}: {exc}") from exc
            if e != len(halted):
                raise FormatError(
                    f"halting CSV line {lineno}: expected index {len(halted)}, got {e}"
                )
            halted.append(t)
        try:
            return cls(budget=budget, halted=tuple(halted))
        except DomainError as exc:
            raise FormatError(str(exc)) from exc


def halting_approx(max_index: int, budget: int) -> HaltingTable:
    """Run every index below max_index for `budget` steps and tabulate."""
    if max_index < 0:
        raise DomainError(f"max_index must be >= 0, got {max_index}")
    return HaltingTable(
        budget=budget,
        halted=tuple(run_bounded(e, budget) for e in range(max_index)),
    )


# ---------------------------------------------------------------------------
# Counterexample class and reduction
# ---------------------------------------------------------------------------

def min_window(max_index: int, budget: int) -> int:
    """Smallest window admitting all points 2e (e < max_index) and 2s+1 (s <= budget)."""
    return max(2 * max_index, 2 * budget + 1) + 1


def build_counterexample_class(
    max_index: int, budget: int, window: int
) -> EnumeratedClass:
    """Enumerate the two-point hypotheses h_{s,e} for stages s = 1..budget and
    every index e < max_index with e in K_s, in lexicographic (s, e) order."""
    if max_index < 0 or budget < 0:
        raise DomainError("max_index and budget must be naturals")
    if 2 * max_index >= window or 2 * budget + 1 >= window:
        raise DomainError(
            f"window {window} too small; need at least {min_window(max_index, budget)}"
        )
    table = halting_approx(max_index, budget)
    hypotheses = []
    for s in range(1, budget + 1):
        for e in range(max_index):
            if table.in_k(e, s):
                hypotheses.append(point_pair_hypothesis(s, e, window))
    return EnumeratedClass(window=window, hypotheses=tuple(hypotheses))


def decide_via_learner(learner: Learner, e: int, m: int) -> bool:
    """Decide staged halting of e by querying a proper learner.

    Feeds the learner the sample ((2e,1)) repeated m times and reports whether
    its output labels 2e with 1.  For a proper ERM learner over the
    counterexample class this equals e in K_budget: members are 1 only at one
    even and one odd point, so a member with value 1 at 2e exists iff some
    h_{s,e} is in the class.
    """
    if m < 1:
        raise DomainError(f"the query sample must be nonempty, got m={m}")
    if e < 0:
        raise DomainError(f"program indices are naturals, got {e}")
    proper = learner.proper_for
    if proper is not None and 2 * e >= proper.window:
        raise DomainError(
            f"point 2e={2 * e} is outside the learner's class window {proper.window}"
        )
    sample = Sample(((2 * e, 1),) * m)
    return learner.apply(sample).evaluate(2 * e) == 1


def reduction_rows(
    max_index: int, budget: int, m: int, window: int | None = None
) -> list[tuple[int, bool, bool, bool]]:
    """Rows (e, learner_says, ground_truth, agree) for every e < max_index.

    ground_truth is direct simulation membership in K_budget; learner_says is
    decide_via_learner over a least-index ERM learner for the counterexample
    class at the same budget.  When nothing has halted the class is empty and
    no learner exists; rows then report learner_says = 0, matching the empty
    K_budget.
    """
    if m < 1:
        raise DomainError(f"the query sample must be nonempty, got m={m}")
    if window is None:
        window = min_window(max_index, budget)
    cls_ = build_counterexample_class(max_index, budget, window)
    table = halting_approx(max_index, budget)
    learner = erm_enumerated(cls_) if cls_.hypotheses else None
    rows = []
    for e in range(max_index):
        truth = table.in_k(e)
        if learner is None:
            says = False
        else:
            says = decide_via_learner(learner, e, m)
        rows.append((e, says, truth, says == truth))
    return rows


def reduction_csv(rows: Iterable[tuple[int, bool, bool, bool]]) -> str:
    """CSV "e,learner_says,ground_truth,agree" with 0/1 cells."""
    lines = ["e,learner_says,ground_truth,agree\n"]
    for e, says, truth, agree in rows:
        lines.append(f"{e},{int(says)},{int(truth)},{int(agree)}\n")
    return "".join(lines)
