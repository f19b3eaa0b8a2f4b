"""Pydantic request/response models for the paclab service.

Program codes travel as decimal strings because they routinely exceed the
53-bit range that non-Python JSON consumers can represent exactly.  Exact
rationals travel as "p/q" strings for the same reason.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class ClassSpec(BaseModel):
    """Where a hypothesis class comes from: a built-in family or a file body.

    Exactly one source must be given: `family` (with `window`, plus `budget`
    and `max_index` for the counterexample family), `tree_text` (tree file
    format: "horizon D" header then maximal strings), or `enum_text`
    (enumerated file format: "window W" header then bit-table lines).
    `dedup` collapses extensionally equal hypotheses of an enumerated class,
    keeping first occurrences.
    """

    family: str | None = None
    window: int | None = None
    budget: int | None = None
    max_index: int | None = None
    dedup: bool = False
    tree_text: str | None = None
    enum_text: str | None = None


class HealthResponse(BaseModel):
    status: str


class VcRequest(BaseModel):
    class_spec: ClassSpec
    window: int | None = None
    cap: int = 4


class VcResponse(BaseModel):
    value: int
    exact: bool
    rendered: str
    shattered: list[int]


class WitnessRequest(BaseModel):
    class_spec: ClassSpec
    d: int
    tuples: list[list[int]] | None = None  # None means every tuple in the window
    window: int | None = None


class WitnessEntry(BaseModel):
    points: list[int]
    labeling: str


class WitnessResponse(BaseModel):
    d: int
    entries: list[WitnessEntry]
    certificate: str


class CheckWitnessRequest(BaseModel):
    class_spec: ClassSpec
    certificate: str
    d: int | None = None


class CheckWitnessResponse(BaseModel):
    valid: bool


class ErmRequest(BaseModel):
    class_spec: ClassSpec
    sample: str = Field(description="sample file body: one 'x,y' line per pair")
    tree: bool | None = None  # None: infer from the class representation


class ErmResponse(BaseModel):
    table: str
    completion: str
    empirical_risk: str | None  # "p/q"; None for the empty sample
    window: int


class ValidateErmRequest(BaseModel):
    class_spec: ClassSpec
    tree: bool | None = None
    samples: list[str] | None = None  # explicit sample file bodies
    seed: int = 0
    count: int = 200
    max_size: int = 8


class ValidateResponse(BaseModel):
    ok: bool
    counterexample: str | None = None
    reason: str | None = None


class AsymptoticRequest(BaseModel):
    class_spec: ClassSpec
    stages: str = Field(description="'full' or 'linear' stage schedule")
    horizon: int = 32
    battery_per_size: int = 20
    battery_seed: int = 0


class AsymptoticResponse(BaseModel):
    schedule: str
    vanishes: bool


class ValidateAermRequest(BaseModel):
    class_spec: ClassSpec
    stages: str = "full"
    schedule: str | None = None  # schedule file body; None certifies one first
    samples: list[str] | None = None
    seed: int = 0
    count: int = 200
    max_size: int = 8


class HaltingTableRequest(BaseModel):
    max_index: int
    budget: int


class HaltingTableResponse(BaseModel):
    csv: str
    halted: list[int | None]
    k_size: int


class ReduceRequest(BaseModel):
    max_index: int
    budget: int
    m: int = 1
    window: int | None = None


class ReduceRow(BaseModel):
    e: int
    learner_says: bool
    ground_truth: bool
    agree: bool


class ReduceResponse(BaseModel):
    csv: str
    rows: list[ReduceRow]
    all_agree: bool


class EncodeRequest(BaseModel):
    program: str = Field(description="program text: INC r / DECJZ r l / HALT lines")


class EncodeResponse(BaseModel):
    code: str  # decimal string; codes exceed exact-JSON integer range


class DecodeRequest(BaseModel):
    code: str


class DecodeResponse(BaseModel):
    program: str
    canonical: bool  # True when the code was malformed and normalized to HALT


class PacRunRequest(BaseModel):
    config: dict[str, str] = Field(
        description="ExperimentConfig keys to values, as config-file strings"
    )


class PacRunResponse(BaseModel):
    m: int
    trials: int
    successes: int
    success_rate: str
    bayes_risk: str
    verdict: bool
    report_csv: str


class EnumerateRequest(BaseModel):
    class_spec: ClassSpec
    limit: int | None = None


class EnumerateResponse(BaseModel):
    window: int
    count: int
    text: str


class ErrorBody(BaseModel):
    category: str
    detail: str
