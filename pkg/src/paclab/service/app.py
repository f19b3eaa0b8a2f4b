"""The paclab FastAPI application: stateless endpoints over the library."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..classes import AnyClass, EnumeratedClass, TreeClass
from ..core import (
    DomainError,
    EmptyClassError,
    EmptySampleError,
    FormatError,
    HorizonExceededError,
    InvariantViolationError,
    NoWitnessError,
    PacLabError,
    Sample,
    SplitMix64,
    empirical_risk,
    subseed,
)
from ..harness import (
    ExperimentConfig,
    build_class,
    render_report,
    run_pac_experiment,
)
from ..learners import (
    EpsilonSchedule,
    asymptotic_erm,
    default_battery,
    erm_enumerated,
    erm_tree,
    find_asymptotic_violation,
    find_erm_violation,
)
from ..machine import (
    MachineProgram,
    decode_program,
    encode_program,
    halting_approx,
    reduction_csv,
    reduction_rows,
)
from ..vc import (
    WitnessCertificate,
    all_tuples,
    check_witness,
    make_certificate,
    vc_dimension,
)
from .models import (
    AsymptoticRequest,
    AsymptoticResponse,
    CheckWitnessRequest,
    CheckWitnessResponse,
    ClassSpec,
    DecodeRequest,
    DecodeResponse,
    EncodeRequest,
    EncodeResponse,
    EnumerateRequest,
    EnumerateResponse,
    ErmRequest,
    ErmResponse,
    HaltingTableRequest,
    HaltingTableResponse,
    HealthResponse,
    PacRunRequest,
    PacRunResponse,
    ReduceRequest,
    ReduceResponse,
    ReduceRow,
    ValidateAermRequest,
    ValidateErmRequest,
    ValidateResponse,
    VcRequest,
    VcResponse,
    WitnessEntry,
    WitnessRequest,
    WitnessResponse,
)

app = FastAPI(
    title="paclab",
    description=(
        "Desk-scale workbench for computable PAC learning: hypothesis classes, "
        "proper ERM learners, VC certificates, and a bounded-halting reduction."
    ),
)

_ERROR_CATEGORIES: tuple[tuple[type[PacLabError], str, int], ...] = (
    (FormatError, "format-error", 400),
    (EmptySampleError, "empty-sample", 400),
    (EmptyClassError, "empty-class", 400),
    (NoWitnessError, "no-witness", 400),
    (HorizonExceededError, "horizon-exceeded", 400),
    (InvariantViolationError, "invariant-violation", 500),
    (DomainError, "domain-error", 400),
)


@app.exception_handler(PacLabError)
async def paclab_error_handler(request: Request, exc: PacLabError) -> JSONResponse:
    for kind, category, status in _ERROR_CATEGORIES:
        if isinstance(exc, kind):
            return JSONResponse(
                status_code=status,
                content={"category": category, "detail": str(exc)},
            )
    return JSONResponse(
        status_code=400, content={"category": "error", "detail": str(exc)}
    )


def resolve_class(spec: ClassSpec) -> AnyClass:
    """Materialize a ClassSpec: built-in family, tree file body, or enum body."""
    sources = [
        spec.family is not None,
        spec.tree_text is not None,
        spec.enum_text is not None,
    ]
    if sum(sources) != 1:
        raise DomainError(
            "class spec needs exactly one of family, tree_text, or enum_text"
        )
    if spec.tree_text is not None:
        return TreeClass.from_text(spec.tree_text)
    if spec.enum_text is not None:
        cls_ = EnumeratedClass.from_text(spec.enum_text)
        return _dedup(cls_) if spec.dedup else cls_
    if spec.window is None and spec.family != "counterexample":
        raise DomainError("built-in families need a window")
    cls_ = build_class(spec.family, spec.window, spec.budget, spec.max_index)
    if spec.dedup and isinstance(cls_, EnumeratedClass):
        cls_ = _dedup(cls_)
    return cls_


def _dedup(cls_: EnumeratedClass) -> EnumeratedClass:
    seen: set[tuple[bytes, str]] = set()
    kept = []
    for h in cls_.hypotheses:
        key = (h.table, h.completion)
        if key not in seen:
            seen.add(key)
            kept.append(h)
    return EnumeratedClass(window=cls_.window, hypotheses=tuple(kept))


def _pick_learner(cls_: AnyClass, tree: bool | None):
    """Infer the proper learner; an explicit flag must match the class kind."""
    is_tree = isinstance(cls_, TreeClass)
    if tree is True and not is_tree:
        raise DomainError("tree learner requested for an enumerated class")
    if tree is False and is_tree:
        raise DomainError("enumeration learner requested for a tree class")
    return erm_tree(cls_) if is_tree else erm_enumerated(cls_)


def _fuzz_samples(
    cls_: AnyClass, seed: int, count: int, max_size: int
) -> list[Sample]:
    """Deterministic validation battery over the class window (sizes 0..max)."""
    window = cls_.window
    if window < 1:
        raise DomainError("validation needs a class with window >= 1")
    if count < 1 or max_size < 0:
        raise DomainError("validation needs count >= 1 and max_size >= 0")
    samples = []
    for j in range(count):
        rng = SplitMix64(subseed(seed, j))
        m = rng.next_below(max_size + 1)
        pairs = tuple(
            (rng.next_below(window), rng.next_u64() & 1) for _ in range(m)
        )
        samples.append(Sample(pairs))
    return samples


def _collect_samples(
    cls_: AnyClass,
    explicit: list[str] | None,
    seed: int,
    count: int,
    max_size: int,
) -> list[Sample]:
    if explicit is not None:
        return [Sample.from_text(text) for text in explicit]
    return _fuzz_samples(cls_, seed, count, max_size)


_STAGE_SCHEDULES = {
    "full": lambda size: (lambda m: size),
    "linear": lambda size: (lambda m: m),
}


def _stage_schedule(spec: str, size: int):
    if spec not in _STAGE_SCHEDULES:
        raise DomainError(
            f"unknown stage schedule {spec!r}; expected one of "
            f"{sorted(_STAGE_SCHEDULES)}"
        )
    return _STAGE_SCHEDULES[spec](size)


# ---------------------------------------------------------------------------
# Endpoints
# ---------------------------------------------------------------------------

@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok")


@app.post("/vc", response_model=VcResponse)
def vc_endpoint(req: VcRequest) -> VcResponse:
    cls_ = resolve_class(req.class_spec)
    window = cls_.window if req.window is None else req.window
    result = vc_dimension(cls_, window, cap=req.cap)
    return VcResponse(
        value=result.value,
        exact=result.exact,
        rendered=result.render(),
        shattered=list(result.shattered),
    )


@app.post("/witness", response_model=WitnessResponse)
def witness_endpoint(req: WitnessRequest) -> WitnessResponse:
    cls_ = resolve_class(req.class_spec)
    window = cls_.window if req.window is None else req.window
    if req.tuples is None:
        tuples = all_tuples(window, req.d)
    else:
        tuples = [tuple(t) for t in req.tuples]
    cert = make_certificate(cls_, req.d, tuples)
    entries = [
        WitnessEntry(
            points=list(pts), labeling="".join(str(b) for b in labeling)
        )
        for pts, labeling in cert.entries
    ]
    return WitnessResponse(d=req.d, entries=entries, certificate=cert.to_text())


@app.post("/witness/check", response_model=CheckWitnessResponse)
def check_witness_endpoint(req: CheckWitnessRequest) -> CheckWitnessResponse:
    cls_ = resolve_class(req.class_spec)
    cert = WitnessCertificate.from_text(req.certificate, d=req.d)
    return CheckWitnessResponse(valid=check_witness(cls_, cert))


@app.post("/erm", response_model=ErmResponse)
def erm_endpoint(req: ErmRequest) -> ErmResponse:
    cls_ = resolve_class(req.class_spec)
    learner = _pick_learner(cls_, req.tree)
    sample = Sample.from_text(req.sample)
    output = learner.apply(sample)
    if sample.size:
        risk = empirical_risk(output, sample)
        risk_str = f"{risk.numerator}/{risk.denominator}"
    else:
        risk_str = None
    return ErmResponse(
        table=output.table_string(),
        completion=output.completion,
        empirical_risk=risk_str,
        window=output.window,
    )


@app.post("/validate/erm", response_model=ValidateResponse)
def validate_erm_endpoint(req: ValidateErmRequest) -> ValidateResponse:
    cls_ = resolve_class(req.class_spec)
    learner = _pick_learner(cls_, req.tree)
    samples = _collect_samples(cls_, req.samples, req.seed, req.count, req.max_size)
    violation = find_erm_violation(learner, cls_, samples)
    if violation is None:
        return ValidateResponse(ok=True)
    sample, reason = violation
    return ValidateResponse(ok=False, counterexample=sample.to_text(), reason=reason)


@app.post("/aerm", response_model=AsymptoticResponse)
def asymptotic_endpoint(req: AsymptoticRequest) -> AsymptoticResponse:
    cls_ = resolve_class(req.class_spec)
    if not isinstance(cls_, EnumeratedClass):
        raise DomainError("asymptotic ERM needs an enumerated class")
    _, schedule = asymptotic_erm(
        cls_,
        _stage_schedule(req.stages, len(cls_.hypotheses)),
        horizon=req.horizon,
        battery_per_size=req.battery_per_size,
        battery_seed=req.battery_seed,
    )
    return AsymptoticResponse(schedule=schedule.to_text(), vanishes=schedule.vanishes())


@app.post("/validate/aerm", response_model=ValidateResponse)
def validate_aerm_endpoint(req: ValidateAermRequest) -> ValidateResponse:
    cls_ = resolve_class(req.class_spec)
    if not isinstance(cls_, EnumeratedClass):
        raise DomainError("asymptotic ERM needs an enumerated class")
    learner, certified = asymptotic_erm(
        cls_,
        _stage_schedule(req.stages, len(cls_.hypotheses)),
        battery_seed=req.seed,
    )
    if req.schedule is not None:
        schedule = EpsilonSchedule.from_text(req.schedule)
    else:
        schedule = certified
    if req.samples is not None:
        samples = [Sample.from_text(text) for text in req.samples]
    elif req.schedule is not None:
        samples = _fuzz_samples(cls_, req.seed, req.count, req.max_size)
    else:
        # A certified schedule only promises its own battery; validate there.
        battery = default_battery(
            max(cls_.window, 1),
            sizes=range(1, certified.horizon + 1),
            per_size=20,
            seed=req.seed,
        )
        samples = [s for group in battery.values() for s in group]
    violation = find_asymptotic_violation(learner, cls_, schedule, samples)
    if violation is None:
        return ValidateResponse(ok=True)
    sample, reason = violation
    return ValidateResponse(ok=False, counterexample=sample.to_text(), reason=reason)


@app.post("/machine/halting-table", response_model=HaltingTableResponse)
def halting_table_endpoint(req: HaltingTableRequest) -> HaltingTableResponse:
    table = halting_approx(req.max_index, req.budget)
    return HaltingTableResponse(
        csv=table.to_csv(), halted=list(table.halted), k_size=len(table.k_set())
    )


@app.post("/machine/reduce", response_model=ReduceResponse)
def reduce_endpoint(req: ReduceRequest) -> ReduceResponse:
    rows = reduction_rows(req.max_index, req.budget, req.m, req.window)
    return ReduceResponse(
        csv=reduction_csv(rows),
        rows=[
            ReduceRow(e=e, learner_says=s, ground_truth=t, agree=a)
            for e, s, t, a in rows
        ],
        all_agree=all(a for _, _, _, a in rows),
    )


@app.post("/machine/encode", response_model=EncodeResponse)
def encode_endpoint(req: EncodeRequest) -> EncodeResponse:
    program = MachineProgram.from_text(req.program)
    return EncodeResponse(code=str(encode_program(program)))


@app.post("/machine/decode", response_model=DecodeResponse)
def decode_endpoint(req: DecodeRequest) -> DecodeResponse:
    try:
        code = int(req.code)
    except ValueError as exc:
        raise FormatError(f"code must be a decimal natural, got {req.code!r}") from exc
    program = decode_program(code)
    return DecodeResponse(
        program=program.to_text(),
        canonical=encode_program(program) != code,
    )


@app.post("/pac/run", response_model=PacRunResponse)
def pac_run_endpoint(req: PacRunRequest) -> PacRunResponse:
    cfg = ExperimentConfig.from_mapping(req.config)
    report = run_pac_experiment(cfg)
    rate = report.success_rate
    bayes = report.bayes
    return PacRunResponse(
        m=report.m,
        trials=report.trials,
        successes=report.successes,
        success_rate=f"{rate.numerator}/{rate.denominator}",
        bayes_risk=f"{bayes.numerator}/{bayes.denominator}",
        verdict=report.verdict,
        report_csv=render_report(report),
    )


@app.post("/class/enumerate", response_model=EnumerateResponse)
def enumerate_endpoint(req: EnumerateRequest) -> EnumerateResponse:
    cls_ = resolve_class(req.class_spec)
    if isinstance(cls_, EnumeratedClass):
        listed = cls_
    else:
        # Tree classes enumerate their horizon-length paths as bit tables.
        listed = EnumeratedClass.from_text(
            f"window {cls_.horizon}\n" + "".join(p + "\n" for p in cls_.paths())
        )
    if req.limit is not None:
        if req.limit < 0:
            raise DomainError(f"limit must be >= 0, got {req.limit}")
        listed = listed.prefix(req.limit)
    return EnumerateResponse(
        window=listed.window, count=len(listed.hypotheses), text=listed.to_text()
    )
