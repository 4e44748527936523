"""Experiment pipelines

Each experiment document runs as a Pipeline of three steps: construct the
object with its certificate, write the run directory, then confirm the
certificate. A failed certificate still leaves its report on disk.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

from src.cocycle.birkhoff import CocycleReport, cocycle_norm_sweep, schmidt_tightness
from src.cocycle.transfer import verify_coboundary
from src.config.settings import Settings, get_settings
from src.core.errors import ConfigError, VerificationError
from src.core.interfaces import Construction, Emitter, PipelineContext, PipelineStep, StepResult, StepStatus
from src.core.pipeline import Pipeline, PipelineResult
from src.diophantine.approximation import find_approximation
from src.diophantine.fourier import FourierProfile, diophantine_obstruction, rho_profile, rotation_transfer_fourier
from src.measure.numbers import exact_from_json, exact_to_json, format_exact, is_rational
from src.measure.sources import source_from_config
from src.measure.step_functions import StepFunction
from src.noncoboundary import (
    almost_invariant_grid,
    almost_invariant_set,
    growth_rate,
    l1_nonintegrable_transfer,
    series_noncoboundary,
    slow_escape_set,
    slow_growth_function,
)
from src.orchestrator import outputs
from src.orchestrator.experiments import (
    DiophantineExperiment,
    JointApproxExperiment,
    NonCoboundaryExperiment,
    StepCoboundaryExperiment,
    SweepExperiment,
    WeakMixingExperiment,
    build_step,
    dump_experiment,
    exact,
)
from src.stacking.joint import joint_approximation_construct
from src.stacking.schedule import ScheduleParams
from src.stacking.weak_mixing import weak_mixing_coboundary
from src.step_coboundary import (
    ALL_RATIONAL,
    INDEPENDENT,
    TorusCoboundary,
    build_finite_extension_coboundary,
    build_rational_coboundary,
    build_torus_coboundary,
    classify_step_function,
)
from src.transforms.rotation import Rotation
from src.transforms.simplex import SimplexTranslation
from src.utils.helpers import config_digest
from src.utils.logging import LogContext, StageLog, get_logger

logger = get_logger(__name__)

RECIPE_FILE = "recipe.json"
CERTIFICATE_FILE = "certificate.json"


@dataclass
class Outcome:
    """What a construction hands to the writers: the result document and its verdict"""

    pipeline: str
    result: Dict[str, Any]
    ok: bool
    rows: List[Dict[str, Any]] = field(default_factory=list)
    extras: Dict[str, Any] = field(default_factory=dict)
    stages: Optional[StageLog] = None
    failure: str = ""

    def report(self, config: Dict[str, Any]) -> Dict[str, Any]:
        return {
            "pipeline": self.pipeline,
            "config": config,
            "result": self.result,
            "rows": self.rows,
            "ok": self.ok,
        }


def _rational_param(value: Any, name: str) -> Fraction:
    x = exact(value)
    if not is_rational(x):
        raise ConfigError(f"{name} must be rational, got {format_exact(x)}")
    return Fraction(x)


def _required(value: Any, message: str) -> Any:
    if value is None or (isinstance(value, (list, tuple)) and not value):
        raise ConfigError(message)
    return value


# Sweep


def sweep_outcome(experiment: SweepExperiment, settings: Settings) -> Outcome:
    t = experiment.transform.build()
    f: Any
    if isinstance(t, SimplexTranslation) and t.m > 2:
        f = [exact(v) for v in _required(experiment.values, "simplex translations with m > 2 need piece values")]
    else:
        f = build_step(_required(experiment.f, "sweep needs step data f"))
    bound = exact(experiment.transfer_bound) if experiment.transfer_bound is not None else None
    report = cocycle_norm_sweep(
        t,
        f,
        experiment.r,
        experiment.n_max,
        transfer_bound=bound,
        settings=settings,
        samples=experiment.samples,
        seed=experiment.seed,
    )
    result: Dict[str, Any] = {"transform": t.to_json(), "sweep": report.to_json()}
    if experiment.tightness_eps is not None:
        if not isinstance(f, StepFunction):
            raise ConfigError("tightness needs step data on an interval transform")
        tightness = schmidt_tightness(t, f, exact(experiment.tightness_eps), experiment.n_max, experiment.two_sided)
        result["tightness"] = tightness.to_json()
    return Outcome(
        "sweep",
        result,
        ok=bound is None or report.verdict.kind == "bounded",
        rows=report.rows(),
        failure="sweep norms exceed the given transfer bound",
    )


# Step coboundaries


def _bounded(report: CocycleReport) -> bool:
    return report.verdict.kind == "bounded"


def _torus_outcome(
    torus: TorusCoboundary, experiment: StepCoboundaryExperiment, settings: Settings, result: Dict[str, Any]
) -> Outcome:
    sweep = torus.sweep(experiment.n_max, experiment.samples, settings)
    defect = torus.identity_defect(experiment.n_max)
    result.update(
        construction="torus",
        coboundary=torus.to_json(),
        bound=exact_to_json(torus.bound),
        sweep=sweep.to_json(),
        identity_defect=exact_to_json(defect),
    )
    return Outcome(
        "step-coboundary",
        result,
        ok=defect == 0 and _bounded(sweep),
        rows=sweep.rows(),
        extras={CERTIFICATE_FILE: torus.to_json()["certificate"]},
        failure="torus transfer does not certify f",
    )


def step_coboundary_outcome(experiment: StepCoboundaryExperiment, settings: Settings) -> Outcome:
    f = build_step(experiment.f)
    classification = classify_step_function(f)
    result: Dict[str, Any] = {"classification": classification.to_json()}

    if classification.case == ALL_RATIONAL:
        rational = build_rational_coboundary(f, experiment.stages, classification)
        bound = 2 * rational.g.sup_norm()
        sweep = cocycle_norm_sweep(rational.machine, f, "inf", experiment.n_max, transfer_bound=bound, settings=settings)
        document = rational.to_json()
        result.update(construction="rational", coboundary=document, bound=exact_to_json(bound), sweep=sweep.to_json())
        ok = rational.exact and _bounded(sweep)
        if len(set(classification.values)) == 2:
            check = rational.eigenvalue_check(experiment.samples, settings)
            result["eigenvalue"] = check.to_json()
            ok = ok and check.passed
        return Outcome(
            "step-coboundary",
            result,
            ok=ok,
            rows=sweep.rows(),
            extras={RECIPE_FILE: rational.machine.to_json(), CERTIFICATE_FILE: document["certificate"]},
            failure="rational coboundary certificate failed",
        )

    if classification.case == INDEPENDENT:
        return _torus_outcome(build_torus_coboundary(f, classification), experiment, settings, result)

    extension = build_finite_extension_coboundary(f, classification)
    if extension.delegated:
        assert extension.torus is not None
        return _torus_outcome(extension.torus, experiment, settings, result)
    document = extension.to_json()
    result.update(construction="extension", coboundary=document)
    ok = True
    if extension.torus is not None:
        base_sweep = extension.torus.sweep(experiment.n_max, experiment.samples, settings)
        result.update(bound=exact_to_json(extension.torus.bound), sweep=base_sweep.to_json())
        ok = _bounded(base_sweep)
    result["certified"] = extension.torus is not None
    if extension.extension is not None:
        evidence = extension.sweep_lifted(experiment.n_max, settings)
    else:
        evidence = extension.sweep_f_beta(experiment.n_max, experiment.samples, settings)
    result["evidence"] = evidence.to_json()
    return Outcome(
        "step-coboundary",
        result,
        ok=ok,
        rows=evidence.rows(),
        extras={CERTIFICATE_FILE: document["certificate"]} if "certificate" in document else {},
        failure="base translation norms exceed the torus bound",
    )


# Weak mixing


def weak_mixing_outcome(experiment: WeakMixingExperiment, settings: Settings) -> Outcome:
    src = source_from_config(experiment.source.kind, experiment.source.params)
    eps = [_rational_param(e, "eps") for e in experiment.eps]
    schedule = ScheduleParams.create(eps, experiment.N)
    built = weak_mixing_coboundary(src, schedule, experiment.stages, settings)
    rows = [
        {"n": r["stage"], "norm": r["top_norm"], "witness": r.get("cauchy", "")}
        for r in built.records
    ]
    return Outcome(
        "weak-mixing",
        {**built.to_json(), "records": built.records},
        ok=built.ok,
        rows=rows,
        extras={RECIPE_FILE: built.machine.to_json(), CERTIFICATE_FILE: schedule.certificate()},
        stages=built.log,
        failure="consecutive transfer functions are not Cauchy or the undefined region did not shrink",
    )


# Non-coboundaries


def _almost_invariant(experiment: NonCoboundaryExperiment, settings: Settings) -> Outcome:
    machine = experiment.machine.machine()
    delta, eps = _rational_param(experiment.delta, "delta"), _rational_param(experiment.eps, "eps")
    grid, run = almost_invariant_grid(machine, delta, experiment.n, eps)
    A = almost_invariant_set(machine, delta, experiment.n, eps)
    stay = grid.stay(experiment.n).measure
    result = {
        "construction": "almost-invariant",
        "set": A.to_json(),
        "delta": exact_to_json(delta),
        "eps": exact_to_json(eps),
        "n": experiment.n,
        "run_length": run,
        "measure": exact_to_json(A.measure),
        "stay": exact_to_json(stay),
        "need": exact_to_json((1 - eps) * A.measure),
    }
    rows = [{"n": k, "norm": format_exact(grid.stay(k).measure), "witness": ""} for k in range(1, experiment.n + 1)]
    ok = A.measure == delta and stay >= (1 - eps) * A.measure
    return Outcome("non-coboundary", result, ok, rows, {RECIPE_FILE: machine.to_json()})


def _slow_escape(experiment: NonCoboundaryExperiment, settings: Settings) -> Outcome:
    machine = experiment.machine.machine()
    schedule = [_rational_param(e, "eps") for e in _required(experiment.eps_schedule, "slow-escape needs eps_schedule")]
    escape = slow_escape_set(machine, schedule)
    result = {"construction": "slow-escape", "E": escape.E.to_json(), "eps": [exact_to_json(e) for e in schedule], **escape.to_json()}
    rows = [
        {"n": e["n"], "norm": format_exact(exact_from_json(e["avoid"])), "witness": format_exact(exact_from_json(e["eps"]))}
        for e in escape.entries
    ]
    return Outcome("non-coboundary", result, escape.ok, rows, {RECIPE_FILE: machine.to_json()})


def _slow_growth(experiment: NonCoboundaryExperiment, settings: Settings) -> Outcome:
    machine = experiment.machine.machine()
    exponent = _rational_param(experiment.exponent, "exponent") if experiment.exponent is not None else None
    rho = growth_rate(experiment.rate, exponent)
    built = slow_growth_function(machine, rho, experiment.n_min, experiment.n_max, settings=settings)
    result = {"construction": "slow-growth", "rate": experiment.rate, **built.to_json()}
    return Outcome("non-coboundary", result, built.ok, built.rows(), {RECIPE_FILE: machine.to_json()})


def _series(experiment: NonCoboundaryExperiment, settings: Settings) -> Outcome:
    machine = experiment.machine.machine()
    built = series_noncoboundary(
        machine,
        _rational_param(experiment.eps1, "eps1"),
        _rational_param(experiment.ratio, "ratio"),
        experiment.stages,
        experiment.n1,
        experiment.growth,
        settings,
    )
    result = {"construction": "series", **built.to_json()}
    return Outcome("non-coboundary", result, built.ok, built.rows(), {RECIPE_FILE: machine.to_json()})


def _nonintegrable_transfer(experiment: NonCoboundaryExperiment, settings: Settings) -> Outcome:
    machine = experiment.machine.machine()
    f, H, report = l1_nonintegrable_transfer(machine, experiment.N_max, settings)
    result = {"construction": "transfer", "f": f.to_json(), "H": H.to_json(), **report.to_json()}
    return Outcome("non-coboundary", result, report.ok, report.rows(), {RECIPE_FILE: machine.to_json()})


NONCOBOUNDARY_BUILDERS: Dict[str, Callable[[NonCoboundaryExperiment, Settings], Outcome]] = {
    "almost-invariant": _almost_invariant,
    "slow-escape": _slow_escape,
    "slow-growth": _slow_growth,
    "series": _series,
    "transfer": _nonintegrable_transfer,
}


def noncoboundary_outcome(experiment: NonCoboundaryExperiment, settings: Settings) -> Outcome:
    outcome = NONCOBOUNDARY_BUILDERS[experiment.construction](experiment, settings)
    outcome.failure = f"{experiment.construction} certificate failed"
    return outcome


# Diophantine


def diophantine_outcome(experiment: DiophantineExperiment, settings: Settings) -> Outcome:
    result: Dict[str, Any] = {"mode": experiment.mode}
    if experiment.mode == "approximation":
        x = [exact(v) for v in _required(experiment.x, "approximation needs x")]
        approx = find_approximation(x, experiment.exponent, q_max=experiment.q_max, settings=settings)
        holds = approx.holds(x)
        result.update(x=[exact_to_json(v) for v in x], approximation=approx.to_json(), holds=holds)
        return Outcome("diophantine", result, holds, failure="approximation inequality does not hold")

    alpha = exact(_required(experiment.alpha, f"{experiment.mode} needs alpha"))
    result["alpha"] = exact_to_json(alpha)
    if experiment.mode == "obstruction":
        report = diophantine_obstruction(rho_profile(experiment.rho), alpha, experiment.depth)
        result.update(rho=experiment.rho, **report.to_json())
        rows = [{"n": r["q_k"], "norm": r["bound"], "witness": ""} for r in report.rows()]
        return Outcome("diophantine", result, True, rows)

    profile = FourierProfile.from_json(_required(experiment.coefficients, "transfer needs Fourier coefficients"))
    transfer = rotation_transfer_fourier(profile, alpha, experiment.band, experiment.power, settings)
    tau = Rotation(alpha * experiment.power)
    check = verify_coboundary(
        tau, profile.real_part(), transfer.h.real_part(), experiment.samples, seed=experiment.seed, settings=settings
    )
    exact_expected = profile.exhaustive and experiment.band >= profile.band
    result.update(
        power=experiment.power,
        transfer=transfer.to_json(),
        residual=check.to_json(),
        tolerance=settings.pointwise_tolerance,
        exact_expected=exact_expected,
    )
    ok = not exact_expected or check.max_residual < settings.pointwise_tolerance
    return Outcome("diophantine", result, ok, failure="Fourier transfer residual exceeds the tolerance")


# Joint approximation


def joint_outcome(experiment: JointApproxExperiment, settings: Settings) -> Outcome:
    machine = experiment.machine.machine()
    built = joint_approximation_construct(machine, build_step(experiment.K), experiment.M, experiment.N)
    return Outcome(
        "joint-approx",
        built.to_json(),
        built.report.ok,
        extras={RECIPE_FILE: machine.to_json()},
        failure="joint approximation bounds failed",
    )


BUILDERS: Dict[str, Callable[[Any, Settings], Outcome]] = {
    "sweep": sweep_outcome,
    "step-coboundary": step_coboundary_outcome,
    "weak-mixing": weak_mixing_outcome,
    "non-coboundary": noncoboundary_outcome,
    "diophantine": diophantine_outcome,
    "joint-approx": joint_outcome,
}


def build_outcome(experiment: Any, settings: Optional[Settings] = None) -> Outcome:
    settings = settings or get_settings()
    outcome = BUILDERS[experiment.pipeline](experiment, settings)
    logger.info("outcome_built", pipeline=outcome.pipeline, ok=outcome.ok, rows=len(outcome.rows))
    return outcome


# Steps


class ConstructStep(Construction):
    def __init__(self, experiment: Any, settings: Settings):
        self.experiment = experiment
        self.settings = settings

    @property
    def name(self) -> str:
        return "construct"

    async def construct(self, context: PipelineContext) -> Outcome:
        return build_outcome(self.experiment, self.settings)


class EmitStep(Emitter):
    def __init__(self, experiment: Any, formats: Iterable[str]):
        self.config = dump_experiment(experiment)
        self.formats = [f for f in formats if f != "json"]

    @property
    def name(self) -> str:
        return "emit"

    async def emit(self, context: PipelineContext) -> List[Path]:
        outcome: Outcome = context.data["outcome"]
        paths = outputs.write_run(
            context.run_dir, self.config, outcome.report(self.config), outcome.extras, outcome.stages
        )
        return paths + outputs.emit_outputs(context.run_dir, self.formats)


class CertifyStep(PipelineStep):
    """Fails the run when the written certificate does not hold"""

    @property
    def name(self) -> str:
        return "certify"

    async def execute(self, context: PipelineContext) -> StepResult:
        if "outcome" not in context.data:
            return StepResult(StepStatus.SKIPPED, details={"reason": "no construction outcome"})

        async def work(ctx: PipelineContext) -> int:
            outcome: Outcome = ctx.data["outcome"]
            if not outcome.ok:
                raise VerificationError(
                    outcome.failure or f"{outcome.pipeline} certificate failed", {"run_dir": str(ctx.run_dir)}
                )
            return 1

        return await self._guarded(context, work)


class ExperimentRunner:
    """Runs one experiment document into a run directory named by its digest"""

    def __init__(
        self,
        experiment: Any,
        out_dir: Optional[Path] = None,
        formats: Optional[Iterable[str]] = None,
        settings: Optional[Settings] = None,
    ):
        self.settings = settings or get_settings()
        self.experiment = experiment
        self.config = dump_experiment(experiment)
        self.run_id = f"{experiment.pipeline}-{config_digest(self.config)}"
        self.out_dir = Path(out_dir) if out_dir is not None else Path(self.settings.output_dir)
        self.formats = list(formats) if formats is not None else list(outputs.FORMATS)

    @property
    def run_dir(self) -> Path:
        return self.out_dir / self.run_id

    def _build_pipeline(self) -> Pipeline:
        return Pipeline(
            name=f"experiment:{self.experiment.pipeline}",
            steps=[
                ConstructStep(self.experiment, self.settings),
                EmitStep(self.experiment, self.formats),
                CertifyStep(),
            ],
        )

    async def run(self) -> PipelineResult:
        with LogContext(run_id=self.run_id, pipeline=self.experiment.pipeline):
            context = PipelineContext(run_id=self.run_id, run_dir=self.run_dir)
            return await self._build_pipeline().execute(context)


async def run_experiment(
    experiment: Any,
    out_dir: Optional[Path] = None,
    formats: Optional[Iterable[str]] = None,
    settings: Optional[Settings] = None,
) -> Tuple[PipelineResult, Path]:
    """Convenience function to run one experiment"""
    runner = ExperimentRunner(experiment, out_dir, formats, settings)
    result = await runner.run()
    return result, runner.run_dir
