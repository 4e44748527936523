"""Re-check the certificates of a finished run from its serialized exact values"""

import asyncio
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import mpmath

from src.config.settings import Settings, get_settings
from src.core.errors import ConfigError, VerificationError
from src.measure.numbers import ExactNumber, exact_from_json, parse_exact, to_mpf
from src.orchestrator import outputs
from src.orchestrator.experiments import parse_experiment
from src.orchestrator.pipelines import ExperimentRunner
from src.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass
class VerificationSummary:
    run_dir: Path
    pipeline: str
    checks: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c["ok"] for c in self.checks)

    @property
    def failed(self) -> List[str]:
        return [c["name"] for c in self.checks if not c["ok"]]

    def add(self, name: str, ok: bool) -> None:
        self.checks.append({"name": name, "ok": bool(ok)})

    def to_json(self) -> Dict[str, Any]:
        return {"run_dir": str(self.run_dir), "pipeline": self.pipeline, "checks": self.checks, "ok": self.ok}


def _x(obj: Any) -> ExactNumber:
    return exact_from_json(obj)


def _norm_at_most(norm: Dict[str, Any], bound: ExactNumber) -> bool:
    if norm.get("exact") is not None:
        return _x(norm["exact"]) <= bound
    return mpmath.mpf(norm["approx"]) <= to_mpf(bound)


def _sweep_within(summary: VerificationSummary, label: str, sweep: Dict[str, Any], bound: ExactNumber) -> None:
    for entry in sweep["entries"]:
        summary.add(f"{label} n={entry['n']}: norm <= bound", _norm_at_most(entry["norm"], bound))


def _check_sweep(summary: VerificationSummary, result: Dict[str, Any], config: Dict[str, Any]) -> None:
    sweep = result["sweep"]
    ns = [e["n"] for e in sweep["entries"]]
    summary.add("sweep covers n = 1..n_max", ns == list(range(1, config["n_max"] + 1)))
    verdict = sweep["verdict"]
    if verdict["kind"] == "bounded":
        _sweep_within(summary, "sweep", sweep, _x(verdict["bound"]))
    elif config.get("transfer_bound") is not None:
        summary.add("sweep is bounded by the given transfer bound", False)


def _check_step_coboundary(summary: VerificationSummary, result: Dict[str, Any], config: Dict[str, Any]) -> None:
    construction = result["construction"]
    if "bound" in result:
        _sweep_within(summary, construction, result["sweep"], _x(result["bound"]))
    if construction == "rational":
        for stage in result["coboundary"]["certificate"]["stages"]:
            summary.add(f"stage {stage['stage']}: f = g - g∘tau on the defined region", stage["exact"])
        if "eigenvalue" in result:
            summary.add("eigenvalue residual within tolerance", result["eigenvalue"]["passed"])
    elif construction == "torus":
        summary.add("torus identity defect is zero", _x(result["identity_defect"]) == 0)


def _check_weak_mixing(summary: VerificationSummary, result: Dict[str, Any], config: Dict[str, Any]) -> None:
    eps = [_x(e) for e in result["schedule"]["eps"]]
    previous: Optional[ExactNumber] = None
    for record in result["records"]:
        k = record["stage"]
        top = parse_exact(record["top_norm"])
        summary.add(f"stage {k}: top norm < 3 eps_k", top < 3 * eps[k])
        if "cauchy" in record:
            summary.add(
                f"stage {k}: cauchy < 3(eps_k + eps_(k-1))",
                parse_exact(record["cauchy"]) < 3 * (eps[k] + eps[k - 1]),
            )
        undefined = parse_exact(record["undefined_measure"])
        if previous is not None:
            summary.add(f"stage {k}: undefined measure decreased", undefined < previous)
        previous = undefined


def _rate_value(rho: Any) -> Any:
    return _x(rho) if isinstance(rho, dict) else mpmath.mpf(rho)


def _check_noncoboundary(summary: VerificationSummary, result: Dict[str, Any], config: Dict[str, Any]) -> None:
    construction = result["construction"]
    if construction == "almost-invariant":
        measure, stay, eps = _x(result["measure"]), _x(result["stay"]), _x(result["eps"])
        summary.add("p(A) = delta", measure == _x(result["delta"]))
        summary.add("stay >= (1 - eps) p(A)", stay >= (1 - eps) * measure)
    elif construction == "slow-escape":
        for entry in result["entries"]:
            summary.add(f"n={entry['n']}: avoid >= eps_n", _x(entry["avoid"]) >= _x(entry["eps"]))
        summary.add("p(E) >= gamma / 2", _x(result["measure"]) >= _x(result["gamma"]) / 2)
    elif construction == "slow-growth":
        for entry in result["entries"]:
            norm, rho = _x(entry["norm"]), _rate_value(entry["rho"])
            above = norm >= rho if not isinstance(rho, mpmath.mpf) else to_mpf(norm) >= rho
            summary.add(f"n={entry['n']}: norm >= rho_n", above)
            if "bound" in entry:
                summary.add(f"n={entry['n']}: norm >= n p(E) p(stay)", norm >= _x(entry["bound"]))
    elif construction == "series":
        for stage in result["stages"]:
            e, n = _x(stage["eps"]), stage["n"]
            scale = e * n
            main, cross, tail = _x(stage["main"]), _x(stage["cross"]), _x(stage["tail_bound"])
            m = stage["m"]
            summary.add(f"stage {m}: main >= eps n / 8", main >= scale / 8)
            summary.add(f"stage {m}: cross <= eps n / 32", cross <= scale / 32)
            summary.add(f"stage {m}: tail <= eps n / 32", tail <= scale / 32)
            summary.add(f"stage {m}: later <= tail", _x(stage["later"]) <= tail)
            summary.add(f"stage {m}: main - cross - tail >= eps n / 16", main - cross - tail >= scale / 16)
            summary.add(
                f"stage {m}: norm - beyond >= eps n / 16", _x(stage["norm"]) - _x(stage["beyond"]) >= scale / 16
            )
    elif construction == "transfer":
        previous: ExactNumber = Fraction(0)
        for entry in result["entries"]:
            H = _x(entry["H_norm"])
            N = entry["N"]
            summary.add(f"N={N}: H norm increases", H > previous)
            summary.add(f"N={N}: H norm >= sqrt(N+1) - 1", H >= _x(entry["divergence_witness"]))
            summary.add(f"N={N}: f norm <= dominating sum", _x(entry["f_norm"]) <= _x(entry["dominating_partial"]))
            previous = H
        summary.add("H - H∘tau^-1 = f", result["final_identity_ok"])


def _check_diophantine(summary: VerificationSummary, result: Dict[str, Any], config: Dict[str, Any]) -> None:
    mode = result["mode"]
    if mode == "approximation":
        approx = result["approximation"]
        q, d = approx["q"], approx["exponent"]
        for i, (x, p) in enumerate(zip(result["x"], approx["p"])):
            err = abs(q * _x(x) - p)
            summary.add(f"|q x_{i} - p_{i}|^d q < 1", err**d * q < 1)
    elif mode == "obstruction":
        bounds = [mpmath.mpf(e["bound"]) for e in result["entries"]]
        tail = bounds[2:] or bounds
        increasing = len(tail) > 1 and all(a < b for a, b in zip(tail, tail[1:]))
        if result["verdict"] == "obstruction":
            summary.add("bounds strictly increase along convergents", increasing)
        else:
            summary.add("verdict matches the bounds", not increasing)
    else:
        if result["exact_expected"]:
            residual = mpmath.mpf(result["residual"]["max_residual"])
            summary.add("pointwise residual below tolerance", residual < result["tolerance"])


def _check_joint(summary: VerificationSummary, result: Dict[str, Any], config: Dict[str, Any]) -> None:
    report = result["report"]
    M, N = report["M"], report["N"]
    defect = _x(report["defect"])
    summary.add("||H - H∘sigma||_1 <= 2M/N", _x(report["invariance"]) <= Fraction(2 * M, N))
    summary.add("||H - H∘tau - K||_1 <= 1/M", defect <= Fraction(1, M))
    summary.add("end mass <= 1/M", _x(report["end_mass"]) <= Fraction(1, M))
    summary.add("interval recomputation matches", _x(report["recheck_defect"]) == defect)
    summary.add("tau preserves measure", report["measure_preserved"])


CHECKERS: Dict[str, Callable[[VerificationSummary, Dict[str, Any], Dict[str, Any]], None]] = {
    "sweep": _check_sweep,
    "step-coboundary": _check_step_coboundary,
    "weak-mixing": _check_weak_mixing,
    "non-coboundary": _check_noncoboundary,
    "diophantine": _check_diophantine,
    "joint-approx": _check_joint,
}


def _replay(run_dir: Path, report_bytes: bytes, summary: VerificationSummary, settings: Settings) -> None:
    experiment = parse_experiment(outputs.read_json(run_dir / outputs.CONFIG_FILE))
    with tempfile.TemporaryDirectory() as scratch:
        runner = ExperimentRunner(experiment, Path(scratch), formats=["json"], settings=settings)
        asyncio.run(runner.run())
        replayed = runner.run_dir / outputs.REPORT_FILE
        summary.add("replay reproduces report.json byte for byte", replayed.exists() and replayed.read_bytes() == report_bytes)


def verify_run(run_dir: Path, replay: bool = False, settings: Optional[Settings] = None) -> VerificationSummary:
    """Recompute every certificate inequality; raises VerificationError on the first failed run"""
    settings = settings or get_settings()
    run_dir = Path(run_dir)
    report = outputs.load_report(run_dir)
    pipeline = report.get("pipeline")
    if pipeline not in CHECKERS:
        raise ConfigError(f"{run_dir} holds an unknown pipeline {pipeline!r}")
    summary = VerificationSummary(run_dir, pipeline)
    CHECKERS[pipeline](summary, report["result"], report.get("config", {}))
    summary.add("recorded verdict agrees", report.get("ok") is True)
    if replay:
        _replay(run_dir, (run_dir / outputs.REPORT_FILE).read_bytes(), summary, settings)

    logger.info("run_verified", run_dir=str(run_dir), pipeline=pipeline, checks=len(summary.checks), ok=summary.ok)
    if not summary.ok:
        raise VerificationError(
            f"{len(summary.failed)} certificate check(s) failed: {', '.join(summary.failed[:5])}",
            {"failed": summary.failed},
        )
    return summary
