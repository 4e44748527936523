"""Tests for settings, the pipeline runner and the experiment orchestrator"""

from fractions import Fraction

import orjson
import pytest

F = Fraction


class TestSettings:
    """Tests for configuration settings"""

    def test_default_values(self):
        """Test default configuration values"""
        from src.config.settings import Settings

        settings = Settings()
        assert settings.cocycle_precision == 50
        assert settings.sample_count == 1000
        assert settings.retry_attempts == 3
        assert settings.pointwise_tolerance == 1e-12

    def test_precision_from_environment(self, monkeypatch):
        """Test COCYCLE_PRECISION overrides the working precision"""
        from src.config.settings import Settings

        monkeypatch.setenv("COCYCLE_PRECISION", "80")
        assert Settings().cocycle_precision == 80

    def test_precision_floor(self):
        """Test that fewer than 15 digits is rejected"""
        from pydantic import ValidationError

        from src.config.settings import Settings

        with pytest.raises(ValidationError):
            Settings(cocycle_precision=10)


class TestHelpers:
    """Tests for helper utilities"""

    def test_canonical_json(self):
        """Test sorted keys, two-space indent and trailing newline"""
        from src.utils.helpers import canonical_json

        assert canonical_json({"b": 1, "a": [1, 2]}) == b'{\n  "a": [\n    1,\n    2\n  ],\n  "b": 1\n}\n'

    def test_config_digest_ignores_key_order(self):
        """Test the digest depends on content only"""
        from src.utils.helpers import config_digest

        a = config_digest({"x": 1, "y": [1, 2]})
        assert a == config_digest({"y": [1, 2], "x": 1})
        assert len(a) == 12
        assert a != config_digest({"x": 2, "y": [1, 2]})

    def test_sample_points_reproducible(self):
        """Test sample points are sorted, inside the region and seeded"""
        from src.measure.intervals import IntervalSet
        from src.utils.helpers import sample_points

        region = IntervalSet.span(0, F(1, 2))
        points = sample_points(region, 10, 3)
        assert points == sample_points(region, 10, 3)
        assert points == sorted(points)
        assert all(0 <= x < F(1, 2) for x in points)
        assert sample_points(IntervalSet([]), 10, 3) == []


class TestPipelineInterfaces:
    """Tests for pipeline interfaces"""

    def test_step_status_enum(self):
        """Test step status enumeration"""
        from src.core.interfaces import StepStatus

        assert StepStatus.PENDING.value == "pending"
        assert StepStatus.COMPLETED.value == "completed"
        assert StepStatus.FAILED.value == "failed"

    def test_step_result(self):
        """Test step result creation"""
        from src.core.errors import PreconditionError
        from src.core.interfaces import StepResult, StepStatus

        result = StepResult(status=StepStatus.FAILED, error=PreconditionError("no pieces"))
        assert result.error_message == "no pieces"
        assert result.duration_seconds is None

    def test_pipeline_context(self, tmp_path):
        """Test pipeline context"""
        from src.core.interfaces import PipelineContext

        context = PipelineContext(run_id="sweep-abc", run_dir=tmp_path)
        assert context.data == {}
        context.add_warning("sampled sweep")
        assert context.warnings == ["sampled sweep"]
        context.set_metadata("key", "value")
        assert context.get_metadata("key") == "value"
        assert context.get_metadata("missing", 3) == 3


def _steps():
    from src.core.errors import ConfigError
    from src.core.interfaces import Construction, Emitter

    class Value(Construction):
        name = "value"

        async def construct(self, context):
            return 7

    class Broken(Construction):
        name = "broken"

        async def construct(self, context):
            raise ConfigError("bad parameter")

    class Writer(Emitter):
        name = "writer"

        async def emit(self, context):
            path = context.run_dir / "out.txt"
            path.write_text(str(context.data["outcome"]))
            return [path]

    return Value(), Broken(), Writer()


class TestPipeline:
    """Tests for the async pipeline runner"""

    async def test_steps_run_in_order(self, tmp_path):
        """Test that emitters see the construction outcome"""
        from src.core.interfaces import PipelineContext, StepStatus
        from src.core.pipeline import Pipeline

        value, _, writer = _steps()
        context = PipelineContext(run_id="r", run_dir=tmp_path)
        result = await Pipeline("test", [value, writer]).execute(context)
        assert result.status == StepStatus.COMPLETED
        assert result.exit_code == 0
        assert (tmp_path / "out.txt").read_text() == "7"
        assert context.artifacts == [tmp_path / "out.txt"]
        assert result.step_results["writer"].items == 1

    async def test_stops_at_first_failure(self, tmp_path):
        """Test that the original error and its exit code surface"""
        from src.core.errors import ConfigError
        from src.core.interfaces import PipelineContext, StepStatus
        from src.core.pipeline import Pipeline

        _, broken, writer = _steps()
        result = await Pipeline("test", [broken, writer]).execute(PipelineContext(run_id="r", run_dir=tmp_path))
        assert result.status == StepStatus.FAILED
        assert isinstance(result.error, ConfigError)
        assert result.exit_code == 2
        assert "writer" not in result.step_results
        assert result.to_dict()["error"]["message"] == "bad parameter"

    async def test_unexpected_error_wrapped(self, tmp_path):
        """Test that a stray exception becomes a failed step with the construction exit code"""
        from src.core.errors import ConstructionError
        from src.core.interfaces import Construction, PipelineContext, StepStatus
        from src.core.pipeline import Pipeline

        class Divide(Construction):
            name = "divide"

            async def construct(self, context):
                return 1 / 0

        result = await Pipeline("test", [Divide()]).execute(PipelineContext(run_id="r", run_dir=tmp_path))
        assert result.status == StepStatus.FAILED
        assert isinstance(result.error, ConstructionError)
        assert isinstance(result.error.__cause__, ZeroDivisionError)
        assert result.exit_code == 3
        assert "ZeroDivisionError" in result.error.message
        assert result.step_results["divide"].error.details == {"step": "divide"}

    async def test_emitter_skips_without_outcome(self, tmp_path):
        """Test that an emitter with nothing to write is skipped"""
        from src.core.interfaces import PipelineContext, StepStatus
        from src.core.pipeline import Pipeline

        _, _, writer = _steps()
        result = await Pipeline("test", [writer]).execute(PipelineContext(run_id="r", run_dir=tmp_path))
        assert result.status == StepStatus.COMPLETED
        assert result.step_results["writer"].status == StepStatus.SKIPPED


class TestExperiments:
    """Tests for experiment document validation"""

    def test_sweep_document(self, sweep_config):
        """Test the pipeline discriminator and exact fields"""
        from src.orchestrator.experiments import SweepExperiment, build_step, parse_experiment
        from src.transforms.rotation import Rotation

        experiment = parse_experiment(sweep_config)
        assert isinstance(experiment, SweepExperiment)
        assert isinstance(experiment.transform.build(), Rotation)
        assert build_step(experiment.f).integral() == 0

    def test_dump_round_trip(self, sweep_config):
        """Test that a dumped document validates to the same model"""
        from src.orchestrator.experiments import dump_experiment, parse_experiment

        experiment = parse_experiment(sweep_config)
        assert parse_experiment(dump_experiment(experiment)) == experiment

    @pytest.mark.parametrize(
        "data",
        [
            {},
            {"pipeline": "unknown"},
            {"pipeline": "sweep", "transform": {"kind": "rotation", "alpha": "1/3"}},
            {"pipeline": "joint-approx", "K": [], "M": 2, "N": 8, "colour": "red"},
            {"pipeline": "weak-mixing", "eps": ["1/2", "1/4"], "N": [2], "stages": 1},
        ],
    )
    def test_schema_violations(self, data):
        """Test that schema problems become ConfigError"""
        from src.core.errors import ConfigError
        from src.orchestrator.experiments import parse_experiment

        with pytest.raises(ConfigError):
            parse_experiment(data)

    def test_load_errors(self, write_config):
        """Test empty and malformed files"""
        from src.core.errors import ConfigError
        from src.orchestrator.experiments import load_experiment

        with pytest.raises(ConfigError, match="empty"):
            load_experiment(write_config(b""))
        with pytest.raises(ConfigError, match="not JSON"):
            load_experiment(write_config(b"{pipeline"))

    def test_machine_specs(self):
        """Test the rank-one machine kinds"""
        from src.core.errors import ConfigError
        from src.orchestrator.experiments import TransformSpec

        assert TransformSpec(kind="odometer", stages=3).machine().height == 8
        replayed = TransformSpec(kind="rank_one", recipe=[{"cuts": 2}, {"cuts": 2}, {"cuts": 2}]).machine()
        assert replayed.height == 8
        with pytest.raises(ConfigError):
            TransformSpec(kind="rotation", alpha="1/3").machine()


class TestOutputs:
    """Tests for the run directory writers"""

    def test_parse_formats(self):
        """Test format lists"""
        from src.core.errors import ConfigError
        from src.orchestrator.outputs import parse_formats

        assert parse_formats("csv, svg") == ["csv", "svg"]
        assert parse_formats(None) == ["csv", "json", "svg"]
        with pytest.raises(ConfigError, match="pdf"):
            parse_formats("csv,pdf")

    def test_as_float(self):
        """Test numeric, decimal and exact row values"""
        from src.orchestrator.outputs import as_float

        assert as_float(3) == 3.0
        assert as_float("1/2") == 0.5
        assert as_float("0.25") == 0.25
        assert as_float("√2-1") == pytest.approx(0.41421356237)

    def test_csv_header_only(self, tmp_path):
        """Test that an empty row list still writes the header"""
        from src.orchestrator.outputs import write_csv

        path = write_csv(tmp_path / "sweep.csv", [])
        assert path.read_text() == "n,norm,witness\n"

    def test_emit_without_report(self, tmp_path):
        """Test that emitting needs a completed run"""
        from src.core.errors import ConfigError
        from src.orchestrator.outputs import emit_outputs

        with pytest.raises(ConfigError, match="report.json"):
            emit_outputs(tmp_path, ["csv"])

    def test_emit_unknown_format(self, tmp_path):
        """Test the unknown-format error"""
        from src.core.errors import ConfigError
        from src.orchestrator.outputs import emit_outputs

        with pytest.raises(ConfigError):
            emit_outputs(tmp_path, ["xlsx"])

    def test_reemission_is_identical(self, tmp_path):
        """Test CSV and SVG are byte-identical when derived twice from one report"""
        from src.orchestrator.outputs import emit_outputs, write_json

        rows = [{"n": n, "norm": f"{n}/3", "witness": ""} for n in range(1, 6)]
        write_json(tmp_path / "report.json", {"pipeline": "sweep", "rows": rows})
        emit_outputs(tmp_path, ["csv", "svg"])
        first = (tmp_path / "sweep.csv").read_bytes(), (tmp_path / "sweep.svg").read_bytes()
        emit_outputs(tmp_path, ["csv", "svg"])
        assert first == ((tmp_path / "sweep.csv").read_bytes(), (tmp_path / "sweep.svg").read_bytes())
        assert first[0].decode().count("\n") == 6
        assert b"<svg" in first[1]


def _outcome(data):
    from src.orchestrator.experiments import parse_experiment
    from src.orchestrator.pipelines import build_outcome

    return build_outcome(parse_experiment(data))


class TestBuildOutcome:
    """Tests for the per-pipeline constructions"""

    def test_sweep_bounded(self, sweep_config):
        """Test the rotation sweep stays within the given transfer bound"""
        outcome = _outcome(sweep_config)
        assert outcome.ok
        assert outcome.result["sweep"]["verdict"]["kind"] == "bounded"
        assert len(outcome.rows) == 20
        assert [r["n"] for r in outcome.rows] == list(range(1, 21))

    def test_sweep_with_tightness(self, sweep_config):
        """Test the optional tightness report"""
        outcome = _outcome({**sweep_config, "tightness_eps": "1/10", "n_max": 8})
        assert len(outcome.result["tightness"]["entries"]) == 8

    def test_sweep_violated_bound(self, sweep_config):
        """Test a transfer bound that the norms exceed"""
        outcome = _outcome({**sweep_config, "transfer_bound": "1/100"})
        assert not outcome.ok

    def test_sweep_needs_data(self):
        """Test a sweep without an observable"""
        from src.core.errors import ConfigError

        with pytest.raises(ConfigError):
            _outcome({"pipeline": "sweep", "transform": {"kind": "rotation", "alpha": "√2-1"}, "n_max": 4})

    def test_rational_step_coboundary(self):
        """Test the dyadic function on the odometer with its eigenvalue"""
        outcome = _outcome(
            {"pipeline": "step-coboundary", "f": [["0", "1/2", "1"], ["1/2", "1", "-1"]], "n_max": 16, "samples": 64}
        )
        assert outcome.ok
        assert outcome.result["construction"] == "rational"
        assert outcome.result["eigenvalue"]["passed"]
        assert set(outcome.extras) == {"recipe.json", "certificate.json"}
        assert len(outcome.rows) == 16

    def test_torus_step_coboundary(self, sweep_config):
        """Test the independent two-piece function on the planar translation"""
        outcome = _outcome({"pipeline": "step-coboundary", "f": sweep_config["f"], "n_max": 20})
        assert outcome.ok
        assert outcome.result["construction"] == "torus"
        assert outcome.result["identity_defect"] == {"a": "0", "b": "0", "d": 1}

    def test_weak_mixing(self):
        """Test two stages of the weak-mixing construction"""
        outcome = _outcome({"pipeline": "weak-mixing", "eps": ["1/2", "1/4"], "N": [2, 4], "stages": 2})
        assert outcome.ok
        assert len(outcome.stages) == 2
        assert [r["n"] for r in outcome.rows] == [0, 1]
        assert outcome.result["records"][1]["cauchy_ok"]

    def test_almost_invariant(self):
        """Test the almost invariant set certificate"""
        outcome = _outcome(
            {
                "pipeline": "non-coboundary",
                "construction": "almost-invariant",
                "machine": {"kind": "odometer", "stages": 6},
                "delta": "1/2",
                "n": 4,
                "eps": "1/4",
            }
        )
        assert outcome.ok
        assert outcome.result["run_length"] == 16
        assert outcome.result["stay"] == {"a": "3/8", "b": "0", "d": 1}

    def test_series(self):
        """Test the single-stage series"""
        outcome = _outcome(
            {
                "pipeline": "non-coboundary",
                "construction": "series",
                "eps1": "1/2",
                "ratio": "1/32",
                "stages": 1,
                "n1": 4,
            }
        )
        assert outcome.ok
        assert outcome.rows[0]["n"] == 4

    def test_nonintegrable_transfer(self):
        """Test the smallest transfer instance"""
        outcome = _outcome(
            {
                "pipeline": "non-coboundary",
                "construction": "transfer",
                "machine": {"kind": "odometer", "stages": 4},
                "N_max": 1,
            }
        )
        assert outcome.ok
        assert outcome.result["entries"][0]["H_norm"] == {"a": "1/2", "b": "0", "d": 1}

    def test_obstruction(self):
        """Test log n / n at the golden angle"""
        outcome = _outcome({"pipeline": "diophantine", "mode": "obstruction", "alpha": "(√5-1)/2", "depth": 100})
        assert outcome.result["verdict"] == "obstruction"
        assert [r["n"] for r in outcome.rows][2:] == [3, 5, 8, 13, 21, 34, 55, 89]

    def test_fourier_transfer(self):
        """Test the exact transfer of cos(2 pi x) at the golden angle"""
        outcome = _outcome(
            {
                "pipeline": "diophantine",
                "mode": "transfer",
                "alpha": "(√5-1)/2",
                "coefficients": [{"n": 1, "re": "0.5"}, {"n": -1, "re": "0.5"}],
                "samples": 50,
            }
        )
        assert outcome.result["exact_expected"]
        assert outcome.ok

    def test_approximation(self):
        """Test one-dimensional approximation of √2 - 1"""
        outcome = _outcome({"pipeline": "diophantine", "mode": "approximation", "x": ["√2-1"], "q_max": 100})
        assert outcome.ok
        assert outcome.result["holds"]

    def test_mode_needs_alpha(self):
        """Test the missing-angle error"""
        from src.core.errors import ConfigError

        with pytest.raises(ConfigError, match="alpha"):
            _outcome({"pipeline": "diophantine", "mode": "obstruction"})

    def test_joint_approximation(self):
        """Test the zero target on a short odometer"""
        outcome = _outcome({"pipeline": "joint-approx", "machine": {"kind": "odometer", "stages": 3}, "K": [], "M": 2, "N": 8})
        assert outcome.ok
        assert outcome.result["report"]["defect"] == {"a": "0", "b": "0", "d": 1}


class TestExperimentRunner:
    """Tests for run directories and the verifier"""

    async def test_run_directory(self, tmp_path, sweep_config):
        """Test the files of a completed sweep"""
        from src.core.interfaces import StepStatus
        from src.orchestrator.experiments import parse_experiment
        from src.orchestrator.pipelines import run_experiment

        result, run_dir = await run_experiment(parse_experiment(sweep_config), tmp_path)
        assert result.status == StepStatus.COMPLETED
        assert run_dir.name.startswith("sweep-")
        names = {p.name for p in run_dir.iterdir()}
        assert names == {"config.json", "report.json", "sweep.csv", "sweep.svg"}
        report = orjson.loads((run_dir / "report.json").read_bytes())
        csv_rows = (run_dir / "sweep.csv").read_text().strip().splitlines()
        assert csv_rows[0] == "n,norm,witness"
        assert len(csv_rows) - 1 == len(report["result"]["sweep"]["entries"]) == 20

    async def test_construction_failure(self, tmp_path):
        """Test a machine too shallow for the requested set"""
        from src.core.errors import MachineTooShallowError
        from src.orchestrator.experiments import parse_experiment
        from src.orchestrator.pipelines import run_experiment

        experiment = parse_experiment(
            {
                "pipeline": "non-coboundary",
                "construction": "almost-invariant",
                "machine": {"kind": "odometer", "stages": 3},
                "n": 16,
            }
        )
        result, run_dir = await run_experiment(experiment, tmp_path)
        assert isinstance(result.error, MachineTooShallowError)
        assert result.exit_code == 3
        assert not (run_dir / "report.json").exists()

    async def test_failed_certificate_keeps_report(self, tmp_path, sweep_config):
        """Test that a failed certificate exits 4 with its report on disk"""
        from src.orchestrator.experiments import parse_experiment
        from src.orchestrator.pipelines import run_experiment

        result, run_dir = await run_experiment(
            parse_experiment({**sweep_config, "transfer_bound": "1/100"}), tmp_path, ["json"]
        )
        assert result.exit_code == 4
        assert orjson.loads((run_dir / "report.json").read_bytes())["ok"] is False

    async def test_weak_mixing_files(self, tmp_path):
        """Test the stage log, recipe and schedule certificate"""
        from src.orchestrator.experiments import parse_experiment
        from src.orchestrator.pipelines import run_experiment

        experiment = parse_experiment({"pipeline": "weak-mixing", "eps": ["1/2", "1/4"], "N": [2, 4], "stages": 2})
        result, run_dir = await run_experiment(experiment, tmp_path, ["json"])
        assert result.exit_code == 0
        lines = (run_dir / "stages.jsonl").read_bytes().splitlines()
        assert [orjson.loads(line)["stage"] for line in lines] == [0, 1]
        assert orjson.loads((run_dir / "certificate.json").read_bytes())["N"] == [2, 4]
        assert "branches" in orjson.loads((run_dir / "recipe.json").read_bytes())

    def test_verify_and_tamper(self, tmp_path, sweep_config):
        """Test that verify recomputes the bound from the serialized values"""
        import asyncio

        from src.core.errors import VerificationError
        from src.orchestrator.experiments import parse_experiment
        from src.orchestrator.pipelines import run_experiment
        from src.orchestrator.verify import verify_run

        _, run_dir = asyncio.run(run_experiment(parse_experiment(sweep_config), tmp_path, ["json"]))
        summary = verify_run(run_dir, replay=True)
        assert summary.ok
        assert len(summary.checks) == 23

        path = run_dir / "report.json"
        report = orjson.loads(path.read_bytes())
        report["result"]["sweep"]["verdict"]["bound"] = {"a": "1/100", "b": "0", "d": 1}
        path.write_bytes(orjson.dumps(report))
        with pytest.raises(VerificationError):
            verify_run(run_dir)

    def test_verify_noncoboundary(self, tmp_path):
        """Test the recomputed series inequalities"""
        import asyncio

        from src.orchestrator.experiments import parse_experiment
        from src.orchestrator.pipelines import run_experiment
        from src.orchestrator.verify import verify_run

        experiment = parse_experiment(
            {"pipeline": "non-coboundary", "construction": "series", "eps1": "1/2", "ratio": "1/32", "stages": 1, "n1": 4}
        )
        _, run_dir = asyncio.run(run_experiment(experiment, tmp_path, ["json"]))
        summary = verify_run(run_dir)
        assert summary.ok
        assert len(summary.checks) == 7
