"""Tests for the command line entry point"""

import orjson

DYADIC_CONFIG = {
    "pipeline": "step-coboundary",
    "f": [["0", "1/2", "1"], ["1/2", "1", "-1"]],
    "stages": 3,
    "n_max": 16,
    "samples": 64,
}


def _run(main, capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out.strip()
    return code, out


class TestRunCommand:
    """Tests for cocycle-workbench run"""

    def test_sweep_run(self, tmp_path, capsys, write_config, sweep_config):
        """Test a bounded rotation sweep writes all formats"""
        from pathlib import Path

        from src.main import main

        code, out = _run(main, capsys, "run", str(write_config(sweep_config)), "--out", str(tmp_path / "runs"))
        assert code == 0
        run_dir = Path(out)
        for name in ("config.json", "report.json", "sweep.csv", "sweep.svg"):
            assert (run_dir / name).exists()
        lines = (run_dir / "sweep.csv").read_text().splitlines()
        assert lines[0] == "n,norm,witness"
        assert len(lines) == 21

    def test_runs_are_reproducible(self, tmp_path, capsys, write_config, sweep_config):
        """Test two runs of one document give byte-identical files"""
        from pathlib import Path

        from src.main import main

        config = str(write_config(sweep_config))
        _, first = _run(main, capsys, "run", config, "--out", str(tmp_path / "a"))
        _, second = _run(main, capsys, "run", config, "--out", str(tmp_path / "b"))
        assert Path(first).name == Path(second).name
        for name in ("report.json", "sweep.csv", "sweep.svg"):
            assert (Path(first) / name).read_bytes() == (Path(second) / name).read_bytes()

    def test_json_only(self, tmp_path, capsys, write_config, sweep_config):
        """Test --formats json skips the table and the plot"""
        from pathlib import Path

        from src.main import main

        code, out = _run(
            main, capsys, "run", str(write_config(sweep_config)), "--out", str(tmp_path), "--formats", "json"
        )
        assert code == 0
        assert sorted(p.name for p in Path(out).iterdir()) == ["config.json", "report.json"]

    def test_config_errors(self, tmp_path, capsys, write_config, sweep_config):
        """Test exit code 2 for bad documents and formats"""
        from src.main import main

        assert main(["run", str(write_config(b"")), "--out", str(tmp_path)]) == 2
        assert main(["run", str(write_config({})), "--out", str(tmp_path)]) == 2
        assert main(["run", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2
        assert main(["run", str(write_config(sweep_config)), "--out", str(tmp_path), "--formats", "csv,pdf"]) == 2
        assert "pdf" in capsys.readouterr().err

    def test_usage_error(self, capsys):
        """Test argparse failures map to exit code 2"""
        from src.main import main

        assert main([]) == 2
        assert main(["frobnicate"]) == 2

    def test_construction_error(self, tmp_path, capsys, write_config):
        """Test exit code 3 when the machine is too shallow"""
        from src.main import main

        config = {
            "pipeline": "non-coboundary",
            "construction": "almost-invariant",
            "machine": {"kind": "odometer", "stages": 3},
            "n": 16,
        }
        assert main(["run", str(write_config(config)), "--out", str(tmp_path)]) == 3
        assert "error: " in capsys.readouterr().err

    def test_failed_certificate(self, tmp_path, capsys, write_config, sweep_config):
        """Test exit code 4 with the failing report kept on disk"""
        from src.main import main

        config = {**sweep_config, "transfer_bound": "1/100"}
        assert main(["run", str(write_config(config)), "--out", str(tmp_path / "runs")]) == 4
        (run_dir,) = (tmp_path / "runs").iterdir()
        report = orjson.loads((run_dir / "report.json").read_bytes())
        assert report["ok"] is False
        assert report["result"]["sweep"]["verdict"]["kind"] != "bounded"


class TestVerifyCommand:
    """Tests for cocycle-workbench verify and plot"""

    def test_verify_sweep(self, tmp_path, capsys, write_config, sweep_config):
        """Test verify and verify --replay on a finished sweep"""
        from src.main import main

        _, run_dir = _run(main, capsys, "run", str(write_config(sweep_config)), "--out", str(tmp_path / "runs"))
        code, out = _run(main, capsys, "verify", run_dir)
        assert code == 0
        assert out.startswith("sweep:")
        assert main(["verify", run_dir, "--replay"]) == 0

    def test_verify_step_coboundary(self, tmp_path, capsys, write_config):
        """Test the dyadic coboundary certificate re-checks"""
        from pathlib import Path

        from src.main import main

        code, run_dir = _run(main, capsys, "run", str(write_config(DYADIC_CONFIG)), "--out", str(tmp_path / "runs"))
        assert code == 0
        assert (Path(run_dir) / "recipe.json").exists()
        assert (Path(run_dir) / "certificate.json").exists()
        assert main(["verify", run_dir]) == 0

    def test_verify_tampered_report(self, tmp_path, capsys, write_config, sweep_config):
        """Test exit code 4 when a stored bound no longer holds"""
        from pathlib import Path

        from src.main import main

        _, run_dir = _run(main, capsys, "run", str(write_config(sweep_config)), "--out", str(tmp_path / "runs"))
        path = Path(run_dir) / "report.json"
        report = orjson.loads(path.read_bytes())
        report["result"]["sweep"]["verdict"]["bound"] = {"a": "1/100", "b": "0", "d": 1}
        path.write_bytes(orjson.dumps(report))
        assert main(["verify", run_dir]) == 4

    def test_verify_missing_run(self, tmp_path):
        """Test a directory without report.json"""
        from src.main import main

        assert main(["verify", str(tmp_path)]) == 2

    def test_plot(self, tmp_path, capsys, write_config, sweep_config):
        """Test plot redraws the SVG from report.json"""
        from pathlib import Path

        from src.main import main

        _, run_dir = _run(
            main, capsys, "run", str(write_config(sweep_config)), "--out", str(tmp_path), "--formats", "json"
        )
        code, out = _run(main, capsys, "plot", run_dir)
        assert code == 0
        assert Path(out) == Path(run_dir) / "sweep.svg"
        assert Path(out).read_bytes().lstrip().startswith(b"<?xml")
