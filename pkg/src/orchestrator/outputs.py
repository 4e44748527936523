"""Run directory writers

``report.json`` is the canonical record of a run. CSV and SVG files are
derived from its ``rows`` so re-emitting them from the same report gives
the same bytes.
"""

from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import mpmath  # noqa: E402
import orjson  # noqa: E402
import pandas as pd  # noqa: E402

from src.core.errors import ConfigError, ExactArithmeticError  # noqa: E402
from src.measure.numbers import parse_exact, to_mpf  # noqa: E402
from src.utils.helpers import canonical_json  # noqa: E402
from src.utils.logging import StageLog, get_logger  # noqa: E402

logger = get_logger(__name__)

FORMATS = ("csv", "json", "svg")
CSV_COLUMNS = ["n", "norm", "witness"]

CONFIG_FILE = "config.json"
REPORT_FILE = "report.json"
CSV_FILE = "sweep.csv"
SVG_FILE = "sweep.svg"
STAGES_FILE = "stages.jsonl"

plt.rcParams["svg.hashsalt"] = "cocycle-workbench"


def parse_formats(text: Optional[str]) -> List[str]:
    if not text:
        return list(FORMATS)
    formats = [part.strip().lower() for part in text.split(",") if part.strip()]
    unknown = sorted(set(formats) - set(FORMATS))
    if unknown:
        raise ConfigError(f"unknown output format {unknown[0]!r}; expected a subset of {list(FORMATS)}")
    return formats


def write_json(path: Path, data: Any) -> Path:
    path.write_bytes(canonical_json(data))
    return path


def read_json(path: Path) -> Any:
    try:
        return orjson.loads(path.read_bytes())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except orjson.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not JSON: {exc}") from exc


def write_run(
    run_dir: Path,
    config: Dict[str, Any],
    report: Dict[str, Any],
    extras: Optional[Dict[str, Any]] = None,
    stages: Optional[StageLog] = None,
) -> List[Path]:
    """config.json, report.json and the construction's extra documents"""
    run_dir.mkdir(parents=True, exist_ok=True)
    paths = [write_json(run_dir / CONFIG_FILE, config), write_json(run_dir / REPORT_FILE, report)]
    for name, document in sorted((extras or {}).items()):
        paths.append(write_json(run_dir / name, document))
    if stages is not None:
        path = run_dir / STAGES_FILE
        stages.write(path)
        paths.append(path)
    return paths


def load_report(run_dir: Path) -> Dict[str, Any]:
    path = run_dir / REPORT_FILE
    if not path.exists():
        raise ConfigError(f"{run_dir} is not a completed run: {REPORT_FILE} is missing")
    return read_json(path)


def as_float(value: Any) -> float:
    """Plot coordinate of a row value: number, decimal text or exact text such as "√2-1" """
    if isinstance(value, (int, float)):
        return float(value)
    if value is None or value == "":
        return float("nan")
    text = str(value)
    try:
        return float(text)
    except ValueError:
        pass
    try:
        return float(to_mpf(parse_exact(text)))
    except ExactArithmeticError:
        return float(mpmath.mpf(text))


def write_csv(path: Path, rows: Iterable[Dict[str, Any]]) -> Path:
    frame = pd.DataFrame([{c: row.get(c, "") for c in CSV_COLUMNS} for row in rows], columns=CSV_COLUMNS)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def write_svg(path: Path, rows: Iterable[Dict[str, Any]], title: str) -> Path:
    points = [(as_float(r["n"]), as_float(r["norm"])) for r in rows]
    points = [(x, y) for x, y in points if x > 0 and y > 0]
    fig, ax = plt.subplots(figsize=(6, 4))
    try:
        if points:
            ax.plot([p[0] for p in points], [p[1] for p in points], marker=".", linewidth=1)
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel("n")
        ax.set_ylabel("norm")
        ax.set_title(title)
        ax.grid(True, which="both", linewidth=0.3)
        fig.savefig(path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    return path


def emit_outputs(run_dir: Path, formats: Iterable[str]) -> List[Path]:
    """Derive the requested files from report.json"""
    formats = list(formats)
    unknown = sorted(set(formats) - set(FORMATS))
    if unknown:
        raise ConfigError(f"unknown output format {unknown[0]!r}; expected a subset of {list(FORMATS)}")
    report = load_report(run_dir)
    rows = report.get("rows", [])
    paths: List[Path] = []
    if "json" in formats:
        paths.append(run_dir / REPORT_FILE)
    if "csv" in formats:
        paths.append(write_csv(run_dir / CSV_FILE, rows))
    if "svg" in formats:
        paths.append(write_svg(run_dir / SVG_FILE, rows, report.get("pipeline", "")))
    logger.info("outputs_emitted", run_dir=str(run_dir), formats=formats, rows=len(rows))
    return paths
