"""CSV, JSON and SVG artifacts in the output directory."""

import json
from pathlib import Path
from typing import Any, Iterable, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
import structlog
from matplotlib.ticker import LogLocator, MaxNLocator

from app.core.errors import RejectedInputError

logger = structlog.get_logger()

FLOAT_FORMAT = "%.17g"


def write_csv(path: Path, rows: Iterable[dict[str, Any]], columns: Sequence[str]) -> Path:
    """Byte-deterministic CSV with a fixed header"""
    df = pd.DataFrame(list(rows), columns=list(columns))
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("csv_written", path=str(path), rows=len(df))
    return path


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def write_json(path: Path, payload: dict[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    logger.info("json_written", path=str(path))
    return path


def collect_reports(out_dir: Path, exclude: str = "report.json") -> dict[str, Any]:
    """Every JSON artifact in the directory, keyed by file stem"""
    return {
        p.stem: json.loads(p.read_text())
        for p in sorted(out_dir.glob("*.json"))
        if p.name != exclude
    }


def plot_csv(csv_path: Path, x: str, y: str, out_path: Path, log: bool = False) -> Path:
    """Single-panel polyline of column y against column x as an 800x600 SVG"""
    if not csv_path.exists():
        raise RejectedInputError("CSV not found", path=str(csv_path))
    df = pd.read_csv(csv_path)
    missing = [c for c in (x, y) if c not in df.columns]
    if missing:
        raise RejectedInputError("missing column", columns=missing, path=str(csv_path))

    df = df.sort_values(x)
    xs, ys = df[x].to_numpy(), df[y].to_numpy()
    if log:
        ys = np.abs(ys)

    with plt.rc_context({"svg.fonttype": "none", "svg.hashsalt": "edgespec"}):
        fig, ax = plt.subplots(figsize=(800 / 72, 600 / 72), dpi=72)
        ax.plot(xs, ys, "-", lw=1.5, color="C0")
        if log:
            ax.set_xscale("log")
            ax.set_yscale("log")
            ax.xaxis.set_major_locator(LogLocator(numticks=5))
            ax.yaxis.set_major_locator(LogLocator(numticks=5))
        else:
            ax.xaxis.set_major_locator(MaxNLocator(5))
            ax.yaxis.set_major_locator(MaxNLocator(5))
        ax.set_xlabel(x)
        ax.set_ylabel(f"|{y}|" if log else y)
        ax.grid(True, alpha=0.3)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out_path, format="svg", metadata={"Date": None})
        plt.close(fig)

    logger.info("plot_written", path=str(out_path), x=x, y=y, points=int(xs.size))
    return out_path
