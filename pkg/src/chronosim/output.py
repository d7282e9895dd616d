"""Persist result records as CSV, JSON summary and a gnuplot script."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import ChronosimError
from .scenarios import ResultRecord

CSV_HEADER = ["scenario", "t", "rate", "residual", "trace_drift", "measure", "extra_json"]
LOG_SCALE_FIELDS = ("slope",)


class OutputError(ChronosimError):
    pass


def _clean(value):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, complex):
        return [_clean(value.real), _clean(value.imag)]
    return value


def _fmt(x: float) -> str:
    # repr gives the shortest round-tripping form, so output is bit-stable
    return repr(float(x))


def results_csv(record: ResultRecord) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in record.rows:
        extra = dict(row.extra)
        if row.failed:
            extra["failed"] = True
        writer.writerow(
            [
                record.scenario,
                _fmt(row.t),
                _fmt(row.rate),
                _fmt(row.residual),
                _fmt(row.trace_drift),
                _fmt(row.measure),
                json.dumps(_clean(extra), sort_keys=True, separators=(",", ":")),
            ]
        )
    return buf.getvalue()


def summary_json(record: ResultRecord) -> str:
    doc = {
        "scenario": record.scenario,
        "config_hash": record.config_hash,
        "verdicts": record.verdicts,
        "passed": record.passed,
        "failed_rows": sum(r.failed for r in record.rows),
        "fitted": record.fitted,
        "units": record.metadata.get("units"),
        "version": record.metadata.get("version"),
    }
    return json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"


def plot_script(record: ResultRecord) -> str:
    log = "slope" in record.fitted
    lines = [
        f"# gnuplot script for scenario {record.scenario}",
        "# columns: 1 scenario, 2 t, 3 rate, 4 residual, 5 trace_drift, 6 measure, 7 extra_json",
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set terminal pngcairo size 900,600",
        f"set output '{record.scenario}.png'",
        "set xlabel 't'",
        "set multiplot layout 1,2",
    ]
    if log:
        lines += ["set logscale xy", "set ylabel 'measure'", "plot 'results.csv' using 2:6 with linespoints"]
    else:
        lines += ["set ylabel 'rate'", "plot 'results.csv' using 2:3 with linespoints"]
        lines += ["set ylabel 'measure'", "plot 'results.csv' using 2:6 with linespoints"]
    lines.append("unset multiplot")
    return "\n".join(lines) + "\n"


def emit_outputs(record: ResultRecord, directory) -> dict:
    """Write ``results.csv``, ``summary.json`` and ``plot.gp`` into ``directory``."""
    directory = Path(directory)
    files = {
        "results.csv": results_csv(record),
        "summary.json": summary_json(record),
        "plot.gp": plot_script(record),
    }
    written = {}
    for name, text in files.items():
        path = directory / name
        try:
            directory.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
        except OSError as exc:
            raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
        written[name] = path
    return written
