"""Flat CSV / JSON emitters for external plotting.

Floats are written with ``repr`` (shortest round-trip form) so identical
inputs produce byte-identical files; non-finite values become empty CSV
cells / JSON nulls.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from . import gauss_geom as gg
from . import spectral
from .errors import IoError


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return repr(x) if math.isfinite(x) else ""


def clean(obj):
    """Recursively convert numpy types and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    try:
        path.write_text(json.dumps(clean(obj), indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None
    return path


def write_csv(path, columns: dict) -> Path:
    """One observable per column, header row first."""
    path = Path(path)
    names = list(columns)
    cols = [list(columns[k]) for k in names]
    rows = len(cols[0]) if cols else 0
    if any(len(c) != rows for c in cols):
        raise ValueError("columns must have equal length")
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(names)
            for i in range(rows):
                w.writerow([_fmt(c[i]) for c in cols])
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None
    return path


def theta_surface(scans) -> dict:
    cols = {"h0": [], "r": [], "theta": [], "c": []}
    for scan in scans:
        for h0, pair, val in zip(scan.grid, scan.pairs, scan.theta_values):
            cols["h0"].append(h0)
            cols["r"].append(pair.r if pair else None)
            cols["theta"].append(val)
            cols["c"].append(scan.c)
    return cols


def trajectory_table(traj) -> dict:
    return {"theta": traj.theta, "h": traj.h, "hp": traj.hp, "drift": traj.drift}


def solution_table(result, f) -> dict:
    h = result.support
    return {
        "theta": spectral.grid(result.n),
        "h": result.h,
        "density": gg.density_smooth(h),
        "f": f.values,
    }


def emit_plot_data(result, out_dir, stem: str, fmt: str = "csv", **extra) -> Path:
    """Write a report either as a flat CSV table or as JSON."""
    out = Path(out_dir)
    if fmt == "json":
        payload = result.to_dict() if hasattr(result, "to_dict") else result
        return write_json(out / f"{stem}.json", payload)
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    if isinstance(result, dict):
        table = result
    elif hasattr(result, "drift"):
        table = trajectory_table(result)
    elif hasattr(result, "branch"):
        table = solution_table(result, extra["f"])
    elif isinstance(result, list):
        table = theta_surface(result)
    else:
        table = theta_surface([result])
    return write_csv(out / f"{stem}.csv", table)
