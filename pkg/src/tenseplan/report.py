"""Writing run reports: CSV tables, JSON records and figures."""

from __future__ import annotations

import csv
import json
import math
import os

from .pipeline import plot_data

WAYPOINT_FIELDS = ["col", "row", "x", "y"]
OUTPUT_FILES = ("waypoints.csv", "trajectory.csv", "plotdata.json", "scene.png", "clearance.png",
                "summary.json")


def fmt(x):
    x = float(x)
    if not math.isfinite(x):
        return repr(x)
    return f"{x:.16e}"


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def trajectory_header(n):
    return ["step"] + [f"q_{i}" for i in range(1, n + 1)] + [
        "xe", "ye", "dq_norm", "active_count", "min_margin"]


def emit_outputs(report, out_dir, snapshot_every=10, figures=True):
    """Write the report files into ``out_dir``; returns ``{name: path}``."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {name: os.path.join(out_dir, name + ext) for name, ext in (
        ("waypoints", ".csv"), ("trajectory", ".csv"), ("summary", ".json"), ("plotdata", ".json"),
    )}

    _write_csv(paths["waypoints"], WAYPOINT_FIELDS, [
        (j, i, fmt(x), fmt(y))
        for j, (i, (x, y)) in enumerate(zip(report.path.row_indices, report.waypoints))
    ])

    step_rows = report.step_rows()
    _write_csv(paths["trajectory"], trajectory_header(report.scenario.geometry.n), [
        [k] + [fmt(v) for v in q] + [fmt(ee[0]), fmt(ee[1]), fmt(dqn), count, fmt(margin)]
        for k, q, ee, dqn, count, margin in step_rows
    ])

    _write_json(paths["summary"], report.summary)
    data = plot_data(report, snapshot_every)
    _write_json(paths["plotdata"], data)

    if figures:
        from .plotting import render_clearance, render_scene

        paths["scene_figure"] = render_scene(data, os.path.join(out_dir, "scene.png"))
        paths["clearance_figure"] = render_clearance(step_rows, os.path.join(out_dir, "clearance.png"))
    return paths


def emit_failure(out_dir, stage, error, exit_code):
    """Summary-only output for a failed run; no trajectory file is written."""
    os.makedirs(out_dir, exist_ok=True)
    for stale in OUTPUT_FILES[:-1]:
        stale = os.path.join(out_dir, stale)
        if os.path.exists(stale):
            os.remove(stale)
    path = os.path.join(out_dir, "summary.json")
    _write_json(path, {"status": "failed", "stage": stage, "error": type(error).__name__,
                       "message": str(error), "exit_code": exit_code})
    return path


def read_trajectory(path):
    """Parse a trajectory table back into dicts of floats (ints for counts)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = []
        for rec in csv.DictReader(fh):
            rows.append({k: (int(v) if k in ("step", "active_count") else float(v))
                         for k, v in rec.items()})
    return rows
