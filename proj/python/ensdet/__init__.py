"""Score-level ensembles and balanced-accuracy evaluation for face-forgery detectors."""

import json

from ._core import (
    EnsdetError,
    aggregate_identity,
    aggregate_video,
    ba_attribution,
    ba_detection,
    combine,
    default_grid,
    evaluate_report,
    make_grid,
    run_cli,
    simulate,
    sweep_csv,
    to_detection,
)

__all__ = [
    "EnsdetError",
    "aggregate_identity",
    "aggregate_video",
    "ba_attribution",
    "ba_detection",
    "combine",
    "default_grid",
    "evaluate",
    "make_grid",
    "run_cli",
    "simulate",
    "sweep",
    "to_detection",
]


def evaluate(manifest, scores, design, task, threshold=0.5, level="face", lenient=False, models=(), jobs=1):
    """Evaluate an ensemble on files and return the report as a dict."""
    text = evaluate_report(str(manifest), str(scores), design, task, threshold, level, lenient, list(models), jobs)
    return json.loads(text)


def sweep(manifest, scores, design, task, grid=(), lenient=False, models=(), jobs=1):
    """Threshold sweep; returns (rows, summary) with one dict per threshold."""
    text = sweep_csv(str(manifest), str(scores), design, task, list(grid), lenient, list(models), jobs)
    lines = text.splitlines()
    summary = dict(item.split("=", 1) for item in lines[0].split()[3:])
    header = lines[1].split(",")
    rows = []
    for line in lines[2:]:
        values = line.split(",")
        rows.append({k: (float(v) if v else None) for k, v in zip(header, values)})
    summary["best_threshold"] = float(summary["best_threshold"])
    summary["best_balanced_accuracy"] = float(summary["best_balanced_accuracy"])
    return rows, summary
