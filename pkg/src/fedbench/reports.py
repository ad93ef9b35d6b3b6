"""Deterministic CSV/JSON report writers.

Identical reports serialize to byte-identical files: floats are
rendered at 17 significant digits, rows are emitted in a fixed sort
order, and line endings are pinned to `\\n`.
"""

from __future__ import annotations

import csv
import json
import os

from .bench import ComparisonReport, GridReport

GRID_HEADER = ["setup", "row_key", "col_key", "repeats", "mean_mse", "std_mse", "pct_change"]
CELLS_HEADER = ["row_key", "col_key", "repeat", "seed", "final_mse"]
COMPARE_HEADER = ["distribution", "client_count", "ensemble_mse", "federated_mse", "pct_difference"]


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_grid_report(report: GridReport, out_dir) -> list[str]:
    """Emit grid.csv, cells.csv (per-repeat log) and provenance.json."""
    os.makedirs(out_dir, exist_ok=True)
    grid_path = os.path.join(out_dir, "grid.csv")
    with open(grid_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(GRID_HEADER)
        for c in report.cells:
            writer.writerow(
                [
                    report.setup,
                    _fmt(c.row_key),
                    _fmt(c.col_key),
                    c.repeats,
                    _fmt(c.mean_mse),
                    _fmt(c.std_mse),
                    _fmt(c.pct_change),
                ]
            )
    cells_path = os.path.join(out_dir, "cells.csv")
    with open(cells_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CELLS_HEADER)
        for e in report.repeat_log:
            writer.writerow(
                [_fmt(e.row_key), _fmt(e.col_key), e.repeat, e.seed, _fmt(e.final_mse)]
            )
    prov_path = os.path.join(out_dir, "provenance.json")
    with open(prov_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "setup": report.setup,
                "reference_cell": list(report.reference_cell),
                **report.provenance,
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    return [grid_path, cells_path, prov_path]


def write_comparison_report(report: ComparisonReport, out_dir) -> list[str]:
    """Emit compare.csv and provenance.json."""
    os.makedirs(out_dir, exist_ok=True)
    compare_path = os.path.join(out_dir, "compare.csv")
    with open(compare_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COMPARE_HEADER)
        for r in report.rows:
            writer.writerow(
                [
                    r.distribution,
                    r.client_count,
                    _fmt(r.ensemble_mse),
                    _fmt(r.federated_mse),
                    _fmt(r.pct_difference),
                ]
            )
    prov_path = os.path.join(out_dir, "provenance.json")
    with open(prov_path, "w", encoding="utf-8") as fh:
        json.dump(report.provenance, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return [compare_path, prov_path]


def write_reports(report, out_dir) -> list[str]:
    """Dispatch on report type; identical inputs give identical bytes."""
    if isinstance(report, GridReport):
        return write_grid_report(report, out_dir)
    if isinstance(report, ComparisonReport):
        return write_comparison_report(report, out_dir)
    raise TypeError(f"unsupported report type {type(report).__name__}")
