"""CSV and manifest emission for optimization runs.

Output is bit-specified: fixed 3-decimal formatting, comma separation with
minimal quoting, UTF-8, ``\\n`` line endings. Identical inputs must yield
byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict
from decimal import Decimal
from pathlib import Path

from .catalog import FactorCatalog
from .dataset import DescriptiveRow
from .optimize import GAResult, Scope, ThemeSummaryRow

GLOBAL_TABLE_NAME = "best_solution_table_global_GA.csv"
THEME_SUMMARY_NAME = "theme_results_summary.csv"
THEME_ALLOCATION_TEMPLATE = "theme_best_allocations_{category_id}.csv"
DESCRIPTIVES_NAME = "descriptive_stats.csv"

CSV_FORMAT_VERSION = 1


def _fmt3(x: float) -> str:
    return f"{x:.3f}"


def _write_csv(path: Path, header: list[str], rows: list[list]) -> Path:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue(), encoding="utf-8", newline="")
    return path


def emit_global_table(result: GAResult, catalog: FactorCatalog, out_dir: str | Path) -> Path:
    """Global best allocation, one row per factor, highest levels first."""
    rows = [
        (catalog.factor(fid).name, level, level) for fid, level in result.best.items()
    ]
    rows.sort(key=lambda r: (-r[1], r[0]))
    return _write_csv(
        Path(out_dir) / GLOBAL_TABLE_NAME,
        ["factor", "selected_level", "cost"],
        [list(r) for r in rows],
    )


def emit_theme_summary(
    rows: list[ThemeSummaryRow], catalog: FactorCatalog, out_dir: str | Path
) -> Path:
    """Category-level summary sorted by delta fitness, best first.

    The fitness column is recomputed from the already-rounded probability and
    cost columns so the emitted identity holds exactly at 3 decimals.
    """
    ordered = sorted(rows, key=lambda r: -r.delta_fitness)
    out = []
    for row in ordered:
        p = _fmt3(row.ga_p_agg)
        c = _fmt3(row.ga_norm_cost)
        f = str(Decimal(p) - Decimal(c))
        out.append(
            [
                f"{row.category_id}_{catalog.category(row.category_id).name}",
                row.num_factors,
                p,
                c,
                f,
                _fmt3(row.delta_fitness),
            ]
        )
    return _write_csv(
        Path(out_dir) / THEME_SUMMARY_NAME,
        ["theme", "num_factors", "ga_p_agg", "ga_norm_cost", "ga_fitness", "delta_fitness"],
        out,
    )


def emit_theme_allocations(
    results: dict[str, GAResult], catalog: FactorCatalog, out_dir: str | Path
) -> list[Path]:
    """One best-allocation file per category."""
    paths = []
    for category in catalog.categories:
        if category.id not in results:
            raise ValueError(f"missing optimization result for category {category.id!r}")
        result = results[category.id]
        rows = [
            [catalog.factor(fid).name, level, level]
            for fid, level in result.best.items()
        ]
        paths.append(
            _write_csv(
                Path(out_dir) / THEME_ALLOCATION_TEMPLATE.format(category_id=category.id),
                ["factor", "best_level", "cost"],
                rows,
            )
        )
    return paths


def emit_descriptives(
    rows: list[DescriptiveRow], catalog: FactorCatalog, out_dir: str | Path
) -> Path:
    out = [
        [
            catalog.factor(row.factor_id).name,
            catalog.factor(row.factor_id).kind,
            _fmt3(row.mean),
            _fmt3(row.sd),
            row.n,
        ]
        for row in rows
    ]
    return _write_csv(
        Path(out_dir) / DESCRIPTIVES_NAME,
        ["factor", "kind", "mean", "sd", "n"],
        out,
    )


def _report_doc(report) -> dict | None:
    return asdict(report) if report is not None else None


def write_run_manifest(
    name: str, result: GAResult, scope: Scope, out_dir: str | Path
) -> Path:
    """Everything needed to replay one GA run exactly."""
    doc = {
        "format_version": CSV_FORMAT_VERSION,
        "name": name,
        "seed": result.params.seed,
        "params": asdict(result.params),
        "scope": {
            "optimized": list(scope.optimized),
            "context": dict(scope.context),
        },
        "baseline": result.baseline,
        "baseline_report": _report_doc(result.baseline_report),
        "best": result.best,
        "best_report": _report_doc(result.best_report),
        "delta_fitness": result.delta_fitness,
        "trajectory": list(result.trajectory),
    }
    path = Path(out_dir) / f"run_manifest_{name}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_csv_rows(path: str | Path) -> tuple[list[str], list[list[str]]]:
    """Parse one of our CSVs back into header + string rows."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    return rows[0], rows[1:]
