"""Command-line pipeline: describe, train, optimize, serve.

Exit codes: 0 ok, 2 validation/parse failure, 3 I/O failure, 4 numeric failure.
"""

from __future__ import annotations

import functools
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import click

from .catalog import FactorCatalog, catalog_to_config, load_catalog
from .dataset import (
    DEFAULT_FACTOR_TARGETS,
    Dataset,
    DescriptiveRow,
    ExclusionReport,
    OutcomePolicy,
    ParseReport,
    RULE_NO_CONSENT,
    RULE_STRAIGHT_LINING,
    SynthesisSpec,
    build_dataset,
    clean,
    descriptive_stats,
    load_survey,
    stratified_split,
    synthesize_dataset,
)
from .errors import FactorPlanError, TrainingError, ValidationError
from .models import (
    TrainParams,
    evaluate,
    load_scorer,
    save_scorer,
    train_scorer,
)
from .optimize import (
    GAParams,
    baseline_allocation,
    category_scope,
    global_scope,
    optimize_categories_from_baseline,
    optimize_global_from_baseline,
)
from .reporting import (
    emit_descriptives,
    emit_global_table,
    emit_theme_allocations,
    emit_theme_summary,
    write_run_manifest,
)
from .service import JobRegistry, ServiceState, create_server

EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

SCORER_FILE = "scorer.json"
METRICS_FILE = "metrics.json"
WORKSPACE_FILE = "workspace.json"

SPLIT_RATIO = 0.8


def _exit_on_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except TrainingError as exc:
            click.echo(f"numeric failure: {exc}", err=True)
            sys.exit(EXIT_NUMERIC)
        except FactorPlanError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
        except OSError as exc:
            click.echo(f"i/o failure: {exc}", err=True)
            sys.exit(EXIT_IO)

    return wrapper


@dataclass
class SourceResult:
    dataset: Dataset
    parse_report: ParseReport | None = None
    exclusion_report: ExclusionReport | None = None


@dataclass
class RunConfig:
    """Validated bundle of the shared pipeline options."""

    input_path: str | None
    synthesize: str | None
    catalog_path: str | None
    threshold: int
    seed: int | None
    out_dir: str

    def __post_init__(self):
        if (self.input_path is None) == (self.synthesize is None):
            raise ValidationError("exactly one of --input or --synthesize is required")
        if self.synthesize == "default" and self.seed is None:
            raise ValidationError("--seed is required when synthesizing data")

    def require_seed(self) -> int:
        if self.seed is None:
            raise ValidationError("--seed is required for this command")
        return self.seed


def _read_catalog(catalog_path: str | None) -> FactorCatalog:
    if catalog_path is None:
        return load_catalog(None)
    return load_catalog(Path(catalog_path).read_text(encoding="utf-8"))


def _synthesis_spec(arg: str, catalog: FactorCatalog, seed: int | None) -> SynthesisSpec:
    doc: dict = {}
    if arg != "default":
        doc = json.loads(Path(arg).read_text(encoding="utf-8"))
        if not isinstance(doc, dict):
            raise ValidationError("synthesis spec must be a JSON object")
    targets = {
        fid: DEFAULT_FACTOR_TARGETS[fid]
        for fid in catalog.factor_ids
        if fid in DEFAULT_FACTOR_TARGETS
    }
    for fid, entry in (doc.get("targets") or {}).items():
        targets[fid] = (float(entry["mean"]), float(entry["sd"]))
    spec_seed = doc.get("seed", seed)
    if spec_seed is None:
        raise ValidationError("synthesis requires a seed (--seed or spec file)")
    return SynthesisSpec(
        targets=targets,
        n_pos=int(doc.get("n_pos", 90)),
        n_neg=int(doc.get("n_neg", 36)),
        seed=int(spec_seed),
    )


def _resolve_source(config: RunConfig, catalog: FactorCatalog) -> SourceResult:
    policy = OutcomePolicy(threshold=config.threshold)
    if config.input_path is not None:
        text = Path(config.input_path).read_text(encoding="utf-8")
        records, parse_report = load_survey(text, catalog)
        retained, exclusions = clean(records, catalog)
        if not retained:
            raise ValidationError("no valid survey records after cleaning")
        dataset = build_dataset(retained, catalog, policy)
        return SourceResult(dataset, parse_report, exclusions)
    spec = _synthesis_spec(config.synthesize, catalog, config.seed)
    return SourceResult(synthesize_dataset(catalog, spec))


def _echo_source_summary(source: SourceResult) -> None:
    if source.parse_report is not None:
        report = source.parse_report
        click.echo(
            f"parsed {report.rows_read} rows, dropped {report.rows_read - report.rows_kept} malformed"
        )
    if source.exclusion_report is not None:
        exclusions = source.exclusion_report
        click.echo(
            f"excluded {exclusions.count(RULE_NO_CONSENT)} without consent, "
            f"{exclusions.count(RULE_STRAIGHT_LINING)} straight-lined"
        )
    counts = source.dataset.class_counts
    click.echo(
        f"{source.dataset.n} retained ({counts[1]} positive, {counts[0]} negative)"
    )


def _write_json(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


data_source_options = [
    click.option("--input", "input_path", type=click.Path(), help="Survey CSV file."),
    click.option(
        "--synthesize",
        metavar="SPEC",
        help="Synthesize data: 'default' or a JSON spec file.",
    ),
    click.option("--catalog", "catalog_path", type=click.Path(), help="Catalog config JSON."),
    click.option("--threshold", type=int, default=7, show_default=True,
                 help="Familiarity level counted as a positive outcome."),
]


def _add_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn

    return wrap


@click.group()
def main():
    """Probability/cost trade-off planning from Likert survey data."""


@main.command()
@_add_options(data_source_options)
@click.option("--seed", type=int, default=None, help="Seed (required for --synthesize).")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@_exit_on_errors
def describe(input_path, synthesize, catalog_path, threshold, seed, out_dir):
    """Clean the data and emit per-factor descriptive statistics."""
    config = RunConfig(input_path, synthesize, catalog_path, threshold, seed, out_dir)
    catalog = _read_catalog(config.catalog_path)
    source = _resolve_source(config, catalog)
    rows = descriptive_stats(source.dataset)
    path = emit_descriptives(rows, catalog, out_dir)
    _echo_source_summary(source)
    click.echo(f"wrote {path}")


def _train_into(
    out: Path,
    catalog: FactorCatalog,
    source: SourceResult,
    threshold: int,
    seed: int,
    nb_variant: str,
) -> None:
    train_set, test_set = stratified_split(source.dataset, SPLIT_RATIO, seed)
    params = TrainParams(seed=seed)
    scorer = train_scorer(train_set, params, nb_variant=nb_variant)
    metrics = evaluate(scorer, test_set)

    out.mkdir(parents=True, exist_ok=True)
    save_scorer(scorer, out / SCORER_FILE, params)
    _write_json(out / METRICS_FILE, {name: asdict(m) for name, m in metrics.items()})
    _write_json(
        out / WORKSPACE_FILE,
        {
            "format_version": 1,
            "catalog": json.loads(catalog_to_config(catalog)),
            "threshold": threshold,
            "seed": seed,
            "split_ratio": SPLIT_RATIO,
            "provenance": source.dataset.provenance,
            "baseline": baseline_allocation(source.dataset),
            "descriptives": [asdict(r) for r in descriptive_stats(source.dataset)],
            "class_counts": {
                "total": list(source.dataset.class_counts),
                "train": list(train_set.class_counts),
                "test": list(test_set.class_counts),
            },
        },
    )
    agg = metrics["agg"]
    click.echo(
        f"trained on {train_set.n} rows, tested on {test_set.n}: "
        f"accuracy nb={metrics['nb'].accuracy:.3f} lr={metrics['lr'].accuracy:.3f} "
        f"agg={agg.accuracy:.3f} (majority baseline {agg.majority_baseline:.3f})"
    )


@main.command()
@_add_options(data_source_options)
@click.option("--seed", type=int, required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--nb-variant", type=click.Choice(["gaussian", "categorical"]),
              default="gaussian", show_default=True)
@_exit_on_errors
def train(input_path, synthesize, catalog_path, threshold, seed, out_dir, nb_variant):
    """Split, fit both models, evaluate, and persist the scorer."""
    config = RunConfig(input_path, synthesize, catalog_path, threshold, seed, out_dir)
    catalog = _read_catalog(config.catalog_path)
    source = _resolve_source(config, catalog)
    out = Path(out_dir)
    _train_into(out, catalog, source, threshold, config.require_seed(), nb_variant)
    _echo_source_summary(source)
    click.echo(f"wrote {out / SCORER_FILE}")


def _load_workspace(out: Path):
    doc = json.loads((out / WORKSPACE_FILE).read_text(encoding="utf-8"))
    catalog = load_catalog(json.dumps(doc["catalog"]))
    baseline = {fid: int(level) for fid, level in doc["baseline"].items()}
    descriptives = [DescriptiveRow(**row) for row in doc["descriptives"]]
    return catalog, baseline, descriptives


@main.command()
@_add_options(data_source_options)
@click.option("--seed", type=int, required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--mode", type=click.Choice(["global", "categories", "both"]),
              default="both", show_default=True)
@click.option("--pop", type=int, default=100, show_default=True, help="GA population size.")
@click.option("--generations", type=int, default=40, show_default=True)
@_exit_on_errors
def optimize(input_path, synthesize, catalog_path, threshold, seed, out_dir, mode, pop, generations):
    """Run the GA at the requested scopes and emit the report bundle.

    Reuses a scorer trained into --out when one exists; otherwise trains
    inline from the given data source first.
    """
    out = Path(out_dir)
    if not (out / SCORER_FILE).exists() or not (out / WORKSPACE_FILE).exists():
        config = RunConfig(input_path, synthesize, catalog_path, threshold, seed, out_dir)
        catalog = _read_catalog(config.catalog_path)
        source = _resolve_source(config, catalog)
        _train_into(out, catalog, source, threshold, config.require_seed(), "gaussian")
    scorer = load_scorer(out / SCORER_FILE)
    catalog, baseline, _ = _load_workspace(out)
    params = GAParams(population=pop, generations=generations, seed=seed)

    if mode in ("global", "both"):
        result = optimize_global_from_baseline(scorer, catalog, baseline, params)
        emit_global_table(result, catalog, out)
        write_run_manifest("global", result, global_scope(catalog), out)
        click.echo(
            f"global: fitness {result.best_report.fitness:.3f} "
            f"(baseline {result.baseline_report.fitness:.3f}, "
            f"delta {result.delta_fitness:.3f}, cost {result.best_report.cost})"
        )
    if mode in ("categories", "both"):
        rows, results = optimize_categories_from_baseline(scorer, catalog, baseline, params)
        emit_theme_summary(rows, catalog, out)
        emit_theme_allocations(results, catalog, out)
        for category_id, result in results.items():
            write_run_manifest(
                category_id, result, category_scope(catalog, category_id, baseline), out
            )
        top = rows[0]
        click.echo(
            f"categories: {len(rows)} optimized, best delta {top.delta_fitness:.3f} ({top.category_id})"
        )
    click.echo(f"bundle written to {out}")


@main.command()
@click.option("--out", "out_dir", type=click.Path(), required=True,
              help="Workspace directory produced by train.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True,
              help="Port to bind; 0 picks a free one.")
@click.option("--max-jobs", type=int, default=1, show_default=True,
              help="Concurrent optimization jobs.")
@_exit_on_errors
def serve(out_dir, host, port, max_jobs):
    """Serve the evaluation and optimization API over HTTP."""
    out = Path(out_dir)
    scorer = load_scorer(out / SCORER_FILE)
    catalog, baseline, descriptives = _load_workspace(out)
    state = ServiceState(
        catalog=catalog,
        scorer=scorer,
        baseline=baseline,
        descriptives=tuple(descriptives),
        jobs=JobRegistry(max_active=max_jobs),
    )
    server = create_server(state, host=host, port=port)
    actual_port = server.server_address[1]
    click.echo(f"listening on http://{host}:{actual_port}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        state.jobs.shutdown()
        server.server_close()


if __name__ == "__main__":
    main()
