"""Command-line entry point.

    delaycast ingest|analyze|train|benchmark|sweep --config run.json [--set k=v ...]

All commands are driven by one JSON config and write their artifacts into
the configured output directory. Exit codes: 0 success, 2 config or
validation error, 3 data error, 4 training failure.
"""
import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import fcnn, forest, gbm, hybrid, ingest, metrics
from .config import CLASSIFIERS, TASKS, RunConfig
from .errors import (
    ConfigError,
    DivergenceError,
    DomainError,
    EmptyTableError,
    SchemaError,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_TRAINING = 4

CLASSIFIER_LABELS = {
    "hybrid": "FCNN + RDF",
    "rdf": "RDF",
    "xgb": "XGBoost",
    "fcnn": "FCNN",
}
TASK_LABELS = {"departure": "Departure", "arrival": "Arrival", "total": "Total"}


def _dump_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _network_config(cfg, input_width, seed):
    kwargs = dict(cfg["fcnn"])
    kwargs.setdefault("seed", seed)
    try:
        return fcnn.NetworkConfig(input_width=input_width, **kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad fcnn config: {exc}") from None


def _forest_params(cfg, seed):
    kwargs = dict(cfg["forest"])
    kwargs.setdefault("seed", seed)
    try:
        return forest.ForestParams(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad forest config: {exc}") from None


def _gbm_params(cfg, seed):
    kwargs = dict(cfg["gbm"])
    if "lambda" in kwargs:  # JSON-friendly alias
        kwargs["lam"] = kwargs.pop("lambda")
    kwargs.setdefault("seed", seed)
    try:
        return gbm.GbmParams(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad gbm config: {exc}") from None


# ---------------------------------------------------------------------------
# Matrix persistence


def _save_matrix_set(outdir, fmt, name, fm):
    files = []

    def save(stem, arr):
        if fmt == "npy":
            path = outdir / f"{stem}.npy"
            np.save(path, arr)
        else:
            path = outdir / f"{stem}.csv"
            np.savetxt(path, np.atleast_2d(arr), fmt="%.17g", delimiter=",")
        files.append(path.name)

    save(f"{name}_X", fm.values)
    for task in TASKS:
        save(f"{name}_y_{task}", fm.labels[task])
    return files


def _load_matrix_set(outdir, fmt, name, schema):
    def load(stem):
        if fmt == "npy":
            return np.load(outdir / f"{stem}.npy")
        return np.loadtxt(outdir / f"{stem}.csv", delimiter=",")

    values = np.atleast_2d(load(f"{name}_X"))
    labels = {t: load(f"{name}_y_{t}").ravel().astype(np.int64) for t in TASKS}
    return ingest.FeatureMatrix(values, schema, labels)


def _record_outputs(outdir, names):
    """Union new artifact names into the run manifest (idempotent)."""
    manifest = _load_manifest(outdir)
    manifest["outputs"] = sorted(set(manifest.get("outputs", [])) | set(names))
    _dump_json(manifest, outdir / "manifest.json")


def _load_manifest(outdir):
    path = outdir / "manifest.json"
    if not path.exists():
        raise EmptyTableError(f"no ingest artifacts in {outdir}; run `delaycast ingest` first")
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _load_split(cfg):
    outdir = Path(cfg["output_dir"])
    manifest = _load_manifest(outdir)
    fmt = manifest["matrix_format"]
    with open(outdir / "schema.json", "r", encoding="utf-8") as fh:
        schema = ingest.FeatureSchema.from_dict(json.load(fh))
    train_fm = _load_matrix_set(outdir, fmt, "train", schema)
    test_fm = _load_matrix_set(outdir, fmt, "test", schema)
    return train_fm, test_fm


# ---------------------------------------------------------------------------
# Commands


def cmd_ingest(cfg):
    if not cfg["input_csv"]:
        raise ConfigError("input_csv is not set")
    outdir = Path(cfg["output_dir"])
    outdir.mkdir(parents=True, exist_ok=True)

    table, skip = ingest.parse_records(cfg["input_csv"], cfg["column_map"])
    with open(outdir / "skip_report.txt", "w", encoding="utf-8") as fh:
        fh.write(skip.render())

    if cfg["sample_per_month"]:
        table = ingest.stratified_monthly_sample(
            table, cfg["sample_per_month"], cfg.seeds["sample"]
        )
    ingest.table_to_csv(table, outdir / "table.csv")

    train_table, test_table = ingest.split_table(
        table, cfg["train_fraction"], cfg.seeds["split"]
    )
    schema = ingest.fit_schema(train_table)
    threshold = cfg["delay_threshold_minutes"]
    rule = cfg["total_delay_rule"]
    train_fm = ingest.encode(train_table, schema, threshold, rule)
    test_fm = ingest.encode(test_table, schema, threshold, rule)

    _dump_json(schema.to_dict(), outdir / "schema.json")
    fmt = cfg["matrix_format"]
    files = ["skip_report.txt", "table.csv", "schema.json"]
    files += _save_matrix_set(outdir, fmt, "train", train_fm)
    files += _save_matrix_set(outdir, fmt, "test", test_fm)

    manifest = {
        "config_hash": cfg.hash(),
        "config": cfg.data,
        "seeds": cfg.seeds,
        "matrix_format": fmt,
        "rows": {"train": train_fm.rows, "test": test_fm.rows},
        "feature_width": schema.width,
        "outputs": sorted(files) + ["manifest.json"],
    }
    _dump_json(manifest, outdir / "manifest.json")
    print(
        f"ingest: {train_fm.rows} train / {test_fm.rows} test rows, "
        f"{schema.width} features ({skip.skipped} rows skipped)"
    )
    return EXIT_OK


def cmd_analyze(cfg):
    outdir = Path(cfg["output_dir"])
    table_path = outdir / "table.csv"
    if not table_path.exists():
        raise EmptyTableError(f"no ingested table at {table_path}; run `delaycast ingest` first")
    table = ingest.table_from_csv(table_path)
    threshold = cfg["delay_threshold_minutes"]
    rule = cfg["total_delay_rule"]
    for key in ingest.GROUP_KEYS:
        rows = ingest.delay_rate_by(table, key, threshold, cfg["task"], rule)
        path = outdir / f"analyze_{key}.csv"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{key},flights,delayed,rate\n")
            for value, total, hits, rate in rows:
                fh.write(f"{value},{total},{hits},{rate!r}\n")
    _record_outputs(outdir, [f"analyze_{key}.csv" for key in ingest.GROUP_KEYS])
    print(f"analyze: wrote {len(ingest.GROUP_KEYS)} reports to {outdir}")
    return EXIT_OK


def _fit_and_score(cfg, classifier, train_fm, test_fm, task, seed):
    """Train one classifier; returns (model, test probabilities)."""
    y = train_fm.labels[task]
    if classifier == "fcnn":
        net_cfg = _network_config(cfg, train_fm.values.shape[1], seed)
        model, _ = fcnn.fit(train_fm.values, y, net_cfg)
        probs = model.forward(test_fm.values, mode="eval")
    elif classifier == "rdf":
        model = forest.fit_forest(train_fm.values, y, _forest_params(cfg, seed))
        _, probs = forest.predict_forest(model, test_fm.values)
    elif classifier == "xgb":
        model = gbm.fit_gbm(train_fm.values, y, _gbm_params(cfg, seed))
        probs = gbm.predict_gbm(model, test_fm.values)
    elif classifier == "hybrid":
        net_cfg = _network_config(cfg, train_fm.values.shape[1], seed)
        head_kind = cfg["hybrid_head"]
        head_params = (
            _forest_params(cfg, seed) if head_kind == "rdf" else _gbm_params(cfg, seed)
        )
        model = hybrid.fit_hybrid(train_fm.values, y, net_cfg, head_kind, head_params)
        _, probs = hybrid.predict_hybrid(model, test_fm.values)
    else:
        raise ConfigError(f"unknown classifier {classifier!r}")
    return model, probs


def _evaluate(probs, labels):
    report = metrics.classification_report((probs >= 0.5).astype(int), labels)
    curve1, curve0 = metrics.per_class_roc(probs, labels)
    return report, curve1, curve0


def cmd_train(cfg):
    train_fm, test_fm = _load_split(cfg)
    task, classifier = cfg["task"], cfg["classifier"]
    outdir = Path(cfg["output_dir"])

    model, probs = _fit_and_score(cfg, classifier, train_fm, test_fm, task, cfg.seeds["model"])
    report, curve1, curve0 = _evaluate(probs, test_fm.labels[task])

    payload = {
        "task": task,
        "classifier": classifier,
        "seed": cfg.seeds["model"],
        "report": report.to_dict(),
        "auc_class1": curve1.auc,
        "auc_class0": curve0.auc,
    }
    _dump_json(payload, outdir / "metrics.json")
    metrics.roc_to_csv(curve1, outdir / "roc_class1.csv")
    metrics.roc_to_csv(curve0, outdir / "roc_class0.csv")
    bundle = outdir / f"model_{classifier}_{task}.json"
    _dump_json(model.to_dict(), bundle)
    _record_outputs(
        outdir, ["metrics.json", "roc_class0.csv", "roc_class1.csv", bundle.name]
    )
    print(
        f"train: {classifier}/{task} accuracy {report.accuracy:.2f}% "
        f"AUC {curve1.auc:.4f} -> {outdir / 'metrics.json'}"
    )
    return EXIT_OK


def cmd_benchmark(cfg):
    train_fm, test_fm = _load_split(cfg)
    outdir = Path(cfg["output_dir"])
    grid = {}
    meta = {}
    failed = []
    for task in TASKS:
        grid[task] = {}
        for classifier in CLASSIFIERS:
            label = CLASSIFIER_LABELS[classifier]
            start = time.perf_counter()
            try:
                _, probs = _fit_and_score(
                    cfg, classifier, train_fm, test_fm, task, cfg.seeds["model"]
                )
                report, _, _ = _evaluate(probs, test_fm.labels[task])
                grid[task][label] = {
                    "accuracy": report.accuracy,
                    "precision": report.precision,
                    "recall": report.recall,
                    "f1": report.f1,
                }
            except Exception as exc:  # cell failure must not kill the grid
                grid[task][label] = {"failed": str(exc)}
                failed.append(f"{task}/{classifier}")
            meta[f"{task}/{classifier}"] = {
                "seed": cfg.seeds["model"],
                "wall_time_s": round(time.perf_counter() - start, 3),
            }
    _dump_json({"grid": grid, "failed": failed}, outdir / "benchmark.json")
    _dump_json(meta, outdir / "benchmark_meta.json")
    text = _render_benchmark(grid)
    with open(outdir / "benchmark.txt", "w", encoding="utf-8") as fh:
        fh.write(text)
    _record_outputs(outdir, ["benchmark.json", "benchmark_meta.json", "benchmark.txt"])
    print(text)
    if failed:
        print(f"benchmark: {len(failed)} cell(s) failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_TRAINING
    return EXIT_OK


def _render_benchmark(grid):
    order = [CLASSIFIER_LABELS[c] for c in ("hybrid", "rdf", "xgb", "fcnn")]
    lines = ["Classifiers  Metric     " + "  ".join(f"{c:>10}" for c in order)]
    for task in TASKS:
        for metric in ("accuracy", "precision", "recall", "f1"):
            cells = []
            for label in order:
                cell = grid[task][label]
                cells.append(f"{cell[metric]:10.2f}" if metric in cell else f"{'FAILED':>10}")
            head = TASK_LABELS[task] if metric == "accuracy" else ""
            lines.append(f"{head:<12} {metric:<10} " + "  ".join(cells))
    return "\n".join(lines) + "\n"


def cmd_sweep(cfg):
    axis = cfg["sweep"]["axis"]
    values = cfg["sweep"]["values"]
    if not values:
        raise ConfigError("sweep.values is empty")
    train_fm, test_fm = _load_split(cfg)
    task = cfg["task"]
    outdir = Path(cfg["output_dir"])

    rows = []
    for value in values:
        try:
            sweep_cfg = dict(cfg["fcnn"])
            sweep_cfg[axis] = int(value)
            net_cfg = _network_config(
                {"fcnn": sweep_cfg}, train_fm.values.shape[1], cfg.seeds["model"]
            )
            model, _ = fcnn.fit(train_fm.values, train_fm.labels[task], net_cfg)
            probs = model.forward(test_fm.values, mode="eval")
            report = metrics.classification_report(
                (probs >= 0.5).astype(int), test_fm.labels[task]
            )
            rows.append((value, f"{report.accuracy!r}"))
        except Exception as exc:
            rows.append((value, f"failed: {exc}"))
    path = outdir / f"sweep_{axis}.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{axis},test_accuracy\n")
        for value, acc in rows:
            fh.write(f"{value},{acc}\n")
    _record_outputs(outdir, [path.name])
    print(f"sweep: wrote {len(rows)} points to {path}")
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "analyze": cmd_analyze,
    "train": cmd_train,
    "benchmark": cmd_benchmark,
    "sweep": cmd_sweep,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="delaycast",
        description="Flight-delay classification toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the JSON run config")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config key (dotted paths, JSON values)",
        )
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config, args.overrides)
        return COMMANDS[args.command](cfg)
    except (ConfigError, DomainError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EmptyTableError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRAINING


if __name__ == "__main__":
    sys.exit(main())
