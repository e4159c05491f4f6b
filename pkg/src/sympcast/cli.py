"""Command-line entry point: ``sympcast <command> [options]``.

Every option can also be given in a JSON file passed with ``--config``; keys
are the long option names with dashes replaced by underscores.  A flag on the
command line beats the config file, which beats the built-in default.

Exit status is 0 on success, 2 on usage or validation errors and 1 on
computation errors.  Reports go to ``--out``; their paths are printed on
stdout, one per line, and diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ComputationError, SympcastError, ValidationError
from .evalharness import (
    ablate_all_but_one,
    ablate_cumulative,
    forecast_backtest,
    repeated_eval,
    top_n_sweep,
)
from .io import SCHEMA_VERSION, write_json, write_rows
from .panel import (
    PanelSchema,
    SyntheticSpec,
    generate_synthetic,
    ingest_csv,
    prune_features,
    schema_for,
    write_audit,
    write_csv,
)
from .rankcorr import correlation_matrix, f_regression
from .regress import MODEL_KINDS, ModelSpec
from .shapecluster import LINKAGES, agglomerate, dtw, region_profiles, sample_cross_cluster
from .tseries import LstmConfig, adf_test

PLOT_HEADER = ("n_or_step", "mean_mre", "ci_low", "ci_high")

# built-in defaults, shared by every command that uses the option
DEFAULTS = {
    "seed": 0,
    "out": ".",
    "runs": 20,
    "data": None,
    "schema": None,
    "synthetic": None,
    "target": None,
    "no_prune": False,
    "plot_data": False,
    # synth
    "regions": 8,
    "days": 150,
    "signals": 10,
    "weights": "5,1,0.1",
    "noise": 0.01,
    # correlate
    "columns": None,
    "threshold": 0.5,
    # predict / ablate
    "model": "gbt",
    "sweep": False,
    "top_n": None,
    "max_n": None,
    "train_fraction": 0.8,
    "tree_max_depth": 3,
    "tree_min_leaf": 5,
    "gbt_stages": 100,
    "gbt_learning_rate": 0.1,
    "ci": "t",
    "mode": "all-but-one",
    "top": 10,
    "order": "least_first",
    # forecast / adf
    "forecast_model": "var",
    "region": None,
    "horizon": 30,
    "features": 3,
    "p_max": 7,
    "lstm_hidden": 32,
    "lstm_window": 14,
    "lstm_epochs": 500,
    "lstm_step_size": 1e-2,
    "column": None,
    "max_lag": None,
    # cluster
    "k": 3,
    "linkage": "average",
    "profile": "mean",
    "sample": None,
    # dtw
    "column_a": None,
    "column_b": None,
}


def _csv_list(text):
    return [t.strip() for t in str(text).split(",") if t.strip()]


# -- argument parsing --------------------------------------------------------


def _common(p: argparse.ArgumentParser):
    s = argparse.SUPPRESS
    p.add_argument("--config", default=s, help="JSON file of option values (flags override it)")
    p.add_argument("--seed", type=int, default=s, help="base random seed (default 0)")
    p.add_argument("--out", default=s, help="output directory (default: current directory)")
    p.add_argument("--runs", type=int, default=s, help="repeated random-split runs (default 20)")


def _data_opts(p):
    s = argparse.SUPPRESS
    p.add_argument("--data", default=s, help="panel CSV; without it a synthetic spec must come from --config")
    p.add_argument("--schema", default=s, help="schema JSON (default: schema.json beside --data)")
    p.add_argument("--target", default=s, help="override the schema's target column")


def _prune_opts(p):
    p.add_argument("--no-prune", action="store_true", default=argparse.SUPPRESS, help="skip feature pruning")


def _model_opts(p):
    s = argparse.SUPPRESS
    p.add_argument("--model", choices=MODEL_KINDS, default=s, help="regressor (default gbt)")
    p.add_argument("--train-fraction", type=float, default=s, help="random split train share (default 0.8)")
    p.add_argument("--tree-max-depth", type=int, default=s)
    p.add_argument("--tree-min-leaf", type=int, default=s)
    p.add_argument("--gbt-stages", type=int, default=s)
    p.add_argument("--gbt-learning-rate", type=float, default=s)
    p.add_argument("--ci", choices=("t", "normal"), default=s, help="confidence interval method (default t)")
    p.add_argument("--plot-data", action="store_true", default=s, help="also write figure CSV and PNG")


def build_parser() -> argparse.ArgumentParser:
    s = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="sympcast", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _common(parser)
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        _common(p)
        return p

    p = add("synth", "write a planted synthetic panel and its schema")
    p.add_argument("--regions", type=int, default=s, help="number of regions (default 8)")
    p.add_argument("--days", type=int, default=s, help="days per region (default 150)")
    p.add_argument("--signals", type=int, default=s, help="number of signals (default 10)")
    p.add_argument("--weights", default=s, help="comma-separated planted weights (default 5,1,0.1)")
    p.add_argument("--noise", type=float, default=s, help="target noise sigma (default 0.01)")

    p = add("ingest", "parse a panel CSV, write a cleaned copy and an audit log")
    _data_opts(p)

    p = add("prune", "drop redundant and leaking columns")
    _data_opts(p)

    p = add("rank", "rank features by univariate F statistic")
    _data_opts(p)
    _prune_opts(p)

    p = add("correlate", "pairwise Pearson correlations with flagged pairs")
    _data_opts(p)
    p.add_argument("--columns", type=_csv_list, default=s, help="comma-separated columns (default: features + target)")
    p.add_argument("--threshold", type=float, default=s, help="flag pairs with |r| above this (default 0.5)")

    p = add("predict", "evaluate a regressor on the top-ranked features")
    _data_opts(p)
    _prune_opts(p)
    _model_opts(p)
    p.add_argument("--sweep", action="store_true", default=s, help="evaluate every n from 1 to --max-n")
    p.add_argument("--top-n", type=int, default=s, help="evaluate only the top n features")
    p.add_argument("--max-n", type=int, default=s, help="largest n in the sweep (default: all features)")

    p = add("forecast", "chronological backtest of VAR or LSTM forecasts per region")
    _data_opts(p)
    _prune_opts(p)
    p.add_argument(
        "--model", dest="forecast_model", choices=("var", "lstm"), default=s, help="forecaster (default var)"
    )
    p.add_argument("--region", action="append", default=s, help="region to backtest (repeatable; default all)")
    p.add_argument("--horizon", type=int, default=s, help="held-out days (default 30)")
    p.add_argument("--features", type=int, default=s, help="top-ranked signals modelled with the target (default 3)")
    p.add_argument("--p-max", type=int, default=s, help="largest VAR lag considered (default 7)")
    p.add_argument("--lstm-hidden", type=int, default=s)
    p.add_argument("--lstm-window", type=int, default=s)
    p.add_argument("--lstm-epochs", type=int, default=s)
    p.add_argument("--lstm-step-size", type=float, default=s)
    p.add_argument("--plot-data", action="store_true", default=s, help="also write figure CSV and PNG")

    p = add("ablate", "all-but-one or cumulative feature ablation")
    _data_opts(p)
    _prune_opts(p)
    _model_opts(p)
    p.add_argument("--mode", choices=("all-but-one", "cumulative"), default=s)
    p.add_argument("--top", type=int, default=s, help="number of top features N (default 10)")
    p.add_argument("--order", choices=("least_first", "most_first"), default=s, help="cumulative drop order")

    p = add("adf", "augmented Dickey-Fuller test per region")
    _data_opts(p)
    p.add_argument("--column", default=s, help="column to test (default: target)")
    p.add_argument("--region", action="append", default=s, help="region (repeatable; default all)")
    p.add_argument("--max-lag", type=int, default=s, help="largest augmentation lag (default: Schwert rule)")

    p = add("cluster", "agglomerative clustering of region profiles")
    _data_opts(p)
    _prune_opts(p)
    p.add_argument("--k", type=int, default=s, help="number of clusters (default 3)")
    p.add_argument("--linkage", choices=LINKAGES, default=s)
    p.add_argument("--profile", choices=("mean", "flatten"), default=s, help="region profile (default mean)")
    p.add_argument("--columns", type=_csv_list, default=s, help="profile columns (default: all features)")
    p.add_argument("--sample", type=int, default=s, help="also pick one region from this many clusters")

    p = add("dtw", "DTW distance between two series stored in CSV files")
    p.add_argument("file_a", help="CSV with the first series (e.g. a forecast)")
    p.add_argument("file_b", help="CSV with the second series (e.g. actuals)")
    p.add_argument("--column-a", default=s, help="column of file_a (default: last column)")
    p.add_argument("--column-b", default=s, help="column of file_b (default: last column)")
    return parser


# -- configuration -----------------------------------------------------------


@dataclass
class RunConfig:
    """Resolved options for one command."""

    command: str
    out: Path
    seed: int
    runs: int
    options: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.options[key]


def _load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as e:
        raise ValidationError(f"cannot read config {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise ValidationError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(cfg, dict):
        raise ValidationError("config file must hold a JSON object")
    unknown = set(cfg) - set(DEFAULTS)
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    return cfg


def resolve(args: argparse.Namespace) -> RunConfig:
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    cfg = _load_config(args.config) if getattr(args, "config", None) else {}
    merged = {**DEFAULTS, **cfg, **flags}
    for key in ("seed", "runs"):
        if not isinstance(merged[key], int) or isinstance(merged[key], bool):
            raise ValidationError(f"{key} must be an integer")
    if merged["seed"] < 0:
        raise ValidationError("seed must be nonnegative")
    if merged["runs"] < 1:
        raise ValidationError("runs must be >= 1")
    return RunConfig(args.command, Path(merged["out"]), merged["seed"], merged["runs"], merged)


def _report(kind: str, payload: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "report": kind, **payload}


# -- data loading ------------------------------------------------------------


def load_dataset(cfg: RunConfig):
    """The panel named by ``--data`` or generated from the config's synthetic spec."""
    data, synthetic = cfg["data"], cfg["synthetic"]
    if (data is None) == (synthetic is None):
        raise ValidationError("give exactly one of --data or a 'synthetic' spec in --config")
    if data is not None:
        schema_path = cfg["schema"] or os.path.join(os.path.dirname(os.fspath(data)), "schema.json")
        if not os.path.exists(schema_path):
            if cfg["target"] is None:
                raise ValidationError(f"no schema at {schema_path}; pass --schema or --target")
            schema = PanelSchema(target=cfg["target"])
        else:
            schema = PanelSchema.load(schema_path)
            if cfg["target"] is not None:
                schema = PanelSchema.from_dict({**schema.to_dict(), "target": cfg["target"]})
        if not os.path.exists(data):
            raise ValidationError(f"data file not found: {data}")
        return ingest_csv(data, schema), schema
    if not isinstance(synthetic, dict):
        raise ValidationError("'synthetic' must be an object of generator parameters")
    spec = SyntheticSpec.from_dict({"seed": cfg.seed, **synthetic})
    ds = generate_synthetic(spec)
    return ds, schema_for(ds)


def _features(cfg: RunConfig, ds, schema):
    if not cfg["no_prune"]:
        ds, _ = prune_features(ds, schema.prune_config())
    feats = ds.feature_names
    if not feats:
        raise ValidationError("no features left to rank after pruning")
    return ds, feats


def _ranked(cfg: RunConfig):
    ds, schema = load_dataset(cfg)
    ds, feats = _features(cfg, ds, schema)
    return ds, f_regression(ds, feats)


def _model_spec(cfg: RunConfig) -> ModelSpec:
    return ModelSpec(
        kind=cfg["model"],
        tree_max_depth=cfg["tree_max_depth"],
        tree_min_leaf=cfg["tree_min_leaf"],
        gbt_stages=cfg["gbt_stages"],
        gbt_learning_rate=cfg["gbt_learning_rate"],
        seed=cfg.seed,
    )


def _emit_plot(cfg: RunConfig, stem: str, header, rows, xlabel: str, title: str, forecast=False):
    from .plotting import plot_forecast, plot_trajectory  # matplotlib only when asked

    csv_path = write_rows(cfg.out / f"{stem}.csv", header, rows)
    png = cfg.out / f"{stem}.png"
    if forecast:
        plot_forecast(rows, png, title)
    else:
        plot_trajectory(rows, png, xlabel, title)
    return [csv_path, png]


# -- commands ----------------------------------------------------------------


def cmd_synth(cfg: RunConfig):
    try:
        weights = tuple(float(w) for w in _csv_list(cfg["weights"]))
    except ValueError as e:
        raise ValidationError(f"bad --weights: {e}") from e
    base = cfg["synthetic"] or {}
    spec = SyntheticSpec.from_dict(
        {
            **base,
            "n_regions": cfg["regions"],
            "n_days": cfg["days"],
            "n_signals": cfg["signals"],
            "planted_weights": weights,
            "noise_sigma": cfg["noise"],
            "seed": cfg.seed,
        }
    )
    ds = generate_synthetic(spec)
    panel = cfg.out / "panel.csv"
    write_csv(ds, panel)
    schema = write_json(schema_for(ds).to_dict(), cfg.out / "schema.json")
    echo = write_json(_report("synth", {"spec": spec.to_dict(), "rows": ds.n_rows}), cfg.out / "synthetic_spec.json")
    return [panel, schema, echo]


def cmd_ingest(cfg: RunConfig):
    ds, schema = load_dataset(cfg)
    clean = cfg.out / "panel_clean.csv"
    write_csv(ds, clean)
    audit = cfg.out / "audit.jsonl"
    write_audit(ds.audit, audit)
    summary = {
        "rows": ds.n_rows,
        "regions": ds.regions,
        "target": ds.target,
        "columns": [{"name": m.name, "kind": m.kind, "units": m.units} for m in ds.columns],
        "flagged_rows": int(np.count_nonzero(ds.flags)),
        "audit_entries": len(ds.audit),
    }
    return [clean, audit, write_json(_report("ingest", summary), cfg.out / "ingest.json")]


def cmd_prune(cfg: RunConfig):
    ds, schema = load_dataset(cfg)
    pruned, dropped = prune_features(ds, schema.prune_config())
    out_csv = cfg.out / "panel_pruned.csv"
    write_csv(pruned, out_csv)
    payload = {
        "dropped": [{"column": c, "reason": r} for c, r in dropped],
        "retained": pruned.feature_names,
        "target": pruned.target,
    }
    return [out_csv, write_json(_report("prune", payload), cfg.out / "prune.json")]


def cmd_rank(cfg: RunConfig):
    _, ranking = _ranked(cfg)
    rows = [(e.rank, e.name, e.f_stat) for e in ranking.entries]
    csv_path = write_rows(cfg.out / "ranking.csv", ("rank", "signal", "f_statistic"), rows)
    return [csv_path, write_json(_report("ranking", ranking.to_dict()), cfg.out / "ranking.json")]


def cmd_correlate(cfg: RunConfig):
    ds, _ = load_dataset(cfg)
    cols = cfg["columns"] or ds.feature_names + [ds.target]
    rep = correlation_matrix(ds, cols, cfg["threshold"])
    flagged = write_rows(
        cfg.out / "correlation_flagged.csv", ("a", "b", "r", "p_value"), [tuple(p) for p in rep.flagged]
    )
    return [write_json(_report("correlation", rep.to_dict()), cfg.out / "correlation.json"), flagged]


def cmd_predict(cfg: RunConfig):
    ds, ranking = _ranked(cfg)
    spec = _model_spec(cfg)
    kw = {"train_fraction": cfg["train_fraction"], "ci_method": cfg["ci"]}
    top_n = cfg["top_n"]
    if top_n is not None and not cfg["sweep"]:
        ev = repeated_eval(ds, ranking, top_n, spec, cfg.runs, cfg.seed, **kw)
        payload = {"mode": "single", "model": spec.kind, "n": top_n, "evaluation": ev.to_dict()}
        return [write_json(_report("predict", payload), cfg.out / "predict.json")]
    max_n = cfg["max_n"] or len(ranking)
    if not 1 <= max_n <= len(ranking):
        raise ValidationError(f"--max-n must lie in 1..{len(ranking)}")
    rep = top_n_sweep(ds, ranking, spec, range(1, max_n + 1), cfg.runs, cfg.seed, **kw)
    payload = {"mode": "sweep", **rep.to_dict()}
    paths = [write_json(_report("predict", payload), cfg.out / "predict.json")]
    paths.append(write_rows(cfg.out / "sweep.csv", PLOT_HEADER, rep.trajectory()))
    if cfg["plot_data"]:
        paths += _emit_plot(
            cfg, "fig_error_vs_top_features", PLOT_HEADER, rep.trajectory(),
            "number of top features", f"{spec.kind}: error vs number of top features",
        )
    return paths


def cmd_forecast(cfg: RunConfig):
    model = cfg["forecast_model"]
    ds, ranking = _ranked(cfg)
    n_feat = cfg["features"]
    if not 0 <= n_feat <= len(ranking):
        raise ValidationError(f"--features must lie in 0..{len(ranking)}")
    feats = ranking.top(n_feat)
    regions = cfg["region"] or ds.regions
    for r in regions:
        if r not in ds.regions:
            raise ValidationError(f"unknown region {r!r}")
    lstm_cfg = LstmConfig(
        hidden=cfg["lstm_hidden"],
        window=cfg["lstm_window"],
        epochs=cfg["lstm_epochs"],
        step_size=cfg["lstm_step_size"],
        seed=cfg.seed,
    )
    paths, summary = [], []
    for r in regions:
        res = forecast_backtest(ds, r, feats, model, cfg["horizon"], cfg["p_max"], lstm_cfg)
        stem = f"forecast_{model}_{r}"
        paths.append(write_json(_report("forecast", res.to_dict()), cfg.out / f"{stem}.json"))
        rows = list(res.plot_rows())
        paths.append(write_rows(cfg.out / f"{stem}.csv", ("date", "actual", "forecast"), rows))
        if cfg["plot_data"]:
            paths += _emit_plot(
                cfg, f"fig_{stem}", ("date", "actual", "forecast"), rows, "", f"{model} forecast, {r}", True
            )
        summary.append({"region": r, "mae": res.mae, "mre": res.mre, "dtw_distance": res.dtw_distance})
    defined = [s["mre"] for s in summary if s["mre"] is not None]
    payload = {
        "model": model,
        "horizon": cfg["horizon"],
        "features": feats,
        "regions": summary,
        "mean_mre": float(np.mean(defined)) if defined else None,
        "mean_mae": float(np.mean([s["mae"] for s in summary if s["mae"] is not None])) if defined else None,
    }
    paths.insert(0, write_json(_report("forecast_summary", payload), cfg.out / f"forecast_{model}.json"))
    return paths


def cmd_ablate(cfg: RunConfig):
    ds, ranking = _ranked(cfg)
    spec = _model_spec(cfg)
    top = cfg["top"]
    if not 2 <= top <= len(ranking):
        raise ValidationError(f"--top must lie in 2..{len(ranking)}")
    feats = ranking.top(top)
    kw = {"train_fraction": cfg["train_fraction"], "ci_method": cfg["ci"]}
    if cfg["mode"] == "all-but-one":
        rep = ablate_all_but_one(ds, feats, spec, cfg.runs, cfg.seed, **kw)
        stem, fig, title = "ablation_all_but_one", "fig_all_but_one_mre", "All-but-one ablation (MRE)"
    elif cfg["mode"] == "cumulative":
        rep = ablate_cumulative(ds, feats, spec, cfg.runs, cfg.seed, order=cfg["order"], **kw)
        stem, fig, title = "ablation_cumulative", "fig_cumulative_drop_mre", "Cumulative feature dropping (MRE)"
    else:
        raise ValidationError(f"unknown ablation mode {cfg['mode']!r}")
    paths = [write_json(_report("ablation", {"model": spec.kind, **rep.to_dict()}), cfg.out / f"{stem}.json")]
    paths.append(write_rows(cfg.out / f"{stem}.csv", PLOT_HEADER, rep.trajectory()))
    if cfg["plot_data"]:
        paths += _emit_plot(cfg, fig, PLOT_HEADER, rep.trajectory(), "step (features dropped)", title)
    return paths


def cmd_adf(cfg: RunConfig):
    ds, _ = load_dataset(cfg)
    column = cfg["column"] or ds.target
    ds.index(column)
    regions = cfg["region"] or ds.regions
    results = {}
    for r in regions:
        _, block = ds.region_series(r, [column])
        series = block[:, 0]
        results[r] = adf_test(series[~np.isnan(series)], cfg["max_lag"]).to_dict()
    payload = {"column": column, "regions": results}
    return [write_json(_report("adf", payload), cfg.out / "adf.json")]


def cmd_cluster(cfg: RunConfig):
    ds, schema = load_dataset(cfg)
    if cfg["columns"]:
        cols = cfg["columns"]
    else:
        _, cols = _features(cfg, ds, schema)
    assign = agglomerate(region_profiles(ds, cols, cfg["profile"]), cfg["k"], cfg["linkage"])
    payload = {"columns": list(cols), "profile": cfg["profile"], **assign.to_dict()}
    if cfg["sample"] is not None:
        payload["sample"] = sample_cross_cluster(assign, cfg["sample"], cfg.seed)
    return [write_json(_report("cluster", payload), cfg.out / "cluster.json")]


def _read_series(path, column):
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as e:
        raise ValidationError(f"cannot read {path}: {e.strerror}") from e
    if not rows:
        raise ValidationError(f"{path} is empty")

    def num(v):
        try:
            return float(v)
        except ValueError:
            return None

    header = None if all(num(v) is not None for v in rows[0]) else rows[0]
    body = rows[1:] if header else rows
    if column is None:
        idx = len(rows[0]) - 1
    elif header and column in header:
        idx = header.index(column)
    else:
        raise ValidationError(f"column {column!r} not found in {path}")
    vals = [num(r[idx]) if idx < len(r) else None for r in body]
    if any(v is None for v in vals):
        raise ValidationError(f"{path}: non-numeric value in column {idx}")
    return np.array(vals, dtype=float)


def cmd_dtw(cfg: RunConfig):
    a = _read_series(cfg["file_a"], cfg["column_a"])
    b = _read_series(cfg["file_b"], cfg["column_b"])
    res = dtw(a, b)
    payload = {"file_a": str(cfg["file_a"]), "file_b": str(cfg["file_b"]), **res.to_dict()}
    return [write_json(_report("dtw", payload), cfg.out / "dtw.json")]


COMMANDS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "prune": cmd_prune,
    "rank": cmd_rank,
    "correlate": cmd_correlate,
    "predict": cmd_predict,
    "forecast": cmd_forecast,
    "ablate": cmd_ablate,
    "adf": cmd_adf,
    "cluster": cmd_cluster,
    "dtw": cmd_dtw,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        paths = COMMANDS[args.command](cfg)
    except ValidationError as e:
        print(f"sympcast {args.command}: error: {e}", file=sys.stderr)
        return 2
    except (ComputationError, SympcastError, np.linalg.LinAlgError, FloatingPointError) as e:
        print(f"sympcast {args.command}: computation failed: {e}", file=sys.stderr)
        return 1
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
