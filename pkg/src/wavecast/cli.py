"""Batch command-line front end.

Subcommands: decompose, run, evaluate, mcb, version. Exit codes: 0 success,
1 computation failure, 2 usage/input error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, evalkit, forecaster, modwt
from .series import SplitSpec, TimeSeries, load_csv, split
from .transformer import TransformerConfig


def _fmt(x: float) -> str:
    return repr(float(x))


def _read_config_file(path: str) -> dict:
    """Flat key=value file; '#' starts a comment."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config_file(args: argparse.Namespace, parser: argparse.ArgumentParser):
    """File values fill in any flag the command line left at its default."""
    if not getattr(args, "config", None):
        return
    file_values = _read_config_file(args.config)
    defaults = {a.dest: a.default for a in parser._actions}
    for key, raw in file_values.items():
        if key not in defaults:
            raise ValueError(f"unknown config key: {key}")
        if getattr(args, key) != defaults[key]:
            continue  # explicit flag wins
        current_default = defaults[key]
        if isinstance(current_default, bool):
            value = raw.lower() in ("1", "true", "yes")
        elif isinstance(current_default, int) and not isinstance(current_default, bool):
            value = int(raw)
        elif isinstance(current_default, float):
            value = float(raw)
        elif key == "model":
            value = raw.split(",")
        else:
            value = raw
        setattr(args, key, value)


def _default_seed() -> int:
    return int(os.environ.get("WAVECAST_SEED", "42"))


def _load_series(args) -> TimeSeries:
    column: int | str = args.column
    if isinstance(column, str) and column.lstrip("-").isdigit():
        column = int(column)
    has_header = True if args.header else None
    return load_csv(args.data, column=column, has_header=has_header)


def _write_rows(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _transformer_config(args) -> TransformerConfig:
    return TransformerConfig(epochs=args.epochs)


# subcommands ---------------------------------------------------------------


def cmd_decompose(args) -> int:
    series = _load_series(args)
    if args.test_len:
        series, _ = split(series, SplitSpec(args.test_len))
    decomposition = modwt.decompose(series.values, levels=args.levels)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    tags = [f"D{j}" for j in range(1, decomposition.levels + 1)] + [f"S{decomposition.levels}"]
    bands = decomposition.bands()
    for tag, band in zip(tags, bands):
        _write_rows(out / f"band_{tag}.csv", ["t", tag],
                    ([t, _fmt(v)] for t, v in enumerate(band)))
    _write_rows(
        out / "decomposition.csv",
        ["t", *tags],
        ([t, *(_fmt(band[t]) for band in bands)] for t in range(decomposition.n)),
    )
    _plot_decomposition(series.values, tags, bands, out / "decomposition.png")
    print(f"wrote {len(tags)} bands to {out}")
    return 0


def _plot_decomposition(original, tags, bands, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(len(bands) + 1, 1, figsize=(8, 1.6 * (len(bands) + 1)), sharex=True)
    axes[0].plot(original, lw=0.8)
    axes[0].set_ylabel("Y")
    for ax, tag, band in zip(axes[1:], tags, bands):
        ax.plot(band, lw=0.8)
        ax.set_ylabel(tag)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def cmd_run(args) -> int:
    started = time.time()
    series = _load_series(args)
    train, test = split(series, SplitSpec(args.test_len))
    horizon = args.test_len
    config = _transformer_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dataset = args.dataset or Path(args.data).stem
    horizon_tag = args.horizon_tag or f"h{horizon}"

    full = series if args.paper_mode else None
    results = []
    trace_files = []
    for model_name in args.model:
        if model_name == "wtransformer":
            ensemble = forecaster.fit(
                train, config, levels=args.levels, base_seed=args.seed,
                full_series=full, jobs=args.jobs,
            )
            result = forecaster.forecast(ensemble, horizon)
            for tag, trace in zip(ensemble.band_tags(), ensemble.loss_traces):
                trace_path = out / f"losses_wtransformer_{tag}.csv"
                _write_rows(trace_path, ["epoch", "mean_loss"],
                            ([e + 1, _fmt(v)] for e, v in enumerate(trace)))
                trace_files.append(trace_path.name)
        elif model_name == "transformer":
            result = forecaster.fit_forecast_baseline_transformer(
                train, config, horizon, seed=args.seed
            )
        elif model_name == "naive":
            result = forecaster.naive_forecast(train, horizon)
        else:
            raise ValueError(f"unknown model: {model_name}")
        results.append(result)

    table = evalkit.MetricTable()
    for result in results:
        pred_path = out / f"predictions_{result.model_tag}.csv"
        _write_rows(
            pred_path,
            ["index", "actual", "predicted"],
            (
                [test.start_index + i, _fmt(a), _fmt(p)]
                for i, (a, p) in enumerate(zip(test.values, result.predictions))
            ),
        )
        table.add(dataset, horizon_tag, result.model_tag,
                  evalkit.all_metrics(test.values, result.predictions, train.values))

    _write_rows(
        out / "metrics.csv",
        ["data", "horizon", "model", *evalkit.METRIC_NAMES],
        (
            [d, h, m, *(_fmt(metrics[name]) for name in evalkit.METRIC_NAMES)]
            for (d, h, m), metrics in sorted(table.rows.items())
        ),
    )
    _plot_forecasts(train, test, results, out / "forecast.png")

    manifest = {
        "data": args.data, "column": args.column, "header": args.header,
        "dataset": dataset, "horizon_tag": horizon_tag,
        "test_len": horizon, "levels": args.levels if args.levels is not None else "default",
        "models": ",".join(args.model), "seed": args.seed, "jobs": args.jobs,
        "paper_mode": args.paper_mode, "loss_traces": ",".join(trace_files),
        "wall_clock_s": round(time.time() - started, 3),
    }
    manifest.update({f"config.{k}": v for k, v in vars(config).items()})
    (out / "manifest.txt").write_text(
        "".join(f"{k}={v}\n" for k, v in manifest.items()), encoding="utf-8"
    )
    print(f"wrote predictions and metrics for {len(results)} model(s) to {out}")
    return 0


def _plot_forecasts(train, test, results, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(9, 4))
    tail = min(train.n, 4 * test.n)
    ax.plot(
        range(train.n - tail, train.n), train.values[-tail:], color="gray", lw=0.8, label="train"
    )
    test_x = range(train.n, train.n + test.n)
    ax.plot(test_x, test.values, color="black", lw=1.2, label="actual")
    for result in results:
        ax.plot(test_x, result.predictions, lw=1.0, label=result.model_tag)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def cmd_evaluate(args) -> int:
    series = _load_series(args)
    train, test = split(series, SplitSpec(args.test_len))
    dataset = args.dataset or Path(args.data).stem
    horizon_tag = args.horizon_tag or f"h{args.test_len}"
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    for pred_path in args.pred:
        tag = Path(pred_path).stem
        if tag.startswith("predictions_"):
            tag = tag[len("predictions_") :]
        with open(pred_path, newline="", encoding="utf-8") as fh:
            records = list(csv.DictReader(fh))
        if len(records) != test.n:
            raise ValueError(
                f"{pred_path}: {len(records)} predictions but the test split has {test.n}"
            )
        preds = np.array([float(r["predicted"]) for r in records])
        metrics = evalkit.all_metrics(test.values, preds, train.values)
        rows.append([dataset, horizon_tag, tag,
                     *(_fmt(metrics[name]) for name in evalkit.METRIC_NAMES)])

    _write_rows(out / "metrics.csv", ["data", "horizon", "model", *evalkit.METRIC_NAMES], rows)
    print(f"wrote metrics for {len(rows)} model(s) to {out / 'metrics.csv'}")
    return 0


def read_metric_table(paths) -> evalkit.MetricTable:
    table = evalkit.MetricTable()
    for path in paths:
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                table.add(
                    row["data"], row["horizon"], row["model"],
                    {name: float(row[name]) for name in evalkit.METRIC_NAMES},
                )
    return table


def cmd_mcb(args) -> int:
    table = read_metric_table(args.metrics)
    result = evalkit.mcb(table, alpha=args.alpha)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    ordered = sorted(result.mean_ranks.items(), key=lambda kv: kv[1])
    _write_rows(
        out / "mcb_ranks.csv",
        ["model", "mean_rank", "half_width", "is_best"],
        ([m, _fmt(r), _fmt(result.half_width), str(m == result.best).lower()]
         for m, r in ordered),
    )
    _plot_mcb(ordered, result, out / "mcb.png")
    for model, rank in ordered:
        print(f"{model}: {rank:.3f} +/- {result.half_width:.3f}")
    return 0


def _plot_mcb(ordered, result, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 0.5 * len(ordered) + 1.5))
    labels = [f"{m} - {r:.2f}" for m, r in ordered]
    ranks = [r for _, r in ordered]
    y = range(len(ordered))
    ax.errorbar(ranks, y, xerr=result.half_width, fmt="o", capsize=4)
    best_upper = result.mean_ranks[result.best] + result.half_width
    ax.axvline(best_upper, ls="--", color="gray", lw=0.8)
    ax.set_yticks(list(y), labels)
    ax.invert_yaxis()
    ax.set_xlabel(f"mean rank over {result.n_cases} cases (alpha={result.alpha})")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def cmd_version(_args) -> int:
    print(f"wavecast {__version__}")
    return 0


# parser --------------------------------------------------------------------


def _add_data_flags(p: argparse.ArgumentParser):
    p.add_argument("--data", required=True, help="input CSV path")
    p.add_argument("--column", default="0", help="column index or header name (default 0)")
    p.add_argument("--header", action="store_true", help="treat the first row as a header")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wavecast", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="MODWT-MRA decomposition to CSVs and a plot")
    _add_data_flags(p)
    p.add_argument("--test-len", type=int, default=0, help="drop the last N values first")
    p.add_argument("--levels", type=int, default=None, help="detail level count J")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--config", default=None, help="key=value config file")
    p.set_defaults(func=cmd_decompose, _parser=p)

    p = sub.add_parser("run", help="fit, forecast and evaluate the selected models")
    _add_data_flags(p)
    p.add_argument("--test-len", type=int, required=True, help="holdout / forecast horizon")
    p.add_argument("--levels", type=int, default=None, help="detail level count J")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--jobs", type=int, default=1, help="parallel band trainings")
    p.add_argument("--model", action="append", default=None,
                   choices=["wtransformer", "transformer", "naive"],
                   help="repeatable; default wtransformer")
    p.add_argument("--paper-mode", action="store_true",
                   help="decompose train+test jointly (leaky literal protocol)")
    p.add_argument("--dataset", default=None, help="dataset label in metrics.csv")
    p.add_argument("--horizon-tag", default=None, help="horizon label in metrics.csv")
    p.add_argument("--out", default="out")
    p.add_argument("--config", default=None, help="key=value config file")
    p.set_defaults(func=cmd_run, _parser=p)

    p = sub.add_parser("evaluate", help="score existing prediction CSVs")
    _add_data_flags(p)
    p.add_argument("--test-len", type=int, required=True)
    p.add_argument("--pred", action="append", required=True,
                   help="prediction CSV (index,actual,predicted); repeatable")
    p.add_argument("--dataset", default=None)
    p.add_argument("--horizon-tag", default=None)
    p.add_argument("--out", default="out")
    p.add_argument("--config", default=None, help="key=value config file")
    p.set_defaults(func=cmd_evaluate, _parser=p)

    p = sub.add_parser("mcb", help="average-rank comparison with the best model")
    p.add_argument("metrics", nargs="+", help="metrics CSV files")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_mcb)

    p = sub.add_parser("version", help="print the version")
    p.set_defaults(func=cmd_version)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config_file(args, getattr(args, "_parser", parser))
        if getattr(args, "model", "x") is None:
            args.model = ["wtransformer"]
        return args.func(args)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FloatingPointError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
