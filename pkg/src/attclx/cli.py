"""Command-line front end: ``attclx <subcommand> ...``.

Exit status is 0 on success, 1 on a data or model error (one diagnostic
line on stderr) and 2 on a usage error. Results go to stdout or ``--out``;
timestamps go to stderr so stdout is reproducible byte for byte.
"""
from __future__ import annotations

import argparse
import csv
import datetime as dt
import sys

import numpy as np

from . import arima, stats
from .arima import ArimaSpec
from .checkpoint import load_checkpoint, save_checkpoint
from .config import build_config, parse_lines, read_config_file
from .core_ts import Series
from .errors import AttclxError, LengthMismatch, MissingColumn
from .io import SYNTHETIC_KINDS, file_fingerprint, gen_synthetic, load_ohlcv_csv, save_ohlcv_csv, write_ohlcv_csv
from .metrics import evaluate
from .pipeline import VARIANTS, ablate, fit_pipeline, resolve_split
from . import report as rpt


def _stamp(label: str) -> None:
    now = dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")
    print(f"{label} {now}", file=sys.stderr)


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _column(frame, name: str, diff: int) -> Series:
    if name not in ("open", "high", "low", "close", "volume", "amount"):
        raise MissingColumn(name)
    s = Series(getattr(frame, name), frame.dates)
    return stats.difference(s, diff) if diff else s


def _settings(args) -> dict:
    settings = read_config_file(args.config) if getattr(args, "config", None) else {}
    settings.update(parse_lines(getattr(args, "set", None) or []))
    if getattr(args, "variant", None):
        settings["pipeline.variant"] = args.variant
    if getattr(args, "seed", None) is not None:
        settings["pipeline.seed"] = str(args.seed)
    if getattr(args, "split", None):
        settings["pipeline.split"] = args.split
    return settings


# ---------------------------------------------------------------- handlers

def cmd_adf(args):
    series = _column(load_ohlcv_csv(args.csv), args.column, args.diff)
    _emit(stats.adf_test(series, args.max_lag).as_text(), args.out)


def cmd_correlogram(args):
    series = _column(load_ohlcv_csv(args.csv), args.column, args.diff)
    values = (stats.acf if args.command == "acf" else stats.pacf)(series, args.lags)
    _emit(rpt.series_csv(("lag", args.command), range(values.size), values), args.out)


def cmd_arima(args):
    frame = load_ohlcv_csv(args.csv)
    close = Series(frame.close, frame.dates)
    model = arima.fit(close, ArimaSpec(args.p, args.d, 0))
    if args.action == "fit":
        pairs = [("p", args.p), ("d", args.d), ("intercept", repr(model.intercept))]
        pairs += [(f"a{i + 1}", repr(float(c))) for i, c in enumerate(model.coefficients)]
        pairs.append(("residual_variance", repr(model.residual_variance)))
        sys.stdout.write(rpt.key_values(pairs))
        if args.out:
            fitted, resid = arima.fitted_and_residuals(model, close)
            dates = [rpt._date(d) for d in frame.dates]
            _emit(rpt.series_csv(("date", "close", "fitted", "residual"), dates, frame.close,
                                 fitted.values, resid.values), args.out)
    else:
        fc = arima.forecast(model, close, args.horizon)
        _emit(rpt.series_csv(("step", "forecast"), range(1, args.horizon + 1), fc.values), args.out)


def cmd_train(args):
    frame = load_ohlcv_csv(args.csv)
    config = build_config(_settings(args))
    _stamp("started")
    fitted, _ = fit_pipeline(config, frame)
    _stamp("finished")
    save_checkpoint(fitted, args.checkpoint)
    _emit(rpt.loss_history_csv(fitted.loss_history), args.loss_out)


def cmd_predict(args):
    frame = load_ohlcv_csv(args.csv)
    fitted = load_checkpoint(args.checkpoint)
    start = resolve_split(fitted.config.split, frame.dates) if args.test_only else 0
    idx, truth, pred = fitted.predict_frame(frame, start)
    _emit(rpt.predictions_csv(frame.dates[idx], truth, pred), args.out)


def _read_column(path, name=None):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise LengthMismatch(f"{path} has no data rows")
    header = [h.strip() for h in rows[0]]
    if name is not None and name not in header:
        raise MissingColumn(name)
    k = header.index(name) if name is not None else len(header) - 1
    try:
        values = np.array([float(r[k]) for r in rows[1:]])
    except (ValueError, IndexError) as exc:
        raise LengthMismatch(f"{path}: unreadable column {header[k]!r}: {exc}") from None
    dates = [r[0] for r in rows[1:]] if header[0] == "date" else None
    return values, dates


def cmd_evaluate(args):
    pred, pdates = _read_column(args.pred, args.pred_column)
    truth, tdates = _read_column(args.truth, args.truth_column)
    if pdates is not None and tdates is not None and pdates != tdates:
        raise LengthMismatch("prediction and truth files cover different dates")
    _emit(rpt.metric_block(evaluate(pred, truth)), args.out)


def cmd_ablate(args):
    frame = load_ohlcv_csv(args.csv)
    config = build_config(_settings(args))
    _stamp("started")
    result = ablate(config, frame, fingerprint=file_fingerprint(args.csv), jobs=args.jobs)
    _stamp("finished")
    if args.summary:
        _emit(rpt.run_summary(result), args.summary)
    _emit(rpt.metric_table(result), args.out)


def cmd_gen(args):
    params = {}
    for key, text in parse_lines(args.param or []).items():
        params[key] = text if key == "start_date" else float(text)
    frame = gen_synthetic(args.kind, args.n, args.seed, params)
    if args.out:
        save_ohlcv_csv(frame, args.out)
    else:
        write_ohlcv_csv(frame, sys.stdout)


# ---------------------------------------------------------------- parser

def _series_flags(p):
    p.add_argument("csv", help="daily-bar CSV (trade_date, open, high, low, close, vol, amount)")
    p.add_argument("--column", default="close", help="price column to analyse (default close)")
    p.add_argument("--diff", type=int, default=0, help="difference the column this many times first")
    p.add_argument("--out", help="write to this file instead of stdout")


def _config_flags(p):
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one setting (repeatable)")
    p.add_argument("--seed", type=int, help="base random seed")
    p.add_argument("--split", help="first test row: index, train fraction, or YYYYMMDD date")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="attclx", description="Hybrid ARIMA / attention-CNN / BiLSTM / boosted-tree forecaster.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("adf", help="augmented Dickey-Fuller test")
    _series_flags(p)
    p.add_argument("--max-lag", type=int, help="largest lag searched by AIC (default from sample size)")
    p.set_defaults(func=cmd_adf)

    for name, what in (("acf", "autocorrelation"), ("pacf", "partial autocorrelation")):
        p = sub.add_parser(name, help=f"sample {what} as (lag, value) CSV")
        _series_flags(p)
        p.add_argument("--lags", type=int, required=True, help="largest lag")
        p.set_defaults(func=cmd_correlogram)

    p = sub.add_parser("arima", help="fit ARIMA(p,d,0) on close, or forecast from it")
    p.add_argument("action", choices=("fit", "forecast"), help="fit: coefficients (and fitted/residual CSV with --out); forecast: multi-step CSV")
    p.add_argument("csv", help="daily-bar CSV")
    p.add_argument("--p", type=int, default=2, help="autoregressive order (default 2)")
    p.add_argument("--d", type=int, default=1, help="differencing order (default 1)")
    p.add_argument("--horizon", type=int, default=10, help="forecast steps (default 10)")
    p.add_argument("--out", help="output CSV path")
    p.set_defaults(func=cmd_arima)

    p = sub.add_parser("train", help="fit one variant and save a checkpoint")
    p.add_argument("csv", help="daily-bar CSV")
    p.add_argument("--variant", choices=VARIANTS, help="model variant (default acnn_bilstm_xgb)")
    _config_flags(p)
    p.add_argument("--checkpoint", required=True, help="checkpoint file to write")
    p.add_argument("--loss-out", help="loss-history CSV path (default stdout)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="forecast with a saved checkpoint")
    p.add_argument("csv", help="daily-bar CSV")
    p.add_argument("--checkpoint", required=True, help="checkpoint written by train")
    p.add_argument("--test-only", action="store_true", help="only rows at or after the configured split")
    p.add_argument("--out", help="output CSV path")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="error metrics between two CSV files")
    p.add_argument("--pred", required=True, help="CSV holding the predictions")
    p.add_argument("--truth", required=True, help="CSV holding the observed values")
    p.add_argument("--pred-column", help="column of --pred to use (default: its last column)")
    p.add_argument("--truth-column", help="column of --truth to use (default: its last column)")
    p.add_argument("--out", help="output path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="run every variant and print the comparison table")
    p.add_argument("csv", help="daily-bar CSV")
    _config_flags(p)
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--summary", help="also write a key=value run summary here")
    p.add_argument("--out", help="metric table CSV path")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("gen", help="write seeded synthetic daily bars")
    p.add_argument("--kind", choices=SYNTHETIC_KINDS, required=True, help="close-price process")
    p.add_argument("--n", type=int, required=True, help="number of bars")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="generator parameter (repeatable)")
    p.add_argument("--out", help="output CSV path")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (AttclxError, OSError, ValueError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
