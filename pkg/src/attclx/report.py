"""Text and CSV renderings of run results.

Numbers are written with ``repr`` (shortest round-trip form) except in the
metric table, which uses fixed precision so it diffs cleanly.
"""
from __future__ import annotations

import csv
import io

import numpy as np

from .config import config_to_settings
from .pipeline import VARIANTS, RunReport

TABLE_COLUMNS = ("variant", "MAE", "RMSE", "MAPE", "R2")


def _date(d) -> str:
    return np.datetime64(d, "D").item().strftime("%Y%m%d")


def key_values(pairs) -> str:
    return "".join(f"{k}={v}\n" for k, v in pairs)


def adf_block(report) -> str:
    return report.as_text()


def series_csv(header, *columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*columns):
        w.writerow([v if isinstance(v, (str, int, np.integer)) else repr(float(v)) for v in row])
    return buf.getvalue()


def predictions_csv(dates, truth, prediction) -> str:
    return series_csv(("date", "truth", "prediction"), [_date(d) for d in dates], truth, prediction)


def loss_history_csv(history) -> str:
    return series_csv(("epoch", "loss"), range(1, len(history) + 1), history)


def metric_block(metrics: dict) -> str:
    return key_values((k, repr(float(v))) for k, v in metrics.items())


def metric_table(report: RunReport, digits: int = 6) -> str:
    """One row per variant in canonical order; R2 is the standard coefficient."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for name in VARIANTS:
        if name not in report.results:
            continue
        m = report.results[name].metrics
        w.writerow([name, *(f"{m[k]:.{digits}f}" for k in ("mae", "rmse", "mape", "r2_standard"))])
    return buf.getvalue()


def run_summary(report: RunReport) -> str:
    """Deterministic key=value description of a run (timestamps excluded)."""
    pairs = [("data_fingerprint", report.data_fingerprint), ("n_train_windows", report.n_train),
             ("n_test_windows", report.n_test)]
    pairs += [(f"note.{k}", v) for k, v in sorted(report.notes.items())]
    pairs += [(f"config.{k}", v) for k, v in sorted(config_to_settings(report.config).items())]
    for name in VARIANTS:
        res = report.results.get(name)
        if res is None:
            continue
        pairs.append((f"{name}.seed", res.seed))
        pairs += [(f"{name}.{k}", repr(float(v))) for k, v in res.metrics.items()]
        if res.loss_history:
            pairs.append((f"{name}.final_loss", repr(float(res.loss_history[-1]))))
    return key_values(pairs)
