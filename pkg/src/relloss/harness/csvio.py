"""Trace and report CSV files.

Both formats start with ``# key=value`` metadata lines followed by a header
row. Floats are written with 17 significant digits so they read back exactly.
"""

import csv
import math

import numpy as np

from ..families import get_family
from ..online import Mode, Trace, step_gradient
from ..regression import RegressionTrace

REPORT_HEADER = ["name", "value", "applicable", "pass"]


def fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.17g}"


def fmt_vector(values):
    return ";".join(fmt(v) for v in np.ravel(values))


def parse_vector(text):
    return np.array([float(v) for v in text.split(";")], dtype=float) if text else np.zeros(0)


def _write(path, meta, header, rows):
    with open(path, "w", newline="") as fh:
        for key, value in meta.items():
            fh.write(f"# {key}={value}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _read(path):
    meta = {}
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            meta[key] = value
        elif line:
            body.append(line)
    rows = list(csv.reader(body))
    return meta, rows[0], rows[1:]


def write_trace(path, trace, extra_meta=None):
    if isinstance(trace, RegressionTrace):
        return _write_regression_trace(path, trace, extra_meta)
    d = trace.family.dim
    meta = {"family": trace.family.name, "dim": d, "mode": trace.mode.value,
            "mu1": fmt_vector(trace.mu1), "eta_b_inv": fmt(trace.eta_b_inv)}
    meta.update(extra_meta or {})
    header = (["trial"] + [f"prediction_{i}" for i in range(d)]
              + [f"example_{i}" for i in range(d)] + ["loss", "inv_rate"])
    rows = []
    for t, mu, x, loss, rate in trace.records():
        rows.append([str(t)] + [fmt(v) for v in mu] + [fmt(v) for v in x] + [fmt(loss), fmt(rate)])
    _write(path, meta, header, rows)


def _write_regression_trace(path, trace, extra_meta):
    d = trace.dim
    meta = {"family": "regression", "dim": d, "mode": trace.mode.value,
            "prior": fmt_vector(trace.prior)}
    meta.update(extra_meta or {})
    header = ["trial", "prediction"] + [f"instance_{i}" for i in range(d)] + ["label", "loss"]
    rows = []
    for t in range(trace.T):
        rows.append([str(t + 1), fmt(trace.predictions[t])] + [fmt(v) for v in trace.instances[t]]
                    + [fmt(trace.labels[t]), fmt(trace.losses[t])])
    _write(path, meta, header, rows)


def read_trace(path):
    meta, header, rows = _read(path)
    d = int(meta["dim"])
    mode = Mode.parse(meta["mode"])
    data = np.array([[float(v) for v in row] for row in rows], dtype=float).reshape(len(rows), len(header))
    if meta["family"] == "regression":
        prior = parse_vector(meta["prior"]).reshape(d, d)
        return RegressionTrace(mode, prior, data[:, 2:2 + d], data[:, 2 + d], data[:, 1], data[:, 3 + d])
    family = get_family(meta["family"], d)
    mu1 = parse_vector(meta["mu1"])
    preds, xs = data[:, 1:1 + d], data[:, 1 + d:1 + 2 * d]
    losses, rates = data[:, 1 + 2 * d], data[:, 2 + 2 * d]
    final = step_gradient(preds[-1], xs[-1], rates[-1]) if len(rows) else mu1.copy()
    return Trace(family=family, mode=mode, mu1=mu1, eta_b_inv=float(meta["eta_b_inv"]),
                 predictions=preds, examples=xs, losses=losses, inv_rates=rates, final_mu=final)


def report_rows(report):
    rows = [["online_total", fmt(report.online_total), "true", ""],
            ["offline_optimum", fmt(report.offline_optimum), "true", ""],
            ["regret", fmt(report.regret), "true", ""]]
    for name, value in report.identity_residuals.items():
        ok = report.identity_passes(name)
        rows.append([f"residual_{name}", fmt(value) if value is not None else "nan",
                     fmt(value is not None), fmt(ok)])
    for name, bound in report.bounds.items():
        rows.append([f"bound_{name}", fmt(bound.value), fmt(bound.applicable),
                     fmt(bound.holds) if bound.applicable else ""])
    return rows


def write_report(path, report, meta):
    _write(path, meta, REPORT_HEADER, report_rows(report))


def read_report(path):
    """``(meta, {name: (value, applicable, pass)})``."""
    meta, header, rows = _read(path)
    if header != REPORT_HEADER:
        raise ValueError(f"{path}: not a report file (header {header})")
    table = {}
    for name, value, applicable, ok in rows:
        table[name] = (float(value), applicable == "true", None if ok == "" else ok == "true")
    return meta, table
