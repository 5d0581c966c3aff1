"""Regret and bound curves derived from report CSVs."""

import csv
from collections import defaultdict
from pathlib import Path

from . import csvio


def _series_key(meta):
    return (meta.get("family", ""), meta.get("mode", ""), meta.get("eta_b_inv", ""))


def collect_series(report_paths):
    """``{(family, mode, eta_b_inv): [(T, regret, {bound: value})]}`` sorted by T."""
    if not report_paths:
        raise ValueError("no report files given")
    series = defaultdict(list)
    for path in report_paths:
        meta, table = csvio.read_report(path)
        bounds = {name[len("bound_"):]: value
                  for name, (value, applicable, _) in table.items()
                  if name.startswith("bound_") and applicable}
        series[_series_key(meta)].append((int(meta["trials"]), table["regret"][0], bounds))
    return {key: sorted(rows, key=lambda r: r[0]) for key, rows in sorted(series.items())}


def emit_plotdata(report_paths, out_dir, figures=True):
    """Write ``regret_vs_T.csv``, one ``<bound>_vs_T.csv`` per bound, and SVGs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    series = collect_series(report_paths)
    bound_names = sorted({b for rows in series.values() for _, _, bounds in rows for b in bounds})
    written = []

    path = out_dir / "regret_vs_T.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["family", "mode", "eta_b_inv", "T", "regret"])
        for key, rows in series.items():
            for T, regret, _ in rows:
                writer.writerow([*key, T, csvio.fmt(regret)])
    written.append(path)

    for bound in bound_names:
        path = out_dir / f"{bound}_vs_T.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["family", "mode", "eta_b_inv", "T", "regret", bound])
            for key, rows in series.items():
                for T, regret, bounds in rows:
                    if bound in bounds:
                        writer.writerow([*key, T, csvio.fmt(regret), csvio.fmt(bounds[bound])])
        written.append(path)

    if figures:
        written += _draw(series, bound_names, out_dir)
    return written


def _draw(series, bound_names, out_dir):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "relloss"

    # fixed metadata keeps the SVG bytes reproducible
    svg_meta = {"Date": None, "Creator": None}
    paths = []
    fig, ax = plt.subplots(figsize=(6, 4))
    for key, rows in series.items():
        ax.plot([r[0] for r in rows], [r[1] for r in rows], marker="o", ms=3, label=" ".join(key))
    ax.set_xlabel("T")
    ax.set_ylabel("regret")
    ax.legend(fontsize=7)
    path = out_dir / "regret_vs_T.svg"
    fig.savefig(path, metadata=svg_meta)
    plt.close(fig)
    paths.append(path)

    for bound in bound_names:
        fig, ax = plt.subplots(figsize=(6, 4))
        for key, rows in series.items():
            pts = [(T, regret, b[bound]) for T, regret, b in rows if bound in b]
            if not pts:
                continue
            label = " ".join(key)
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", ms=3, label=f"regret {label}")
            ax.plot([p[0] for p in pts], [p[2] for p in pts], ls="--", label=f"{bound} {label}")
        ax.set_xlabel("T")
        ax.legend(fontsize=7)
        path = out_dir / f"{bound}_vs_T.svg"
        fig.savefig(path, metadata=svg_meta)
        plt.close(fig)
        paths.append(path)
    return paths
