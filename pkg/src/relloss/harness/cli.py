"""Command line entry point: ``relloss run|verify|sweep|plot``.

Exit codes: 0 when every applicable identity passes, 1 on a tolerance
failure, 2 on a usage or configuration error.
"""

import sys
from pathlib import Path

import click

from ..regret import IDENTITY_RTOL
from . import csvio
from .experiment import (ConfigError, default_output_dir, grid_sweep, identity_sweep, make_config,
                         order_sensitivity_demo, parse_config_text, run_experiment)
from .generators import ParseError
from .plots import emit_plotdata

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def config_options(fn):
    opts = [
        click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False),
                     help="Flat key = value file; flags override it."),
        click.option("--family", type=click.Choice(["bernoulli", "gaussian", "gamma", "regression"])),
        click.option("--mode", help="incremental_offline or forward."),
        click.option("--mu1", help="Initial mean; ';'-separated for vectors."),
        click.option("--eta-b-inv", help="Prior weight; for regression a scalar, 'a*I', or matrix."),
        click.option("--generator", help="iid[:theta=..], boundary:X=.., permutation:base=..,index=.., file:path=.."),
        click.option("--seed", type=int),
        click.option("--trials", "-T", type=int),
        click.option("--dim", type=int),
        click.option("--out-dir", type=click.Path(file_okay=False), help="Defaults to $RELLOSS_OUTPUT_DIR."),
        click.option("--name", help="Output file stem."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _load(config_file, **flags):
    try:
        file_values = parse_config_text(Path(config_file).read_text()) if config_file else {}
        return make_config(file_values, **flags)
    except (ConfigError, ValueError, TypeError) as exc:
        raise click.UsageError(str(exc)) from None


def _echo_report(report):
    click.echo(f"online_total    {report.online_total:.12g}")
    click.echo(f"offline_optimum {report.offline_optimum:.12g}")
    click.echo(f"regret          {report.regret:.12g}")
    for name, value in report.identity_residuals.items():
        status = {True: "pass", False: "FAIL", None: "n/a"}[report.identity_passes(name)]
        shown = "n/a" if value is None else f"{value:.3e}"
        click.echo(f"residual {name:<24} {shown:>12}  {status}")
    for name, bound in report.bounds.items():
        if bound.applicable:
            click.echo(f"bound    {name:<24} {bound.value:>12.6g}  {'holds' if bound.holds else 'violated'}")
        else:
            click.echo(f"bound    {name:<24} {'n/a':>12}")


@click.group()
def main():
    """On-line density estimation and regression with exact regret checks."""


@main.command("run")
@config_options
def run_cmd(config_file, **flags):
    """Run one configuration; write its trace and report CSVs."""
    config = _load(config_file, **flags)
    try:
        report, _, trace_path, report_path = run_experiment(config)
    except (ParseError, ValueError) as exc:
        raise click.UsageError(str(exc)) from None
    _echo_report(report)
    click.echo(f"wrote {trace_path}")
    click.echo(f"wrote {report_path}")
    sys.exit(EXIT_FAIL if report.failures() else EXIT_OK)


@main.command()
@click.option("--configs", "n_configs", type=int, default=240, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False))
def verify(n_configs, seed, jobs, out_dir):
    """Identity sweep over every family and mode, plus the order-sensitivity demo."""
    results = identity_sweep(n_configs, seed, jobs)
    out = Path(out_dir) if out_dir else default_output_dir()
    out.mkdir(parents=True, exist_ok=True)
    path = out / "verify_report.csv"
    failures = []
    worst = {}
    with open(path, "w", newline="") as fh:
        fh.write("config,name,value,applicable,pass\n")
        for key, report in results:
            for name, value, applicable, ok in csvio.report_rows(report):
                fh.write(f"{key},{name},{value},{applicable},{ok}\n")
            for name, res in report.identity_residuals.items():
                if res is not None:
                    worst[name] = max(worst.get(name, 0.0), res / report.scale)
            failures += [(key, name) for name in report.failures()]
    for name, value in sorted(worst.items()):
        click.echo(f"{name:<24} max relative residual {value:.3e} (tol {IDENTITY_RTOL:g})")
    rows = order_sensitivity_demo()
    for row in rows:
        click.echo(f"order demo {row['sequence']}: online_total={row['online_total']:.12g} "
                   f"final_mu={row['final_mu']:.17g}")
    click.echo(f"wrote {path}")
    for key, name in failures:
        click.echo(f"FAIL {key} {name}", err=True)
    sys.exit(EXIT_FAIL if failures else EXIT_OK)


def _float_list(text):
    return [float(v) for v in text.replace(";", ",").split(",") if v]


@main.command()
@config_options
@click.option("--T-list", "t_list", default="1,2,5,10,20,50,100", show_default=True)
@click.option("--eta-list", default=None, help="Comma-separated prior weights; default: the config's.")
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--plot/--no-plot", default=True, show_default=True)
def sweep(config_file, t_list, eta_list, jobs, plot, **flags):
    """Grid over T and the prior weight; optional plot data."""
    config = _load(config_file, **flags)
    trials = [int(v) for v in _float_list(t_list)]
    etas = _float_list(eta_list) if eta_list else [config.eta_b_inv]
    try:
        results = grid_sweep(config, trials, etas, jobs)
    except (ParseError, ValueError) as exc:
        raise click.UsageError(str(exc)) from None
    failures = []
    for cfg, report, path in results:
        failures += [(cfg.key(), name) for name in report.failures()]
        click.echo(f"{cfg.key():<40} regret {report.regret:.10g}")
    if plot:
        for path in emit_plotdata([p for _, _, p in results], config.output_dir() / "plots"):
            click.echo(f"wrote {path}")
    for key, name in failures:
        click.echo(f"FAIL {key} {name}", err=True)
    sys.exit(EXIT_FAIL if failures else EXIT_OK)


@main.command()
@click.argument("reports", nargs=-1, type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
def plot(reports, out_dir, figures):
    """Series CSVs and SVG figures from report CSV files."""
    if not reports:
        raise click.UsageError("give at least one report CSV")
    for path in emit_plotdata(list(reports), out_dir, figures=figures):
        click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
