"""Experiment configuration, single runs, and the identity sweep."""

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from ..families import Gaussian, get_family
from ..online import Mode, run
from ..regression import reg_regret_report, reg_run
from ..regret import IDENTITY_RTOL, regret_report
from . import csvio
from .generators import generate, generate_regression, make_rng

OUTPUT_ENV = "RELLOSS_OUTPUT_DIR"


class ConfigError(ValueError):
    pass


def default_output_dir():
    return Path(os.environ.get(OUTPUT_ENV, "relloss-out"))


@dataclass(frozen=True)
class ExperimentConfig:
    family: str = "bernoulli"
    mode: str = "forward"
    mu1: str = ""
    eta_b_inv: str = "0"
    generator: str = "iid"
    seed: int = 0
    trials: int = 10
    dim: int = 1
    out_dir: str = ""
    name: str = ""

    @property
    def is_regression(self):
        return self.family == "regression"

    def key(self):
        return self.name or (f"{self.family}_{Mode.parse(self.mode).value}_eta{self.eta_b_inv}"
                             f"_T{self.trials}_seed{self.seed}")

    def output_dir(self):
        return Path(self.out_dir) if self.out_dir else default_output_dir()

    def mu1_vector(self, family):
        if not self.mu1:
            default = {"bernoulli": 0.5, "gaussian": 0.0, "gamma": 1.0}[family.name]
            return np.full(family.dim, default)
        values = np.array([float(v) for v in self.mu1.replace(",", ";").split(";")])
        return np.broadcast_to(values, (family.dim,)).copy()

    def metadata(self):
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name not in ("out_dir",)}

    def validate(self):
        try:
            Mode.parse(self.mode)
        except ValueError:
            raise ConfigError(f"unknown mode {self.mode!r}") from None
        if self.trials < 0 or self.dim < 1:
            raise ConfigError("trials must be >= 0 and dim >= 1")
        if not self.is_regression:
            try:
                get_family(self.family, self.dim)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
            try:
                if float(self.eta_b_inv) < 0:
                    raise ConfigError("eta_b_inv must be >= 0")
            except ValueError:
                raise ConfigError(f"eta_b_inv must be a number, got {self.eta_b_inv!r}") from None
        return self


_INT_FIELDS = {"seed", "trials", "dim"}


def parse_config_text(text):
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    names = {f.name for f in fields(ExperimentConfig)}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not eq or key not in names:
            raise ConfigError(f"line {lineno}: cannot parse {raw!r}")
        value = value.strip()
        values[key] = int(value) if key in _INT_FIELDS else value
    return values


def make_config(file_values=None, **overrides):
    values = dict(file_values or {})
    values.update({k: v for k, v in overrides.items() if v is not None})
    for key in _INT_FIELDS & values.keys():
        values[key] = int(values[key])
    for key in values.keys() - _INT_FIELDS:
        values[key] = str(values[key])
    return ExperimentConfig(**values).validate()


def build_trace(config):
    if config.is_regression:
        xs, ys = generate_regression(config.generator, config.dim, config.seed, config.trials)
        return reg_run(xs, ys, config.eta_b_inv, config.mode)
    family = get_family(config.family, config.dim)
    xs = generate(config.generator, family, config.seed, config.trials)
    return run(family, config.mu1_vector(family), float(config.eta_b_inv), config.mode, xs)


def report_for(trace):
    if hasattr(trace, "labels"):
        return reg_regret_report(trace, None, None, None)
    return regret_report(trace)


def run_experiment(config):
    """Run one configuration and write its trace and report CSVs.

    Returns ``(report, trace, trace_path, report_path)``.
    """
    trace = build_trace(config)
    report = report_for(trace)
    out = config.output_dir()
    out.mkdir(parents=True, exist_ok=True)
    trace_path = out / f"{config.key()}_trace.csv"
    report_path = out / f"{config.key()}_report.csv"
    meta = config.metadata()
    csvio.write_trace(trace_path, trace)
    csvio.write_report(report_path, report, meta)
    return report, trace, trace_path, report_path


def report_from_trace_file(path):
    return report_for(csvio.read_trace(path))


# identity sweep -----------------------------------------------------------------

def sweep_configurations(n_configs=240, seed=0):
    """Random configurations cycling over every family and mode.

    Prior weights are positive so every mean stays interior and all three
    identities apply.
    """
    rng = make_rng(seed)
    combos = list(itertools.product(("bernoulli", "gaussian", "gamma"), tuple(Mode)))
    out = []
    for i in range(n_configs):
        family, mode = combos[i % len(combos)]
        dim = int(rng.integers(1, 4)) if family == "gaussian" else 1
        mu1 = {"bernoulli": rng.uniform(0.05, 0.95), "gaussian": rng.normal(),
               "gamma": rng.uniform(0.2, 5.0)}[family]
        out.append(ExperimentConfig(
            family=family, mode=mode.value, mu1=f"{mu1!r}", eta_b_inv=f"{rng.uniform(0.25, 4.0)!r}",
            generator="iid:theta=-0.7" if family == "gamma" else "iid:theta=0.4",
            seed=int(rng.integers(0, 2**63)), trials=int(rng.integers(1, 41)), dim=dim,
            name=f"sweep{i:04d}",
        ))
    return out


def identity_rows(config):
    trace = build_trace(config)
    report = report_for(trace)
    return config.key(), report


def identity_sweep(n_configs=240, seed=0, jobs=1):
    """``[(key, report)]`` ordered by configuration key."""
    configs = sweep_configurations(n_configs, seed)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(identity_rows, configs, chunksize=8))
    else:
        results = [identity_rows(c) for c in configs]
    return sorted(results, key=lambda item: item[0])


# order sensitivity ------------------------------------------------------------------

def order_sensitivity_demo(eta_b_inv=1.0, grid=np.arange(-2.0, 2.01, 0.5)):
    """Two-example Gaussian sequence whose orderings differ most in total loss.

    Returns a list of two row dicts, one per ordering.
    """
    family = Gaussian(1)
    best = None
    for a, b in itertools.combinations(grid, 2):
        first = run(family, [0.0], eta_b_inv, Mode.FORWARD, [a, b])
        second = run(family, [0.0], eta_b_inv, Mode.FORWARD, [b, a])
        gap = abs(first.total_loss - second.total_loss)
        if best is None or gap > best[0]:
            best = (gap, first, second)
    rows = []
    for trace in best[1:]:
        rows.append({"sequence": trace.examples[:, 0].tolist(), "online_total": trace.total_loss,
                     "final_mu": float(trace.final_mu[0]),
                     "regret": regret_report(trace).regret})
    return rows


# grid sweep ----------------------------------------------------------------------------

def grid_sweep(base, trials_list, eta_list, jobs=1):
    """Run ``base`` over every (T, eta_b_inv) pair; returns report paths in key order."""
    configs = [replace(base, trials=int(T), eta_b_inv=str(eta),
                       name=f"{base.name or base.family}_eta{eta}_T{int(T):05d}")
               for eta in eta_list for T in trials_list]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_experiment, configs))
    else:
        results = [run_experiment(c) for c in configs]
    ordered = sorted(zip(configs, results), key=lambda item: item[0].key())
    return [(cfg, res[0], res[3]) for cfg, res in ordered]


def sweep_passes(reports, rtol=IDENTITY_RTOL):
    return [(key, name) for key, report in reports for name in report.failures(rtol)]


def config_as_dict(config):
    return asdict(config)
