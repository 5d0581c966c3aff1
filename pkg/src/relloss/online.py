"""On-line density estimation with the 1/t learning-rate schedule.

The estimator keeps only inverse learning rates. With the incremental
off-line algorithm and a zero prior weight the first rate is infinite, and
none of the update forms below ever divide by the first inverse rate alone.
"""

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .families import DomainError, ExponentialFamily, InputError


class Mode(str, Enum):
    INCREMENTAL_OFFLINE = "incremental_offline"
    FORWARD = "forward"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"incremental": cls.INCREMENTAL_OFFLINE, "inc": cls.INCREMENTAL_OFFLINE,
                   "fwd": cls.FORWARD}
        if key in aliases:
            return aliases[key]
        return cls(key)


def first_inverse_rate(eta_b_inv, mode):
    """Inverse learning rate of trial 1 for the given mode."""
    mode = Mode.parse(mode)
    return float(eta_b_inv) + (1.0 if mode is Mode.FORWARD else 0.0)


@dataclass(frozen=True)
class EstimatorState:
    family: ExponentialFamily
    mu: np.ndarray
    trial: int
    mode: Mode
    mu1: np.ndarray
    eta_b_inv: float

    @property
    def eta1_inv(self):
        return first_inverse_rate(self.eta_b_inv, self.mode)

    @property
    def inv_rate(self):
        """Inverse learning rate of the current trial."""
        return self.eta1_inv + (self.trial - 1)


def _check_start(family, mu1, eta_b_inv):
    if not eta_b_inv >= 0 or not np.isfinite(eta_b_inv):
        raise ValueError(f"eta_b_inv must be finite and >= 0, got {eta_b_inv}")
    return family.check_expectation(mu1)


def init(family, mu1, eta_b_inv, mode):
    mu1 = _check_start(family, mu1, eta_b_inv)
    return EstimatorState(family, mu1.copy(), 1, Mode.parse(mode), mu1.copy(), float(eta_b_inv))


def predict(state):
    return state.mu.copy()


def update(state, x):
    """One step ``mu <- mu - (mu - x) / (inv_rate + 1)``."""
    x = state.family.check_example(x)
    mu_next = step_gradient(state.mu, x, state.inv_rate)
    return replace(state, mu=mu_next, trial=state.trial + 1)


# The algebraically equivalent one-step recursions. Each takes the inverse
# rate of the current trial.

def step_gradient(mu, x, inv_rate):
    """Gradient step with the loss gradient at the current mean."""
    return mu - (mu - x) / (inv_rate + 1.0)


def step_convex(mu, x, inv_rate):
    """Convex combination of the current mean and the example."""
    return (inv_rate * mu + x) / (inv_rate + 1.0)


def step_implicit(mu, x, inv_rate):
    """Gradient step with the loss gradient at the new mean, solved for it."""
    if inv_rate == 0.0:
        return np.array(x, dtype=float)
    eta = 1.0 / inv_rate
    return (mu + eta * x) / (1.0 + eta)


def expanded_solution(family, mu1, eta1_inv, examples):
    """Closed-form mean after seeing ``examples``; independent of their order."""
    mu1 = family.check_expectation(mu1, closure=True)
    xs = np.asarray(examples, dtype=float).reshape(-1, family.dim)
    for x in xs:
        family.check_example(x)
    t = xs.shape[0]
    if t == 0:
        return mu1.copy()
    if not eta1_inv + t > 0:
        raise ValueError("eta1_inv + t must be positive")
    return (eta1_inv * mu1 + xs.sum(axis=0)) / (eta1_inv + t)


def batch_solution(family, mu1, eta_b_inv, examples):
    """Mean minimising the regularised off-line objective."""
    xs = np.asarray(examples, dtype=float).reshape(-1, family.dim)
    if eta_b_inv == 0 and xs.shape[0] == 0:
        raise ValueError("batch solution undefined: no examples and zero prior weight")
    return expanded_solution(family, mu1, float(eta_b_inv), xs)


@dataclass(frozen=True)
class Trace:
    """Per-trial record of one run.

    Arrays are indexed by trial ``t = 1..T`` at position ``t - 1``;
    ``final_mu`` is the mean after the last update.
    """

    family: ExponentialFamily
    mode: Mode
    mu1: np.ndarray
    eta_b_inv: float
    predictions: np.ndarray
    examples: np.ndarray
    losses: np.ndarray
    inv_rates: np.ndarray
    final_mu: np.ndarray = field(default=None)

    @property
    def T(self):
        return len(self.losses)

    @property
    def eta1_inv(self):
        return first_inverse_rate(self.eta_b_inv, self.mode)

    @property
    def total_loss(self):
        return float(np.sum(self.losses))

    @property
    def final_inv_rate(self):
        return self.eta1_inv + self.T

    def records(self):
        for t in range(self.T):
            yield (t + 1, self.predictions[t], self.examples[t], float(self.losses[t]),
                   float(self.inv_rates[t]))


def run(family, mu1, eta_b_inv, mode, examples):
    """Predict, incur the loss, then update, once per example."""
    state = init(family, mu1, eta_b_inv, mode)
    xs = np.asarray(examples, dtype=float).reshape(-1, family.dim)
    preds, losses, rates = [], [], []
    for x in xs:
        mu = predict(state)
        preds.append(mu)
        losses.append(float(family.loss(mu, x)))
        rates.append(state.inv_rate)
        state = update(state, x)
    d = family.dim
    return Trace(
        family=family,
        mode=state.mode,
        mu1=state.mu1,
        eta_b_inv=state.eta_b_inv,
        predictions=np.array(preds, dtype=float).reshape(-1, d),
        examples=xs.copy(),
        losses=np.array(losses, dtype=float),
        inv_rates=np.array(rates, dtype=float),
        final_mu=state.mu.copy(),
    )


def run_many(family, mu1, eta_b_inv, mode, examples):
    """Vectorised :func:`run` over a batch of sequences of equal length.

    ``examples`` has shape ``(N, T)`` or ``(N, T, dim)``. Returns
    ``(predictions, losses, final_mu)`` with shapes ``(N, T, dim)``,
    ``(N, T)`` and ``(N, dim)``.
    """
    mu1 = _check_start(family, mu1, eta_b_inv)
    xs = np.asarray(examples, dtype=float)
    if xs.ndim == 2:
        xs = xs[..., None]
    if xs.ndim != 3 or xs.shape[-1] != family.dim:
        raise InputError(f"expected (N, T, {family.dim}) examples, got {xs.shape}")
    if not np.all(family._example_ok(xs)):
        raise InputError(f"{family.name}: invalid example in batch")
    n, T, d = xs.shape
    eta1_inv = first_inverse_rate(eta_b_inv, mode)
    mu = np.broadcast_to(mu1, (n, d)).copy()
    preds = np.empty_like(xs)
    losses = np.empty((n, T))
    for t in range(T):
        preds[:, t] = mu
        losses[:, t] = np.sum(family._loss_mu(mu, xs[:, t]), axis=-1)
        mu = step_gradient(mu, xs[:, t], eta1_inv + t)
    return preds, losses, mu


__all__ = [
    "DomainError", "EstimatorState", "Mode", "Trace", "batch_solution", "expanded_solution",
    "first_inverse_rate", "init", "predict", "run", "run_many", "step_convex",
    "step_gradient", "step_implicit", "update",
]
