"""On-line linear regression: ridge regression and its forward variant.

Both algorithms use the weights ``theta = A^{-1} sum_q x_q y_q`` where ``A`` is
the prior matrix plus the outer products of the instances seen so far. The
forward variant adds the current instance to ``A`` before predicting on it.
``A^{-1}`` is kept up to date with Sherman-Morrison rank-one updates.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .families import InputError
from .online import Mode
from .regret import IDENTITY_RTOL, Bound, RegretReport

SYMMETRY_TOL = 1e-12
DENSE_CHECK_TOL = 1e-8


def parse_prior(spec, dim):
    """Prior matrix from a scalar ``a``, the string ``"a*I"``, or a full matrix."""
    if isinstance(spec, str):
        text = spec.replace(" ", "")
        if text.endswith("*I"):
            return float(text[:-2]) * np.eye(dim)
        return float(text) * np.eye(dim)
    arr = np.asarray(spec, dtype=float)
    if arr.ndim == 0:
        return float(arr) * np.eye(dim)
    return arr


@dataclass(frozen=True)
class RegressionState:
    dim: int
    theta: np.ndarray
    inv_rate: np.ndarray
    inverse: np.ndarray
    xy_sum: np.ndarray
    mode: Mode
    prior: np.ndarray
    pending: bool = False
    check_dense: bool = False


def _sherman_morrison(inverse, x):
    px = inverse @ x
    out = inverse - np.outer(px, px) / (1.0 + x @ px)
    return 0.5 * (out + out.T)


def _augment(state, x):
    return replace(state, inv_rate=state.inv_rate + np.outer(x, x),
                   inverse=_sherman_morrison(state.inverse, x))


def _solve(state):
    theta = state.inverse @ state.xy_sum
    if state.check_dense:
        dense = np.linalg.solve(state.inv_rate, state.xy_sum)
        gap = float(np.max(np.abs(theta - dense))) if theta.size else 0.0
        if gap > DENSE_CHECK_TOL:
            raise ArithmeticError(f"rank-one inverse drifted from dense solve by {gap:.3e}")
    return replace(state, theta=theta)


def _check_instance(state, x):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (state.dim,) or not np.all(np.isfinite(x)):
        raise InputError(f"instance must be {state.dim} finite reals, got {x}")
    return x


def reg_init(dim, prior, mode, check_dense=False):
    prior = parse_prior(prior, dim)
    if prior.shape != (dim, dim):
        raise InputError(f"prior must be {dim}x{dim}, got {prior.shape}")
    if not np.allclose(prior, prior.T, rtol=0.0, atol=SYMMETRY_TOL):
        raise InputError("prior matrix is not symmetric")
    try:
        np.linalg.cholesky(prior)
    except np.linalg.LinAlgError:
        raise InputError("prior matrix is not positive definite") from None
    return RegressionState(
        dim=dim, theta=np.zeros(dim), inv_rate=prior.copy(), inverse=np.linalg.inv(prior),
        xy_sum=np.zeros(dim), mode=Mode.parse(mode), prior=prior.copy(), check_dense=check_dense,
    )


def reg_predict(state, x):
    """Return ``(yhat, state)``; the forward variant first adds ``x x'``."""
    x = _check_instance(state, x)
    if state.mode is Mode.FORWARD and not state.pending:
        state = _solve(replace(_augment(state, x), pending=True))
    return float(x @ state.theta), state


def reg_update(state, x, y):
    x = _check_instance(state, x)
    y = float(y)
    if not math.isfinite(y):
        raise InputError(f"label must be finite, got {y}")
    if state.mode is Mode.INCREMENTAL_OFFLINE or not state.pending:
        state = _augment(state, x)
    state = replace(state, xy_sum=state.xy_sum + x * y, pending=False)
    return _solve(state)


@dataclass(frozen=True)
class RegressionTrace:
    mode: Mode
    prior: np.ndarray
    instances: np.ndarray
    labels: np.ndarray
    predictions: np.ndarray
    losses: np.ndarray

    @property
    def T(self):
        return len(self.labels)

    @property
    def dim(self):
        return self.prior.shape[0]

    @property
    def total_loss(self):
        return float(np.sum(self.losses))


def reg_run(instances, labels, prior, mode, check_dense=False):
    xs = np.asarray(instances, dtype=float)
    if xs.ndim == 1:
        xs = xs[:, None]
    ys = np.asarray(labels, dtype=float).reshape(-1)
    if xs.shape[0] != ys.shape[0]:
        raise InputError("instances and labels differ in length")
    state = reg_init(xs.shape[1], prior, mode, check_dense=check_dense)
    preds = np.empty(len(ys))
    for t, (x, y) in enumerate(zip(xs, ys)):
        preds[t], state = reg_predict(state, x)
        state = reg_update(state, x, y)
    return RegressionTrace(state.mode, state.prior, xs, ys, preds, 0.5 * (preds - ys) ** 2)


def offline_optimum(prior, instances, labels):
    """Minimum of ``theta' P theta / 2 + sum_t (x_t . theta - y_t)^2 / 2``."""
    xs = np.asarray(instances, dtype=float).reshape(len(labels), -1)
    ys = np.asarray(labels, dtype=float)
    a = prior + xs.T @ xs
    theta = np.linalg.solve(a, xs.T @ ys)
    return 0.5 * float(theta @ prior @ theta) + 0.5 * float(np.sum((xs @ theta - ys) ** 2))


def regret_expression(trace):
    """``sum_t y_t^2 x_t'M_t^{-1}x_t/2 - sum_{t>=2} yhat_t^2 x_t'M_{t-1}^{-1}x_t/2``.

    ``M_t`` is the learning-rate matrix in force when predicting at trial ``t``.
    Equals the forward algorithm's regret exactly.
    """
    a = trace.prior.copy()
    prev = None
    first = second = 0.0
    for x, y, yhat in zip(trace.instances, trace.labels, trace.predictions):
        after = a + np.outer(x, x)
        current = after if trace.mode is Mode.FORWARD else a
        first += y * y * float(x @ np.linalg.solve(current, x))
        if prev is not None:
            second += yhat * yhat * float(x @ np.linalg.solve(prev, x))
        prev, a = current, after
    return float(0.5 * first - 0.5 * second)


def _ridge_scale(prior):
    a = float(prior[0, 0])
    return a if np.allclose(prior, a * np.eye(prior.shape[0]), rtol=0.0, atol=SYMMETRY_TOL) else None


def log_bounds(trace):
    """Logarithmic bounds for a prior ``a*I``; ``None`` otherwise.

    Returns ``(ridge, dimension)``: ``(a Y^2/2) ln(1 + T X^2/a)`` and the
    same with the factor ``a`` replaced by the dimension.
    """
    a = _ridge_scale(trace.prior)
    if a is None or trace.T == 0:
        return None
    big_x = float(np.max(np.abs(trace.instances)))
    big_y = float(np.max(np.abs(trace.labels)))
    log_term = math.log1p(trace.T * big_x**2 / a)
    return 0.5 * a * big_y**2 * log_term, 0.5 * trace.dim * big_y**2 * log_term


def reg_regret_report(instances, labels, prior, mode):
    trace = instances if isinstance(instances, RegressionTrace) else reg_run(
        instances, labels, prior, mode)
    online = trace.total_loss
    offline = offline_optimum(trace.prior, trace.instances, trace.labels) if trace.T else 0.0
    regret = online - offline
    expr = regret_expression(trace)
    residuals = {}
    if trace.mode is Mode.FORWARD:
        residuals["forward_exact"] = float(abs(regret - expr))
    bounds = {"regression_expression": Bound(expr, True, bool(regret <= expr + IDENTITY_RTOL * max(1.0, abs(expr))))}
    logs = log_bounds(trace)
    if logs is None:
        bounds["log_ridge"] = Bound(math.nan, False)
        bounds["log_dimension"] = Bound(math.nan, False)
    else:
        bounds["log_ridge"] = Bound(logs[0], True, regret <= logs[0] + 1e-12)
        bounds["log_dimension"] = Bound(logs[1], True, regret <= logs[1] + 1e-12)
    return RegretReport(online, offline, regret, residuals, bounds, scale=max(1.0, abs(online)))
