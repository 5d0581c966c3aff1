"""Regret of the on-line estimator, its exact identities, and the family bounds.

Every identity is stated with the ``-ln P0`` terms dropped on both sides,
except the part a family keeps inside its loss (see
:meth:`ExponentialFamily.loss_offset`), which is added back explicitly.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln, xlogy

from .bregman import divergence_expectation, divergence_natural
from .families import Bernoulli, Gamma, Gaussian
from .online import Mode, batch_solution

IDENTITY_RTOL = 1e-8


class NotApplicable(ValueError):
    """The quantity is undefined for this trace (boundary means, wrong family)."""


class BoundViolation(ArithmeticError):
    """A per-trial inequality that must hold did not."""


def relative_residual(lhs, rhs):
    return abs(lhs - rhs) / max(1.0, abs(lhs))


def _offset_total(family, examples):
    if len(examples) == 0:
        return 0.0
    return float(np.sum(family.loss_offset(examples)))


def _means(trace):
    """Means mu_1..mu_{T+1} stacked as a (T+1, d) array."""
    return np.vstack([trace.predictions, trace.final_mu[None, :]]) if trace.T else trace.mu1[None, :]


def _require_interior(family, *mus):
    for mu in mus:
        if not family.in_interior(mu):
            raise NotApplicable(f"{family.name}: mean {mu} on the domain boundary")


# off-line side -------------------------------------------------------------

def offline_objective_value(family, mu1, eta_b_inv, examples):
    """Minimum of the regularised off-line loss, in closed form via the dual."""
    xs = np.asarray(examples, dtype=float).reshape(-1, family.dim)
    mu_b = batch_solution(family, mu1, eta_b_inv, xs)
    T = xs.shape[0]
    value = -(eta_b_inv + T) * family.dual(mu_b) + _offset_total(family, xs)
    if eta_b_inv:
        value += eta_b_inv * family.dual(mu1)
    return float(value)


def offline_objective_direct(family, mu1, eta_b_inv, examples):
    """The same minimum by evaluating the objective at the batch mean."""
    xs = np.asarray(examples, dtype=float).reshape(-1, family.dim)
    mu_b = batch_solution(family, mu1, eta_b_inv, xs)
    value = float(np.sum(family.loss(mu_b, xs))) if len(xs) else 0.0
    if eta_b_inv:
        _require_interior(family, mu_b)
        value += eta_b_inv * divergence_natural(
            family, family.inverse_link(mu_b), family.inverse_link(mu1))
    return value


def verify_lemma_3_2(family, mu1, eta_b_inv, examples):
    return abs(offline_objective_value(family, mu1, eta_b_inv, examples)
               - offline_objective_direct(family, mu1, eta_b_inv, examples))


# on-line side ---------------------------------------------------------------

def lemma_3_1_sides(trace):
    """Total on-line loss and its rewriting through dual divergences."""
    family = trace.family
    mus = _means(trace)
    _require_interior(family, *mus[:-1])
    rhs = trace.eta1_inv * family.dual(trace.mu1) if trace.eta1_inv else 0.0
    for t in range(trace.T):
        rhs += (trace.inv_rates[t] + 1.0) * divergence_expectation(family, mus[t + 1], mus[t])
    rhs -= trace.final_inv_rate * family.dual(mus[-1])
    rhs += _offset_total(family, trace.examples)
    return trace.total_loss, float(rhs)


def verify_lemma_3_1(trace):
    lhs, rhs = lemma_3_1_sides(trace)
    return abs(lhs - rhs)


@dataclass
class IdentityTerms:
    lhs: float
    prior_term: float
    final_term: float
    step_sum: float

    @property
    def rhs(self):
        return self.prior_term - self.final_term + self.step_sum

    @property
    def residual(self):
        return float(abs(self.lhs - self.rhs))


def theorem_3_4_terms(trace):
    """Both sides of the exact regret identity, with the right side split."""
    family = trace.family
    if trace.T == 0 and trace.eta_b_inv == 0:
        raise NotApplicable("no examples and zero prior weight")
    mus = _means(trace)
    mu_b = batch_solution(family, trace.mu1, trace.eta_b_inv, trace.examples)
    _require_interior(family, mu_b, *mus)
    thetas = family.inverse_link(mus)
    theta_b = family.inverse_link(mu_b)
    theta_1 = thetas[0]

    prior_div = divergence_natural(family, theta_b, theta_1)
    offline = (float(np.sum(family.loss(mu_b, trace.examples))) if trace.T else 0.0)
    offline += trace.eta_b_inv * prior_div
    lhs = trace.total_loss - offline

    coef = trace.eta1_inv - trace.eta_b_inv
    prior_term = coef * prior_div if coef else 0.0
    final_term = trace.final_inv_rate * divergence_natural(family, theta_b, thetas[-1])
    step_sum = 0.0
    for t in range(trace.T):
        step_sum += (trace.inv_rates[t] + 1.0) * divergence_natural(family, thetas[t], thetas[t + 1])
    return IdentityTerms(lhs=lhs, prior_term=prior_term, final_term=final_term, step_sum=step_sum)


def verify_theorem_3_4(trace):
    return theorem_3_4_terms(trace).residual


# family-specific bounds -------------------------------------------------------

def bernoulli_regret_bound(T):
    return 0.5 * math.log(T + 1) + 1.0


def bernoulli_total_from_counts(T, ones):
    """Total loss of the forward estimator started at 1/2 with zero prior weight.

    Vectorises over ``ones``. Uses ``ln prod_{t<=n} (t - 1/2) = lnG(n + 1/2) - lnG(1/2)``.
    """
    ones = np.asarray(ones, dtype=float)
    return gammaln(T + 1.0) - gammaln(ones + 0.5) - gammaln(T - ones + 0.5) + math.log(math.pi)


def bernoulli_offline_from_counts(T, ones):
    ones = np.asarray(ones, dtype=float)
    p = ones / T
    return -(xlogy(ones, p) + xlogy(T - ones, 1.0 - p))


def _is_jeffreys_config(trace):
    return (isinstance(trace.family, Bernoulli) and trace.family.dim == 1
            and trace.mode is Mode.FORWARD and trace.eta_b_inv == 0
            and float(trace.mu1[0]) == 0.5)


def bernoulli_closed_form(trace):
    """Closed-form total loss and regret for the forward estimator from 1/2.

    Returns ``(total_loss, regret)``.
    """
    if not _is_jeffreys_config(trace):
        raise NotApplicable("needs Bernoulli, forward mode, eta_b_inv = 0, mu1 = 1/2")
    if trace.T == 0:
        return 0.0, 0.0
    T = trace.T
    ones = float(np.sum(trace.examples))
    total = float(bernoulli_total_from_counts(T, ones))
    return total, total - float(bernoulli_offline_from_counts(T, ones))


def gaussian_bound(trace):
    """Order-dependent regret expression and its logarithmic relaxation.

    Returns ``(exact_expr, log_bound)``; ``log_bound`` is ``None`` unless the
    first inverse rate exceeds one.
    """
    if not isinstance(trace.family, Gaussian):
        raise NotApplicable("gaussian_bound needs the Gaussian family")
    if np.any(trace.mu1 != 0.0):
        raise NotApplicable("gaussian_bound assumes mu1 = 0")
    eta1_inv = trace.eta1_inv
    if trace.T == 0:
        return 0.0, (0.0 if eta1_inv > 1 else None)
    if eta1_inv == 0:
        return math.inf, None
    sq_x = np.sum(trace.examples**2, axis=-1)
    sq_mu = np.sum(trace.predictions[1:] ** 2, axis=-1)
    rates = 1.0 / trace.inv_rates
    exact = 0.5 * float(np.sum(rates * sq_x)) - 0.5 * float(np.sum(rates[:-1] * sq_mu))
    log_bound = None
    if eta1_inv > 1:
        log_bound = 0.5 * float(np.max(sq_x)) * math.log1p(trace.T / (eta1_inv - 1.0))
    return exact, log_bound


@dataclass
class GammaChain:
    """Per-trial terms of the Gamma divergence bound, each array of length T."""

    divergence: np.ndarray
    intermediate: np.ndarray
    per_trial_bound: np.ndarray
    ratios: np.ndarray

    def holds(self, slack=1e-12):
        return bool(np.all(self.divergence <= self.intermediate + slack)
                    and np.all(self.intermediate <= self.per_trial_bound + slack))


def gamma_chain(trace):
    if not isinstance(trace.family, Gamma) or trace.family.dim != 1:
        raise NotApplicable("gamma bound needs the one-dimensional Gamma family")
    if trace.mode is not Mode.INCREMENTAL_OFFLINE or not trace.eta_b_inv > 0:
        raise NotApplicable("gamma bound needs incremental mode with finite rates")
    mus = _means(trace)[:, 0]
    x = trace.examples[:, 0]
    inv = trace.inv_rates
    r = x / mus[:-1]
    div = np.array([(inv[t] + 1.0) * divergence_expectation(trace.family, mus[t + 1:t + 2], mus[t:t + 1])
                    for t in range(trace.T)])
    inter = (1.0 - r) ** 2 / (inv + r)
    return GammaChain(divergence=div, intermediate=inter, per_trial_bound=(1.0 - r) ** 2 / inv,
                      ratios=r)


def gamma_bound(trace, slack=1e-12):
    """``(X/Z)^2 * sum of learning rates``, after checking the per-trial chain."""
    chain = gamma_chain(trace)
    if not chain.holds(slack):
        bad = int(np.argmax((chain.divergence > chain.intermediate + slack)
                            | (chain.intermediate > chain.per_trial_bound + slack)))
        raise BoundViolation(f"per-trial gamma chain fails at trial {bad + 1}")
    if trace.T == 0:
        return 0.0
    x = trace.examples[:, 0]
    big = float(np.max(x))
    small = min(float(np.min(x)), float(trace.mu1[0]))
    return (big / small) ** 2 * float(np.sum(1.0 / trace.inv_rates))


def taylor_mean_value_check(family, mu_t, mu_next, tol=1e-9, grid=64):
    """Weight ``lam`` with ``mu~ = lam*mu_t + (1-lam)*mu_next`` solving the
    exact second-order form ``D_F(mu_next, mu_t) = F''(mu~) (mu_next-mu_t)^2 / 2``.
    """
    if family.dim != 1:
        raise ValueError("mean-value check is for one-dimensional families")
    a = family.check_expectation(mu_t)
    b = family.check_expectation(mu_next)
    if a[0] == b[0]:
        raise ValueError("degenerate: equal means, every weight works")
    target = divergence_expectation(family, b, a)
    step = float(b[0] - a[0])

    def residual(lam):
        mid = lam * a + (1.0 - lam) * b
        return float(family.dual_hessian(mid)[0, 0]) * step**2 / 2.0 - target

    if isinstance(family, Gaussian):
        if abs(residual(0.0)) > tol:
            raise ArithmeticError("constant curvature but residual is nonzero")
        return 0.5
    lams = np.linspace(0.0, 1.0, grid + 1)
    vals = np.array([residual(lam) for lam in lams])
    hit = np.flatnonzero(np.abs(vals) <= tol)
    if hit.size:
        return float(lams[hit[0]])
    change = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))
    if not change.size:
        raise ArithmeticError("no sign change of the mean-value residual")
    i = change[0]
    return float(brentq(residual, lams[i], lams[i + 1], xtol=1e-15))


# report -----------------------------------------------------------------------

@dataclass
class Bound:
    value: float
    applicable: bool = True
    holds: bool | None = None


@dataclass
class RegretReport:
    online_total: float
    offline_optimum: float
    regret: float
    identity_residuals: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    scale: float = 1.0

    def identity_passes(self, name, rtol=IDENTITY_RTOL):
        res = self.identity_residuals.get(name)
        return None if res is None else bool(res <= rtol * self.scale)

    def failures(self, rtol=IDENTITY_RTOL):
        """Names of applicable identities whose residual exceeds tolerance."""
        return [name for name in self.identity_residuals if self.identity_passes(name, rtol) is False]

    def bound_failures(self):
        return [name for name, b in self.bounds.items() if b.applicable and b.holds is False]


def regret_report(trace):
    """Regret, identity residuals and every applicable bound for a density trace."""
    family = trace.family
    online = trace.total_loss
    if trace.T == 0 and trace.eta_b_inv == 0:
        return RegretReport(online, 0.0, online)
    offline = offline_objective_value(family, trace.mu1, trace.eta_b_inv, trace.examples)
    regret = online - offline
    residuals = {}
    for name, fn in (("lemma31", verify_lemma_3_1), ("theorem34", verify_theorem_3_4)):
        try:
            residuals[name] = fn(trace)
        except NotApplicable:
            residuals[name] = None
    try:
        residuals["lemma32"] = verify_lemma_3_2(family, trace.mu1, trace.eta_b_inv, trace.examples)
    except NotApplicable:
        residuals["lemma32"] = None

    bounds = {}
    if _is_jeffreys_config(trace):
        total, closed_regret = bernoulli_closed_form(trace)
        residuals["bernoulli_closed_form"] = abs(total - online)
        limit = bernoulli_regret_bound(trace.T)
        bounds["bernoulli_log"] = Bound(limit, True, regret <= limit + 1e-12)
    if isinstance(family, Gaussian) and np.all(trace.mu1 == 0):
        exact, log_bound = gaussian_bound(trace)
        finite = math.isfinite(exact)
        bounds["gaussian_exact"] = Bound(exact, finite, regret <= exact + 1e-9 * max(1.0, abs(exact))
                                         if finite else None)
        if trace.mode is Mode.FORWARD and finite:
            residuals["gaussian_forward_exact"] = abs(regret - exact)
        bounds["gaussian_log"] = Bound(log_bound if log_bound is not None else math.nan,
                                       log_bound is not None,
                                       regret <= log_bound + 1e-12 if log_bound is not None else None)
    if isinstance(family, Gamma) and family.dim == 1:
        try:
            value = gamma_bound(trace)
            bounds["gamma_ratio"] = Bound(value, True, regret <= value + 1e-12)
        except NotApplicable:
            bounds["gamma_ratio"] = Bound(math.nan, False)
        except BoundViolation:
            bounds["gamma_ratio"] = Bound(math.nan, True, False)
    return RegretReport(online, offline, regret, residuals, bounds, scale=max(1.0, abs(online)))
