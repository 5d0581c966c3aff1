"""Bayes-mixture loss ``-(1/eta) ln E_prior[exp(-eta L_{1..T})]`` by quadrature.

The integral is taken over the expectation parameter. The log-integrand is
shifted by its maximum before exponentiating, so long sequences do not
underflow; the shift is added back outside the logarithm.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import betaln

from .families import Bernoulli, Gaussian

QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-12


class QuadratureError(ArithmeticError):
    pass


@dataclass(frozen=True)
class PriorSpec:
    kind: str
    a: float
    b: float

    def __post_init__(self):
        if self.kind not in ("beta", "gaussian"):
            raise ValueError(f"unknown prior kind {self.kind!r}")
        if not (self.b > 0 and (self.kind == "gaussian" or self.a > 0)):
            raise ValueError(f"invalid prior parameters {self}")

    @classmethod
    def beta(cls, a, b):
        return cls("beta", float(a), float(b))

    @classmethod
    def gaussian(cls, mean, var):
        return cls("gaussian", float(mean), float(var))


JEFFREYS = PriorSpec.beta(0.5, 0.5)


def _total_loss(family, mu, xs):
    """Loss of each mean in ``mu`` (shape (n,)) summed over the examples in order."""
    return np.sum(family._loss_mu(mu[:, None], xs[None, :, 0]), axis=1)


def _log_integrate(log_f, lo, hi, grid_points=2001):
    nodes = np.linspace(lo, hi, grid_points)
    vals = log_f(nodes)
    shift = float(np.max(vals[np.isfinite(vals)]))
    peaks = nodes[np.argsort(vals)[-1:]]

    def f(u):
        return float(np.exp(log_f(np.array([u]))[0] - shift))

    value, err = integrate.quad(f, lo, hi, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL,
                                limit=500, points=list(peaks) if lo < peaks[0] < hi else None)
    if not (math.isfinite(value) and value > 0):
        raise QuadratureError(f"quadrature gave {value} (error estimate {err}); integral diverges or underflows")
    return shift + math.log(value), err / value


def mixture_bound(family, prior, eta, examples):
    """Right-hand side of the summed mixture inequality for ``examples``."""
    if family.dim != 1:
        raise ValueError("mixture bound is implemented for one-dimensional families")
    if not eta > 0:
        raise ValueError("eta must be positive")
    xs = np.asarray(examples, dtype=float).reshape(-1, 1)
    for x in xs:
        family.check_example(x)

    if isinstance(family, Bernoulli):
        if prior.kind != "beta":
            raise ValueError("Bernoulli mixtures take a beta prior")
        a, b = prior.a, prior.b
        log_norm = -betaln(a, b)

        # mu = sin^2(phi) removes the endpoint singularity of the beta density
        def log_f(phi):
            s, c = np.sin(phi), np.cos(phi)
            mu = s * s
            with np.errstate(divide="ignore", invalid="ignore"):
                out = (log_norm + math.log(2.0) + (2 * a - 1) * np.log(s) + (2 * b - 1) * np.log(c)
                       - eta * _total_loss(family, mu, xs))
            return np.where(np.isnan(out), -np.inf, out)

        log_int, _ = _log_integrate(log_f, 0.0, 0.5 * math.pi)
    elif isinstance(family, Gaussian):
        if prior.kind != "gaussian":
            raise ValueError("Gaussian mixtures take a gaussian prior")
        m, var = prior.a, prior.b
        precision = 1.0 / var + eta * len(xs)
        mode = (m / var + eta * float(np.sum(xs))) / precision
        half_width = 40.0 / math.sqrt(precision)

        def log_f(mu):
            return (-0.5 * math.log(2 * math.pi * var) - 0.5 * (mu - m) ** 2 / var
                    - eta * _total_loss(family, mu, xs))

        log_int, _ = _log_integrate(log_f, mode - half_width, mode + half_width)
    else:
        raise ValueError(f"mixture bound not supported for {family.name}")
    return -log_int / eta


def gaussian_mixture_closed_form(prior, eta, examples):
    """Exact value for a Gaussian prior, for cross-checking the quadrature."""
    xs = np.asarray(examples, dtype=float).reshape(-1)
    m, var = prior.a, prior.b
    n = len(xs)
    precision = 1.0 / var + eta * n
    mode = (m / var + eta * xs.sum()) / precision
    log_int = (-0.5 * math.log(var * precision)
               - 0.5 * (m * m / var + eta * float(xs @ xs) - precision * mode * mode))
    return -log_int / eta


def permutation_invariance_check(family, prior, eta, examples):
    """Spread of the mixture value over every ordering of ``examples``."""
    xs = [tuple(np.atleast_1d(x)) for x in np.asarray(examples, dtype=float)]
    if len(xs) > 8:
        raise ValueError("permutation check enumerates orderings; keep T <= 8")
    values = [mixture_bound(family, prior, eta, np.array(p)) for p in set(itertools.permutations(xs))]
    return max(values) - min(values)
