"""Exponential families with cumulant G, dual F and the maps between them.

All three families are products of independent coordinates, so every
map acts elementwise on the last axis and the Hessians are diagonal.
Parameters are plain float arrays of shape ``(..., dim)``.
"""

import math

import numpy as np
from scipy.special import expit, logit, xlogy

DOMAIN_EPS = 1e-12


class DomainError(ValueError):
    """A parameter lies outside the family's natural or expectation domain."""


class InputError(ValueError):
    """An observation violates the family's example constraints."""


def _as_param(value, dim):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(dim, float(arr))
    if arr.shape[-1] != dim:
        raise InputError(f"expected trailing dimension {dim}, got shape {arr.shape}")
    return arr


def _diag(values):
    d = values.shape[-1]
    return values[..., :, None] * np.eye(d)


class ExponentialFamily:
    """Base class. Subclasses supply the one-coordinate maps.

    ``_G``/``_g``/``_G2`` act on natural coordinates, ``_F``/``_f``/``_F2``/``_V``
    on expectation coordinates. ``_loss_offset`` is the part of
    ``-ln P0(x)`` that the family keeps inside its loss (the Gaussian keeps
    ``x**2/2`` so its loss is the squared error).
    """

    name = "family"
    natural_domain = "R^d"
    expectation_domain = "R^d"

    def __init__(self, dim=1, eps=DOMAIN_EPS):
        if int(dim) != dim or dim < 1:
            raise ValueError(f"dim must be a positive integer, got {dim!r}")
        self.dim = int(dim)
        self.eps = eps

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"

    def __eq__(self, other):
        return type(self) is type(other) and self.dim == other.dim and self.eps == other.eps

    def __hash__(self):
        return hash((type(self).__name__, self.dim, self.eps))

    # domain checks -------------------------------------------------------

    def _natural_ok(self, theta):
        return np.isfinite(theta)

    def _expectation_ok(self, mu):
        return np.isfinite(mu)

    def _expectation_closure_ok(self, mu):
        return self._expectation_ok(mu)

    def _example_ok(self, x):
        return np.isfinite(x)

    def check_natural(self, theta):
        theta = _as_param(theta, self.dim)
        if not np.all(self._natural_ok(theta)):
            raise DomainError(f"{self.name}: theta={theta} outside {self.natural_domain}")
        return theta

    def check_expectation(self, mu, closure=False):
        mu = _as_param(mu, self.dim)
        ok = self._expectation_closure_ok(mu) if closure else self._expectation_ok(mu)
        if not np.all(ok):
            raise DomainError(f"{self.name}: mu={mu} outside {self.expectation_domain}")
        return mu

    def check_example(self, x):
        x = _as_param(x, self.dim)
        if not np.all(self._example_ok(x)):
            raise InputError(f"{self.name}: invalid example {x}")
        return x

    def in_interior(self, mu):
        return bool(np.all(self._expectation_ok(np.asarray(mu, dtype=float))))

    # public maps ---------------------------------------------------------

    def cumulant(self, theta):
        theta = self.check_natural(theta)
        return np.sum(self._G(theta), axis=-1)

    def link(self, theta):
        """Expectation parameter ``mu = g(theta)``."""
        return self._g(self.check_natural(theta))

    def inverse_link(self, mu):
        """Natural parameter ``theta = f(mu)``; boundary values are rejected."""
        return self._f(self.check_expectation(mu))

    def dual(self, mu):
        mu = self.check_expectation(mu, closure=True)
        return np.sum(self._F(mu), axis=-1)

    def cumulant_hessian(self, theta):
        return _diag(self._G2(self.check_natural(theta)))

    def dual_hessian(self, mu):
        return _diag(self._F2(self.check_expectation(mu)))

    def variance(self, mu):
        return _diag(self._V(self.check_expectation(mu)))

    def loss(self, mu, x, absolute=False):
        """Negative log-likelihood of ``x`` under the mean ``mu``.

        ``mu`` may sit on the closure of the expectation domain, in which
        case the loss can be ``+inf``. With ``absolute=True`` the constant
        part of ``-ln P0`` that every regret quantity cancels is added back.
        """
        mu = self.check_expectation(mu, closure=True)
        x = self.check_example(x)
        value = np.sum(self._loss_mu(mu, x), axis=-1)
        if absolute:
            value = value + self.log_base_constant(x)
        return value

    def loss_natural(self, theta, x):
        theta = self.check_natural(theta)
        x = self.check_example(x)
        return (
            np.sum(self._G(theta), axis=-1)
            - np.sum(theta * x, axis=-1)
            + np.sum(self._loss_offset(x), axis=-1)
        )

    def loss_offset(self, x):
        """The ``-ln P0(x)`` part already included in :meth:`loss`."""
        x = _as_param(x, self.dim)
        return np.sum(self._loss_offset(x), axis=-1)

    def log_base_constant(self, x):
        return np.zeros(np.shape(x)[:-1]) if np.ndim(x) > 1 else 0.0

    def _loss_offset(self, x):
        return np.zeros_like(x)

    def _loss_mu(self, mu, x):
        theta = self._f(mu)
        return self._G(theta) - theta * x + self._loss_offset(x)


class Bernoulli(ExponentialFamily):
    """Coin flips in {0, 1}; ``G(theta) = ln(1 + e^theta)``."""

    name = "bernoulli"
    expectation_domain = "(0,1)^d"

    def _expectation_ok(self, mu):
        return (mu > self.eps) & (mu < 1.0 - self.eps)

    def _expectation_closure_ok(self, mu):
        return (mu >= 0.0) & (mu <= 1.0)

    def _example_ok(self, x):
        return (x == 0.0) | (x == 1.0)

    def _G(self, theta):
        return np.logaddexp(0.0, theta)

    def _g(self, theta):
        return expit(theta)

    def _G2(self, theta):
        p = expit(theta)
        return p * expit(-theta)

    def _f(self, mu):
        return logit(mu)

    def _F(self, mu):
        # xlogy extends F continuously to 0 at mu in {0, 1}
        return xlogy(mu, mu) + xlogy(1.0 - mu, 1.0 - mu)

    def _F2(self, mu):
        return 1.0 / (mu * (1.0 - mu))

    def _V(self, mu):
        return mu * (1.0 - mu)

    def _loss_mu(self, mu, x):
        return -xlogy(x, mu) - xlogy(1.0 - x, 1.0 - mu)


class Gaussian(ExponentialFamily):
    """Unit-variance spherical Gaussian; ``G(theta) = theta.theta / 2``.

    The loss is ``|mu - x|^2 / 2`` (normalisation constant fixed to zero),
    which keeps ``x^2/2`` of ``-ln P0`` inside the loss.
    """

    name = "gaussian"

    def _G(self, theta):
        return 0.5 * theta**2

    def _g(self, theta):
        return theta.copy()

    def _G2(self, theta):
        return np.ones_like(theta)

    _f = _g

    def _F(self, mu):
        return 0.5 * mu**2

    _F2 = _G2
    _V = _G2

    def _loss_offset(self, x):
        return 0.5 * x**2

    def _loss_mu(self, mu, x):
        return 0.5 * (mu - x) ** 2

    def log_base_constant(self, x):
        c = 0.5 * self.dim * math.log(2.0 * math.pi)
        return np.full(np.shape(x)[:-1], c) if np.ndim(x) > 1 else c


class Gamma(ExponentialFamily):
    """Gamma with unit shape (exponential); ``G(theta) = -ln(-theta)``, theta < 0."""

    name = "gamma"
    natural_domain = "(-inf,0)^d"
    expectation_domain = "(0,inf)^d"

    def _natural_ok(self, theta):
        return np.isfinite(theta) & (theta < -self.eps)

    def _expectation_ok(self, mu):
        return np.isfinite(mu) & (mu > self.eps)

    def _example_ok(self, x):
        return np.isfinite(x) & (x > 0.0)

    def _G(self, theta):
        return -np.log(-theta)

    def _g(self, theta):
        return -1.0 / theta

    def _G2(self, theta):
        return 1.0 / theta**2

    def _f(self, mu):
        return -1.0 / mu

    def _F(self, mu):
        return -1.0 - np.log(mu)

    def _F2(self, mu):
        return 1.0 / mu**2

    def _V(self, mu):
        return mu**2

    def _loss_mu(self, mu, x):
        return np.log(mu) + x / mu


FAMILIES = {cls.name: cls for cls in (Bernoulli, Gaussian, Gamma)}


def get_family(name, dim=1):
    try:
        return FAMILIES[name](dim=dim)
    except KeyError:
        raise ValueError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None


# functional aliases matching the operation names

def cumulant(family, theta):
    return family.cumulant(theta)


def link(family, theta):
    return family.link(theta)


def inverse_link(family, mu):
    return family.inverse_link(mu)


def dual(family, mu):
    return family.dual(mu)


def cumulant_hessian(family, theta):
    return family.cumulant_hessian(theta)


def dual_hessian(family, mu):
    return family.dual_hessian(mu)


def variance(family, mu):
    return family.variance(mu)


def loss(family, mu, x, absolute=False):
    return family.loss(mu, x, absolute=absolute)
