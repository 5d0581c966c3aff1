"""Bregman divergences of the cumulant and of its dual."""

import numpy as np

# below this separation the divergence is evaluated by its quadratic term
NEAR_EQUAL = 1e-8


def divergence_natural(family, theta_new, theta_old):
    """``G(theta_new) - G(theta_old) - (theta_new - theta_old) . g(theta_old)``."""
    theta_new = family.check_natural(theta_new)
    theta_old = family.check_natural(theta_old)
    delta = theta_new - theta_old
    if np.linalg.norm(delta) < NEAR_EQUAL:
        return 0.5 * float(delta @ family.cumulant_hessian(theta_old) @ delta)
    value = (
        family.cumulant(theta_new)
        - family.cumulant(theta_old)
        - float(delta @ family.link(theta_old))
    )
    return max(float(value), 0.0)


def divergence_expectation(family, mu_a, mu_b):
    """``F(mu_a) - F(mu_b) - (mu_a - mu_b) . f(mu_b)``.

    Equals ``divergence_natural(f(mu_b), f(mu_a))``. ``mu_a`` may lie on the
    closure of the expectation domain (the Bernoulli dual extends there).
    """
    mu_a = family.check_expectation(mu_a, closure=True)
    mu_b = family.check_expectation(mu_b)
    delta = mu_a - mu_b
    if np.linalg.norm(delta) < NEAR_EQUAL:
        return 0.5 * float(delta @ family.dual_hessian(mu_b) @ delta)
    value = family.dual(mu_a) - family.dual(mu_b) - float(delta @ family.inverse_link(mu_b))
    return max(float(value), 0.0)
