"""On-line density estimation with exponential families and on-line linear
regression, with exact regret bookkeeping."""

from .bregman import divergence_expectation, divergence_natural
from .families import Bernoulli, DomainError, Gamma, Gaussian, InputError, get_family
from .online import Mode, run
from .regret import regret_report
from .regression import reg_regret_report, reg_run

__all__ = ["Bernoulli", "DomainError", "Gamma", "Gaussian", "InputError", "Mode",
           "divergence_expectation", "divergence_natural", "get_family", "reg_regret_report",
           "reg_run", "regret_report", "run"]
__version__ = "0.1.0"
