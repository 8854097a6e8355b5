"""Generalization-bound laboratory.

Exact and Monte Carlo evaluation of information measures, stability
constants and the generalization bounds built from them, on small
discrete learning problems.
"""
from ._kernels import BACKEND
from .bounds import BoundReport, collect_inputs, evaluate_bounds
from .core import BudgetExceeded, DiscreteDistribution, Mask, Sample, Supersample
from .information import JointTable, quantity
from .problems import build_problem
from .risk import gen_error_standard
from .stability import stability_report

__all__ = [
    "BACKEND",
    "BoundReport",
    "BudgetExceeded",
    "DiscreteDistribution",
    "JointTable",
    "Mask",
    "Sample",
    "Supersample",
    "build_problem",
    "collect_inputs",
    "evaluate_bounds",
    "gen_error_standard",
    "quantity",
    "stability_report",
]
