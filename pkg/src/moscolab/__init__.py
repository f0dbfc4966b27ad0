"""Numerical laboratory for Mosco convergence and path properties of Dirichlet forms.

Submodules: ``coeffs`` (coefficient families), ``levy`` (exponents),
``classify`` (integral tests), ``forms`` (grid discretisations), ``mosco``
(resolvent and semigroup convergence) and ``cli`` (scenario runner).
"""

from .classify import (PathClassification, TailVerdict, at_infinity, at_zero, classify_chung_fuchs,
                       classify_recurrence_u04, classify_sharp_epsilon, classify_tail, feller_explosion_test)
from .coeffs import (DiffusionCoefficient, JumpKernel, OrderFunction, l1_local_distance, make_prop15_coefficient,
                     make_prop18_kernel, make_sharp_log_order)
from .forms import Grid1D, GridForm, assemble_diffusion, assemble_jump, assemble_multiplier, energy
from .levy import LevyExponent, eval_exponent
from .mosco import ConvergenceReport, mosco_diagnostic, resolvent, run_mosco, semigroup_apply

__version__ = "0.1.0"

__all__ = [
    "ConvergenceReport", "DiffusionCoefficient", "Grid1D", "GridForm", "JumpKernel", "LevyExponent",
    "OrderFunction", "PathClassification", "TailVerdict", "assemble_diffusion", "assemble_jump",
    "assemble_multiplier", "at_infinity", "at_zero", "classify_chung_fuchs", "classify_recurrence_u04",
    "classify_sharp_epsilon", "classify_tail", "energy", "eval_exponent", "feller_explosion_test",
    "l1_local_distance", "make_prop15_coefficient", "make_prop18_kernel", "make_sharp_log_order",
    "mosco_diagnostic", "resolvent", "run_mosco", "semigroup_apply",
]
