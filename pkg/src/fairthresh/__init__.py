"""Disparity-controlled binary classification.

The library fits classifiers whose group disparity (demographic difference,
opportunity difference, or predictive-rate difference) is held within a
budget, trading the smallest possible amount of accuracy for it.  Thresholds
come from a closed form indexed by a single scalar; a monotone bisection
finds the scalar that meets the budget exactly.

Module map:

- ``core``: disparity measures, group statistics, the threshold and cost
  formulas, and the shared exception types.
- ``solver``: monotone bisection over disparity curves, frontier tracing,
  and tradeoff bound checks.
- ``discrete``: exact rational solver and brute-force oracle on
  finite-support distributions.
- ``extensions``: equalized odds (two budgets at once) and multi-group
  parity thresholds.
- ``estimators``: datasets, weighted logistic regression, and cell
  statistics.
- ``gaussian``: a synthetic two-group model with closed-form curves for
  calibration and study reproduction.
- ``fair_algorithms``: the three training pipelines (resampling, cost
  reweighting, plug-in thresholding) with group-aware and group-blind
  variants, plus evaluation.
- ``cli``: the ``fairthresh`` command line front end.
"""
from .core import *  # noqa: F401,F403
from .solver import *  # noqa: F401,F403
from .discrete import *  # noqa: F401,F403
from .extensions import *  # noqa: F401,F403
from .estimators import *  # noqa: F401,F403
from .gaussian import *  # noqa: F401,F403
from .fair_algorithms import *  # noqa: F401,F403

from . import cli, core, discrete, estimators, extensions, fair_algorithms, gaussian, solver

__version__ = "0.1.0"

__all__ = [  # noqa: PLE0604
    *core.__all__,
    *solver.__all__,
    *discrete.__all__,
    *extensions.__all__,
    *estimators.__all__,
    *gaussian.__all__,
    *fair_algorithms.__all__,
    "cli",
    "__version__",
]
