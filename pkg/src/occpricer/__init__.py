"""Occupation-time option pricing under a mixed-exponential jump-diffusion."""

from .errors import *  # noqa: F401,F403
from .model import (MEJDParams, ValidationReport, density_at, kou, levy_exponent, risk_neutral,
                    risk_neutral_drift, trend, validate)
from .roots import RootSet, characteristic_polynomial, find_roots
from .exit_problems import BoundaryFunctional, ExitCoefficients, down_passage, two_sided_exit, up_passage
from .occupation import (OccupationSystem, PiecewiseExpSum, build_system, cauchy_determinant,
                         interval_occupation_transform, residual_check,
                         single_barrier_occupation_transform, two_barrier_occupation_transform)
from .inversion import InversionConfig, invert_carson, invert_double
from .pricing import (DoubleStepCall, QuantileCall, StepCall, double_step_double_transform, price,
                      quantile_double_transform, step_double_transform, vanilla_price)

__version__ = "0.1.0"
