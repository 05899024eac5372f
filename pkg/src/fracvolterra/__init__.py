"""Pathwise solvers, sup-norm bounds and Malliavin diagnostics for Volterra
equations driven by fractional Brownian motion with H > 1/2."""

__version__ = "0.1.0"

from .errors import (CalibrationFailureError, ConfigError, DegenerateInputError,
                     FracVolterraError, InvalidArgumentError, NumericFailureError,
                     NumericOverflowError)
from .grid import (NormKind, SampledPath, TimeGrid, holder_norm, make_uniform_grid, path_norm,
                   sup_norm, w_1malpha_2_norm, w_alpha_1_norm)
from .fbm import covariance_rh, h_inner_product, kernel_kh, sample_fbm
from .fraccalc import frac_deriv_left, frac_deriv_right, rs_integral_forpart, rs_integral_sums
from .volterra import (CoefficientSet, HypothesisConstants, SensitivityField, frechet_direction,
                       solve_linear_z, solve_sensitivity_field, solve_svie)
from .families import build_family
from .bounds import BoundKind, BoundParams, b0_alpha, calibrate_constant, eval_bound, scaling_experiment
from .malliavin import (ellipticity_check, fd_gradient_check, gamma_spectrum, kde_density,
                        malliavin_field, malliavin_matrix)
