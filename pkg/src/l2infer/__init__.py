"""L2-norm inference for high-dimensional mean vectors and covariance matrices."""

from .calibrate import CalibrationSpec, TestReport, plugin_quantile, subsample_cdf, test_mean
from .covtest import GammaMatrix, gamma_linear, statistic_tilde_Tn, statistic_Tn, test_cov
from .datagen import (GaussianModel, Innovation, LinearModel, Model1, Model2,
                      SparseBernoulliModel)
from .diagnostics import MomentDiagnostics, diagnose, solve_psi_n
from .errors import CalibrationLimitError, DegenerateEstimateError, L2InferError, QuadratureError
from .estimate import f_dagger, f1_hat
from .mixture import EmpiricalCdf, MixtureLaw, mixture_cdf, mixture_quantile, sample_mixture
from .spectral import Spectrum, functional_f_k, spectrum_of
from .stats import l2_statistic, statistic_hat_Rn, statistic_Rn, statistic_tilde_Rn

__version__ = "0.1.0"
