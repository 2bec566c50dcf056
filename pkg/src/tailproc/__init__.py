"""Estimation of the spectral tail process of heavy-tailed time series."""

from .asymvar import (example_law, limit_covariances, var_backward, var_forward,
                      var_projection_hat, var_projection_known, variance_table)
from .bench import (BenchConfig, BenchReport, run_bench, single_series_sn_plot,
                    sweep_block_length, sweep_threshold)
from .estimators import (Absolute, CdfReport, EstimatorConfig, Quantile, Series, backward,
                         backward_cdf, cdf_curve, forward, hill, projection, projection_hat,
                         threshold)
from .exceptions import *  # noqa: F401,F403
from .models import ModelSpec, mc_true_cdf, pre_asymptotic_cdf, sample_tail_theta, simulate
from .rs import is_rs_invariant, rs_transform, time_change_residual, tv_distance
from .spectral import IntervalSet, Path, SpectralLaw, alpha_norm, marginal_prob, shift_scale

__version__ = "0.1.0"
