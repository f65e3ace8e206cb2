"""Doppler spread estimation for comb-pilot OFDM.

Simulates doubly-selective Rayleigh fading channels and recovers the
maximum Doppler spread from streaming LS pilot estimates by tracking
the delay subspace of lagged autocorrelation matrices and inverting a
series polynomial in the correlation ratio.
"""

from .channel import (ChannelProfile, FadingRealization, OfdmGeometry,
                      eval_path_gain, make_fading, time_avg_cfr)
from .frontend import PilotSnapshot, ls_observe
from .numerics import (DopplerPolynomial, NewtonConfig, SeriesParams,
                       bessel_j0, doppler_from_root, newton_solve,
                       poly_coeffs, xi0_series, xi_beta_series, xi_exact)
from .tracker import (DopplerEstimate, TrackerConfig, TrackerState,
                      eta_estimate, mdl_order, noise_floor, step,
                      update_lag0, update_lagbeta)
from .harness import Scenario, TrialResult, emit_csv, run_grid, run_trial

__version__ = "0.1.0"

__all__ = [
    "ChannelProfile", "FadingRealization", "OfdmGeometry",
    "eval_path_gain", "make_fading", "time_avg_cfr",
    "PilotSnapshot", "ls_observe",
    "DopplerPolynomial", "NewtonConfig", "SeriesParams",
    "bessel_j0", "doppler_from_root", "newton_solve", "poly_coeffs",
    "xi0_series", "xi_beta_series", "xi_exact",
    "DopplerEstimate", "TrackerConfig", "TrackerState",
    "eta_estimate", "mdl_order", "noise_floor", "step",
    "update_lag0", "update_lagbeta",
    "Scenario", "TrialResult", "emit_csv", "run_grid", "run_trial",
    "__version__",
]
