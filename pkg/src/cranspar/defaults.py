"""Built-in scenario defaults.

Power values are normalized model parameters, not radio-planning figures:
the fidelity bound depends only on the ratios between the noise floor,
the aggregate data power weighted by link gains, and the per-entry
estimation-error variance.  The noise level of each default is chosen so
that the fractional objective's absolute scale makes the optimizer's
termination threshold meaningful, and the pilot level so that the
estimation error is small next to the gains of the links a sensible
threshold retains (the regime in which the lower bound tracks the
Monte Carlo fidelity).
"""

from __future__ import annotations

# Desk scale: small enough for Monte Carlo curves in seconds to minutes.
DESK_CONFIG = {
    "radius_m": 5000.0,
    "min_distance_m": 10.0,
    "pathloss_exponent": 3.8,
    "num_rrh": 100,
    "num_ue": 80,
    "data_power_dbm": 23.0,
    "pilot_power_dbm": 130.0,
    "noise_power_dbm": -78.5,
    "training_length": 80,
    "estimator": "ls",
    "pilot_kind": "orthogonal",
    "pdf": "disc_approx",
    "delta": 1e-22,
    "n_max": 20,
    "trials": 500,
    "seed": 1234,
}

# Full scale: the headline scenario size.  Monte Carlo at this size is
# hours of compute; the analysis and optimizer paths are instant.
FULL_SCALE_CONFIG = {
    "radius_m": 5000.0,
    "min_distance_m": 10.0,
    "pathloss_exponent": 3.8,
    "num_rrh": 1000,
    "num_ue": 800,
    "data_power_dbm": 23.0,
    "pilot_power_dbm": -13.0,
    "noise_power_dbm": 90.0,
    "training_length": 800,
    "estimator": "ls",
    "pilot_kind": "orthogonal",
    "pdf": "disc_approx",
    "delta": 1e-4,
    "n_max": 20,
    "trials": 1000,
    "seed": 1,
}
