"""IRS-assisted true-velocity estimation.

Config-taking helpers accept a dict (same layout as the CLI JSON config) or None.
"""

import json

from . import _core
from ._core import (
    ConfigError,
    Error,
    EstimationError,
    GeometryError,
    InputError,
    angles_from_positions,
    coarse_estimate,
    coarse_grid,
    decompose,
    doppler_pair,
    doppler_steering,
    esprit,
    mode,
    radial_velocity_no_irs,
    recover_velocity,
    root_music,
    sample_covariance,
    steering_bs,
)

__all__ = [
    "ConfigError", "Error", "EstimationError", "GeometryError", "InputError",
    "angles_from_positions", "coarse_estimate", "coarse_grid", "decompose", "default_config",
    "doppler_pair", "doppler_steering", "esprit", "mode", "radial_velocity_no_irs",
    "recover_velocity", "root_music", "run_trial", "sample_covariance", "steering_bs",
    "sweep", "trial_nmse",
]


def _text(config):
    return "" if config is None else json.dumps(config)


def default_config():
    return json.loads(_core.default_config())


def run_trial(config=None, index=0):
    return json.loads(_core.run_trial(_text(config), index))


def trial_nmse(config=None, workers=1):
    return _core.trial_nmse(_text(config), workers)


def sweep(axis, values, methods=("mode",), config=None, workers=1):
    return _core.sweep(_text(config), axis, list(values), list(methods), workers)
