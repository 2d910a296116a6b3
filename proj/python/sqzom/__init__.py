"""Squeezed-drive cavity optomechanics toolkit.

Thin Python layer over the native ``_sqzom`` extension. Frequencies passed
in and out are in Hz; rates stored in :class:`SystemParams` are angular
(rad/s).
"""

from ._sqzom import (
    ConfigError,
    DomainError,
    DriveState,
    Error,
    FitError,
    NoiseBudget,
    QuadCovariance,
    SystemParams,
    budget,
    bundled_params,
    cooled_occupancy,
    drive_covariance,
    eta_det_om_predicted,
    fit_squeezing,
    load_params,
    log_grid,
    minimize_added_noise,
    offset_grid,
    output_psd,
    parse_params,
    run_cli,
    simulate_phase_sweep,
    simulate_psd,
    variance_to_db,
    weighted_cooperativity,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "DriveState",
    "Error",
    "FitError",
    "NoiseBudget",
    "QuadCovariance",
    "SystemParams",
    "budget",
    "bundled_params",
    "cooled_occupancy",
    "drive_covariance",
    "eta_det_om_predicted",
    "fit_squeezing",
    "load_params",
    "log_grid",
    "minimize_added_noise",
    "offset_grid",
    "output_psd",
    "parse_params",
    "run_cli",
    "simulate_phase_sweep",
    "simulate_psd",
    "variance_to_db",
    "weighted_cooperativity",
    "sweep",
]


def sweep(r, params=None, c_min=1.0, c_max=1000.0, points=61):
    """Noise budgets of the three drive families over a log-spaced C grid.

    Returns a dict mapping family name to a list of NoiseBudget.
    """
    import math

    params = params if params is not None else bundled_params()
    grid = log_grid(c_min, c_max, points)
    families = {
        "unsqueezed": lambda c: DriveState.coherent(c),
        "amplitude_squeezed": lambda c: DriveState(r, 0.0, c),
        "phase_squeezed": lambda c: DriveState(r, math.pi, c),
    }
    return {name: [budget(make(c), params) for c in grid] for name, make in families.items()}
