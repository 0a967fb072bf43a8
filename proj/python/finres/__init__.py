"""Quantum transport across a 1D lattice coupled to finite thermal reservoirs.

The heavy lifting lives in the compiled extension ``finres._core``; this
package re-exports its public surface.
"""

from finres._core import (
    EffSpectrum,
    EquilibriumResult,
    ExponentialFit,
    HarmonicTrap3D,
    LatticeConfig,
    NessState,
    RateEstimate,
    ReservoirModel,
    ShortTimeElement,
    ShortTimeSeries,
    Statistics,
    alpha_approx,
    alpha_exact,
    equilibrium_solve,
    fit_exponential,
    heff_spectrum,
    log_time_grid,
    metastable_state,
    mu_for_occupation,
    ness,
    occupation,
    occupation_dmu,
    polylog,
    short_time_series,
    simulate,
    simulate_stationary,
    tau_rel_scaling,
)

__all__ = [
    "EffSpectrum",
    "EquilibriumResult",
    "ExponentialFit",
    "HarmonicTrap3D",
    "LatticeConfig",
    "NessState",
    "RateEstimate",
    "ReservoirModel",
    "ShortTimeElement",
    "ShortTimeSeries",
    "Statistics",
    "alpha_approx",
    "alpha_exact",
    "equilibrium_solve",
    "fit_exponential",
    "heff_spectrum",
    "log_time_grid",
    "metastable_state",
    "mu_for_occupation",
    "ness",
    "occupation",
    "occupation_dmu",
    "polylog",
    "short_time_series",
    "simulate",
    "simulate_stationary",
    "tau_rel_scaling",
]
