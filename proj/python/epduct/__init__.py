"""Supersonic Euler-Poisson potential flow in a 3D rectangular duct."""

from ._core import (  # noqa: F401
    BackgroundParams,
    BackgroundSolution,
    ConfigError,
    CrossSectionBasis,
    DuctGrid,
    GasLaw,
    OrbitClass,
    Regime,
    RunConfig,
    SolverError,
    SonicError,
    VacuumError,
    classify_orbit,
    coeff_A,
    coeff_B,
    density,
    density_partials,
    eigenpair,
    enthalpy,
    h_potential,
    integrate,
    integrate_at,
    mms_errors,
    parse_config_file,
    regime,
    run_command,
    smooth_field,
    solve_weights,
    sound_speed_sq,
    __version__,
)
