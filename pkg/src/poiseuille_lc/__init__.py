"""Numerical laboratory for nematic liquid crystal flow between parallel plates.

The package simulates the coupled system of a velocity field obeying a
quasilinear heat equation and a director angle obeying a damped quasilinear
wave equation, constructs initial data whose forward-moving Riemann invariant
develops a cusp in finite time, and provides the diagnostics (energy budget,
bounded-flux combination, characteristic tracing) used to verify that picture
at desk scale.
"""

from .diagnostics import (
    BlowupReport,
    CharacteristicTrace,
    CuspSignature,
    DiagnosticsRecord,
    blowup_bound_T,
    compute_J,
    cusp_signature,
    detect_blowup,
    dissipation,
    energy,
    trace_characteristic,
)
from .harness import (
    ConfigError,
    RefinementResult,
    RunConfig,
    ScenarioResult,
    SweepResult,
    epsilon_sweep,
    parse_config,
    parse_material,
    refinement_study,
    render_config,
    run_scenario,
)
from .initial_data import (
    InitialDataReport,
    InitialDataSpec,
    amplitude_threshold,
    auto_amplitude,
    build_initial_state,
    build_smooth_state,
)
from .material import (
    LeslieMaterial,
    MaterialBounds,
    Preset,
    PRESETS,
    ValidationReport,
    b_of,
    bounds_of,
    c_of,
    c_prime_of,
    damping_of,
    g_of,
    h_of,
    h_of_rotational,
    hg_sup,
    preset,
    validate,
    wave_coefficients,
)
from .solver import (
    Grid,
    RunResult,
    SolverConfig,
    State,
    cfl_dt,
    heat_substep,
    run,
    step,
    wave_substep,
)

__all__ = [
    "BlowupReport",
    "CharacteristicTrace",
    "ConfigError",
    "CuspSignature",
    "DiagnosticsRecord",
    "Grid",
    "InitialDataReport",
    "InitialDataSpec",
    "LeslieMaterial",
    "MaterialBounds",
    "Preset",
    "PRESETS",
    "RefinementResult",
    "RunConfig",
    "RunResult",
    "ScenarioResult",
    "SolverConfig",
    "State",
    "SweepResult",
    "ValidationReport",
    "amplitude_threshold",
    "auto_amplitude",
    "b_of",
    "blowup_bound_T",
    "bounds_of",
    "build_initial_state",
    "build_smooth_state",
    "c_of",
    "c_prime_of",
    "cfl_dt",
    "compute_J",
    "cusp_signature",
    "damping_of",
    "detect_blowup",
    "dissipation",
    "energy",
    "epsilon_sweep",
    "g_of",
    "h_of",
    "h_of_rotational",
    "heat_substep",
    "hg_sup",
    "parse_config",
    "parse_material",
    "preset",
    "refinement_study",
    "render_config",
    "run",
    "run_scenario",
    "step",
    "trace_characteristic",
    "validate",
    "wave_coefficients",
    "wave_substep",
]
