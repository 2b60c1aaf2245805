"""Config-driven front end: scenario runs, epsilon sweeps, refinement studies.

Configs are line-oriented ``key = value`` text with optional ``[section]``
headers and ``#`` comments.  Section headers are validated against the known
set but carry no semantics: every key name is unique across sections, so keys
may appear at top level (``preset = general`` alone is a complete config).
Unknown keys, unknown sections and malformed values are rejected with the
offending line number.  ``auto`` resolves the amplitude through the blowup
threshold machinery, the stop time through the theorem bound, and the sup|S|
trigger through the initial data.

Artifacts per scenario run, all deterministic (same resolved config, same
bytes):

    timeseries.csv       t, E, D, sup_abs_S, sup_abs_R, sup_abs_J,
                         xi, S_on_xi, tildeS_on_xi
    snapshots/NNNN.csv   x, theta, u, R, S, J, theta_x, theta_t
    blowup_report.txt    flat key=value block
    resolved_config.txt  full effective config; re-parsing it reproduces the
                         run exactly
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

import numpy as np

from . import diagnostics, initial_data, material as material_mod, solver
from .initial_data import InitialDataSpec, build_initial_state, build_smooth_state
from .material import LeslieMaterial, bounds_of, preset as preset_of, validate
from .solver import Grid, RunResult, SolverConfig, run


class ConfigError(ValueError):
    """Malformed or contradictory run configuration."""


_SECTIONS = ("material", "initial_data", "grid", "solver", "output")

# key -> (section, default as config text; None = required/conditional)
_KEYS = {
    "preset": ("material", None),
    "alpha1": ("material", None),
    "alpha2": ("material", None),
    "alpha3": ("material", None),
    "alpha4": ("material", None),
    "alpha5": ("material", None),
    "alpha6": ("material", None),
    "gamma1": ("material", None),
    "gamma2": ("material", None),
    "K1": ("material", None),
    "K3": ("material", None),
    "epsilon": ("initial_data", "0.05"),
    "theta_star": ("initial_data", repr(math.pi / 4)),
    "amplitude": ("initial_data", "auto"),
    "amplitude_slack": ("initial_data", "1.1"),
    "check_hypotheses": ("initial_data", "true"),
    "x_min": ("grid", "-4.0"),
    "x_max": ("grid", "5.0"),
    "nx": ("grid", "32769"),
    "cfl": ("solver", "0.4"),
    "t_end": ("solver", "auto"),
    "blowup_threshold": ("solver", "auto"),
    "blowup_factor": ("solver", "50.0"),
    "gradient_resolution_factor": ("solver", "8.0"),
    "heat_implicitness": ("solver", "0.5"),
    "snapshot_stride": ("solver", "0"),
    "trace_stride": ("solver", "1"),
    "trace_start_x": ("solver", "0.0"),
    "output_dir": ("output", "poiseuille-out"),
}

_MATERIAL_FIELDS = ("alpha1", "alpha2", "alpha3", "alpha4", "alpha5", "alpha6",
                    "gamma1", "gamma2", "K1", "K3")


@dataclass(frozen=True)
class RunConfig:
    """A fully resolved scenario: material, data, grid, stepping, output."""

    preset: str | None
    material: LeslieMaterial
    spec: InitialDataSpec
    check_hypotheses: bool
    grid: Grid
    solver: SolverConfig
    output_dir: str
    expects_blowup: bool | None  # None when the material was given explicitly


def _parse_lines(text: str) -> dict[str, tuple[str, int]]:
    """Raw key -> (value, line number) mapping with grammar validation."""
    seen: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SECTIONS:
                raise ConfigError(f"line {lineno}: unknown section [{section}]; "
                                  f"expected one of {', '.join(_SECTIONS)}")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} "
                              f"(first set on line {seen[key][1]})")
        seen[key] = (value, lineno)
    return seen


def _get_float(raw, key, lo=None, hi=None, lo_open=False):
    value, lineno = raw[key]
    where = f"line {lineno}" if lineno > 0 else "override"
    try:
        x = float(value)
    except ValueError:
        raise ConfigError(f"{where}: {key} must be a number, got {value!r}") from None
    if not math.isfinite(x):
        raise ConfigError(f"{where}: {key} must be finite, got {value}")
    if lo is not None and (x <= lo if lo_open else x < lo):
        cmp = ">" if lo_open else ">="
        raise ConfigError(f"{where}: {key} must be {cmp} {lo}, got {x}")
    if hi is not None and x > hi:
        raise ConfigError(f"{where}: {key} must be <= {hi}, got {x}")
    return x


def _get_int(raw, key, lo):
    value, lineno = raw[key]
    where = f"line {lineno}" if lineno > 0 else "override"
    try:
        n = int(value)
    except ValueError:
        raise ConfigError(f"{where}: {key} must be an integer, got {value!r}") from None
    if n < lo:
        raise ConfigError(f"{where}: {key} must be >= {lo}, got {n}")
    return n


def _get_bool(raw, key):
    value, lineno = raw[key]
    low = value.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ConfigError(f"line {lineno}: {key} must be true or false, got {value!r}")


def _raw_entries(text: str, overrides: dict[str, str] | None):
    raw = _parse_lines(text)
    if overrides:
        for key, value in overrides.items():
            if key not in _KEYS:
                raise ConfigError(f"override: unknown key {key!r}")
            raw[key] = (str(value), 0)
    return raw


def _resolve_material(raw) -> tuple[str | None, LeslieMaterial, bool | None]:
    """Preset-or-explicit-block resolution, shared by full and material-only parses."""
    preset_name = None
    expects = None
    if "preset" in raw:
        name, lineno = raw["preset"]
        where = f"line {lineno}" if lineno > 0 else "override"
        extra = sorted(k for k in _MATERIAL_FIELDS if k in raw)
        if extra:
            raise ConfigError(f"{where}: preset = {name} conflicts with explicit "
                              f"material keys {', '.join(extra)}")
        try:
            chosen = preset_of(name)
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None
        preset_name = chosen.name
        mat = chosen.material
        expects = chosen.expects_blowup
        if chosen.name == "constant-speed":
            # the control preset runs fixed low-amplitude data: the quadratic
            # focusing term is absent, so the theorem thresholds do not apply
            raw.setdefault("amplitude", ("5", 0))
            raw.setdefault("check_hypotheses", ("false", 0))
    else:
        missing = sorted(k for k in _MATERIAL_FIELDS if k not in raw)
        if missing:
            raise ConfigError("config needs either 'preset' or a full material block; "
                              f"missing: {', '.join(missing)}")
        mat = LeslieMaterial(*(_get_float(raw, k) for k in _MATERIAL_FIELDS))
    return preset_name, mat, expects


def parse_material(text: str, overrides: dict[str, str] | None = None) -> LeslieMaterial:
    """Resolve only the material from config text, skipping run-key resolution.

    Full parsing derives defaults (auto amplitude, default stop time) from the
    coefficient bounds, which raise on a material that fails the Leslie
    relations; this path lets `validate` still report on such a material.
    """
    return _resolve_material(_raw_entries(text, overrides))[1]


def parse_config(text: str, overrides: dict[str, str] | None = None) -> RunConfig:
    """Resolve config text (plus optional key -> value overrides) to a RunConfig.

    Overrides behave like lines appended with line number 0 (reported as
    "override" in errors) and take precedence over the file.
    """
    raw = _raw_entries(text, overrides)
    preset_name, mat, expects = _resolve_material(raw)

    for key, (_, default) in _KEYS.items():
        if default is not None:
            raw.setdefault(key, (default, -1))

    epsilon = _get_float(raw, "epsilon", lo=0.0, lo_open=True, hi=1.0)
    theta_star = _get_float(raw, "theta_star")
    slack = _get_float(raw, "amplitude_slack", lo=1.0)
    check = _get_bool(raw, "check_hypotheses")

    amp_text, amp_line = raw["amplitude"]
    if amp_text.lower() == "auto":
        amplitude = float(initial_data.auto_amplitude(mat, theta_star, slack=slack))
    else:
        amplitude = _get_float(raw, "amplitude", lo=0.0, lo_open=True)
    spec = InitialDataSpec(epsilon=epsilon, theta_star=theta_star, amplitude=amplitude,
                           amplitude_slack=slack)

    grid = Grid(x_min=_get_float(raw, "x_min"), x_max=_get_float(raw, "x_max"),
                nx=_get_int(raw, "nx", lo=3))

    t_text, _ = raw["t_end"]
    if t_text.lower() == "auto":
        t_end = min(1.0, 1.2 * diagnostics.blowup_bound_T(mat))
    else:
        t_end = _get_float(raw, "t_end", lo=0.0, lo_open=True)
    thr_text, _ = raw["blowup_threshold"]
    threshold = None if thr_text.lower() == "auto" else _get_float(raw, "blowup_threshold",
                                                                   lo=0.0, lo_open=True)
    try:
        solver_cfg = SolverConfig(
            cfl=_get_float(raw, "cfl"),
            t_end=t_end,
            blowup_threshold=threshold,
            blowup_factor=_get_float(raw, "blowup_factor", lo=0.0, lo_open=True),
            gradient_resolution_factor=_get_float(raw, "gradient_resolution_factor"),
            heat_implicitness=_get_float(raw, "heat_implicitness"),
            snapshot_stride=_get_int(raw, "snapshot_stride", lo=0),
            trace_stride=_get_int(raw, "trace_stride", lo=0),
            trace_start_x=_get_float(raw, "trace_start_x"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    return RunConfig(
        preset=preset_name,
        material=mat,
        spec=spec,
        check_hypotheses=check,
        grid=grid,
        solver=solver_cfg,
        output_dir=raw["output_dir"][0],
        expects_blowup=expects,
    )


def render_config(config: RunConfig) -> str:
    """The resolved config as text; parse_config(render_config(c)) == c."""
    lines = ["[material]"]
    if config.preset is not None:
        lines.append(f"preset = {config.preset}")
    else:
        for key in _MATERIAL_FIELDS:
            lines.append(f"{key} = {getattr(config.material, key)!r}")
    lines += [
        "",
        "[initial_data]",
        f"epsilon = {config.spec.epsilon!r}",
        f"theta_star = {config.spec.theta_star!r}",
        f"amplitude = {config.spec.amplitude!r}",
        f"amplitude_slack = {config.spec.amplitude_slack!r}",
        f"check_hypotheses = {'true' if config.check_hypotheses else 'false'}",
        "",
        "[grid]",
        f"x_min = {config.grid.x_min!r}",
        f"x_max = {config.grid.x_max!r}",
        f"nx = {config.grid.nx}",
        "",
        "[solver]",
        f"cfl = {config.solver.cfl!r}",
        f"t_end = {config.solver.t_end!r}",
    ]
    if config.solver.blowup_threshold is None:
        lines.append("blowup_threshold = auto")
    else:
        lines.append(f"blowup_threshold = {config.solver.blowup_threshold!r}")
    lines += [
        f"blowup_factor = {config.solver.blowup_factor!r}",
        f"gradient_resolution_factor = {config.solver.gradient_resolution_factor!r}",
        f"heat_implicitness = {config.solver.heat_implicitness!r}",
        f"snapshot_stride = {config.solver.snapshot_stride}",
        f"trace_stride = {config.solver.trace_stride}",
        f"trace_start_x = {config.solver.trace_start_x!r}",
        "",
        "[output]",
        f"output_dir = {config.output_dir}",
        "",
    ]
    return "\n".join(lines)


# --- artifact emission ---------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _snapshot_rows(state, mat: LeslieMaterial, grid: Grid):
    x = grid.nodes()
    J = diagnostics.compute_J(state, mat, grid)
    theta_x = 0.5 * (state.R - state.S) / material_mod.c_of(mat, state.theta)
    theta_t = state.theta_t
    for i in range(grid.nx):
        yield [_fmt(x[i]), _fmt(state.theta[i]), _fmt(state.u[i]), _fmt(state.R[i]),
               _fmt(state.S[i]), _fmt(J[i]), _fmt(theta_x[i]), _fmt(theta_t[i])]


_SNAPSHOT_HEADER = ["x", "theta", "u", "R", "S", "J", "theta_x", "theta_t"]
_TIMESERIES_HEADER = ["t", "E", "D", "sup_abs_S", "sup_abs_R", "sup_abs_J",
                      "xi", "S_on_xi", "tildeS_on_xi"]


def write_artifacts(config: RunConfig, result: RunResult) -> None:
    """Emit timeseries.csv, snapshots/NNNN.csv, blowup_report.txt, resolved_config.txt."""
    out = config.output_dir
    os.makedirs(os.path.join(out, "snapshots"), exist_ok=True)

    trace_by_time: dict[float, tuple[float, float, float]] = {}
    if result.trace is not None:
        tr = result.trace
        for k in range(len(tr.times)):
            trace_by_time[tr.times[k]] = (tr.xi[k], tr.S_on_xi[k], tr.tildeS_on_xi[k])

    def timeseries_rows():
        for rec in result.records:
            xi, s_on, tilde = trace_by_time.get(rec.t, (math.nan, math.nan, math.nan))
            yield [_fmt(rec.t), _fmt(rec.E), _fmt(rec.D), _fmt(rec.sup_abs_S),
                   _fmt(rec.sup_abs_R), _fmt(rec.sup_abs_J), _fmt(xi), _fmt(s_on),
                   _fmt(tilde)]

    _write_csv(os.path.join(out, "timeseries.csv"), _TIMESERIES_HEADER, timeseries_rows())
    for k, (n_step, state) in enumerate(result.snapshots):
        _write_csv(os.path.join(out, "snapshots", f"{k:04d}.csv"), _SNAPSHOT_HEADER,
                   _snapshot_rows(state, config.material, config.grid))

    sig = diagnostics.cusp_signature(result)
    b = result.blowup
    report = {
        "detected": str(b.detected).lower(),
        "t0": _fmt(b.t0),
        "trigger": b.trigger,
        "t_bound": _fmt(b.t_bound),
        "threshold": _fmt(b.threshold),
        "gradient_cap": _fmt(b.gradient_cap),
        "r_cap": _fmt(b.r_cap),
        "max_sup_R": _fmt(b.max_sup_R),
        "r_within_cap": str(b.r_within_cap).lower(),
        "completed": str(result.completed).lower(),
        "t_final": _fmt(result.t_final),
        "steps": str(len(result.records) - 1),
        "E_initial": _fmt(result.records[0].E),
        "E_final": _fmt(result.records[-1].E),
        "sup_S_initial": _fmt(result.records[0].sup_abs_S),
        "sup_S_max": _fmt(max(r.sup_abs_S for r in result.records)),
        "max_sup_J": _fmt(max(r.sup_abs_J for r in result.records)),
        "theta_t_growth": _fmt(sig.theta_t_growth),
        "neg_theta_x_growth": _fmt(sig.neg_theta_x_growth),
        "peak_distance_cells": str(sig.peak_distance_cells),
    }
    with open(os.path.join(out, "blowup_report.txt"), "w", encoding="ascii") as fh:
        for key, value in report.items():
            fh.write(f"{key} = {value}\n")
    with open(os.path.join(out, "resolved_config.txt"), "w", encoding="ascii") as fh:
        fh.write(render_config(config))


@dataclass(frozen=True)
class ScenarioResult:
    """A finished scenario with its artifacts on disk."""

    config: RunConfig
    result: RunResult
    exit_code: int


def run_scenario(config: RunConfig, write: bool = True) -> ScenarioResult:
    """Build the data, march, emit artifacts, map the outcome to an exit code.

    Exit codes: 2 when a blowup was detected and the preset expects one (or no
    expectation is attached), 0 for a clean run to t_end matching expectation,
    1 when the outcome contradicts the preset's expectation.
    """
    state, _ = build_initial_state(config.spec, config.material, config.grid,
                                   t_end=config.solver.t_end,
                                   check_hypotheses=config.check_hypotheses)
    result = run(state, config.material, config.grid, config.solver)
    if write:
        write_artifacts(config, result)
    detected = result.blowup.detected
    if config.expects_blowup is None:
        code = 2 if detected else 0
    elif detected and config.expects_blowup:
        code = 2
    elif not detected and not config.expects_blowup:
        code = 0
    else:
        code = 1
    return ScenarioResult(config=config, result=result, exit_code=code)


# --- epsilon sweep -------------------------------------------------------------


@dataclass(frozen=True)
class SweepResult:
    """Per-epsilon observables and fitted log-log slopes."""

    epsilons: list[float]
    E0: list[float]
    max_sup_J: list[float]
    detected: list[bool]
    t0: list[float]
    max_sup_R: list[float]
    slope_E0: float
    slope_J: float


def epsilon_sweep(config: RunConfig, eps_list: list[float],
                  write: bool = True) -> SweepResult:
    """Run the scenario at each epsilon (decreasing, >= 3 values) and fit slopes."""
    if len(eps_list) < 3:
        raise ConfigError(f"sweep needs >= 3 epsilon values, got {len(eps_list)}")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigError(f"sweep epsilons must be strictly decreasing, got {eps_list}")

    E0, maxJ, det, t0s, maxR = [], [], [], [], []
    for eps in eps_list:
        sub = replace(config, spec=replace(config.spec, epsilon=eps),
                      output_dir=os.path.join(config.output_dir, f"eps_{eps:g}"))
        scenario = run_scenario(sub, write=write)
        records = scenario.result.records
        E0.append(records[0].E)
        maxJ.append(max(r.sup_abs_J for r in records))
        det.append(scenario.result.blowup.detected)
        t0s.append(scenario.result.blowup.t0)
        maxR.append(scenario.result.blowup.max_sup_R)

    log_eps = np.log(np.asarray(eps_list))
    slope_E0 = float(np.polyfit(log_eps, np.log(np.asarray(E0)), 1)[0])
    slope_J = float(np.polyfit(log_eps, np.log(np.asarray(maxJ)), 1)[0])

    if write:
        os.makedirs(config.output_dir, exist_ok=True)
        rows = [[_fmt(e), _fmt(E0[i]), _fmt(maxJ[i]), str(det[i]).lower(), _fmt(t0s[i]),
                 _fmt(maxR[i])] for i, e in enumerate(eps_list)]
        rows.append(["slope", _fmt(slope_E0), _fmt(slope_J), "", "", ""])
        _write_csv(os.path.join(config.output_dir, "sweep.csv"),
                   ["epsilon", "E0", "max_sup_J", "detected", "t0", "max_sup_R"], rows)
    return SweepResult(epsilons=list(eps_list), E0=E0, max_sup_J=maxJ, detected=det,
                       t0=t0s, max_sup_R=maxR, slope_E0=slope_E0, slope_J=slope_J)


# --- refinement study ----------------------------------------------------------


@dataclass(frozen=True)
class RefinementResult:
    """Nested-grid differences, observed orders, and energy-budget residuals."""

    nx_levels: list[int]
    diff_theta: list[float]  # len levels-1, consecutive-pair max-norm diffs
    diff_u: list[float]
    order_theta: list[float]  # len levels-2
    order_u: list[float]
    budget_residual: list[float]  # per level: |E(t) - E(0) + sum D dt|
    budget_shrink: list[float]  # consecutive residual ratios


def refinement_study(config: RunConfig, levels: int = 3,
                     write: bool = True) -> RefinementResult:
    """Convergence of the full step on the smooth low-amplitude family.

    Runs the smooth verification data (no theorem machinery) on `levels`
    nested grids starting from config.grid, compares consecutive solutions on
    the shared coarse nodes at the final time, and checks the observed order
    against the scheme's floor of 0.8.
    """
    if levels < 3:
        raise ConfigError(f"refinement study needs >= 3 levels, got {levels}")
    mat = config.material
    t_end = config.solver.t_end

    nx_levels = [(config.grid.nx - 1) * (1 << k) + 1 for k in range(levels)]
    finals = []
    residuals = []
    for nx in nx_levels:
        grid = Grid(config.grid.x_min, config.grid.x_max, nx)
        state = build_smooth_state(mat, grid, theta_star=config.spec.theta_star)
        cfg = replace(config.solver, blowup_threshold=None, trace_stride=0,
                      snapshot_stride=0)
        result = run(state, mat, grid, cfg)
        if result.blowup.detected:
            raise ConfigError(f"smooth verification run triggered {result.blowup.trigger} "
                              f"at nx={nx}; not smooth enough for a convergence study")
        finals.append(result.final_state)
        records = result.records
        times = np.array([r.t for r in records])
        Ds = np.array([r.D for r in records])
        residuals.append(abs(records[-1].E - records[0].E
                             + float(np.trapezoid(Ds, times))))

    diff_theta, diff_u = [], []
    for coarse, fine in zip(finals, finals[1:]):
        stride = (fine.theta.shape[0] - 1) // (coarse.theta.shape[0] - 1)
        diff_theta.append(float(np.max(np.abs(coarse.theta - fine.theta[::stride]))))
        diff_u.append(float(np.max(np.abs(coarse.u - fine.u[::stride]))))
    order_theta = [math.log2(a / b) for a, b in zip(diff_theta, diff_theta[1:])]
    order_u = [math.log2(a / b) for a, b in zip(diff_u, diff_u[1:])]
    shrink = [a / b for a, b in zip(residuals, residuals[1:])]

    if min(order_theta) < 0.8:
        raise ConfigError(f"observed theta convergence order {min(order_theta):.3f} "
                          "below the 0.8 floor; the scheme is misbehaving")

    if write:
        os.makedirs(config.output_dir, exist_ok=True)
        rows = []
        for i, nx in enumerate(nx_levels):
            rows.append([
                str(nx),
                _fmt(diff_theta[i - 1]) if i >= 1 else "",
                _fmt(order_theta[i - 2]) if i >= 2 else "",
                _fmt(diff_u[i - 1]) if i >= 1 else "",
                _fmt(order_u[i - 2]) if i >= 2 else "",
                _fmt(residuals[i]),
                _fmt(shrink[i - 1]) if i >= 1 else "",
            ])
        _write_csv(os.path.join(config.output_dir, "refinement.csv"),
                   ["nx", "diff_theta", "order_theta", "diff_u", "order_u",
                    "budget_residual", "budget_shrink"], rows)
    return RefinementResult(nx_levels=nx_levels, diff_theta=diff_theta, diff_u=diff_u,
                            order_theta=order_theta, order_u=order_u,
                            budget_residual=residuals, budget_shrink=shrink)
