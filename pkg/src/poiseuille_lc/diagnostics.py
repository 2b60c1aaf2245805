"""Diagnostics: energy budget, bounded flux combination, blowup detection,
characteristic tracing.

The quantities observed here are the ones the blowup picture is phrased in:

    E(t) = 1/2 int theta_t^2 + c^2 theta_x^2 + u^2 dx        (non-increasing)
    D(t) = int b u_x^2 + gamma1 (theta_t + (h/gamma1) u_x)^2 dx   (dE/dt = -D)
    J    = u_x + (h/g) theta_t       (stays bounded while u_x, theta_t blow up)

plus the forward characteristic xi(t) through the seeded steepening point,
along which the weighted invariant  tildeS = exp(p) S,
p(t) = 1/2 int_0^t (gamma1 - h^2/g)(xi(s), s) ds, obeys a Riccati inequality:
1/tildeS decreases to 0 in finite time.

All integrals are trapezoid sums on the solver grid; u_x is a central
difference (one-sided at the walls), shared by every consumer through
`velocity_gradient`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .material import (
    LeslieMaterial,
    MaterialBounds,
    b_of,
    bounds_of,
    c_of,
    damping_of,
    g_of,
    h_of,
)

TRIGGER_S_THRESHOLD = "s_threshold"
TRIGGER_GRADIENT = "gradient_resolution"
TRIGGER_NONFINITE = "nonfinite"


def velocity_gradient(u: np.ndarray, dx: float) -> np.ndarray:
    """u_x: central differences, one-sided at the boundary nodes."""
    return np.gradient(u, dx)


def compute_J(state, material: LeslieMaterial, grid) -> np.ndarray:
    """Flux combination J = u_x + (h/g) theta_t (single shared implementation)."""
    u_x = velocity_gradient(state.u, grid.dx)
    ratio = h_of(material, state.theta) / g_of(material, state.theta)
    return u_x + ratio * 0.5 * (state.R + state.S)


def energy(state, material: LeslieMaterial, grid) -> float:
    """E = 1/2 int theta_t^2 + c^2 theta_x^2 + u^2 dx.

    In invariant variables theta_t^2 + c^2 theta_x^2 = (R^2 + S^2)/2, so the
    wave speed drops out identically.
    """
    density = 0.25 * (state.R * state.R + state.S * state.S) + 0.5 * state.u * state.u
    return float(np.trapezoid(density, dx=grid.dx))


def dissipation(state, material: LeslieMaterial, grid) -> float:
    """D = int b u_x^2 + gamma1 (theta_t + (h/gamma1) u_x)^2 dx, the decay rate of E."""
    u_x = velocity_gradient(state.u, grid.dx)
    theta_t = 0.5 * (state.R + state.S)
    gamma1 = material.gamma1
    h = h_of(material, state.theta)
    density = b_of(material, state.theta) * u_x * u_x + gamma1 * (theta_t + (h / gamma1) * u_x) ** 2
    return float(np.trapezoid(density, dx=grid.dx))


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Per-step scalar diagnostics; xi-columns are filled by tracing, if any."""

    t: float
    E: float
    D: float
    sup_abs_S: float
    sup_abs_R: float
    sup_abs_J: float
    sup_abs_theta_x: float
    xi: float = math.nan
    S_on_xi: float = math.nan
    tildeS_on_xi: float = math.nan
    p_on_xi: float = math.nan


def record_of(state, material: LeslieMaterial, grid) -> DiagnosticsRecord:
    J = compute_J(state, material, grid)
    theta_x = 0.5 * (state.R - state.S) / c_of(material, state.theta)
    return DiagnosticsRecord(
        t=state.t,
        E=energy(state, material, grid),
        D=dissipation(state, material, grid),
        sup_abs_S=float(np.max(np.abs(state.S))),
        sup_abs_R=float(np.max(np.abs(state.R))),
        sup_abs_J=float(np.max(np.abs(J))),
        sup_abs_theta_x=float(np.max(np.abs(theta_x))),
    )


# --- blowup bound and detection ----------------------------------------------


def blowup_bound_T(material: LeslieMaterial) -> float:
    """Time bound before which the seeded cusp must form: min(2 ln2 / sup damping, 1)."""
    return blowup_bound_T_from(bounds_of(material))


def blowup_bound_T_from(bounds: MaterialBounds) -> float:
    return min(2.0 * math.log(2.0) / bounds.damping_sup, 1.0)


def check_trigger(record: DiagnosticsRecord, threshold: float, gradient_cap: float) -> str | None:
    """First matching stop condition for one record, or None."""
    values = (record.E, record.D, record.sup_abs_S, record.sup_abs_R, record.sup_abs_J,
              record.sup_abs_theta_x)
    if not all(math.isfinite(v) for v in values):
        return TRIGGER_NONFINITE
    if record.sup_abs_S > threshold:
        return TRIGGER_S_THRESHOLD
    if record.sup_abs_theta_x > gradient_cap:
        return TRIGGER_GRADIENT
    return None


@dataclass(frozen=True)
class BlowupReport:
    """Outcome of trigger detection over a run's records."""

    detected: bool
    t0: float  # time of the first trigger (detection time, grid-dependent)
    trigger: str  # "s_threshold" | "gradient_resolution" | "nonfinite" | "none"
    t_bound: float  # theorem bound: detection should land strictly before it
    threshold: float
    gradient_cap: float
    r_cap: float  # expected ceiling for sup|R| while S blows up
    max_sup_R: float
    r_within_cap: bool
    times: np.ndarray
    sup_S_history: np.ndarray
    sup_R_history: np.ndarray


def detect_blowup(records, config, dx: float, t_bound: float = math.nan) -> BlowupReport:
    """Scan records for the earliest trigger; record the sup|S| and sup|R| traces.

    Thresholds are resolved exactly as the solver loop resolves them, so a
    post-hoc scan reproduces the in-loop stop decision.
    """
    first = records[0]
    threshold = config.blowup_threshold
    if threshold is None:
        threshold = config.blowup_factor * first.sup_abs_S
    gradient_cap = 1.0 / (config.gradient_resolution_factor * dx)
    times = np.array([r.t for r in records])
    sup_S = np.array([r.sup_abs_S for r in records])
    sup_R = np.array([r.sup_abs_R for r in records])

    detected = False
    t0 = math.nan
    trigger = "none"
    for r in records:
        kind = check_trigger(r, threshold, gradient_cap)
        if kind is not None:
            detected = True
            t0 = r.t
            trigger = kind
            break

    r_cap = 10.0 * first.sup_abs_R + 1.0
    max_sup_R = float(np.nanmax(sup_R)) if len(sup_R) else math.nan
    return BlowupReport(
        detected=detected,
        t0=t0,
        trigger=trigger,
        t_bound=t_bound,
        threshold=threshold,
        gradient_cap=gradient_cap,
        r_cap=r_cap,
        max_sup_R=max_sup_R,
        r_within_cap=bool(max_sup_R <= r_cap),
        times=times,
        sup_S_history=sup_S,
        sup_R_history=sup_R,
    )


# --- characteristic tracing ---------------------------------------------------


@dataclass(frozen=True)
class CharacteristicTrace:
    """The forward characteristic xi(t) and the weighted invariant along it."""

    times: np.ndarray
    xi: np.ndarray
    S_on_xi: np.ndarray
    p_on_xi: np.ndarray
    tildeS_on_xi: np.ndarray


def trace_characteristic(result, start_x: float = 0.0) -> CharacteristicTrace:
    """Integrate dxi/dt = c(theta(xi, t)) from start_x through retained snapshots.

    This is the post-hoc counterpart of the solver's in-loop trace, kept as an
    independent cross-check: it sees only the states retained by
    snapshot_stride.  Explicit midpoint in time with linear interpolation of
    theta in space (and in time for the half step); p accumulates
    1/2 (gamma1 - h^2/g) along xi by the trapezoid rule.  Requires the
    retained stride to move the characteristic less than one cell per
    interval and raises if xi leaves the domain.
    """
    times = [s.t for _, s in result.snapshots]
    thetas = [s.theta for _, s in result.snapshots]
    Ss = [s.S for _, s in result.snapshots]
    if len(times) < 2:
        raise ValueError("characteristic tracing needs at least two retained snapshots "
                         "(set snapshot_stride > 0)")
    material = result.material
    grid = result.grid
    x = grid.nodes()
    bounds = bounds_of(material)
    dts = np.diff(np.asarray(times))
    if np.max(dts) * bounds.C_U > grid.dx * (1.0 + 1e-9):
        raise ValueError(
            f"retained stride too coarse for tracing: max step {np.max(dts):.3e} * C_U "
            f"{bounds.C_U:.3f} exceeds one cell {grid.dx:.3e}")

    n = len(times)
    xi = np.empty(n)
    p = np.empty(n)
    s_on = np.empty(n)
    xi[0] = start_x
    p[0] = 0.0
    s_on[0] = float(np.interp(start_x, x, Ss[0]))
    q_prev = 0.5 * float(damping_of(material, np.interp(start_x, x, thetas[0])))

    for k in range(n - 1):
        dt = times[k + 1] - times[k]
        theta_here = float(np.interp(xi[k], x, thetas[k]))
        xi_half = xi[k] + 0.5 * dt * float(c_of(material, theta_here))
        theta_half = 0.5 * (float(np.interp(xi_half, x, thetas[k]))
                            + float(np.interp(xi_half, x, thetas[k + 1])))
        xi[k + 1] = xi[k] + dt * float(c_of(material, theta_half))
        if not grid.x_min <= xi[k + 1] <= grid.x_max:
            raise ValueError(f"characteristic left the domain at t = {times[k + 1]:.6f}, "
                             f"xi = {xi[k + 1]:.6f}")
        theta_next = float(np.interp(xi[k + 1], x, thetas[k + 1]))
        q_next = 0.5 * float(damping_of(material, theta_next))
        p[k + 1] = p[k] + 0.5 * dt * (q_prev + q_next)
        q_prev = q_next
        s_on[k + 1] = float(np.interp(xi[k + 1], x, Ss[k + 1]))

    times_arr = np.asarray(times, dtype=float)
    tilde = np.exp(p) * s_on
    return CharacteristicTrace(times=times_arr, xi=xi, S_on_xi=s_on, p_on_xi=p,
                               tildeS_on_xi=tilde)


# --- cusp signature -----------------------------------------------------------


@dataclass(frozen=True)
class CuspSignature:
    """Joint steepening measured between the initial and final state."""

    theta_t_initial: float
    theta_t_final: float
    theta_t_growth: float
    neg_theta_x_initial: float
    neg_theta_x_final: float
    neg_theta_x_growth: float
    peak_distance_cells: int


def cusp_signature(result) -> CuspSignature:
    """Growth of max theta_t and -min theta_x, and how far apart the peaks sit."""
    material = result.material
    first = result.initial_state
    last = result.final_state

    def peaks(state):
        theta_t = 0.5 * (state.R + state.S)
        theta_x = 0.5 * (state.R - state.S) / c_of(material, state.theta)
        return float(np.max(theta_t)), float(-np.min(theta_x)), int(np.argmax(theta_t)), int(np.argmin(theta_x))

    t0_val, x0_val, _, _ = peaks(first)
    t1_val, x1_val, i_t, i_x = peaks(last)
    return CuspSignature(
        theta_t_initial=t0_val,
        theta_t_final=t1_val,
        theta_t_growth=t1_val / t0_val if t0_val > 0 else math.inf,
        neg_theta_x_initial=x0_val,
        neg_theta_x_final=x1_val,
        neg_theta_x_growth=x1_val / x0_val if x0_val > 0 else math.inf,
        peak_distance_cells=abs(i_t - i_x),
    )
