"""Finite difference solver for the coupled velocity / director-angle system.

Fields on a uniform grid:

    u      velocity,  u_t = (g(theta) u_x + h(theta) theta_t)_x
    theta  director angle, evolved through its Riemann invariants
    R      backward invariant  theta_t + c theta_x   (moves at speed -c)
    S      forward invariant   theta_t - c theta_x   (moves at speed +c)

so theta_t = (R + S)/2 and c theta_x = (R - S)/2; theta_x is never obtained by
differencing theta.  One step is a simple splitting: compute the bounded flux
combination J = u_x + (h/g) theta_t from the current fields, advance R, S,
theta by upwind-biased transport of the invariants with the source terms

    S_t + c S_x = (c'/4c)(S^2 - R^2) + (h^2/g - gamma1)(R + S)/2 - h J
    R_t - c R_x = -(c'/4c)(S^2 - R^2) + (h^2/g - gamma1)(R + S)/2 - h J

then advance u by a theta-weighted (Crank-Nicolson by default) solve of the
variable-coefficient diffusion with the director drive (h theta_t)_x explicit.

Transport uses fifth-order upwind-biased WENO derivatives (the advection
speeds are sign-definite, so S is always biased from the left and R from the
right) with SSP-RK3 staging of the full right-hand side; the geometry
coefficients g, h, c, c' are frozen at the entry theta for the substep while
the flux combination J is re-evaluated at every stage from the stage theta_t,
which keeps the exact h^2/g cancellation inside the damping term at every
stage.  The scheme choice is forced by the
physics being chased: the focusing term (c'/4c) S^2 narrows the S pulse in
inverse proportion to its height, so any scheme that loses accuracy at
extrema (first-order upwinding everywhere, TVD limiters at the pulse tip)
erodes the peak at a rate that catches the quadratic growth while the pulse
is still tens of cells wide, and the race is lost on every affordable grid.
WENO keeps fifth-order accuracy at smooth extrema and degrades only near the
cusp itself, which is exactly the trigger region.

Boundaries: homogeneous Dirichlet for u, first-order outflow for R and S.
The time step obeys dt = cfl * dx / max c and is capped by half the damping
relaxation scale.  A run stops at t_end or at the first blowup trigger
(sup|S| threshold, gradient-resolution limit, or non-finite values).

When trace_stride > 0 the run integrates the forward characteristic
xi' = c(theta(xi, t)) from trace_start_x on the fly (explicit midpoint, with
theta interpolated in space and averaged across the step) and samples S and
the damping integral p = 1/2 int (gamma1 - h^2/g) along it, so no field
history has to be retained for the characteristic diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit
from scipy.linalg import solve_banded

from . import diagnostics
from .material import (LeslieMaterial, MaterialBounds, bounds_of, c_of, c_prime_of,
                       damping_of, g_of, h_of, wave_coefficients)


@dataclass(frozen=True)
class Grid:
    """Uniform node-centered grid on [x_min, x_max] with nx nodes."""

    x_min: float
    x_max: float
    nx: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError(f"need x_max > x_min, got [{self.x_min}, {self.x_max}]")
        if self.nx < 3:
            raise ValueError(f"need nx >= 3, got {self.nx}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    def nodes(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)


@dataclass
class State:
    """Solution fields at one time level."""

    t: float
    theta: np.ndarray
    u: np.ndarray
    R: np.ndarray
    S: np.ndarray

    @property
    def theta_t(self) -> np.ndarray:
        return 0.5 * (self.R + self.S)

    def theta_x(self, material: LeslieMaterial) -> np.ndarray:
        return 0.5 * (self.R - self.S) / c_of(material, self.theta)

    def is_finite(self) -> bool:
        return bool(
            np.isfinite(self.theta).all()
            and np.isfinite(self.u).all()
            and np.isfinite(self.R).all()
            and np.isfinite(self.S).all()
        )


@dataclass(frozen=True)
class SolverConfig:
    """Time stepping, trigger and retention settings."""

    cfl: float = 0.4
    t_end: float = 1.0
    blowup_threshold: float | None = None  # absolute sup|S| trigger; None = factor * sup|S(.,0)|
    blowup_factor: float = 50.0
    gradient_resolution_factor: float = 8.0  # trigger when sup|theta_x| > 1/(factor * dx)
    heat_implicitness: float = 0.5  # 0.5 = Crank-Nicolson, 1.0 = implicit Euler
    snapshot_stride: int = 0  # retain full states every N steps (0 = endpoints only)
    trace_stride: int = 0  # sample the traced characteristic every N steps (0 = off)
    trace_start_x: float = 0.0  # launch point of the traced forward characteristic

    def __post_init__(self):
        if not 0.0 < self.cfl <= 0.5:
            raise ValueError(f"cfl must be in (0, 0.5], got {self.cfl}")
        if self.t_end <= 0.0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if not 0.0 <= self.heat_implicitness <= 1.0:
            raise ValueError(f"heat_implicitness must be in [0, 1], got {self.heat_implicitness}")
        if self.gradient_resolution_factor <= 0.0:
            raise ValueError("gradient_resolution_factor must be positive")


def cfl_dt(state: State, material: LeslieMaterial, grid: Grid, config: SolverConfig,
           damping_sup: float | None = None) -> float:
    """Stable step: cfl * dx / max c(theta), capped by half the damping scale."""
    if damping_sup is None:
        damping_sup = bounds_of(material).damping_sup
    c_max = float(np.max(c_of(material, state.theta)))
    return min(config.cfl * grid.dx / c_max, 0.5 / damping_sup)


@njit(cache=True)
def _weno5_kernel(q: np.ndarray, dx: float) -> np.ndarray:
    """Fifth-order WENO left-biased derivative, for transport at positive speed.

    Standard weighted-ENO combination of the three cubic candidates on the
    one-sided differences; the smoothness indicators steer the weights away
    from stencils crossing a kink, so the derivative stays non-oscillatory at
    the forming cusp while keeping fifth-order accuracy at smooth extrema.
    The three nodes at each end fall back to first-order one-sided values and
    the inflow node keeps a zero derivative (fields are constant there by the
    domain-margin requirement on the initial data).  Compiled because this is
    the inner loop of the whole laboratory; `_weno5_dleft_ref` is the plain
    numpy statement of the same formulas.
    """
    n = q.shape[0]
    deriv = np.zeros_like(q)
    for i in range(1, n):
        deriv[i] = (q[i] - q[i - 1]) / dx
    if n < 7:
        return deriv
    # rolling window of one-sided differences, since deriv is written in place
    v1 = (q[1] - q[0]) / dx
    v2 = (q[2] - q[1]) / dx
    v3 = (q[3] - q[2]) / dx
    v4 = (q[4] - q[3]) / dx
    v5 = (q[5] - q[4]) / dx
    for i in range(3, n - 2):
        p1 = v1 / 3.0 - 7.0 * v2 / 6.0 + 11.0 * v3 / 6.0
        p2 = -v2 / 6.0 + 5.0 * v3 / 6.0 + v4 / 3.0
        p3 = v3 / 3.0 + 5.0 * v4 / 6.0 - v5 / 6.0
        b1 = (13.0 / 12.0) * (v1 - 2.0 * v2 + v3) ** 2 + 0.25 * (v1 - 4.0 * v2 + 3.0 * v3) ** 2
        b2 = (13.0 / 12.0) * (v2 - 2.0 * v3 + v4) ** 2 + 0.25 * (v2 - v4) ** 2
        b3 = (13.0 / 12.0) * (v3 - 2.0 * v4 + v5) ** 2 + 0.25 * (3.0 * v3 - 4.0 * v4 + v5) ** 2
        # relative regularization, so the weights are invariant under q -> s q
        vmax = max(max(max(max(v1 * v1, v2 * v2), v3 * v3), v4 * v4), v5 * v5)
        e = 1e-6 * vmax + 1e-99
        a1 = 0.1 / (b1 + e) ** 2
        a2 = 0.6 / (b2 + e) ** 2
        a3 = 0.3 / (b3 + e) ** 2
        deriv[i] = (a1 * p1 + a2 * p2 + a3 * p3) / (a1 + a2 + a3)
        if i < n - 3:
            v1 = v2
            v2 = v3
            v3 = v4
            v4 = v5
            v5 = (q[i + 3] - q[i + 2]) / dx
    return deriv


def _weno5_dleft_ref(q: np.ndarray, dx: float) -> np.ndarray:
    """Vectorized restatement of `_weno5_kernel`, kept as its oracle."""
    n = q.shape[0]
    deriv = np.zeros_like(q)
    deriv[1:] = (q[1:] - q[:-1]) / dx
    if n < 7:
        return deriv
    v = deriv[1:].copy()
    v1 = v[: n - 5]
    v2 = v[1 : n - 4]
    v3 = v[2 : n - 3]
    v4 = v[3 : n - 2]
    v5 = v[4 : n - 1]
    p1 = v1 / 3.0 - 7.0 * v2 / 6.0 + 11.0 * v3 / 6.0
    p2 = -v2 / 6.0 + 5.0 * v3 / 6.0 + v4 / 3.0
    p3 = v3 / 3.0 + 5.0 * v4 / 6.0 - v5 / 6.0
    b1 = (13.0 / 12.0) * (v1 - 2.0 * v2 + v3) ** 2 + 0.25 * (v1 - 4.0 * v2 + 3.0 * v3) ** 2
    b2 = (13.0 / 12.0) * (v2 - 2.0 * v3 + v4) ** 2 + 0.25 * (v2 - v4) ** 2
    b3 = (13.0 / 12.0) * (v3 - 2.0 * v4 + v5) ** 2 + 0.25 * (3.0 * v3 - 4.0 * v4 + v5) ** 2
    e = 1e-6 * np.maximum.reduce([v1 * v1, v2 * v2, v3 * v3, v4 * v4, v5 * v5]) + 1e-99
    a1 = 0.1 / (b1 + e) ** 2
    a2 = 0.6 / (b2 + e) ** 2
    a3 = 0.3 / (b3 + e) ** 2
    deriv[3 : n - 2] = (a1 * p1 + a2 * p2 + a3 * p3) / (a1 + a2 + a3)
    return deriv


def _weno5_dleft(q: np.ndarray, dx: float) -> np.ndarray:
    return _weno5_kernel(np.ascontiguousarray(q), dx)


def _weno5_dright(q: np.ndarray, dx: float) -> np.ndarray:
    """Mirror of `_weno5_dleft`, for transport at negative speed."""
    return -_weno5_kernel(np.ascontiguousarray(q[::-1]), dx)[::-1]


def wave_substep(state: State, material: LeslieMaterial, grid: Grid, J: np.ndarray,
                 dt: float) -> State:
    """Advance R, S, theta by dt with u (hence u_x) frozen.

    SSP-RK3 over the full right-hand side: WENO5 upwind transport (S biased
    left since it moves at +c, R right) plus the quadratic focusing, linear
    damping and flux-coupling sources.  The geometry coefficients c, c', h, g
    are frozen at the entry theta (an O(dt) freeze inside an O(dt^3) stage
    cycle, immaterial next to the spatial error), but J keeps its live
    (h/g) theta_t part per stage: that preserves the exact cancellation
    against the damping term, so a spatially uniform state reproduces SSP-RK3
    for the pure gamma1-relaxation ODE.
    """
    dx = grid.dx
    theta0, R0, S0 = state.theta, state.R, state.S
    g, h, c, c_prime = wave_coefficients(material, theta0)
    cp4c = c_prime / (4.0 * c)
    h_over_g = h / g
    half_neg_damp = 0.5 * (h * h_over_g - material.gamma1)
    # u_x as compute_J builds it, recovered once; theta_t changes per stage
    ux = J - h_over_g * 0.5 * (R0 + S0)

    def rhs(R, S):
        theta_t = 0.5 * (R + S)
        quad = cp4c * (S * S - R * R)
        lin = half_neg_damp * (R + S)
        hJ = h * (ux + h_over_g * theta_t)
        dS = quad + lin - hJ - c * _weno5_dleft(S, dx)
        dR = lin - quad - hJ + c * _weno5_dright(R, dx)
        return theta_t, dR, dS

    dth, dR, dS = rhs(R0, S0)
    theta1 = theta0 + dt * dth
    R1 = R0 + dt * dR
    S1 = S0 + dt * dS
    dth, dR, dS = rhs(R1, S1)
    theta2 = 0.75 * theta0 + 0.25 * (theta1 + dt * dth)
    R2 = 0.75 * R0 + 0.25 * (R1 + dt * dR)
    S2 = 0.75 * S0 + 0.25 * (S1 + dt * dS)
    dth, dR, dS = rhs(R2, S2)
    theta_new = theta0 / 3.0 + (2.0 / 3.0) * (theta2 + dt * dth)
    R_new = R0 / 3.0 + (2.0 / 3.0) * (R2 + dt * dR)
    S_new = S0 / 3.0 + (2.0 / 3.0) * (S2 + dt * dS)
    return State(t=state.t, theta=theta_new, u=state.u, R=R_new, S=S_new)


def heat_substep(state: State, material: LeslieMaterial, grid: Grid, dt: float,
                 implicitness: float = 0.5) -> State:
    """Advance u by dt: theta-weighted implicit diffusion, explicit drive.

    The diffusion flux (g u_x)_x uses the three-point stencil with g averaged
    to cell faces; the drive (h theta_t)_x is a central difference of the
    current (post wave substep) fields.  Homogeneous Dirichlet rows pin both
    ends.  The tridiagonal system is strictly diagonally dominant whenever
    g > 0 and is refused otherwise.
    """
    theta = state.theta
    u = state.u
    n = u.shape[0]
    dx = grid.dx
    g = g_of(material, theta)
    g_face = 0.5 * (g[:-1] + g[1:])
    if g_face.min() <= 0.0:
        raise ValueError("non-positive face viscosity: diffusion matrix not diagonally dominant")

    flux_drive = h_of(material, theta) * state.theta_t
    drive = np.zeros_like(u)
    drive[1:-1] = (flux_drive[2:] - flux_drive[:-2]) / (2.0 * dx)

    r = dt / (dx * dx)
    w = implicitness
    lower = np.zeros(n)
    diag = np.ones(n)
    upper = np.zeros(n)
    # interior rows: (1 + w r (gl + gr)) u_i - w r gl u_{i-1} - w r gr u_{i+1} = rhs_i
    gl = g_face[:-1]
    gr = g_face[1:]
    diag[1:-1] = 1.0 + w * r * (gl + gr)
    lower[0:-2] = -w * r * gl  # entry (i, i-1) stored at position i-1
    upper[2:] = -w * r * gr  # entry (i, i+1) stored at position i+1

    rhs = u + dt * drive
    if w < 1.0:
        explicit = np.zeros(n)
        explicit[1:-1] = (1.0 - w) * r * (gr * (u[2:] - u[1:-1]) - gl * (u[1:-1] - u[:-2]))
        rhs = rhs + explicit
    rhs[0] = 0.0
    rhs[-1] = 0.0

    ab = np.zeros((3, n))
    ab[0, 1:] = upper[1:]
    ab[1, :] = diag
    ab[2, :-1] = lower[:-1]
    u_new = solve_banded((1, 1), ab, rhs)
    return State(t=state.t, theta=theta, u=u_new, R=state.R, S=state.S)


def step(state: State, material: LeslieMaterial, grid: Grid, config: SolverConfig,
         dt: float | None = None, J: np.ndarray | None = None,
         damping_sup: float | None = None) -> tuple[State, "diagnostics.DiagnosticsRecord"]:
    """One full step: J from current fields, wave substep, heat substep.

    Returns the advanced state and its diagnostics record.
    """
    if dt is None:
        dt = cfl_dt(state, material, grid, config, damping_sup)
    if J is None:
        J = diagnostics.compute_J(state, material, grid)
    advanced = wave_substep(state, material, grid, J, dt)
    advanced = heat_substep(advanced, material, grid, dt, config.heat_implicitness)
    advanced.t = state.t + dt
    record = diagnostics.record_of(advanced, material, grid)
    return advanced, record


@dataclass
class RunResult:
    """A completed (or trigger-stopped) simulation with retained diagnostics."""

    material: LeslieMaterial
    grid: Grid
    config: SolverConfig
    records: list
    initial_state: State
    final_state: State
    blowup: "diagnostics.BlowupReport"
    completed: bool
    snapshots: list[tuple[int, State]] = field(default_factory=list)
    trace: "diagnostics.CharacteristicTrace | None" = None

    @property
    def t_final(self) -> float:
        return self.final_state.t


def run(state: State, material: LeslieMaterial, grid: Grid, config: SolverConfig,
        bounds: MaterialBounds | None = None) -> RunResult:
    """March from the given state until t_end or the first blowup trigger."""
    if bounds is None:
        bounds = bounds_of(material)
    t_end = config.t_end
    state = replace(state, theta=state.theta.copy(), u=state.u.copy(),
                    R=state.R.copy(), S=state.S.copy())
    initial_state = state

    first = diagnostics.record_of(state, material, grid)
    records = [first]
    sup_S0 = first.sup_abs_S
    threshold = config.blowup_threshold
    if threshold is None:
        threshold = config.blowup_factor * sup_S0
    gradient_cap = 1.0 / (config.gradient_resolution_factor * grid.dx)

    snapshots = [(0, state)]
    nodes = grid.nodes()
    tracing = config.trace_stride > 0
    if tracing:
        xi = float(config.trace_start_x)
        if not grid.x_min <= xi <= grid.x_max:
            raise ValueError(f"trace_start_x {xi} outside the grid")
        p = 0.0
        trace_t = [state.t]
        trace_xi = [xi]
        trace_S = [float(np.interp(xi, nodes, state.S))]
        trace_p = [0.0]

    trigger = diagnostics.check_trigger(first, threshold, gradient_cap)
    n_step = 0
    eps_t = 1e-12 * max(1.0, t_end)
    while trigger is None and state.t < t_end - eps_t:
        dt = min(cfl_dt(state, material, grid, config, bounds.damping_sup), t_end - state.t)
        prev = state
        state, record = step(state, material, grid, config, dt=dt)
        records.append(record)
        n_step += 1
        if tracing:
            c_xi = float(c_of(material, np.interp(xi, nodes, prev.theta)))
            xi_half = xi + 0.5 * dt * c_xi
            theta_half = 0.5 * (np.interp(xi_half, nodes, prev.theta)
                                + np.interp(xi_half, nodes, state.theta))
            xi_new = min(max(xi + dt * float(c_of(material, theta_half)), grid.x_min),
                         grid.x_max)
            p += 0.25 * dt * float(damping_of(material, np.interp(xi, nodes, prev.theta))
                                   + damping_of(material, np.interp(xi_new, nodes, state.theta)))
            xi = xi_new
            if n_step % config.trace_stride == 0:
                trace_t.append(state.t)
                trace_xi.append(xi)
                trace_S.append(float(np.interp(xi, nodes, state.S)))
                trace_p.append(p)
        if config.snapshot_stride > 0 and n_step % config.snapshot_stride == 0:
            snapshots.append((n_step, state))
        trigger = diagnostics.check_trigger(record, threshold, gradient_cap)

    if snapshots[-1][0] != n_step:
        snapshots.append((n_step, state))
    trace = None
    if tracing:
        if trace_t[-1] != state.t:
            trace_t.append(state.t)
            trace_xi.append(xi)
            trace_S.append(float(np.interp(xi, nodes, state.S)))
            trace_p.append(p)
        trace = diagnostics.CharacteristicTrace(
            times=np.asarray(trace_t),
            xi=np.asarray(trace_xi),
            S_on_xi=np.asarray(trace_S),
            p_on_xi=np.asarray(trace_p),
            tildeS_on_xi=np.exp(trace_p) * np.asarray(trace_S),
        )
    report = diagnostics.detect_blowup(records, config, grid.dx,
                                       t_bound=diagnostics.blowup_bound_T_from(bounds))
    return RunResult(
        material=material,
        grid=grid,
        config=config,
        records=records,
        initial_state=initial_state,
        final_state=state,
        blowup=report,
        completed=trigger is None,
        snapshots=snapshots,
        trace=trace,
    )
