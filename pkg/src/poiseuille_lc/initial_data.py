"""Singularity-seeding initial data.

The director angle starts as a thin bump of width epsilon around a background
angle theta_star at which the wave speed strictly increases:

    theta(x, 0)   = theta_star + epsilon phi(x / epsilon)
    theta_t(x, 0) = (-c(theta(x, 0)) + epsilon) phi'(x / epsilon)

with the compactly supported profile

    phi(a) = -M a (1 - a^2)^2   on |a| <= 1,   0 outside,

so the forward invariant starts at S(x, 0) = (-2 c + epsilon) phi'(x / epsilon)
and in particular S(0, 0) = (2 c(theta_star) - epsilon) M: one large forward
wave plus an O(epsilon) backward one, R(x, 0) = epsilon phi'(x / epsilon).

The amplitude M must clear a material-dependent threshold for the focusing
term to beat the damping; `amplitude_threshold` computes it and the default
amplitude is ceil(slack * threshold).

The velocity starts compatible with a bounded flux combination J:

    u(x, 0) = 0                                       x < -epsilon
              int_{-epsilon}^x (h/g) c theta' da      -epsilon <= x <= epsilon
              chi(x)                                  epsilon < x < epsilon + 2
              0                                       x >= epsilon + 2

where chi is the cubic Hermite blend that meets the middle branch in value
and slope and vanishes at epsilon + 2, keeping u in C^1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .diagnostics import compute_J, energy
from .material import LeslieMaterial, bounds_of, c_of, c_prime_of, g_of, h_of
from .solver import Grid, State

# int_{-1}^{1} ((1 - a^2)(1 - 5 a^2))^2 da: normalized profile-derivative energy.
PROFILE_ENERGY_NORM = 256.0 / 315.0


@dataclass(frozen=True)
class InitialDataSpec:
    """Parameters of the seeded bump."""

    epsilon: float
    theta_star: float
    amplitude: float
    amplitude_slack: float = 1.1

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.amplitude <= 0.0:
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")
        if self.amplitude_slack < 1.0:
            raise ValueError(f"amplitude_slack must be >= 1, got {self.amplitude_slack}")

    @property
    def slope_bound(self) -> float:
        """C2: sup |phi'| (attained at a = 0)."""
        return self.amplitude

    @property
    def profile_energy(self) -> float:
        """int (phi')^2 da over the support."""
        return PROFILE_ENERGY_NORM * self.amplitude ** 2

    @property
    def k0(self) -> float:
        """A constant strictly dominating int (phi')^2 da (recorded, not enforced)."""
        return 2.0 * self.profile_energy + 1.0


def phi(spec: InitialDataSpec, a):
    a = np.asarray(a, dtype=float)
    inside = np.abs(a) <= 1.0
    val = -spec.amplitude * a * (1.0 - a * a) ** 2
    return np.where(inside, val, 0.0)


def phi_prime(spec: InitialDataSpec, a):
    a = np.asarray(a, dtype=float)
    inside = np.abs(a) <= 1.0
    a2 = a * a
    val = -spec.amplitude * (1.0 - a2) * (1.0 - 5.0 * a2)
    return np.where(inside, val, 0.0)


def amplitude_threshold(material: LeslieMaterial, theta_star: float,
                        n_samples: int = 4096) -> float:
    """Smallest bump slope -phi'(0) for which the focusing estimate closes.

    max of 16 C_U sup(gamma1 - h^2/g) / (c'(theta_star) C_L ln 2) and
    exp(sup(gamma1 - h^2/g)) / C_L.  Requires c'(theta_star) > 0; a material
    with constant wave speed has no admissible background angle.
    """
    cps = float(c_prime_of(material, theta_star))
    if not cps > 0.0:
        raise ValueError(
            f"background angle inadmissible: c'(theta_star) = {cps:.6g} must be positive")
    bounds = bounds_of(material, n_samples)
    damping_norm = bounds.damping_sup  # = sup |gamma1 - h^2/g| since the margin is positive
    first = 16.0 * bounds.C_U * damping_norm / (cps * bounds.C_L * math.log(2.0))
    second = math.exp(damping_norm) / bounds.C_L
    return max(first, second)


def auto_amplitude(material: LeslieMaterial, theta_star: float,
                   slack: float = 1.1) -> float:
    """Default amplitude: the threshold padded by `slack`, rounded up to an integer."""
    return float(math.ceil(slack * amplitude_threshold(material, theta_star)))


# --- quadrature helpers -------------------------------------------------------


def _simpson(values: np.ndarray, h: float) -> float:
    """Composite Simpson on an odd number of equispaced values."""
    return float(h / 3.0 * (values[0] + values[-1] + 4.0 * values[1:-1:2].sum()
                            + 2.0 * values[2:-1:2].sum()))


def integrate_smooth(f, a: float, b: float, tol: float = 1e-10,
                     n0: int = 256, max_doublings: int = 14) -> float:
    """Composite Simpson with panel doubling until the Richardson error estimate
    |I_2n - I_n| / 15 drops below tol * max(1, |I|)."""
    n = n0
    xs = np.linspace(a, b, n + 1)
    coarse = _simpson(f(xs), (b - a) / n)
    for _ in range(max_doublings):
        n *= 2
        xs = np.linspace(a, b, n + 1)
        fine = _simpson(f(xs), (b - a) / n)
        if abs(fine - coarse) / 15.0 <= tol * max(1.0, abs(fine)):
            return fine
        coarse = fine
    raise ValueError(f"quadrature did not reach tol={tol} with {n} panels")


def cumulative_simpson(values: np.ndarray, h: float) -> np.ndarray:
    """Cumulative integral at every node of equispaced samples (Simpson pairs,
    quadratic correction at odd nodes).  values must have odd length."""
    n = values.shape[0]
    if n % 2 == 0:
        raise ValueError("cumulative_simpson needs an odd number of samples")
    out = np.zeros(n)
    pair = h / 3.0 * (values[0:-2:2] + 4.0 * values[1:-1:2] + values[2::2])
    out[2::2] = np.cumsum(pair)
    out[1::2] = out[0:-2:2] + h / 12.0 * (5.0 * values[0:-2:2] + 8.0 * values[1:-1:2]
                                          - values[2::2])
    return out


# --- the cubic blend ----------------------------------------------------------


@dataclass(frozen=True)
class ChiCoefficients:
    """chi(x) = c3 x^3 + c2 x^2 + c1 x + c0 on [x_lo, x_hi] = [epsilon, epsilon + 2]."""

    c3: float
    c2: float
    c1: float
    c0: float
    x_lo: float
    x_hi: float
    crossing_integral: float  # int_{-eps}^{eps} (h/g) c theta' da, the value blended down

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return ((self.c3 * x + self.c2) * x + self.c1) * x + self.c0

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return (3.0 * self.c3 * x + 2.0 * self.c2) * x + self.c1


def _flux_weight(spec: InitialDataSpec, material: LeslieMaterial, a):
    """(h/g) c evaluated on theta(x=epsilon*a, t=0), times phi'(a) = theta'."""
    theta = spec.theta_star + spec.epsilon * phi(spec, a)
    ratio = h_of(material, theta) / g_of(material, theta)
    return ratio * c_of(material, theta) * phi_prime(spec, a)


def crossing_integral(spec: InitialDataSpec, material: LeslieMaterial,
                      tol: float = 1e-10) -> float:
    """int_{-epsilon}^{epsilon} (h/g) c theta' da = epsilon int_{-1}^{1} (h/g) c phi' da."""
    return spec.epsilon * integrate_smooth(lambda a: _flux_weight(spec, material, a),
                                           -1.0, 1.0, tol=tol)


def chi_build(spec: InitialDataSpec, material: LeslieMaterial) -> ChiCoefficients:
    """Solve the four Hermite constraints for the cubic blend.

    chi(eps) = crossing integral, chi'(eps) = 0 (phi' vanishes there),
    chi(eps + 2) = 0, chi'(eps + 2) = 0.  The 4x4 Vandermonde-style system on
    an interval of width 2 is always solvable.
    """
    eps = spec.epsilon
    lo, hi = eps, eps + 2.0
    I = crossing_integral(spec, material)
    A = np.array([
        [lo ** 3, lo ** 2, lo, 1.0],
        [3.0 * lo ** 2, 2.0 * lo, 1.0, 0.0],
        [hi ** 3, hi ** 2, hi, 1.0],
        [3.0 * hi ** 2, 2.0 * hi, 1.0, 0.0],
    ])
    rhs = np.array([I, 0.0, 0.0, 0.0])
    c3, c2, c1, c0 = np.linalg.solve(A, rhs)
    return ChiCoefficients(c3=float(c3), c2=float(c2), c1=float(c1), c0=float(c0),
                           x_lo=lo, x_hi=hi, crossing_integral=I)


# --- profile evaluation ---------------------------------------------------------


def theta0(spec: InitialDataSpec, x):
    return spec.theta_star + spec.epsilon * phi(spec, np.asarray(x, dtype=float) / spec.epsilon)


def theta1(spec: InitialDataSpec, material: LeslieMaterial, x):
    x = np.asarray(x, dtype=float)
    return (-c_of(material, theta0(spec, x)) + spec.epsilon) * phi_prime(spec, x / spec.epsilon)


_U0_TABLE_SIZE = 2 ** 15  # panels on [-1, 1]; Simpson error way below junction tolerances


@lru_cache(maxsize=8)
def _u0_table(spec: InitialDataSpec, material: LeslieMaterial):
    a = np.linspace(-1.0, 1.0, _U0_TABLE_SIZE + 1)
    f = _flux_weight(spec, material, a)
    cumulative = spec.epsilon * cumulative_simpson(f, 2.0 / _U0_TABLE_SIZE)
    return a, cumulative


def u0(spec: InitialDataSpec, material: LeslieMaterial, x):
    """Initial velocity: zero outside [-eps, eps+2], cumulative flux integral on
    the bump, cubic blend past it."""
    x = np.asarray(x, dtype=float)
    chi = chi_build(spec, material)
    a_tab, cum_tab = _u0_table(spec, material)
    out = np.zeros(x.shape)
    eps = spec.epsilon
    on_bump = (x >= -eps) & (x <= eps)
    out[on_bump] = np.interp(x[on_bump] / eps, a_tab, cum_tab)
    on_blend = (x > eps) & (x < eps + 2.0)
    out[on_blend] = chi.value(x[on_blend])
    return out


# --- state assembly -------------------------------------------------------------


@dataclass(frozen=True)
class InitialDataReport:
    """What the construction produced, in the quantities the estimates track."""

    E0: float
    sup_J0: float
    sup_R0: float
    sup_S0: float
    S_at_origin: float
    origin_lower_bound: float  # S(0,0) must exceed this when the hypotheses hold
    amplitude_min: float  # threshold for this material/background (nan if inadmissible)
    j0_analytic_bound: float  # sup(h/g) max(1, 3/2 C_U) M epsilon
    k0: float


def build_initial_state(spec: InitialDataSpec, material: LeslieMaterial, grid: Grid,
                        t_end: float = 1.0, check_hypotheses: bool = True,
                        ) -> tuple[State, InitialDataReport]:
    """Sample the seeded data on the grid and report its diagnostics.

    Requires the domain to contain [-epsilon, epsilon + 2] with margin
    C_U * t_end + 1 on both sides so nothing reaches the walls.  With
    check_hypotheses (default) the background angle must be admissible and the
    amplitude must clear the threshold; disabling the check allows control
    runs with a fixed small amplitude.
    """
    from .material import hg_sup  # local import: only needed for the report

    bounds = bounds_of(material)
    eps = spec.epsilon
    lo_needed = -eps - bounds.C_U * t_end - 1.0
    hi_needed = eps + 2.0 + bounds.C_U * t_end + 1.0
    if grid.x_min > lo_needed or grid.x_max < hi_needed:
        raise ValueError(
            f"domain [{grid.x_min}, {grid.x_max}] must contain "
            f"[{lo_needed:.3f}, {hi_needed:.3f}] (support plus wave margin)")

    amplitude_min = math.nan
    if check_hypotheses:
        amplitude_min = amplitude_threshold(material, spec.theta_star)
        if spec.amplitude <= amplitude_min:
            raise ValueError(
                f"amplitude {spec.amplitude} does not clear the threshold {amplitude_min:.3f}")
        if not eps < float(c_of(material, spec.theta_star)):
            raise ValueError(f"epsilon {eps} must stay below c(theta_star)")

    x = grid.nodes()
    th0 = theta0(spec, x)
    slope = phi_prime(spec, x / eps)
    c0 = c_of(material, th0)
    R0 = eps * slope  # theta1 + c theta0' collapses to this identically
    S0 = (-2.0 * c0 + eps) * slope
    state = State(t=0.0, theta=th0, u=u0(spec, material, x), R=R0, S=S0)

    c_star = float(c_of(material, spec.theta_star))
    S_at_origin = (2.0 * c_star - eps) * spec.amplitude
    cps = float(c_prime_of(material, spec.theta_star))
    if cps > 0.0:
        origin_bound = max(
            16.0 * bounds.C_U * bounds.damping_sup / (cps * math.log(2.0)),
            math.exp(bounds.damping_sup))
    else:
        origin_bound = math.nan
    if check_hypotheses and not S_at_origin > origin_bound:
        raise ValueError(
            f"S(0,0) = {S_at_origin:.3f} fails its lower bound {origin_bound:.3f}")

    ratio_sup = hg_sup(material)
    report = InitialDataReport(
        E0=energy(state, material, grid),
        sup_J0=float(np.max(np.abs(compute_J(state, material, grid)))),
        sup_R0=float(np.max(np.abs(R0))),
        sup_S0=float(np.max(np.abs(S0))),
        S_at_origin=S_at_origin,
        origin_lower_bound=origin_bound,
        amplitude_min=amplitude_min,
        j0_analytic_bound=ratio_sup * max(1.0, 1.5 * bounds.C_U) * spec.amplitude * eps,
        k0=spec.k0,
    )
    return state, report


def build_smooth_state(material: LeslieMaterial, grid: Grid,
                       theta_star: float = math.pi / 4.0,
                       amplitude: float = 0.1) -> State:
    """Low-amplitude C^1 data for convergence studies, far from any trigger.

    theta(x, 0) = theta_star + amplitude sin^2(pi x / 2) on |x| <= 2 and the
    angle moves as a pure forward wave (R(x, 0) = 0); the velocity starts at
    rest.  Both bump derivatives vanish at |x| = 2, so the data is C^1 with
    compact support and no theorem machinery applies.
    """
    x = grid.nodes()
    inside = np.abs(x) <= 2.0
    th0 = theta_star + amplitude * np.sin(0.5 * math.pi * x) ** 2 * inside
    th0_x = 0.5 * math.pi * amplitude * np.sin(math.pi * x) * inside
    S0 = -2.0 * c_of(material, th0) * th0_x
    return State(t=0.0, theta=th0, u=np.zeros_like(x), R=np.zeros_like(x), S=S0)
