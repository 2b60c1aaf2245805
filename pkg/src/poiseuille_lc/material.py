"""Material coefficients for nematic liquid crystal flow between parallel plates.

A material is the set of six Leslie viscosities alpha1..alpha6 together with
the rotational viscosities gamma1, gamma2 and the Frank elastic constants
K1 (splay) and K3 (bend).  The director angle theta enters the flow equations
only through four derived coefficient functions:

    g(theta) = alpha1 sin^2 cos^2 + (alpha5 - alpha2)/2 sin^2
               + (alpha3 + alpha6)/2 cos^2 + alpha4/2      effective shear viscosity
    h(theta) = alpha3 cos^2 - alpha2 sin^2                 director-shear coupling
    c(theta) = sqrt(K1 cos^2 + K3 sin^2)                   director wave speed
    b(theta) = g - h^2/gamma1                              reduced viscosity

All are pi-periodic and even in (theta - pi/2), i.e. functions of cos(2 theta)
alone.  A consistent material satisfies the Leslie relations

    gamma1 = alpha3 - alpha2,   gamma2 = alpha6 - alpha5,
    alpha2 + alpha3 = alpha6 - alpha5              (Onsager-Parodi)

and the empirical positivity inequalities; `validate` checks all of them and
`bounds_of` computes the global coefficient bounds the estimates rely on,
in particular the effective damping margin  inf(gamma1 - h^2/g) > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

EQUALITY_RTOL = 1e-12
DEFAULT_BOUND_SAMPLES = 4096


@dataclass(frozen=True)
class LeslieMaterial:
    """Leslie viscosities, rotational viscosities and Frank constants."""

    alpha1: float
    alpha2: float
    alpha3: float
    alpha4: float
    alpha5: float
    alpha6: float
    gamma1: float
    gamma2: float
    K1: float
    K3: float


@dataclass(frozen=True)
class Check:
    """One validated relation: an equality residual or an inequality slack."""

    name: str
    kind: str  # "equality" or "inequality"
    value: float  # residual (equality) or slack (inequality, must be > 0)
    ok: bool


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[Check, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failed(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.checks if not c.ok)

    def __str__(self) -> str:
        lines = []
        for c in self.checks:
            status = "ok" if c.ok else "FAIL"
            label = "residual" if c.kind == "equality" else "slack"
            lines.append(f"{c.name:32s} {status:4s}  {label} = {c.value:+.6e}")
        return "\n".join(lines)


def validate(material: LeslieMaterial) -> ValidationReport:
    """Check the Leslie relations and the empirical inequalities.

    Equalities are accepted within relative tolerance 1e-12; inequalities are
    strict.  Returns a report rather than raising, so callers can display all
    violations at once.
    """
    m = material
    checks = []

    def equality(name, lhs, rhs):
        scale = max(1.0, abs(lhs), abs(rhs))
        residual = lhs - rhs
        checks.append(Check(name, "equality", residual, abs(residual) <= EQUALITY_RTOL * scale))

    def inequality(name, slack):
        checks.append(Check(name, "inequality", slack, slack > 0.0))

    equality("gamma1_identity", m.gamma1, m.alpha3 - m.alpha2)
    equality("gamma2_identity", m.gamma2, m.alpha6 - m.alpha5)
    equality("parodi", m.alpha2 + m.alpha3, m.alpha6 - m.alpha5)
    inequality("alpha4_positive", m.alpha4)
    inequality("shear_sum_positive", 2 * m.alpha1 + 3 * m.alpha4 + 2 * m.alpha5 + 2 * m.alpha6)
    inequality("gamma1_positive", m.gamma1)
    inequality("stretch_sum_positive", 2 * m.alpha4 + m.alpha5 + m.alpha6)
    inequality(
        "dissipation_discriminant",
        4 * m.gamma1 * (2 * m.alpha4 + m.alpha5 + m.alpha6) - (m.alpha2 + m.alpha3 + m.gamma2) ** 2,
    )
    inequality("K1_positive", m.K1)
    inequality("K3_positive", m.K3)
    return ValidationReport(tuple(checks))


# --- coefficient evaluators ------------------------------------------------
#
# Evaluators are vectorized over theta and never raise for out-of-range
# angles (everything is pi-periodic by construction).


def _g_from_s2(material: LeslieMaterial, s2):
    m = material
    c2 = 1.0 - s2
    return m.alpha1 * s2 * c2 + 0.5 * (m.alpha5 - m.alpha2) * s2 + 0.5 * (m.alpha3 + m.alpha6) * c2 + 0.5 * m.alpha4


def _h_from_s2(material: LeslieMaterial, s2):
    return material.alpha3 * (1.0 - s2) - material.alpha2 * s2


def g_of(material: LeslieMaterial, theta):
    """Effective shear viscosity g(theta)."""
    return _g_from_s2(material, np.sin(theta) ** 2)


def h_of(material: LeslieMaterial, theta):
    """Director-shear coupling h(theta) = alpha3 cos^2 - alpha2 sin^2."""
    return _h_from_s2(material, np.sin(theta) ** 2)


def h_of_rotational(material: LeslieMaterial, theta):
    """Equivalent closed form (gamma1 + gamma2 cos 2 theta)/2.

    Agrees with `h_of` exactly when the Leslie relations hold; kept as an
    independent cross-check.
    """
    return 0.5 * (material.gamma1 + material.gamma2 * np.cos(2.0 * np.asarray(theta)))


def c_of(material: LeslieMaterial, theta):
    """Director wave speed c(theta) = sqrt(K1 cos^2 + K3 sin^2)."""
    s2 = np.sin(theta) ** 2
    return np.sqrt(material.K1 * (1.0 - s2) + material.K3 * s2)


def c_prime_of(material: LeslieMaterial, theta):
    """Derivative of the wave speed, (K3 - K1) sin cos / c."""
    th = np.asarray(theta, dtype=float)
    return (material.K3 - material.K1) * np.sin(th) * np.cos(th) / c_of(material, th)


def b_of(material: LeslieMaterial, theta):
    """Reduced viscosity b(theta) = g - h^2/gamma1 (positive for valid materials)."""
    h = h_of(material, theta)
    return g_of(material, theta) - h * h / material.gamma1


def damping_of(material: LeslieMaterial, theta):
    """Effective director damping gamma1 - h^2/g in the rewritten wave equation."""
    h = h_of(material, theta)
    return material.gamma1 - h * h / g_of(material, theta)


def wave_coefficients(material: LeslieMaterial, theta):
    """(g, h, c, c') sharing one sin/cos evaluation.

    Matches the individual evaluators bit for bit; exists because the solver
    asks for all four on every stage and the trig calls dominate otherwise.
    """
    m = material
    sin_t = np.sin(theta)
    cos_t = np.cos(theta)
    s2 = sin_t ** 2
    g = _g_from_s2(m, s2)
    h = _h_from_s2(m, s2)
    c = np.sqrt(m.K1 * (1.0 - s2) + m.K3 * s2)
    c_prime = (m.K3 - m.K1) * sin_t * cos_t / c
    return g, h, c, c_prime


# --- global bounds ----------------------------------------------------------


@dataclass(frozen=True)
class MaterialBounds:
    """Global coefficient bounds over all director angles."""

    g_L: float
    g_U: float
    h_L: float
    h_U: float
    C_L: float  # inf c
    C_U: float  # sup c
    damping_margin: float  # inf (gamma1 - h^2/g)
    damping_sup: float  # sup (gamma1 - h^2/g)


def _quadratic_in_u(material: LeslieMaterial):
    """Coefficients (A, B, C) of g as a quadratic A + B u + C u^2 in u = cos 2 theta."""
    m = material
    C = -m.alpha1 / 4.0
    B = (m.alpha3 + m.alpha6 - m.alpha5 + m.alpha2) / 4.0
    A = m.alpha1 / 4.0 + (m.alpha5 - m.alpha2 + m.alpha3 + m.alpha6) / 4.0 + 0.5 * m.alpha4
    return A, B, C


def _critical_angles(material: LeslieMaterial) -> list[float]:
    """Interior critical angles of g, b and the damping, in closed form.

    All coefficient functions are polynomials or rationals in u = cos 2 theta,
    so their critical points solve linear or quadratic equations in u.  These
    angles make the sampled bounds exact rather than grid-limited.
    """
    m = material
    A, B, C = _quadratic_in_u(material)
    us: list[float] = []

    def push(u):
        if math.isfinite(u) and -1.0 < u < 1.0:
            us.append(u)

    # g' = B + 2Cu = 0
    if C != 0.0:
        push(-B / (2.0 * C))
    # b' = 0:  u (2C - gamma2^2/(2 gamma1)) = gamma2/2 - B
    denom = 2.0 * C - m.gamma2 ** 2 / (2.0 * m.gamma1)
    if denom != 0.0:
        push((0.5 * m.gamma2 - B) / denom)
    # damping' = 0:  h = 0, or  u (2 gamma1 C - gamma2 B) = 2 gamma2 A - gamma1 B
    if m.gamma2 != 0.0:
        push(-m.gamma1 / m.gamma2)
    denom = 2.0 * m.gamma1 * C - m.gamma2 * B
    if denom != 0.0:
        push((2.0 * m.gamma2 * A - m.gamma1 * B) / denom)

    return [0.5 * math.acos(u) for u in us]


def bounds_of(material: LeslieMaterial, n_samples: int = DEFAULT_BOUND_SAMPLES) -> MaterialBounds:
    """Compute global coefficient bounds over theta in [0, pi).

    Uses `n_samples` equispaced angles plus the closed-form candidates
    (0, pi/4, pi/2 and the interior critical angles), so for consistent
    materials the reported extrema are exact to rounding.  Raises ValueError
    for n_samples < 64, invalid materials, non-positive viscosity bounds or a
    non-positive damping margin.
    """
    if n_samples < 64:
        raise ValueError(f"n_samples must be >= 64, got {n_samples}")
    report = validate(material)
    if not report.ok:
        raise ValueError("material fails validation: " + ", ".join(report.failed))

    theta = np.linspace(0.0, np.pi, n_samples, endpoint=False)
    candidates = np.array([0.0, np.pi / 4, np.pi / 2] + _critical_angles(material))
    theta = np.concatenate([theta, candidates])

    g = g_of(material, theta)
    h = h_of(material, theta)
    c = c_of(material, theta)
    damping = material.gamma1 - h * h / g

    bounds = MaterialBounds(
        g_L=float(g.min()),
        g_U=float(g.max()),
        h_L=float(h.min()),
        h_U=float(h.max()),
        C_L=float(c.min()),
        C_U=float(c.max()),
        damping_margin=float(damping.min()),
        damping_sup=float(damping.max()),
    )
    if bounds.g_L <= 0.0:
        raise ValueError(f"shear viscosity must stay positive, inf g = {bounds.g_L}")
    if bounds.damping_margin <= 0.0:
        raise ValueError(f"damping margin must be positive, inf(gamma1 - h^2/g) = {bounds.damping_margin}")
    return bounds


def hg_sup(material: LeslieMaterial, n_samples: int = DEFAULT_BOUND_SAMPLES) -> float:
    """sup over theta of |h/g|, with closed-form critical candidates included."""
    m = material
    A, B, C = _quadratic_in_u(material)
    theta = np.linspace(0.0, np.pi, n_samples, endpoint=False)
    extra = [0.0, np.pi / 4, np.pi / 2]
    # (h/g)' = 0:  gamma2 C u^2 + 2 gamma1 C u + (gamma1 B - gamma2 A) = 0
    coeffs = [m.gamma2 * C, 2.0 * m.gamma1 * C, m.gamma1 * B - m.gamma2 * A]
    if any(abs(a) > 0.0 for a in coeffs[:2]):
        for u in np.roots(coeffs):
            if abs(u.imag) == 0.0 and -1.0 < u.real < 1.0:
                extra.append(0.5 * math.acos(u.real))
    theta = np.concatenate([theta, np.array(extra)])
    ratio = np.abs(h_of(material, theta) / g_of(material, theta))
    return float(ratio.max())


# --- presets ----------------------------------------------------------------


@dataclass(frozen=True)
class Preset:
    name: str
    material: LeslieMaterial
    expects_blowup: bool
    description: str = field(default="")


PRESETS: dict[str, Preset] = {
    "special": Preset(
        name="special",
        material=LeslieMaterial(
            alpha1=0.0, alpha2=-1.0, alpha3=1.0, alpha4=1.0, alpha5=0.0, alpha6=0.0,
            gamma1=2.0, gamma2=0.0, K1=1.0, K3=2.0,
        ),
        expects_blowup=True,
        description="g = h = 1, constant damping 1; cusp forms before t = 1",
    ),
    "general": Preset(
        name="general",
        material=LeslieMaterial(
            alpha1=0.0, alpha2=-2.0, alpha3=1.0, alpha4=2.0, alpha5=1.0, alpha6=0.0,
            gamma1=3.0, gamma2=-1.0, K1=1.0, K3=2.0,
        ),
        expects_blowup=True,
        description="angle-dependent g, h; cusp forms before t = 6 ln2 / 7",
    ),
    "constant-speed": Preset(
        name="constant-speed",
        material=LeslieMaterial(
            alpha1=0.0, alpha2=-1.0, alpha3=1.0, alpha4=1.0, alpha5=0.0, alpha6=0.0,
            gamma1=2.0, gamma2=0.0, K1=1.0, K3=1.0,
        ),
        expects_blowup=False,
        description="K1 = K3 so c' = 0: no focusing mechanism, control case",
    ),
}


def preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise ValueError(f"unknown preset {name!r}; known presets: {known}") from None
