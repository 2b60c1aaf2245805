"""Seeded bump construction: profile, thresholds, velocity blend, cancellations."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poiseuille_lc import (
    Grid,
    InitialDataSpec,
    amplitude_threshold,
    auto_amplitude,
    build_initial_state,
    build_smooth_state,
    c_of,
    g_of,
    h_of,
    preset,
)
from poiseuille_lc.initial_data import (
    PROFILE_ENERGY_NORM,
    chi_build,
    crossing_integral,
    integrate_smooth,
    phi,
    phi_prime,
    theta0,
    theta1,
    u0,
)

SPECIAL = preset("special").material
GENERAL = preset("general").material

# Frozen threshold values; independently reproduced by
# test_threshold_matches_dense_sampling below.
THRESHOLD_SPECIAL = 79.96227554071498
THRESHOLD_GENERAL = 186.57864292833497


def spec_for(mat, epsilon=0.05):
    return InitialDataSpec(epsilon=epsilon, theta_star=math.pi / 4,
                           amplitude=auto_amplitude(mat, math.pi / 4))


def test_amplitude_threshold_frozen_values():
    assert amplitude_threshold(SPECIAL, math.pi / 4) == pytest.approx(
        THRESHOLD_SPECIAL, rel=1e-12)
    assert amplitude_threshold(GENERAL, math.pi / 4) == pytest.approx(
        THRESHOLD_GENERAL, rel=1e-12)
    assert auto_amplitude(SPECIAL, math.pi / 4) == 88.0
    assert auto_amplitude(GENERAL, math.pi / 4) == 206.0


def test_threshold_matches_dense_sampling():
    # restate the two competing lower bounds from densely sampled coefficient
    # extrema, bypassing the closed-form critical angles inside bounds_of
    for mat, frozen in ((SPECIAL, THRESHOLD_SPECIAL), (GENERAL, THRESHOLD_GENERAL)):
        theta = np.linspace(0.0, math.pi, 1 << 20, endpoint=False)
        damping = mat.gamma1 - h_of(mat, theta) ** 2 / g_of(mat, theta)
        c = c_of(mat, theta)
        cps = float((c_of(mat, math.pi / 4 + 1e-7) - c_of(mat, math.pi / 4 - 1e-7))
                    / 2e-7)
        first = 16.0 * c.max() * damping.max() / (cps * c.min() * math.log(2.0))
        second = math.exp(damping.max()) / c.min()
        assert max(first, second) == pytest.approx(frozen, rel=1e-6)


def test_threshold_requires_increasing_wave_speed():
    flat = preset("constant-speed").material
    with pytest.raises(ValueError, match="c'"):
        amplitude_threshold(flat, math.pi / 4)


def test_profile_energy_norm_matches_quadrature():
    spec = spec_for(SPECIAL)
    val = integrate_smooth(lambda a: phi_prime(spec, a) ** 2, -1.0, 1.0, tol=1e-13)
    assert val / spec.amplitude ** 2 == pytest.approx(PROFILE_ENERGY_NORM, rel=1e-12)
    assert PROFILE_ENERGY_NORM == pytest.approx(256.0 / 315.0, rel=1e-15)


def test_profile_support_and_slope():
    spec = spec_for(SPECIAL)
    a = np.linspace(-2.0, 2.0, 801)
    assert np.all(phi(spec, a)[np.abs(a) > 1.0] == 0.0)
    assert phi(spec, 0.0) == 0.0
    assert phi_prime(spec, 1.0) == 0.0 and phi_prime(spec, -1.0) == 0.0
    assert float(np.max(np.abs(phi_prime(spec, a)))) == spec.amplitude
    assert phi_prime(spec, 0.0) == -spec.amplitude


def test_chi_meets_its_four_constraints():
    for mat in (SPECIAL, GENERAL):
        spec = spec_for(mat)
        chi = chi_build(spec, mat)
        I = chi.crossing_integral
        assert chi.value(chi.x_lo) == pytest.approx(I, rel=1e-12, abs=1e-14)
        assert chi.derivative(chi.x_lo) == pytest.approx(0.0, abs=1e-12 * abs(I))
        assert chi.value(chi.x_hi) == pytest.approx(0.0, abs=1e-12 * abs(I))
        assert chi.derivative(chi.x_hi) == pytest.approx(0.0, abs=1e-12 * abs(I))


def test_chi_slope_within_its_budget():
    # |chi'| <= (3/2) sup(h/g) C_U C2 epsilon: cubic with both end slopes zero
    # peaks at 3/2 |I| / 2 in the middle, and |I| <= sup(h/g) C_U C2 epsilon
    from poiseuille_lc import bounds_of, hg_sup
    for mat in (SPECIAL, GENERAL):
        spec = spec_for(mat)
        chi = chi_build(spec, mat)
        x = np.linspace(chi.x_lo, chi.x_hi, 2001)
        budget = 1.5 * hg_sup(mat) * bounds_of(mat).C_U * spec.slope_bound * spec.epsilon
        assert float(np.max(np.abs(chi.derivative(x)))) <= budget * (1 + 1e-12)


def test_u0_is_continuous_at_junctions():
    spec = spec_for(GENERAL)
    mat = GENERAL
    eps = spec.epsilon
    d = 1e-9
    for x_j in (-eps, eps, eps + 2.0):
        left = float(u0(spec, mat, np.array([x_j - d]))[0])
        right = float(u0(spec, mat, np.array([x_j + d]))[0])
        assert left == pytest.approx(right, abs=1e-6)
    assert float(u0(spec, mat, np.array([-3.0]))[0]) == 0.0
    assert float(u0(spec, mat, np.array([4.0]))[0]) == 0.0


def test_crossing_integral_vanishes_for_the_profile():
    # the weight (h/g) c is evaluated at theta_star + epsilon phi(a), a function
    # of phi(a) alone, so the integrand is an exact a-derivative and the integral
    # telescopes to zero because phi(-1) = phi(1) = 0.  The blend then only has
    # to absorb quadrature residue, which scales with epsilon * amplitude.
    for mat in (SPECIAL, GENERAL):
        for epsilon in (0.2, 0.05):
            spec = InitialDataSpec(epsilon, math.pi / 4, 206.0)
            I = crossing_integral(spec, mat)
            assert abs(I) < 1e-10 * epsilon * spec.amplitude


def build_on(mat, epsilon=0.05, nx=16385, t_end=0.05):
    # symmetric limits put the origin on a node, so the peak slope -amplitude
    # at a = 0 is sampled exactly
    grid = Grid(-4.0, 4.0, nx)
    spec = spec_for(mat, epsilon)
    return spec, grid, *build_initial_state(spec, mat, grid, t_end=t_end)


def test_invariants_at_time_zero():
    spec, grid, state, report = build_on(GENERAL)
    x = grid.nodes()
    a = x / spec.epsilon
    c0 = c_of(GENERAL, theta0(spec, x))
    np.testing.assert_allclose(state.R, spec.epsilon * phi_prime(spec, a), atol=1e-12)
    np.testing.assert_allclose(state.S, (-2.0 * c0 + spec.epsilon) * phi_prime(spec, a),
                               rtol=1e-12)
    # theta_t + c theta_x collapses to epsilon phi' identically
    np.testing.assert_allclose(theta1(spec, GENERAL, x) + c0 * phi_prime(spec, a),
                               state.R, atol=1e-12)


def test_S_at_origin_value_and_hypothesis_margin():
    spec, grid, state, report = build_on(GENERAL)
    c_star = float(c_of(GENERAL, spec.theta_star))
    assert report.S_at_origin == pytest.approx(
        (2.0 * c_star - spec.epsilon) * spec.amplitude, rel=1e-12)
    assert report.S_at_origin > report.origin_lower_bound
    # theta(x, 0) sweeps c through its full range on the bump, reaching C_U at
    # points where |phi'| is still near the amplitude, so the sup sits strictly
    # between the origin value (12 percent below here) and the wave envelope
    from poiseuille_lc import bounds_of
    envelope = (2.0 * bounds_of(GENERAL).C_U - spec.epsilon) * spec.amplitude
    assert report.S_at_origin <= report.sup_S0 <= envelope * (1 + 1e-12)


def test_J0_cancellation_on_the_bump():
    # u0' cancels the -c part of theta_1, leaving J0 = (h/g) epsilon phi'.  The
    # residue is the second-order u_x stencil error on u0 (third derivative of
    # order amplitude^3 at the theorem amplitude), so it must shrink 4x per
    # grid doubling on top of staying small against the analytic J0 bound.
    from poiseuille_lc import compute_J
    errs = {}
    for nx in (16385, 32769):
        spec, grid, state, report = build_on(GENERAL, nx=nx)
        x = grid.nodes()
        J0 = compute_J(state, GENERAL, grid)
        inner = np.abs(x) <= spec.epsilon - 2 * grid.dx
        th = theta0(spec, x[inner])
        expected = (h_of(GENERAL, th) / g_of(GENERAL, th)
                    * spec.epsilon * phi_prime(spec, x[inner] / spec.epsilon))
        errs[nx] = float(np.max(np.abs(J0[inner] - expected)))
    assert errs[32769] < errs[16385] / 3.5
    assert errs[32769] < 6e-3 * report.j0_analytic_bound
    assert report.sup_J0 <= report.j0_analytic_bound * 1.01


def test_E0_scales_linearly_in_epsilon_to_first_order():
    # theta_t = (-c + epsilon) phi' carries an O(epsilon) backward part, so
    # E0 / epsilon = A - B epsilon + O(epsilon^2) with B > 0: each halving of
    # epsilon moves the ratio monotonically up toward the linear limit 2
    E0 = {eps: build_on(GENERAL, epsilon=eps, nx=65537)[3].E0
          for eps in (0.2, 0.1, 0.05)}
    r_coarse = E0[0.2] / E0[0.1]
    r_fine = E0[0.1] / E0[0.05]
    assert 1.7 < r_coarse < r_fine < 2.0


def test_domain_margin_is_enforced():
    spec = spec_for(GENERAL)
    with pytest.raises(ValueError, match="domain"):
        build_initial_state(spec, GENERAL, Grid(-1.0, 3.0, 1025), t_end=1.0)


def test_amplitude_threshold_is_enforced():
    spec = InitialDataSpec(epsilon=0.05, theta_star=math.pi / 4, amplitude=10.0)
    with pytest.raises(ValueError, match="threshold"):
        build_initial_state(spec, GENERAL, Grid(-4.0, 5.0, 1025), t_end=0.05)


def test_check_hypotheses_off_allows_small_amplitude():
    spec = InitialDataSpec(epsilon=0.05, theta_star=math.pi / 4, amplitude=10.0)
    state, report = build_initial_state(spec, GENERAL, Grid(-4.0, 5.0, 4097),
                                        t_end=0.05, check_hypotheses=False)
    assert math.isnan(report.amplitude_min)
    assert report.sup_S0 < 30.0


def test_epsilon_must_stay_below_wave_speed():
    spec = InitialDataSpec(epsilon=0.99, theta_star=0.0, amplitude=500.0)
    flatter = preset("general").material
    with pytest.raises(ValueError, match="epsilon|admissible"):
        build_initial_state(spec, flatter, Grid(-5.0, 6.0, 1025), t_end=0.05)


def test_spec_validation():
    with pytest.raises(ValueError, match="epsilon"):
        InitialDataSpec(epsilon=0.0, theta_star=0.7, amplitude=88.0)
    with pytest.raises(ValueError, match="amplitude"):
        InitialDataSpec(epsilon=0.1, theta_star=0.7, amplitude=0.0)
    with pytest.raises(ValueError, match="slack"):
        InitialDataSpec(epsilon=0.1, theta_star=0.7, amplitude=88.0, amplitude_slack=0.9)


def test_smooth_state_shape():
    grid = Grid(-3.5, 3.5, 4097)
    state = build_smooth_state(GENERAL, grid)
    assert np.all(state.u == 0.0) and np.all(state.R == 0.0)
    outside = np.abs(grid.nodes()) > 2.0
    np.testing.assert_allclose(state.theta[outside], math.pi / 4, atol=1e-15)
    assert np.all(state.S[outside] == 0.0)
    assert float(np.max(np.abs(state.S))) < 2.0


@given(epsilon=st.floats(min_value=0.05, max_value=0.3),
       slack=st.floats(min_value=1.0, max_value=2.0))
@settings(max_examples=15, deadline=None)
def test_construction_properties_across_epsilon(epsilon, slack):
    mat = SPECIAL
    amplitude = float(math.ceil(slack * THRESHOLD_SPECIAL))
    spec = InitialDataSpec(epsilon=epsilon, theta_star=math.pi / 4,
                           amplitude=amplitude, amplitude_slack=slack)
    grid = Grid(-4.0, 4.0, 16385)  # origin on a node: peak slope sampled exactly
    state, report = build_initial_state(spec, mat, grid, t_end=0.05)
    assert report.sup_J0 <= report.j0_analytic_bound * 1.15  # central-diff slack
    assert report.sup_R0 == pytest.approx(epsilon * amplitude, rel=1e-9)
    assert report.sup_S0 <= (2.0 * math.sqrt(2.0) - epsilon) * amplitude * (1 + 1e-9)
    assert state.is_finite()
