import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from erestab.errors import DomainError, InputError, RootBracketError
from erestab.kepler_cc import (
    KeplerOrbit,
    MassTriple,
    build_collinear_cc,
    cc_residuals,
    euler_quintic_coefficients,
    solve_central_configuration,
    solve_euler_quintic,
    solve_massless_position,
    solve_symmetric_y,
    symmetric_y_residual,
    theta_of_time,
)


def collinear_balance(masses, x):
    """Oracle: mismatch of the acceleration-to-position ratios of the three
    primaries at positions 0, x, 1 + x, built from direct force sums."""
    m = np.array([masses.m1, masses.m2, masses.m3])
    q = np.array([0.0, x, 1.0 + x])
    q = q - np.dot(m, q) / m.sum()
    acc = np.zeros(3)
    for i in range(3):
        for j in range(3):
            if i != j:
                acc[i] += m[j] * (q[j] - q[i]) / abs(q[j] - q[i]) ** 3
    return acc[0] / q[0] - acc[2] / q[2]


def bisect(f, lo, hi, iterations=200):
    f_lo = f(lo)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


masses_strategy = st.tuples(
    st.floats(0.01, 1.0), st.floats(0.01, 1.0), st.floats(0.01, 1.0)
).map(lambda w: MassTriple(*(np.array(w) / sum(w))))


def test_mass_triple_validation():
    with pytest.raises(InputError):
        MassTriple(0.5, 0.5, 0.5)
    with pytest.raises(InputError):
        MassTriple(-0.1, 0.6, 0.5)
    assert MassTriple.symmetric(0.4) == MassTriple(0.3, 0.4, 0.3)
    assert MassTriple.from_outer(0.2, 0.3).m2 == pytest.approx(0.5)


@pytest.mark.parametrize(
    "masses",
    [MassTriple(1 / 3, 1 / 3, 1 / 3), MassTriple(0.1, 0.6, 0.3), MassTriple(0.7, 0.05, 0.25), MassTriple(0.01, 0.01, 0.98)],
)
def test_quintic_root_matches_force_balance_oracle(masses):
    x = solve_euler_quintic(masses)
    oracle = bisect(lambda s: collinear_balance(masses, s), 1e-6, 1e3)
    assert x == pytest.approx(oracle, rel=1e-10)


def test_quintic_symmetric_masses_give_unit_ratio():
    for m2 in (0.0 + 1e-9, 0.3, 0.854, 0.99):
        assert solve_euler_quintic(MassTriple.symmetric(m2)) == pytest.approx(1.0, abs=1e-12)


def test_quintic_has_single_sign_change():
    coeffs = euler_quintic_coefficients(MassTriple(0.2, 0.3, 0.5))
    signs = np.sign(coeffs)
    assert np.count_nonzero(signs[1:] != signs[:-1]) == 1


@settings(max_examples=60, deadline=None)
@given(masses_strategy)
def test_collinear_normalization_and_multiplier(masses):
    cc = build_collinear_cc(masses, solve_euler_quintic(masses))
    m = masses.as_array()
    assert np.allclose(m @ cc.primaries, 0.0, atol=1e-13)
    assert 2.0 * cc.moment_of_inertia == pytest.approx(1.0, abs=1e-12)
    assert cc.mu == pytest.approx(cc.potential, rel=1e-14)
    assert cc.primaries[0, 0] < cc.primaries[1, 0] < cc.primaries[2, 0]


@settings(max_examples=60, deadline=None)
@given(masses_strategy)
def test_full_configuration_residuals(masses):
    cc = solve_central_configuration(masses)
    assert np.max(np.abs(cc_residuals(cc))) < 1e-10
    assert cc.a4[1] > 1e-8


def test_massless_position_balances_forces():
    cc = solve_central_configuration(MassTriple(0.2, 0.5, 0.3))
    force = np.zeros(2)
    for m, a in zip(cc.masses.as_array(), cc.primaries):
        d = a - cc.a4
        force += m * d / np.linalg.norm(d) ** 3
    assert np.allclose(force, -cc.mu * cc.a4, atol=1e-12)


def test_massless_position_recovered_from_any_partial():
    masses = MassTriple(0.13704981, 0.02140604, 0.84154415)
    cc = build_collinear_cc(masses, solve_euler_quintic(masses))
    a4 = solve_massless_position(cc)
    assert a4[1] > 1.0


def test_equilateral_limit_for_light_middle_mass():
    cc = solve_central_configuration(MassTriple(0.5 - 1e-12, 2e-12, 0.5 - 1e-12))
    d = np.linalg.norm(cc.primaries[2] - cc.primaries[0])
    assert np.linalg.norm(cc.a4 - cc.primaries[0]) == pytest.approx(d, rel=1e-6)


@pytest.mark.parametrize("m2", [0.0, 0.1, 0.5, 0.854, 0.95])
def test_symmetric_y_matches_bisection_oracle(m2):
    y = solve_symmetric_y(m2)
    oracle = bisect(lambda s: symmetric_y_residual(s, m2), 1.0, math.sqrt(3.0))
    assert y == pytest.approx(oracle, abs=1e-13)


@pytest.mark.parametrize("m2", [0.05, 0.3, 0.6, 0.9])
def test_symmetric_y_matches_full_pipeline(m2):
    cc = solve_central_configuration(MassTriple.symmetric(m2))
    half_span = cc.primaries[2, 0]
    assert cc.a4[0] == pytest.approx(0.0, abs=1e-12)
    assert cc.a4[1] / half_span == pytest.approx(solve_symmetric_y(m2), rel=1e-11)


def test_symmetric_y_rejects_out_of_range():
    with pytest.raises(InputError):
        solve_symmetric_y(1.0)


@pytest.mark.parametrize("e", [0.0, 0.3, 0.9])
def test_true_anomaly_is_monotone_lift(e):
    orbit = KeplerOrbit(e=e, mu=0.7)
    t = np.linspace(0.0, 2.0 * orbit.period, 2001)
    theta = theta_of_time(orbit, t)
    assert theta[0] == pytest.approx(0.0, abs=1e-15)
    assert theta[1000] == pytest.approx(2.0 * math.pi, abs=1e-12)
    assert np.all(np.diff(theta) > 0.0)


@pytest.mark.parametrize("e", [0.0, 0.4, 0.8])
def test_kepler_state_obeys_area_law_and_conic(e):
    orbit = KeplerOrbit(e=e, mu=1.3)
    t = np.linspace(0.0, orbit.period, 101)
    r, r_dot, theta, theta_dot = orbit.state(t)
    assert np.allclose(r, orbit.radius(theta), rtol=1e-12)
    assert np.allclose(r**2 * theta_dot, math.sqrt(orbit.mu * orbit.p), rtol=1e-12)
    h = 1e-6
    r_plus = orbit.state(t + h)[0]
    r_minus = orbit.state(t - h)[0]
    assert np.allclose((r_plus - r_minus) / (2 * h), r_dot, atol=1e-6)


def test_orbit_domain_checks():
    with pytest.raises(DomainError):
        KeplerOrbit(e=0.995, mu=1.0)
    with pytest.raises(DomainError):
        KeplerOrbit(e=-0.1, mu=1.0)
    assert KeplerOrbit(e=0.995, mu=1.0, e_max=0.999).e == 0.995


def test_root_bracket_error_carries_bracket():
    err = RootBracketError("x", (1.0, 2.0))
    assert err.bracket == (1.0, 2.0)
