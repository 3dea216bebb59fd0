import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from debris_resonance.cartesian import (
    CartesianModel,
    Ephemeris,
    ForceModelConfig,
    _third_body,
    geopotential_spherical,
    geopotential_synodic,
    total_acceleration,
)
from debris_resonance.core import STANDARD, CartesianState, GravityCoefficients, default_coefficients, rotation_z
from debris_resonance.errors import BelowSurface, ConfigError
from debris_resonance.hamiltonian import j2_secular_rates
from debris_resonance.integrators import StepperConfig, integrate

CO = default_coefficients()
MU, RE = STANDARD.mu_E, STANDARD.R_E
AU = 1.495978707e8


def central_only():
    return GravityCoefficients()


def test_central_potential():
    X = np.array([7000.0, -3000.0, 2500.0])
    r = np.linalg.norm(X)
    assert geopotential_synodic(*X, coeffs=central_only()) == pytest.approx(MU / r, rel=1e-15)


def test_central_acceleration():
    r = np.array([7000.0, -3000.0, 2500.0])
    acc = total_acceleration(CartesianState(r, [0, 0, 0]), 123.0, coeffs=central_only())
    assert np.allclose(acc, -MU * r / np.linalg.norm(r) ** 3, rtol=1e-13, atol=0)


def test_polar_axis_degree_two():
    co = GravityCoefficients.from_cs([(2, 0, CO.Cnm(2, 0), 0.0), (2, 2, CO.Cnm(2, 2), CO.Snm(2, 2))])
    z = 9000.0
    V = geopotential_synodic(0.0, 0.0, z, coeffs=co, harmonics=[(2, 0), (2, 2)])
    assert V - MU / z == pytest.approx(MU / z * (RE / z) ** 2 * CO.Cnm(2, 0), rel=1e-12)


def test_dual_forms_agree():
    rng = np.random.default_rng(11)
    r = rng.uniform(6500.0, 60000.0, 100)
    lat = rng.uniform(-1.5, 1.5, 100)
    lon = rng.uniform(-math.pi, math.pi, 100)
    X, Y, Z = r * np.cos(lat) * np.cos(lon), r * np.cos(lat) * np.sin(lon), r * np.sin(lat)
    v1 = geopotential_synodic(X, Y, Z)
    v2 = geopotential_spherical(r, lat, lon)
    assert np.max(np.abs(v1 - v2) / np.abs(v2)) < 1e-12


def test_origin_rejected():
    with pytest.raises(ValueError):
        geopotential_synodic(0.0, 0.0, 0.0)


def test_below_surface():
    with pytest.raises(BelowSurface):
        total_acceleration(CartesianState([6000.0, 0.0, 0.0], [0, 0, 0]), 0.0)


def test_config_invariants():
    with pytest.raises(ConfigError):
        ForceModelConfig(area_to_mass=-1.0)
    with pytest.raises(ConfigError):
        ForceModelConfig(C_r=2.5)
    with pytest.raises(ConfigError):
        ForceModelConfig(degree=4, order=4)
    assert (2, 1) not in ForceModelConfig().harmonics()


def degree_two_by_hand(r, theta):
    """Degree-2 acceleration in the inertial frame, written with the rotated C22/S22 combinations."""
    x, y, z = r
    rr = math.sqrt(x * x + y * y + z * z)
    C20, C22, S22 = CO.Cnm(2, 0), CO.Cnm(2, 2), CO.Snm(2, 2)
    Cm = C22 * math.cos(2 * theta) - S22 * math.sin(2 * theta)
    Cp = C22 * math.sin(2 * theta) + S22 * math.cos(2 * theta)
    Q = Cm * (x * x - y * y) + 2 * Cp * x * y
    k = MU * RE * RE
    r5, r7 = rr ** -5, rr ** -7
    ax = k * (C20 * (1.5 * x * r5 - 7.5 * z * z * x * r7) + 6 * (Cm * x + Cp * y) * r5 - 15 * Q * x * r7)
    ay = k * (C20 * (1.5 * y * r5 - 7.5 * z * z * y * r7) + 6 * (-Cm * y + Cp * x) * r5 - 15 * Q * y * r7)
    az = k * (C20 * (4.5 * z * r5 - 7.5 * z ** 3 * r7) - 15 * Q * z * r7)
    return np.array([ax, ay, az]) - MU * np.asarray(r) / rr ** 3


def test_degree_two_matches_hand_form():
    rng = np.random.default_rng(3)
    cfg = ForceModelConfig(degree=2, order=2)
    theta_dot = STANDARD.theta_dot
    for _ in range(30):
        r = rng.normal(size=3) * 20000.0
        r *= max(1.0, 7000.0 / np.linalg.norm(r))
        t = rng.uniform(0.0, 1e5)
        acc = total_acceleration(CartesianState(r, [0, 0, 0]), t, cfg)
        hand = degree_two_by_hand(r, theta_dot * t)
        assert np.allclose(acc, hand, rtol=1e-12, atol=1e-15 * np.linalg.norm(hand))


def test_acceleration_is_potential_gradient():
    rng = np.random.default_rng(5)
    t = 4321.0
    theta = STANDARD.theta_dot * t
    for _ in range(20):
        r = rng.normal(size=3)
        r *= rng.uniform(7000.0, 50000.0) / np.linalg.norm(r)
        acc = total_acceleration(CartesianState(r, [0, 0, 0]), t)
        X = rotation_z(theta) @ r
        g = np.empty(3)
        for k in range(3):
            d = np.zeros(3)
            d[k] = 1e-3
            g[k] = (geopotential_synodic(*(X + d)) - geopotential_synodic(*(X - d))) / 2e-3
        assert np.allclose(acc, rotation_z(theta).T @ g, rtol=1e-6, atol=0)


@pytest.mark.parametrize("cfg", [ForceModelConfig(),
                                 ForceModelConfig(include_sun=True, include_moon=True, include_srp=True,
                                                  area_to_mass=0.1)])
def test_analytic_jacobian(cfg):
    m = CartesianModel(cfg)
    y = m.state_from_elements(np.array([42164.0, 26560.0]), 0.05, 0.4, 0.1, 0.2, 0.3)
    J = m.jacobian(0.7, y)
    Jfd = m.fd_jacobian(0.7, y)
    for n in range(y.shape[1]):
        assert np.max(np.abs(J[:, :, n] - Jfd[:, :, n])) <= 1e-6 * np.max(np.abs(J[:, :, n]))


def test_third_body_bracket_vanishes_at_origin():
    # the tidal bracket is linear in r near the origin
    rX = np.array([60.0, -5.0, 3.0])
    prev = None
    for s in (1e-2, 1e-4, 1e-6):
        r = np.array([[s], [0.5 * s], [-s]])
        acc, _ = _third_body(r, rX, 1.0, 1)
        diff = float(np.linalg.norm(acc))
        if prev is not None:
            assert diff == pytest.approx(0.01 * prev, rel=1e-3)
        prev = diff
    assert prev < 1e-11


def test_srp_points_away_from_sun():
    cfg = ForceModelConfig(degree=0, order=0, include_srp=True, area_to_mass=0.1)
    m0 = CartesianModel(ForceModelConfig(degree=0, order=0))
    m = CartesianModel(cfg)
    r = np.array([[6.6], [0.0], [0.0]])
    d = (m.acceleration(0.0, r)[0] - m0.acceleration(0.0, r)[0])[:, 0]
    rS = m.ephemeris.sun_position(0.0) / m.constants.length_unit_km
    assert float(d @ (r[:, 0] - rS)) > 0.0
    # magnitude ~ C_r P_r A/m at 1 AU
    mag = np.linalg.norm(d) * m.constants.length_unit_km / m.constants.time_unit_s ** 2 * 1e3  # m/s^2
    assert mag == pytest.approx(4.56e-6 * 0.1, rel=0.05)


# -- ephemerides --------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(st.floats(-1e10, 1e10))
def test_ephemeris_distance_bounds(t):
    eph = Ephemeris()
    assert 0.983 * AU <= np.linalg.norm(eph.sun_position(t)) <= 1.017 * AU
    assert abs(np.linalg.norm(eph.sun_position(t)) / STANDARD.a_S - 1) <= 0.03
    assert abs(np.linalg.norm(eph.moon_position(t)) / 384400.0 - 1) <= 0.15


def test_sun_epoch_longitude():
    eph = Ephemeris(sun_e=0.0)
    v = eph.sun_position(0.0)
    eps = math.radians(eph.obliquity_deg)
    ecl = np.array([v[0], math.cos(eps) * v[1] + math.sin(eps) * v[2], -math.sin(eps) * v[1] + math.cos(eps) * v[2]])
    assert math.degrees(math.atan2(ecl[1], ecl[0])) % 360 == pytest.approx(280.46, abs=1e-9)
    assert abs(ecl[2]) < 1e-6


def test_moon_period():
    eph = Ephemeris()
    t = np.arange(0.0, 400 * 86400.0, 600.0)
    lon = np.unwrap(np.array([math.atan2(p[1], p[0]) for p in (eph.moon_position(x) for x in t)]))
    turns = (lon - lon[0]) / (2 * math.pi)
    k = np.arange(1, int(turns[-1]) + 1)
    crossings = np.interp(k, turns, t)
    assert np.mean(np.diff(crossings)) / 86400.0 == pytest.approx(27.32, abs=0.05)


# -- conservation and secular rates --------------------------------------------

def test_jacobi_constant_conserved():
    m = CartesianModel(ForceModelConfig())
    y0 = m.state_from_elements(42164.0, 0.01, 0.1, 0.0)[:, 0]
    tu = m.constants.time_unit_s
    days = 100.0 * STANDARD.sidereal_day
    ts, ys = integrate(m.field, y0, 0.0, days / tu, StepperConfig(h=600.0, scheme="ABM12_11"), tu)
    C = np.array([m.jacobi_constant(t, y[:, None])[0] for t, y in zip(ts[::100], ys[::100])])
    assert np.max(np.abs(C - C[0])) <= 1e-8 * abs(C[0])


def test_j2_nodal_rate_from_propagation():
    m = CartesianModel(ForceModelConfig(degree=2, order=0))
    a, e, i = 7000.0, 0.001, math.radians(50.0)
    y0 = m.state_from_elements(a, e, i, 0.0, 0.0, 0.0)[:, 0]
    tu = m.constants.time_unit_s
    period = 2 * math.pi * math.sqrt(a ** 3 / MU)
    ts, ys = integrate(m.field, y0, 0.0, 10 * period / tu, StepperConfig(h=30.0, scheme="ABM12_11"), tu)
    Om = np.unwrap([float(m.elements_from_state(y[:, None])[5][0]) for y in ys])
    slope = np.polyfit(ts * tu, Om, 1)[0]
    expected, _ = j2_secular_rates(a, e, i)
    assert slope == pytest.approx(float(expected), rel=0.01)
