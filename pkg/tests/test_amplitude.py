import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from debris_resonance.amplitude import (
    amplitude_scan,
    complete_square,
    pendulum_reduce,
    resonant_action,
    width_from_amplitude,
    width_grid,
)
from debris_resonance.core import STANDARD
from debris_resonance.hamiltonian import ToyModel21, bifurcation_function, build_model, solve_i0
from debris_resonance.kaula import GEO, GPS, ResonanceId

r = math.radians


def test_resonant_action_values():
    L1, a1 = resonant_action(GEO)
    L2, a2 = resonant_action(GPS)
    assert a1 == pytest.approx(42164.17, abs=0.01)
    assert a2 == pytest.approx(26561.8, abs=0.5)
    assert a1 / a2 == pytest.approx(2 ** (2 / 3), rel=1e-14)
    assert a1 == pytest.approx(L1 ** 2 / STANDARD.mu_E, rel=1e-14)
    assert a2 == pytest.approx(L2 ** 2 / STANDARD.mu_E, rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.floats(-10.0, 10.0), st.floats(1e-3, 10.0), st.floats(-100.0, 100.0))
def test_complete_square_identity(alpha, beta, x):
    B, C = complete_square(alpha, beta)
    assert C == pytest.approx(math.sqrt(beta))
    lhs = alpha * x - beta * x * x
    rhs = -(B + C * x) ** 2 + B * B
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9 * (1 + abs(alpha * x) + beta * x * x))


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-12, 1e-5), st.floats(1.5, 100.0))
def test_sqrt_a_scaling(A, k):
    L, mu = 34.7, 1.0
    dL1, w1 = width_from_amplitude(A, L, mu)
    dL2, w2 = width_from_amplitude(k * k * A, L, mu)
    assert dL2 == pytest.approx(k * dL1, rel=1e-13)
    assert w1 > 0.0 and w2 > w1


def test_zero_amplitude_gives_zero_width():
    p = pendulum_reduce(build_model(GEO, "deg4", labels=()), 0.01, 0.1)
    assert p.A == 0.0 and p.full_width == 0.0 and p.delta_L == 0.0


def test_reduction_fields():
    p = pendulum_reduce(build_model(GEO, "deg4"), 0.005, 0.0)
    assert p.label == "T1"
    assert p.beta > 0.0 and p.A > 0.0 and p.full_width > 0.0
    assert p.a_res == pytest.approx(p.L_res ** 2 / STANDARD.mu_E, rel=1e-14)
    # alpha = mu^2/L^3 + secular correction; mu^2/L^3 = p/q = 1 in theta_dot units
    assert p.alpha == pytest.approx(1.0, abs=1e-3)
    g1 = build_model(GEO, "deg4").coefficient_magnitudes(p.a_res, 0.005, 0.0, ("T1",))[0, 0]
    assert p.A == pytest.approx(g1, rel=1e-12)
    data = json.loads(p.report())
    assert data["term"] == "T1" and data["full_width_km"] == pytest.approx(p.full_width)


def test_reduce_rejects_hyperbolic():
    with pytest.raises(ValueError):
        pendulum_reduce(GEO, 1.0, 0.0)


def test_any_resonance_reduces():
    p = pendulum_reduce(ResonanceId(3, 1), 0.01, r(20.0))
    assert p.A > 0.0 and p.alpha == pytest.approx(3.0, abs=1e-3)


def test_geo_width_decreases_with_e():
    e = np.linspace(0.0, 0.5, 51)
    w = width_grid(build_model(GEO, "deg4"), e, r(0.1))
    assert np.all(np.diff(w) < 0)


def test_geo_width_decreases_with_i():
    i = np.radians(np.linspace(0.0, 60.0, 61))
    w = width_grid(build_model(GEO, "deg4"), 0.005, i)
    assert np.all(np.diff(w) < 0)


def test_gps_t3_width_follows_bifurcation_function():
    toy = ToyModel21.build(("t3",))
    vals = []
    for deg in (10.0, 25.0, 34.42, 50.0, 65.0, 80.0):
        p = pendulum_reduce(toy, 0.005, r(deg))
        vals.append(p.A / abs(bifurcation_function(r(deg))))
    assert np.allclose(vals, vals[0], rtol=1e-12)


def test_gps_width_shape_at_small_e():
    i = np.linspace(0.0, 90.0, 901)
    w = width_grid(build_model(GPS, "deg4"), 0.005, np.radians(i))
    up = (i > 2.0) & (i < 34.0)
    assert np.all(np.diff(w[up]) > 0)
    assert i[np.argmax(w[i < 60])] == pytest.approx(34.42, abs=0.5)
    late = i >= 50.0
    assert i[late][np.argmin(w[late])] == pytest.approx(70.53, abs=1.0)
    after = i > 72.0
    assert np.all(np.diff(w[after]) > 0)


def test_gps_width_kink_at_dominance_boundary():
    g = build_model(GPS, "deg4")
    i0 = math.degrees(solve_i0(0.5))
    assert 38.5 <= i0 <= 40.5
    deg = np.arange(36.0, 43.01, 0.25)
    labels = [pendulum_reduce(g, 0.5, r(d)).label for d in deg]
    widths = np.array([pendulum_reduce(g, 0.5, r(d)).full_width for d in deg])
    switch = deg[[k for k in range(1, len(deg)) if labels[k] != labels[k - 1]][0]]
    assert labels[0] == "t1" and labels[-1] == "t2"
    assert abs(switch - i0) <= 0.5
    slope = np.diff(widths) / 0.25
    left, right = slope[deg[:-1] < switch - 0.5], slope[deg[:-1] > switch + 0.25]
    assert np.all(left < 0) and np.all(right > 0)


def test_amplitude_scan_grid():
    res = amplitude_scan(build_model(GEO, "deg4"), (0.0, 0.5), (0.0, 60.0), resolution=(6, 4))
    assert res.values.shape == (4, 6)
    assert np.all(res.values > 0)
    assert res.values[0, 0] == pytest.approx(pendulum_reduce(build_model(GEO, "deg4"), 0.0, 0.0).full_width,
                                             rel=1e-12)
