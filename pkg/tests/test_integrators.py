import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.linalg import expm

from debris_resonance.cartesian import CartesianModel, ForceModelConfig
from debris_resonance.core import GravityCoefficients
from debris_resonance.errors import ConfigError, NoConvergence
from debris_resonance.integrators import (
    ABMStepper,
    AugmentedState,
    StepperConfig,
    abm_integrate,
    adams_bashforth_coefficients,
    adams_moulton_coefficients,
    gauss_legendre_step,
    propagate_with_tangent,
    rk4_integrate,
    rk4_step,
)

ROT = np.array([[0.0, 1.0], [-1.0, 0.0]])


def zero(t, y):
    return np.zeros_like(y)


def kepler(t, y):
    r = y[:3]
    return np.concatenate([y[3:], -r / np.linalg.norm(r, axis=0) ** 3])


def kepler_state(e=0.3):
    # mu = 1, a = 1, start at pericentre
    rp = 1.0 - e
    return np.array([rp, 0.0, 0.0, 0.0, math.sqrt((1 + e) / rp), 0.0])


def test_config_invariants():
    with pytest.raises(ConfigError):
        StepperConfig(h=0.0)
    with pytest.raises(ConfigError):
        StepperConfig(tolerance=-1.0)
    with pytest.raises(ConfigError):
        StepperConfig(scheme="Euler")
    assert StepperConfig(h=600.0).step_in(13713.0) == pytest.approx(600.0 / 13713.0)


def test_augmented_state_rejects_zero_tangent():
    with pytest.raises(ValueError):
        AugmentedState(np.ones(2), np.zeros(2))


def test_rk4_zero_field():
    y = np.array([1.0, -2.0, 3.0])
    assert np.array_equal(rk4_step(zero, y, 0.0, 0.5), y)


def test_rk4_exponential_taylor():
    for h in (0.1, 0.05, 0.025):
        err = abs(rk4_step(lambda t, y: y, np.array([1.0]), 0.0, h)[0] - math.exp(h))
        # local error of classical RK4 on y' = y is h^5/120 + O(h^6)
        assert err == pytest.approx(h ** 5 / 120.0, rel=0.1)


def test_rk4_kepler_convergence_order():
    T = 2 * math.pi
    y0 = kepler_state()
    errs = []
    for n in (200, 400, 800):
        y = rk4_integrate(kepler, y0, 0.0, T, T / n)[1][-1]
        errs.append(np.linalg.norm(y - y0))
    slope = np.polyfit(np.log([1 / 200, 1 / 400, 1 / 800]), np.log(errs), 1)[0]
    assert slope == pytest.approx(4.0, abs=0.2)


def test_rk4_integrate_hits_end():
    ts, ys = rk4_integrate(lambda t, y: np.ones_like(y), np.zeros(1), 0.0, 1.05, 0.1)
    assert ts[-1] == 1.05 and ys[-1][0] == pytest.approx(1.05, rel=1e-14)


def test_gauss_legendre_order():
    errs = []
    for h in (0.4, 0.2):
        y = gauss_legendre_step(lambda t, y: ROT @ y, np.array([1.0, 0.0]), 0.0, h)
        errs.append(np.linalg.norm(y - np.array([math.cos(h), -math.sin(h)])))
    # local error O(h^13) for the 6-stage (order 12) collocation method
    assert errs[1] < errs[0] / 2 ** 11 or errs[1] < 1e-15


def test_abm_constant_field_exact():
    c = np.array([1.5, -0.25])
    ts, ys = abm_integrate(lambda t, y: c.copy(), np.zeros(2), 0.0, 30.0, StepperConfig(h=1.0, scheme="ABM12_11"))
    assert np.allclose(ys, ts[:, None] * c, rtol=1e-14, atol=1e-13)


def test_abm_needs_twelve_steps():
    with pytest.raises(ConfigError):
        abm_integrate(zero, np.ones(2), 0.0, 5.0, StepperConfig(h=1.0, scheme="ABM12_11"))


def test_abm_kepler_energy_drift_geo():
    m = CartesianModel(ForceModelConfig(degree=0, order=0), GravityCoefficients())
    tu = m.constants.time_unit_s
    y0 = m.state_from_elements(42164.0, 0.01, 0.1, 0.0)[:, 0]
    t1 = 100 * 2 * math.pi * math.sqrt(42164.0 ** 3 / 398600.4418) / tu
    ts, ys = abm_integrate(m.field, y0, 0.0, t1, StepperConfig(h=600.0, scheme="ABM12_11"), tu)
    E = 0.5 * np.sum(ys[:, 3:] ** 2, axis=1) - m.mu / np.linalg.norm(ys[:, :3], axis=1)
    assert np.max(np.abs(E - E[0])) < 1e-9 * abs(E[0])


def test_abm_matches_fine_rk4_on_geopotential_arc():
    m = CartesianModel(ForceModelConfig())
    tu = m.constants.time_unit_s
    y0 = m.state_from_elements(42164.0, 0.02, 0.3, 0.5, 0.1, 0.2)[:, 0]
    t1 = 86400.0 / tu
    ya = abm_integrate(m.field, y0, 0.0, t1, StepperConfig(h=600.0, scheme="ABM12_11"), tu)[1][-1]
    yr = rk4_integrate(m.field, y0, 0.0, t1, 60.0 / tu)[1][-1]
    assert np.linalg.norm(ya[:3] - yr[:3]) * m.constants.length_unit_km * 1e3 < 1.0


def test_corrector_converges_fast_on_linear_field():
    st = ABMStepper(lambda t, y: ROT @ y, 0.0, np.array([1.0, 0.0]), 0.01)
    iters = []
    for _ in range(200):
        st.step()
        if st.n > ABMStepper.K:
            iters.append(st.last_iterations)
    assert max(iters) <= 3
    assert np.allclose(st.y, [math.cos(2.0), -math.sin(2.0)], atol=1e-12)


def test_corrector_failure_raises():
    st = ABMStepper(kepler, 0.0, kepler_state(), 0.05, tolerance=1e-300, max_iter=1)
    with pytest.raises(NoConvergence):
        for _ in range(20):
            st.step()


def test_adams_coefficients_exact():
    assert adams_bashforth_coefficients(2) == (Fraction(3, 2), Fraction(-1, 2))
    assert adams_moulton_coefficients(1) == (Fraction(1, 2), Fraction(1, 2))
    assert adams_moulton_coefficients(2) == (Fraction(5, 12), Fraction(8, 12), Fraction(-1, 12))
    for k in range(1, 13):
        assert sum(adams_bashforth_coefficients(k)) == 1
        assert sum(adams_moulton_coefficients(k)) == 1
    assert all(isinstance(x, Fraction) for x in adams_bashforth_coefficients(12))


@pytest.mark.parametrize("scheme", ["RK4", "ABM12_11"])
def test_tangent_under_zero_field(scheme):
    aug = AugmentedState(np.array([0.3, 0.4]), np.array([1.0, 0.0]))
    _, out = propagate_with_tangent(zero, lambda t, x: np.zeros((2, 2)), aug, 0.0, 20.0,
                                    StepperConfig(h=0.5, scheme=scheme))
    for s in out:
        assert np.array_equal(s.v, [1.0, 0.0])


@pytest.mark.parametrize("scheme", ["RK4", "ABM12_11"])
def test_tangent_matches_matrix_exponential(scheme):
    A = np.array([[0.1, 1.0], [-2.0, -0.3]])
    aug = AugmentedState(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    ts, out = propagate_with_tangent(lambda t, x: A @ x, lambda t, x: A, aug, 0.0, 10.0,
                                     StepperConfig(h=0.01, scheme=scheme), renorm=1e300)
    tol = 1e-7 if scheme == "RK4" else 1e-11  # global error h^4 vs h^12
    for t, s in zip(ts[::100], out[::100]):
        assert np.allclose(s.v, expm(A * t) @ [0.0, 1.0], rtol=tol, atol=tol)


def test_tangent_renormalization_ledger():
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    aug = AugmentedState(np.array([1.0, 0.0]), np.array([1.0, 0.0]))
    args = (lambda t, x: A @ x, lambda t, x: A, aug, 0.0, 30.0, StepperConfig(h=0.01))
    _, a = propagate_with_tangent(*args, renorm=1e300)
    _, b = propagate_with_tangent(*args, renorm=10.0)
    assert b[-1].log_scale > 0
    assert float(a[-1].log_norm()) == pytest.approx(float(b[-1].log_norm()), abs=1e-10)


def test_pendulum_centre_tangent_bounded():
    f = lambda t, x: np.array([x[1], -math.sin(x[0])])  # noqa: E731
    jac = lambda t, x: np.array([[0.0, 1.0], [-math.cos(x[0]), 0.0]])  # noqa: E731
    aug = AugmentedState(np.array([0.0, 0.0]), np.array([1.0, 0.0]))
    _, out = propagate_with_tangent(f, jac, aug, 0.0, 200.0, StepperConfig(h=0.01))
    norms = np.array([np.linalg.norm(s.v) for s in out])
    assert norms.max() <= 1.0 + 1e-9 and norms.min() == pytest.approx(1.0, abs=1e-6)
    # oscillates at the small-amplitude frequency 1: v1 = cos t
    v1 = np.array([s.v[0] for s in out])
    ts = np.arange(len(out)) * 0.01
    assert np.allclose(v1[:2000], np.cos(ts[:2000]), atol=1e-8)
