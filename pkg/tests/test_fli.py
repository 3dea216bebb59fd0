import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from debris_resonance.core import STATUS_DIVERGED, STATUS_OK, STATUS_SATURATED
from debris_resonance.errors import ConfigError, Diverged
from debris_resonance.fli import FliSettings, FliValue, compute_fli, fli_batch, model_fli, require_ok
from debris_resonance.hamiltonian import build_model
from debris_resonance.integrators import StepperConfig
from debris_resonance.kaula import GEO

RK = StepperConfig(h=0.01)


def shear(t, x):
    # I' = 0, theta' = I: tangent from (1, 0) is (1, t)
    return np.array([np.zeros_like(x[0]), x[0]])


def shear_jac(t, x):
    J = np.zeros((2, 2) + np.shape(x)[1:])
    J[1, 0] = 1.0
    return J


def pendulum(t, x):
    return np.array([x[1], -np.sin(x[0])])


def pendulum_jac(t, x):
    J = np.zeros((2, 2) + np.shape(x)[1:])
    J[0, 1] = 1.0
    J[1, 0] = -np.cos(x[0])
    return J


def test_settings_invariants():
    with pytest.raises(ConfigError):
        FliSettings(horizon=0.0)
    with pytest.raises(ConfigError):
        FliSettings(horizon=1.0, tangent=(0.0, 0.0))
    with pytest.raises(ConfigError):
        FliSettings(horizon=1.0, stride=0)


def test_zero_field_gives_zero():
    v = compute_fli(lambda t, x: np.zeros_like(x), lambda t, x: np.zeros((2, 2) + x.shape[1:]),
                    np.array([0.1, 0.2]), FliSettings(horizon=10.0, stepper=RK))
    assert v.value == 0.0 and v.status == "ok"


@pytest.mark.parametrize("T", [10.0, 100.0, 1000.0])
def test_regular_flow_grows_like_log_t(T):
    v = compute_fli(shear, shear_jac, np.array([0.7, 0.0]), FliSettings(horizon=T, stepper=StepperConfig(h=0.5)))
    assert v.value == pytest.approx(0.5 * math.log1p(T * T), abs=1e-12)


def test_separatrix_exceeds_island():
    # tangent across the flow: at q = 0 the flow itself points along q
    s = FliSettings(horizon=50.0, stepper=RK, tangent=(0.0, 1.0))
    x0 = np.array([[0.0, 0.0], [2.0, 1.0]])  # separatrix (energy 1) and inside the island
    vals, codes = fli_batch(pendulum, x0, s, jacobian=pendulum_jac)
    assert np.all(codes == STATUS_OK)
    assert vals[0] > vals[1] + 2.0


def test_ledger_identity():
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    jac = lambda t, x: np.broadcast_to(A[:, :, None], (2, 2, x.shape[1]))  # noqa: E731
    lin = lambda t, x: A @ x  # noqa: E731
    a, _ = fli_batch(lin, np.array([0.1, 0.0]), FliSettings(horizon=60.0, stepper=RK, renorm=1e300), jacobian=jac)
    b, _ = fli_batch(lin, np.array([0.1, 0.0]), FliSettings(horizon=60.0, stepper=RK, renorm=10.0), jacobian=jac)
    assert abs(a[0] - b[0]) < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.floats(-1.0, 1.0), st.floats(0.1, 2.5), st.floats(1.0, 20.0), st.floats(1.0, 20.0))
def test_monotone_in_horizon(q, p, T1, dT):
    x0 = np.array([q, p])
    s1 = FliSettings(horizon=T1, stepper=StepperConfig(h=0.05))
    s2 = FliSettings(horizon=T1 + dT, stepper=StepperConfig(h=0.05))
    a = compute_fli(pendulum, pendulum_jac, x0, s1).value
    b = compute_fli(pendulum, pendulum_jac, x0, s2).value
    assert b >= a


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-3, 1e3))
def test_scale_covariance(c):
    x0 = np.array([0.3, 1.2])
    base = FliSettings(horizon=20.0, stepper=StepperConfig(h=0.05), tangent=(1.0, 0.0))
    scaled = FliSettings(horizon=20.0, stepper=StepperConfig(h=0.05), tangent=(c, 0.0))
    a = compute_fli(pendulum, pendulum_jac, x0, base).value
    b = compute_fli(pendulum, pendulum_jac, x0, scaled).value
    assert b - a == pytest.approx(math.log(c), abs=1e-9)


def test_cap_saturation():
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    jac = lambda t, x: np.broadcast_to(A[:, :, None], (2, 2, x.shape[1]))  # noqa: E731
    vals, codes = fli_batch(lambda t, x: A @ x, np.array([0.1, 0.0]),
                            FliSettings(horizon=100.0, stepper=RK, cap=10.0), jacobian=jac)
    assert codes[0] == STATUS_SATURATED
    assert 10.0 <= vals[0] < 10.1
    v = compute_fli(lambda t, x: A @ x, jac, np.array([0.1, 0.0]), FliSettings(horizon=100.0, stepper=RK, cap=10.0))
    assert v.saturated and v.ok


def test_diverged_cells_are_flagged():
    status = lambda x: np.where(np.abs(x[0]) > 3.0, STATUS_DIVERGED, STATUS_OK).astype(np.int8)  # noqa: E731
    x0 = np.array([[0.0, 0.0], [3.0, 0.5]])  # rotating orbit leaves |q| <= 3; libration stays
    vals, codes = fli_batch(pendulum, x0, FliSettings(horizon=20.0, stepper=RK), jacobian=pendulum_jac,
                            status=status)
    assert codes[0] == STATUS_DIVERGED and np.isnan(vals[0])
    assert codes[1] == STATUS_OK and np.isfinite(vals[1])
    with pytest.raises(Diverged):
        require_ok(FliValue(float("nan"), "diverged"))


def test_batch_columns_independent():
    x0 = np.array([[0.0, 0.5, 1.0], [2.0, 1.0, 0.3]])
    s = FliSettings(horizon=30.0, stepper=RK, stride=3)
    vals, _ = fli_batch(pendulum, x0, s, jacobian=pendulum_jac)
    for k in range(3):
        single, _ = fli_batch(pendulum, x0[:, k], s, jacobian=pendulum_jac)
        assert single[0] == vals[k]


def test_model_fli_resonant_island_lower_than_separatrix():
    m = build_model(GEO, "deg2", labels=("T1",))
    lam22 = m.term("T1").lam
    x0 = m.state_from_elements([42164.2, 42164.2], 0.01, 0.2, [lam22, lam22 + math.pi / 2])
    s = FliSettings(horizon=300 * m.constants.sidereal_day * m.constants.time_unit_s,
                    stepper=StepperConfig(h=0.25 * 86164.0989, scheme="RK4"))
    vals, codes = model_fli(m, x0, s)
    assert np.all(codes == STATUS_OK)
    assert vals[1] > vals[0]
