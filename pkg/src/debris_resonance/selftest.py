"""Fast oracle checks run by ``debris-resonance self-test``."""

from __future__ import annotations

import math
import sys

import numpy as np

from .cartesian import CartesianModel, ForceModelConfig, geopotential_spherical, geopotential_synodic
from .core import STANDARD, resonant_semimajor_axis
from .fli import FliSettings, fli_batch
from .hamiltonian import ToyModel21, bifurcation_function, build_model, dominant_term, find_equilibria, solve_i0
from .integrators import StepperConfig, rk4_integrate
from .kaula import GEO, GPS


def _fd_jacobian(f, y, eps=1e-6):
    J = np.empty((y.size, y.size))
    for k in range(y.size):
        d = np.zeros_like(y)
        d[k] = eps * max(1.0, abs(y[k]))
        J[:, k] = (f(y + d) - f(y - d)) / (2.0 * d[k])
    return J


def check_semimajor_axes():
    a11, a21 = resonant_semimajor_axis(1, 1), resonant_semimajor_axis(2, 1)
    return abs(a11 - 42164.17) <= 0.05 and abs(a21 - 26561.8) <= 5.0, f"a11={a11:.4f} a21={a21:.4f}"


def check_inclinations():
    i_b = math.degrees(math.acos(1.0 / 3.0))
    f_b = bifurcation_function(math.radians(i_b))
    i0 = math.degrees(solve_i0(0.5))
    return abs(f_b) < 1e-12 and abs(i0 - 39.1) <= 0.5, f"f(70.53)={f_b:.1e} i0(0.5)={i0:.3f}"


def check_toy_equilibrium():
    toy = ToyModel21.build(("t1",))
    eq = find_equilibria(toy, 0.1, math.radians(20.0), 0.0, 0.0, reference="t1")
    st = [r for r in eq if r.stability == "stable"]
    ok = len(st) == 1 and abs(st[0].angle_deg + 30.0) <= 2.0 and abs(st[0].a_km - 26565.8) <= 1.0
    return ok, "; ".join(f"{r.angle_deg:.2f} deg {r.a_km:.2f} km {r.stability}" for r in eq)


def check_field_jacobian():
    m = build_model(GEO, "deg4")
    y = m.state_from_elements(42170.0, 0.1, math.radians(20.0), 0.3, 0.2, 0.1)[:, 0]
    J = m.jacobian(0.0, y[:, None])[:, :, 0]
    Jfd = _fd_jacobian(lambda z: m.field(0.0, z[:, None])[:, 0], y)
    err = np.max(np.abs(J - Jfd)) / np.max(np.abs(J))
    return err < 1e-6, f"relative error {err:.1e}"


def check_dual_potential():
    rng = np.random.default_rng(1)
    r = rng.uniform(1.1, 8.0, 20)
    lat = rng.uniform(-1.4, 1.4, 20)
    lon = rng.uniform(-math.pi, math.pi, 20)
    X = np.array([r * np.cos(lat) * np.cos(lon), r * np.cos(lat) * np.sin(lon), r * np.sin(lat)])
    c = STANDARD.canonical()
    v1 = geopotential_synodic(X[0], X[1], X[2], c=c)
    v2 = geopotential_spherical(r, lat, lon, c=c)
    err = float(np.max(np.abs(v1 - v2) / np.abs(v2)))
    return err < 1e-12, f"relative error {err:.1e}"


def check_cartesian_jacobian():
    m = CartesianModel(ForceModelConfig(degree=3, order=3))
    y = m.state_from_elements(42164.0, 0.01, 0.3, 0.4, 0.5, 0.6)
    J = m.jacobian(0.2, y)[:, :, 0]
    Jfd = m.fd_jacobian(0.2, y)[:, :, 0]
    err = np.max(np.abs(J - Jfd)) / np.max(np.abs(J))
    return err < 1e-6, f"relative error {err:.1e}"


def check_rk4_order():
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    f = lambda t, y: A @ y  # noqa: E731
    y0 = np.array([1.0, 0.0])
    errs = []
    for h in (0.2, 0.1, 0.05):
        y = rk4_integrate(f, y0, 0.0, 10.0, h)[1][-1]
        errs.append(np.linalg.norm(y - np.array([math.cos(10.0), -math.sin(10.0)])))
    order = math.log2(errs[1] / errs[2])
    return abs(order - 4.0) <= 0.2, f"observed order {order:.3f}"


def check_fli_ledger():
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    field = lambda t, y: A @ y  # noqa: E731
    jac = lambda t, y: np.broadcast_to(A[:, :, None], (2, 2, y.shape[1]))  # noqa: E731
    cfg = StepperConfig(h=0.05)
    a, _ = fli_batch(field, np.array([0.1, 0.0]), FliSettings(horizon=40.0, stepper=cfg, renorm=1e300),
                     jacobian=jac)
    b, _ = fli_batch(field, np.array([0.1, 0.0]), FliSettings(horizon=40.0, stepper=cfg, renorm=10.0),
                     jacobian=jac)
    err = abs(float(a[0] - b[0]))
    return err < 1e-10, f"difference {err:.1e}"


def check_dominant_point():
    lab = dominant_term(GPS, 0.0, math.acos(1.0 / 3.0))
    return lab.startswith("J44"), f"dominant at (0, 70.53 deg): {lab}"


CHECKS = [
    ("resonant semimajor axes", check_semimajor_axes),
    ("bifurcation and i0 roots", check_inclinations),
    ("toy 2:1 J2+t1 equilibrium", check_toy_equilibrium),
    ("resonant Jacobian vs finite differences", check_field_jacobian),
    ("geopotential dual forms", check_dual_potential),
    ("Cartesian Jacobian vs finite differences", check_cartesian_jacobian),
    ("RK4 order", check_rk4_order),
    ("FLI renormalization ledger", check_fli_ledger),
    ("2:1 dominant term at the bifurcation point", check_dominant_point),
]


def run(stream=None) -> bool:
    """Run all checks, print one line each, return True if all pass."""
    stream = stream or sys.stdout
    all_ok = True
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # report, never abort the suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        all_ok &= bool(ok)
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}", file=stream)
    return all_ok
