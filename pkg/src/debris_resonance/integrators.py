"""Fixed-step integrators: RK4, Adams-Bashforth 12 / Adams-Moulton 11, and
joint state + tangent propagation.

All steppers work on arrays of shape (d, N): N independent trajectories are
advanced together, which is how the map sweeps use them.  Fields have the
signature ``field(t, y) -> dy/dt`` with the same shape as ``y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import ConfigError, NoConvergence

Field = Callable[[float, np.ndarray], np.ndarray]

SCHEMES = ("RK4", "ABM12_11")


@dataclass(frozen=True)
class StepperConfig:
    """Fixed-step integration settings.

    ``h`` is in seconds; it is converted to the time unit of the integrated
    field by :meth:`step_in` when a system works in canonical units.
    """

    h: float = 600.0
    scheme: str = "RK4"
    tolerance: float = 1e-12
    max_iter: int = 10

    def __post_init__(self):
        if not self.h > 0.0:
            raise ConfigError("step size h must be positive")
        if not self.tolerance > 0.0:
            raise ConfigError("corrector tolerance must be positive")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be at least 1")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")

    def step_in(self, time_unit_s: float) -> float:
        return self.h / time_unit_s


@dataclass
class AugmentedState:
    """Base state x, tangent v (same shape) and the accumulated log of rescalings."""

    x: np.ndarray
    v: np.ndarray
    log_scale: np.ndarray | float = 0.0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.x.shape != self.v.shape:
            raise ValueError("state and tangent must have the same shape")
        if not np.all(np.any(self.v != 0.0, axis=0)):
            raise ValueError("tangent vector must be nonzero")

    def log_norm(self):
        """log ||v|| including the rescale ledger."""
        return np.log(np.linalg.norm(self.v, axis=0)) + self.log_scale


# ---------------------------------------------------------------------------
# single-step methods
# ---------------------------------------------------------------------------

def rk4_step(field: Field, y, t: float, h: float):
    """Classical fourth-order Runge-Kutta update."""
    k1 = field(t, y)
    k2 = field(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = field(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = field(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_integrate(field: Field, y0, t0: float, t1: float, h: float):
    """Fixed-step RK4 from t0 to t1; returns (times, states) including both ends.

    The last step is shortened if (t1 - t0) is not a multiple of h.
    """
    n = max(1, int(math.ceil((t1 - t0) / h - 1e-12)))
    y = np.asarray(y0, dtype=float)
    ts = [t0]
    ys = [y]
    t = t0
    for k in range(n):
        hk = min(h, t1 - t)
        y = rk4_step(field, y, t, hk)
        t = t0 + (k + 1) * h if k < n - 1 else t1
        ts.append(t)
        ys.append(y)
    return np.array(ts), np.array(ys)


@lru_cache(maxsize=None)
def gauss_legendre_tableau(s: int = 6):
    """(A, b, c) of the s-stage Gauss-Legendre collocation method (order 2s)."""
    x, w = np.polynomial.legendre.leggauss(s)
    c = 0.5 * (x + 1.0)
    b = 0.5 * w
    A = np.empty((s, s))
    P = np.polynomial.Polynomial
    for j in range(s):
        others = np.delete(c, j)
        lj = P.fromroots(others) / np.prod(c[j] - others)
        Ij = lj.integ()
        A[:, j] = Ij(c) - Ij(0.0)
    return A, b, c


def _column_max(x, batched: bool):
    """Max |x| per trajectory (last axis) for batched arrays (..., d, N); a scalar otherwise."""
    x = np.abs(x)
    if not batched:
        return np.max(x)
    return np.max(x.reshape(-1, x.shape[-1]), axis=0)


def gauss_legendre_step(field: Field, y, t: float, h: float, s: int = 6, tol: float = 1e-15,
                        max_iter: int = 100):
    """One implicit Gauss-Legendre step solved by fixed-point iteration.

    Convergence is tested per trajectory and converged trajectories are
    frozen, so each column's result does not depend on the rest of the batch.
    """
    A, b, c = gauss_legendre_tableau(s)
    f0 = field(t, y)
    K = np.repeat(f0[None], s, axis=0)
    batched = np.ndim(y) == 2
    scale = _column_max(f0, batched) + 1e-300
    active = np.ones(np.shape(scale), dtype=bool)
    for _ in range(max_iter):
        Kn = np.stack([field(t + c[i] * h, y + h * np.tensordot(A[i], K, axes=1)) for i in range(s)])
        diff = _column_max(Kn - K, batched)
        K = np.where(active, Kn, K)
        active = active & (diff > tol * scale)
        if not np.any(active):
            break
    else:
        raise NoConvergence("Gauss-Legendre stage iteration did not converge")
    return y + h * np.tensordot(b, K, axes=1)


# ---------------------------------------------------------------------------
# Adams methods
# ---------------------------------------------------------------------------

def _frac_poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _lagrange_integral(nodes, j, lo, hi):
    """Integral over [lo, hi] of the Lagrange basis polynomial for nodes[j]."""
    poly = [Fraction(1)]
    denom = Fraction(1)
    for k, xk in enumerate(nodes):
        if k == j:
            continue
        poly = _frac_poly_mul(poly, [-xk, Fraction(1)])
        denom *= nodes[j] - xk
    integ = sum(cf * (Fraction(hi) ** (r + 1) - Fraction(lo) ** (r + 1)) / (r + 1) for r, cf in enumerate(poly))
    return integ / denom


@lru_cache(maxsize=None)
def adams_bashforth_coefficients(k: int):
    """b_j with y_{n+1} = y_n + h sum_j b_j f_{n-j}, j = 0..k-1 (exact fractions)."""
    nodes = [Fraction(-j) for j in range(k)]
    return tuple(_lagrange_integral(nodes, j, 0, 1) for j in range(k))


@lru_cache(maxsize=None)
def adams_moulton_coefficients(k: int):
    """b_j with y_{n+1} = y_n + h sum_j b_j f_{n+1-j}, j = 0..k (k-step, order k+1)."""
    nodes = [Fraction(1 - j) for j in range(k + 1)]
    return tuple(_lagrange_integral(nodes, j, 0, 1) for j in range(k + 1))


class Stepper:
    """Common interface for the fixed-step schemes used by the FLI driver.

    The state is held internally; ``rescale`` multiplies selected rows by a
    per-trajectory factor (tangent renormalization) and ``select`` keeps a
    subset of trajectories.
    """

    def __init__(self, field: Field, t0: float, y0, h: float):
        self.field = field
        self.t = t0
        self.t0 = t0
        self.y = np.array(y0, dtype=float)
        self.h = h
        self.n = 0

    def step(self):
        raise NotImplementedError

    def rescale(self, rows: slice, factor):
        self.y[rows] *= factor

    def select(self, keep):
        self.y = self.y[..., keep]


class RK4Stepper(Stepper):
    def step(self):
        self.y = rk4_step(self.field, self.y, self.t, self.h)
        self.n += 1
        self.t = self.t0 + self.n * self.h
        return self.y


class ABMStepper(Stepper):
    """Adams-Bashforth 12 predictor, Adams-Moulton 11 corrector iterated to tolerance.

    The first 11 steps are taken with the 6-stage Gauss-Legendre method
    (order 12), filling the 12-value derivative history.
    """

    K = 12

    def __init__(self, field, t0, y0, h, tolerance: float = 1e-12, max_iter: int = 10):
        super().__init__(field, t0, y0, h)
        self.tol = tolerance
        self.max_iter = max_iter
        self.ab = np.array([float(x) for x in adams_bashforth_coefficients(self.K)])
        self.am = np.array([float(x) for x in adams_moulton_coefficients(self.K - 1)])
        self.hist = [field(t0, self.y)]  # newest last
        self.last_iterations = 0

    def step(self):
        h = self.h
        t_next = self.t0 + (self.n + 1) * h
        if len(self.hist) < self.K:
            self.y = gauss_legendre_step(self.field, self.y, self.t, h)
            self.hist.append(self.field(t_next, self.y))
        else:
            F = self.hist  # f_{n-11} .. f_n
            pred = self.y + h * sum(self.ab[j] * F[-1 - j] for j in range(self.K))
            base = self.y + h * sum(self.am[j] * F[-j] for j in range(1, self.K))
            y_new = pred
            batched = self.y.ndim == 2
            scale = _column_max(self.y, batched) + 1e-300
            active = np.ones(np.shape(scale), dtype=bool)
            for it in range(1, self.max_iter + 1):
                f_new = self.field(t_next, y_new)
                y_corr = base + h * self.am[0] * f_new
                diff = _column_max(y_corr - y_new, batched) / scale
                y_new = np.where(active, y_corr, y_new)
                active = active & (diff > self.tol)
                if not np.any(active):
                    break
            else:
                raise NoConvergence(f"corrector did not converge in {self.max_iter} iterations")
            self.last_iterations = it
            self.y = y_new
            F.append(self.field(t_next, self.y))
            F.pop(0)
        self.n += 1
        self.t = t_next
        return self.y

    def rescale(self, rows, factor):
        super().rescale(rows, factor)
        for f in self.hist:
            f[rows] *= factor

    def select(self, keep):
        super().select(keep)
        self.hist = [f[..., keep] for f in self.hist]


def make_stepper(field: Field, t0: float, y0, cfg: StepperConfig, time_unit_s: float = 1.0) -> Stepper:
    h = cfg.step_in(time_unit_s)
    if cfg.scheme == "RK4":
        return RK4Stepper(field, t0, y0, h)
    return ABMStepper(field, t0, y0, h, cfg.tolerance, cfg.max_iter)


def abm_integrate(field: Field, state0, t0: float, t1: float, cfg: StepperConfig, time_unit_s: float = 1.0):
    """ABM12/11 trajectory from t0 to t1 (field time units); returns (times, states)."""
    h = cfg.step_in(time_unit_s)
    n = int(round((t1 - t0) / h))
    if n < ABMStepper.K:
        raise ConfigError("abm_integrate needs at least 12 steps")
    st = ABMStepper(field, t0, state0, h, cfg.tolerance, cfg.max_iter)
    ys = [st.y.copy()]
    for _ in range(n):
        ys.append(st.step().copy())
    return t0 + h * np.arange(n + 1), np.array(ys)


def integrate(field: Field, state0, t0: float, t1: float, cfg: StepperConfig, time_unit_s: float = 1.0):
    """Dispatch on ``cfg.scheme``; returns (times, states)."""
    if cfg.scheme == "RK4":
        return rk4_integrate(field, state0, t0, t1, cfg.step_in(time_unit_s))
    return abm_integrate(field, state0, t0, t1, cfg, time_unit_s)


# ---------------------------------------------------------------------------
# variational equations
# ---------------------------------------------------------------------------

def tangent_field(field: Field, jacobian=None, field_and_jacobian=None) -> Field:
    """Augmented field for Y = [x; v]: (f(x), Df(x) v)."""
    if field_and_jacobian is None:
        if jacobian is None:
            raise ValueError("a jacobian is required")

        def field_and_jacobian(t, x):
            return field(t, x), jacobian(t, x)

    def aug(t, Y):
        d = Y.shape[0] // 2
        x, v = Y[:d], Y[d:]
        f, J = field_and_jacobian(t, x)
        if Y.ndim == 1:
            return np.concatenate([f, J @ v])
        return np.concatenate([f, np.einsum("ijn,jn->in", J, v)])

    return aug


def propagate_with_tangent(field: Field, jacobian, aug: AugmentedState, t0: float, t1: float,
                           cfg: StepperConfig, time_unit_s: float = 1.0, renorm: float = 1e8,
                           field_and_jacobian=None):
    """Joint propagation of state and tangent with renormalization.

    Whenever ||v|| exceeds ``renorm`` the tangent (and, for ABM, its stored
    derivative history) is divided by its norm and the log of the norm is
    added to the ledger.  Returns (times, list of AugmentedState).
    """
    x0 = np.asarray(aug.x, dtype=float)
    d = x0.shape[0]
    F = tangent_field(field, jacobian, field_and_jacobian)
    st = make_stepper(F, t0, np.concatenate([x0, aug.v]), cfg, time_unit_s)
    n = int(round((t1 - t0) / st.h))
    ledger = np.array(aug.log_scale, dtype=float, copy=True) + np.zeros(x0.shape[1:])
    out = [AugmentedState(x0.copy(), np.array(aug.v, dtype=float), ledger.copy())]
    times = [t0]
    for _ in range(n):
        Y = st.step()
        nv = np.linalg.norm(Y[d:], axis=0)
        big = nv > renorm
        if np.any(big):
            fac = np.where(big, 1.0 / nv, 1.0)
            st.rescale(slice(d, None), fac)
            ledger = ledger + np.where(big, np.log(nv), 0.0)
            Y = st.y
        out.append(AugmentedState(Y[:d].copy(), Y[d:].copy(), ledger.copy()))
        times.append(st.t)
    return np.array(times), out
