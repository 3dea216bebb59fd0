"""Pendulum reduction of a p:q resonant Hamiltonian and the resonance width.

Keeping only the largest resonant harmonic and expanding the Kepler part
to second order about L_res gives a pendulum with

    beta = 3 mu^2 / (2 L_res^4),   Delta L = sqrt(2 A / beta),
    full width 2 Delta a = (2 / mu) (Delta L^2 + 2 L_res Delta L),

all in canonical units (theta_dot = 1).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import STANDARD, Constants, GravityCoefficients, default_coefficients
from .hamiltonian.models import ResonantModel, build_model
from .hamiltonian.terms import TermArrays
from .kaula import GEO, ResonanceId, resonant_indices, term_magnitude


@dataclass(frozen=True)
class PendulumReduction:
    """Pendulum parameters of one resonance at fixed (e, i, omega).

    L_res and delta_L are in km^2/s, a_res and full_width in km; alpha,
    beta and A are in canonical model units (length R_E, time 1/theta_dot).
    ``k_max`` holds the angle multipliers of the harmonic attaining A.
    """

    resonance: ResonanceId
    L_res: float
    a_res: float
    alpha: float
    beta: float
    A: float
    k_max: tuple
    label: str
    delta_L: float
    full_width: float

    def report(self) -> str:
        rows = {"resonance": self.resonance.label, "L_res_km2_s": self.L_res, "a_res_km": self.a_res,
                "alpha": self.alpha, "beta": self.beta, "A": self.A, "k_max": list(self.k_max),
                "term": self.label, "delta_L_km2_s": self.delta_L, "full_width_km": self.full_width}
        return json.dumps(rows, indent=2)


def resonant_action(res: ResonanceId, c: Constants = STANDARD):
    """(L_res [km^2/s], a_res [km]) from mu^2 / L^3 = p / q in theta_dot = 1 units."""
    cc = c.canonical()
    L = (res.q_res / res.p_res * cc.mu_E ** 2) ** (1.0 / 3.0)
    a = L * L / cc.mu_E * cc.length_unit_km
    return L * cc.length_unit_km ** 2 / cc.time_unit_s, a


def complete_square(alpha, beta):
    """(B, C) with alpha*x - beta*x^2 = -(B + C x)^2 + B^2."""
    C = np.sqrt(beta)
    return -alpha / (2.0 * C), C


def width_from_amplitude(A, L_res, mu):
    """(Delta L, 2 Delta a) from the harmonic magnitude A (canonical units)."""
    beta = 1.5 * mu ** 2 / L_res ** 4
    dL = np.sqrt(2.0 * np.asarray(A) / beta)
    return dL, 2.0 / mu * (dL * dL + 2.0 * L_res * dL)


def _secular_dL(model: ResonantModel, L, e, i, omega):
    G = L * math.sqrt(1.0 - e * e)
    H = G * math.cos(i)
    arr = TermArrays(model.secular, model.constants)
    one = np.ones(1)
    _, g, _ = arr.derivatives(L * one, G * one, H * one, 0.0 * one, omega * one, model.mu, 1)
    return float(g[0, 0])


def _resonance_of(model_or_res):
    if isinstance(model_or_res, ResonantModel):
        return model_or_res.resonance
    return model_or_res


def pendulum_reduce(model: ResonantModel | ResonanceId, e: float, i: float, omega: float = 0.0,
                    c: Constants = STANDARD, coeffs: GravityCoefficients | None = None) -> PendulumReduction:
    """Pendulum reduction at (e, i, omega).

    With a ResonantModel, A is the largest |coefficient| over its resonant
    harmonics.  With a bare ResonanceId (any p:q), A is taken over all
    resonant Kaula indices up to degree 4 and the secular part is the
    degree-4 secular model.
    """
    if not 0.0 <= e < 1.0:
        raise ValueError("pendulum_reduce requires 0 <= e < 1")
    cc = c.canonical()
    mu = cc.mu_E
    res = _resonance_of(model)
    L_c = (res.q_res / res.p_res * mu ** 2) ** (1.0 / 3.0)
    a_c = L_c * L_c / mu
    if isinstance(model, ResonantModel):
        arr = TermArrays(model.resonant, model.constants)
        if arr.size:
            C = np.abs(arr.coefficients(np.array([a_c]), np.array([e]), np.array([math.cos(i)]))[:, 0])
            k = int(np.argmax(C))
            A = float(C[k])
            t = model.resonant[k]
            k_max, label = (t.spec.k_phi, t.spec.k_omega, 0), t.label
        else:
            A, k_max, label = 0.0, (0, 0, 0), ""
        sec_model = model
    else:
        coeffs = coeffs or default_coefficients()
        best = (0.0, None)
        for idx in resonant_indices(res):
            if coeffs.Jnm(idx.n, idx.m) == 0.0:
                continue
            val = abs(float(term_magnitude(idx, a_c, e, i, coeffs, cc)))
            if val > best[0]:
                best = (val, idx)
        A, idx = best
        if idx is None:
            k_max, label = (0, 0, 0), ""
        else:
            k_max = (idx.n - 2 * idx.p + idx.q, idx.n - 2 * idx.p, idx.m)
            label = f"J{idx.n}{idx.m}[{idx.n},{idx.m},{idx.p},{idx.q}]"
        sec_model = build_model(GEO, "deg4", coeffs, c, labels=())
    alpha = mu ** 2 / L_c ** 3
    if sec_model.secular and e > 0.0:
        alpha += _secular_dL(sec_model, L_c, e, i, omega)
    beta = 1.5 * mu ** 2 / L_c ** 4
    dL, width = width_from_amplitude(A, L_c, mu)
    lu, tu = cc.length_unit_km, cc.time_unit_s
    return PendulumReduction(res, L_c * lu * lu / tu, a_c * lu, float(alpha), float(beta), A, k_max, label,
                             float(dL) * lu * lu / tu, float(width) * lu)


def width_grid(model: ResonantModel, e, i):
    """Full widths 2 Delta a [km] for arrays of (e, i), model harmonics only."""
    cc = model.constants
    mu = cc.mu_E
    res = model.resonance
    L_c = (res.q_res / res.p_res * mu ** 2) ** (1.0 / 3.0)
    e_b, i_b = np.broadcast_arrays(np.asarray(e, float), np.asarray(i, float))
    arr = TermArrays(model.resonant, cc)
    if arr.size == 0:
        return np.zeros(e_b.shape)
    C = np.abs(arr.coefficients(np.full(e_b.size, L_c * L_c / mu), e_b.ravel(), np.cos(i_b.ravel())))
    _, width = width_from_amplitude(C.max(axis=0), L_c, mu)
    return (width * cc.length_unit_km).reshape(e_b.shape)


def amplitude_scan(model: ResonantModel, e_range, i_range, omega: float = 0.0, resolution=(50, 50)):
    """MapResult of full widths [km] over e (x axis) and i in degrees (y axis)."""
    from .cartography import Axis, GridSpec, MapResult

    nx, ny = resolution
    grid = GridSpec(Axis("e", e_range[0], e_range[1], nx), Axis("i", i_range[0], i_range[1], ny),
                    fixed={"omega": math.degrees(omega)}, model="hamiltonian", resonance=model.resonance.label)
    X, Y = grid.mesh()
    values = width_grid(model, X, np.radians(Y))
    status = np.zeros(values.shape, dtype=np.int8)
    return MapResult(values, status, grid, "width_km", {"model": model.name})
