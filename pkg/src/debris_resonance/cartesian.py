"""Cartesian force model: geopotential to degree and order 3, Sun and Moon
attraction, and solar radiation pressure, in the quasi-inertial frame.

The geopotential is written in the synodic (Earth-fixed) frame as a sum of
monomials X^a Y^b Z^c r^-s, which gives the potential, its gradient and its
Hessian in closed form.  Synodic and quasi-inertial coordinates are related
by x = R3(-theta) X.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    STANDARD,
    STATUS_DIVERGED,
    STATUS_OK,
    CartesianState,
    Constants,
    GravityCoefficients,
    default_coefficients,
    elements_to_rv,
    rotation_z,
    rv_to_elements,
)
from .errors import BelowSurface, ConfigError

DAY = 86400.0
JULIAN_YEAR = 365.25 * DAY


@dataclass(frozen=True)
class ForceModelConfig:
    """Which effects enter the Cartesian equations of motion.

    ``degree``/``order`` cap the geopotential (<= 3); C21 and S21 are always
    omitted.  ``area_to_mass`` is in m^2/kg.  ``epoch`` (s) offsets the
    ephemeris time and ``theta0`` (rad) is the sidereal angle at t = 0.
    """

    degree: int = 3
    order: int = 3
    include_sun: bool = False
    include_moon: bool = False
    include_srp: bool = False
    C_r: float = 1.0
    area_to_mass: float = 0.0
    epoch: float = 0.0
    theta0: float = 0.0

    def __post_init__(self):
        if not 0 <= self.degree <= 3 or not 0 <= self.order <= min(self.degree, 3):
            raise ConfigError("Cartesian geopotential supports degree and order up to 3")
        if self.area_to_mass < 0.0:
            raise ConfigError("area_to_mass must be non-negative")
        if not 0.0 <= self.C_r <= 2.0:
            raise ConfigError("C_r must lie in [0, 2]")

    def harmonics(self):
        """(n, m) pairs used, C21/S21 excluded."""
        return [(n, m) for n in range(2, self.degree + 1) for m in range(0, min(n, self.order) + 1)
                if (n, m) != (2, 1)]


@dataclass(frozen=True)
class Ephemeris:
    """Analytic Keplerian Sun and Moon, geocentric, equatorial frame (km).

    The Sun moves on a fixed ellipse in the ecliptic.  The Moon moves on an
    ellipse inclined to the ecliptic whose node regresses and perigee
    advances linearly.  Angles are in degrees at ``t = 0`` (seconds).
    """

    obliquity_deg: float = 23.439
    sun_a: float = STANDARD.a_S
    sun_e: float = 0.0167
    sun_perigee_deg: float = 282.94
    sun_mean_longitude_deg: float = 280.46
    sun_period_days: float = 365.256363
    moon_a: float = 384400.0
    moon_e: float = 0.0549
    moon_i_deg: float = 5.145
    moon_node_deg: float = 125.08
    moon_node_period_years: float = 18.6
    moon_perigee_deg: float = 83.35
    moon_perigee_period_years: float = 8.85
    moon_mean_longitude_deg: float = 218.32
    moon_period_days: float = 27.321661

    def _to_equatorial(self, v):
        eps = math.radians(self.obliquity_deg)
        ce, se = math.cos(eps), math.sin(eps)
        return np.array([v[0], ce * v[1] - se * v[2], se * v[1] + ce * v[2]])

    def sun_position(self, t):
        n = 2.0 * math.pi / (self.sun_period_days * DAY)
        L = math.radians(self.sun_mean_longitude_deg) + n * np.asarray(t, dtype=float)
        varpi = math.radians(self.sun_perigee_deg)
        pos, _ = elements_to_rv(self.sun_a, self.sun_e, 0.0, L - varpi, varpi, 0.0, 1.0)
        return self._to_equatorial(pos)

    def moon_position(self, t):
        t = np.asarray(t, dtype=float)
        n = 2.0 * math.pi / (self.moon_period_days * DAY)
        node = math.radians(self.moon_node_deg) - 2.0 * math.pi * t / (self.moon_node_period_years * JULIAN_YEAR)
        varpi = math.radians(self.moon_perigee_deg) + 2.0 * math.pi * t / (
            self.moon_perigee_period_years * JULIAN_YEAR)
        L = math.radians(self.moon_mean_longitude_deg) + n * t
        pos, _ = elements_to_rv(self.moon_a, self.moon_e, math.radians(self.moon_i_deg), L - varpi,
                                varpi - node, node, 1.0)
        return self._to_equatorial(pos)

    def positions(self, t):
        return self.sun_position(t), self.moon_position(t)


# ---------------------------------------------------------------------------
# geopotential
# ---------------------------------------------------------------------------

def _monomials(coeffs: GravityCoefficients, harmonics, c: Constants):
    """List of (k, (a, b, c), s) with V = sum k X^a Y^b Z^c r^-s (central term excluded)."""
    mu, R = c.mu_E, c.R_E
    C = coeffs.Cnm
    S = coeffs.Snm
    table = {
        (2, 0): [(1.5 * C(2, 0), (0, 0, 2), 5), (-0.5 * C(2, 0), (0, 0, 0), 3)],
        (2, 2): [(3 * C(2, 2), (2, 0, 0), 5), (-3 * C(2, 2), (0, 2, 0), 5), (6 * S(2, 2), (1, 1, 0), 5)],
        (3, 0): [(2.5 * C(3, 0), (0, 0, 3), 7), (-1.5 * C(3, 0), (0, 0, 1), 5)],
        (3, 1): [(7.5 * C(3, 1), (1, 0, 2), 7), (-1.5 * C(3, 1), (1, 0, 0), 5),
                 (7.5 * S(3, 1), (0, 1, 2), 7), (-1.5 * S(3, 1), (0, 1, 0), 5)],
        (3, 2): [(15 * C(3, 2), (2, 0, 1), 7), (-15 * C(3, 2), (0, 2, 1), 7), (30 * S(3, 2), (1, 1, 1), 7)],
        (3, 3): [(15 * C(3, 3), (3, 0, 0), 7), (-45 * C(3, 3), (1, 2, 0), 7),
                 (45 * S(3, 3), (2, 1, 0), 7), (-15 * S(3, 3), (0, 3, 0), 7)],
    }
    out = []
    for nm in harmonics:
        n = nm[0]
        for k, exps, s in table[nm]:
            if k != 0.0:
                out.append((mu * R ** n * k, exps, s))
    return out


def _grouped(coeffs, harmonics, c):
    """Monomials grouped by the power s of 1/r: {s: [(k, (a, b, c)), ...]}, central term included."""
    groups = {1: [(c.mu_E, (0, 0, 0))]}
    for k, exps, s in _monomials(coeffs, harmonics, c):
        groups.setdefault(s, []).append((k, exps))
    return groups


def _poly_derivatives(powers, terms, order):
    """Value, gradient and Hessian of sum k X^a Y^b Z^c using precomputed powers[j][e]."""
    N = powers[0][0].shape[0]
    val = np.zeros(N)
    grad = np.zeros((3, N))
    hess = np.zeros((3, 3, N)) if order >= 2 else None
    for k, a in terms:
        P = [powers[j][a[j]] for j in range(3)]
        val += k * P[0] * P[1] * P[2]
        for j in range(3):
            if a[j] == 0:
                continue
            f = list(P)
            f[j] = a[j] * powers[j][a[j] - 1]
            grad[j] += k * f[0] * f[1] * f[2]
            if hess is None:
                continue
            for l in range(j, 3):
                if l == j:
                    if a[j] < 2:
                        continue
                    g = list(P)
                    g[j] = a[j] * (a[j] - 1) * powers[j][a[j] - 2]
                elif a[l] == 0:
                    continue
                else:
                    g = list(f)
                    g[l] = a[l] * powers[l][a[l] - 1]
                v = k * g[0] * g[1] * g[2]
                hess[j, l] += v
                if l != j:
                    hess[l, j] += v
    return val, grad, hess


def geopotential_terms(X, coeffs: GravityCoefficients | None = None, c: Constants = STANDARD,
                       harmonics=None, order: int = 1):
    """V, grad V and optionally the Hessian at synodic positions X of shape (3,) or (3, N).

    A group P_s(X) r^-s contributes grad P r^-s - s P X r^-(s+2) to the
    gradient and D2P r^-s - s (grad P X^T + X grad P^T) r^-(s+2)
    + P (s (s+2) X X^T r^-(s+4) - s I r^-(s+2)) to the Hessian.
    """
    coeffs = coeffs or default_coefficients()
    if harmonics is None:
        harmonics = ForceModelConfig().harmonics()
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    if single:
        X = X[:, None]
    one = np.ones(X.shape[1])
    powers = [[one, X[j], X[j] * X[j], X[j] * X[j] * X[j]] for j in range(3)]
    r2 = powers[0][2] + powers[1][2] + powers[2][2]
    inv_r2 = 1.0 / r2
    inv_r = np.sqrt(inv_r2)
    V = np.zeros(X.shape[1])
    g = np.zeros_like(X)
    h = np.zeros((3, 3, X.shape[1])) if order >= 2 else None
    XX = X[:, None] * X[None, :] if order >= 2 else None
    for s, terms in _grouped(coeffs, tuple(harmonics), c).items():
        P, gP, hP = _poly_derivatives(powers, terms, order)
        rs = inv_r ** s
        rs2 = rs * inv_r2
        V += P * rs
        g += gP * rs - s * P * rs2 * X
        if h is not None:
            h += (hP * rs - s * rs2 * (gP[:, None] * X[None, :] + X[:, None] * gP[None, :])
                  + P * (s * (s + 2.0) * rs2 * inv_r2 * XX - s * rs2 * np.eye(3)[:, :, None]))
    if single:
        return V[0], g[:, 0], (h[:, :, 0] if h is not None else None)
    return V, g, h


def geopotential_synodic(X, Y, Z, coeffs: GravityCoefficients | None = None, c: Constants = STANDARD,
                         harmonics=None):
    """Earth potential V(X, Y, Z) in the synodic frame (positive, GM/r leading)."""
    if np.any(np.asarray(X) ** 2 + np.asarray(Y) ** 2 + np.asarray(Z) ** 2 <= 0.0):
        raise ValueError("geopotential undefined at the origin")
    return geopotential_terms(np.array([X, Y, Z], dtype=float), coeffs, c, harmonics, order=1)[0]


def geopotential_spherical(r, lat, lon, coeffs: GravityCoefficients | None = None, c: Constants = STANDARD,
                           harmonics=None):
    """The same potential written with associated Legendre functions of sin(lat)."""
    coeffs = coeffs or default_coefficients()
    if harmonics is None:
        harmonics = ForceModelConfig().harmonics()
    s, co = np.sin(lat), np.cos(lat)
    P = {
        (2, 0): 0.5 * (3 * s ** 2 - 1), (2, 2): 3 * co ** 2,
        (3, 0): 0.5 * s * (5 * s ** 2 - 3), (3, 1): 1.5 * co * (5 * s ** 2 - 1),
        (3, 2): 15 * s * (1 - s ** 2), (3, 3): 15 * co ** 3,
    }
    total = 1.0
    for n, m in harmonics:
        total = total + (c.R_E / r) ** n * P[(n, m)] * (coeffs.Cnm(n, m) * np.cos(m * lon)
                                                       + coeffs.Snm(n, m) * np.sin(m * lon))
    return c.mu_E / r * total


# ---------------------------------------------------------------------------
# full model
# ---------------------------------------------------------------------------

def _third_body(r, rX, GM, order):
    """Tidal acceleration -GM [(r - rX)/|r - rX|^3 + rX/|rX|^3] and its Jacobian."""
    d = r - rX[:, None]
    dn2 = np.sum(d * d, axis=0)
    dn3 = dn2 ** 1.5
    rxn3 = np.dot(rX, rX) ** 1.5
    acc = -GM * (d / dn3 + (rX / rxn3)[:, None])
    if order < 2:
        return acc, None
    jac = -GM * (np.eye(3)[:, :, None] / dn3 - 3.0 * d[:, None] * d[None, :] / (dn3 * dn2))
    return acc, jac


class CartesianModel:
    """Quasi-inertial equations of motion in canonical units (R_E, 1/theta_dot).

    States have shape (6, N): position then velocity.
    """

    def __init__(self, cfg: ForceModelConfig = ForceModelConfig(), coeffs: GravityCoefficients | None = None,
                 constants: Constants = STANDARD, ephemeris: Ephemeris | None = None):
        self.cfg = cfg
        self.coeffs = coeffs or default_coefficients()
        self.constants = constants.canonical()
        self.ephemeris = ephemeris or Ephemeris()
        self.harmonics = cfg.harmonics()
        self._srp = self.constants.srp_acceleration_1au(cfg.C_r, cfg.area_to_mass) * self.constants.a_S ** 2
        self.name = f"cartesian:deg{cfg.degree}"

    @property
    def mu(self):
        return self.constants.mu_E

    def theta(self, t):
        return self.cfg.theta0 + t  # theta_dot = 1

    def _bodies(self, t):
        c = self.constants
        ts = self.cfg.epoch + t * c.time_unit_s
        rS = rM = None
        if self.cfg.include_sun or self.cfg.include_srp:
            rS = self.ephemeris.sun_position(ts) / c.length_unit_km
        if self.cfg.include_moon:
            rM = self.ephemeris.moon_position(ts) / c.length_unit_km
        return rS, rM

    def acceleration(self, t, r, order: int = 1):
        """Acceleration (3, N) and, for order 2, its Jacobian (3, 3, N) w.r.t. position."""
        th = self.theta(t)
        Rf = rotation_z(th)  # inertial -> synodic
        X = Rf @ r
        _, gF, hF = geopotential_terms(X, self.coeffs, self.constants, self.harmonics, order)
        acc = Rf.T @ gF
        jac = None
        if order >= 2:
            jac = np.einsum("ij,jkn,kl->iln", Rf.T, hF, Rf)
        rS, rM = self._bodies(t)
        c = self.constants
        if self.cfg.include_sun:
            a_, j_ = _third_body(r, rS, c.Gm_S, order)
            acc = acc + a_
            jac = jac + j_ if jac is not None else None
        if self.cfg.include_moon:
            a_, j_ = _third_body(r, rM, c.Gm_M, order)
            acc = acc + a_
            jac = jac + j_ if jac is not None else None
        if self.cfg.include_srp and self._srp > 0.0:
            d = r - rS[:, None]
            dn2 = np.sum(d * d, axis=0)
            dn3 = dn2 ** 1.5
            acc = acc + self._srp * d / dn3
            if jac is not None:
                jac = jac + self._srp * (np.eye(3)[:, :, None] / dn3 - 3.0 * d[:, None] * d[None, :] / (dn3 * dn2))
        return acc, jac

    def field(self, t, y):
        y = np.asarray(y, dtype=float)
        col = y.ndim == 1
        y2 = y[:, None] if col else y
        acc, _ = self.acceleration(t, y2[:3], 1)
        f = np.concatenate([y2[3:], acc])
        return f[:, 0] if col else f

    def field_and_jacobian(self, t, y):
        y = np.asarray(y, dtype=float)
        acc, ja = self.acceleration(t, y[:3], 2)
        N = y.shape[1]
        J = np.zeros((6, 6, N))
        J[0, 3] = J[1, 4] = J[2, 5] = 1.0
        J[3:, :3] = ja
        return np.concatenate([y[3:], acc]), J

    def jacobian(self, t, y):
        return self.field_and_jacobian(t, y)[1]

    def fd_jacobian(self, t, y, rel: float = 1e-6):
        """Central-difference Jacobian with per-component step scaling."""
        y = np.asarray(y, dtype=float)
        J = np.zeros((6, 6, y.shape[1]))
        for k in range(6):
            scale = np.maximum(np.abs(y[k]), np.linalg.norm(y[3 * (k // 3): 3 * (k // 3) + 3], axis=0))
            h = rel * scale
            yp, ym = y.copy(), y.copy()
            yp[k] += h
            ym[k] -= h
            J[:, k] = (self.field(t, yp) - self.field(t, ym)) / (2.0 * h)
        return J

    def status(self, y):
        y = np.asarray(y, dtype=float)
        r = np.linalg.norm(y[:3], axis=0)
        ok = np.all(np.isfinite(y), axis=0) & (r > self.constants.R_E)
        return np.where(ok, STATUS_OK, STATUS_DIVERGED).astype(np.int8)

    def default_tangent(self, y):
        """Unit velocity perturbation along v: the semimajor-axis direction."""
        y = np.asarray(y, dtype=float)
        v = np.zeros_like(y)
        v[3:] = y[3:] / np.linalg.norm(y[3:], axis=0)
        return v

    def jacobi_constant(self, t, y):
        """E - theta_dot h_z, conserved for geopotential-only forces."""
        y = np.asarray(y, dtype=float)
        X = rotation_z(self.theta(t)) @ y[:3]
        V = geopotential_terms(X, self.coeffs, self.constants, self.harmonics, 1)[0]
        hz = y[0] * y[4] - y[1] * y[3]
        return 0.5 * np.sum(y[3:] ** 2, axis=0) - V - hz

    # conversions -----------------------------------------------------------
    def state_from_elements(self, a_km, e, i, M, omega=0.0, Omega=0.0):
        c = self.constants
        a_km, e, i, M, omega, Omega = np.broadcast_arrays(
            *(np.atleast_1d(np.asarray(x, dtype=float)) for x in (a_km, e, i, M, omega, Omega)))
        pos, vel = elements_to_rv(a_km / c.length_unit_km, e, i, M, omega, Omega, c.mu_E)
        return np.concatenate([pos, vel])

    def state_from_resonant(self, a_km, e, i, phi, omega, Omega, p: int, t: float = 0.0):
        """Initial state from a resonant angle phi = M + omega + p (Omega - theta)."""
        M = np.asarray(phi) - omega - p * (np.asarray(Omega) - self.theta(t))
        return self.state_from_elements(a_km, e, i, M, omega, Omega)

    def elements_from_state(self, y):
        c = self.constants
        a, e, i, M, w, O = rv_to_elements(y[:3], y[3:], c.mu_E)
        return a * c.length_unit_km, e, i, M, w, O


def total_acceleration(state: CartesianState, t: float, cfg: ForceModelConfig = ForceModelConfig(),
                       eph: Ephemeris | None = None, coeffs: GravityCoefficients | None = None,
                       c: Constants = STANDARD):
    """Acceleration [km/s^2] in the quasi-inertial frame at time t [s]."""
    r = np.asarray(state.position, dtype=float)
    if np.linalg.norm(r) <= c.R_E:
        raise BelowSurface("position inside the Earth")
    model = CartesianModel(cfg, coeffs, c, eph)
    cc = model.constants
    acc, _ = model.acceleration(t / cc.time_unit_s, (r / cc.length_unit_km)[:, None], 1)
    return acc[:, 0] * cc.length_unit_km / cc.time_unit_s ** 2
