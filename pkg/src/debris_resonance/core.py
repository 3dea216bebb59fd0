"""Physical constants, orbital state types, conversions and the gravity table.

Two unit systems are used throughout:

* physical: km, s, radians (the default ``STANDARD`` constants);
* canonical: length unit R_E and time unit 1/theta_dot, so that the Earth
  rotation rate is exactly 1.  Obtained with ``Constants.canonical()``.

Every function that needs a gravitational parameter takes a ``Constants``
instance and works in whatever unit system that instance is expressed in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Literal

import numpy as np

from .errors import DegenerateState

TWO_PI = 2.0 * math.pi

# per-trajectory status codes shared by propagators, FLI and maps
STATUS_OK = 0
STATUS_DIVERGED = 1
STATUS_NEAR_SINGULAR = 2
STATUS_SATURATED = 3
STATUS_NAMES = {STATUS_OK: "ok", STATUS_DIVERGED: "diverged", STATUS_NEAR_SINGULAR: "near-singular",
                STATUS_SATURATED: "saturated"}

# Newton-meter SI -> km/s^2 for accelerations computed from P_r * A/m.
_M_TO_KM = 1.0e-3


@dataclass(frozen=True)
class Constants:
    """Physical constants in a consistent unit system.

    ``length_unit_km`` and ``time_unit_s`` give the size of one length/time
    unit of this instance in km and s; they are 1 for physical units.
    ``P_r`` is always in N/m^2 (it is only used through
    :meth:`srp_acceleration_1au`).
    """

    mu_E: float = 398600.4418
    R_E: float = 6378.1363
    sidereal_day: float = 86164.0989
    Gm_S: float = 1.32712440018e11
    Gm_M: float = 4902.800066
    P_r: float = 4.56e-6
    a_S: float = 1.495978707e8
    length_unit_km: float = 1.0
    time_unit_s: float = 1.0

    def __post_init__(self):
        for name in ("mu_E", "R_E", "sidereal_day", "Gm_S", "Gm_M", "P_r", "a_S",
                     "length_unit_km", "time_unit_s"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"constant {name} must be strictly positive")

    @property
    def theta_dot(self) -> float:
        return TWO_PI / self.sidereal_day

    @property
    def is_canonical(self) -> bool:
        return self.length_unit_km != 1.0 or self.time_unit_s != 1.0

    def canonical(self) -> "Constants":
        """Return the same constants in units (R_E, 1/theta_dot)."""
        if self.is_canonical:
            return self
        lu = self.R_E
        tu = 1.0 / self.theta_dot
        mu_scale = tu * tu / lu ** 3
        return replace(
            self,
            mu_E=self.mu_E * mu_scale,
            R_E=1.0,
            sidereal_day=TWO_PI,
            Gm_S=self.Gm_S * mu_scale,
            Gm_M=self.Gm_M * mu_scale,
            a_S=self.a_S / lu,
            length_unit_km=lu,
            time_unit_s=tu,
        )

    def physical(self) -> "Constants":
        """Inverse of :meth:`canonical`: the same constants in km and s."""
        if not self.is_canonical:
            return self
        lu, tu = self.length_unit_km, self.time_unit_s
        mu_scale = lu ** 3 / (tu * tu)
        return replace(
            self,
            mu_E=self.mu_E * mu_scale,
            R_E=self.R_E * lu,
            sidereal_day=self.sidereal_day * tu,
            Gm_S=self.Gm_S * mu_scale,
            Gm_M=self.Gm_M * mu_scale,
            a_S=self.a_S * lu,
            length_unit_km=1.0,
            time_unit_s=1.0,
        )

    # unit helpers -------------------------------------------------------
    def length_from_km(self, x):
        return np.asarray(x, dtype=float) / self.length_unit_km if np.ndim(x) else x / self.length_unit_km

    def length_to_km(self, x):
        return x * self.length_unit_km

    def time_from_s(self, t):
        return t / self.time_unit_s

    def time_to_s(self, t):
        return t * self.time_unit_s

    def energy_to_km2s2(self, v):
        return v * (self.length_unit_km / self.time_unit_s) ** 2

    def srp_acceleration_1au(self, C_r: float, area_to_mass: float) -> float:
        """C_r * P_r * A/m at 1 AU, in this instance's acceleration unit.

        ``area_to_mass`` is in m^2/kg.
        """
        acc_km_s2 = C_r * self.P_r * area_to_mass * _M_TO_KM
        return acc_km_s2 * self.time_unit_s ** 2 / self.length_unit_km


STANDARD = Constants()


def wrap_angle(x):
    """Reduce an angle (or array of angles) to [0, 2*pi)."""
    return np.mod(x, TWO_PI)


def wrap_pi(x):
    """Reduce an angle (or array) to [-pi, pi)."""
    return np.mod(np.asarray(x) + math.pi, TWO_PI) - math.pi


# ---------------------------------------------------------------------------
# State types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitalElements:
    """Osculating Keplerian elements; lengths in the unit of the constants used."""

    a: float
    e: float
    i: float
    M: float = 0.0
    omega: float = 0.0
    Omega: float = 0.0

    def __post_init__(self):
        if not self.a > 0.0:
            raise DegenerateState(f"semimajor axis must be positive, got {self.a}")
        if not 0.0 <= self.e < 1.0:
            raise DegenerateState(f"eccentricity must lie in [0, 1), got {self.e}")
        if not 0.0 <= self.i <= math.pi:
            raise DegenerateState(f"inclination must lie in [0, pi], got {self.i}")
        object.__setattr__(self, "M", float(wrap_angle(self.M)))
        object.__setattr__(self, "omega", float(wrap_angle(self.omega)))
        object.__setattr__(self, "Omega", float(wrap_angle(self.Omega)))

    @classmethod
    def from_degrees(cls, a, e, i_deg, M_deg=0.0, omega_deg=0.0, Omega_deg=0.0):
        return cls(a, e, math.radians(i_deg), math.radians(M_deg),
                   math.radians(omega_deg), math.radians(Omega_deg))


@dataclass(frozen=True)
class DelaunayState:
    """Delaunay action-angle variables (L, G, H, M, omega, Omega)."""

    L: float
    G: float
    H: float
    M: float = 0.0
    omega: float = 0.0
    Omega: float = 0.0


@dataclass(frozen=True)
class CartesianState:
    position: np.ndarray
    velocity: np.ndarray
    frame: Literal["quasi-inertial", "synodic"] = "quasi-inertial"

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float).reshape(3))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.position, self.velocity])


# ---------------------------------------------------------------------------
# Gravity coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GravityCoefficients:
    """Unnormalized geopotential coefficients with derived (J_nm, lambda_nm).

    Values are stored as true (dimensionless) numbers, not in units of 1e-6.
    ``J`` and ``lam`` hold the amplitudes and phase longitudes used by the
    Hamiltonian models; ``C`` and ``S`` feed the Cartesian force model.
    """

    C: dict = field(default_factory=dict)
    S: dict = field(default_factory=dict)
    J: dict = field(default_factory=dict)
    lam: dict = field(default_factory=dict)

    @classmethod
    def from_cs(cls, rows) -> "GravityCoefficients":
        """Build from ``(n, m, C, S)`` rows, deriving J and lambda."""
        C, S, J, lam = {}, {}, {}, {}
        for n, m, c, s in rows:
            C[n, m], S[n, m] = float(c), float(s)
            J[n, m], lam[n, m] = cs_to_j_lambda(m, c, s)
        return cls(C, S, J, lam)

    @property
    def max_degree(self) -> int:
        return max(n for n, _ in self.C)

    def Jnm(self, n: int, m: int) -> float:
        return self.J.get((n, m), 0.0)

    def lamnm(self, n: int, m: int) -> float:
        return self.lam.get((n, m), 0.0)

    def Cnm(self, n: int, m: int) -> float:
        return self.C.get((n, m), 0.0)

    def Snm(self, n: int, m: int) -> float:
        return self.S.get((n, m), 0.0)

    def restricted(self, keep) -> "GravityCoefficients":
        """Copy keeping only the (n, m) pairs in ``keep`` (others read as zero)."""
        keep = set(keep)
        pick = lambda d: {k: v for k, v in d.items() if k in keep}
        return GravityCoefficients(pick(self.C), pick(self.S), pick(self.J), pick(self.lam))


def cs_to_j_lambda(m: int, C: float, S: float) -> tuple[float, float]:
    """(C_nm, S_nm) -> (J_nm, lambda_nm) with C = -J cos(m lam), S = -J sin(m lam)."""
    if m == 0:
        return -C, 0.0
    J = math.hypot(C, S)
    lam = math.atan2(-S, -C) / m if J > 0.0 else 0.0
    return J, lam


def j_lambda_to_cs(m: int, J: float, lam: float) -> tuple[float, float]:
    if m == 0:
        return -J, 0.0
    return -J * math.cos(m * lam), -J * math.sin(m * lam)


def load_coefficients(path: str | Path | None = None, scale: float = 1.0e-6) -> GravityCoefficients:
    """Read a coefficient table.

    Each non-comment row is ``n m C S`` or ``n m C S J lambda_deg``, with
    C, S, J in units of ``scale``.  When J and lambda are given they are kept
    as printed; otherwise they are derived from C and S.
    """
    if path is None:
        text = resources.files("debris_resonance").joinpath("data/egm2008_deg4.txt").read_text()
    else:
        text = Path(path).read_text()
    C, S, J, lam = {}, {}, {}, {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (4, 6):
            raise ValueError(f"{path or 'bundled table'}:{lineno}: expected 4 or 6 columns")
        n, m = int(parts[0]), int(parts[1])
        if not (2 <= n and 0 <= m <= n):
            raise ValueError(f"{path or 'bundled table'}:{lineno}: invalid degree/order ({n}, {m})")
        c, s = float(parts[2]) * scale, float(parts[3]) * scale
        C[n, m], S[n, m] = c, s
        if len(parts) == 6:
            J[n, m] = float(parts[4]) * scale
            lam[n, m] = math.radians(float(parts[5]))
        else:
            J[n, m], lam[n, m] = cs_to_j_lambda(m, c, s)
    return GravityCoefficients(C, S, J, lam)


_DEFAULT_COEFFS: GravityCoefficients | None = None


def default_coefficients() -> GravityCoefficients:
    global _DEFAULT_COEFFS
    if _DEFAULT_COEFFS is None:
        _DEFAULT_COEFFS = load_coefficients()
    return _DEFAULT_COEFFS


# ---------------------------------------------------------------------------
# Conversions
# ---------------------------------------------------------------------------

def elements_to_delaunay(el: OrbitalElements, c: Constants = STANDARD) -> DelaunayState:
    L = math.sqrt(c.mu_E * el.a)
    G = L * math.sqrt(1.0 - el.e ** 2)
    H = G * math.cos(el.i)
    return DelaunayState(L, G, H, el.M, el.omega, el.Omega)


def delaunay_to_elements(d: DelaunayState, c: Constants = STANDARD, tol: float = 1e-12) -> OrbitalElements:
    L, G, H = d.L, d.G, d.H
    if not L > 0.0 or not G > 0.0:
        raise DegenerateState("L and G must be positive")
    if G > L * (1.0 + tol) or abs(H) > G * (1.0 + tol):
        raise DegenerateState(f"need L >= G >= |H|, got L={L}, G={G}, H={H}")
    ratio = min(G / L, 1.0)
    e = math.sqrt(max(0.0, 1.0 - ratio * ratio))
    i = math.acos(max(-1.0, min(1.0, H / G)))
    return OrbitalElements(L * L / c.mu_E, e, i, d.M, d.omega, d.Omega)


def delaunay_actions(a, e, i, mu):
    """Array version of (a, e, i) -> (L, G, H)."""
    L = np.sqrt(mu * a)
    G = L * np.sqrt(1.0 - np.square(e))
    return L, G, G * np.cos(i)


def solve_kepler(M, e, tol: float = 1e-15, max_iter: int = 50):
    """Eccentric anomaly from mean anomaly (Newton), array friendly."""
    M = np.asarray(M, dtype=float)
    e = np.asarray(e, dtype=float)
    E = np.where(e < 0.8, M, math.pi * np.ones_like(M))
    for _ in range(max_iter):
        f = E - e * np.sin(E) - M
        dE = f / (1.0 - e * np.cos(E))
        E = E - dE
        if np.all(np.abs(dE) < tol):
            break
    return E


def elements_to_rv(a, e, i, M, omega, Omega, mu):
    """Array version of elements -> (r, v); returns arrays of shape (3, ...)."""
    e = np.asarray(e, dtype=float)
    if np.any(e >= 1.0):
        raise DegenerateState("elements_to_rv requires e < 1")
    E = solve_kepler(M, e)
    cE, sE = np.cos(E), np.sin(E)
    root = np.sqrt(1.0 - e * e)
    # perifocal coordinates
    xp = a * (cE - e)
    yp = a * root * sE
    r = a * (1.0 - e * cE)
    n = np.sqrt(mu / a ** 3)
    vxp = -a * n * sE * a / r
    vyp = a * n * root * cE * a / r
    cw, sw = np.cos(omega), np.sin(omega)
    cO, sO = np.cos(Omega), np.sin(Omega)
    ci, si = np.cos(i), np.sin(i)
    p11 = cO * cw - sO * sw * ci
    p12 = -cO * sw - sO * cw * ci
    p21 = sO * cw + cO * sw * ci
    p22 = -sO * sw + cO * cw * ci
    p31 = sw * si
    p32 = cw * si
    pos = np.array([p11 * xp + p12 * yp, p21 * xp + p22 * yp, p31 * xp + p32 * yp])
    vel = np.array([p11 * vxp + p12 * vyp, p21 * vxp + p22 * vyp, p31 * vxp + p32 * vyp])
    return pos, vel


def rv_to_elements(pos, vel, mu):
    """Array version of (r, v) -> (a, e, i, M, omega, Omega); inputs shape (3, ...)."""
    pos = np.asarray(pos, dtype=float)
    vel = np.asarray(vel, dtype=float)
    r = np.sqrt(np.sum(pos * pos, axis=0))
    v2 = np.sum(vel * vel, axis=0)
    h = np.cross(pos, vel, axis=0)
    hn = np.sqrt(np.sum(h * h, axis=0))
    if np.any(hn <= 0.0):
        raise DegenerateState("zero angular momentum (rectilinear orbit)")
    energy = 0.5 * v2 - mu / r
    if np.any(energy >= 0.0):
        raise DegenerateState("orbit is not bound (e >= 1)")
    a = -mu / (2.0 * energy)
    rdotv = np.sum(pos * vel, axis=0)
    evec = ((v2 - mu / r) * pos - rdotv * vel) / mu
    e = np.sqrt(np.sum(evec * evec, axis=0))
    i = np.arccos(np.clip(h[2] / hn, -1.0, 1.0))
    Omega = np.arctan2(h[0], -h[1])
    # argument of latitude and true anomaly through node-aligned frame
    cO, sO = np.cos(Omega), np.sin(Omega)
    ci, si = np.cos(i), np.sin(i)
    # components in the frame (node line, in-plane normal, h)
    x_n = cO * pos[0] + sO * pos[1]
    y_n = ci * (-sO * pos[0] + cO * pos[1]) + si * pos[2]
    u = np.arctan2(y_n, x_n)
    ex_n = cO * evec[0] + sO * evec[1]
    ey_n = ci * (-sO * evec[0] + cO * evec[1]) + si * evec[2]
    omega = np.arctan2(ey_n, ex_n)
    nu = u - omega
    E = 2.0 * np.arctan2(np.sqrt(1.0 - e) * np.sin(nu / 2.0), np.sqrt(1.0 + e) * np.cos(nu / 2.0))
    M = E - e * np.sin(E)
    return a, e, i, wrap_angle(M), wrap_angle(omega), wrap_angle(Omega)


def elements_to_cartesian(el: OrbitalElements, c: Constants = STANDARD) -> CartesianState:
    pos, vel = elements_to_rv(el.a, el.e, el.i, el.M, el.omega, el.Omega, c.mu_E)
    return CartesianState(pos, vel)


def cartesian_to_elements(s: CartesianState, c: Constants = STANDARD) -> OrbitalElements:
    a, e, i, M, w, O = rv_to_elements(s.position, s.velocity, c.mu_E)
    if e >= 1.0:
        raise DegenerateState("orbit is not elliptic")
    return OrbitalElements(float(a), float(e), float(i), float(M), float(w), float(O))


def sidereal_time(t, theta0: float = 0.0, c: Constants = STANDARD):
    """Earth rotation angle theta(t) = theta0 + theta_dot * t, reduced mod 2*pi."""
    return wrap_angle(theta0 + c.theta_dot * t)


def rotation_z(angle):
    """R_3(angle) as a (3, 3) matrix (passive rotation about the third axis)."""
    ca, sa = math.cos(angle), math.sin(angle)
    return np.array([[ca, sa, 0.0], [-sa, ca, 0.0], [0.0, 0.0, 1.0]])


def resonant_semimajor_axis(p: int, q: int, c: Constants = STANDARD) -> float:
    """a_res = (q/p)^(2/3) (mu / theta_dot^2)^(1/3) in the length unit of ``c``."""
    return (q / p) ** (2.0 / 3.0) * (c.mu_E / c.theta_dot ** 2) ** (1.0 / 3.0)
