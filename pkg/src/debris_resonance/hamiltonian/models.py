"""Secular and resonant Hamiltonians in resonant Delaunay-type variables.

For a p:1 resonance the state is ``(L, G, H, phi, omega, Omega)`` with
``phi = M + omega + p (Omega - theta)`` (the stroboscopic mean node lambda
for 1:1, sigma = 2 lambda for 2:1).  Actions are the usual Delaunay
actions.  With theta_dot constant the flow is autonomous, generated by

    K = -mu^2 / (2 L^2) - p theta_dot L + R(L, G, H, phi, omega)

in the canonical momenta (L, G - L, H - p L).  All model internals use
canonical units (R_E, 1/theta_dot); conversions happen at the API boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from ..core import (
    STANDARD,
    STATUS_DIVERGED,
    STATUS_NEAR_SINGULAR,
    STATUS_OK,
    Constants,
    GravityCoefficients,
    default_coefficients,
    resonant_semimajor_axis,
    wrap_pi,
)
from ..errors import ConfigError, DegenerateState, NearSingular, NoConvergence
from ..kaula import GEO, GPS, ResonanceId, TermClass, classify_term
from . import expansions
from .terms import E_GUARD, SIN_GUARD, HarmonicTerm, TermArrays, attach, truncate

HARMONIC_PRESETS = {
    "j2": {(2, 0)},
    "j2j22": {(2, 0), (2, 2)},
    "deg2": {(n, m) for n in range(2, 3) for m in range(n + 1)},
    "deg3": {(n, m) for n in range(2, 4) for m in range(n + 1)},
    "deg4": {(n, m) for n in range(2, 5) for m in range(n + 1)},
}

TRACKED_11 = ("T1", "T2", "T3")
TRACKED_21 = ("t1", "t2", "t3")


def _tables(res: ResonanceId):
    if res == GEO:
        return expansions.RES_11
    if res == GPS:
        return expansions.RES_21
    raise ConfigError(f"closed-form expansions are available for 1:1 and 2:1 only, not {res.label}")


def _harmonic_set(harmonics):
    if isinstance(harmonics, str):
        try:
            return set(HARMONIC_PRESETS[harmonics.lower()])
        except KeyError as exc:
            raise ConfigError(f"unknown harmonic preset {harmonics!r}; "
                              f"choose from {sorted(HARMONIC_PRESETS)}") from exc
    return {tuple(x) for x in harmonics}


@dataclass(frozen=True)
class ResonantState:
    """Resonant state in physical units: actions in km^2/s, angles in rad."""

    L: float
    G: float
    H: float
    phi: float
    omega: float = 0.0
    Omega: float = 0.0

    def to_array(self, c: Constants) -> np.ndarray:
        k = c.length_unit_km ** 2 / c.time_unit_s
        return np.array([self.L / k, self.G / k, self.H / k, self.phi, self.omega, self.Omega])

    @classmethod
    def from_array(cls, y, c: Constants) -> "ResonantState":
        k = c.length_unit_km ** 2 / c.time_unit_s
        y = np.asarray(y, dtype=float).reshape(6)
        return cls(y[0] * k, y[1] * k, y[2] * k, y[3], y[4], y[5])


@dataclass(frozen=True)
class EquilibriumReport:
    angle: float  # rad, in [-pi, pi)
    a_km: float
    stability: str  # "stable" | "unstable"
    eigenvalues: tuple  # complex pair, 1/s

    @property
    def angle_deg(self) -> float:
        return math.degrees(self.angle)


@dataclass(frozen=True)
class ResonantModel:
    """Kepler + rotation + secular + resonant harmonics for one resonance."""

    resonance: ResonanceId
    secular: tuple
    resonant: tuple
    constants: Constants
    e_order: int | None = None
    name: str = ""
    _arrays: TermArrays = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.resonance.q_res != 1:
            raise ConfigError("resonant-variable dynamics support p:1 resonances only")
        if not self.constants.is_canonical:
            object.__setattr__(self, "constants", self.constants.canonical())
        for t in self.secular:
            if classify_term(t.spec.index, self.resonance) is not TermClass.SECULAR:
                raise ConfigError(f"term {t.label} is not secular")
        for t in self.resonant:
            if classify_term(t.spec.index, self.resonance) is not TermClass.RESONANT:
                raise ConfigError(f"term {t.label} is not resonant for {self.resonance.label}")
        object.__setattr__(self, "_arrays", TermArrays(self.secular + self.resonant, self.constants))

    # -- bookkeeping --------------------------------------------------------
    @property
    def p(self) -> int:
        return self.resonance.p_res

    @property
    def mu(self) -> float:
        return self.constants.mu_E

    @property
    def terms(self) -> tuple:
        return self.secular + self.resonant

    @property
    def labels(self) -> tuple:
        return tuple(t.label for t in self.resonant)

    @property
    def has_odd_sine_terms(self) -> bool:
        return self._arrays.size > 0 and self._arrays.odd_s

    def term(self, label: str) -> HarmonicTerm:
        for t in self.terms:
            if t.label == label:
                return t
        raise KeyError(label)

    def a_res_km(self) -> float:
        return resonant_semimajor_axis(self.p, 1, self.constants.physical())

    # -- unit conversion ----------------------------------------------------
    def state_from_elements(self, a_km, e, i, phi, omega=0.0, Omega=0.0) -> np.ndarray:
        """Canonical state array (6, N) from elements (a in km, angles in rad)."""
        a_km, e, i, phi, omega, Omega = np.broadcast_arrays(
            *(np.atleast_1d(np.asarray(x, dtype=float)) for x in (a_km, e, i, phi, omega, Omega)))
        a = a_km / self.constants.length_unit_km
        L = np.sqrt(self.mu * a)
        G = L * np.sqrt(1.0 - e * e)
        H = G * np.cos(i)
        return np.array([L, G, H, phi, omega, Omega])

    def elements_from_state(self, y):
        """(a_km, e, i, phi, omega, Omega) arrays from canonical states."""
        L, G, H = y[0], y[1], y[2]
        a = L * L / self.mu * self.constants.length_unit_km
        e = np.sqrt(np.clip(1.0 - (G / L) ** 2, 0.0, None))
        i = np.arccos(np.clip(H / G, -1.0, 1.0))
        return a, e, i, y[3], y[4], y[5]

    def time_to_s(self, t):
        return t * self.constants.time_unit_s

    def time_from_days(self, days):
        return days * 86400.0 / self.constants.time_unit_s

    # -- evaluation -----------------------------------------------------------
    def status(self, y) -> np.ndarray:
        """Per-state domain status: ok, diverged (outside L >= G >= |H| > 0) or near-singular."""
        L, G, H = y[0], y[1], y[2]
        finite = np.all(np.isfinite(y), axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            valid = finite & (L > 0) & (G > 0) & (G <= L * (1 + 1e-12)) & (np.abs(H) <= G * (1 + 1e-12))
            a = L * L / self.mu
            valid &= a > self.constants.R_E
            e = np.sqrt(np.clip(1.0 - (G / L) ** 2, 0.0, None))
            sin_i = np.sqrt(np.clip(1.0 - (H / G) ** 2, 0.0, None))
        near = e < E_GUARD
        if self.has_odd_sine_terms:
            near |= sin_i < SIN_GUARD
        out = np.full(L.shape, STATUS_OK, dtype=np.int8)
        out[valid & near] = STATUS_NEAR_SINGULAR
        out[~valid] = STATUS_DIVERGED
        return out

    def guard(self, y):
        st = self.status(y)
        if np.any(st == STATUS_NEAR_SINGULAR):
            raise NearSingular("eccentricity or sin(i) below the 1e-4 guard")
        if np.any(st == STATUS_DIVERGED):
            raise DegenerateState("state outside L >= G >= |H| > 0")

    def _derivs(self, y, order):
        y = np.asarray(y, dtype=float)
        return self._arrays.derivatives(y[0], y[1], y[2], y[3], y[4], self.mu, order)

    def potential(self, y):
        """R (secular + resonant) at canonical states."""
        return self._derivs(_as_columns(y), 1)[0]

    def resonant_part(self, y):
        arr = TermArrays(self.resonant, self.constants)
        y = _as_columns(y)
        return arr.derivatives(y[0], y[1], y[2], y[3], y[4], self.mu, 1)[0]

    def energy(self, y):
        """Conserved K = -mu^2/(2L^2) - p theta_dot L + R."""
        y = _as_columns(y)
        R = self._derivs(y, 1)[0]
        return -self.mu ** 2 / (2.0 * y[0] ** 2) - self.p * self.constants.theta_dot * y[0] + R

    def field(self, t, y):
        y = _as_columns(y)
        _, g, _ = self._derivs(y, 1)
        return self._assemble_field(y, g)

    def _assemble_field(self, y, g):
        p = self.p
        RL, RG, RH, Rphi, Rom = g
        out = np.empty_like(y)
        out[0] = -Rphi
        out[1] = -Rom - Rphi
        out[2] = -p * Rphi
        out[3] = self.mu ** 2 / y[0] ** 3 - p * self.constants.theta_dot + RL + RG + p * RH
        out[4] = RG
        out[5] = RH
        return out

    def field_and_jacobian(self, t, y):
        """Vector field (6, N) and its Jacobian (6, 6, N)."""
        y = _as_columns(y)
        _, g, h = self._derivs(y, 2)
        f = self._assemble_field(y, g)
        p = self.p
        N = y.shape[1]
        J = np.zeros((6, 6, N))
        # rows over columns (L, G, H, phi, omega); Omega column stays zero
        J[0, :5] = -h[3]
        J[1, :5] = -h[4] - h[3]
        J[2, :5] = -p * h[3]
        J[3, :5] = h[0] + h[1] + p * h[2]
        J[3, 0] += -3.0 * self.mu ** 2 / y[0] ** 4
        J[4, :5] = h[1]
        J[5, :5] = h[2]
        return f, J

    def jacobian(self, t, y):
        return self.field_and_jacobian(t, y)[1]

    def coefficient_magnitudes(self, a_km, e, i, labels=None):
        """|C_k| for the resonant terms (or the named subset) at (a, e, i)."""
        terms = self.resonant if labels is None else tuple(self.term(l) for l in labels)
        arr = TermArrays(terms, self.constants)
        a = np.atleast_1d(np.asarray(a_km, dtype=float)) / self.constants.length_unit_km
        return np.abs(arr.coefficients(a, np.atleast_1d(e), np.cos(np.atleast_1d(i))))

    def describe(self) -> list:
        rows = []
        for t in self.terms:
            sp = t.spec
            rows.append({
                "label": t.label, "n": sp.index.n, "m": sp.index.m, "p": sp.index.p, "q": sp.index.q,
                "k_phi": sp.k_phi, "k_omega": sp.k_omega, "trig": sp.trig,
                "e_order": int(np.flatnonzero(sp.P.coef)[0]) if np.any(sp.P.coef) else 0,
                "J": t.J, "phase_deg": math.degrees(t.phase),
            })
        return rows


def _as_columns(y):
    y = np.asarray(y, dtype=float)
    return y[:, None] if y.ndim == 1 else y


def build_model(resonance: ResonanceId | str, harmonics="deg4", coeffs: GravityCoefficients | None = None,
                constants: Constants = STANDARD, e_order: int | None = None, labels=None,
                secular: str = "full", name: str = "") -> ResonantModel:
    """Assemble a resonant model from the closed-form tables.

    ``harmonics`` is a preset name (j2, j2j22, deg2, deg3, deg4) or an
    iterable of (n, m) pairs; ``labels`` optionally restricts the resonant
    terms; ``secular`` is "full" (J2, J3, J4 as allowed by ``harmonics``),
    "J2" or "none"; ``e_order`` truncates eccentricity polynomials.
    """
    if isinstance(resonance, str):
        resonance = ResonanceId.parse(resonance)
    coeffs = coeffs or default_coefficients()
    allowed = _harmonic_set(harmonics)
    res_specs = [s for s in _tables(resonance) if (s.index.n, s.index.m) in allowed]
    if labels is not None:
        labels = tuple(labels)
        known = {s.label for s in _tables(resonance)}
        unknown = set(labels) - known
        if unknown:
            raise ConfigError(f"unknown term labels {sorted(unknown)} for {resonance.label}")
        res_specs = [s for s in res_specs if s.label in labels]
    if secular == "full":
        sec_specs = [s for s in expansions.SECULAR if (s.index.n, 0) in allowed]
    elif secular.upper() == "J2":
        sec_specs = [expansions.SECULAR[0]]
    elif secular == "none":
        sec_specs = []
    else:
        raise ConfigError(f"secular must be 'full', 'J2' or 'none', got {secular!r}")
    sec_specs = [truncate(s, e_order) for s in sec_specs]
    res_specs = [truncate(s, e_order) for s in res_specs]
    return ResonantModel(resonance, attach(sec_specs, coeffs), attach(res_specs, coeffs),
                         constants.canonical(), e_order, name or str(harmonics))


class ToyModel21(ResonantModel):
    """2:1 toy model: Kepler + J2 secular + any subset of t1, t2, t3 to O(e^2)."""

    @classmethod
    def build(cls, active=("t1", "t2", "t3"), coeffs: GravityCoefficients | None = None,
              constants: Constants = STANDARD) -> "ToyModel21":
        active = tuple(active)
        bad = set(active) - set(TRACKED_21)
        if bad:
            raise ConfigError(f"toy model terms must be among t1, t2, t3, got {sorted(bad)}")
        base = build_model(GPS, "deg4", coeffs, constants, e_order=2, labels=active, secular="J2",
                           name="toy:" + "+".join(("J2",) + active))
        return cls(base.resonance, base.secular, base.resonant, base.constants, 2, base.name)

    @staticmethod
    def to_primed(y):
        """(L, G, H, sigma, omega, Omega) -> (L', G', H', sigma, omega, Omega)."""
        y = np.array(y, dtype=float, copy=True)
        y[1] = y[1] - y[0]
        y[2] = y[2] - 2.0 * y[0]
        return y

    @staticmethod
    def from_primed(yp):
        y = np.array(yp, dtype=float, copy=True)
        y[1] = y[1] + y[0]
        y[2] = y[2] + 2.0 * y[0]
        return y


def toy_vector_field(toy: ToyModel21, state_primed, t=0.0):
    """Canonical equations of the toy Hamiltonian in primed variables (canonical units)."""
    y = ToyModel21.from_primed(_as_columns(state_primed))
    f = toy.field(t, y)
    fp = f.copy()
    fp[1] = f[1] - f[0]
    fp[2] = f[2] - 2.0 * f[0]
    return fp if np.ndim(state_primed) > 1 else fp[:, 0]


# ---------------------------------------------------------------------------
# physical-unit operations
# ---------------------------------------------------------------------------

def secular_potential(a, e, i, omega, coeffs: GravityCoefficients | None = None,
                      c: Constants = STANDARD, harmonics="deg4"):
    """Secular part (J2, J3, J4) of the disturbing function, in the energy unit of ``c``."""
    coeffs = coeffs or default_coefficients()
    allowed = _harmonic_set(harmonics)
    total = 0.0
    for t in attach([s for s in expansions.SECULAR if (s.index.n, 0) in allowed], coeffs):
        total = total + t.value(a, e, i, 0.0, omega, c)
    return total


def resonant_potential(model: ResonantModel, state: ResonantState) -> float:
    """Sum of the model's resonant harmonics at ``state``, in km^2/s^2."""
    y = state.to_array(model.constants)
    R = model.resonant_part(y)[0]
    return float(model.constants.energy_to_km2s2(R))


def resonant_vector_field(model: ResonantModel, state: ResonantState, t: float = 0.0) -> ResonantState:
    """Time derivative of ``state`` (actions in km^2/s^2, angles in rad/s)."""
    c = model.constants
    y = state.to_array(c)
    model.guard(y[:, None])
    f = model.field(t, y)[:, 0]
    k = c.length_unit_km ** 2 / c.time_unit_s
    tu = c.time_unit_s
    return ResonantState(f[0] * k / tu, f[1] * k / tu, f[2] * k / tu, f[3] / tu, f[4] / tu, f[5] / tu)


def j2_secular_rates(a, e, i, coeffs: GravityCoefficients | None = None, c: Constants = STANDARD):
    """(Omega_dot, omega_dot) from the first-order J2 formulas, rad per time unit of ``c``."""
    coeffs = coeffs or default_coefficients()
    J2 = coeffs.Jnm(2, 0)
    n_star = np.sqrt(c.mu_E / np.asarray(a, dtype=float) ** 3)
    k = 1.5 * n_star * J2 * (c.R_E / (a * (1.0 - np.square(e)))) ** 2
    return -k * np.cos(i), k * (2.0 - 2.5 * np.sin(i) ** 2)


def bifurcation_function(i):
    """f(i) = -sin i (1 - 2 cos i - 3 cos^2 i)."""
    ci = np.cos(i)
    return -np.sin(i) * (1.0 - 2.0 * ci - 3.0 * ci * ci)


def _i0_equation(i, e):
    ci, si = math.cos(i), math.sin(i)
    return (0.75 * (1 + ci) ** 2 * (e / 2 - e ** 3 / 16)
            - 1.5 * si * si * (1.5 * e + 27.0 / 16.0 * e ** 3))


def solve_i0(e: float, xtol: float = 1e-10) -> float:
    """Inclination in (0, pi/2) where |t1| and |t2| coincide (O(e^3) forms)."""
    if not 0.0 < e < 1.0:
        raise ValueError("solve_i0 requires 0 < e < 1")
    return bisect(_i0_equation, 1e-12, 0.5 * math.pi, args=(e,), xtol=xtol)


# ---------------------------------------------------------------------------
# dominant terms
# ---------------------------------------------------------------------------

def tracked_labels(resonance: ResonanceId) -> tuple:
    """Labels compared by the dominant-term classification."""
    if resonance == GEO:
        return TRACKED_11
    if resonance == GPS:
        return TRACKED_21 + tuple(s.label for s in expansions.RES_21 if s.index.n == 4)
    raise ConfigError(f"no dominant-term set for {resonance.label}")


_DOMINANT_CACHE: dict = {}


def _dominant_model(resonance, coeffs):
    key = (resonance, id(coeffs))
    if key not in _DOMINANT_CACHE:
        _DOMINANT_CACHE[key] = build_model(resonance, "deg4", coeffs, labels=tracked_labels(resonance))
    return _DOMINANT_CACHE[key]


def dominant_index(resonance: ResonanceId, e, i, a_km=None, coeffs: GravityCoefficients | None = None,
                   scale: float = 1.0):
    """Index into ``tracked_labels(resonance)`` of the largest |g_k| (array friendly)."""
    coeffs = coeffs or default_coefficients()
    model = _dominant_model(resonance, coeffs)
    if a_km is None:
        a_km = resonant_semimajor_axis(resonance.p_res, resonance.q_res)
    e_b, i_b = np.broadcast_arrays(np.atleast_1d(np.asarray(e, float)), np.atleast_1d(np.asarray(i, float)))
    shape = e_b.shape
    labels = tracked_labels(resonance)
    mags = scale * model.coefficient_magnitudes(np.full(e_b.size, a_km), e_b.ravel(), i_b.ravel(), labels)
    return np.argmax(mags, axis=0).reshape(shape)


def dominant_term(resonance: ResonanceId, e: float, i: float, a_km: float | None = None,
                  coeffs: GravityCoefficients | None = None) -> str:
    """Label of the dominant harmonic among the tracked set at (a, e, i)."""
    idx = int(dominant_index(resonance, e, i, a_km, coeffs).ravel()[0])
    return tracked_labels(resonance)[idx]


# ---------------------------------------------------------------------------
# equilibria
# ---------------------------------------------------------------------------

def _reference_term(model: ResonantModel, e, i, reference):
    if reference is not None:
        return model.term(reference)
    if not model.resonant:
        raise ConfigError("model has no resonant terms")
    a_res = resonant_semimajor_axis(model.p, 1, model.constants.physical())
    mags = model.coefficient_magnitudes(a_res, e, i)[:, 0]
    return model.resonant[int(np.argmax(mags))]


def reduced_field(model: ResonantModel, phi, L, e, i, omega, Omega, k_ratio):
    """(angle rate, L rate) at fixed (e, i, omega, Omega); canonical units."""
    phi = np.atleast_1d(phi)
    L = np.atleast_1d(L)
    G = L * math.sqrt(1.0 - e * e)
    y = np.array([L, G, G * math.cos(i), phi, np.full_like(L, omega), np.full_like(L, Omega)])
    f = model.field(0.0, y)
    return f[3] + k_ratio * f[4], f[0]


def find_equilibria(model: ResonantModel, e: float, i: float, omega: float = 0.0, Omega: float = 0.0,
                    reference: str | None = None, n_seeds: int = 36, max_iter: int = 80,
                    window_km: float = 150.0) -> list:
    """Equilibria of the reduced (angle, a) flow at fixed (e, i, omega, Omega).

    The angle rate is that of the reference harmonic's argument divided by its
    k_phi (the dominant harmonic by default), so that a slowly precessing
    perigee shifts the resonance location as for the full multiplet
    component.  Roots are found by damped Newton from seeds spread in angle,
    merged within 0.5 deg / 0.1 km and classified from the eigenvalues of the
    2x2 linearization.  Raises NoConvergence when no seed converges.
    """
    y_probe = model.state_from_elements(model.a_res_km(), e, i, 0.0, omega, Omega)
    model.guard(y_probe)
    ref = _reference_term(model, e, i, reference)
    k_ratio = ref.spec.k_omega / ref.spec.k_phi
    c = model.constants
    L0 = math.sqrt(model.mu * model.a_res_km() / c.length_unit_km)
    dL_max = L0 * 0.5 * window_km / model.a_res_km()
    span = 2.0 * math.pi
    phi = np.linspace(-math.pi, -math.pi + span, n_seeds, endpoint=False)
    L = np.full_like(phi, L0)
    hphi, hL = 1e-6, 1e-9 * L0

    def jac(phi, L):
        fp = reduced_field(model, phi + hphi, L, e, i, omega, Omega, k_ratio)
        fm = reduced_field(model, phi - hphi, L, e, i, omega, Omega, k_ratio)
        gp = reduced_field(model, phi, L + hL, e, i, omega, Omega, k_ratio)
        gm = reduced_field(model, phi, L - hL, e, i, omega, Omega, k_ratio)
        return ((fp[0] - fm[0]) / (2 * hphi), (gp[0] - gm[0]) / (2 * hL),
                (fp[1] - fm[1]) / (2 * hphi), (gp[1] - gm[1]) / (2 * hL))

    converged = np.zeros(phi.shape, dtype=bool)
    alive = np.ones(phi.shape, dtype=bool)
    for _ in range(max_iter):
        r0, r1 = reduced_field(model, phi, L, e, i, omega, Omega, k_ratio)
        a11, a12, a21, a22 = jac(phi, L)
        det = a11 * a22 - a12 * a21
        with np.errstate(divide="ignore", invalid="ignore"):
            dphi = -(a22 * r0 - a12 * r1) / det
            dL = -(-a21 * r0 + a11 * r1) / det
        bad = ~np.isfinite(dphi) | ~np.isfinite(dL)
        dphi[bad] = 0.0
        dL[bad] = 0.0
        scale = np.minimum(1.0, np.minimum(0.3 / np.maximum(np.abs(dphi), 1e-300),
                                           0.2 * dL_max / np.maximum(np.abs(dL), 1e-300)))
        phi = phi + scale * dphi
        L = L + scale * dL
        alive &= np.abs(L - L0) < dL_max
        converged = alive & (np.abs(dphi) < 1e-11) & (np.abs(dL) < 1e-13 * L0)
        if np.all(converged | ~alive):
            break
    if not np.any(converged):
        raise NoConvergence("no equilibrium found from any seed")

    reports = []
    a_fac = c.length_unit_km / model.mu
    for ph, LL in zip(phi[converged], L[converged]):
        ang = float(wrap_pi(ph))
        a_km = float(LL * LL * a_fac)
        if any(abs(math.degrees(float(wrap_pi(ang - r.angle)))) < 0.5 and abs(a_km - r.a_km) < 0.1
               for r in reports):
            continue
        a11, a12, a21, a22 = (float(x[0]) for x in jac(np.array([ph]), np.array([LL])))
        ev = np.linalg.eigvals(np.array([[a11, a12], [a21, a22]])) / c.time_unit_s
        det = a11 * a22 - a12 * a21
        stability = "stable" if det > 0 else "unstable"
        reports.append(EquilibriumReport(ang, a_km, stability, tuple(complex(v) for v in ev)))
    reports.sort(key=lambda r: (r.angle, r.a_km))
    return reports
