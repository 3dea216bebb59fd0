"""Vectorized evaluation of harmonic sums and their derivatives.

A harmonic term is

    C(a, e, c) * cos(k_phi * phi + k_omega * omega + phase)

with ``C = A a^-(n+1) (1-c^2)^(s/2) Q(c) P(e) (1-e^2)^gamma`` and
``A = mu R_E^n J_nm``; sine-type terms carry an extra -pi/2 in ``phase``.
All derivatives with respect to the Delaunay actions (L, G, H) are taken
analytically through a = L^2/mu, e = sqrt(1 - G^2/L^2), c = H/G.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial import Polynomial

from ..core import Constants, GravityCoefficients
from .expansions import TermSpec

# guard thresholds for the Delaunay singularities
E_GUARD = 1.0e-4
SIN_GUARD = 1.0e-4


@dataclass(frozen=True)
class HarmonicTerm:
    """One harmonic with its gravity coefficient and constant phase attached."""

    spec: TermSpec
    J: float
    lam: float

    @property
    def label(self) -> str:
        return self.spec.label

    @property
    def phase(self) -> float:
        """Constant phase, including -pi/2 for sine-type terms."""
        ph = -self.spec.index.m * self.lam
        if self.spec.trig == "sin":
            ph -= 0.5 * math.pi
        return ph

    @property
    def angle(self) -> tuple:
        """Integer angle multipliers (k_phi, k_omega, k_Omega) and constant phase."""
        return self.spec.k_phi, self.spec.k_omega, 0, self.phase

    def coefficient(self, a, e, i, c: Constants):
        """C(a, e, i): the term's amplitude in the energy unit of ``c``."""
        sp = self.spec
        n = sp.index.n
        cos_i = np.cos(i)
        val = (c.mu_E * c.R_E ** n * self.J / np.asarray(a, dtype=float) ** (n + 1)
               * np.sin(i) ** sp.s * sp.Q(cos_i) * sp.P(e) * (1.0 - np.square(e)) ** sp.gamma)
        return val

    def value(self, a, e, i, phi, omega, c: Constants):
        return self.coefficient(a, e, i, c) * np.cos(term_angle(self, phi, omega))


def term_angle(term: HarmonicTerm, phi, omega):
    return term.spec.k_phi * phi + term.spec.k_omega * omega + term.phase


def truncate(spec: TermSpec, e_order: int | None) -> TermSpec:
    """Drop eccentricity powers above ``e_order``."""
    if e_order is None or spec.P.degree() <= e_order:
        return spec
    return replace(spec, P=Polynomial(spec.P.coef[: e_order + 1]))


def attach(specs, coeffs: GravityCoefficients):
    """Bind coefficient values to term specs; terms with J_nm = 0 are dropped."""
    out = []
    for sp in specs:
        n, m = sp.index.n, sp.index.m
        J = coeffs.Jnm(n, m)
        if J == 0.0:
            continue
        out.append(HarmonicTerm(sp, J, coeffs.lamnm(n, m)))
    return tuple(out)


def _pad(polys):
    width = max(len(p.coef) for p in polys)
    out = np.zeros((len(polys), width))
    for r, p in enumerate(polys):
        out[r, : len(p.coef)] = p.coef
    return out


def _horner(coef, x):
    """Evaluate rows of ``coef`` (T, d) at x (N,) with first and second derivatives."""
    T, d = coef.shape
    v = np.repeat(coef[:, -1:], x.shape[0], axis=1)
    dv = np.zeros_like(v)
    d2v = np.zeros_like(v)
    for k in range(d - 2, -1, -1):
        d2v = d2v * x + 2.0 * dv
        dv = dv * x + v
        v = v * x + coef[:, k : k + 1]
    return v, dv, d2v


class TermArrays:
    """Packed term data for fast evaluation over many states at once."""

    def __init__(self, terms, c: Constants):
        self.terms = tuple(terms)
        self.size = len(self.terms)
        if not self.terms:
            return
        n = np.array([t.spec.index.n for t in self.terms], dtype=float)
        self.amp = np.array([c.mu_E * c.R_E ** t.spec.index.n * t.J for t in self.terms])[:, None]
        self.npow = (n + 1.0)[:, None]
        self.s = np.array([t.spec.s for t in self.terms])[:, None]
        self.odd_s = bool(np.any(self.s == 1))
        self.Q = _pad([t.spec.Q for t in self.terms])
        self.P = _pad([t.spec.P for t in self.terms])
        self.gamma = np.array([t.spec.gamma for t in self.terms])[:, None]
        self.kphi = np.array([t.spec.k_phi for t in self.terms], dtype=float)[:, None]
        self.kom = np.array([t.spec.k_omega for t in self.terms], dtype=float)[:, None]
        self.phase = np.array([t.phase for t in self.terms])[:, None]

    def coefficients(self, a, e, cos_i):
        """Signed amplitudes C (T, N) without derivatives."""
        a = np.atleast_1d(a)
        e = np.atleast_1d(e)
        cos_i = np.atleast_1d(cos_i)
        sin_i = np.sqrt(np.clip(1.0 - cos_i ** 2, 0.0, None))
        Q, _, _ = _horner(self.Q, cos_i)
        P, _, _ = _horner(self.P, e)
        S = np.where(self.s == 1, sin_i, 1.0)
        return self.amp * a ** (-self.npow) * S * Q * P * (1.0 - e * e) ** self.gamma

    def derivatives(self, L, G, H, phi, omega, mu: float, order: int = 2):
        """Value, gradient and (optionally) Hessian of the sum in (L, G, H, phi, omega).

        Returns ``(R, grad, hess)`` with grad of shape (5, N) and hess (5, 5, N)
        (``hess`` is None when ``order < 2``).
        """
        N = L.shape[0]
        if self.size == 0:
            return np.zeros(N), np.zeros((5, N)), (np.zeros((5, 5, N)) if order >= 2 else None)
        a = L * L / mu
        ratio = G / L
        e2 = np.clip(1.0 - ratio * ratio, 0.0, None)
        e = np.sqrt(e2)
        c = H / G
        sin2 = np.clip(1.0 - c * c, 0.0, None)
        sin_i = np.sqrt(sin2)

        # radial factor
        f1 = a ** (-self.npow)
        f1a = -self.npow * f1 / a
        f1aa = self.npow * (self.npow + 1.0) * f1 / (a * a)

        # inclination factor
        Q, Qc, Qcc = _horner(self.Q, c)
        odd = self.s == 1
        with np.errstate(divide="ignore", invalid="ignore"):
            inv_s = np.where(sin_i > 0.0, 1.0 / sin_i, np.inf)
        S = np.where(odd, sin_i, 1.0)
        Sc = np.where(odd, -c * inv_s, 0.0)
        Scc = np.where(odd, -inv_s ** 3, 0.0)
        f2 = S * Q
        f2c = Sc * Q + S * Qc
        f2cc = Scc * Q + 2.0 * Sc * Qc + S * Qcc

        # eccentricity factor
        P, Pe, Pee = _horner(self.P, e)
        g = self.gamma
        one_m = 1.0 - e2
        W = one_m ** g
        We = -2.0 * g * e * one_m ** (g - 1.0)
        Wee = -2.0 * g * one_m ** (g - 1.0) + 4.0 * g * (g - 1.0) * e2 * one_m ** (g - 2.0)
        f3 = P * W
        f3e = Pe * W + P * We
        f3ee = Pee * W + 2.0 * Pe * We + P * Wee

        A = self.amp
        C = A * f1 * f2 * f3
        Ca = A * f1a * f2 * f3
        Cc = A * f1 * f2c * f3
        Ce = A * f1 * f2 * f3e

        # chain rule pieces
        with np.errstate(divide="ignore", invalid="ignore"):
            inv_e = 1.0 / e
        aL = 2.0 * L / mu
        eL = G * G / (L ** 3) * inv_e
        eG = -G / (L * L) * inv_e
        cG = -H / (G * G)
        cH = 1.0 / G

        ang = self.kphi * phi + self.kom * omega + self.phase
        cos_t = np.cos(ang)
        sin_t = np.sin(ang)

        CL = Ca * aL + Ce * eL
        CG = Ce * eG + Cc * cG
        CH = Cc * cH

        R = np.sum(C * cos_t, axis=0)
        grad = np.empty((5, N))
        grad[0] = np.sum(CL * cos_t, axis=0)
        grad[1] = np.sum(CG * cos_t, axis=0)
        grad[2] = np.sum(CH * cos_t, axis=0)
        Csin = C * sin_t
        grad[3] = -np.sum(self.kphi * Csin, axis=0)
        grad[4] = -np.sum(self.kom * Csin, axis=0)
        if order < 2:
            return R, grad, None

        Caa = A * f1aa * f2 * f3
        Ccc = A * f1 * f2cc * f3
        Cee = A * f1 * f2 * f3ee
        Cac = A * f1a * f2c * f3
        Cae = A * f1a * f2 * f3e
        Cce = A * f1 * f2c * f3e

        aLL = 2.0 / mu
        L3, L4, L5, L6 = L ** 3, L ** 4, L ** 5, L ** 6
        inv_e3 = inv_e ** 3
        eLL = -3.0 * G * G / L4 * inv_e - G ** 4 / L6 * inv_e3
        eLG = 2.0 * G / L3 * inv_e + G ** 3 / L5 * inv_e3
        eGG = -1.0 / (L * L) * inv_e - G * G / L4 * inv_e3
        cGG = 2.0 * H / G ** 3
        cGH = -1.0 / (G * G)

        CLL = Caa * aL ** 2 + 2.0 * Cae * aL * eL + Cee * eL ** 2 + Ca * aLL + Ce * eLL
        CLG = Cae * aL * eG + Cac * aL * cG + Cee * eL * eG + Cce * eL * cG + Ce * eLG
        CLH = Cac * aL * cH + Cce * eL * cH
        CGG = Cee * eG ** 2 + 2.0 * Cce * eG * cG + Ccc * cG ** 2 + Ce * eGG + Cc * cGG
        CGH = Cce * eG * cH + Ccc * cG * cH + Cc * cGH
        CHH = Ccc * cH ** 2

        hess = np.empty((5, 5, N))
        act = (CL, CG, CH)
        second = ((CLL, CLG, CLH), (CLG, CGG, CGH), (CLH, CGH, CHH))
        for r in range(3):
            for s_ in range(r, 3):
                hess[r, s_] = hess[s_, r] = np.sum(second[r][s_] * cos_t, axis=0)
            Xs = act[r] * sin_t
            hess[r, 3] = hess[3, r] = -np.sum(self.kphi * Xs, axis=0)
            hess[r, 4] = hess[4, r] = -np.sum(self.kom * Xs, axis=0)
        Ccos = C * cos_t
        hess[3, 3] = -np.sum(self.kphi ** 2 * Ccos, axis=0)
        hess[3, 4] = hess[4, 3] = -np.sum(self.kphi * self.kom * Ccos, axis=0)
        hess[4, 4] = -np.sum(self.kom ** 2 * Ccos, axis=0)
        return R, grad, hess
