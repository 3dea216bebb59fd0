"""Kaula expansion of the geopotential disturbing function.

The disturbing function is written as

    R = sum_{n,m,p,q} (mu R_E^n / a^(n+1)) F_nmp(i) G_npq(e) J_nm trig(psi_nmpq)

with ``psi = (n-2p) omega + (n-2p+q) M + m (Omega - theta) - m lambda_nm`` and
``trig = cos`` when n-m is even, ``sin`` otherwise.  This module evaluates
the inclination functions F, the eccentricity functions G (truncated
beta-series), the phase bookkeeping and the resonance classification.
"""

from __future__ import annotations

import enum
from fractions import Fraction
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import STANDARD, Constants, GravityCoefficients, OrbitalElements, wrap_angle

DEFAULT_K_MAX = 6
MAX_DEGREE = 4


class TermClass(enum.Enum):
    SECULAR = "secular"
    RESONANT = "resonant"
    NON_RESONANT = "non-resonant"


@dataclass(frozen=True, order=True)
class TermIndex:
    n: int
    m: int
    p: int
    q: int

    def __post_init__(self):
        if not 2 <= self.n:
            raise ValueError(f"degree n must be >= 2, got {self.n}")
        if not 0 <= self.m <= self.n:
            raise ValueError(f"order m must satisfy 0 <= m <= n, got m={self.m}")
        if not 0 <= self.p <= self.n:
            raise ValueError(f"p must satisfy 0 <= p <= n, got p={self.p}")

    @property
    def odd(self) -> bool:
        """True when n - m is odd (sine branch of the phase function)."""
        return (self.n - self.m) % 2 == 1

    @property
    def mean_anomaly_multiplier(self) -> int:
        return self.n - 2 * self.p + self.q


@dataclass(frozen=True)
class ResonanceId:
    """Commensurability q_res * Mdot = p_res * thetadot (1:1 is GEO, 2:1 is GPS)."""

    p_res: int
    q_res: int

    def __post_init__(self):
        if self.p_res <= 0 or self.q_res <= 0:
            raise ValueError("resonance integers must be positive")
        if math.gcd(self.p_res, self.q_res) != 1:
            raise ValueError(f"{self.p_res}:{self.q_res} is not in lowest terms")

    @property
    def label(self) -> str:
        return f"{self.p_res}:{self.q_res}"

    @classmethod
    def parse(cls, text: str) -> "ResonanceId":
        try:
            p, q = (int(x) for x in text.strip().split(":"))
        except ValueError as exc:
            raise ValueError(f"cannot parse resonance {text!r}, expected 'p:q'") from exc
        return cls(p, q)


GEO = ResonanceId(1, 1)
GPS = ResonanceId(2, 1)


# ---------------------------------------------------------------------------
# binomials and special functions
# ---------------------------------------------------------------------------

def binomial(x: int, j: int) -> float:
    """Generalized binomial coefficient C(x, j) for integer x (possibly negative)."""
    if j < 0:
        return 0.0
    if x >= 0 and j > x:
        return 0.0
    out = 1.0
    for l in range(j):
        out *= (x - l) / (l + 1)
    return out


@lru_cache(maxsize=None)
def _inclination_table(n: int, m: int, p: int):
    """Terms (coefficient, sin power, cos power) of F_nmp."""
    k = (n - m) // 2
    terms = {}
    for t in range(min(p, k) + 1):
        pref = math.factorial(2 * n - 2 * t) / (
            math.factorial(t) * math.factorial(n - t) * math.factorial(n - m - 2 * t)
            * 2.0 ** (2 * n - 2 * t)
        )
        sin_pow = n - m - 2 * t
        for s in range(m + 1):
            inner = 0.0
            for c in range(0, p - t + 1):
                inner += (binomial(n - m - 2 * t + s, c) * binomial(m - s, p - t - c)
                          * (-1.0) ** (c - k))
            if inner == 0.0:
                continue
            key = (sin_pow, s)
            terms[key] = terms.get(key, 0.0) + pref * math.comb(m, s) * inner
    return tuple((v, sp, cp) for (sp, cp), v in sorted(terms.items()) if v != 0.0)


def inclination_function(idx: TermIndex, i):
    """F_nmp(i), array friendly."""
    i = np.asarray(i, dtype=float)
    si, ci = np.sin(i), np.cos(i)
    out = np.zeros_like(i)
    for coef, sp, cp in _inclination_table(idx.n, idx.m, idx.p):
        out = out + coef * si ** sp * ci ** cp
    return out if out.ndim else float(out)


def _beta_series_coefficients(n: int, p: int, q: int, k_max: int):
    """Return (n, p', q', list over k of (P, Q) as functions of x = e/(2 beta))."""
    if p <= n / 2:
        pp, qq = p, q
    else:
        pp, qq = n - p, -q
    lin = n - 2 * pp + qq
    coeffs = []
    for k in range(k_max + 1):
        hP = k + qq if qq > 0 else k
        hQ = k if qq > 0 else k - qq
        cP = [binomial(2 * pp - 2 * n, hP - r) * (-1.0) ** r / math.factorial(r) * lin ** r
              for r in range(hP + 1)]
        cQ = [binomial(-2 * pp, hQ - r) / math.factorial(r) * lin ** r for r in range(hQ + 1)]
        coeffs.append((cP, cQ))
    return coeffs


def eccentricity_function(idx: TermIndex, e, k_max: int = DEFAULT_K_MAX):
    """G_npq(e) from the beta-series truncated at k = k_max (array friendly)."""
    return _eccentricity(idx.n, idx.p, idx.q, e, k_max)


def _eccentricity(n, p, q, e, k_max=DEFAULT_K_MAX):
    e = np.asarray(e, dtype=float)
    root = np.sqrt(1.0 - e * e)
    beta = e / (1.0 + root)
    x = 0.5 * (1.0 + root)  # e / (2 beta), regular at e = 0
    total = np.zeros_like(e)
    b2k = np.ones_like(e)
    for cP, cQ in _beta_series_coefficients(n, p, q, k_max):
        Pv = np.zeros_like(e)
        for r, c in enumerate(cP):
            Pv = Pv + c * x ** r
        Qv = np.zeros_like(e)
        for r, c in enumerate(cQ):
            Qv = Qv + c * x ** r
        total = total + Pv * Qv * b2k
        b2k = b2k * beta * beta
    out = (-1.0) ** abs(q) * (1.0 + beta * beta) ** n * beta ** abs(q) * total
    return out if out.ndim else float(out)


def resonant_argument(idx: TermIndex, el: OrbitalElements, theta: float, lambda_nm: float) -> float:
    """psi_nmpq reduced to [0, 2 pi)."""
    return float(wrap_angle(_psi(idx, el.M, el.omega, el.Omega, theta, lambda_nm)))


def _psi(idx, M, omega, Omega, theta, lambda_nm):
    return ((idx.n - 2 * idx.p) * omega + idx.mean_anomaly_multiplier * M
            + idx.m * (Omega - theta) - idx.m * lambda_nm)


def phase_function(idx: TermIndex, psi, J_nm: float):
    """S_nmpq = -J cos(psi) for n-m even, -J sin(psi) for n-m odd."""
    if idx.odd:
        return -J_nm * np.sin(psi)
    return -J_nm * np.cos(psi)


def classify_term(idx: TermIndex, res: ResonanceId | None = None) -> TermClass:
    k = idx.mean_anomaly_multiplier
    if idx.m == 0 and k == 0:
        return TermClass.SECULAR
    if res is not None and idx.m > 0 and res.p_res * k == res.q_res * idx.m:
        return TermClass.RESONANT
    return TermClass.NON_RESONANT


# ---------------------------------------------------------------------------
# index enumeration and assembly
# ---------------------------------------------------------------------------

def secular_indices(n_max: int = MAX_DEGREE, n_min: int = 2):
    """All secular (n, 0, p, 2p - n) indices with n_min <= n <= n_max."""
    return [TermIndex(n, 0, p, 2 * p - n) for n in range(n_min, n_max + 1) for p in range(n + 1)]


def resonant_indices(res: ResonanceId, n_max: int = MAX_DEGREE, q_max: int | None = None):
    """All (n, m, p, q) resonant with ``res`` for n <= n_max (optionally |q| <= q_max)."""
    out = []
    for n in range(2, n_max + 1):
        for m in range(1, n + 1):
            if (res.q_res * m) % res.p_res:
                continue
            k = res.q_res * m // res.p_res
            for p in range(n + 1):
                q = k - n + 2 * p
                if q_max is not None and abs(q) > q_max:
                    continue
                out.append(TermIndex(n, m, p, q))
    return out


def term_magnitude(idx: TermIndex, a, e, i, coeffs: GravityCoefficients,
                   c: Constants = STANDARD, k_max: int = DEFAULT_K_MAX):
    """Signed coefficient mu R^n / a^(n+1) J_nm F_nmp(i) G_npq(e)."""
    J = coeffs.Jnm(idx.n, idx.m)
    return (c.mu_E * c.R_E ** idx.n / np.asarray(a, dtype=float) ** (idx.n + 1) * J
            * inclination_function(idx, i) * eccentricity_function(idx, e, k_max))


def assemble_potential(indices, a, e, i, M, omega, Omega, theta, coeffs: GravityCoefficients,
                       c: Constants = STANDARD, k_max: int = DEFAULT_K_MAX):
    """Sum of -V_nm contributions, i.e. the disturbing function restricted to ``indices``."""
    total = 0.0
    for idx in indices:
        J = coeffs.Jnm(idx.n, idx.m)
        if J == 0.0:
            continue
        lam = coeffs.lamnm(idx.n, idx.m)
        psi = _psi(idx, M, omega, Omega, theta, lam)
        pref = c.mu_E * c.R_E ** idx.n / np.asarray(a, dtype=float) ** (idx.n + 1)
        total = total - pref * inclination_function(idx, i) * eccentricity_function(idx, e, k_max) \
            * phase_function(idx, psi, J)
    return total


def describe_index(idx: TermIndex, res: ResonanceId | None = None) -> dict:
    """Row of the human-readable term table."""
    k = idx.mean_anomaly_multiplier
    cls = classify_term(idx, res)
    row = {
        "n": idx.n, "m": idx.m, "p": idx.p, "q": idx.q,
        "class": cls.value,
        "trig": "sin" if idx.odd else "cos",
        "e_order": abs(idx.q),
        "coefficient": f"J{idx.n}{idx.m}*F{idx.n}{idx.m}{idx.p}(i)*G{idx.n}{idx.p}{idx.q}(e)",
    }
    if cls is TermClass.RESONANT and res is not None and res.q_res == 1:
        k_phi = k
        row["angle"] = _angle_text(k_phi, idx.n - 2 * idx.p - k_phi, idx.m, idx.n,
                                   "lambda" if res.p_res == 1 else "sigma")
    else:
        row["angle"] = _angle_text(0, idx.n - 2 * idx.p, idx.m, idx.n, "M", k_M=k)
    return row


def _angle_text(k_phi, k_omega, m, n, name, k_M=None):
    parts = []
    if k_M is not None:
        if k_M:
            parts.append(f"{k_M}*M")
        if m:
            parts.append(f"{m}*(Omega-theta)")
    elif k_phi:
        parts.append(f"{k_phi}*{name}")
    if k_omega:
        parts.append(f"{k_omega:+d}*omega")
    if m:
        parts.append(f"-{m}*lambda{n}{m}")
    return " ".join(parts) if parts else "0"


# ---------------------------------------------------------------------------
# exact rational series (used to build and audit closed-form expansions)
# ---------------------------------------------------------------------------

def _series_mul(a, b, order):
    out = [Fraction(0)] * (order + 1)
    for i, x in enumerate(a[: order + 1]):
        if x == 0:
            continue
        for j, y in enumerate(b[: order + 1 - i]):
            out[i + j] += x * y
    return out


def _series_inv(a, order):
    out = [Fraction(0)] * (order + 1)
    out[0] = 1 / Fraction(a[0])
    for k in range(1, order + 1):
        acc = sum((a[j] * out[k - j] for j in range(1, min(k, len(a) - 1) + 1)), Fraction(0))
        out[k] = -acc / a[0]
    return out


def _series_pow(a, power, order):
    out = [Fraction(1)] + [Fraction(0)] * order
    for _ in range(power):
        out = _series_mul(out, a, order)
    return out


def _frac_binomial(x: int, j: int) -> Fraction:
    if j < 0 or (x >= 0 and j > x):
        return Fraction(0)
    out = Fraction(1)
    for l in range(j):
        out *= Fraction(x - l, l + 1)
    return out


@lru_cache(maxsize=None)
def eccentricity_series(n: int, p: int, q: int, order: int) -> tuple:
    """Exact Taylor coefficients of G_npq(e) in powers of e up to e^order."""
    # sqrt(1 - e^2) = sum C(1/2, j) (-e^2)^j
    root = [Fraction(0)] * (order + 1)
    coef = Fraction(1)
    for j in range(order // 2 + 1):
        root[2 * j] = coef * (-1) ** j
        coef = coef * (Fraction(1, 2) - j) / (j + 1)
    one_plus_root = list(root)
    one_plus_root[0] += 1
    beta = _series_mul([Fraction(0), Fraction(1)], _series_inv(one_plus_root, order), order)
    x = [v / 2 for v in one_plus_root]
    beta2 = _series_mul(beta, beta, order)
    if p <= n / 2:
        pp, qq = p, q
    else:
        pp, qq = n - p, -q
    lin = n - 2 * pp + qq
    total = [Fraction(0)] * (order + 1)
    b2k = [Fraction(1)] + [Fraction(0)] * order
    for k in range(order // 2 + 1):
        hP = k + qq if qq > 0 else k
        hQ = k if qq > 0 else k - qq
        Pk = [Fraction(0)] * (order + 1)
        xr = [Fraction(1)] + [Fraction(0)] * order
        for r in range(hP + 1):
            c = _frac_binomial(2 * pp - 2 * n, hP - r) * Fraction((-1) ** r * lin ** r, math.factorial(r))
            Pk = [u + c * v for u, v in zip(Pk, xr)]
            xr = _series_mul(xr, x, order)
        Qk = [Fraction(0)] * (order + 1)
        xr = [Fraction(1)] + [Fraction(0)] * order
        for r in range(hQ + 1):
            c = _frac_binomial(-2 * pp, hQ - r) * Fraction(lin ** r, math.factorial(r))
            Qk = [u + c * v for u, v in zip(Qk, xr)]
            xr = _series_mul(xr, x, order)
        term = _series_mul(_series_mul(Pk, Qk, order), b2k, order)
        total = [u + v for u, v in zip(total, term)]
        b2k = _series_mul(b2k, beta2, order)
    one_b2 = list(beta2)
    one_b2[0] += 1
    out = _series_mul(_series_pow(one_b2, n, order), _series_pow(beta, abs(q), order), order)
    out = _series_mul(out, total, order)
    sign = (-1) ** abs(q)
    return tuple(sign * v for v in out)


@lru_cache(maxsize=None)
def inclination_polynomial(n: int, m: int, p: int) -> tuple:
    """F_nmp(i) = sin(i)^s * Q(cos i); returns (s, exact coefficients of Q ascending)."""
    k = (n - m) // 2
    s = (n - m) % 2
    Q = [Fraction(0)] * (n + 1)
    for t in range(min(p, k) + 1):
        pref = Fraction(math.factorial(2 * n - 2 * t),
                        math.factorial(t) * math.factorial(n - t) * math.factorial(n - m - 2 * t)
                        * 2 ** (2 * n - 2 * t))
        half = (n - m - 2 * t - s) // 2
        # (1 - c^2)^half
        base = [Fraction(0)] * (n + 1)
        for j in range(half + 1):
            base[2 * j] = Fraction(math.comb(half, j) * (-1) ** j)
        for sc in range(m + 1):
            inner = Fraction(0)
            for cc in range(0, p - t + 1):
                inner += (_frac_binomial(n - m - 2 * t + sc, cc) * _frac_binomial(m - sc, p - t - cc)
                          * (-1) ** ((cc - k) % 2))
            if inner == 0:
                continue
            w = pref * math.comb(m, sc) * inner
            for j, b in enumerate(base):
                if b and j + sc <= n:
                    Q[j + sc] += w * b
    while len(Q) > 1 and Q[-1] == 0:
        Q.pop()
    return s, tuple(Q)
