"""Closed-form secular and resonant expansions of the geopotential.

Every harmonic is stored as

    mu R_E^n J_nm / a^(n+1) * sin(i)^s * Q(cos i) * P(e) * (1 - e^2)^gamma
        * trig(k_phi * phi + k_omega * omega - m * lambda_nm)

where ``phi`` is the resonant angle (lambda for 1:1, sigma = 2 lambda for
2:1; absent for secular terms).  Q and P are ordinary polynomials.

The tables below are audited against the exact Kaula series in
``tests/test_kaula.py``; see ``CORRECTIONS`` for entries whose
eccentricity polynomial or trigonometric kind differs from the form
quoted in the literature.
"""

from __future__ import annotations

from dataclasses import dataclass

from numpy.polynomial import Polynomial

from ..kaula import TermIndex

c = Polynomial([0.0, 1.0])
e = Polynomial([0.0, 1.0])
one = Polynomial([1.0])
sin2 = one - c ** 2


@dataclass(frozen=True)
class TermSpec:
    """Static description of one harmonic (coefficients only, no J value)."""

    label: str
    index: TermIndex
    s: int
    Q: Polynomial
    P: Polynomial
    gamma: float = 0.0
    k_phi: int = 0
    k_omega: int = 0
    trig: str = "cos"
    mirrored: bool = False  # secular pair (p, q) + (n - p, -q) already summed


def _T(label, nmpq, s, Q, P, k_phi, k_omega, trig, gamma=0.0, mirrored=False):
    return TermSpec(label, TermIndex(*nmpq), s, Q, P, gamma, k_phi, k_omega, trig, mirrored)


SECULAR = (
    _T("J2", (2, 0, 1, 0), 0, 0.75 * sin2 - 0.5, one, 0, 0, "cos", gamma=-1.5),
    _T("J3", (3, 0, 1, -1), 1, 2.0 * (15 / 16 * sin2 - 0.75), e, 0, 1, "sin", gamma=-2.5, mirrored=True),
    _T("J4:2w", (4, 0, 1, -2), 0, -35 / 32 * sin2 ** 2 + 15 / 16 * sin2, 1.5 * e ** 2, 0, 2, "cos",
       gamma=-3.5, mirrored=True),
    _T("J4", (4, 0, 2, 0), 0, 105 / 64 * sin2 ** 2 - 15 / 8 * sin2 + 3 / 8, one + 1.5 * e ** 2, 0, 0, "cos",
       gamma=-3.5),
)


RES_11 = (
    # J22
    _T("T1", (2, 2, 0, 0), 0, 0.75 * (1 + c) ** 2, 1 - 2.5 * e ** 2, 2, 0, "cos"),
    _T("T2", (2, 2, 1, 2), 0, 27 / 8 * sin2, e ** 2, 2, -2, "cos"),
    # J21
    _T("J21[2,1,0,-1]", (2, 1, 0, -1), 1, 0.75 * (1 + c), -0.5 * e, 1, 1, "sin"),
    _T("J21[2,1,1,1]", (2, 1, 1, 1), 1, -1.5 * c, 1.5 * e, 1, -1, "sin"),
    # J31
    _T("J31[3,1,0,-2]", (3, 1, 0, -2), 0, -15 / 16 * sin2 * (1 + c), e ** 2 / 8, 1, 2, "cos"),
    _T("T3", (3, 1, 1, 0), 0, 15 / 16 * sin2 * (1 + 3 * c) - 0.75 * (1 + c), 1 + 2 * e ** 2, 1, 0, "cos"),
    _T("J31[3,1,2,2]", (3, 1, 2, 2), 0, 15 / 16 * sin2 * (1 - 3 * c) - 0.75 * (1 - c), 11 / 8 * e ** 2, 1, -2,
       "cos"),
    # J32
    _T("J32[3,2,0,-1]", (3, 2, 0, -1), 1, -15 / 8 * (1 + c) ** 2, e, 2, 1, "sin"),
    _T("J32[3,2,1,1]", (3, 2, 1, 1), 1, 45 / 8 * (1 - 2 * c - 3 * c ** 2), e, 2, -1, "sin"),
    # J33
    _T("J33[3,3,0,0]", (3, 3, 0, 0), 0, 15 / 8 * (1 + c) ** 3, 1 - 6 * e ** 2, 3, 0, "cos"),
    _T("J33[3,3,1,2]", (3, 3, 1, 2), 0, 45 / 8 * sin2 * (1 + c), 53 / 8 * e ** 2, 3, -2, "cos"),
    # J41
    _T("J41[4,1,1,-1]", (4, 1, 1, -1), 1, 35 / 16 * sin2 * (1 + 2 * c) - 15 / 8 * (1 + c), 0.5 * e, 1, 1, "sin"),
    _T("J41[4,1,2,1]", (4, 1, 2, 1), 1, c * (15 / 4 - 105 / 16 * sin2), 2.5 * e, 1, -1, "sin"),
    # J42
    _T("J42[4,2,0,-2]", (4, 2, 0, -2), 0, -105 / 32 * sin2 * (1 + c) ** 2, 0.5 * e ** 2, 2, 2, "cos"),
    _T("J42[4,2,1,0]", (4, 2, 1, 0), 0, 105 / 8 * sin2 * c * (1 + c) - 15 / 8 * (1 + c) ** 2, 1 + e ** 2, 2, 0,
       "cos"),
    _T("J42[4,2,2,2]", (4, 2, 2, 2), 0, 105 / 16 * sin2 * (1 - 3 * c ** 2) - 15 / 4 * sin2, 5 * e ** 2, 2, -2,
       "cos"),
    # J43
    _T("J43[4,3,0,-1]", (4, 3, 0, -1), 1, 105 / 16 * (1 + c) ** 3, -1.5 * e, 3, 1, "sin"),
    _T("J43[4,3,1,1]", (4, 3, 1, 1), 1, 105 / 8 * (1 - 3 * c ** 2 - 2 * c ** 3), 4.5 * e, 3, -1, "sin"),
    # J44
    _T("J44[4,4,0,0]", (4, 4, 0, 0), 0, 105 / 16 * (1 + c) ** 4, 1 - 11 * e ** 2, 4, 0, "cos"),
    _T("J44[4,4,1,2]", (4, 4, 1, 2), 0, 105 / 4 * sin2 * (1 + c) ** 2, 53 / 4 * e ** 2, 4, -2, "cos"),
)


RES_21 = (
    # J22
    _T("t1", (2, 2, 0, -1), 0, 0.75 * (1 + c) ** 2, -0.5 * e + e ** 3 / 16, 1, 1, "cos"),
    _T("t2", (2, 2, 1, 1), 0, 1.5 * sin2, 1.5 * e + 27 / 16 * e ** 3, 1, -1, "cos"),
    _T("J22[2,2,2,3]", (2, 2, 2, 3), 0, 0.75 * (1 - c) ** 2, e ** 3 / 48, 1, -3, "cos"),
    # J32
    _T("J32[3,2,0,-2]", (3, 2, 0, -2), 1, 15 / 8 * (1 + c) ** 2, e ** 2 / 8 + e ** 4 / 48, 1, 2, "sin"),
    _T("t3", (3, 2, 1, 0), 1, 15 / 8 * (1 - 2 * c - 3 * c ** 2), 1 + 2 * e ** 2 + 239 / 64 * e ** 4, 1, 0, "sin"),
    _T("J32[3,2,2,2]", (3, 2, 2, 2), 1, -15 / 8 * (1 + 2 * c - 3 * c ** 2), 11 / 8 * e ** 2 + 49 / 16 * e ** 4, 1,
       -2, "sin"),
    _T("J32[3,2,3,4]", (3, 2, 3, 4), 1, -15 / 8 * (1 - c) ** 2, e ** 4 / 384, 1, -4, "sin"),
    # J42
    _T("J42[4,2,0,-3]", (4, 2, 0, -3), 0, 105 / 32 * sin2 * (1 + c) ** 2, e ** 3 / 48, 1, 3, "cos"),
    _T("J42[4,2,1,-1]", (4, 2, 1, -1), 0, 105 / 8 * sin2 * c * (1 + c) - 15 / 8 * (1 + c) ** 2,
       0.5 * e + 33 / 16 * e ** 3, 1, 1, "cos"),
    _T("J42[4,2,2,1]", (4, 2, 2, 1), 0, 105 / 16 * sin2 * (1 - 3 * c ** 2) - 15 / 4 * sin2,
       2.5 * e + 135 / 16 * e ** 3, 1, -1, "cos"),
    _T("J42[4,2,3,3]", (4, 2, 3, 3), 0, -(105 / 8 * sin2 * c * (1 - c) + 15 / 8 * (1 - c) ** 2), 49 / 48 * e ** 3,
       1, -3, "cos"),
    # J44
    _T("J44[4,4,0,-2]", (4, 4, 0, -2), 0, 105 / 16 * (1 + c) ** 4, e ** 2 / 2 - e ** 4 / 3, 2, 2, "cos"),
    _T("J44[4,4,1,0]", (4, 4, 1, 0), 0, 105 / 4 * sin2 * (1 + c) ** 2, 1 + e ** 2 + 65 / 16 * e ** 4, 2, 0, "cos"),
    _T("J44[4,4,2,2]", (4, 4, 2, 2), 0, 315 / 8 * sin2 ** 2, 5 * e ** 2 + 155 / 12 * e ** 4, 2, -2, "cos"),
    _T("J44[4,4,3,4]", (4, 4, 3, 4), 0, 105 / 4 * sin2 * (1 - c) ** 2, 67 / 48 * e ** 4, 2, -4, "cos"),
)

# Entries whose eccentricity polynomial or trig kind differs from the
# commonly quoted form.  Values here are the quoted ones; the tables above carry the
# coefficients of the exact Hansen expansion (checked by quadrature in the
# test suite).  The two J21 harmonics are sine-type since n - m is odd.
CORRECTIONS = {
    "J22[2,2,2,3]": "67/48 e^3 quoted, e^3/48 exact",
    "J32[3,2,3,4]": "131/128 e^4 quoted, e^4/384 exact",
    "J42[4,2,0,-3]": "19/48 e^3 quoted, e^3/48 exact",
    "J21[2,1,0,-1]": "quoted with cos, sine branch applies",
    "J21[2,1,1,1]": "quoted with cos, sine branch applies",
}
