import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import lpmv

from debris_resonance.core import STANDARD, OrbitalElements, default_coefficients, solve_kepler
from debris_resonance.hamiltonian import build_model
from debris_resonance.kaula import (
    GEO,
    GPS,
    ResonanceId,
    TermClass,
    TermIndex,
    assemble_potential,
    binomial,
    classify_term,
    eccentricity_function,
    inclination_function,
    phase_function,
    resonant_argument,
    resonant_indices,
    secular_indices,
    term_magnitude,
)

CO = default_coefficients()
CC = STANDARD.canonical()


def legendre(n, m, x):
    # scipy includes the Condon-Shortley phase; geodesy convention does not
    return (-1) ** m * lpmv(m, n, x)


def addition_oracle(n, m, i, u, Omega):
    """P_nm(sin lat) cos(m lon) on a circular orbit; C_nm = 1, S_nm = 0, theta = 0."""
    x = np.cos(u) * np.cos(Omega) - np.sin(u) * np.cos(i) * np.sin(Omega)
    y = np.cos(u) * np.sin(Omega) + np.sin(u) * np.cos(i) * np.cos(Omega)
    z = np.sin(u) * np.sin(i)
    return legendre(n, m, z) * np.cos(m * np.arctan2(y, x))


def hansen(n, p, q, e, N=4096):
    """G_npq as the Hansen coefficient X^{-(n+1), n-2p}_{n-2p+q}, by periodic quadrature."""
    M = np.arange(N) * (2 * np.pi / N)
    E = solve_kepler(M, e)
    r = 1.0 - e * np.cos(E)
    f = 2.0 * np.arctan2(np.sqrt(1 + e) * np.sin(E / 2), np.sqrt(1 - e) * np.cos(E / 2))
    return float(np.mean(r ** (-(n + 1)) * np.cos((n - 2 * p) * f - (n - 2 * p + q) * M)))


def test_inclination_printed_values():
    assert inclination_function(TermIndex(2, 2, 0, 0), 0.0) == pytest.approx(3.0)
    assert inclination_function(TermIndex(2, 0, 1, 0), 0.0) == pytest.approx(-0.5)
    i = 0.7
    assert inclination_function(TermIndex(2, 2, 0, 0), i) == pytest.approx(0.75 * (1 + math.cos(i)) ** 2)
    assert inclination_function(TermIndex(2, 0, 1, 0), i) == pytest.approx(0.75 * math.sin(i) ** 2 - 0.5)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_inclination_functions_addition_theorem(n):
    # Sum over p of F_nmp(i) * trig((n-2p)u + m Omega) reconstructs P_nm(sin lat) cos(m lon)
    rng = np.random.default_rng(n)
    for m in range(n + 1):
        for _ in range(20):
            i, u, Om = rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi), rng.uniform(0, 2 * np.pi)
            trig = np.sin if (n - m) % 2 else np.cos
            s = sum(inclination_function(TermIndex(n, m, p, 0), i) * trig((n - 2 * p) * u + m * Om)
                    for p in range(n + 1))
            assert s == pytest.approx(addition_oracle(n, m, i, u, Om), abs=1e-12)


def test_eccentricity_zero_limits():
    assert eccentricity_function(TermIndex(2, 2, 1, 0), 0.0) == pytest.approx(1.0)
    for q in (-2, -1, 1, 2):
        assert eccentricity_function(TermIndex(2, 2, 0, q), 0.0) == 0.0


def test_eccentricity_closed_form():
    # G_210 = (1 - e^2)^(-3/2); the k_max = 6 truncation error at e = 0.1 is far below 1e-10
    assert eccentricity_function(TermIndex(2, 0, 1, 0), 0.1) == pytest.approx(0.99 ** -1.5, rel=1e-10)


@pytest.mark.parametrize("npq", [(2, 1, 0), (2, 0, -1), (2, 0, 1), (2, 2, 1), (3, 1, -1), (3, 0, 2),
                                 (3, 2, 1), (4, 1, 0), (4, 2, 3), (4, 3, -2), (4, 0, -4)])
@pytest.mark.parametrize("e", [0.01, 0.1, 0.3])
def test_eccentricity_functions_hansen(npq, e):
    n, p, q = npq
    G = eccentricity_function(TermIndex(n, 2, p, q), e, k_max=14)
    assert G == pytest.approx(hansen(n, p, q, e), rel=1e-9, abs=1e-13)


def test_generalized_binomial():
    assert binomial(-3, 2) == pytest.approx(6.0)
    assert binomial(-2, 3) == pytest.approx(-4.0)
    assert binomial(3, 5) == 0.0
    assert binomial(5, 2) == 10.0


def test_resonant_argument():
    lam22 = CO.lamnm(2, 2)
    el = OrbitalElements(42164.0, 0.01, 0.2, 0.3, 0.4, 0.5)
    theta = 0.1
    lam = el.M + el.omega + el.Omega - theta
    psi = resonant_argument(TermIndex(2, 2, 0, 0), el, theta, lam22)
    assert math.remainder(psi - 2 * (lam - lam22), 2 * math.pi) == pytest.approx(0.0, abs=1e-12)
    assert resonant_argument(TermIndex(2, 2, 0, 0), OrbitalElements(1.0, 0.0, 0.0), 0.0, 0.0) == 0.0
    # (2,2,1,-1): 0*omega + (-1)*M + 2(Omega - theta) - 2 lambda22
    psi = resonant_argument(TermIndex(2, 2, 1, -1), el, theta, lam22)
    hand = -el.M + 2 * (el.Omega - theta) - 2 * lam22
    assert math.remainder(psi - hand, 2 * math.pi) == pytest.approx(0.0, abs=1e-12)


def test_phase_function_branches():
    J22, J32 = CO.Jnm(2, 2), CO.Jnm(3, 2)
    assert phase_function(TermIndex(2, 2, 0, 0), 0.0, J22) == pytest.approx(-1.81559e-6, rel=1e-5)
    assert phase_function(TermIndex(3, 2, 1, 0), 0.0, J32) == 0.0
    assert phase_function(TermIndex(3, 2, 1, 0), math.pi / 2, J32) == pytest.approx(-J32)


def test_classify_term():
    assert classify_term(TermIndex(2, 0, 1, 0), GEO) is TermClass.SECULAR
    assert classify_term(TermIndex(2, 2, 0, 0), GEO) is TermClass.RESONANT
    assert classify_term(TermIndex(2, 2, 1, -1), GPS) is TermClass.NON_RESONANT
    assert classify_term(TermIndex(2, 2, 0, -1), GPS) is TermClass.RESONANT


def test_enumeration_matches_classification():
    for res in (GEO, GPS, ResonanceId(3, 1)):
        found = set(resonant_indices(res))
        for n in range(2, 5):
            for m in range(n + 1):
                for p in range(n + 1):
                    for q in range(-6, 7):
                        idx = TermIndex(n, m, p, q)
                        if classify_term(idx, res) is TermClass.RESONANT:
                            assert idx in found
    assert all(classify_term(idx) is TermClass.SECULAR for idx in secular_indices())


def test_resonance_parse():
    assert ResonanceId.parse("2:1") == GPS
    with pytest.raises(ValueError):
        ResonanceId.parse("2-1")
    with pytest.raises(ValueError):
        ResonanceId(2, 2)


states = st.tuples(st.floats(0.005, 0.1), st.floats(0.2, 2.9), st.floats(0.0, 6.28), st.floats(0.0, 6.28),
                   st.floats(0.0, 6.28))


@settings(max_examples=60, deadline=None)
@given(states)
def test_secular_assembly_matches_closed_form(s):
    e, i, M, w, O = s
    m = build_model(GEO, "deg4")
    a = 42170.0
    y = m.state_from_elements(a, e, i, M + w + O, w, O)
    closed = m.potential(y)[0] - m.resonant_part(y)[0]
    kaula = assemble_potential(secular_indices(), a / CC.length_unit_km, e, i, M, w, O, 0.0, CO, CC)
    assert closed == pytest.approx(kaula, rel=1e-12)


@pytest.mark.parametrize("res, a, order", [(GEO, 42170.0, 2), (GPS, 26565.0, 4)])
@settings(max_examples=40, deadline=None)
@given(s=states)
def test_resonant_assembly_matches_closed_form(res, a, order, s):
    # closed forms are truncated at e^order; the Kaula sum is not
    e, i, M, w, O = s
    m = build_model(res, "deg4")
    y = m.state_from_elements(a, e, i, M + w + res.p_res * O, w, O)
    closed = m.resonant_part(y)[0]
    idx = resonant_indices(res)
    kaula = assemble_potential(idx, a / CC.length_unit_km, e, i, M, w, O, 0.0, CO, CC)
    scale = sum(abs(float(term_magnitude(k, a / CC.length_unit_km, 0.01, i, CO, CC))) for k in idx)
    scale = max(scale, abs(kaula))
    assert abs(closed - kaula) <= 2e3 * e ** (order + 1) * scale
