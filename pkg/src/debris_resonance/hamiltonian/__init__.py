"""Closed-form secular and resonant Hamiltonian models."""

from .expansions import CORRECTIONS, RES_11, RES_21, SECULAR, TermSpec
from .models import (
    EquilibriumReport,
    ResonantModel,
    ResonantState,
    ToyModel21,
    bifurcation_function,
    build_model,
    dominant_index,
    dominant_term,
    find_equilibria,
    j2_secular_rates,
    resonant_potential,
    resonant_vector_field,
    secular_potential,
    solve_i0,
    toy_vector_field,
    tracked_labels,
)
from .terms import HarmonicTerm, TermArrays

__all__ = [
    "CORRECTIONS", "RES_11", "RES_21", "SECULAR", "TermSpec", "EquilibriumReport", "ResonantModel",
    "ResonantState", "ToyModel21", "bifurcation_function", "build_model", "dominant_index",
    "dominant_term", "find_equilibria", "j2_secular_rates", "resonant_potential",
    "resonant_vector_field", "secular_potential", "solve_i0", "toy_vector_field", "tracked_labels",
    "HarmonicTerm", "TermArrays",
]
