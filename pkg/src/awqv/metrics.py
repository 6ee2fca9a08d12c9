"""Solution-quality metrics over the exact cost spectrum.

Costs are in minimisation form, so ``C_1`` is the optimum and ``C_K`` the worst
level. For a state, ``P_ge[k]`` is the mass on bitstrings with cost ``>= C_k``
and ``P_gt[k]`` the mass with cost ``> C_k``; the minimum of ``M`` i.i.d.
samples sits at level ``k`` with probability ``P_ge[k]^M - P_gt[k]^M``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .problem import Spectrum
from .statevec import probabilities

COST_TOL = 1e-9


@dataclass(frozen=True)
class LevelDistribution:
    costs: np.ndarray
    masses: np.ndarray

    @property
    def p_ge(self) -> np.ndarray:
        return np.cumsum(self.masses[::-1])[::-1]

    @property
    def p_gt(self) -> np.ndarray:
        return np.append(self.p_ge[1:], 0.0)


def level_distribution(psi: np.ndarray, spectrum: Spectrum) -> LevelDistribution:
    probs = probabilities(psi)
    if probs.shape != spectrum.level_index.shape:
        raise InputError("state and spectrum belong to different qubit counts")
    masses = np.bincount(spectrum.level_index, weights=probs, minlength=spectrum.K)
    return LevelDistribution(spectrum.distinct_costs, masses / masses.sum())


def ground_state_probability(psi: np.ndarray, spectrum: Spectrum) -> float:
    probs = probabilities(psi)
    if probs.shape != spectrum.optimal_mask.shape:
        raise InputError("state and spectrum belong to different qubit counts")
    return float(probs[spectrum.optimal_mask].sum())


def level_alphas(spectrum: Spectrum) -> np.ndarray:
    C = spectrum.distinct_costs
    if spectrum.K == 1:
        return np.ones(1)
    return (C - spectrum.CK) / (spectrum.C1 - spectrum.CK)


def approximation_ratio(cost: float, spectrum: Spectrum) -> float:
    """``(C(x) - C_K) / (C_1 - C_K)``; defined as 1 when all solutions tie."""
    span = max(1.0, abs(spectrum.C1), abs(spectrum.CK)) * COST_TOL
    if cost < spectrum.C1 - span or cost > spectrum.CK + span:
        raise InputError(f"cost {cost} outside the spectrum [{spectrum.C1}, {spectrum.CK}]")
    if spectrum.K == 1:
        return 1.0
    alpha = (cost - spectrum.CK) / (spectrum.C1 - spectrum.CK)
    return float(min(1.0, max(0.0, alpha)))


def expected_best_alpha_levels(dist: LevelDistribution, M: int) -> float:
    if M < 1:
        raise InputError("M must be at least 1")
    C = dist.costs
    if C.size == 1:
        return 1.0
    expected_min = float(np.sum(C * (dist.p_ge**M - dist.p_gt**M)))
    # rounding can push the telescoped sum a hair past the ends of [0, 1]
    return float(min(1.0, max(0.0, (expected_min - C[-1]) / (C[0] - C[-1]))))


def expected_best_alpha(psi: np.ndarray, spectrum: Spectrum, M: int) -> float:
    """Closed-form expectation of the best approximation ratio among ``M`` samples."""
    return expected_best_alpha_levels(level_distribution(psi, spectrum), M)


def failure_predicate_awqv(p_gs: float, M: int) -> bool:
    """A quantum run fails at budget ``M`` when ``M < 1 / p_gs``."""
    if M < 1:
        raise InputError("M must be at least 1")
    if p_gs <= 0.0:
        return True
    return M < 1.0 / p_gs


def failure_predicate_gw(best_cost: float, spectrum: Spectrum) -> bool:
    """GW fails when its best rounded cut is not optimal."""
    return best_cost > spectrum.C1 + COST_TOL * max(1.0, abs(spectrum.C1))
