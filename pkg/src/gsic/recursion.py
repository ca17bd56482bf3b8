"""
Closed-form recursive power solution.

Differencing the target-SIR equations of neighbouring detection positions
gives ``(Gamma_i + eps_i alpha_i) Q_i = (Gamma_{i+1} + alpha_{i+1}) Q_{i+1}``,
so every power is a running product times ``Q_1``, and ``Q_1`` follows from
the first group's equation. This is a second solver that shares no code
with the matrix route in :mod:`gsic.feasibility`.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .core import ReceiverKind, SystemModel, derive_params
from .errors import InfeasibleTargetSIR, RecursionInfeasible
from .feasibility import PowerAllocation, normalize_order


class TotalPowerForms(NamedTuple):
    """Three algebraically equal expressions for the total received power."""

    weighted_sum: float
    from_first: float
    closed_form: float


def _recursion_terms(system: SystemModel, order, kind):
    order = normalize_order(order, system.num_groups)
    groups = [system.groups[c] for c in order]
    try:
        derived = [derive_params(g, kind) for g in groups]
    except InfeasibleTargetSIR as exc:
        raise RecursionInfeasible(str(exc)) from exc
    big = np.array([d.gamma_big for d in derived])
    if np.any(big <= 0):
        raise RecursionInfeasible(f"nonpositive Gamma in {big.tolist()}")
    alphas = np.array([g.alpha for g in groups])
    eps = np.array([d.epsilon for d in derived])

    # prods[i] = Q_{i} / Q_1, accumulated left to right
    prods = np.ones(len(groups))
    for i in range(1, len(groups)):
        ratio = (big[i - 1] + eps[i - 1] * alphas[i - 1]) / (big[i] + alphas[i])
        prods[i] = prods[i - 1] * ratio
    denom = big[0] - float(alphas[1:] @ prods[1:])
    if not denom > 0:
        raise RecursionInfeasible(f"recursion denominator {denom:.6g} is not positive", denominator=denom)
    return order, alphas, big, prods, denom


def solve_powers_recursive(system: SystemModel, order=None, kind=ReceiverKind.LMMSE) -> PowerAllocation:
    order, alphas, _, prods, denom = _recursion_terms(system, order, kind)
    q = prods * (system.sigma2 / denom)
    return PowerAllocation(q=q, total=float(alphas @ q), order=order)


def total_power_forms(system: SystemModel, order=None, kind=ReceiverKind.LMMSE) -> TotalPowerForms:
    order, alphas, big, prods, denom = _recursion_terms(system, order, kind)
    s2 = system.sigma2
    q1 = s2 / denom
    head = alphas[0] + big[0]
    tail = float(alphas[1:] @ prods[1:])
    return TotalPowerForms(
        weighted_sum=float(alphas @ (prods * q1)),
        from_first=q1 * head - s2,
        closed_form=s2 / (big[0] / head - tail / head) - s2,
    )


def total_power(system: SystemModel, order=None, kind=ReceiverKind.LMMSE) -> float:
    """Total received power ``sum_i alpha_i Q_i`` for a detection order."""
    return total_power_forms(system, order, kind).weighted_sum
