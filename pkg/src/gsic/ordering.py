"""Detection-order search for minimum total received power."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .core import GroupParams, ReceiverKind, SystemModel, effective_epsilon
from .errors import AllInfeasible, RecursionInfeasible, TooManyGroups
from .recursion import total_power

MAX_BRUTE_FORCE_GROUPS = 8


@dataclass(frozen=True)
class OrderingResult:
    best_order: tuple
    best_total: float
    all_totals: Optional[dict] = field(default=None, compare=False)


def order_total(system: SystemModel, order, kind=ReceiverKind.LMMSE) -> float:
    """Total received power of one order, ``inf`` when that order is infeasible."""
    try:
        return total_power(system, order, kind)
    except RecursionInfeasible:
        return math.inf


def brute_force_order(system: SystemModel, kind=ReceiverKind.LMMSE, keep_all: bool = True) -> OrderingResult:
    """Evaluate every permutation; ties go to the lexicographically smallest."""
    n = system.num_groups
    if n > MAX_BRUTE_FORCE_GROUPS:
        raise TooManyGroups(f"brute force over {n}! orders is capped at J = {MAX_BRUTE_FORCE_GROUPS}")
    totals = {}
    best, best_total = None, math.inf
    # permutations() yields lexicographic order, so strict < keeps the smallest tie
    for perm in itertools.permutations(range(n)):
        t = order_total(system, perm, kind)
        totals[perm] = t
        if t < best_total:
            best, best_total = perm, t
    if best is None:
        raise AllInfeasible("no detection order is feasible")
    return OrderingResult(best_order=best, best_total=best_total, all_totals=totals if keep_all else None)


def sorted_order(system: SystemModel, key: Callable[[GroupParams], float] = effective_epsilon) -> tuple:
    """Class labels sorted by ``key`` ascending (cancellation error by default).

    Ties keep the original label order.
    """
    return tuple(sorted(range(system.num_groups), key=lambda c: key(system.groups[c])))
