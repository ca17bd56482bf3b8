"""
Large-system SIR oracle.

Recomputes what each group actually achieves for a given power vector:
enhanced noise from the other groups, the per-group beta fixed point, and
the resulting SIR. Nothing here uses the coupling matrix, so it checks the
solvers independently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .core import GroupParams, ReceiverKind, SystemModel, effective_epsilon
from .errors import NonConvergence
from .feasibility import PowerAllocation, normalize_order

BETA_TOL = 1e-12
BETA_MAX_ITER = 10_000


@dataclass(frozen=True)
class BetaSolution:
    beta: float
    iterations: int
    residual: float


class SIRCheck(NamedTuple):
    deviations: np.ndarray
    sirs: np.ndarray
    passed: bool


def _interference_lmmse(p, beta):
    return p / (1.0 + p * beta)


def _interference_mf(p, beta):
    return p


def beta_map(g: GroupParams, q: float, noise: float, kind=ReceiverKind.LMMSE) -> Callable[[float], float]:
    """The map ``F`` whose fixed point is beta for a group at received power ``q``.

    Own-group interference splits into ``L - 1`` error-only paths of power
    ``q * nu`` and one path of power ``q * (1 + nu)``.
    """
    interf = _interference_lmmse if kind is ReceiverKind.LMMSE else _interference_mf
    nu = g.nu
    err_power = q * nu
    full_power = q * (1.0 + nu)

    def f(beta):
        load = (g.paths - 1) * interf(err_power, beta) + interf(full_power, beta)
        return 1.0 / (noise + g.alpha * load)

    return f


def enhanced_noise(j: int, q, system: SystemModel, order=None) -> float:
    """Background noise plus residual earlier-group and full later-group power.

    ``j`` is a detection position and ``q`` is indexed by detection position.
    """
    order = normalize_order(order, system.num_groups)
    if isinstance(q, PowerAllocation):
        q = q.q
    total = system.sigma2
    for pos, cls in enumerate(order):
        g = system.groups[cls]
        if pos < j:
            total += effective_epsilon(g) * g.alpha * q[pos]
        elif pos > j:
            total += g.alpha * q[pos]
    return total


def solve_beta(g: GroupParams, q: float, noise: float, kind=ReceiverKind.LMMSE,
               tol: float = BETA_TOL, max_iter: int = BETA_MAX_ITER) -> BetaSolution:
    """Fixed point of :func:`beta_map` by plain iteration from ``1 / noise``.

    The matched-filter map is constant in beta, so one step is exact.
    Convergence is declared when a step moves beta by at most ``tol``
    relative to its value.
    """
    if not q > 0 or not noise > 0:
        raise ValueError("solve_beta needs positive power and noise")
    f = beta_map(g, q, noise, kind)
    if kind is ReceiverKind.MatchedFilter:
        beta = f(1.0 / noise)
        return BetaSolution(beta=beta, iterations=1, residual=abs(beta - f(beta)))

    beta = 1.0 / noise
    for it in range(1, max_iter + 1):
        nxt = f(beta)
        step = abs(nxt - beta)
        beta = nxt
        if step <= tol * beta:
            return BetaSolution(beta=beta, iterations=it, residual=abs(beta - f(beta)))
    raise NonConvergence(f"beta iteration did not converge in {max_iter} steps", estimate=beta)


def achieved_sir(q: float, beta: float, nu: float) -> float:
    return q * beta / (1.0 + q * nu * beta)


def verify_allocation(system: SystemModel, order, kind, q, tol: float = 1e-8) -> SIRCheck:
    """Achieved minus target SIR for every group, by detection position."""
    order = normalize_order(order, system.num_groups)
    if isinstance(q, PowerAllocation):
        q = q.q
    q = np.asarray(q, dtype=float)
    sirs = np.empty(len(order))
    for pos, cls in enumerate(order):
        g = system.groups[cls]
        noise = enhanced_noise(pos, q, system, order)
        sol = solve_beta(g, q[pos], noise, kind)
        sirs[pos] = achieved_sir(q[pos], sol.beta, g.nu)
    targets = np.array([system.groups[c].gamma for c in order])
    dev = sirs - targets
    return SIRCheck(deviations=dev, sirs=sirs, passed=bool(np.max(np.abs(dev)) <= tol))
