"""
Coupling matrix, Perron-root feasibility test and the direct power solve.

All vectors here are indexed by detection position: entry 0 belongs to the
first detected group, i.e. class label ``order[0]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import ReceiverKind, SystemModel, derive_params
from .errors import (
    InfeasibleSystem,
    InfeasibleTargetSIR,
    NonConvergence,
    SingularSystem,
    TooManyGroups,
)

MAX_GROUPS = 16
#: solve_powers refuses when 1 - rho(A) falls below this.
SINGULAR_MARGIN = 1e-9


@dataclass(frozen=True)
class CouplingMatrix:
    a: np.ndarray
    u: np.ndarray
    order: tuple


@dataclass(frozen=True)
class FeasibilityReport:
    per_group_sir_ok: tuple
    spectral_radius: float
    feasible: bool


@dataclass(frozen=True)
class PowerAllocation:
    """Received powers in sigma^2-normalized units, by detection position."""

    q: np.ndarray
    total: float
    order: tuple

    def by_class(self) -> np.ndarray:
        """Same powers re-indexed by class label."""
        out = np.empty_like(self.q)
        out[list(self.order)] = self.q
        return out


def normalize_order(order: Optional[Sequence[int]], num_groups: int) -> tuple:
    """Validate a detection order (0-based class labels); ``None`` is identity."""
    if order is None:
        return tuple(range(num_groups))
    order = tuple(int(i) for i in order)
    if sorted(order) != list(range(num_groups)):
        raise ValueError(f"order {order} is not a permutation of 0..{num_groups - 1}")
    return order


def build_coupling(system: SystemModel, order=None, kind=ReceiverKind.LMMSE) -> CouplingMatrix:
    """Lay out the nonnegative coupling matrix ``A`` and vector ``u``.

    Row ``j`` holds the interference seen by the group at detection
    position ``j``: already-detected groups contribute their residual
    ``eps_l * alpha_l``, later groups their full load ``alpha_l``, both
    scaled by ``theta_j``; the diagonal is ``alpha_j * Lambda_j``.
    """
    order = normalize_order(order, system.num_groups)
    if len(order) > MAX_GROUPS:
        raise TooManyGroups(f"J = {len(order)} exceeds the cap of {MAX_GROUPS}")
    groups = [system.groups[c] for c in order]
    derived = [derive_params(g, kind) for g in groups]
    n = len(groups)
    a = np.empty((n, n))
    for j in range(n):
        theta = derived[j].theta
        for l in range(n):
            if l == j:
                a[j, l] = groups[j].alpha * derived[j].lam
            elif l < j:
                a[j, l] = theta * derived[l].epsilon * groups[l].alpha
            else:
                a[j, l] = theta * groups[l].alpha
    u = np.array([d.theta for d in derived])
    return CouplingMatrix(a=a, u=u, order=order)


def spectral_radius(a, tol: float = 1e-12, max_squarings: int = 64) -> float:
    """Perron root of a small nonnegative matrix.

    Power iteration on the shifted matrix ``M = A + sI`` from the all-ones
    vector, with the iterate advanced by repeated squaring so that step
    ``k`` corresponds to ``2**k`` plain iterations. The shift makes the
    Perron root strictly dominant; squaring makes the slowly converging
    reducible cases (equal diagonal blocks, Jordan structure) affordable.

    Convergence is judged on the Collatz-Wielandt bracket
    ``min_i (Ax)_i/x_i <= rho <= max_i (Ax)_i/x_i``. When the Perron vector
    has zero entries (reducible ``A``) that bracket cannot close; the
    squaring scale factors then give ``||M^n||^(1/n) - s``, which is
    accepted once two successive values agree to ``tol``.

    Raises
    ------
    NonConvergence
        If neither test passes after ``max_squarings`` steps; ``estimate``
        holds the latest bracket midpoint (or norm estimate if no bracket).
    """
    if isinstance(a, CouplingMatrix):
        a = a.a
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("spectral_radius needs a square matrix")
    if not np.all(np.isfinite(m)) or np.any(m < 0):
        raise ValueError("spectral_radius needs finite nonnegative entries")
    top = m.max() if m.size else 0.0
    if top == 0.0:
        return 0.0

    shift = top
    b = m + shift * np.eye(m.shape[0])
    log_scale = math.log(b.max())
    b /= b.max()
    ones = np.ones(m.shape[0])
    steps = 1.0
    previous = math.nan
    settled = 0
    estimate = bracket_mid = math.nan
    for _ in range(max_squarings + 1):
        x = b @ ones
        if np.all(x > 0):
            ratios = (m @ x) / x
            lo, hi = ratios.min(), ratios.max()
            bracket_mid = float(0.5 * (lo + hi))
            if hi - lo <= tol * max(1.0, hi):
                return bracket_mid
        estimate = math.exp(log_scale / steps) - shift
        if abs(estimate - previous) <= 0.5 * tol * max(1.0, estimate):
            settled += 1
            if settled == 2:
                return float(max(estimate, 0.0))
        else:
            settled = 0
        previous = estimate
        b = b @ b
        peak = b.max()
        b /= peak
        log_scale = 2.0 * log_scale + math.log(peak)
        steps *= 2.0
    raise NonConvergence(
        f"spectral radius did not settle to {tol} after {max_squarings} squarings",
        estimate=bracket_mid if math.isfinite(bracket_mid) else float(estimate),
    )


def check_feasibility(system: SystemModel, order=None, kind=ReceiverKind.LMMSE) -> FeasibilityReport:
    """Per-group SIR cap test plus ``rho(A) < 1``; never raises on infeasibility."""
    flags = tuple(g.nu * g.gamma < 1.0 for g in system.groups)
    if not all(flags):
        return FeasibilityReport(per_group_sir_ok=flags, spectral_radius=math.inf, feasible=False)
    rho = spectral_radius(build_coupling(system, order, kind))
    return FeasibilityReport(per_group_sir_ok=flags, spectral_radius=rho, feasible=rho < 1.0)


def total_received(system: SystemModel, order: tuple, q) -> float:
    alphas = np.array([system.groups[c].alpha for c in order])
    return float(alphas @ np.asarray(q))


def solve_powers(system: SystemModel, order=None, kind=ReceiverKind.LMMSE) -> PowerAllocation:
    """Minimum received powers: the solution of ``(I - A) q = sigma^2 u``.

    Raises
    ------
    InfeasibleSystem
        A group's SIR cap is violated or ``rho(A) >= 1``.
    SingularSystem
        ``rho(A)`` is within ``SINGULAR_MARGIN`` of 1, or the solve
        produced a nonpositive component.
    """
    order = normalize_order(order, system.num_groups)
    try:
        cm = build_coupling(system, order, kind)
    except InfeasibleTargetSIR as exc:
        raise InfeasibleSystem(str(exc)) from exc
    rho = spectral_radius(cm)
    if rho >= 1.0:
        raise InfeasibleSystem(f"spectral radius {rho:.12g} >= 1")
    if 1.0 - rho < SINGULAR_MARGIN:
        raise SingularSystem(f"spectral radius {rho:.12g} is numerically 1")

    m = np.eye(len(order)) - cm.a
    rhs = system.sigma2 * cm.u
    q = np.linalg.solve(m, rhs)
    # one step of iterative refinement
    q = q + np.linalg.solve(m, rhs - m @ q)
    if not np.all(q > 0):
        raise SingularSystem(f"linear solve returned nonpositive powers {q}")
    return PowerAllocation(q=q, total=total_received(system, order, q), order=order)
