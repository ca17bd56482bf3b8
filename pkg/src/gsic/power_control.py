"""
Distributed iterative power control.

Each group repeatedly sets its received power to the smallest value that
meets its SIR target given everybody else's current powers. That best
response is a standard interference function, so the iteration converges
to the minimum-power solution whenever one exists, under synchronous and
asynchronous schedules alike.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import ReceiverKind, SystemModel
from .errors import DegenerateGroup
from .feasibility import build_coupling, normalize_order

DIVERGENCE_CAP = 1e12
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1_000_000


class UpdateSchedule(enum.Enum):
    Synchronous = "sync"
    RoundRobin = "roundrobin"
    RandomAsync = "random"


class Outcome(enum.Enum):
    Converged = "converged"
    Diverged = "diverged"
    MaxIterations = "max_iterations"


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    q: np.ndarray
    max_rel_change: float


@dataclass(frozen=True)
class IterationTrace:
    rows: tuple
    outcome: Outcome
    final_q: np.ndarray

    @property
    def iterations(self) -> int:
        return self.rows[-1].iteration


class _BestResponse:
    """Precomputed pieces of ``i_j(q) = (sigma^2 theta_j + sum_{l!=j} A_jl q_l) / (1 - A_jj)``."""

    def __init__(self, system: SystemModel, order, kind):
        cm = build_coupling(system, order, kind)
        self.diag = np.diag(cm.a).copy()
        self.off = cm.a - np.diag(self.diag)
        self.base = system.sigma2 * cm.u
        self.slack = 1.0 - self.diag
        self.degenerate = self.slack <= 0

    def all(self, q):
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (self.base + self.off @ q) / self.slack
        out[self.degenerate] = math.inf
        return out

    def one(self, j, q):
        if self.degenerate[j]:
            return math.inf
        return (self.base[j] + float(self.off[j] @ q)) / self.slack[j]


def interference_function(q, system: SystemModel, order=None, kind=ReceiverKind.LMMSE) -> np.ndarray:
    """Best-response power of every group given the current vector ``q``.

    Raises
    ------
    DegenerateGroup
        If some group has ``alpha_j * Lambda_j >= 1``; no finite power then
        meets its target even without other groups.
    """
    br = _BestResponse(system, normalize_order(order, system.num_groups), kind)
    if np.any(br.degenerate):
        bad = np.flatnonzero(br.degenerate).tolist()
        raise DegenerateGroup(f"alpha * Lambda >= 1 at detection positions {bad}")
    q = np.asarray(q, dtype=float)
    if np.any(q < 0):
        raise ValueError("powers must be nonnegative")
    return br.all(q)


def _rel_change(new, old):
    if math.isinf(new):
        return math.inf
    return abs(new - old) / new


def run_power_control(system: SystemModel, order=None, kind=ReceiverKind.LMMSE, q0=None,
                      schedule=UpdateSchedule.Synchronous, tol: float = DEFAULT_TOL,
                      max_iter: int = DEFAULT_MAX_ITER, seed=None) -> IterationTrace:
    """Iterate best responses until the powers settle or blow up.

    Synchronous steps update every group at once; asynchronous schedules
    update one group per step (cyclically, or uniformly at random from a
    PCG64 generator seeded with ``seed``). An asynchronous run is declared
    converged when the last J steps each moved their group by at most
    ``tol`` (relative) and no group's best response differs from its
    current power by more than ``tol``.

    A degenerate group (``alpha * Lambda >= 1``) has an infinite best
    response, so the run ends as Diverged instead of raising.
    """
    order = normalize_order(order, system.num_groups)
    if not tol > 0:
        raise ValueError("tol must be positive")
    schedule = UpdateSchedule(schedule)
    n = len(order)
    br = _BestResponse(system, order, kind)
    q = np.zeros(n) if q0 is None else np.array(q0, dtype=float)
    if q.shape != (n,) or np.any(q < 0):
        raise ValueError("q0 must be a nonnegative vector with one entry per group")
    cap = DIVERGENCE_CAP * system.sigma2
    rng = np.random.default_rng(seed) if schedule is UpdateSchedule.RandomAsync else None

    rows = [TraceRow(0, q.copy(), math.nan)]
    recent = []
    for it in range(1, max_iter + 1):
        if schedule is UpdateSchedule.Synchronous:
            new = br.all(q)
            change = max(_rel_change(a, b) for a, b in zip(new, q))
            q = new
        else:
            j = (it - 1) % n if schedule is UpdateSchedule.RoundRobin else int(rng.integers(n))
            new_j = br.one(j, q)
            change = _rel_change(new_j, q[j])
            q = q.copy()
            q[j] = new_j
        rows.append(TraceRow(it, q.copy(), change))

        if np.any(q > cap):
            return IterationTrace(tuple(rows), Outcome.Diverged, q)
        if schedule is UpdateSchedule.Synchronous:
            if change <= tol:
                return IterationTrace(tuple(rows), Outcome.Converged, q)
            continue
        recent.append(change)
        if len(recent) > n:
            recent.pop(0)
        if len(recent) == n and max(recent) <= tol:
            resid = max(_rel_change(a, b) for a, b in zip(br.all(q), q))
            if resid <= tol:
                return IterationTrace(tuple(rows), Outcome.Converged, q)
    return IterationTrace(tuple(rows), Outcome.MaxIterations, q)
