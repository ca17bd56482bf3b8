"""
Capacity-region membership and boundary tracing for two-class systems.

Class 1 is detected first. Loads are passed explicitly; the ``alpha``
stored in the class templates is ignored.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from typing import Sequence

import numpy as np

from .core import GroupParams, ReceiverKind, SystemModel, derive_params
from .feasibility import check_feasibility

DEFAULT_BISECT_TOL = 1e-6
DEFAULT_M = 4


class ArchitectureKind(enum.Enum):
    GsicLmmse = "gsic-lmmse"
    GsicMf = "gsic-mf"
    AllMf = "all-mf"
    MulticodeLmmse = "multicode"


@dataclass(frozen=True)
class RegionSample:
    alpha1: float
    alpha2_max: float
    architecture: ArchitectureKind
    classes: tuple
    m: int = 1


def two_class_lhs(alpha1: float, alpha2: float, classes: Sequence[GroupParams],
                  kind=ReceiverKind.LMMSE) -> float:
    """``alpha1 L1 + alpha2 L2 + sqrt(Delta)``; the system is supported iff this is < 2.

    ``Delta`` is evaluated as ``(alpha1 L1 - alpha2 L2)^2 + 4 alpha1 alpha2
    theta1 theta2 eps1``, which equals the textbook
    ``(alpha1 L1 + alpha2 L2)^2 + 4 alpha1 alpha2 (theta1 theta2 eps1 - L1 L2)``
    but cannot go negative and does not cancel catastrophically when the
    two diagonal loads are close.
    """
    d1 = derive_params(classes[0], kind)
    d2 = derive_params(classes[1], kind)
    a = alpha1 * d1.lam
    b = alpha2 * d2.lam
    delta = (a - b) ** 2 + 4.0 * alpha1 * alpha2 * d1.theta * d2.theta * d1.epsilon
    return a + b + math.sqrt(max(delta, 0.0))


def member_two_class_gsic_lmmse(alpha1, alpha2, classes) -> bool:
    return two_class_lhs(alpha1, alpha2, classes, ReceiverKind.LMMSE) < 2.0


def member_two_class_gsic_mf(alpha1, alpha2, classes) -> bool:
    return two_class_lhs(alpha1, alpha2, classes, ReceiverKind.MatchedFilter) < 2.0


def all_mf_system(alphas, classes, sigma2: float = 1.0) -> SystemModel:
    """Matched-filter system with nothing cancelled (every residual fraction is 1)."""
    groups = [replace(g, alpha=float(a), epsilon_override=1.0) for a, g in zip(alphas, classes)]
    return SystemModel(groups, sigma2)


def member_all_mf(alphas, classes) -> bool:
    """Feasibility of matched filters without cancellation, for any number of classes."""
    if len(alphas) != len(classes):
        raise ValueError("need one load per class")
    for g in classes:
        derive_params(g)
    return check_feasibility(all_mf_system(alphas, classes), None, ReceiverKind.MatchedFilter).feasible


def multicode_lhs(alpha1, alpha2, m, classes) -> float:
    if m < 1:
        raise ValueError(f"M must be >= 1, got {m}")
    lam1 = derive_params(classes[0]).lambda_lmmse
    lam2 = derive_params(classes[1]).lambda_lmmse
    return m * alpha1 * lam1 + alpha2 * lam2


def member_multicode(alpha1, alpha2, m, classes) -> bool:
    """High-rate users act as ``m`` low-rate LMMSE users each."""
    return multicode_lhs(alpha1, alpha2, m, classes) < 1.0


def member(arch: ArchitectureKind, alpha1: float, alpha2: float, classes, m: int = DEFAULT_M) -> bool:
    arch = ArchitectureKind(arch)
    if arch is ArchitectureKind.GsicLmmse:
        return member_two_class_gsic_lmmse(alpha1, alpha2, classes)
    if arch is ArchitectureKind.GsicMf:
        return member_two_class_gsic_mf(alpha1, alpha2, classes)
    if arch is ArchitectureKind.AllMf:
        return member_all_mf((alpha1, alpha2), classes)
    return member_multicode(alpha1, alpha2, m, classes)


def _single_class_bound(arch, g: GroupParams) -> float:
    d = derive_params(g)
    lam = d.lambda_mf if arch in (ArchitectureKind.GsicMf, ArchitectureKind.AllMf) else d.lambda_lmmse
    return 1.0 / lam


def max_alpha2(arch, alpha1: float, classes, m: int = DEFAULT_M,
               bisect_tol: float = DEFAULT_BISECT_TOL) -> float:
    """Largest supported class-2 load at ``alpha1``, found by bisection.

    Membership only shrinks as ``alpha2`` grows (the coupling matrix grows
    entrywise), so the member set along the line is an interval from 0.
    Returns 0 when even ``alpha2 = 0`` is not supported.
    """
    arch = ArchitectureKind(arch)
    if not bisect_tol > 0:
        raise ValueError("bisect_tol must be positive")
    test = partial(member, arch, alpha1, classes=classes, m=m)
    if not test(0.0):
        return 0.0
    lo = 0.0
    hi = 1.01 * _single_class_bound(arch, classes[1]) + 0.01
    while test(hi):
        hi *= 2.0
    while hi - lo > bisect_tol:
        mid = 0.5 * (lo + hi)
        if test(mid):
            lo = mid
        else:
            hi = mid
    return lo


def sweep_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive grid ``start, start + step, ..., stop`` without float drift."""
    if not step > 0:
        raise ValueError("step must be positive")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    if count < 1:
        raise ValueError("empty sweep")
    return np.round(start + step * np.arange(count), 12)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("GSIC_THREADS", "1")))
    except ValueError:
        return 1


def trace_boundary(arch, sweep, classes, bisect_tol: float = DEFAULT_BISECT_TOL,
                   m: int = DEFAULT_M, workers=None) -> list:
    """Boundary samples ``(alpha1, alpha2_max)`` over a strictly increasing sweep."""
    arch = ArchitectureKind(arch)
    sweep = [float(x) for x in sweep]
    if any(b <= a for a, b in zip(sweep, sweep[1:])):
        raise ValueError("sweep must be strictly increasing")
    classes = tuple(classes)
    for g in classes:
        derive_params(g)
    m_used = m if arch is ArchitectureKind.MulticodeLmmse else 1
    fn = partial(max_alpha2, arch, classes=classes, m=m_used, bisect_tol=bisect_tol)
    workers = default_workers() if workers is None else workers
    if workers > 1 and len(sweep) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(fn, sweep))
    else:
        values = [fn(a1) for a1 in sweep]
    samples = [RegionSample(a1, v, arch, classes, m_used) for a1, v in zip(sweep, values)]
    return sorted(samples, key=lambda s: s.alpha1)


def find_crossovers(alpha1, first, second) -> list:
    """Points where ``first - second`` changes sign, by linear interpolation.

    Stretches where both curves are zero are ignored.
    """
    out = []
    x = np.asarray(alpha1, dtype=float)
    diff = np.asarray(first, dtype=float) - np.asarray(second, dtype=float)
    both_zero = (np.asarray(first) == 0) & (np.asarray(second) == 0)
    for i in range(len(x) - 1):
        if both_zero[i] or both_zero[i + 1]:
            continue
        d0, d1 = diff[i], diff[i + 1]
        if d0 == 0 or d0 * d1 >= 0:
            continue
        out.append(float(x[i] + (x[i + 1] - x[i]) * d0 / (d0 - d1)))
    return out
