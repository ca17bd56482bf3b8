"""
Input parameters and closed-form per-group quantities.

Everything downstream (coupling matrix, recursion, SIR oracle, regions)
consumes :class:`DerivedParams`, so the algebra lives here once.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import InfeasibleTargetSIR, NonPositivePathLoss


class ReceiverKind(enum.Enum):
    """Receiver used inside each detection group."""

    LMMSE = "lmmse"
    MatchedFilter = "mf"


@dataclass(frozen=True)
class GroupParams:
    """One user class.

    Attributes
    ----------
    alpha : float
        Load, users per dimension (K_j / N_j).
    gamma : float
        Target SIR, linear scale.
    hbar2 : float
        Estimated average power gain summed over paths.
    xi2 : float
        Per-path channel estimation error variance.
    paths : int
        Number of resolvable multipath components L.
    epsilon_override : float, optional
        Cancellation error to use instead of ``sqrt(L * xi2)``.
    """

    alpha: float
    gamma: float
    hbar2: float = 1.0
    xi2: float = 0.0
    paths: int = 1
    epsilon_override: Optional[float] = None

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not self.hbar2 > 0:
            raise ValueError(f"hbar2 must be > 0, got {self.hbar2}")
        if not self.xi2 >= 0:
            raise ValueError(f"xi2 must be >= 0, got {self.xi2}")
        if isinstance(self.paths, bool) or int(self.paths) != self.paths or self.paths < 1:
            raise ValueError(f"paths must be an integer >= 1, got {self.paths}")
        if self.epsilon_override is not None and not 0.0 <= self.epsilon_override <= 1.0:
            raise ValueError(f"epsilon_override must lie in [0, 1], got {self.epsilon_override}")

    @property
    def nu(self) -> float:
        return self.xi2 / self.hbar2


@dataclass(frozen=True)
class SystemModel:
    """Ordered user classes plus background noise.

    The list index of ``groups`` is the class label; detection order is
    passed separately as a permutation of those labels.
    """

    groups: tuple
    sigma2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        if len(self.groups) < 1:
            raise ValueError("a system needs at least one group")
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be > 0, got {self.sigma2}")

    @property
    def num_groups(self) -> int:
        return len(self.groups)


@dataclass(frozen=True)
class DerivedParams:
    """Closed-form per-group quantities for one receiver kind."""

    nu: float
    epsilon: float
    theta: float
    lambda_lmmse: float
    lambda_mf: float
    gamma_big: float
    kind: ReceiverKind = field(default=ReceiverKind.LMMSE)

    @property
    def lam(self) -> float:
        """Intra-group interference coefficient for the active receiver."""
        if self.kind is ReceiverKind.LMMSE:
            return self.lambda_lmmse
        return self.lambda_mf


def cancellation_error(xi2: float, paths: int) -> float:
    """Residual fraction after cancellation, ``sqrt(L * xi2)`` clamped to 1."""
    eps = math.sqrt(paths * xi2)
    if eps > 1.0:
        warnings.warn(
            f"cancellation error sqrt(L*xi2) = {eps:.6g} exceeds 1; clamping to 1",
            RuntimeWarning,
            stacklevel=3,
        )
        eps = 1.0
    return eps


def effective_epsilon(g: GroupParams) -> float:
    if g.epsilon_override is not None:
        return float(g.epsilon_override)
    return cancellation_error(g.xi2, g.paths)


def derive_params(g: GroupParams, kind: ReceiverKind = ReceiverKind.LMMSE) -> DerivedParams:
    """Compute nu, epsilon, theta, both Lambdas and Gamma for one group.

    Raises
    ------
    InfeasibleTargetSIR
        If ``gamma >= 1 / nu``: the estimation error caps the achievable SIR
        below the target no matter how much power is used.
    """
    nu = g.nu
    if nu * g.gamma >= 1.0:
        raise InfeasibleTargetSIR(
            f"target SIR {g.gamma} is not below 1/nu = {1.0 / nu:.6g}"
        )
    eps = effective_epsilon(g)
    theta = g.gamma / (1.0 - nu * g.gamma)
    lam = (g.paths - 1) * nu * g.gamma + (1.0 + nu) * g.gamma / (1.0 + g.gamma)
    lam_mf = theta * (g.paths * nu + 1.0)
    active = lam if kind is ReceiverKind.LMMSE else lam_mf
    return DerivedParams(
        nu=nu,
        epsilon=eps,
        theta=theta,
        lambda_lmmse=lam,
        lambda_mf=lam_mf,
        gamma_big=(1.0 - g.alpha * active) / theta,
        kind=kind,
    )


def derive_all(groups: Sequence[GroupParams], kind: ReceiverKind) -> list:
    return [derive_params(g, kind) for g in groups]


def recover_transmit_power(q: float, g: GroupParams, z: float) -> float:
    """Invert ``Q = z * P_t * |h|^2`` for the transmit power ``P_t``."""
    if not z > 0:
        raise NonPositivePathLoss(f"path-loss gain must be > 0, got {z}")
    if q < 0:
        raise ValueError(f"received power must be >= 0, got {q}")
    return q / (z * g.hbar2)
