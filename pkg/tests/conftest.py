import math

import numpy as np
import pytest

from gsic.core import GroupParams, ReceiverKind, SystemModel, derive_params
from gsic.feasibility import build_coupling

# acceptance criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")


def rho_closed_form_2x2(a):
    """Largest eigenvalue of a 2x2 nonnegative matrix from the characteristic quadratic."""
    (p, q), (r, s) = a
    return 0.5 * (p + s + math.sqrt((p - s) ** 2 + 4.0 * q * r))


def random_groups(rng, n, *, eps_override=False):
    groups = []
    for _ in range(n):
        g = GroupParams(
            alpha=0.0,
            gamma=rng.uniform(1.0, 20.0),
            hbar2=1.0,
            xi2=rng.uniform(0.0, 0.02),
            paths=int(rng.integers(1, 5)),
            epsilon_override=rng.uniform(0.0, 1.0) if eps_override else None,
        )
        lam = derive_params(g).lambda_lmmse
        groups.append(GroupParams(rng.uniform(0.0, 0.9 / lam), g.gamma, g.hbar2, g.xi2, g.paths,
                                  g.epsilon_override))
    return groups


def scale_loads(system, factor):
    return SystemModel(
        [GroupParams(g.alpha * factor, g.gamma, g.hbar2, g.xi2, g.paths, g.epsilon_override)
         for g in system.groups],
        system.sigma2,
    )


def rho_of(system, order=None, kind=ReceiverKind.LMMSE):
    return float(np.max(np.abs(np.linalg.eigvals(build_coupling(system, order, kind).a))))


def random_feasible_system(rng, n, *, kind=ReceiverKind.LMMSE, max_rho=None, sigma2=1.0):
    """Random instance with loads in [0, 0.9/Lambda], halved until rho(A) < 1.

    With ``max_rho`` the loads are instead rescaled (rho is linear in the
    loads) so that rho(A) equals ``max_rho`` times a uniform factor in (0.05, 1].
    """
    system = SystemModel(random_groups(rng, n), sigma2)
    order = tuple(rng.permutation(n))
    if max_rho is not None:
        rho = rho_of(system, order, kind)
        if rho > 0:
            system = scale_loads(system, max_rho * rng.uniform(0.05, 1.0) / rho)
        return system, order
    while rho_of(system, order, kind) >= 1.0 - 1e-6:
        system = scale_loads(system, 0.5)
    return system, order


@pytest.fixture
def rng():
    return np.random.default_rng(20030312)


@pytest.fixture
def single_group():
    return SystemModel([GroupParams(alpha=0.05, gamma=10, hbar2=1, xi2=0, paths=3)], 1.0)


@pytest.fixture
def two_groups():
    g = GroupParams(alpha=0.5, gamma=10, hbar2=1, xi2=0, paths=3)
    return SystemModel([g, g], 1.0)
