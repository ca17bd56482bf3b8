"""Power allocation, feasibility and capacity regions for groupwise SIC receivers."""

__version__ = "0.1.0"

from .core import (
    DerivedParams,
    GroupParams,
    ReceiverKind,
    SystemModel,
    derive_params,
    recover_transmit_power,
)
from .feasibility import (
    CouplingMatrix,
    FeasibilityReport,
    PowerAllocation,
    build_coupling,
    check_feasibility,
    solve_powers,
    spectral_radius,
)
from .ordering import OrderingResult, brute_force_order, sorted_order
from .power_control import (
    IterationTrace,
    Outcome,
    UpdateSchedule,
    interference_function,
    run_power_control,
)
from .recursion import solve_powers_recursive, total_power
from .regions import ArchitectureKind, RegionSample, trace_boundary
from .sir import achieved_sir, enhanced_noise, solve_beta, verify_allocation
