"""Pseudo-spectral simulation and diagnostics of planar nematic liquid
crystal flows (simplified Ericksen-Leslie system) on a periodic square."""

from .diagnostics import (
    EIGHT_PI,
    ConcentrationEvent,
    Cutoff,
    EnergyLedger,
    LedgerRow,
    LocalEnergyAudit,
    concentration_scan,
    energy_law_audit,
    gl_energy,
    local_energy_audit,
    local_energy_map,
    make_bubble,
    make_bubbles,
    phi,
    rescale_trajectory,
    tension_residual,
    total_energy,
)
from .fields import TorusGrid
from .kernels import (
    GINZBURG_LANDAU,
    PROJECTION,
    corotational_N,
    director_rhs,
    dissipation_functionals,
    ericksen_stress,
    kinematic_tensors,
    leslie_stress,
    stress_power_identity,
)
from .params import CoefficientError, LeslieCoefficients, ValidationReport, derive_lambdas, validate
from .solver import (
    CFLError,
    FlowState,
    NumericalAbort,
    SolverConfig,
    advance,
    director_step,
    momentum_step,
    recover_pressure,
    run,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
