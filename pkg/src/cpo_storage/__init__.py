"""Simulation library for CPO-based light storage in a lambda-type medium."""

from .core import (
    AliasingError,
    AtomicMedium,
    BlochState,
    ConfigError,
    DriveProfile,
    NonConvergence,
    QuadratureVector,
    SignalPulse,
    StabilityError,
    US,
    ValidityError,
    ValidityWarning,
    WindowError,
    cpo_linewidth,
    fields_from_quadratures,
    quadratures_from_fields,
)
from .linear_response import (
    CpoCoefficients,
    TransferMatrix,
    adiabatic_response,
    coefficients,
    dispersion_scan,
    exact_response,
    propagate_linear,
    transfer_matrix,
)
from .maxwell_bloch import SimGrid, StorageResult, bloch_rhs, run_sequence, step_atoms
from .populariton import Populariton, check_transport, compose, mixing_angle, q_perp_transport_residual
from .protocol import StorageSpec, efficiency, storage_run, sweep_depth, sweep_switch
from .steady_state import (
    SaturationPoint,
    drive_depletion,
    omega_d_for_saturation,
    saturation,
    steady_state_analytic,
    steady_state_oracle,
)

__version__ = "0.1.0"
