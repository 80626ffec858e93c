"""Nonperturbative z-t co-propagation of drive + signal through the cell.

The solver works in the local (retarded) time frame t -> t - z/c, where the
field equation reduces to d/dz Omega_pm = i eta rho_e(-/+1); the cell transit
L/c (~0.2 ns) is far below every retained timescale.  The march is z-outer:
each spatial slice integrates its atomic state over the whole time line
(classical RK4), then the field column advances one z step with a midpoint
rule.  Two atomic integrators are available:

* ``coherence-eliminated`` (default): the optical coherences relax ~500x
  faster than anything else, so they are set to their algebraic quasi-steady
  values and only the Raman coherence and populations are stepped.  Stable
  for dt < 0.05/max(gamma0, |Omega|^2/gamma_opt).
* ``full-stiff``: all five variables stepped explicitly; requires
  dt < 0.1/gamma_opt and serves as a validation oracle on short runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import (
    AtomicMedium,
    BlochState,
    ConfigError,
    DriveProfile,
    SignalPulse,
    StabilityError,
)
from .steady_state import drive_depletion, saturation, steady_state_analytic

__all__ = [
    "SimGrid",
    "StorageResult",
    "bloch_rhs",
    "step_atoms",
    "advance_field_column",
    "run_sequence",
]

SOLVER_MODES = ("coherence-eliminated", "full-stiff")


@dataclass(frozen=True)
class SimGrid:
    """Space-time discretization and solver mode for one run."""

    n_z: int
    dt: float
    t_end: float
    solver_mode: str = "coherence-eliminated"

    def __post_init__(self):
        if self.n_z < 16:
            raise ConfigError("n_z must be >= 16")
        if self.dt <= 0 or self.t_end <= self.dt:
            raise ConfigError("need 0 < dt < t_end")
        if self.solver_mode not in SOLVER_MODES:
            raise ConfigError(f"solver_mode must be one of {SOLVER_MODES}")

    @property
    def n_t(self) -> int:
        return int(round(self.t_end / self.dt)) + 1

    def times(self) -> np.ndarray:
        return np.arange(self.n_t) * self.dt

    def z_step(self, medium: AtomicMedium) -> float:
        return medium.length / (self.n_z - 1)

    def validate_stability(self, medium: AtomicMedium, peak_field: float) -> None:
        if self.solver_mode == "full-stiff":
            bound = 0.1 / medium.gamma_opt
        else:
            bound = 0.05 / max(
                medium.gamma0, peak_field**2 / medium.gamma_opt
            )
        if self.dt > bound:
            raise ConfigError(
                f"dt={self.dt:g} exceeds the {self.solver_mode} stability bound "
                f"{bound:g} at peak field {peak_field:g}"
            )


def bloch_rhs(
    state: BlochState,
    omega_plus: complex,
    omega_minus: complex,
    medium: AtomicMedium,
    delta_d: float = 0.0,
    include_raman: bool = True,
) -> BlochState:
    """Time derivative of the Bloch variables under the total field.

    Returned as a BlochState whose fields hold the derivatives; trace
    closure makes d(trace)/dt = gamma_t (1 - trace) by construction.
    """
    d = _kernels.bloch_rhs_raw(
        complex(state.coh_e1),
        complex(state.coh_em1),
        complex(state.coh_raman),
        float(state.pop_p1),
        float(state.pop_m1),
        complex(omega_plus),
        complex(omega_minus),
        medium.gamma0,
        medium.gamma_opt,
        medium.gamma_t,
        medium.gamma_r,
        medium.delta_z,
        delta_d,
        include_raman,
    )
    return BlochState(
        coh_e1=d[0], coh_em1=d[1], coh_raman=d[2], pop_p1=d[3].real, pop_m1=d[4].real
    )


def step_atoms(
    state: BlochState,
    fields,
    dt: float,
    mode: str = "coherence-eliminated",
    medium: AtomicMedium | None = None,
    delta_d: float = 0.0,
    include_raman: bool = True,
) -> BlochState:
    """Advance the atomic state by one time step.

    ``fields`` is either a single (omega_plus, omega_minus) pair (field held
    constant over the step) or a triple of pairs at (t, t+dt/2, t+dt).  In
    coherence-eliminated mode the optical coherences are replaced by their
    quasi-steady algebraic values at every stage.
    """
    if medium is None:
        raise ValueError("medium is required")
    if mode not in SOLVER_MODES:
        raise ValueError(f"mode must be one of {SOLVER_MODES}")
    if isinstance(fields[0], tuple):
        (fp0, fm0), (fph, fmh), (fp1, fm1) = fields
    else:
        fp0 = fph = fp1 = fields[0]
        fm0 = fmh = fm1 = fields[1]
    args = (
        medium.gamma0,
        medium.gamma_opt,
        medium.gamma_t,
        medium.gamma_r,
        medium.delta_z,
        delta_d,
        include_raman,
    )
    if mode == "full-stiff":
        y = state.as_array()

        def rhs(y, fp, fm):
            return np.array(
                _kernels.bloch_rhs_raw(y[0], y[1], y[2], y[3].real, y[4].real, fp, fm, *args),
                dtype=complex,
            )

        k1 = rhs(y, fp0, fm0)
        k2 = rhs(y + 0.5 * dt * k1, fph, fmh)
        k3 = rhs(y + 0.5 * dt * k2, fph, fmh)
        k4 = rhs(y + dt * k3, fp1, fm1)
        y = y + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        new = BlochState.from_array(y)
    else:
        elim_args = (medium.gamma_opt, medium.delta_z, delta_d, include_raman)
        y = np.array([state.coh_raman, state.pop_p1, state.pop_m1], dtype=complex)

        def rhs(y, fp, fm):
            return np.array(
                _kernels._slow_rhs(y[0], y[1].real, y[2].real, fp, fm, *args),
                dtype=complex,
            )

        k1 = rhs(y, fp0, fm0)
        k2 = rhs(y + 0.5 * dt * k1, fph, fmh)
        k3 = rhs(y + 0.5 * dt * k2, fph, fmh)
        k4 = rhs(y + dt * k3, fp1, fm1)
        y = y + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        c1, c2 = _kernels.eliminated_coherences(
            y[0], y[1].real, y[2].real, fp1, fm1, *elim_args
        )
        new = BlochState(
            coh_e1=c1,
            coh_em1=c2,
            coh_raman=y[0],
            pop_p1=y[1].real,
            pop_m1=y[2].real,
        )
    if max(
        abs(new.coh_e1), abs(new.coh_em1), abs(new.coh_raman),
        abs(new.pop_p1), abs(new.pop_m1),
    ) > 10.0:
        raise StabilityError("atomic state norm exceeded 10 within one step")
    return new


def advance_field_column(col_plus, col_minus, coh_e1, coh_em1, dz: float, eta: float):
    """March the field one z step: d/dz Omega_pm = i eta rho_e(-/+1).

    The sigma+ component is sourced by the coherence on the |-1> arm and
    vice versa.
    """
    return (
        col_plus + 1j * eta * dz * np.asarray(coh_em1),
        col_minus + 1j * eta * dz * np.asarray(coh_e1),
    )


@dataclass
class StorageResult:
    """Traces and diagnostics of one storage-sequence run.

    ``signal_*`` traces are the magnitude of the input pulse's own
    eigen-quadrature (Q_perp for the default perpendicular signal); the
    static polarization-rotation background the Zeeman-split drive produces
    in P_perp is thereby excluded from all signal and efficiency metrics.
    Efficiency is attached by :func:`cpo_storage.protocol.efficiency`.
    """

    t: np.ndarray
    drive_in: np.ndarray
    drive_out: np.ndarray
    signal_in: np.ndarray
    signal_out: np.ndarray
    rho_delta_out: np.ndarray
    populariton_out: np.ndarray
    s_in: float
    s_out: float
    optical_depth: float
    t_cut: float
    t_retrieve: float
    storage_duration: float
    efficiency: float | None = None
    efficiency_error: str = ""
    medium: AtomicMedium | None = None
    grid: SimGrid | None = None
    z: np.ndarray | None = None
    s_profile: np.ndarray | None = None
    q_perp_zt: np.ndarray | None = None
    p_perp_zt: np.ndarray | None = None
    rho_delta_zt: np.ndarray | None = None
    drive_zt: np.ndarray | None = None
    field_columns: dict = field(default_factory=dict)

    CSV_COLUMNS = (
        "t_us",
        "drive_in",
        "drive_out",
        "signal_in_abs",
        "signal_out_abs",
        "rho_delta_out",
        "populariton_out",
    )

    def csv_rows(self, gamma0_si: float):
        us = 1e-6 * gamma0_si
        for i in range(self.t.size):
            yield (
                self.t[i] / us,
                self.drive_in[i],
                self.drive_out[i],
                self.signal_in[i],
                self.signal_out[i],
                self.rho_delta_out[i],
                self.populariton_out[i],
            )


def _integrate_column(grid, medium, om_p, om_m, state0, include_raman, delta_d):
    n_t = om_p.shape[0]
    c1 = np.empty(n_t, dtype=complex)
    c2 = np.empty(n_t, dtype=complex)
    rr = np.empty(n_t, dtype=complex)
    p1 = np.empty(n_t, dtype=float)
    m1 = np.empty(n_t, dtype=float)
    bad = _kernels.integrate_slice(
        om_p,
        om_m,
        grid.dt,
        complex(state0.coh_e1),
        complex(state0.coh_em1),
        complex(state0.coh_raman),
        float(state0.pop_p1),
        float(state0.pop_m1),
        medium.gamma0,
        medium.gamma_opt,
        medium.gamma_t,
        medium.gamma_r,
        medium.delta_z,
        delta_d,
        grid.solver_mode == "full-stiff",
        include_raman,
        c1,
        c2,
        rr,
        p1,
        m1,
    )
    return c1, c2, rr, p1, m1, bad


def run_sequence(
    medium: AtomicMedium,
    drive: DriveProfile,
    signal: SignalPulse,
    grid: SimGrid,
    keep_grids: bool = False,
    include_raman: bool = True,
    delta_d: float = 0.0,
) -> StorageResult:
    """Run a full write/store/retrieve sequence through the cell.

    Atoms start in the drive-only analytic steady state at the local
    depleted drive level, so the write phase opens without an equilibration
    transient.  Raises StabilityError with the failing (z, t) location if
    the state blows up.
    """
    from .populariton import mixing_angle, compose
    from .protocol import efficiency as efficiency_of

    t = grid.times()
    dz = grid.z_step(medium)
    n_z, n_t = grid.n_z, grid.n_t

    drive_amp = np.asarray(drive.amplitude(t), dtype=float)
    cut_window = np.asarray(drive.off_window(t), dtype=float)
    sig = signal.boundary_value(t) * cut_window
    signal.check_weak(float(drive_amp.max(initial=0.0)))
    grid.validate_stability(medium, float(drive_amp.max(initial=0.0)) + abs(signal.peak))

    # boundary condition at z=0 in the circular basis
    phase_p = np.exp(-1j * signal.alpha)
    phase_m = np.exp(1j * signal.alpha)
    sqrt2 = math.sqrt(2.0)
    col_p = (drive_amp + sig * phase_p) / sqrt2
    col_m = (drive_amp + sig * phase_m) / sqrt2
    col_p = np.ascontiguousarray(col_p, dtype=complex)
    col_m = np.ascontiguousarray(col_m, dtype=complex)

    s_in = saturation(medium, float(drive_amp[0]))
    s_profile = drive_depletion(medium, s_in, n_z)

    # switch times for the result metadata
    transitions = drive._transitions()
    t_cut = next((bp[0] for bp in transitions if bp[1] == 0.0), grid.t_end)
    t_retrieve = next(
        (bp[0] for bp in transitions if bp[1] > 0.0 and bp[0] > t_cut), grid.t_end
    )

    keep = keep_grids
    if keep:
        q_zt = np.empty((n_z, n_t))
        pp_zt = np.empty((n_z, n_t))
        rd_zt = np.empty((n_z, n_t))
        dr_zt = np.empty((n_z, n_t))

    def quadratures(cp, cm):
        om_perp = (cp - cm) / (1j * sqrt2)
        om_par = (cp + cm) / sqrt2
        return om_perp, om_par

    def init_state(cp0):
        level = abs(cp0) * sqrt2
        return steady_state_analytic(medium, level).state

    import warnings as _warnings

    entrance = None
    for i in range(n_z):
        with _warnings.catch_warnings():
            _warnings.simplefilter("ignore")
            state0 = init_state(col_p[0])
        c1, c2, rr, p1, m1, bad = _integrate_column(
            grid, medium, col_p, col_m, state0, include_raman, delta_d
        )
        if bad:
            raise StabilityError(
                f"state blew up at z index {i} (z={i * dz:g}), t={bad * grid.dt:g}"
            )
        if i == 0:
            entrance = (col_p.copy(), col_m.copy())
        if keep:
            om_perp, om_par = quadratures(col_p, col_m)
            q_zt[i] = om_perp.imag
            pp_zt[i] = om_perp.real
            rd_zt[i] = p1 - m1
            dr_zt[i] = np.abs(om_par)
        if i == n_z - 1:
            exit_cols = (col_p.copy(), col_m.copy())
            exit_pops = (p1, m1)
            break
        # midpoint z march: predict half-step field, integrate virtual
        # mid-slice atoms, advance with the midpoint coherences
        half_p, half_m = advance_field_column(col_p, col_m, c1, c2, 0.5 * dz, medium.eta)
        with _warnings.catch_warnings():
            _warnings.simplefilter("ignore")
            state_h = init_state(half_p[0])
        h1, h2, _, _, _, bad = _integrate_column(
            grid, medium, half_p, half_m, state_h, include_raman, delta_d
        )
        if bad:
            raise StabilityError(
                f"state blew up at z index {i} (midpoint), t={bad * grid.dt:g}"
            )
        col_p, col_m = advance_field_column(col_p, col_m, h1, h2, dz, medium.eta)

    om_perp_in, om_par_in = quadratures(*entrance)
    om_perp_out, om_par_out = quadratures(*exit_cols)
    rho_delta_out = exit_pops[0] - exit_pops[1]

    # populariton at the exit plane, mixing angle from the local drive level
    drive_out_amp = np.abs(om_par_out)
    theta = mixing_angle(medium, drive_out_amp)
    pol = compose(
        om_perp_out.imag,
        rho_delta_out,
        theta,
        s_profile[-1],
        medium=medium,
        normalization="supplement",
    )

    result = StorageResult(
        t=t,
        drive_in=np.abs(om_par_in),
        drive_out=drive_out_amp,
        signal_in=np.abs(om_perp_in.imag),
        signal_out=np.abs(om_perp_out.imag),
        rho_delta_out=rho_delta_out,
        populariton_out=pol.value if np.ndim(pol.value) else np.asarray(pol.value),
        s_in=s_in,
        s_out=float(s_profile[-1]),
        optical_depth=medium.optical_depth,
        t_cut=t_cut,
        t_retrieve=t_retrieve,
        storage_duration=t_retrieve - t_cut,
        medium=medium,
        grid=grid,
        z=np.linspace(0.0, medium.length, n_z),
        s_profile=s_profile,
    )
    if keep:
        result.q_perp_zt = q_zt
        result.p_perp_zt = pp_zt
        result.rho_delta_zt = rd_zt
        result.drive_zt = dr_zt
    result.field_columns = {
        "entrance": entrance,
        "exit": exit_cols,
    }
    try:
        result.efficiency = efficiency_of(result)
    except Exception as exc:
        result.efficiency = None
        result.efficiency_error = f"{type(exc).__name__}: {exc}"
    return result
