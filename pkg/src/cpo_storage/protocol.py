"""Storage-protocol orchestration: efficiency metric and parameter sweeps.

Efficiency is the retrieved-to-input energy ratio

    e = int_T^inf |E(L,t)|^2 dt / int |E(0,t)|^2 dt

with T the instant the retrieval drive edge begins.  The numerator counts
only the power in the input pulse's own eigen-quadrature at the exit, so
polarization components generated by the medium earn no credit.  Gain can
push e above one.

Sweep points are independent simulations; they run across worker processes
and are reassembled by parameter index, so results are identical for any
worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    US,
    _SMOOTHSTEP_1090,
    AtomicMedium,
    DriveProfile,
    SignalPulse,
    WindowError,
    cpo_linewidth,
)
from .maxwell_bloch import SimGrid, StorageResult, run_sequence
from .steady_state import omega_d_for_saturation

__all__ = [
    "efficiency",
    "StorageSpec",
    "storage_run",
    "sweep_depth",
    "sweep_switch",
    "DepthSweepRow",
    "SwitchSweepRow",
]


def efficiency(result: StorageResult, retrieve_time: float | None = None) -> float:
    """Retrieved-pulse energy from the retrieval instant on, over input energy.

    Raises WindowError when the retrieved trace has not decayed below 1e-4
    of its peak by the end of the record (the integral would be truncated).
    """
    t_r = result.t_retrieve if retrieve_time is None else retrieve_time
    t = result.t
    dt = t[1] - t[0]
    out = result.signal_out
    mask = t >= t_r
    if not mask.any():
        raise WindowError("record ends before the retrieval instant")
    retrieved = out[mask]
    peak = float(retrieved.max(initial=0.0))
    if peak > 0.0:
        tail = float(np.max(retrieved[-3:]))
        if tail > 1e-4 * peak:
            raise WindowError(
                f"retrieved trace still at {tail / peak:.2e} of its peak at t_end; "
                "extend the record"
            )
    denom = float(np.trapezoid(result.signal_in**2, dx=dt))
    if denom == 0.0:
        return 0.0
    num = float(np.trapezoid(retrieved**2, dx=dt))
    return num / denom


@dataclass(frozen=True)
class StorageSpec:
    """Everything needed to build one storage run (all times internal units).

    ``t_end=None`` sizes the record so the retrieved pulse, including the
    slow tail emitted by the depleted end of the cell (rate ~ the local CPO
    linewidth, bounded below by gamma_t), decays below the efficiency
    window threshold.
    """

    medium: AtomicMedium
    s_in: float = 0.1
    signal_tau: float = 2.0 * US
    t_cut: float = 6.0 * US
    storage: float = 2.0 * US
    t_end: float | None = None
    tau_sw: float = 0.05 * US
    tau_sw_retrieve: float | None = None
    signal_ratio: float = 1e-3
    n_z: int = 64
    dt: float = 0.05
    solver_mode: str = "coherence-eliminated"
    signal_delta: float = 0.0

    def auto_t_end(self) -> float:
        from .core import cpo_linewidth
        from .steady_state import drive_depletion

        t_retrieve = self.t_cut + self.storage
        s_out = float(drive_depletion(self.medium, self.s_in, 257)[-1])
        tail_rate = cpo_linewidth(
            self.medium, omega_d_for_saturation(self.medium, s_out)
        )
        ramps = 3.0 * max(
            self.tau_sw, self.tau_sw_retrieve or 0.0, 0.0
        )
        return t_retrieve + ramps + 4.0 * US + 9.5 / tail_rate

    def build(self):
        level = omega_d_for_saturation(self.medium, self.s_in)
        drive = DriveProfile.storage_sequence(
            level,
            t_off=self.t_cut,
            t_on=self.t_cut + self.storage,
            tau_sw=self.tau_sw,
            tau_sw_retrieve=self.tau_sw_retrieve,
        )
        signal = SignalPulse.rising_exp(
            peak=self.signal_ratio * level,
            tau=self.signal_tau,
            t_cut=self.t_cut,
            delta=self.signal_delta,
        )
        t_end = self.t_end if self.t_end is not None else self.auto_t_end()
        grid = SimGrid(
            n_z=self.n_z, dt=self.dt, t_end=t_end, solver_mode=self.solver_mode
        )
        return drive, signal, grid


def storage_run(spec: StorageSpec, keep_grids: bool = False) -> StorageResult:
    drive, signal, grid = spec.build()
    return run_sequence(spec.medium, drive, signal, grid, keep_grids=keep_grids)


@dataclass(frozen=True)
class DepthSweepRow:
    depth: float
    s_in: float
    s_out: float
    efficiency: float
    error: str = ""


@dataclass(frozen=True)
class SwitchSweepRow:
    tau_sw_over_inv_dcpo: float
    edge: str
    efficiency: float
    s_in: float = math.nan
    error: str = ""


def _depth_point(args):
    spec, depth = args
    medium = spec.medium.with_depth(depth)
    try:
        res = storage_run(replace(spec, medium=medium))
        return DepthSweepRow(
            depth=depth,
            s_in=res.s_in,
            s_out=res.s_out,
            efficiency=res.efficiency,
        )
    except Exception as exc:  # per-point failures recorded, sweep continues
        return DepthSweepRow(
            depth=depth, s_in=spec.s_in, s_out=math.nan,
            efficiency=math.nan, error=f"{type(exc).__name__}: {exc}",
        )


def _run_points(worker, points, workers: int):
    if workers <= 1 or len(points) <= 1:
        return [worker(p) for p in points]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, points))


def sweep_depth(
    spec: StorageSpec,
    depth_values,
    s_in_values,
    workers: int = 1,
) -> list[DepthSweepRow]:
    """Storage efficiency over an (optical depth, input saturation) grid.

    Each point is an independent run of the fixed write/store/retrieve
    sequence (2 us rising-exponential pulse, 3 us storage by default);
    depth rescales eta, s_in the drive level.
    """
    points = []
    for s_in in s_in_values:
        for depth in depth_values:
            points.append((replace(spec, s_in=float(s_in)), float(depth)))
    return _run_points(_depth_point, points, workers)


def _switch_point(args):
    spec, tau_rel, edge, inv_dcpo = args
    tau = tau_rel * inv_dcpo
    # the dark-storage hold starts only once the off-ramp has completed,
    # otherwise a slow storage edge would still be writing at the
    # retrieval instant and leak would be credited as retrieval
    ramp_full = tau / _SMOOTHSTEP_1090
    if edge == "storage":
        new = replace(
            spec, tau_sw=tau, tau_sw_retrieve=spec.tau_sw,
            storage=spec.storage + ramp_full,
        )
    elif edge == "retrieval":
        new = replace(spec, tau_sw_retrieve=tau)
    else:
        new = replace(
            spec, tau_sw=tau, tau_sw_retrieve=tau,
            storage=spec.storage + ramp_full,
        )
    try:
        res = storage_run(new)
        return SwitchSweepRow(
            tau_sw_over_inv_dcpo=tau_rel, edge=edge,
            efficiency=res.efficiency, s_in=res.s_in,
        )
    except Exception as exc:
        return SwitchSweepRow(
            tau_sw_over_inv_dcpo=tau_rel, edge=edge,
            efficiency=math.nan, s_in=spec.s_in,
            error=f"{type(exc).__name__}: {exc}",
        )


def sweep_switch(
    spec: StorageSpec,
    tau_sw_values,
    edge: str = "storage",
    workers: int = 1,
) -> list[SwitchSweepRow]:
    """Storage efficiency against drive switching time.

    ``tau_sw_values`` are in units of the inverse CPO linewidth at the input
    drive level; ``edge`` selects which transition is ramped ("storage",
    "retrieval" or "both").  The storage edge ramps drive and signal
    together; the retrieval edge ramps the drive only.
    """
    if edge not in ("storage", "retrieval", "both"):
        raise ValueError("edge must be storage, retrieval or both")
    level = omega_d_for_saturation(spec.medium, spec.s_in)
    inv_dcpo = 1.0 / cpo_linewidth(spec.medium, level)
    points = [(spec, float(tr), edge, inv_dcpo) for tr in tau_sw_values]
    return _run_points(_switch_point, points, workers)
