"""Drive-only (zeroth-order) steady state of the lambda system.

Closed forms hold for a resonant drive when the Zeeman splitting is large
enough to keep the Raman coherence from building up yet still small against
the optical linewidth; an independent brute-force time integrator and the
drive-depletion ODE live here as well.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import (
    AtomicMedium,
    BlochState,
    NonConvergence,
    ValidityWarning,
)

__all__ = [
    "SaturationPoint",
    "saturation",
    "omega_d_for_saturation",
    "steady_state_analytic",
    "steady_state_oracle",
    "drive_depletion",
]


@dataclass(frozen=True)
class SaturationPoint:
    """Common steady-state values of the symmetric driven lambda system."""

    s: float
    coh_e: complex
    pop: float
    state: BlochState | None = None


def saturation(medium: AtomicMedium, omega_d: float) -> float:
    """Saturation parameter s = 3|Omega_D|^2 / ((gamma_t + gamma0) gamma_opt)."""
    if omega_d < 0:
        raise ValueError("omega_d must be >= 0")
    return 3.0 * omega_d**2 / ((medium.gamma_t + medium.gamma0) * medium.gamma_opt)


def omega_d_for_saturation(medium: AtomicMedium, s: float) -> float:
    """Total drive Rabi frequency that produces saturation parameter s."""
    if s < 0:
        raise ValueError("s must be >= 0")
    return math.sqrt(s * (medium.gamma_t + medium.gamma0) * medium.gamma_opt / 3.0)


def steady_state_analytic(medium: AtomicMedium, omega_d: float) -> SaturationPoint:
    """Closed-form steady state under a constant resonant drive.

    coh_e = i (|Omega_D|/sqrt 2) / (2 gamma_opt (1+s)), pop = (1/2 + s/3)/(1+s).
    Warns when the Zeeman splitting is too small to suppress the Raman
    coherence (delta_z must exceed the saturation-broadened two-photon width).
    """
    s = saturation(medium, omega_d)
    raman_width = medium.gamma_r + omega_d**2 / medium.gamma_opt
    if medium.delta_z <= 10.0 * raman_width:
        warnings.warn(
            f"delta_z={medium.delta_z:g} <= 10*(gamma_r + |Omega_D|^2/gamma_opt)"
            f"={10 * raman_width:g}; Raman coherence may not be negligible",
            ValidityWarning,
            stacklevel=2,
        )
    coh = 1j * (omega_d / math.sqrt(2.0)) / (2.0 * medium.gamma_opt * (1.0 + s))
    pop = (0.5 + s / 3.0) / (1.0 + s)
    state = BlochState(coh_e1=coh, coh_em1=coh, coh_raman=0.0, pop_p1=pop, pop_m1=pop)
    return SaturationPoint(s=s, coh_e=coh, pop=pop, state=state)


def steady_state_oracle(
    medium: AtomicMedium,
    omega_d: float,
    t_max: float = 2000.0,
    tol: float = 1e-14,
    delta_d: float = 0.0,
    include_raman: bool = True,
    dt: float | None = None,
) -> SaturationPoint:
    """Brute-force steady state: integrate the zeroth-order Bloch equations
    from ground-state equipartition until the state change per step < tol.

    Integrates the five-variable system (optical coherences, Raman coherence
    with gamma_r and delta_z, populations) with a fixed-step classical RK4,
    step <= 0.1/gamma_opt.  ``include_raman=False`` freezes the Raman
    coherence at zero, which together with ``delta_z=0`` reproduces exactly
    the limit in which the analytic closed form is derived.
    """
    if omega_d < 0:
        raise ValueError("omega_d must be >= 0")
    if dt is None:
        dt = 0.1 / medium.gamma_opt
    dt = min(dt, 0.1 / medium.gamma_opt)
    om = complex(omega_d / math.sqrt(2.0))
    n_max = int(math.ceil(t_max / dt))
    c1, c2, rr, p1, m1, steps, ok = _kernels.relax_to_steady_state(
        om,
        om,
        dt,
        n_max,
        tol,
        64,
        0.0j,
        0.0j,
        0.0j,
        0.5,
        0.5,
        medium.gamma0,
        medium.gamma_opt,
        medium.gamma_t,
        medium.gamma_r,
        medium.delta_z,
        delta_d,
        include_raman,
    )
    if not ok:
        raise NonConvergence(
            f"steady-state relaxation did not reach tol={tol:g} by t_max={t_max:g}"
        )
    state = BlochState(
        coh_e1=c1, coh_em1=c2, coh_raman=rr, pop_p1=p1.real, pop_m1=m1.real
    )
    return SaturationPoint(
        s=saturation(medium, omega_d),
        coh_e=0.5 * (c1 + c2),
        pop=0.5 * (p1.real + m1.real),
        state=state,
    )


def drive_depletion(medium: AtomicMedium, s_in: float, n_z: int) -> np.ndarray:
    """Saturation profile s(z) on a uniform grid over the cell.

    Integrates ds/dz = -(eta/gamma_opt) s/(1+s) with classical RK4 steps on
    the grid itself; the right side is the symmetric-mode coupling weight
    beta_sigma times eta/gamma_opt.
    """
    if s_in < 0:
        raise ValueError("s_in must be >= 0")
    if n_z < 2:
        raise ValueError("n_z must be >= 2")
    rate = medium.eta / medium.gamma_opt

    def f(s):
        return -rate * s / (1.0 + s)

    h = medium.length / (n_z - 1)
    out = np.empty(n_z)
    out[0] = s_in
    s = s_in
    for i in range(1, n_z):
        k1 = f(s)
        k2 = f(s + 0.5 * h * k1)
        k3 = f(s + 0.5 * h * k2)
        k4 = f(s + h * k3)
        s = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if s < 0.0:
            s = 0.0
        out[i] = s
    return out
