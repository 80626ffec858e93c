"""Shared conventions: unit system, medium/field records, quadrature basis.

Internal unit system
--------------------
Rates are measured in units of the excited-state decay rate gamma0 (so
``gamma0 = 1`` for the reference medium), time in ``1/gamma0`` and length in
units of the vapor-cell length (``length = 1`` for the physical cell). The
speed of light then becomes the dimensionless ``c = c_SI / (gamma0_SI * L_SI)``
which is ~489 for the reference metastable-helium cell (6 cm, 98 ns excited
lifetime). This keeps every dynamical scale within a few orders of magnitude
of unity even though gamma_opt/gamma_t ~ 5e4.

Field conventions
-----------------
The drive is linearly polarized along ``e_par``; the weak signal may point
along any direction ``u`` with ``e_par . u = cos(alpha)``. In the circular
basis ``e_pm = (e_par +/- i e_perp)/sqrt(2)`` the signal Rabi components are
``Omega_pm = Omega(t) exp(-/+ i alpha)/sqrt(2)``. The linear-polarization
components are

    Omega_par  = (Omega_plus + Omega_minus) / sqrt(2)
    Omega_perp = (Omega_plus - Omega_minus) / (i sqrt(2))

and the four real quadratures are P = Re, Q = Im of (Omega_perp, Omega_par),
collected in the order (P_perp, P_par, Q_perp, Q_par).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

__all__ = [
    "C_SI",
    "GAMMA0_SI",
    "CELL_LENGTH_SI",
    "US",
    "AtomicMedium",
    "DriveProfile",
    "SignalPulse",
    "QuadratureVector",
    "BlochState",
    "quadratures_from_fields",
    "fields_from_quadratures",
    "cpo_linewidth",
    "smoothstep",
    "us_to_internal",
    "internal_to_us",
    "ConfigError",
    "NonConvergence",
    "StabilityError",
    "WindowError",
    "AliasingError",
    "ValidityError",
    "ValidityWarning",
]

C_SI = 299_792_458.0
#: He* 2^3P total spontaneous decay rate (98 ns lifetime), the rate anchor.
GAMMA0_SI = 1.0216e7
#: reference vapor-cell length, meters
CELL_LENGTH_SI = 0.06
#: internal time units per microsecond, for the reference gamma0
US = 1e-6 * GAMMA0_SI

# fraction of a cubic smoothstep ramp spent between the 10% and 90% levels
_SMOOTHSTEP_1090 = 0.608403882292349


class ConfigError(ValueError):
    """Invalid or inconsistent configuration input."""


class NonConvergence(RuntimeError):
    """An iterative solver failed to reach its tolerance in the time allowed."""


class StabilityError(RuntimeError):
    """The atomic state blew up during integration (step too large)."""


class WindowError(RuntimeError):
    """A time window is too short for the integral it must contain."""


class AliasingError(ValueError):
    """Input spectrum carries significant power at the grid Nyquist frequency."""


class ValidityError(ValueError):
    """Operation requested outside its physical validity window."""


class ValidityWarning(UserWarning):
    """A closed form was evaluated outside its stated validity conditions."""


def us_to_internal(t_us: float, gamma0_si: float = GAMMA0_SI) -> float:
    """Convert a lab time in microseconds to internal 1/gamma0 units."""
    return t_us * 1e-6 * gamma0_si


def internal_to_us(t: float, gamma0_si: float = GAMMA0_SI) -> float:
    return t / (1e-6 * gamma0_si)


def smoothstep(x):
    """C1 ramp 3x^2 - 2x^3 clipped to [0, 1]; accepts scalars or arrays."""
    import numpy as np

    u = np.clip(x, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


@dataclass(frozen=True)
class AtomicMedium:
    """Rate constants and coupling of the driven lambda system.

    All rates in units of gamma0, length in cell lengths, eta in
    gamma0 per cell length.  ``c`` is the speed of light in the same
    internal units; the dimensionless group ``eta*c/(2*gamma_opt**2)``
    is the primary coupling knob (~1 for the He* reference cell).
    """

    gamma0: float = 1.0
    gamma_opt: float = 500.0
    gamma_t: float = 0.01
    gamma_r: float = 0.01
    delta_z: float = 10.0
    eta: float = 0.0
    length: float = 1.0
    c: float = C_SI / (GAMMA0_SI * CELL_LENGTH_SI)

    def __post_init__(self):
        if not (0.0 <= self.gamma_t < self.gamma0 < self.gamma_opt):
            raise ConfigError(
                "rate ordering gamma_t < gamma0 < gamma_opt violated: "
                f"({self.gamma_t}, {self.gamma0}, {self.gamma_opt})"
            )
        if self.gamma_r < 0 or self.eta < 0:
            raise ConfigError("rates and eta must be non-negative")
        if self.length <= 0 or self.c <= 0:
            raise ConfigError("length and c must be positive")

    @property
    def coupling_knob(self) -> float:
        """eta*c / (2 gamma_opt^2), ~1 for He* at room temperature."""
        return self.eta * self.c / (2.0 * self.gamma_opt**2)

    @property
    def optical_depth(self) -> float:
        """Drive-independent depth 2*g(s=0)*L = eta*L/gamma_opt."""
        return self.eta * self.length / self.gamma_opt

    @classmethod
    def he_star(cls, coupling_knob: float = 1.0, **overrides) -> "AtomicMedium":
        """Reference He* medium; ``coupling_knob`` rescales eta (atom density)."""
        c = overrides.pop("c", C_SI / (GAMMA0_SI * CELL_LENGTH_SI))
        eta = overrides.pop("eta", coupling_knob * 2.0 * 500.0**2 / c)
        return cls(eta=eta, c=c, **overrides)

    def with_depth(self, depth: float) -> "AtomicMedium":
        """Same medium with eta rescaled to the given optical depth."""
        return replace(self, eta=depth * self.gamma_opt / self.length)


def cpo_linewidth(medium: AtomicMedium, omega_d: float) -> float:
    """Saturation-broadened CPO linewidth gamma_t + |Omega_D|^2/gamma_opt."""
    if omega_d < 0:
        raise ValueError("omega_d must be >= 0")
    return medium.gamma_t + omega_d**2 / medium.gamma_opt


@dataclass(frozen=True)
class DriveProfile:
    """Piecewise-constant drive schedule with smoothstep level transitions.

    ``schedule`` is a sequence of (time, level) or (time, level, tau_sw)
    breakpoints; a transition towards its level begins at each breakpoint
    time and lasts ``tau_sw / 0.6084`` in total (tau_sw is the 10-90%
    switching duration).  Levels are total drive Rabi frequencies
    |Omega_D| >= 0; the circular components are |Omega_D|/sqrt(2) each.
    """

    schedule: tuple = ()
    tau_sw: float = 0.0
    initial_level: float = 0.0

    def __post_init__(self):
        if self.tau_sw < 0:
            raise ConfigError("tau_sw must be >= 0")
        prev = -math.inf
        for bp in self.schedule:
            t, level = bp[0], bp[1]
            if level < 0:
                raise ConfigError("drive levels must be real non-negative")
            if t < prev:
                raise ConfigError("schedule breakpoints must be time-ordered")
            prev = t
        if self.initial_level < 0:
            raise ConfigError("drive levels must be real non-negative")

    def _transitions(self):
        out = []
        for bp in self.schedule:
            tau = bp[2] if len(bp) > 2 and bp[2] is not None else self.tau_sw
            out.append((bp[0], bp[1], tau / _SMOOTHSTEP_1090 if tau > 0 else 0.0))
        return out

    def amplitude(self, t):
        """Total drive Rabi frequency |Omega_D|(t); scalar or array ``t``."""
        import numpy as np

        t = np.asarray(t, dtype=float)
        value = np.full(t.shape, float(self.initial_level))
        start_level = float(self.initial_level)
        for t0, level, ramp in self._transitions():
            if ramp == 0.0:
                w = (t >= t0).astype(float)
            else:
                w = smoothstep((t - t0) / ramp)
            value = value + (level - start_level) * w
            start_level = level
        return value if value.shape else float(value)

    @classmethod
    def storage_sequence(
        cls,
        level: float,
        t_off: float,
        t_on: float,
        tau_sw: float = 0.0,
        tau_sw_retrieve: float | None = None,
    ) -> "DriveProfile":
        """Write (drive on) -> storage (off at t_off) -> retrieval (on at t_on)."""
        return cls(
            schedule=((t_off, 0.0, tau_sw), (t_on, level, tau_sw_retrieve)),
            tau_sw=tau_sw,
            initial_level=level,
        )

    def off_window(self, t):
        """Multiplier 1->0 tracking the first switch-off edge (cuts the signal)."""
        import numpy as np

        t = np.asarray(t, dtype=float)
        for t0, level, ramp in self._transitions():
            if level == 0.0:
                if ramp == 0.0:
                    return np.where(t >= t0, 0.0, 1.0)
                return 1.0 - smoothstep((t - t0) / ramp)
        return np.ones(t.shape)


@dataclass(frozen=True)
class SignalPulse:
    """Weak signal envelope at the cell entrance.

    ``envelope`` maps time to the complex Rabi frequency Omega(t) at z=0 (a
    purely imaginary envelope is a pure Q quadrature).  ``alpha`` is the
    polarization angle against the drive, ``delta`` an optional carrier
    detuning applied as the phase rotation exp(-i delta t).
    """

    envelope: Callable[[float], complex]
    alpha: float = math.pi / 2
    delta: float = 0.0
    peak: float = 0.0

    def boundary_value(self, t):
        import numpy as np

        t = np.asarray(t, dtype=float)
        val = np.asarray(self.envelope(t), dtype=complex)
        if self.delta != 0.0:
            val = val * np.exp(-1j * self.delta * t)
        return val

    def check_weak(self, drive_peak: float, ratio: float = 0.1) -> None:
        if drive_peak > 0 and self.peak > ratio * drive_peak:
            warnings.warn(
                f"signal peak {self.peak:.3g} above {ratio:g} of drive "
                f"{drive_peak:.3g}; first-order treatment may not apply",
                ValidityWarning,
                stacklevel=2,
            )

    @classmethod
    def rising_exp(
        cls,
        peak: float,
        tau: float,
        t_cut: float,
        quadrature: str = "q_perp",
        alpha: float = math.pi / 2,
        delta: float = 0.0,
    ) -> "SignalPulse":
        """Rising exponential, held at its peak after t_cut.

        The hold lets the drive's switch-off window (shared with the drive
        edge) do the actual cutting, so a finite tau_sw ramps the signal
        down with the same shape the drive uses.
        """
        phase = 1j if quadrature == "q_perp" else 1.0

        def env(t):
            import numpy as np

            return peak * phase * np.exp(np.minimum(t - t_cut, 0.0) / tau)

        return cls(envelope=env, alpha=alpha, delta=delta, peak=peak)

    @classmethod
    def gaussian(
        cls,
        peak: float,
        tau: float,
        t_center: float,
        quadrature: str = "q_perp",
        alpha: float = math.pi / 2,
        delta: float = 0.0,
    ) -> "SignalPulse":
        phase = 1j if quadrature == "q_perp" else 1.0

        def env(t):
            import numpy as np

            return peak * phase * np.exp(-((t - t_center) ** 2) / (2.0 * tau**2))

        return cls(envelope=env, alpha=alpha, delta=delta, peak=peak)


@dataclass(frozen=True)
class QuadratureVector:
    """Signal-field quadratures (P_perp, P_par, Q_perp, Q_par) at one point.

    Real-valued in the time domain; complex in the frequency domain where
    the components obey Q(-w) = conj(Q(w)) (reality of the time traces).
    """

    p_perp: complex
    p_par: complex
    q_perp: complex
    q_par: complex

    def as_tuple(self):
        return (self.p_perp, self.p_par, self.q_perp, self.q_par)


_SQRT2 = math.sqrt(2.0)


def quadratures_from_fields(omega_plus: complex, omega_minus: complex) -> QuadratureVector:
    """Decompose circular Rabi components into the four field quadratures."""
    om_par = (omega_plus + omega_minus) / _SQRT2
    om_perp = (omega_plus - omega_minus) / (1j * _SQRT2)
    return QuadratureVector(
        p_perp=om_perp.real,
        p_par=om_par.real,
        q_perp=om_perp.imag,
        q_par=om_par.imag,
    )


def fields_from_quadratures(quad: QuadratureVector) -> tuple[complex, complex]:
    """Inverse of :func:`quadratures_from_fields` (exact round trip)."""
    om_perp = quad.p_perp + 1j * quad.q_perp
    om_par = quad.p_par + 1j * quad.q_par
    omega_plus = (om_par + 1j * om_perp) / _SQRT2
    omega_minus = (om_par - 1j * om_perp) / _SQRT2
    return omega_plus, omega_minus


@dataclass(frozen=True)
class BlochState:
    """Density-matrix variables of the lambda system in the rotating frame.

    The excited population is eliminated by trace closure,
    rho_ee = 1 - pop_p1 - pop_m1.
    """

    coh_e1: complex = 0.0
    coh_em1: complex = 0.0
    coh_raman: complex = 0.0
    pop_p1: float = 0.5
    pop_m1: float = 0.5

    @property
    def pop_e(self) -> float:
        return 1.0 - self.pop_p1 - self.pop_m1

    @property
    def rho_delta(self) -> float:
        return self.pop_p1 - self.pop_m1

    @property
    def rho_sigma(self) -> float:
        return self.pop_p1 + self.pop_m1

    def validate(self, tol: float = 1e-9) -> None:
        if self.pop_p1 < -tol or self.pop_m1 < -tol:
            raise ValueError(f"negative ground population: {self}")
        if self.pop_p1 + self.pop_m1 > 1.0 + tol:
            raise ValueError(f"ground populations exceed trace: {self}")
        if abs(self.coh_raman) ** 2 > self.pop_p1 * self.pop_m1 + tol:
            raise ValueError(f"Raman coherence violates positivity: {self}")

    def as_array(self):
        import numpy as np

        return np.array(
            [self.coh_e1, self.coh_em1, self.coh_raman, self.pop_p1, self.pop_m1],
            dtype=complex,
        )

    @classmethod
    def from_array(cls, a) -> "BlochState":
        return cls(
            coh_e1=complex(a[0]),
            coh_em1=complex(a[1]),
            coh_raman=complex(a[2]),
            pop_p1=float(a[3].real),
            pop_m1=float(a[4].real),
        )
