"""First-order response of the driven medium to the weak signal.

Fourier convention: d/dt -> +i*omega, i.e. FT[f](w) = integral f(t) e^{-iwt} dt,
matching numpy's forward FFT.  A mode delayed by tau acquires e^{-i w tau}, so
diagonal transfer entries carry -i*w/v terms for positive group velocity v.

Two coefficient sets are exposed for the propagation generator:

* ``mode="supplement"`` (default, ground truth): gains (2 beta - 1) g and
  group-velocity terms obtained as the exact first-order-in-omega expansion
  of the exact susceptibilities (they retain the gamma_opt+gamma_t and
  gamma_opt+gamma0+gamma_t factors).
* ``mode="simplified"``: the compact velocity formulas valid for
  gamma_t << gamma0 << gamma_opt, kept for figure reproduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import AliasingError, AtomicMedium

__all__ = [
    "CpoCoefficients",
    "TransferMatrix",
    "coefficients",
    "exact_response",
    "adiabatic_response",
    "transfer_matrix",
    "propagate_linear",
    "dispersion_scan",
    "DispersionScan",
    "QuadratureSpectra",
    "spectra_from_time_traces",
    "time_traces_from_spectra",
]

QUADRATURE_ORDER = ("p_perp", "p_par", "q_perp", "q_par")


@dataclass(frozen=True)
class CpoCoefficients:
    """Saturation-dependent CPO coupling weights and saturated absorption."""

    beta_delta: float
    beta_sigma: float
    g: float


def coefficients(medium: AtomicMedium, s: float) -> CpoCoefficients:
    """beta_delta = s/(3 gamma_t/gamma0 + s), beta_sigma = s/(1+s),
    g = eta / (2 gamma_opt (1+s))."""
    if s < 0:
        raise ValueError("s must be >= 0")
    a = 3.0 * medium.gamma_t / medium.gamma0
    beta_delta = s / (a + s) if (a + s) > 0 else 0.0
    beta_sigma = s / (1.0 + s)
    g = medium.eta / (2.0 * medium.gamma_opt * (1.0 + s))
    return CpoCoefficients(beta_delta=beta_delta, beta_sigma=beta_sigma, g=g)


def _omega_d_sq(medium: AtomicMedium, s: float) -> float:
    return s * (medium.gamma_t + medium.gamma0) * medium.gamma_opt / 3.0


def exact_response(medium: AtomicMedium, s: float, omega) -> tuple:
    """Exact Fourier-domain susceptibilities (chi_delta, chi_sigma).

    rho_delta(z,w) = chi_delta(w) * Q_perp(z,w) and
    rho_sigma(z,w) = chi_sigma(w) * P_par(z,w), with

      chi_delta = -(|O_D|/(1+s)) (2 + iw/G) / [(g_t + iw)(G + iw) + |O_D|^2]
      chi_sigma = -(|O_D|/(1+s)) (2 + iw/G) / [(g_t + g_0 + iw)(G + iw) + 3|O_D|^2]
    """
    w = np.asarray(omega, dtype=complex) * 1j
    om2 = _omega_d_sq(medium, s)
    om = math.sqrt(om2)
    gt, g0, G = medium.gamma_t, medium.gamma0, medium.gamma_opt
    num = -(om / (1.0 + s)) * (2.0 + w / G)
    chi_d = num / ((gt + w) * (G + w) + om2)
    chi_s = num / ((gt + g0 + w) * (G + w) + 3.0 * om2)
    if np.ndim(omega) == 0:
        return complex(chi_d), complex(chi_s)
    return chi_d, chi_s


def _adiabatic_pieces(medium: AtomicMedium, s: float):
    """Static values and linear-in-omega slopes of the two susceptibilities."""
    om2 = _omega_d_sq(medium, s)
    om = math.sqrt(om2)
    gt, g0, G = medium.gamma_t, medium.gamma0, medium.gamma_opt
    b_d = om2 / (gt * G + om2)
    b_s = 3.0 * om2 / ((gt + g0) * G + 3.0 * om2)
    chi_d0 = -2.0 * om / ((1.0 + s) * (gt * G + om2)) if om > 0 else 0.0
    chi_s0 = -2.0 * om / ((1.0 + s) * ((gt + g0) * G + 3.0 * om2)) if om > 0 else 0.0
    # derivative coefficients: chi(w) ~ chi0 (1 + i w k)
    k_d = 1.0 / (2.0 * G) - (G + gt) / (gt * G + om2) if om2 > 0 else 0.0
    k_s = (
        1.0 / (2.0 * G) - (G + g0 + gt) / ((gt + g0) * G + 3.0 * om2)
        if om2 > 0
        else 0.0
    )
    return chi_d0, k_d, chi_s0, k_s, b_d, b_s, om, om2


def adiabatic_response(medium: AtomicMedium, s: float, omega) -> tuple:
    """First-order adiabatic expansion chi(w) = chi(0) (1 + i w k).

    The slope coefficients are 1/(2 gamma_opt) - beta (gamma_opt + gamma_t)/
    |Omega_D|^2 for the antisymmetric mode (with the 1/3-weighted analogue
    for the symmetric mode), the exact Taylor expansion of
    :func:`exact_response` about omega = 0.
    """
    chi_d0, k_d, chi_s0, k_s, *_ = _adiabatic_pieces(medium, s)
    w = np.asarray(omega, dtype=float)
    chi_d = chi_d0 * (1.0 + 1j * w * k_d)
    chi_s = chi_s0 * (1.0 + 1j * w * k_s)
    if np.ndim(omega) == 0:
        return complex(chi_d), complex(chi_s)
    return chi_d, chi_s


@dataclass(frozen=True)
class TransferMatrix:
    """Diagonal propagation generator at one (s, omega), ordered like
    (P_perp, P_par, Q_perp, Q_par).  Entries carry gain - i w / v."""

    entries: tuple
    gains: tuple
    v1: float
    v2: float
    v3: float
    s: float
    omega: float

    @property
    def diagonal(self) -> np.ndarray:
        return np.array(self.entries, dtype=complex)

    @property
    def velocities(self) -> tuple:
        return (self.v1, self.v2, self.v3)


def _inverse_velocities(medium: AtomicMedium, s: float, mode: str):
    """1/v for the three eigenmode velocities (signed; 0 marks a singular bin)."""
    co = coefficients(medium, s)
    b_d, b_s = co.beta_delta, co.beta_sigma
    G, g0, gt, c, eta = (
        medium.gamma_opt,
        medium.gamma0,
        medium.gamma_t,
        medium.c,
        medium.eta,
    )
    pref = eta / (2.0 * G**2 * (1.0 + s))
    if mode == "supplement":
        om2 = _omega_d_sq(medium, s)
        if om2 > 0:
            br3 = 2.0 * b_d**2 * G * (G + gt) / om2 + b_d - 1.0
            br2 = 2.0 * b_s**2 * G * (G + gt + g0) / (3.0 * om2) + b_s - 1.0
        else:
            br3 = -1.0
            br2 = -1.0
        inv1 = 1.0 / c - pref
        inv3 = 1.0 / c + pref * br3
        inv2 = 1.0 / c + pref * br2
    elif mode == "simplified":
        K = c * eta / (2.0 * G**2)
        if s > 0:
            br3 = 6.0 * b_d**2 * G / (s * g0) - b_d - 1.0
            br2 = 2.0 * b_s**2 * G / (s * g0) - b_s - 1.0
        else:
            br3 = -1.0
            br2 = -1.0
        inv1 = (1.0 - K / (1.0 + s)) / c
        inv3 = (1.0 + K * br3 / (1.0 + s)) / c
        inv2 = (1.0 + K * br2 / (1.0 + s)) / c
    else:
        raise ValueError(f"unknown transfer-matrix mode {mode!r}")
    return inv1, inv2, inv3


def _safe_v(inv: float) -> float:
    return math.inf if inv == 0.0 else 1.0 / inv


def transfer_matrix(
    medium: AtomicMedium, s: float, omega: float, mode: str = "supplement"
) -> TransferMatrix:
    """Diagonal transfer matrix T(s, omega) for the quadrature vector.

    P_perp and Q_par share the entry -g - i w / v1; the CPO-coupled
    quadratures get (2 beta - 1) g - i w / v_{2,3}.
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    co = coefficients(medium, s)
    g = co.g
    inv1, inv2, inv3 = _inverse_velocities(medium, s, mode)
    gain_abs = -g
    gain_par = (2.0 * co.beta_sigma - 1.0) * g
    gain_perp = (2.0 * co.beta_delta - 1.0) * g
    w = float(omega)
    e1 = gain_abs - 1j * w * inv1
    e2 = gain_par - 1j * w * inv2
    e3 = gain_perp - 1j * w * inv3
    e4 = gain_abs - 1j * w * inv1
    return TransferMatrix(
        entries=(e1, e2, e3, e4),
        gains=(gain_abs, gain_par, gain_perp, gain_abs),
        v1=_safe_v(inv1),
        v2=_safe_v(inv2),
        v3=_safe_v(inv3),
        s=s,
        omega=w,
    )


def _diagonal_entries(medium: AtomicMedium, s_profile, omega, mode: str):
    """Transfer-matrix diagonal on a (n_z, n_w, 4) grid."""
    s_profile = np.asarray(s_profile, dtype=float)
    w = np.asarray(omega, dtype=float)
    out = np.empty((s_profile.size, w.size, 4), dtype=complex)
    if mode == "exact":
        G = medium.gamma_opt
        eta = medium.eta
        for i, s in enumerate(s_profile):
            om2 = _omega_d_sq(medium, s)
            om = math.sqrt(om2)
            chi_d, chi_s = exact_response(medium, s, w)
            lor = eta / (2.0 * (G + 1j * w))
            absorb = -1j * w / medium.c - lor / (1.0 + s)
            out[i, :, 0] = absorb
            out[i, :, 3] = absorb
            out[i, :, 2] = -1j * w / medium.c - lor * (1.0 / (1.0 + s) + om * chi_d)
            out[i, :, 1] = -1j * w / medium.c - lor * (
                1.0 / (1.0 + s) + 3.0 * om * chi_s
            )
        return out
    for i, s in enumerate(s_profile):
        co = coefficients(medium, s)
        inv1, inv2, inv3 = _inverse_velocities(medium, s, mode)
        out[i, :, 0] = -co.g - 1j * w * inv1
        out[i, :, 1] = (2.0 * co.beta_sigma - 1.0) * co.g - 1j * w * inv2
        out[i, :, 2] = (2.0 * co.beta_delta - 1.0) * co.g - 1j * w * inv3
        out[i, :, 3] = -co.g - 1j * w * inv1
    return out


@dataclass(frozen=True)
class QuadratureSpectra:
    """Frequency-domain quadrature vector on an FFT grid."""

    omega: np.ndarray
    p_perp: np.ndarray
    p_par: np.ndarray
    q_perp: np.ndarray
    q_par: np.ndarray

    def stack(self) -> np.ndarray:
        return np.stack([self.p_perp, self.p_par, self.q_perp, self.q_par])


def spectra_from_time_traces(
    p_perp, p_par, q_perp, q_par, dt: float
) -> QuadratureSpectra:
    """Forward FFT of real time-domain quadrature traces (d/dt -> +i omega)."""
    n = len(q_perp)
    omega = 2.0 * math.pi * np.fft.fftfreq(n, d=dt)
    return QuadratureSpectra(
        omega=omega,
        p_perp=np.fft.fft(np.asarray(p_perp)),
        p_par=np.fft.fft(np.asarray(p_par)),
        q_perp=np.fft.fft(np.asarray(q_perp)),
        q_par=np.fft.fft(np.asarray(q_par)),
    )


def time_traces_from_spectra(spec: QuadratureSpectra) -> tuple:
    return tuple(
        np.fft.ifft(x).real
        for x in (spec.p_perp, spec.p_par, spec.q_perp, spec.q_par)
    )


def _check_aliasing(spec: QuadratureSpectra) -> None:
    stack = spec.stack()
    total = float(np.sum(np.abs(stack) ** 2))
    if total == 0.0:
        return
    n = stack.shape[1]
    nyq = n // 2
    edge = float(np.sum(np.abs(stack[:, nyq]) ** 2)) if n % 2 == 0 else float(
        np.sum(np.abs(stack[:, [nyq, nyq + 1 if n > 1 else nyq]]) ** 2)
    )
    if edge / total > 1e-6:
        raise AliasingError(
            f"input spectrum has {edge / total:.2e} of its power at the "
            "Nyquist frequency; refine the time grid"
        )


def propagate_linear(
    medium: AtomicMedium,
    s_profile,
    spectra: QuadratureSpectra,
    mode: str = "supplement",
    n_z_refine: int | None = None,
) -> QuadratureSpectra:
    """Propagate a quadrature spectrum across the cell.

    Applies exp(integral_0^L T(z, w) dz) per frequency bin; the matrix is
    diagonal so the z-ordered exponential is a plain trapezoid integral of
    each diagonal entry over the saturation profile ``s_profile`` (uniform
    grid over the cell, as produced by ``drive_depletion``).
    """
    _check_aliasing(spectra)
    s_profile = np.asarray(s_profile, dtype=float)
    if s_profile.size == 1:
        s_profile = np.repeat(s_profile, 2)
    diag = _diagonal_entries(medium, s_profile, spectra.omega, mode)
    h = medium.length / (s_profile.size - 1)
    integral = np.trapezoid(diag, dx=h, axis=0)
    factors = np.exp(integral)
    return QuadratureSpectra(
        omega=spectra.omega,
        p_perp=spectra.p_perp * factors[:, 0],
        p_par=spectra.p_par * factors[:, 1],
        q_perp=spectra.q_perp * factors[:, 2],
        q_par=spectra.q_par * factors[:, 3],
    )


@dataclass(frozen=True)
class DispersionScan:
    """Group velocities, gains and coupling weights over a saturation grid."""

    s: np.ndarray
    v1_over_c: np.ndarray
    v2_over_c: np.ndarray
    v3_over_c: np.ndarray
    gain_pperp: np.ndarray
    gain_ppar: np.ndarray
    gain_qperp: np.ndarray
    beta_delta: np.ndarray
    beta_sigma: np.ndarray
    singular_bins: tuple

    COLUMNS = (
        "s",
        "v1_over_c",
        "v2_over_c",
        "v3_over_c",
        "gain_pperp",
        "gain_ppar",
        "gain_qperp",
        "beta_delta",
        "beta_sigma",
    )

    def rows(self):
        for i in range(self.s.size):
            yield (
                self.s[i],
                self.v1_over_c[i],
                self.v2_over_c[i],
                self.v3_over_c[i],
                self.gain_pperp[i],
                self.gain_ppar[i],
                self.gain_qperp[i],
                self.beta_delta[i],
                self.beta_sigma[i],
            )


def dispersion_scan(
    medium: AtomicMedium, s_values, mode: str = "supplement"
) -> DispersionScan:
    """Evaluate the transfer matrix across a saturation grid.

    Gains are per cell length; the cell transmission of a quadrature is
    exp(gain * L).  Bins where an inverse group velocity changes sign or
    vanishes (the low-s divergence of v1 when eta*c/2*gamma_opt^2 >= 1)
    are reported as-is and flagged in ``singular_bins``.
    """
    s_values = np.asarray(s_values, dtype=float)
    if np.any(s_values < 0):
        raise ValueError("s_values must be > 0")
    n = s_values.size
    cols = {name: np.empty(n) for name in DispersionScan.COLUMNS if name != "s"}
    singular = []
    for i, s in enumerate(s_values):
        tm = transfer_matrix(medium, float(s), 0.0, mode=mode)
        co = coefficients(medium, float(s))
        cols["v1_over_c"][i] = tm.v1 / medium.c
        cols["v2_over_c"][i] = tm.v2 / medium.c
        cols["v3_over_c"][i] = tm.v3 / medium.c
        cols["gain_pperp"][i] = tm.gains[0]
        cols["gain_ppar"][i] = tm.gains[1]
        cols["gain_qperp"][i] = tm.gains[2]
        cols["beta_delta"][i] = co.beta_delta
        cols["beta_sigma"][i] = co.beta_sigma
        if not np.isfinite(tm.v1) or not np.isfinite(tm.v2) or not np.isfinite(tm.v3):
            singular.append(i)
        elif tm.v1 <= 0 or abs(tm.v1) > 1e6 * medium.c:
            singular.append(i)
    return DispersionScan(s=s_values, singular_bins=tuple(singular), **cols)
