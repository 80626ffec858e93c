"""Hot inner loops of the Bloch integrators, JIT-compiled when numba is available.

Every kernel operates on plain scalars and contiguous arrays so the same
source runs compiled or interpreted (set CPO_STORAGE_PURE_PYTHON=1 to force
the interpreted path when debugging).

State layout: (coh_e1, coh_em1, coh_raman) complex, (pop_p1, pop_m1) real.
Equations are the rotating-frame optical Bloch equations of the driven
lambda system with transit loss/feeding, spontaneous cross-feeding and
Zeeman-split ground states; the excited population is eliminated through
trace closure.
"""

from __future__ import annotations

import os

import numpy as np

_PURE = os.environ.get("CPO_STORAGE_PURE_PYTHON", "") not in ("", "0")

if not _PURE:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        _PURE = True

if _PURE:  # pragma: no cover

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


@njit(cache=True)
def bloch_rhs_raw(
    c1,
    c2,
    rr,
    p1,
    m1,
    om_p,
    om_m,
    gamma0,
    gamma_opt,
    gamma_t,
    gamma_r,
    delta_z,
    delta_d,
    include_raman,
):
    """Time derivative of the five Bloch variables under the total field."""
    pop_term1 = 1.0 - 2.0 * p1 - m1
    pop_term2 = 1.0 - p1 - 2.0 * m1
    dc1 = (
        -(gamma_opt - 1j * (delta_d + delta_z)) * c1
        - 1j * pop_term1 * om_m
        + 1j * np.conj(rr) * om_p
    )
    dc2 = (
        -(gamma_opt - 1j * (delta_d - delta_z)) * c2
        + 1j * rr * om_m
        - 1j * pop_term2 * om_p
    )
    if include_raman:
        drr = -(gamma_r + 2j * delta_z) * rr + 1j * (
            c2 * np.conj(om_m) - np.conj(c1) * om_p
        )
    else:
        drr = 0.0j
    feed = 0.5 * (gamma0 + gamma_t)
    dp1 = (
        -(gamma_t + 0.5 * gamma0) * p1
        - 0.5 * gamma0 * m1
        + 2.0 * (np.conj(c1) * om_m).imag
        + feed
    )
    dm1 = (
        -(gamma_t + 0.5 * gamma0) * m1
        - 0.5 * gamma0 * p1
        + 2.0 * (np.conj(c2) * om_p).imag
        + feed
    )
    return dc1, dc2, drr, dp1, dm1


@njit(cache=True)
def eliminated_coherences(
    rr, p1, m1, om_p, om_m, gamma_opt, delta_z, delta_d, include_raman
):
    """Quasi-steady optical coherences (their equations solved with dt -> 0)."""
    if include_raman:
        src1 = -1j * (1.0 - 2.0 * p1 - m1) * om_m + 1j * np.conj(rr) * om_p
        src2 = 1j * rr * om_m - 1j * (1.0 - p1 - 2.0 * m1) * om_p
    else:
        src1 = -1j * (1.0 - 2.0 * p1 - m1) * om_m
        src2 = -1j * (1.0 - p1 - 2.0 * m1) * om_p
    c1 = src1 / (gamma_opt - 1j * (delta_d + delta_z))
    c2 = src2 / (gamma_opt - 1j * (delta_d - delta_z))
    return c1, c2


@njit(cache=True)
def _slow_rhs(
    rr, p1, m1, om_p, om_m, gamma0, gamma_opt, gamma_t, gamma_r, delta_z, delta_d, include_raman
):
    c1, c2 = eliminated_coherences(
        rr, p1, m1, om_p, om_m, gamma_opt, delta_z, delta_d, include_raman
    )
    if include_raman:
        drr = -(gamma_r + 2j * delta_z) * rr + 1j * (
            c2 * np.conj(om_m) - np.conj(c1) * om_p
        )
    else:
        drr = 0.0j
    feed = 0.5 * (gamma0 + gamma_t)
    dp1 = (
        -(gamma_t + 0.5 * gamma0) * p1
        - 0.5 * gamma0 * m1
        + 2.0 * (np.conj(c1) * om_m).imag
        + feed
    )
    dm1 = (
        -(gamma_t + 0.5 * gamma0) * m1
        - 0.5 * gamma0 * p1
        + 2.0 * (np.conj(c2) * om_p).imag
        + feed
    )
    return drr, dp1, dm1


@njit(cache=True)
def integrate_slice(
    om_p,
    om_m,
    dt,
    c1,
    c2,
    rr,
    p1,
    m1,
    gamma0,
    gamma_opt,
    gamma_t,
    gamma_r,
    delta_z,
    delta_d,
    mode_full,
    include_raman,
    out_c1,
    out_c2,
    out_rr,
    out_p1,
    out_m1,
):
    """RK4-integrate one spatial slice over the whole time line.

    ``om_p``/``om_m`` give the local total field on the time grid; fields at
    RK4 half steps are linearly interpolated. Writes the state time series
    into the ``out_*`` arrays and returns 0, or the step index at which the
    state norm exceeded 10 (stability failure).
    """
    n = om_p.shape[0]
    if not mode_full:
        c1, c2 = eliminated_coherences(
            rr, p1, m1, om_p[0], om_m[0], gamma_opt, delta_z, delta_d, include_raman
        )
    out_c1[0] = c1
    out_c2[0] = c2
    out_rr[0] = rr
    out_p1[0] = p1
    out_m1[0] = m1
    half = 0.5 * dt
    sixth = dt / 6.0
    for k in range(n - 1):
        fp0 = om_p[k]
        fm0 = om_m[k]
        fp1 = om_p[k + 1]
        fm1 = om_m[k + 1]
        fph = 0.5 * (fp0 + fp1)
        fmh = 0.5 * (fm0 + fm1)
        if mode_full:
            a1, a2, a3, a4, a5 = bloch_rhs_raw(
                c1, c2, rr, p1, m1, fp0, fm0,
                gamma0, gamma_opt, gamma_t, gamma_r, delta_z, delta_d, include_raman,
            )
            b1, b2, b3, b4, b5 = bloch_rhs_raw(
                c1 + half * a1, c2 + half * a2, rr + half * a3,
                p1 + half * a4, m1 + half * a5, fph, fmh,
                gamma0, gamma_opt, gamma_t, gamma_r, delta_z, delta_d, include_raman,
            )
            g1, g2, g3, g4, g5 = bloch_rhs_raw(
                c1 + half * b1, c2 + half * b2, rr + half * b3,
                p1 + half * b4, m1 + half * b5, fph, fmh,
                gamma0, gamma_opt, gamma_t, gamma_r, delta_z, delta_d, include_raman,
            )
            d1, d2, d3, d4, d5 = bloch_rhs_raw(
                c1 + dt * g1, c2 + dt * g2, rr + dt * g3,
                p1 + dt * g4, m1 + dt * g5, fp1, fm1,
                gamma0, gamma_opt, gamma_t, gamma_r, delta_z, delta_d, include_raman,
            )
            c1 = c1 + sixth * (a1 + 2.0 * (b1 + g1) + d1)
            c2 = c2 + sixth * (a2 + 2.0 * (b2 + g2) + d2)
            rr = rr + sixth * (a3 + 2.0 * (b3 + g3) + d3)
            p1 = p1 + sixth * (a4 + 2.0 * (b4 + g4) + d4)
            m1 = m1 + sixth * (a5 + 2.0 * (b5 + g5) + d5)
        else:
            a3, a4, a5 = _slow_rhs(
                rr, p1, m1, fp0, fm0,
                gamma0, gamma_opt, gamma_t, gamma_r, delta_z, delta_d, include_raman,
            )
            b3, b4, b5 = _slow_rhs(
                rr + half * a3, p1 + half * a4, m1 + half * a5, fph, fmh,
                gamma0, gamma_opt, gamma_t, gamma_r, delta_z, delta_d, include_raman,
            )
            g3, g4, g5 = _slow_rhs(
                rr + half * b3, p1 + half * b4, m1 + half * b5, fph, fmh,
                gamma0, gamma_opt, gamma_t, gamma_r, delta_z, delta_d, include_raman,
            )
            d3, d4, d5 = _slow_rhs(
                rr + dt * g3, p1 + dt * g4, m1 + dt * g5, fp1, fm1,
                gamma0, gamma_opt, gamma_t, gamma_r, delta_z, delta_d, include_raman,
            )
            rr = rr + sixth * (a3 + 2.0 * (b3 + g3) + d3)
            p1 = p1 + sixth * (a4 + 2.0 * (b4 + g4) + d4)
            m1 = m1 + sixth * (a5 + 2.0 * (b5 + g5) + d5)
            c1, c2 = eliminated_coherences(
                rr, p1, m1, fp1, fm1, gamma_opt, delta_z, delta_d, include_raman
            )
        if (
            abs(c1) > 10.0
            or abs(c2) > 10.0
            or abs(rr) > 10.0
            or abs(p1) > 10.0
            or abs(m1) > 10.0
        ):
            return k + 1
        out_c1[k + 1] = c1
        out_c2[k + 1] = c2
        out_rr[k + 1] = rr
        out_p1[k + 1] = p1
        out_m1[k + 1] = m1
    return 0


@njit(cache=True)
def relax_to_steady_state(
    om_p,
    om_m,
    dt,
    n_max,
    tol,
    check_every,
    c1,
    c2,
    rr,
    p1,
    m1,
    gamma0,
    gamma_opt,
    gamma_t,
    gamma_r,
    delta_z,
    delta_d,
    include_raman,
):
    """March the full-stiff system under a constant field until the
    per-step state change falls below ``tol``.  Returns (state..., steps, converged).
    """
    half = 0.5 * dt
    sixth = dt / 6.0
    for k in range(n_max):
        a1, a2, a3, a4, a5 = bloch_rhs_raw(
            c1, c2, rr, p1, m1, om_p, om_m,
            gamma0, gamma_opt, gamma_t, gamma_r, delta_z, delta_d, include_raman,
        )
        b1, b2, b3, b4, b5 = bloch_rhs_raw(
            c1 + half * a1, c2 + half * a2, rr + half * a3,
            p1 + half * a4, m1 + half * a5, om_p, om_m,
            gamma0, gamma_opt, gamma_t, gamma_r, delta_z, delta_d, include_raman,
        )
        g1, g2, g3, g4, g5 = bloch_rhs_raw(
            c1 + half * b1, c2 + half * b2, rr + half * b3,
            p1 + half * b4, m1 + half * b5, om_p, om_m,
            gamma0, gamma_opt, gamma_t, gamma_r, delta_z, delta_d, include_raman,
        )
        d1, d2, d3, d4, d5 = bloch_rhs_raw(
            c1 + dt * g1, c2 + dt * g2, rr + dt * g3,
            p1 + dt * g4, m1 + dt * g5, om_p, om_m,
            gamma0, gamma_opt, gamma_t, gamma_r, delta_z, delta_d, include_raman,
        )
        c1 = c1 + sixth * (a1 + 2.0 * (b1 + g1) + d1)
        c2 = c2 + sixth * (a2 + 2.0 * (b2 + g2) + d2)
        rr = rr + sixth * (a3 + 2.0 * (b3 + g3) + d3)
        p1 = p1 + sixth * (a4 + 2.0 * (b4 + g4) + d4)
        m1 = m1 + sixth * (a5 + 2.0 * (b5 + g5) + d5)
        if k % check_every == 0:
            # max-norm of the state derivative scaled to a per-step change
            e1, e2, e3, e4, e5 = bloch_rhs_raw(
                c1, c2, rr, p1, m1, om_p, om_m,
                gamma0, gamma_opt, gamma_t, gamma_r, delta_z, delta_d, include_raman,
            )
            step_change = (
                max(abs(e1), max(abs(e2), max(abs(e3), max(abs(e4), abs(e5))))) * dt
            )
            if step_change < tol:
                return c1, c2, rr, p1, m1, k + 1, True
    return c1, c2, rr, p1, m1, n_max, False
