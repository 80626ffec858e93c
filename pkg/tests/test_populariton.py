import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import cpo_storage as cs
from cpo_storage.core import US

SQ2 = math.sqrt(2.0)


class TestMixingAngle:
    def test_strong_drive_pure_light(self, he_star):
        assert cs.mixing_angle(he_star, 1e9) == pytest.approx(0.0, abs=1e-6)

    def test_zero_drive_pure_matter(self, he_star):
        assert cs.mixing_angle(he_star, 0.0) == pytest.approx(math.pi / 2)

    def test_balanced_point(self, he_star):
        om = math.sqrt(he_star.eta * he_star.c / 2.0)
        assert cs.mixing_angle(he_star, om) == pytest.approx(math.pi / 4, rel=1e-12)

    def test_vectorized(self, he_star):
        th = cs.mixing_angle(he_star, np.array([0.0, 1.0, 1e6]))
        assert th.shape == (3,)
        assert th[0] == pytest.approx(math.pi / 2)

    def test_negative_rejected(self, he_star):
        with pytest.raises(ValueError):
            cs.mixing_angle(he_star, -1.0)


class TestCompose:
    def test_storage_phase_pure_matter(self, he_star):
        # Theta = pi/2: only the population part remains, in both
        # normalizations (the light weight multiplies a zero)
        root8 = math.sqrt(he_star.eta * he_star.c / 8.0)
        for norm in ("main-text", "supplement"):
            p = cs.compose(0.0, 0.01, math.pi / 2, s=0.0, medium=he_star, normalization=norm)
            assert p.value == pytest.approx(-root8 * 0.01, rel=1e-12)

    def test_pure_light_limit(self, he_star):
        p = cs.compose(0.7, 0.0, 0.0, s=0.0, medium=he_star)
        assert p.value == pytest.approx(0.7, rel=1e-12)

    def test_normalization_weight(self, he_star):
        main = cs.compose(1.0, 0.0, 0.3, s=1.0, medium=he_star, normalization="main-text")
        supp = cs.compose(1.0, 0.0, 0.3, s=1.0, medium=he_star, normalization="supplement")
        assert supp.value == pytest.approx(main.value / 2.0, rel=1e-12)

    def test_symmetric_mode_weight(self, he_star):
        anti = cs.compose(0.0, 0.02, math.pi / 2, 0.0, medium=he_star, mode="antisymmetric")
        sym = cs.compose(0.0, 0.02, math.pi / 2, 0.0, medium=he_star, mode="symmetric")
        assert sym.value == pytest.approx(3.0 * anti.value, rel=1e-12)

    @given(
        st.floats(-1, 1), st.floats(-1, 1), st.floats(-0.01, 0.01),
        st.floats(-0.01, 0.01), st.floats(0, math.pi / 2),
    )
    def test_linearity(self, q1, q2, r1, r2, theta):
        m = cs.AtomicMedium.he_star()
        a = cs.compose(q1, r1, theta, 0.5, medium=m).value
        b = cs.compose(q2, r2, theta, 0.5, medium=m).value
        ab = cs.compose(q1 + q2, r1 + r2, theta, 0.5, medium=m).value
        assert ab == pytest.approx(a + b, rel=1e-9, abs=1e-12)


@pytest.fixture(scope="module")
def steady_write_run(he_star):
    """Constant drive at s=0.1, narrowband gaussian: transport-law testbed."""
    level = cs.omega_d_for_saturation(he_star, 0.1)
    drive = cs.DriveProfile(schedule=(), initial_level=level)
    tau = 25.0 * US
    grid = cs.SimGrid(n_z=64, dt=0.05, t_end=4.0 * tau + 3.6 * tau + 100.0)
    sig = cs.SignalPulse.gaussian(peak=1e-3 * level, tau=tau, t_center=4.0 * tau)
    return cs.run_sequence(he_star, drive, sig, grid, keep_grids=True)


@pytest.fixture(scope="module")
def validity_window_run(he_star):
    """Storage run at s_in=1 with s(z) inside the stated validity window."""
    m = he_star.with_depth(1.2)
    spec = cs.StorageSpec(
        medium=m, s_in=1.0, signal_tau=2.0 * US, t_cut=6.0 * US, storage=3.0 * US
    )
    return cs.storage_run(spec, keep_grids=True), m


class TestAdiabaticIdentities:
    def test_cos_theta_relation(self, steady_write_run, he_star):
        # cos(T) P = [1 - sin^2(T) (gamma_opt/|O_D|^2) d/dt] Q_perp to first
        # order in the slow derivative, at the validity level beta_delta ~ 1;
        # at s = 0.1 the residual budget is the distance of beta_delta from 1
        res = steady_write_run
        i = 1  # entrance-adjacent slice: s == s_in
        q = res.q_perp_zt[i]
        rd = res.rho_delta_zt[i]
        drv = res.drive_zt[i]
        theta = cs.mixing_angle(he_star, drv)
        pol = cs.compose(
            q, rd, theta, res.s_profile[i], medium=he_star, normalization="main-text"
        ).value
        dt = res.grid.dt
        dq = np.gradient(q, dt)
        rhs = q - np.sin(theta) ** 2 * (he_star.gamma_opt / drv**2) * dq
        lhs = np.cos(theta) * pol
        win = np.abs(q) > 0.2 * np.abs(q).max()
        resid = np.linalg.norm(lhs[win] - rhs[win]) / np.linalg.norm(rhs[win])
        co = cs.coefficients(he_star, res.s_profile[i])
        assert resid < 2.0 * (1.0 - co.beta_delta)

    def test_sin_theta_relation(self, steady_write_run, he_star):
        # sin(T) P = -sqrt(eta c/8) [1 + cos^2(T) (gamma_opt/|O_D|^2) d/dt] rho_delta
        res = steady_write_run
        i = 1
        q = res.q_perp_zt[i]
        rd = res.rho_delta_zt[i]
        drv = res.drive_zt[i]
        theta = cs.mixing_angle(he_star, drv)
        pol = cs.compose(
            q, rd, theta, res.s_profile[i], medium=he_star, normalization="main-text"
        ).value
        dt = res.grid.dt
        drd = np.gradient(rd, dt)
        root8 = math.sqrt(he_star.eta * he_star.c / 8.0)
        rhs = -root8 * (rd + np.cos(theta) ** 2 * (he_star.gamma_opt / drv**2) * drd)
        lhs = np.sin(theta) * pol
        win = np.abs(rd) > 0.2 * np.abs(rd).max()
        resid = np.linalg.norm(lhs[win] - rhs[win]) / np.linalg.norm(rhs[win])
        assert resid < 0.05


class TestCheckTransport:
    def test_residual_small_in_validity_window(self, validity_window_run):
        res, m = validity_window_run
        rep = cs.check_transport(res, m)
        assert rep.residual_l2 < 0.10

    def test_storage_decay_is_transit_rate(self, validity_window_run):
        res, m = validity_window_run
        rep = cs.check_transport(res, m)
        assert rep.storage_decay_rate == pytest.approx(m.gamma_t, rel=0.05)

    def test_gain_fit(self, validity_window_run):
        res, m = validity_window_run
        rep = cs.check_transport(res, m)
        assert rep.fitted_gain == pytest.approx(rep.predicted_gain, rel=0.15)

    def test_effective_velocity_fit(self, steady_write_run, he_star):
        # pulse-delay fit against v3/(2 - cos^4 Theta) during steady writing
        rep = cs.check_transport(steady_write_run, he_star)
        assert rep.fitted_velocity is not None
        assert rep.fitted_velocity == pytest.approx(rep.predicted_velocity, rel=0.10)
        # the populariton crawls at about half the already-slow v3
        v3_in = cs.transfer_matrix(he_star, 0.1, 0.0).v3
        assert rep.fitted_velocity < 0.75 * v3_in

    def test_validity_error_outside_window(self, he_star):
        spec = cs.StorageSpec(medium=he_star, s_in=0.02, t_end=15.0 * US)
        res = cs.storage_run(spec, keep_grids=True)
        with pytest.raises(cs.ValidityError):
            cs.check_transport(res, he_star)

    def test_requires_grids(self, he_star):
        spec = cs.StorageSpec(medium=he_star, s_in=0.2, t_end=15.0 * US)
        res = cs.storage_run(spec, keep_grids=False)
        with pytest.raises(ValueError):
            cs.check_transport(res, he_star)


class TestQPerpTransport:
    def test_static_monochromatic_residual(self, he_star):
        # a held-constant signal (omega = 0 exactly): the relation reduces
        # to the static transfer-matrix balance
        from cpo_storage.core import smoothstep

        level = cs.omega_d_for_saturation(he_star, 0.1)
        drive = cs.DriveProfile(schedule=(), initial_level=level)

        def env(t):
            return 1e-3 * level * 1j * smoothstep(np.asarray(t) / 40.0)

        sig = cs.SignalPulse(envelope=env, peak=1e-3 * level)
        # the depleted cell end relaxes at the local CPO linewidth (~68
        # units here); the record must outlast that transient
        grid = cs.SimGrid(n_z=48, dt=0.05, t_end=700.0)
        res = cs.run_sequence(he_star, drive, sig, grid, keep_grids=True)
        rep = cs.q_perp_transport_residual(res, he_star, window=(600.0, 695.0))
        assert rep.residual_l2 < 1e-3

    def test_gaussian_residual_at_moderate_bandwidth(self, steady_write_run, he_star):
        rep = cs.q_perp_transport_residual(steady_write_run, he_star)
        assert rep.residual_l2 < 0.05

    def test_zero_signal_zero_residual(self, he_star):
        level = cs.omega_d_for_saturation(he_star, 0.2)
        drive = cs.DriveProfile(schedule=(), initial_level=level)
        sig = cs.SignalPulse(envelope=lambda t: np.zeros_like(t, dtype=complex), peak=0.0)
        grid = cs.SimGrid(n_z=32, dt=0.05, t_end=40.0)
        res = cs.run_sequence(he_star, drive, sig, grid, keep_grids=True)
        rep = cs.q_perp_transport_residual(res, he_star)
        assert rep.residual_l2 == 0.0

    def test_residual_grows_quadratically_with_bandwidth(self, he_star):
        # the first-order relation degrades as the signal bandwidth
        # approaches the CPO linewidth; log-log slope ~ 2
        level = cs.omega_d_for_saturation(he_star, 0.1)
        dcpo = cs.cpo_linewidth(he_star, level)
        drive = cs.DriveProfile(schedule=(), initial_level=level)
        resids = []
        taus_rel = np.array([16.0, 8.0, 4.0])
        for tr in taus_rel:
            tau = tr / dcpo
            grid = cs.SimGrid(n_z=32, dt=0.05, t_end=8.0 * tau + 60.0)
            sig = cs.SignalPulse.gaussian(peak=1e-3 * level, tau=tau, t_center=4.0 * tau)
            res = cs.run_sequence(he_star, drive, sig, grid, keep_grids=True)
            resids.append(cs.q_perp_transport_residual(res, he_star).residual_l2)
        bw = 1.0 / taus_rel
        slope = np.polyfit(np.log(bw), np.log(resids), 1)[0]
        assert 1.5 < slope < 2.5


class TestStoragePurity:
    def test_theta_pure_matter_when_drive_off(self, fig3_run):
        res = fig3_run
        t = res.t
        stor = (t > res.t_cut + 0.3 * US) & (t < res.t_retrieve - 0.1 * US)
        assert np.abs(res.q_perp_zt[:, stor]).max() < 1e-10
        # populariton equals the matter part alone during storage
        root8 = math.sqrt(res.medium.eta * res.medium.c / 8.0)
        matter = -root8 * res.rho_delta_out[stor]
        assert np.allclose(res.populariton_out[stor], matter, rtol=1e-9, atol=1e-30)

    def test_populariton_decays_at_gamma_t(self, fig3_run, he_star):
        from cpo_storage.populariton import storage_decay_rate

        rate = storage_decay_rate(fig3_run, fig3_run.populariton_out)
        assert rate == pytest.approx(he_star.gamma_t, rel=0.05)
