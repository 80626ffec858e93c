import warnings

import pytest
from hypothesis import HealthCheck, settings

import cpo_storage as cs

settings.register_profile(
    "cpo", max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("cpo")


@pytest.fixture(scope="session")
def he_star():
    return cs.AtomicMedium.he_star()


@pytest.fixture(scope="session")
def he_star_decoupled():
    import dataclasses

    return dataclasses.replace(cs.AtomicMedium.he_star(), delta_z=0.0)


def analytic_quiet(medium, omega_d):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", cs.ValidityWarning)
        return cs.steady_state_analytic(medium, omega_d)


@pytest.fixture(scope="session")
def fig3_run(he_star):
    """Fig. 3 preset storage run, shared across behavioral tests."""
    from cpo_storage.core import US

    spec = cs.StorageSpec(
        medium=he_star, s_in=0.1, signal_tau=2.0 * US, t_cut=6.0 * US,
        storage=2.0 * US, tau_sw=0.05 * US,
    )
    return cs.storage_run(spec, keep_grids=True)
