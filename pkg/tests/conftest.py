import numpy as np
import pytest

from nibaspec import ResonatorParams, SystemParams, Thermal, effective_bath, tabulate


@pytest.fixture(scope="session")
def thermal():
    return Thermal(1.0)


@pytest.fixture(scope="session")
def bath_resonant(thermal):
    """Structured bath for the baseline operating point at zero detuning."""
    return effective_bath(ResonatorParams(omega=1.0, g=0.2, kappa=0.05))


@pytest.fixture(scope="session")
def corr_resonant(bath_resonant, thermal):
    return tabulate(bath_resonant, thermal, omega_max=2.0)


@pytest.fixture(scope="session")
def system():
    return SystemParams()


def spectrum(corr, system, omega_ps):
    """|T|^2 on a probe grid, one kernel evaluation per point."""
    from nibaspec import probe_response

    return np.array([probe_response(corr, system, float(w)).t_abs2 for w in omega_ps])
