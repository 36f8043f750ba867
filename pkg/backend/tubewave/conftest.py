import os
import sys

import numpy as np
import pytest

HERE = os.path.dirname(os.path.abspath(__file__))
if HERE not in sys.path:
    sys.path.insert(0, HERE)

from dispersion import TubeSystem, build_context  # noqa: E402
from rheology import ModelClass, RheologySpectrum  # noqa: E402
from wall_profile import make_profile  # noqa: E402

REGRESSION_DIR = os.path.join(HERE, "regression")
OMEGA = 2.0 * np.pi


@pytest.fixture
def tube():
    # c0² = hE/(2Rρ_f) = 10 m²/s²
    return TubeSystem(R=0.01, h=0.001, rho_f=1000.0, rho_m_inf=1200.0, E_inf=2.0e5)


@pytest.fixture
def newtonian():
    return RheologySpectrum(eta=2.0)


@pytest.fixture
def homogeneous_ctx(tube, newtonian):
    return build_context(tube, newtonian, make_profile("Homogeneous"), OMEGA, 40.0)


@pytest.fixture
def bump_ctx(tube, newtonian):
    profile = make_profile(
        "ExponentialBump", {"amplitude": 0.1, "decay_rate": 1.0}, g2_family="Homogeneous"
    )
    return build_context(tube, newtonian, profile, OMEGA, 40.0)


@pytest.fixture
def maxwell_ctx(tube):
    spec = RheologySpectrum(lambdas=(0.1,), eta=2.0, model_class=ModelClass.INSTANTANEOUS_ELASTIC)
    profile = make_profile(
        "ExponentialBump", {"amplitude": 0.1, "decay_rate": 1.0}, g2_family="Homogeneous"
    )
    return build_context(tube, spec, profile, OMEGA, 40.0)


@pytest.fixture
def grid():
    return np.linspace(0.0, 40.0, 200)


@pytest.fixture
def regression_dir():
    return REGRESSION_DIR
