import numpy as np
import pytest

from anosov_lab.fourier import FourierPerturbation
from anosov_lab.lattice import IntMatrix2, eigen_data
from anosov_lab.maps import ConjugatedMap, PerturbedMap, build_diffeo
from anosov_lab.foliations import compute_line_field

GAMMA1 = ((2, 1), (1, 1))
GAMMA2 = ((1, 1), (1, 2))


@pytest.fixture(scope="session")
def e1():
    return eigen_data(IntMatrix2.from_rows(GAMMA1))


@pytest.fixture(scope="session")
def e2():
    return eigen_data(IntMatrix2.from_rows(GAMMA2))


@pytest.fixture(scope="session")
def linear_g1(e1):
    return PerturbedMap(e1, FourierPerturbation.zero())


@pytest.fixture(scope="session")
def linear_g2(e2):
    return PerturbedMap(e2, FourierPerturbation.zero())


@pytest.fixture(scope="session")
def linear_fields(linear_g1, linear_g2):
    return {
        "f1u": compute_line_field(linear_g1, "unstable"),
        "f1s": compute_line_field(linear_g1, "stable"),
        "f2u": compute_line_field(linear_g2, "unstable"),
        "f2s": compute_line_field(linear_g2, "stable"),
    }


@pytest.fixture(scope="session")
def phi02():
    # phi = id + (0.02 sin 2 pi x2, 0)
    q = FourierPerturbation.from_sin_cos([((0, 1), (0.02, 0.0), None)])
    return build_diffeo(q)


@pytest.fixture(scope="session")
def conj_g1(phi02, e1):
    return ConjugatedMap(phi02, e1)


@pytest.fixture(scope="session")
def conj_g2(phi02, e2):
    return ConjugatedMap(phi02, e2)
