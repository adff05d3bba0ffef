import numpy as np
import pytest

from anosov_lab.errors import Inconclusive, NotADiffeo
from anosov_lab.fourier import FourierPerturbation
from anosov_lab.lattice import IntMatrix2, eigen_data, invert
from anosov_lab.maps import (
    ComposedMap,
    ConeParams,
    ConjugatedMap,
    Diffeo,
    MarkedAction,
    PerturbedMap,
    build_diffeo,
    conjugated_action,
    verify_anosov_cones,
)

RNG = np.random.default_rng(11)


def _check_equivariance(handle, n=20):
    x = RNG.random((n, 2))
    k = RNG.integers(-2, 3, size=(n, 2)).astype(float)
    a = handle.linear_part.as_array()
    lhs = handle.lift(x + k)
    rhs = handle.lift(x) + k @ a.T
    assert np.allclose(lhs, rhs, atol=1e-9)


def _check_jacobian(handle, n=10, tol=1e-6):
    x = RNG.random((n, 2))
    jac = np.asarray([handle.jacobian(xi) for xi in x])
    h = 1e-6
    for axis in range(2):
        dx = np.zeros(2)
        dx[axis] = h
        fd = np.asarray([(handle.lift(xi + dx) - handle.lift(xi - dx)) / (2 * h) for xi in x])
        assert np.allclose(jac[:, :, axis], fd, atol=tol)


def _check_inverse(handle, n=15, tol=1e-10):
    x = RNG.random((n, 2))
    inv = handle.inverse()
    back = inv.apply(handle.apply(x))
    err = np.abs(back - x)
    err = np.minimum(err, 1.0 - err)
    assert np.max(err) < tol


@pytest.fixture(scope="module")
def perturbed(e1):
    p = FourierPerturbation.from_sin_cos([((0, 1), (0.004, 0.0), None),
                                          ((1, 0), None, (0.0, 0.003))])
    return PerturbedMap(e1, p)


def test_linear_map_matches_matrix(linear_g1, e1):
    x = RNG.random((8, 2))
    assert np.allclose(linear_g1.lift(x), x @ e1.matrix.as_array().T, atol=1e-14)
    assert np.allclose(linear_g1.displacement(x), 0.0, atol=1e-15)


def test_perturbed_map_contract(perturbed):
    _check_equivariance(perturbed)
    _check_jacobian(perturbed)
    _check_inverse(perturbed)


def test_diffeo_contract(phi02):
    x = RNG.random((10, 2))
    jac = np.asarray([phi02.derivative(xi) for xi in x])
    h = 1e-6
    for axis in range(2):
        dx = np.zeros(2)
        dx[axis] = h
        fd = np.asarray([(phi02.lift(xi + dx) - phi02.lift(xi - dx)) / (2 * h) for xi in x])
        assert np.allclose(jac[:, :, axis], fd, atol=1e-6)
    x = RNG.random((15, 2))
    back = phi02.inverse_lift(phi02.lift(x))
    assert np.allclose(back, x, atol=1e-11)


def test_diffeo_rejects_large_derivative():
    q = FourierPerturbation.from_sin_cos([((0, 1), (0.5, 0.0), None)])  # ||Dq|| ~ pi
    with pytest.raises(NotADiffeo):
        build_diffeo(q)


def test_conjugated_map_contract(conj_g1):
    _check_equivariance(conj_g1)
    _check_jacobian(conj_g1)
    _check_inverse(conj_g1)


def test_conjugated_map_is_conjugate(conj_g1, phi02, e1):
    x = RNG.random((10, 2))
    lhs = conj_g1.lift(phi02.lift(x))
    rhs = phi02.lift(x @ e1.matrix.as_array().T)
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_composed_map(linear_g1, linear_g2, e1, e2):
    comp = ComposedMap(linear_g1, linear_g2)
    x = RNG.random((6, 2))
    expected = linear_g1.lift(linear_g2.lift(x))
    assert np.allclose(comp.lift(x), expected, atol=1e-12)
    a = comp.linear_part.as_array()
    assert np.array_equal(a, e1.matrix.as_array() @ e2.matrix.as_array())


def test_marked_action_homotopy(phi02, e1, e2):
    action = conjugated_action(phi02, [e1, e2])
    assert action.homotopy_check()
    g = action.map_for(e1)
    assert g.linear_part == e1.matrix


def test_cone_verification_linear(linear_g1, e1):
    params = ConeParams(aperture=0.5, direction=tuple(e1.vu))
    ok, margin = verify_anosov_cones(linear_g1, params)
    assert ok
    assert margin > 1.5  # expansion at least lambda_u cos(aperture)-ish


def test_cone_verification_perturbed(perturbed, e1):
    params = ConeParams(aperture=0.5, direction=tuple(e1.vu))
    ok, margin = verify_anosov_cones(perturbed, params)
    assert ok and margin > 1.2


def test_cone_verification_conjugated(conj_g1, e1):
    params = ConeParams(aperture=0.6, direction=tuple(e1.vu))
    ok, margin = verify_anosov_cones(conj_g1, params)
    assert ok and margin > 1.1


def test_cone_margin_monotone_in_aperture(linear_g1, e1):
    margins = []
    for ap in (0.2, 0.5, 0.8):
        _, m = verify_anosov_cones(linear_g1, ConeParams(aperture=ap, direction=tuple(e1.vu)))
        margins.append(m)
    # wider cones admit directions closer to the stable one: weaker expansion
    assert margins[0] >= margins[1] >= margins[2]
