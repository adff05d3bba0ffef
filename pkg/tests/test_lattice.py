import math

import numpy as np
import pytest

from anosov_lab.errors import NotHyperbolic
from anosov_lab.lattice import (
    IntMatrix2,
    check_pair_hypothesis,
    compose,
    eigen_data,
    invert,
    is_hyperbolic,
    power,
    standard_action_apply,
    torus_distance,
    wrap_point,
)

G1 = IntMatrix2.from_rows(((2, 1), (1, 1)))
G2 = IntMatrix2.from_rows(((1, 1), (1, 2)))

PHI = (1.0 + math.sqrt(5.0)) / 2.0  # golden ratio


def test_determinant_enforced():
    with pytest.raises(ValueError):
        IntMatrix2(1, 0, 0, 2)


def test_inverse_and_compose():
    assert compose(G1, invert(G1)) == IntMatrix2.from_rows(((1, 0), (0, 1)))
    assert power(G1, 3) == compose(G1, compose(G1, G1))
    assert power(G1, -1) == invert(G1)


def test_hyperbolicity_detection():
    assert is_hyperbolic(G1) and is_hyperbolic(G2)
    rotation = IntMatrix2.from_rows(((0, -1), (1, 0)))
    assert not is_hyperbolic(rotation)
    with pytest.raises(NotHyperbolic):
        eigen_data(rotation)


def test_eigen_oracle_gamma1():
    # [[2,1],[1,1]]: lambda_u = (3+sqrt(5))/2, v_u parallel to (1, 1/phi)
    e = eigen_data(G1)
    assert e.lambda_u == pytest.approx((3.0 + math.sqrt(5.0)) / 2.0, abs=1e-14)
    assert e.lambda_u * e.lambda_s == pytest.approx(1.0, abs=1e-14)
    slope_u = e.vu[1] / e.vu[0]
    slope_s = e.vs[1] / e.vs[0]
    assert slope_u == pytest.approx(1.0 / PHI, abs=1e-12)
    assert slope_s == pytest.approx(-PHI, abs=1e-12)


def test_eigenvector_residual():
    for m in (G1, G2, power(G1, 2), compose(G1, G2)):
        e = eigen_data(m)
        a = m.as_array()
        assert np.linalg.norm(a @ e.vu - e.signed_lambda_u * np.asarray(e.vu)) < 1e-12
        assert np.linalg.norm(a @ e.vs - e.signed_lambda_s * np.asarray(e.vs)) < 1e-12


def test_canonical_sign_convention():
    for m in (G1, G2, invert(G1), power(G2, 3)):
        e = eigen_data(m)
        for v in (e.vu, e.vs):
            assert v[0] > 0 or (v[0] == 0 and v[1] > 0)


def test_dual_basis_identity():
    e = eigen_data(G1)
    w_s, w_u = e.dual_basis()
    assert float(np.dot(w_s, e.vs)) == pytest.approx(1.0, abs=1e-12)
    assert float(np.dot(w_u, e.vu)) == pytest.approx(1.0, abs=1e-12)
    assert abs(float(np.dot(w_s, e.vu))) < 1e-12
    assert abs(float(np.dot(w_u, e.vs))) < 1e-12


def test_pair_hypothesis_standard_pair():
    cert = check_pair_hypothesis(eigen_data(G1), eigen_data(G2))
    assert cert.hypothesis_ok
    assert cert.min_pairwise_sine == pytest.approx(1.0 / math.sqrt(5.0), abs=1e-12)


def test_pair_hypothesis_fails_for_powers():
    cert = check_pair_hypothesis(eigen_data(G1), eigen_data(power(G1, 2)))
    assert not cert.hypothesis_ok
    assert cert.min_pairwise_sine == 0.0


def test_pair_hypothesis_fails_for_inverse():
    cert = check_pair_hypothesis(eigen_data(G1), eigen_data(invert(G1)))
    assert not cert.hypothesis_ok


def test_certificate_serialization_fields():
    doc = check_pair_hypothesis(eigen_data(G1), eigen_data(G2)).to_dict()
    for key in ("matrices", "eigenvalues", "eigenvectors", "min_pairwise_sine", "hypothesis_ok"):
        assert key in doc


def test_wrap_and_distance():
    assert np.allclose(wrap_point(np.array([1.25, -0.25])), [0.25, 0.75])
    assert torus_distance(np.array([0.95, 0.0]), np.array([0.05, 0.0])) == pytest.approx(0.1)


def test_standard_action_apply():
    x = np.array([0.3, 0.7])
    y = standard_action_apply(G1, x)
    assert np.allclose(y, np.mod(G1.as_array() @ x, 1.0))
