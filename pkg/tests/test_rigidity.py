import numpy as np
import pytest

from anosov_lab.conjugacy import solve_conjugacy
from anosov_lab.errors import NonMonotoneG, SingularSystem
from anosov_lab.foliations import integrate_leaf
from anosov_lab.lattice import IntMatrix2, eigen_data, power
from anosov_lab.rigidity import (
    TranslationAction,
    factor_translation_linear,
    factor_translation_numeric,
    linearize_translation_action,
    teichmuller_experiment,
    translation_action_from_conjugacy,
    verify_action_regularity,
)


def _profile_action(fn, lo=-3.0, hi=3.0, step=1e-3):
    r = np.arange(lo, hi + step / 2, step)
    return TranslationAction.from_profile_samples(r, fn(r))


@pytest.fixture(scope="module")
def sine_action():
    # h(x) = x + 0.1 sin x, the weakly nonlinear reference profile
    return _profile_action(lambda r: r + 0.1 * np.sin(r))


def test_action_identity_and_flow(sine_action):
    y = np.linspace(-0.5, 0.5, 21)
    assert sine_action.identity_defect(y) < 1e-12
    assert sine_action.flow_defect(0.07, 0.13, y) < 1e-8


def test_nonmonotone_profile_rejected():
    r = np.linspace(-1, 1, 101)
    with pytest.raises(NonMonotoneG):
        TranslationAction.from_profile_samples(r, np.sin(4 * r))


def test_linearize_identity_translation():
    S = _profile_action(lambda r: r)
    lin = linearize_translation_action(S, 0.0, (-0.5, 0.5))
    assert lin.alpha == pytest.approx(1.0, abs=1e-10)
    assert lin.affinity_residual < 1e-10


def test_linearize_doubling_profile():
    # h(x) = 2x gives S(t, y) = y + 2t: g = id, alpha = 2
    S = _profile_action(lambda r: 2.0 * r)
    lin = linearize_translation_action(S, 0.0, (-0.5, 0.5))
    assert lin.alpha == pytest.approx(2.0, abs=1e-10)
    assert lin.affinity_residual < 1e-10


def test_linearize_sine_profile_alpha(sine_action):
    # oracle: alpha = h'(h^{-1}(0)) = 1 + 0.1 cos 0 = 1.1
    lin = linearize_translation_action(sine_action, 0.0, (-0.5, 0.5))
    assert lin.alpha == pytest.approx(1.1, abs=1e-6)
    assert lin.affinity_residual < 1e-8


def test_alpha_from_disjoint_subdomains(sine_action):
    lin_a = linearize_translation_action(sine_action, 0.0, (-0.5, 0.5),
                                         t_max=0.1)
    lin_b = linearize_translation_action(sine_action, 0.0, (-0.5, 0.5),
                                         t_max=0.25)
    assert lin_a.alpha == pytest.approx(lin_b.alpha, abs=1e-8)


def test_cocycle_identity(sine_action):
    lin = linearize_translation_action(sine_action, 0.0, (-0.5, 0.5))
    z = np.linspace(-0.2, 0.2, 9)
    for t in (0.02, 0.05):
        for s in (0.03, 0.07):
            lhs = lin.conjugated(t + s, z)
            rhs = lin.conjugated(s, lin.conjugated(t, z))
            assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_regularity_of_rigid_translation():
    S = _profile_action(lambda r: r)
    rep = verify_action_regularity(S, np.linspace(0, 0.1, 4), np.linspace(-0.4, 0.4, 17))
    assert np.allclose(rep.d_field, 1.0, atol=1e-10)
    assert rep.modulus_of_continuity < 1e-10


def test_regularity_smooth_profile(sine_action):
    rep = verify_action_regularity(sine_action, np.linspace(0, 0.1, 4),
                                   np.linspace(-0.4, 0.4, 17))
    assert rep.refinement_sup < 1e-4


def test_factor_linear_zero(e1, e2):
    res = factor_translation_linear(e1, e2, 0.0)
    assert res.slide_r == 0.0 and res.translation_t == 0.0


def test_factor_linear_standard_pair(e1, e2):
    res = factor_translation_linear(e1, e2, 1.0)
    assert res.translation_t == pytest.approx(-0.8090170, abs=1e-6)
    assert res.slide_r == pytest.approx(-1.8090170, abs=1e-6)
    # defining identity s v1s + r v2s = t v1u in slope normalization
    v = lambda w: np.asarray(w) / w[0]
    resid = 1.0 * v(e1.vs) + res.slide_r * v(e2.vs) - res.translation_t * v(e1.vu)
    assert np.linalg.norm(resid) < 1e-12


def test_factor_linear_in_s(e1, e2):
    t1 = factor_translation_linear(e1, e2, 0.4).translation_t
    t2 = factor_translation_linear(e1, e2, 0.8).translation_t
    assert t2 == pytest.approx(2 * t1, abs=1e-12)


def test_factor_singular_for_dependent_directions(e1):
    # the stable direction of A^{-1} is the unstable direction of A
    from anosov_lab.lattice import invert
    with pytest.raises(SingularSystem):
        factor_translation_linear(e1, eigen_data(invert(e1.matrix)), 1.0)


def test_factor_numeric_matches_linear(e1, e2, linear_fields):
    tau = integrate_leaf(linear_fields["f1u"], np.zeros(2), 3.0, centered=True)
    lin = factor_translation_linear(e1, e2, 1.0)
    num = factor_translation_numeric(
        linear_fields["f1s"], linear_fields["f2s"], tau, e1, e2, 1.0,
        span=(-0.1, 0.1))
    assert num.numeric_deviation < 1e-8
    assert num.translation_t == pytest.approx(lin.translation_t, abs=1e-10)


def test_factor_numeric_zero_slide(e1, e2, linear_fields):
    tau = integrate_leaf(linear_fields["f1u"], np.zeros(2), 2.0, centered=True)
    num = factor_translation_numeric(
        linear_fields["f1s"], linear_fields["f2s"], tau, e1, e2, 0.0,
        span=(-0.1, 0.1))
    assert num.numeric_deviation < 1e-10


def test_translation_action_from_identity_conjugacy(e1, linear_g1):
    h = solve_conjugacy(e1, linear_g1, n=64)
    S = translation_action_from_conjugacy(h, np.zeros(2), e1.vu, 0.3)
    y = np.linspace(-0.1, 0.1, 9)
    assert np.max(np.abs(S(0.05, y) - (y + 0.05))) < 1e-10


def test_translation_action_flow_from_smooth_conjugacy(e1, conj_g1):
    h = solve_conjugacy(e1, conj_g1, n=256)
    S = translation_action_from_conjugacy(h, np.zeros(2), e1.vu, 0.3)
    y = np.linspace(-0.1, 0.1, 9)
    assert S.identity_defect(y) < 1e-12
    assert S.flow_defect(0.04, 0.06, y) < 1e-8


def test_teichmuller_obstructed_for_single_generator(e1, perturbed_contrast):
    verdict = teichmuller_experiment(e1, perturbed_contrast)
    assert verdict.verdict == "obstructed"
    assert verdict.diagnostics["periodic_max_mismatch"] > 1e-4


@pytest.fixture(scope="module")
def perturbed_contrast(e1):
    from anosov_lab.fourier import FourierPerturbation
    from anosov_lab.maps import PerturbedMap
    p = FourierPerturbation.from_sin_cos([((0, 1), (0.03 / (2 * np.pi), 0.0), None)])
    return PerturbedMap(e1, p)
