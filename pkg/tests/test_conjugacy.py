import numpy as np
import pytest

from anosov_lab.conjugacy import (
    compare_smooth_invariants,
    estimate_holder_exponent,
    find_periodic_points,
    solve_conjugacy,
)
from anosov_lab.fourier import FourierPerturbation
from anosov_lab.maps import PerturbedMap


@pytest.fixture(scope="module")
def h_conj(e1, conj_g1):
    return solve_conjugacy(e1, conj_g1, n=256)


@pytest.fixture(scope="module")
def perturbed_g1(e1):
    # ||Dp||_inf = 0.03
    p = FourierPerturbation.from_sin_cos([((0, 1), (0.03 / (2 * np.pi), 0.0), None)])
    return PerturbedMap(e1, p)


def test_zero_perturbation_gives_identity(e1, linear_g1):
    h = solve_conjugacy(e1, linear_g1, n=64)
    assert h.displacement.sup_norm == 0.0


def test_solved_conjugacy_matches_phi(h_conj, phi02):
    n = h_conj.displacement.grid_size
    idx = np.arange(n * n)
    grid = np.column_stack([(idx // n) / n, (idx % n) / n])
    expected = phi02.lift(grid)
    assert np.max(np.abs(h_conj.lift(grid) - expected)) < 1e-6


def test_conjugacy_residual(h_conj):
    assert h_conj.residual_on_grid(64) < 1e-9


def test_finer_grid_smaller_residual(e1, conj_g1):
    coarse = solve_conjugacy(e1, conj_g1, n=64).residual_on_grid(32)
    fine = solve_conjugacy(e1, conj_g1, n=512).residual_on_grid(32)
    assert fine <= coarse


def test_uniqueness_from_different_seeds(e1, conj_g1):
    n = 128
    h0 = solve_conjugacy(e1, conj_g1, n=n)
    rng = np.random.default_rng(42)
    u0 = 0.01 * rng.standard_normal((n * n, 2))
    h1 = solve_conjugacy(e1, conj_g1, n=n, u0=u0)
    assert np.max(np.abs(h0.displacement.values - h1.displacement.values)) < 1e-8


def test_secant_jacobian_identity_for_linear(e1, linear_g1):
    h = solve_conjugacy(e1, linear_g1, n=64)
    jac = h.secant_jacobian(np.array([0.3, 0.4]))
    assert np.allclose(jac, np.eye(2), atol=1e-10)


def test_periodic_counts_linear(e1, linear_g1):
    orbits1, fail1 = find_periodic_points(linear_g1, e1, 1)
    assert not fail1
    assert sum(len(o.points) for o in orbits1) == 1  # |det(A - I)| = 1
    orbits2, fail2 = find_periodic_points(linear_g1, e1, 2)
    assert not fail2
    assert sum(len(o.points) for o in orbits2) == 5  # |det(A^2 - I)| = 5


def test_periodic_counts_perturbed(e1, perturbed_g1):
    orbits, failures = find_periodic_points(perturbed_g1, e1, 2)
    assert not failures
    assert sum(len(o.points) for o in orbits) == 5


def test_multipliers_linear(e1, linear_g1):
    orbits, _ = find_periodic_points(linear_g1, e1, 2)
    for orb in orbits:
        assert abs(orb.mult_u) == pytest.approx(e1.lambda_u ** 2, rel=1e-10)
        assert orb.mult_u * orb.mult_s == pytest.approx(1.0, abs=1e-8)


def test_mismatch_zero_for_conjugated(e1, conj_g1):
    report = compare_smooth_invariants(conj_g1, e1, 2)
    assert not report.failures
    assert report.max_mismatch < 1e-10


def test_mismatch_positive_for_raw_perturbation(e1, perturbed_g1):
    report = compare_smooth_invariants(perturbed_g1, e1, 2)
    assert report.max_mismatch > 1e-4


def test_holder_exponent_near_one_for_smooth(e1, h_conj):
    exponent, stderr = estimate_holder_exponent(
        h_conj, e1.vu, scales=np.geomspace(1e-4, 1e-2, 7))
    assert exponent == pytest.approx(1.0, abs=1e-3)
    assert stderr < 1e-3
