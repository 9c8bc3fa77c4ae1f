import math

import numpy as np
import pytest

from sensejam import (
    SingularFisher,
    TargetSet,
    UlaGeometry,
    crb,
    det_crb,
    fim_blocks,
    fim_oracle,
    fisher_matrix,
    ml_estimate,
    simulate_echo,
    steering,
)
from conftest import random_psd


def _random_instance(rng, n=None):
    n = n or int(rng.choice([2, 4, 8, 12]))
    geom = UlaGeometry(n, 0.5)
    theta = float(rng.uniform(np.radians(-80), np.radians(80)))
    beta = complex(rng.uniform(0.1, 10.0) * np.exp(1j * rng.uniform(0, 2 * np.pi)))
    w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return geom, TargetSet(angles=(theta,), betas=(beta,)), w


def test_targetset_validation():
    with pytest.raises(ValueError):
        TargetSet(angles=(), betas=())
    with pytest.raises(ValueError):
        TargetSet(angles=(0.1,), betas=(1 + 0j, 2 + 0j))


def test_blocks_zero_covariance():
    geom = UlaGeometry(6)
    t = TargetSet(angles=(0.3,), betas=(2 + 1j,))
    b = fim_blocks(np.zeros((6, 6)), t, geom, geom)
    assert np.all(b.f11 == 0) and np.all(b.f12 == 0) and np.all(b.f22 == 0)


def test_blocks_identity_covariance_f22():
    nt, nr = 5, 7
    gt, gr = UlaGeometry(nt), UlaGeometry(nr)
    t = TargetSet(angles=(0.4,), betas=(1 + 0j,))
    b = fim_blocks(np.eye(nt, dtype=complex), t, gt, gr)
    assert math.isclose(float(b.f22.real[0, 0]), nr * nt, rel_tol=1e-12)
    assert abs(float(b.f22.imag[0, 0])) <= 1e-12


def test_blocks_dimension_mismatch():
    geom = UlaGeometry(6)
    t = TargetSet(angles=(0.0,), betas=(1 + 0j,))
    with pytest.raises(ValueError):
        fim_blocks(np.zeros((4, 4)), t, geom, geom)


def test_fisher_matrix_prefactor_and_symmetry():
    rng = np.random.default_rng(11)
    geom, t, w = _random_instance(rng, 6)
    R = np.outer(w, w.conj())
    b = fim_blocks(R, t, geom, geom)
    f1 = fisher_matrix(b, 1.0)
    f2 = fisher_matrix(b, 2.0)
    assert np.allclose(f1, 2 * f2, rtol=1e-12)
    assert np.abs(f1 - f1.T).max() <= 1e-10 * np.abs(f1).max()
    f_snap = fisher_matrix(b, 1.0, snapshots=3)
    assert np.allclose(f_snap, 3 * f1, rtol=1e-12)


def test_analytic_matches_oracle():
    rng = np.random.default_rng(5)
    for _ in range(30):
        geom, t, w = _random_instance(rng)
        R = np.outer(w, w.conj())
        fa = fisher_matrix(fim_blocks(R, t, geom, geom), 1.0)
        fo = fim_oracle(w, t, 1.0, geom, geom)
        assert np.linalg.norm(fa - fo) / np.linalg.norm(fo) <= 1e-6


def test_oracle_matches_for_two_targets():
    rng = np.random.default_rng(6)
    geom = UlaGeometry(6)
    for _ in range(5):
        th = np.sort(rng.uniform(np.radians(-70), np.radians(70), size=2))
        betas = tuple(rng.standard_normal(2) + 1j * rng.standard_normal(2))
        t = TargetSet(angles=tuple(float(x) for x in th), betas=betas)
        w = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        fa = fisher_matrix(fim_blocks(np.outer(w, w.conj()), t, geom, geom), 1.0)
        fo = fim_oracle(w, t, 1.0, geom, geom)
        assert np.linalg.norm(fa - fo) / np.linalg.norm(fo) <= 1e-6


def test_linearity_in_covariance():
    rng = np.random.default_rng(8)
    geom, t, _ = _random_instance(rng, 5)
    r1 = random_psd(rng, 5)
    r2 = random_psd(rng, 5)
    f = lambda R: fisher_matrix(fim_blocks(R, t, geom, geom), 1.0)
    lhs = f(r1 + r2)
    rhs = f(r1) + f(r2)
    assert np.abs(lhs - rhs).max() <= 1e-10 * np.abs(rhs).max()


def test_general_covariance_equals_rank_one_sum():
    rng = np.random.default_rng(9)
    geom, t, _ = _random_instance(rng, 4)
    R = random_psd(rng, 4)
    evals, vecs = np.linalg.eigh(R)
    total = np.zeros((3, 3))
    for lam, v in zip(evals, vecs.T):
        total += lam * fim_oracle(v, t, 1.0, geom, geom)
    analytic = fisher_matrix(fim_blocks(R, t, geom, geom), 1.0)
    assert np.linalg.norm(analytic - total) / np.linalg.norm(total) <= 1e-6


def test_fisher_psd_for_random_psd_covariance():
    rng = np.random.default_rng(10)
    for _ in range(10):
        geom, t, _ = _random_instance(rng, 6)
        F = fisher_matrix(fim_blocks(random_psd(rng, 6), t, geom, geom), 1.0)
        evals = np.linalg.eigvalsh(F)
        assert evals.min() >= -1e-8 * np.trace(F)


def test_crb_identity_and_inverse():
    F = 4.0 * np.eye(3)
    phi = crb(F)
    assert np.allclose(phi, 0.25 * np.eye(3), rtol=1e-12)
    rng = np.random.default_rng(12)
    geom, t, w = _random_instance(rng, 8)
    F = fisher_matrix(fim_blocks(np.outer(w, w.conj()) + 0.1 * np.eye(8), t, geom, geom), 1.0)
    phi = crb(F)
    assert np.abs(phi @ F - np.eye(3)).max() <= 1e-8
    assert np.all(np.diag(phi) > 0)


def test_crb_handles_badly_scaled_but_regular_matrices():
    # Pure diagonal scaling must not be mistaken for rank deficiency.
    F = np.array([[1e-13, 1e-10, 0.0], [1e-10, 100.0, 0.0], [0.0, 0.0, 100.0]])
    phi = crb(F)
    assert np.abs(phi @ F - np.eye(3)).max() <= 1e-8


def test_crb_singular_when_target_unlit():
    # Covariance whose null space contains the broadside steering vector:
    # no echo energy reaches the target direction, so the angle is
    # unidentifiable.
    n = 6
    geom = UlaGeometry(n)
    a = steering(geom, 0.0)
    proj = np.eye(n) - np.outer(a, a.conj()) / n
    t = TargetSet(angles=(0.0,), betas=(1 + 0j,))
    F = fisher_matrix(fim_blocks(proj @ proj.conj().T, t, geom, geom), 1.0)
    with pytest.raises(SingularFisher):
        crb(F)


def test_det_crb_values():
    F = np.diag([2.0, 4.0, 8.0])
    assert math.isclose(det_crb(F), 1.0 / 64.0, rel_tol=1e-12)
    with pytest.raises(SingularFisher):
        det_crb(np.diag([1.0, -1.0, 1.0]))


def test_det_crb_scaling_power():
    rng = np.random.default_rng(13)
    geom, t, _ = _random_instance(rng, 5)
    R = random_psd(rng, 5)
    f = lambda X: fisher_matrix(fim_blocks(X, t, geom, geom), 1.0)
    c = 3.7
    ratio = det_crb(f(c * R)) / det_crb(f(R))
    assert math.isclose(ratio, c ** -3, rel_tol=1e-9)


def test_det_crb_consistent_with_inverse_determinant():
    rng = np.random.default_rng(14)
    geom, t, _ = _random_instance(rng, 6)
    F = fisher_matrix(fim_blocks(random_psd(rng, 6) + 0.1 * np.eye(6), t, geom, geom), 1.0)
    assert math.isclose(det_crb(F), float(np.linalg.det(crb(F))), rel_tol=1e-9)


def test_det_crb_ordering_more_power_never_hurts():
    rng = np.random.default_rng(15)
    geom, t, _ = _random_instance(rng, 6)
    f = lambda X: fisher_matrix(fim_blocks(X, t, geom, geom), 1.0)
    for _ in range(10):
        r1 = random_psd(rng, 6)
        r2 = r1 + random_psd(rng, 6)
        assert det_crb(f(r2)) <= det_crb(f(r1)) * (1 + 1e-9)


def test_simulate_echo_noiseless_and_deterministic():
    geom = UlaGeometry(5)
    w = steering(geom, 0.2).conj()
    clean = simulate_echo(w, 0.2, 2 - 1j, 0.0, geom, geom, seed=0)
    a_r = steering(geom, 0.2)
    a_t = steering(geom, 0.2)
    expected = a_r * (2 - 1j) * (a_t @ w)
    assert np.allclose(clean, expected, atol=1e-12)
    y1 = simulate_echo(w, 0.2, 2 - 1j, 0.5, geom, geom, seed=42)
    y2 = simulate_echo(w, 0.2, 2 - 1j, 0.5, geom, geom, seed=42)
    assert np.array_equal(y1, y2)


def test_simulate_echo_mean_concentrates():
    geom = UlaGeometry(4)
    w = steering(geom, 0.1).conj()
    sigma2 = 0.25
    m = 100_000
    acc = np.zeros(4, dtype=complex)
    for seed in range(m):
        acc += simulate_echo(w, 0.1, 1 + 0j, sigma2, geom, geom, seed=seed)
    mean = acc / m
    clean = simulate_echo(w, 0.1, 1 + 0j, 0.0, geom, geom, seed=0)
    bound = 5 * math.sqrt(sigma2) / math.sqrt(m)
    assert np.abs(mean - clean).max() <= bound


def test_ml_estimate_recovers_noiseless_on_grid():
    geom = UlaGeometry(8)
    angles = np.radians(np.arange(-90.0, 91.0, 1.0))
    theta = math.radians(12.0)
    beta = 0.8 - 0.3j
    w = steering(geom, theta).conj()
    echo = simulate_echo(w, theta, beta, 0.0, geom, geom, seed=0)
    th_hat, b_hat = ml_estimate([echo], w, angles, geom, geom)
    assert abs(th_hat - theta) <= 1e-12
    assert abs(b_hat - beta) <= 1e-9


def test_ml_estimate_validation_and_determinism():
    geom = UlaGeometry(4)
    angles = np.radians(np.arange(-90.0, 91.0, 5.0))
    w = steering(geom, 0.0).conj()
    echo = simulate_echo(w, 0.1, 1 + 0j, 0.1, geom, geom, seed=7)
    with pytest.raises(ValueError):
        ml_estimate([], w, angles, geom, geom)
    with pytest.raises(ValueError):
        ml_estimate([echo], np.zeros(4, dtype=complex), angles, geom, geom)
    r1 = ml_estimate([echo], w, angles, geom, geom)
    r2 = ml_estimate([echo], w, angles, geom, geom)
    assert r1 == r2
