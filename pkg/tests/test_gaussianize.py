import numpy as np
import pytest

from sufrep.errors import ConfigError, ShapeError
from sufrep.gaussianize import (
    density_ratio,
    discriminator_init,
    draw_reference,
    logistic_loss,
    push_particles,
    train_discriminator,
)


def test_reference_moments_1d():
    w = draw_reference(100_000, 1, seed=0)
    assert abs(w.mean()) < 0.02
    assert abs(w.var() - 1.0) < 0.02


def test_reference_deterministic():
    assert np.array_equal(draw_reference(50, 3, seed=7), draw_reference(50, 3, seed=7))


def test_reference_covariance_3d():
    w = draw_reference(100_000, 3, seed=1)
    cov = np.cov(w.T)
    assert np.all(np.abs(cov - np.eye(3)) < 0.05)


def test_reference_validates():
    with pytest.raises(ConfigError):
        draw_reference(0, 3)


def test_zero_steps_returns_init_unchanged():
    rng = np.random.default_rng(2)
    z = rng.standard_normal((100, 2))
    w = rng.standard_normal((100, 2))
    init = discriminator_init(2, seed=3)
    before = [p.copy() for p in init.net.params()]
    out = train_discriminator(z, w, steps=0, init=init)
    assert out is init
    for p, b in zip(out.net.params(), before):
        assert np.array_equal(p, b)


def test_train_never_worse_than_init():
    rng = np.random.default_rng(3)
    z = rng.standard_normal((400, 2))
    w = rng.standard_normal((400, 2))
    init = discriminator_init(2, seed=4)
    loss0 = logistic_loss(init, z, w)
    disc = train_discriminator(z, w, steps=100, init=init, seed=5)
    assert logistic_loss(disc, z, w) <= loss0


def test_matched_distributions_give_small_logits():
    rng = np.random.default_rng(4)
    z = rng.standard_normal((2000, 2))
    w = rng.standard_normal((2000, 2))
    disc = train_discriminator(z, w, steps=400, seed=6)
    assert np.abs(disc.logits(z)).mean() <= 0.25


def test_shifted_particles_get_signed_logits():
    # D estimates log(reference density / particle density): negative where
    # the particles sit, positive where the reference sits
    rng = np.random.default_rng(5)
    z = rng.standard_normal((2000, 1)) + 5.0
    w = rng.standard_normal((2000, 1))
    disc = train_discriminator(z, w, steps=600, seed=7)
    assert np.median(disc.logits(z)) < 0
    assert np.median(disc.logits(w)) > 0


def test_density_ratio_of_zero_net_is_one():
    disc = discriminator_init(2, seed=8)
    for p in disc.net.params():
        p[...] = 0.0
    r = density_ratio(disc, np.random.default_rng(9).standard_normal((10, 2)))
    assert np.all(r == 1.0)


def test_density_ratio_constant_logit():
    disc = discriminator_init(1, seed=10)
    for p in disc.net.params():
        p[...] = 0.0
    disc.net.biases[-1][...] = 2.5
    r = density_ratio(disc, np.zeros((5, 1)))
    assert np.allclose(r, np.exp(-2.5))


def test_density_ratio_clamps_overflow():
    disc = discriminator_init(1, seed=11)
    for p in disc.net.params():
        p[...] = 0.0
    disc.net.biases[-1][...] = -1e6
    r = density_ratio(disc, np.zeros((3, 1)))
    assert np.all(np.isfinite(r))
    assert np.allclose(r, np.exp(30.0))


def test_density_ratio_near_one_when_matched():
    rng = np.random.default_rng(12)
    z = rng.standard_normal((2000, 2))
    w = rng.standard_normal((2000, 2))
    disc = train_discriminator(z, w, steps=400, seed=13)
    r = density_ratio(disc, z)
    assert 0.7 <= np.median(r) <= 1.4
    assert abs(np.log(r).mean()) <= 0.3


def test_push_zero_step_is_identity():
    rng = np.random.default_rng(14)
    z = rng.standard_normal((50, 2))
    disc = discriminator_init(2, seed=15)
    assert np.array_equal(push_particles(disc, z, 0.0), z)


def test_push_linear_disc_shifts_by_step_times_slope():
    # no hidden layers -> the discriminator is exactly D(z) = c^T z + b
    disc = discriminator_init(3, hidden=(), seed=16)
    c = np.array([1.0, -2.0, 0.5])
    disc.net.weights[0][...] = c[:, None]
    disc.net.biases[0][...] = 0.3
    z = np.random.default_rng(17).standard_normal((40, 3))
    assert np.allclose(disc.logits(z), z @ c + 0.3)
    pushed = push_particles(disc, z, 0.1)
    assert np.allclose(pushed, z + 0.1 * c, atol=1e-12)


def test_push_moves_shifted_particles_toward_origin():
    rng = np.random.default_rng(18)
    z = rng.standard_normal((2000, 2)) + 5.0
    w = rng.standard_normal((2000, 2))
    disc = train_discriminator(z, w, steps=600, seed=19)
    pushed = push_particles(disc, z, 0.1)
    norm_before = np.linalg.norm(z, axis=1).mean()
    norm_after = np.linalg.norm(pushed, axis=1).mean()
    assert norm_after < norm_before


def test_iterated_push_converges_in_first_two_moments():
    rng = np.random.default_rng(20)
    z = rng.standard_normal((2000, 1)) + 2.0
    w = rng.standard_normal((2000, 1))
    disc = train_discriminator(z, w, steps=1200, seed=21)

    def moment_gap(p):
        return abs(p.mean()) + abs(p.var() - 1.0)

    gaps = [moment_gap(z)]
    cur = z
    for _ in range(20):
        cur = push_particles(disc, cur, 0.05)
        gaps.append(moment_gap(cur))
    # moves toward (0, 1) over the trajectory, ending much closer
    assert gaps[-1] < 0.5 * gaps[0]
    worsenings = sum(1 for a, b in zip(gaps, gaps[1:]) if b > a + 1e-6)
    assert worsenings <= 2


def test_shape_validation():
    rng = np.random.default_rng(22)
    with pytest.raises(ShapeError):
        train_discriminator(rng.standard_normal((10, 2)), rng.standard_normal((9, 2)))
