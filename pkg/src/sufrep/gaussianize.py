"""Density-ratio discriminators and residual pushes toward N(0, I).

A small scalar-output network D is fit by logistic loss to distinguish
latent particles (one row per sample) from reference draws of the
standard normal.  At the optimum D(z) = log(gamma(z) / mu(z)), so the
density ratio of the particle law against the normal reference is
exp(-D).  With the KL divergence f(x) = x log x the residual map that
most decreases the divergence reduces to

    T(z) = z + s * grad_z D(z),

a single gradient step of size ``s`` along the discriminator, which is
what ``push_particles`` applies.
"""

import logging

import numpy as np

from .errors import ConfigError, NumericError, ShapeError, TrainingError
from .nn import Mlp, adam_init, adam_step, mlp_backward, mlp_forward, mlp_init
from .rng import STREAM_DISC, STREAM_INIT, spawn_rng

log = logging.getLogger(__name__)

DEFAULT_DISC_HIDDEN = (16, 8)

# discriminator outputs are clamped to this range before exponentiation,
# purely as an overflow guard
LOGIT_CLAMP = 30.0


class Discriminator:
    """Scalar-output ReLU network scoring log(reference density / particle density)."""

    def __init__(self, net: Mlp):
        if net.out_dim != 1:
            raise ConfigError("discriminator network must have scalar output")
        self.net = net

    @property
    def in_dim(self):
        return self.net.in_dim

    def logits(self, z: np.ndarray) -> np.ndarray:
        """D(z) for each row of z, as a flat vector."""
        return mlp_forward(self.net, np.asarray(z, dtype=np.float64))[:, 0]

    def copy(self):
        return Discriminator(self.net.copy())


def discriminator_init(d: int, hidden=DEFAULT_DISC_HIDDEN, seed=0) -> Discriminator:
    return Discriminator(mlp_init([d, *hidden, 1], seed=seed))


def draw_reference(n: int, d: int, seed=0) -> np.ndarray:
    """(n, d) i.i.d. standard-normal reference sample, deterministic in seed."""
    if n < 1 or d < 1:
        raise ConfigError(f"need n, d >= 1, got n={n}, d={d}")
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, d))


def logistic_loss(disc: Discriminator, particles: np.ndarray, reference: np.ndarray) -> float:
    """Full-data value of the logistic discrimination objective.

    mean log(1 + exp(D(Z_i))) + mean log(1 + exp(-D(W_i))); minimized at
    2 log 2 when particles and reference share a distribution and D = 0.
    """
    lz = disc.logits(particles)
    lw = disc.logits(reference)
    return float(np.logaddexp(0.0, lz).mean() + np.logaddexp(0.0, -lw).mean())


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _run_adam(disc, particles, reference, steps, lr, batch_size, rng):
    n = particles.shape[0]
    b = min(batch_size, n)
    params = disc.net.params()
    state = adam_init(params, lr=lr)
    for step in range(steps):
        iz = rng.choice(n, size=b, replace=False)
        iw = rng.choice(n, size=b, replace=False)
        zb = particles[iz]
        wb = reference[iw]
        # d/du log(1+e^u) = sigmoid(u);  d/du log(1+e^-u) = -sigmoid(-u)
        gz = _sigmoid(mlp_forward(disc.net, zb)) / b
        grads_z, _ = mlp_backward(disc.net, zb, gz)
        gw = -_sigmoid(-mlp_forward(disc.net, wb)) / b
        grads_w, _ = mlp_backward(disc.net, wb, gw)
        total = [a + c for a, c in zip(grads_z, grads_w)]
        try:
            adam_step(state, params, total)
        except TrainingError as e:
            raise TrainingError(f"discriminator diverged: {e}") from e
    return disc


def train_discriminator(
    particles,
    reference,
    steps=200,
    lr=1e-3,
    batch_size=128,
    seed=0,
    hidden=DEFAULT_DISC_HIDDEN,
    init=None,
) -> Discriminator:
    """Fit the logistic discriminator by minibatch Adam.

    Guarantees the returned network's full-data loss does not exceed the
    initial network's: if a run ends worse it is retried once from the
    same initialization at lr/10, and the best of {initial, first try,
    retry} is returned (with a warning if training never improved).
    ``steps=0`` returns the initialized network unchanged.
    """
    particles = np.asarray(particles, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    if particles.ndim != 2 or reference.ndim != 2:
        raise ShapeError("particles and reference must be 2-D sample matrices")
    if particles.shape != reference.shape:
        raise ShapeError(
            f"particle/reference shapes differ: {particles.shape} vs {reference.shape}"
        )
    if steps < 0:
        raise ConfigError(f"steps must be >= 0, got {steps}")
    d = particles.shape[1]
    if init is None:
        init = discriminator_init(d, hidden=hidden, seed=spawn_rng(seed, STREAM_INIT))
    if init.in_dim != d:
        raise ShapeError(f"discriminator expects dim {init.in_dim}, data has {d}")
    if steps == 0:
        return init

    loss0 = logistic_loss(init, particles, reference)
    best_loss, best = loss0, init
    for attempt, rate in enumerate((lr, lr / 10.0)):
        cand = init.copy()
        rng = spawn_rng(seed, STREAM_DISC, attempt)
        _run_adam(cand, particles, reference, steps, rate, batch_size, rng)
        loss = logistic_loss(cand, particles, reference)
        if not np.isfinite(loss):
            raise TrainingError("discriminator loss became non-finite")
        if loss < best_loss:
            best_loss, best = loss, cand
        if best_loss <= loss0 and best is not init:
            break
    if best is init:
        log.warning(
            "discriminator training did not improve the loss (%.6f); "
            "returning the initialized network",
            loss0,
        )
    return best


def density_ratio(disc: Discriminator, z) -> np.ndarray:
    """Estimated density ratio d(particle law)/d(normal) = exp(-D(z)), per row."""
    z = np.asarray(z, dtype=np.float64)
    logits = np.clip(disc.logits(z), -LOGIT_CLAMP, LOGIT_CLAMP)
    return np.exp(-logits)


def push_particles(disc: Discriminator, particles, step: float) -> np.ndarray:
    """One residual-map step z -> z + step * grad D(z) toward the reference law."""
    if step < 0:
        raise ConfigError(f"step size must be >= 0, got {step}")
    particles = np.asarray(particles, dtype=np.float64)
    ones = np.ones((particles.shape[0], 1))
    _, grad = mlp_backward(disc.net, particles, ones)
    bad = ~np.all(np.isfinite(grad), axis=1)
    if bad.any():
        raise NumericError(f"non-finite push gradient at particle {int(np.where(bad)[0][0])}")
    return particles + step * grad
