"""Block-coordinate training of per-modality encoders.

Each outer iteration cycles over the modalities.  For modality k the
current latent sample Z_k = g_k(X_k) is compared against fresh
standard-normal reference draws by a logistic discriminator, pushed one
residual step toward the reference law, and the encoder is then updated
by minibatch Adam on

    - dcov_v(g_k(X_B), Y_B)
    + (lam_k / |B|) * sum_i ||g_k(X_i) - Z_k_pushed_i||^2
    + sum_{l != k} xi_kl * dcov_v(g_k(X_B), rep_l_B)

with the other modalities' representations held fixed (block coordinate
descent; later modalities in the cycle see earlier updates).  Gradients
reach only encoder k, chained through the analytic distance-covariance
gradient.

The response is z-scored per column before entering the dependence term
(enabled by default) so the balance between the dependence, matching and
independence terms does not depend on the scale of Y.

The dependence term is 1-homogeneous in the representation's scale, so it
rewards inflating the latent sample; the matching term and the pushes are
what contain that.  The default push step (0.5) and iteration counts were
calibrated so that containment wins: with much smaller pushes the latent
covariance drifts far from the identity before dependence ever forms.

An objective breakdown is logged once per outer iteration.  For large n
the log is evaluated on a fixed random row subsample (``objective_sample``
rows) to keep the O(n^2) dependence terms affordable; set it to None to
log on all rows.
"""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .data import MultimodalDataset
from .dcov import dcov_grad, dcov_v
from .errors import ConfigError, ShapeError, TrainingError
from .gaussianize import draw_reference, push_particles, train_discriminator
from .nn import Mlp, adam_init, adam_step, mlp_backward, mlp_forward, mlp_init
from .rng import (
    STREAM_BATCH,
    STREAM_DISC,
    STREAM_EVAL,
    STREAM_INIT,
    STREAM_REFERENCE,
    derive_seed,
    spawn_rng,
)

CHECKPOINT_FORMAT = "sufrep-checkpoint-v1"


def _as_list(value, k, name, minimum=None, strict=False):
    if np.isscalar(value):
        values = [float(value)] * k
    else:
        values = [float(v) for v in value]
        if len(values) != k:
            raise ConfigError(f"{name} needs {k} entries, got {len(values)}")
    if minimum is not None:
        for v in values:
            if v < minimum or (strict and v == minimum):
                cmp = ">" if strict else ">="
                raise ConfigError(f"{name} entries must be {cmp} {minimum}, got {v}")
    return values


@dataclass
class TrainConfig:
    """All tuning knobs of the representation trainer.

    Scalar ``latent_dim``/``lam``/``step_size`` broadcast across
    modalities; ``xi`` is either one scalar for every unordered pair or a
    full symmetric K x K matrix with zero diagonal.
    """

    latent_dim: object = 5
    lam: object = 1.0
    xi: object = 1.0
    step_size: object = 0.5
    outer_iters: int = 100
    inner_steps: int = 60
    batch_size: int = 128
    lr: float = 5e-3
    disc_steps: int = 300
    disc_refresh_steps: int = 100
    disc_warm_start: bool = True
    disc_lr: float = 1e-3
    encoder_hidden: list = field(default_factory=lambda: [32, 16, 8])
    disc_hidden: list = field(default_factory=lambda: [16, 8])
    seed: int = 0
    standardize_response: bool = True
    objective_sample: object = 512

    def __post_init__(self):
        self.encoder_hidden = [int(w) for w in self.encoder_hidden]
        self.disc_hidden = [int(w) for w in self.disc_hidden]
        if self.outer_iters < 0 or self.inner_steps < 0:
            raise ConfigError("iteration counts must be non-negative")
        if self.batch_size < 2:
            raise ConfigError("batch_size must be at least 2")
        if self.lr <= 0 or self.disc_lr <= 0:
            raise ConfigError("learning rates must be positive")

    def latent_dims(self, k):
        dims = _as_list(self.latent_dim, k, "latent_dim", minimum=1)
        return [int(d) for d in dims]

    def lams(self, k):
        return _as_list(self.lam, k, "lam", minimum=0.0)

    def step_sizes(self, k):
        return _as_list(self.step_size, k, "step_size", minimum=0.0, strict=True)

    def xi_matrix(self, k):
        if np.isscalar(self.xi):
            if self.xi < 0:
                raise ConfigError(f"xi must be >= 0, got {self.xi}")
            m = float(self.xi) * (np.ones((k, k)) - np.eye(k))
        else:
            m = np.asarray(self.xi, dtype=np.float64)
            if m.shape != (k, k):
                raise ConfigError(f"xi matrix must be {k}x{k}, got {m.shape}")
            if not np.allclose(m, m.T):
                raise ConfigError("xi matrix must be symmetric")
            if np.any(m < 0):
                raise ConfigError("xi entries must be >= 0")
            m = m.copy()
            np.fill_diagonal(m, 0.0)
        return m

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class EncoderBank:
    """One feed-forward encoder per modality."""

    encoders: list

    @property
    def k(self):
        return len(self.encoders)

    def copy(self):
        return EncoderBank([e.copy() for e in self.encoders])


def init_bank(data: MultimodalDataset, cfg: TrainConfig) -> EncoderBank:
    dims = cfg.latent_dims(data.k)
    encoders = []
    for k, m in enumerate(data.modalities):
        widths = [m.shape[1], *cfg.encoder_hidden, dims[k]]
        encoders.append(mlp_init(widths, seed=spawn_rng(cfg.seed, STREAM_INIT, k)))
    return EncoderBank(encoders)


def encode_all(bank: EncoderBank, data: MultimodalDataset) -> list:
    """Representation of every modality under the current encoders."""
    if bank.k != data.k:
        raise ShapeError(f"bank has {bank.k} encoders, dataset has {data.k} modalities")
    return [mlp_forward(enc, m) for enc, m in zip(bank.encoders, data.modalities)]


def standardize_columns(y: np.ndarray):
    """Z-score each column; constant columns are centred only."""
    y = np.asarray(y, dtype=np.float64)
    mean = y.mean(axis=0)
    std = y.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return (y - mean) / std, mean, std


@dataclass
class ObjectiveBreakdown:
    """Per-term values of the training objective at one checkpoint."""

    fit: float
    match: float
    independence: float

    @property
    def total(self):
        return self.fit + self.match + self.independence


def empirical_objective(
    bank: EncoderBank,
    data: MultimodalDataset,
    pushed: list,
    cfg: TrainConfig,
    response=None,
    rows=None,
) -> ObjectiveBreakdown:
    """Objective terms at the current encoders against pushed targets.

    ``response`` overrides ``data.response`` (the trainer passes the
    standardized response); ``rows`` restricts evaluation to a row subset.
    """
    k = data.k
    lams = cfg.lams(k)
    xi = cfg.xi_matrix(k)
    reps = encode_all(bank, data)
    y = data.response if response is None else response
    if len(pushed) != k:
        raise ShapeError(f"need {k} pushed particle sets, got {len(pushed)}")
    if rows is not None:
        reps = [r[rows] for r in reps]
        pushed = [p[rows] for p in pushed]
        y = y[rows]
    for r, p in zip(reps, pushed):
        if r.shape != p.shape:
            raise ShapeError(f"pushed particles shaped {p.shape}, reps {r.shape}")
    fit = -sum(dcov_v(r, y) for r in reps)
    match = sum(
        lam * float(((r - p) ** 2).sum(axis=1).mean())
        for lam, r, p in zip(lams, reps, pushed)
    )
    indep = 0.0
    for a in range(k):
        for b in range(a + 1, k):
            if xi[a, b] > 0:
                indep += xi[a, b] * dcov_v(reps[a], reps[b])
    return ObjectiveBreakdown(fit=fit, match=match, independence=float(indep))


def update_modality(
    k: int,
    bank: EncoderBank,
    data: MultimodalDataset,
    pushed_k: np.ndarray,
    frozen_reps: list,
    cfg: TrainConfig,
    outer_iter: int = 0,
    response=None,
) -> Mlp:
    """Run ``cfg.inner_steps`` minibatch Adam updates on encoder k in place.

    ``frozen_reps`` holds the current representations of every modality
    (entry k is ignored); gradients flow only through encoder k.
    Optimizer state is local to the call.
    """
    enc = bank.encoders[k]
    x = data.modalities[k]
    y = data.response if response is None else response
    n = x.shape[0]
    if pushed_k.shape != (n, enc.out_dim):
        raise ShapeError(
            f"pushed particles shaped {pushed_k.shape}, expected {(n, enc.out_dim)}"
        )
    lams = cfg.lams(data.k)
    xi = cfg.xi_matrix(data.k)
    b = min(cfg.batch_size, n)
    rng = spawn_rng(cfg.seed, STREAM_BATCH, outer_iter, k)
    params = enc.params()
    state = adam_init(params, lr=cfg.lr)
    for step in range(cfg.inner_steps):
        idx = rng.choice(n, size=b, replace=False)
        xb = x[idx]
        rep = mlp_forward(enc, xb)
        if not np.all(np.isfinite(rep)):
            raise TrainingError(
                f"modality {k} ({data.names[k]}): non-finite representation "
                f"at outer iter {outer_iter}, step {step}"
            )
        grad = -dcov_grad(rep, y[idx])
        grad += (2.0 * lams[k] / b) * (rep - pushed_k[idx])
        for l in range(data.k):
            if l != k and xi[k, l] > 0:
                grad += xi[k, l] * dcov_grad(rep, frozen_reps[l][idx])
        pgrads, _ = mlp_backward(enc, xb, grad)
        try:
            adam_step(state, params, pgrads)
        except TrainingError as e:
            raise TrainingError(
                f"modality {k} ({data.names[k]}) at outer iter {outer_iter}, "
                f"step {step}: {e}"
            ) from e
    return enc


def train_encoders(
    data: MultimodalDataset,
    cfg: TrainConfig,
    bank: EncoderBank = None,
    frozen=(),
):
    """Full block-coordinate training loop.

    Returns ``(bank, representations, objective_log)`` where the log holds
    one ObjectiveBreakdown per outer iteration.  ``frozen`` lists modality
    indices whose encoders are kept fixed (their representations still
    enter the independence terms of the others).  Deterministic given
    (data, cfg, initial bank).
    """
    k = data.k
    dims = cfg.latent_dims(k)
    steps = cfg.step_sizes(k)
    frozen = set(frozen)
    if bank is None:
        bank = init_bank(data, cfg)
    for i, enc in enumerate(bank.encoders):
        if enc.in_dim != data.modalities[i].shape[1] or enc.out_dim != dims[i]:
            raise ShapeError(
                f"encoder {i} maps {enc.in_dim}->{enc.out_dim}, expected "
                f"{data.modalities[i].shape[1]}->{dims[i]}"
            )
    n = data.n
    if cfg.standardize_response:
        y, _, _ = standardize_columns(data.response)
    else:
        y = data.response

    eval_rows = None
    if cfg.objective_sample is not None and cfg.objective_sample < n:
        eval_rows = np.sort(
            spawn_rng(cfg.seed, STREAM_EVAL).choice(
                n, size=int(cfg.objective_sample), replace=False
            )
        )

    reps = encode_all(bank, data)
    discs = [None] * k  # warm-started across outer iterations per modality
    log = []
    for outer in range(cfg.outer_iters):
        pushed_all = list(reps)
        for i in range(k):
            if i in frozen:
                continue
            zk = reps[i]
            ref = draw_reference(n, dims[i], seed=spawn_rng(cfg.seed, STREAM_REFERENCE, outer, i))
            warm = cfg.disc_warm_start and discs[i] is not None
            disc = train_discriminator(
                zk,
                ref,
                steps=cfg.disc_refresh_steps if warm else cfg.disc_steps,
                lr=cfg.disc_lr,
                batch_size=cfg.batch_size,
                seed=derive_seed(cfg.seed, STREAM_DISC, outer, i),
                hidden=cfg.disc_hidden,
                init=discs[i] if warm else None,
            )
            if cfg.disc_warm_start:
                discs[i] = disc
            pushed = push_particles(disc, zk, steps[i])
            pushed_all[i] = pushed
            update_modality(i, bank, data, pushed, reps, cfg, outer_iter=outer, response=y)
            reps[i] = mlp_forward(bank.encoders[i], data.modalities[i])
        log.append(
            empirical_objective(bank, data, pushed_all, cfg, response=y, rows=eval_rows)
        )
    return bank, reps, log


def save_checkpoint(path, bank: EncoderBank, cfg: TrainConfig, names, completed_outer_iters=None):
    """Write config + encoder parameters as JSON; round-trips bit-exactly."""
    doc = {
        "format": CHECKPOINT_FORMAT,
        "config": cfg.to_dict(),
        "modality_names": list(names),
        "rng": {
            "seed": cfg.seed,
            "completed_outer_iters": (
                cfg.outer_iters if completed_outer_iters is None else completed_outer_iters
            ),
        },
        "encoders": [enc.to_dict() for enc in bank.encoders],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, sort_keys=True) + "\n")
    return path


def load_checkpoint(path):
    """Read a checkpoint; returns (bank, cfg, modality_names)."""
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ConfigError(f"{path}: not a {CHECKPOINT_FORMAT} document")
    cfg = TrainConfig.from_dict(doc["config"])
    bank = EncoderBank([Mlp.from_dict(d) for d in doc["encoders"]])
    return bank, cfg, list(doc["modality_names"])
