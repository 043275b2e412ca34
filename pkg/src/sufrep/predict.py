"""Prediction head over concatenated modality representations.

Fusion is early: the selected representations are concatenated column-wise
and a small ReLU network maps them to the response (squared loss) or to a
logit (logistic loss).  Fitting is minibatch Adam with early stopping on a
validation split; encoders are not touched here, representation learning
and prediction are two separate stages.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .errors import ConfigError, DataError, ShapeError, TrainingError
from .nn import Mlp, adam_init, adam_step, mlp_backward, mlp_forward, mlp_init
from .rng import STREAM_BATCH, STREAM_INIT, STREAM_SPLIT, spawn_rng

REGRESSION = "regression"
BINARY = "binary_classification"

# validation-loss improvements below this (on the standardized scale) do
# not reset the early-stopping patience counter
MIN_DELTA = 1e-6


@dataclass
class FitConfig:
    hidden: list = field(default_factory=lambda: [16, 8])
    lr: float = 1e-3
    batch_size: int = 128
    max_epochs: int = 10000
    patience: int = 20
    split: tuple = (0.6, 0.2, 0.2)
    seed: int = 0
    # keep the final weights when patience runs out (False) or rewind to the
    # best-validation snapshot (True)
    restore_best: bool = False

    def __post_init__(self):
        if self.max_epochs < 0 or self.patience < 1:
            raise ConfigError("max_epochs must be >= 0 and patience >= 1")
        if abs(sum(self.split) - 1.0) > 1e-9 or any(s < 0 for s in self.split):
            raise ConfigError(f"split fractions must be >= 0 and sum to 1, got {self.split}")


@dataclass
class Predictor:
    head: Mlp
    task: str
    y_mean: np.ndarray
    y_std: np.ndarray
    splits: tuple = None  # (train_idx, val_idx, test_idx) used during fitting


@dataclass
class EvalReport:
    task: str
    n_train: int
    n_val: int
    n_test: int
    seed: int
    mse: float = None
    mse_signal: float = None
    accuracy: float = None
    auc: float = None

    def to_dict(self):
        return {k: v for k, v in self.__dict__.items() if v is not None}


def make_splits(n, split=(0.6, 0.2, 0.2), seed=0):
    """Disjoint train/validation/test index arrays covering range(n)."""
    if abs(sum(split) - 1.0) > 1e-9:
        raise ConfigError(f"split fractions must sum to 1, got {split}")
    perm = spawn_rng(seed, STREAM_SPLIT).permutation(n)
    n_train = int(round(split[0] * n))
    n_val = int(round(split[1] * n))
    return perm[:n_train], perm[n_train : n_train + n_val], perm[n_train + n_val :]


def _stack(reps):
    if not reps:
        raise ConfigError("need at least one representation to fuse")
    rows = {r.shape[0] for r in reps}
    if len(rows) != 1:
        raise ShapeError(f"representations disagree on row count: {sorted(rows)}")
    return np.hstack([np.asarray(r, dtype=np.float64) for r in reps])


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _val_loss(head, x, y, task):
    out = mlp_forward(head, x)
    if task == REGRESSION:
        return float(((out - y) ** 2).mean())
    margins = np.where(y > 0.5, -out, out)
    return float(np.logaddexp(0.0, margins).mean())


def fit_head(reps, y, task=REGRESSION, cfg=None, train_idx=None, val_idx=None) -> Predictor:
    """Fit the fusion head on the train split with early stopping.

    The regression target is z-scored with train-split statistics (and
    predictions mapped back), so the optimizer sees a unit-scale problem
    regardless of the response units.  ``max_epochs=0`` returns the
    initialized head unchanged.
    """
    cfg = cfg or FitConfig()
    if task not in (REGRESSION, BINARY):
        raise ConfigError(f"unknown task {task!r}")
    x = _stack(reps)
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    n = x.shape[0]
    if y.shape[0] != n:
        raise ShapeError(f"{n} rep rows vs {y.shape[0]} response rows")
    if task == BINARY:
        if y.shape[1] != 1 or not np.all(np.isin(y, (0.0, 1.0))):
            raise DataError("binary task needs a single 0/1 response column")
    if train_idx is None or val_idx is None:
        train_idx, val_idx, test_idx = make_splits(n, cfg.split, cfg.seed)
    else:
        train_idx = np.asarray(train_idx)
        val_idx = np.asarray(val_idx)
        test_idx = None
    if train_idx.size == 0:
        raise ConfigError("empty train split")

    if task == REGRESSION:
        y_mean = y[train_idx].mean(axis=0)
        y_std = y[train_idx].std(axis=0)
        y_std = np.where(y_std > 0, y_std, 1.0)
        ys = (y - y_mean) / y_std
    else:
        y_mean = np.zeros(y.shape[1])
        y_std = np.ones(y.shape[1])
        ys = y

    head = mlp_init([x.shape[1], *cfg.hidden, y.shape[1]], seed=spawn_rng(cfg.seed, STREAM_INIT))
    pred = Predictor(head=head, task=task, y_mean=y_mean, y_std=y_std,
                     splits=(train_idx, val_idx, test_idx))
    if cfg.max_epochs == 0:
        return pred

    rng = spawn_rng(cfg.seed, STREAM_BATCH)
    params = head.params()
    state = adam_init(params, lr=cfg.lr)
    b = min(cfg.batch_size, train_idx.size)
    use_val = val_idx.size > 0
    best_loss = _val_loss(head, x[val_idx], ys[val_idx], task) if use_val else np.inf
    best_params = [p.copy() for p in params]
    stall = 0
    for epoch in range(cfg.max_epochs):
        order = rng.permutation(train_idx)
        for start in range(0, order.size, b):
            idx = order[start : start + b]
            xb, yb = x[idx], ys[idx]
            out = mlp_forward(head, xb)
            if task == REGRESSION:
                grad = 2.0 * (out - yb) / idx.size
            else:
                grad = (_sigmoid(out) - yb) / idx.size
            pgrads, _ = mlp_backward(head, xb, grad)
            try:
                adam_step(state, params, pgrads)
            except TrainingError as e:
                raise TrainingError(f"head fitting diverged at epoch {epoch}: {e}") from e
        if use_val:
            loss = _val_loss(head, x[val_idx], ys[val_idx], task)
            if loss < best_loss - MIN_DELTA:
                best_loss = loss
                if cfg.restore_best:
                    best_params = [p.copy() for p in params]
                stall = 0
            else:
                stall += 1
                if stall >= cfg.patience:
                    break
    if use_val and cfg.restore_best:
        for p, bp in zip(params, best_params):
            p[...] = bp
    return pred


def predict(pred: Predictor, reps) -> np.ndarray:
    """Predictions as an (n, 1) column: response scale, or P(class 1)."""
    out = mlp_forward(pred.head, _stack(reps))
    if pred.task == REGRESSION:
        return out * pred.y_std + pred.y_mean
    return _sigmoid(out)


def rank_auc(scores, labels) -> float:
    """Mann-Whitney AUC from average ranks; 0.5 when a class is absent."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    pos = labels > 0.5
    n_pos = int(pos.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return 0.5
    ranks = rankdata(scores)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def evaluate(pred: Predictor, reps, y, split=None, signal=None, seed=0) -> EvalReport:
    """Metrics on the test split: MSE (regression) or accuracy and AUC (binary).

    ``split`` is (train_idx, val_idx, test_idx); it defaults to the
    predictor's fitting splits.  For synthetic data ``signal`` (the
    noiseless response surface) adds an MSE against the signal.
    """
    if split is None:
        split = pred.splits
    if split is None or split[2] is None:
        raise ConfigError("no test split available; pass split=(train, val, test)")
    train_idx, val_idx, test_idx = split
    test_idx = np.asarray(test_idx)
    if test_idx.size == 0:
        raise ConfigError("empty test split")
    for other in (train_idx, val_idx):
        if other is not None and np.intersect1d(test_idx, np.asarray(other)).size:
            raise ConfigError("test split overlaps another split")
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    out = predict(pred, reps)
    report = EvalReport(
        task=pred.task,
        n_train=0 if train_idx is None else len(train_idx),
        n_val=0 if val_idx is None else len(val_idx),
        n_test=len(test_idx),
        seed=seed,
    )
    if pred.task == REGRESSION:
        report.mse = float(((out[test_idx] - y[test_idx]) ** 2).mean())
        if signal is not None:
            signal = np.asarray(signal, dtype=np.float64)
            if signal.ndim == 1:
                signal = signal[:, None]
            report.mse_signal = float(((out[test_idx] - signal[test_idx]) ** 2).mean())
    else:
        labels = y[test_idx, 0]
        probs = out[test_idx, 0]
        report.accuracy = float(((probs > 0.5) == (labels > 0.5)).mean())
        report.auc = rank_auc(probs, labels)
    return report
