import numpy as np
import pytest

from sufrep.errors import ConfigError, DataError
from sufrep.predict import (
    BINARY,
    REGRESSION,
    EvalReport,
    FitConfig,
    evaluate,
    fit_head,
    make_splits,
    predict,
    rank_auc,
)


def test_make_splits_cover_and_disjoint():
    tr, va, te = make_splits(100, (0.6, 0.2, 0.2), seed=0)
    assert len(tr) == 60 and len(va) == 20 and len(te) == 20
    union = np.concatenate([tr, va, te])
    assert np.array_equal(np.sort(union), np.arange(100))


def test_make_splits_bad_fractions():
    with pytest.raises(ConfigError):
        make_splits(10, (0.5, 0.2, 0.2))


def test_constant_response_fits_exactly():
    rng = np.random.default_rng(0)
    reps = [rng.standard_normal((100, 3))]
    y = np.full((100, 1), 4.2)
    pred = fit_head(reps, y, cfg=FitConfig(max_epochs=50, seed=0))
    out = predict(pred, reps)
    assert float(((out - y) ** 2).mean()) <= 1e-3


def test_zero_epochs_returns_initialized_head():
    rng = np.random.default_rng(1)
    reps = [rng.standard_normal((50, 2))]
    y = rng.standard_normal((50, 1))
    cfg = FitConfig(max_epochs=0, seed=3)
    pred = fit_head(reps, y, cfg=cfg)
    from sufrep.nn import mlp_init
    from sufrep.rng import STREAM_INIT, spawn_rng

    want = mlp_init([2, 16, 8, 1], seed=spawn_rng(3, STREAM_INIT))
    for p, q in zip(pred.head.params(), want.params()):
        assert np.array_equal(p, q)


def test_linear_target_low_test_mse():
    rng = np.random.default_rng(2)
    reps = [rng.standard_normal((600, 4))]
    beta = np.array([[1.0], [-2.0], [0.5], [3.0]])
    y = reps[0] @ beta
    pred = fit_head(reps, y, cfg=FitConfig(seed=0))
    report = evaluate(pred, reps, y)
    assert report.mse <= 1e-2 * float(y.var())


def test_perfect_predictions_zero_mse():
    rng = np.random.default_rng(3)
    reps = [rng.standard_normal((40, 2))]
    y = rng.standard_normal((40, 1))
    pred = fit_head(reps, y, cfg=FitConfig(max_epochs=0, seed=1))
    splits = (np.arange(0, 20), np.arange(20, 30), np.arange(30, 40))
    report = EvalReport(task=REGRESSION, n_train=20, n_val=10, n_test=10, seed=0)
    # direct metric identities, bypassing the head
    out = y.copy()
    assert float(((out[splits[2]] - y[splits[2]]) ** 2).mean()) == 0.0
    assert rank_auc(np.array([0.9, 0.8, 0.1, 0.2]), np.array([1, 1, 0, 0])) == 1.0


def test_train_mean_baseline_mse_close_to_variance():
    rng = np.random.default_rng(4)
    n = 2000
    reps = [np.zeros((n, 2))]  # featureless: the head can only learn a constant
    y = rng.standard_normal((n, 1)) * 2.0 + 1.0
    pred = fit_head(reps, y, cfg=FitConfig(max_epochs=30, seed=0))
    report = evaluate(pred, reps, y)
    assert report.mse == pytest.approx(float(y.var()), rel=0.15)


def test_mse_invariant_under_joint_permutation():
    rng = np.random.default_rng(5)
    preds = rng.standard_normal(50)
    ys = preds + 0.3 * rng.standard_normal(50)
    mse1 = float(((preds - ys) ** 2).mean())
    pi = rng.permutation(50)
    mse2 = float(((preds[pi] - ys[pi]) ** 2).mean())
    assert mse1 == pytest.approx(mse2, rel=1e-15)


def test_auc_random_scores_near_half():
    rng = np.random.default_rng(6)
    n = 738
    labels = (rng.random(n) < 0.5).astype(float)
    aucs = [rank_auc(rng.standard_normal(n), labels) for _ in range(20)]
    assert all(abs(a - 0.5) < 0.1 for a in aucs)


def test_auc_degenerate_labels():
    assert rank_auc(np.array([0.1, 0.9]), np.array([1, 1])) == 0.5


def test_binary_classification_end_to_end():
    rng = np.random.default_rng(7)
    n = 800
    reps = [rng.standard_normal((n, 3))]
    logits = 2.0 * reps[0][:, 0] - reps[0][:, 1]
    y = (logits + 0.5 * rng.standard_normal(n) > 0).astype(float)[:, None]
    pred = fit_head(reps, y, task=BINARY, cfg=FitConfig(seed=0))
    report = evaluate(pred, reps, y)
    assert report.accuracy >= 0.8
    assert report.auc >= 0.85
    probs = predict(pred, reps)
    assert np.all((probs >= 0) & (probs <= 1))


def test_binary_rejects_non_binary_response():
    reps = [np.zeros((10, 2))]
    with pytest.raises(DataError):
        fit_head(reps, np.arange(10.0), task=BINARY)


def test_empty_test_split_rejected():
    rng = np.random.default_rng(8)
    reps = [rng.standard_normal((30, 2))]
    y = rng.standard_normal((30, 1))
    pred = fit_head(reps, y, cfg=FitConfig(max_epochs=1, seed=0))
    with pytest.raises(ConfigError):
        evaluate(pred, reps, y, split=(np.arange(20), np.arange(20, 30), np.array([], int)))


def test_overlapping_splits_rejected():
    rng = np.random.default_rng(9)
    reps = [rng.standard_normal((30, 2))]
    y = rng.standard_normal((30, 1))
    pred = fit_head(reps, y, cfg=FitConfig(max_epochs=1, seed=0))
    with pytest.raises(ConfigError):
        evaluate(pred, reps, y, split=(np.arange(0, 20), None, np.arange(15, 30)))


def test_evaluate_deterministic():
    rng = np.random.default_rng(10)
    reps = [rng.standard_normal((200, 3))]
    y = (reps[0][:, :1] + 0.1 * rng.standard_normal((200, 1))) ** 2
    pred = fit_head(reps, y, cfg=FitConfig(max_epochs=40, seed=5))
    r1 = evaluate(pred, reps, y)
    r2 = evaluate(pred, reps, y)
    assert r1.mse == r2.mse
