"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with the measured numbers.

Run with:  pytest tests/test_acceptance.py -v -s

The heavy criteria share session-scoped fixtures (training runs are
reused across criteria where the configuration coincides) and fan
replicates out to a two-process pool.  Total runtime is roughly half an
hour on two cores.
"""

import json
import multiprocessing
import time

import numpy as np
import pytest

from sufrep.cli import main as cli_main
from sufrep.dcov import dcov_grad, dcov_u, dcov_v, perm_threshold
from sufrep.nn import mlp_backward, mlp_forward, mlp_init
from sufrep.predict import FitConfig, evaluate, fit_head, make_splits
from sufrep.rng import replicate_seed
from sufrep.select import SelectionConfig, conditional_select
from sufrep.synth import SynthConfig, gen_dataset
from sufrep.train import TrainConfig, train_encoders

from test_dcov import dcov_u_oracle, dcov_v_oracle

POOL_WIDTH = 2

# benchmark-scale configuration shared by criteria 4-8
N_BENCH = 3000
BENCH_FIT = dict(max_epochs=300, patience=301, restore_best=False)


def _pmap(fn, jobs):
    if len(jobs) <= 1:
        return [fn(j) for j in jobs]
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(POOL_WIDTH) as pool:
        return pool.map(fn, jobs)


def _report(num, ok, detail):
    print(f"\nCRITERION {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


# ------------------------------------------------------------------ 1


def test_criterion_1_estimator_oracle_equivalence():
    # tolerance: 1e-12 relative with a 1e-12 absolute floor; the statistic
    # cancels O(1) terms, so near-zero true values sit on n^2*eps roundoff
    # (measured worst absolute gap ~1e-13) where pure relative error is
    # ill-posed
    start = time.time()
    rng = np.random.default_rng(1001)
    worst = 0.0
    ok = True
    for _ in range(100):
        n = int(rng.integers(3, 31))
        d = int(rng.integers(1, 5))
        q = int(rng.integers(1, 5))
        z = rng.standard_normal((n, d))
        y = rng.standard_normal((n, q))
        for est, oracle in ((dcov_v, dcov_v_oracle), (dcov_u, dcov_u_oracle)):
            got = est(z, y)
            want = oracle(z, y)
            diff = abs(got - want)
            ok = ok and diff <= max(1e-12 * abs(want), 1e-12)
            worst = max(worst, diff)
    elapsed = time.time() - start
    ok = ok and elapsed < 10.0
    _report(1, ok, f"worst absolute gap {worst:.2e} over 100 instances "
                   f"(tolerance max(1e-12*|value|, 1e-12)), {elapsed:.1f}s")


# ------------------------------------------------------------------ 2


def _check_close(got, want, rel=1e-6, abs_floor=1e-9):
    return np.all(np.abs(got - want) <= np.maximum(rel * np.abs(want), abs_floor))


def test_criterion_2_gradient_suite():
    start = time.time()
    rng = np.random.default_rng(2002)
    ok = True
    # distance-covariance gradient vs central differences
    for _ in range(8):
        n = int(rng.integers(5, 13))
        d = int(rng.integers(1, 4))
        z = rng.standard_normal((n, d))
        y = rng.standard_normal((n, int(rng.integers(1, 3))))
        grad = dcov_grad(z, y)
        h = 1e-6
        fd = np.zeros_like(z)
        for i in range(n):
            for j in range(d):
                zp = z.copy()
                zp[i, j] += h
                zm = z.copy()
                zm[i, j] -= h
                fd[i, j] = (dcov_v(zp, y) - dcov_v(zm, y)) / (2 * h)
        ok = ok and _check_close(grad, fd)
    # network gradients (parameters and inputs) vs central differences
    for widths in ([10, 8, 6, 4], [5, 7, 2], [3, 1]):
        net = mlp_init(widths, seed=rng.integers(1 << 30))
        x = rng.standard_normal((6, widths[0]))
        up = rng.standard_normal((6, widths[-1]))
        grads, gx = mlp_backward(net, x, up)
        h = 1e-5
        for p, g in zip(net.params(), grads):
            fd = np.zeros_like(p)
            flat, fdflat = p.ravel(), fd.ravel()
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + h
                fp = float((mlp_forward(net, x) * up).sum())
                flat[i] = orig - h
                fm = float((mlp_forward(net, x) * up).sum())
                flat[i] = orig
                fdflat[i] = (fp - fm) / (2 * h)
            ok = ok and _check_close(g, fd)
        fdx = np.zeros_like(x)
        for i in range(x.shape[0]):
            for j in range(x.shape[1]):
                orig = x[i, j]
                x[i, j] = orig + h
                fp = float((mlp_forward(net, x) * up).sum())
                x[i, j] = orig - h
                fm = float((mlp_forward(net, x) * up).sum())
                x[i, j] = orig
                fdx[i, j] = (fp - fm) / (2 * h)
        ok = ok and _check_close(gx, fdx)
    elapsed = time.time() - start
    ok = ok and elapsed < 30.0
    _report(2, ok, f"all gradients within 1e-6 relative of finite differences, {elapsed:.1f}s")


# ------------------------------------------------------------------ 3


def _calibration_job(seed):
    rng = np.random.default_rng(30_000 + seed)
    z = rng.standard_normal((500, 1))
    y = rng.standard_normal((500, 1))
    tau = perm_threshold(z, y, num_perms=199, level=0.05, seed=seed)
    return dcov_u(z, y) > tau


def test_criterion_3_permutation_calibration():
    start = time.time()
    rejections = sum(_pmap(_calibration_job, list(range(200))))
    rate = rejections / 200.0
    elapsed = time.time() - start
    ok = 0.02 <= rate <= 0.10 and elapsed < 300.0
    _report(3, ok, f"rejection rate {rate:.3f} over 200 replicates at level 0.05, {elapsed:.0f}s")


# ------------------------------------------------------------- 4 and 5


def _gaussianization_job(seed_index):
    seed = replicate_seed(4005, seed_index)
    bundle = gen_dataset(SynthConfig(scenario=3, case=1, n=N_BENCH, seed=seed))
    data = bundle.dataset.subset([0])  # X alone
    cfg = TrainConfig(seed=seed, lam=1.0, latent_dim=5)
    _, reps, _ = train_encoders(data, cfg)
    rep = reps[0]
    cov = np.cov(rep.T)
    splits = make_splits(N_BENCH, seed=seed)
    pred = fit_head(
        reps, data.response, cfg=FitConfig(seed=seed, **BENCH_FIT),
        train_idx=splits[0], val_idx=splits[1],
    )
    ev = evaluate(pred, reps, data.response, split=splits, signal=bundle.signal)
    return (
        float(np.linalg.norm(rep.mean(axis=0))),
        float(np.abs(cov - np.eye(5)).max()),
        ev.mse_signal,
    )


@pytest.fixture(scope="session")
def single_modality_runs():
    start = time.time()
    results = _pmap(_gaussianization_job, list(range(10)))
    return results, time.time() - start


def test_criterion_4_gaussianization(single_modality_runs):
    results, _ = single_modality_runs
    hits = sum(1 for norm, covdev, _ in results if norm <= 0.3 and covdev <= 0.35)
    norms = [round(r[0], 3) for r in results]
    devs = [round(r[1], 3) for r in results]
    ok = hits >= 8
    _report(4, ok, f"{hits}/10 seeds with mean norm <= 0.3 and |cov-I| <= 0.35 "
                   f"(norms {norms}, deviations {devs})")


def test_criterion_5_table1_band(single_modality_runs):
    results, elapsed = single_modality_runs
    mses = [r[2] for r in results]
    mean = float(np.mean(mses))
    ok = 0.15 <= mean <= 0.45 and elapsed < 1800.0
    _report(5, ok, f"mean test MSE vs signal {mean:.3f} over 10 replicates "
                   f"(values {[round(m, 3) for m in mses]}), {elapsed:.0f}s")


# ------------------------------------------------------------------ 6

COMBO_INDICES = {"X": [0], "XU": [0, 1], "XV": [0, 2], "XW": [0, 3]}

# Table 2, case 2 / scenario 2 / n=3000: mean (std) over the published runs
PAPER_TABLE2 = {"XU": (0.62, 0.175), "X": (1.718, 0.877), "XV": (2.679, 0.642),
                "XW": (2.861, 0.684)}


def _table2_job(args):
    rep_index, combo = args
    seed = replicate_seed(6006, rep_index)
    bundle = gen_dataset(SynthConfig(scenario=2, case=2, n=N_BENCH, seed=seed))
    sub = bundle.dataset.subset(COMBO_INDICES[combo])
    _, reps, _ = train_encoders(sub, TrainConfig(seed=seed))
    splits = make_splits(N_BENCH, seed=seed)
    pred = fit_head(
        reps, sub.response, cfg=FitConfig(seed=seed, **BENCH_FIT),
        train_idx=splits[0], val_idx=splits[1],
    )
    ev = evaluate(pred, reps, sub.response, split=splits, signal=bundle.signal)
    return combo, ev.mse_signal


@pytest.fixture(scope="session")
def table2_runs():
    jobs = [(r, combo) for r in range(10) for combo in COMBO_INDICES]
    out = _pmap(_table2_job, jobs)
    by_combo = {c: [] for c in COMBO_INDICES}
    for combo, mse in out:
        by_combo[combo].append(mse)
    return {c: float(np.mean(v)) for c, v in by_combo.items()}


def test_criterion_6_table2_ordering(table2_runs):
    means = table2_runs
    ordered = means["XU"] < means["X"] < means["XV"] < means["XW"]
    in_band = all(
        abs(means[c] - mu) <= 2.0 * sd for c, (mu, sd) in PAPER_TABLE2.items()
    )
    ok = ordered and in_band
    detail = "  ".join(f"{c}={means[c]:.3f}" for c in ("XU", "X", "XV", "XW"))
    _report(6, ok, f"means {detail}; strict ordering={ordered}, within 2 sd bands={in_band}")


# ------------------------------------------------------------- 7 and 8

SELECTION_NS = (500, 1500, 3000)


def _selection_job(args):
    n, rep_index = args
    seed = replicate_seed(7007 + n, rep_index)
    bundle = gen_dataset(SynthConfig(scenario=2, case=2, n=n, seed=seed))
    report = conditional_select(
        bundle.dataset,
        preselected=[0],
        candidates=[1, 2, 3],
        train_cfg=TrainConfig(seed=seed),
        sel_cfg=SelectionConfig(threshold="permutation", num_perms=199, level=0.05,
                                seed=seed),
    )
    return n, report.selected, tuple(report.active_set)


@pytest.fixture(scope="session")
def selection_runs():
    jobs = [(n, r) for n in SELECTION_NS for r in range(20)]
    out = _pmap(_selection_job, jobs)
    by_n = {n: [] for n in SELECTION_NS}
    for n, selected, active in out:
        by_n[n].append((selected, active))
    return by_n


def test_criterion_7_table4_selection(selection_runs):
    runs = selection_runs[N_BENCH]
    u_hits = sum(1 for selected, _ in runs if selected == "U")
    w_hits = sum(1 for selected, _ in runs if selected == "W")
    ok = u_hits >= 18 and w_hits == 0
    _report(7, ok, f"U argmax in {u_hits}/20 replicates at n={N_BENCH}; "
                   f"W selected {w_hits} times")


def test_criterion_8_selection_consistency(selection_runs):
    props = []
    for n in SELECTION_NS:
        runs = selection_runs[n]
        props.append(sum(1 for selected, _ in runs if selected == "U") / len(runs))
    nondecreasing = all(a <= b + 1e-12 for a, b in zip(props, props[1:]))
    detail = ", ".join(f"n={n}: {p:.2f}" for n, p in zip(SELECTION_NS, props))
    _report(8, nondecreasing, f"correct-selection proportions {detail}")


# ------------------------------------------------------------------ 9


def test_criterion_9_bench_determinism(tmp_path):
    cfg = {
        "scenario": 2,
        "case": 2,
        "n": 400,
        "replicates": 2,
        "seed": 11,
        "workers": 2,
        "train": {"outer_iters": 12, "inner_steps": 20, "disc_steps": 60},
        "fit": dict(BENCH_FIT, max_epochs=60, patience=61),
        "selection": {"threshold": "permutation", "num_perms": 99, "level": 0.05},
    }
    cfg_path = tmp_path / "bench.json"
    cfg_path.write_text(json.dumps(cfg))
    out1, out2 = tmp_path / "run1", tmp_path / "run2"
    code1 = cli_main(["bench", "--config", str(cfg_path), "--out", str(out1)])
    code2 = cli_main(["bench", "--config", str(cfg_path), "--out", str(out2)])
    b1 = (out1 / "report.json").read_bytes()
    b2 = (out2 / "report.json").read_bytes()
    ok = code1 == 0 and code2 == 0 and b1 == b2
    _report(9, ok, f"two bench runs, report.json byte-identical={b1 == b2} "
                   f"({len(b1)} bytes)")
