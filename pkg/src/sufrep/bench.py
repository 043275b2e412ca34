"""Benchmark runner: modality combinations, selection proportions, reports.

One replicate draws a synthetic dataset, trains encoders for each
configured modality combination (X alone and X paired with each
additional modality), fits a prediction head per combination, and runs
conditional selection with X preselected and U, V, W as candidates.
Replicates are independent (seeded by a splittable scheme) and may run
in a worker pool; aggregation is a single-threaded reduce in replicate
order, so the emitted report is byte-identical across runs and pool
widths.  Wall-clock timings are kept out of the canonical report (they
land in a sidecar) for exactly that reason.

MSE conventions: ``mse`` is against the observed response; ``mse_signal``
is against the noiseless response surface, which is the quantity
comparable across noise levels and the primary benchmark metric.
"""

import csv
import json
import multiprocessing
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .predict import FitConfig, evaluate, fit_head, make_splits
from .rng import replicate_seed
from .select import SelectionConfig, conditional_select
from .synth import MODALITY_NAMES, SynthConfig, gen_dataset
from .train import TrainConfig, train_encoders

COMBO_MEMBERS = {
    "X": ("X",),
    "XU": ("X", "U"),
    "XV": ("X", "V"),
    "XW": ("X", "W"),
}
COMBO_ORDER = ("X", "XU", "XV", "XW")
CANDIDATE_ORDER = ("U", "V", "W")


@dataclass
class BenchConfig:
    """Everything one benchmark run needs; JSON-serializable."""

    scenario: int = 2
    case: int = 2
    n: int = 3000
    p: int = 10
    q: int = 10
    sigma: float = 1.0
    replicates: int = 10
    seed: int = 0
    workers: int = 1
    combos: list = field(default_factory=lambda: list(COMBO_ORDER))
    run_selection: bool = True
    train: TrainConfig = field(default_factory=TrainConfig)
    # benchmark heads train a fixed epoch budget with no early stopping:
    # sensitivity to uninformative added modalities is part of what the
    # benchmark measures, and a validation-stopped head hides it
    fit: FitConfig = field(
        default_factory=lambda: FitConfig(max_epochs=300, patience=301, restore_best=False)
    )
    selection: SelectionConfig = field(default_factory=SelectionConfig)

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigError(f"replicates must be >= 1, got {self.replicates}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        for combo in self.combos:
            if combo not in COMBO_MEMBERS:
                raise ConfigError(f"unknown combo {combo!r}; valid: {sorted(COMBO_MEMBERS)}")

    def to_dict(self):
        d = dict(self.__dict__)
        d["train"] = self.train.to_dict()
        d["fit"] = dict(self.fit.__dict__)
        d["fit"]["split"] = list(self.fit.split)
        d["selection"] = dict(self.selection.__dict__)
        d["combos"] = list(self.combos)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "train" in d:
            d["train"] = TrainConfig.from_dict(d["train"])
        if "fit" in d:
            fit = dict(d["fit"])
            if "split" in fit:
                fit["split"] = tuple(fit["split"])
            d["fit"] = FitConfig(**fit)
        if "selection" in d:
            d["selection"] = SelectionConfig(**d["selection"])
        return cls(**d)


def run_replicate(cfg: BenchConfig, index: int) -> dict:
    """One full replicate; raises on failure (the caller records it)."""
    seed = replicate_seed(cfg.seed, index)
    bundle = gen_dataset(
        SynthConfig(
            scenario=cfg.scenario, case=cfg.case, n=cfg.n,
            p=cfg.p, q=cfg.q, sigma=cfg.sigma, seed=seed,
        )
    )
    splits = make_splits(cfg.n, cfg.fit.split, seed=seed)
    record = {"replicate": index, "seed": seed, "combos": {}}
    for combo in cfg.combos:
        idx = [bundle.dataset.index_of(name) for name in COMBO_MEMBERS[combo]]
        sub = bundle.dataset.subset(idx)
        _, reps, log = train_encoders(sub, replace(cfg.train, seed=seed))
        pred = fit_head(
            reps, sub.response, cfg=replace(cfg.fit, seed=seed),
            train_idx=splits[0], val_idx=splits[1],
        )
        ev = evaluate(pred, reps, sub.response, split=splits, signal=bundle.signal)
        record["combos"][combo] = {
            "mse": ev.mse,
            "mse_signal": ev.mse_signal,
            "objective_first": log[0].total if log else None,
            "objective_last": log[-1].total if log else None,
        }
    if cfg.run_selection:
        report = conditional_select(
            bundle.dataset,
            preselected=[0],
            candidates=[1, 2, 3],
            train_cfg=replace(cfg.train, seed=seed),
            sel_cfg=replace(cfg.selection, seed=seed),
        )
        record["selection"] = {
            "selected": report.selected,
            "active_set": report.active_set,
            "candidates": report.to_dict()["candidates"],
        }
    return record


def _replicate_job(args):
    cfg, index = args
    start = time.perf_counter()
    try:
        record = run_replicate(cfg, index)
    except Exception as e:  # record and keep going; the report counts failures
        record = {"replicate": index, "error": f"{type(e).__name__}: {e}"}
    return record, time.perf_counter() - start


@dataclass
class BenchmarkResult:
    config: dict
    replicates: list
    combo_stats: dict
    selection_stats: dict
    failures: int
    wall_clock: list  # seconds per replicate; excluded from the canonical report

    def to_dict(self):
        """Canonical (timing-free) representation; deterministic given config."""
        return {
            "config": self.config,
            "replicates": self.replicates,
            "combo_stats": self.combo_stats,
            "selection_stats": self.selection_stats,
            "failures": self.failures,
        }


def _aggregate(cfg: BenchConfig, records: list) -> BenchmarkResult:
    ok = [r for r in records if "error" not in r]
    combo_stats = {}
    for combo in cfg.combos:
        for key in ("mse", "mse_signal"):
            vals = [r["combos"][combo][key] for r in ok if combo in r["combos"]]
            stats = combo_stats.setdefault(combo, {})
            if vals:
                stats[f"mean_{key}"] = float(np.mean(vals))
                stats[f"std_{key}"] = float(np.std(vals))
            stats["n"] = len(vals)
    selection_stats = {}
    if cfg.run_selection and ok:
        sel = [r["selection"] for r in ok if r.get("selection")]
        total = len(sel)
        for name in CANDIDATE_ORDER:
            selection_stats[name] = {
                "selected_proportion": sum(s["selected"] == name for s in sel) / total,
                "active_proportion": sum(name in s["active_set"] for s in sel) / total,
            }
        selection_stats["n"] = total
    return BenchmarkResult(
        config=cfg.to_dict(),
        replicates=records,
        combo_stats=combo_stats,
        selection_stats=selection_stats,
        failures=len(records) - len(ok),
        wall_clock=[],
    )


def run_benchmark(cfg: BenchConfig) -> BenchmarkResult:
    """Run all replicates (optionally in a pool) and aggregate in order."""
    jobs = [(cfg, r) for r in range(cfg.replicates)]
    if cfg.workers > 1:
        with multiprocessing.Pool(processes=cfg.workers) as pool:
            outcomes = pool.map(_replicate_job, jobs)
    else:
        outcomes = [_replicate_job(j) for j in jobs]
    records = [rec for rec, _ in outcomes]
    result = _aggregate(cfg, records)
    result.wall_clock = [round(dt, 3) for _, dt in outcomes]
    return result


def _flat_rows(result: BenchmarkResult):
    """Per-replicate flat records carrying every numeric field."""
    rows = []
    for rec in result.replicates:
        if "error" in rec:
            rows.append(
                {"replicate": rec["replicate"], "kind": "error", "name": rec["error"]}
            )
            continue
        for combo, vals in rec["combos"].items():
            rows.append(
                {
                    "replicate": rec["replicate"],
                    "kind": "combo",
                    "name": combo,
                    "mse": vals["mse"],
                    "mse_signal": vals["mse_signal"],
                    "objective_first": vals["objective_first"],
                    "objective_last": vals["objective_last"],
                }
            )
        if rec.get("selection"):
            for cand in rec["selection"]["candidates"]:
                rows.append(
                    {
                        "replicate": rec["replicate"],
                        "kind": "candidate",
                        "name": cand["name"],
                        "v_n": cand["v_n"],
                        "dcor": cand["dcor"],
                        "tau": cand["tau"],
                        "active": int(cand["active"]),
                        "selected": int(rec["selection"]["selected"] == cand["name"]),
                    }
                )
    return rows


CSV_COLUMNS = [
    "replicate", "kind", "name", "mse", "mse_signal", "objective_first",
    "objective_last", "v_n", "dcor", "tau", "active", "selected",
]


def write_report_csv(result: BenchmarkResult, path):
    """Flat per-replicate CSV; floats written with repr for full precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in _flat_rows(result):
            out = {}
            for key, val in row.items():
                out[key] = repr(val) if isinstance(val, float) else val
            writer.writerow(out)
    return path


def read_report_csv(path):
    """Inverse of write_report_csv: list of typed records."""
    rows = []
    with open(path, newline="") as fh:
        for raw in csv.DictReader(fh):
            row = {}
            for key, val in raw.items():
                if val is None or val == "":
                    continue
                if key in ("replicate", "active", "selected"):
                    row[key] = int(val)
                elif key in ("kind", "name"):
                    row[key] = val
                else:
                    row[key] = float(val)
            rows.append(row)
    return rows


def _markdown_table(header, rows):
    lines = ["| " + " | ".join(header) + " |",
             "|" + "|".join("---" for _ in header) + "|"]
    for row in rows:
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines)


def render_markdown(result: BenchmarkResult) -> str:
    """Tables mirroring the benchmark layout (combos in fixed order)."""
    cfg = result.config
    parts = [
        f"# Benchmark report (scenario {cfg['scenario']}, case {cfg['case']}, "
        f"n={cfg['n']}, {cfg['replicates']} replicates)",
        "",
        "## Test MSE by modality combination",
        "",
    ]
    rows = []
    for combo in COMBO_ORDER:
        if combo not in result.combo_stats:
            continue
        s = result.combo_stats[combo]
        if s.get("n"):
            rows.append(
                [
                    f"MSE{combo}",
                    f"{s['mean_mse_signal']:.3f} ({s['std_mse_signal']:.3f})",
                    f"{s['mean_mse']:.3f} ({s['std_mse']:.3f})",
                    str(s["n"]),
                ]
            )
        else:
            rows.append([f"MSE{combo}", "-", "-", "0"])
    parts.append(
        _markdown_table(["combination", "mse vs signal (std)", "mse vs observed (std)", "n"], rows)
    )
    parts.append("")
    if result.selection_stats:
        parts.append("## Selection proportions (X preselected; candidates U, V, W)")
        parts.append("")
        rows = []
        for name in CANDIDATE_ORDER:
            s = result.selection_stats.get(name)
            if s is None:
                continue
            rows.append(
                [
                    name,
                    f"{100.0 * s['selected_proportion']:.1f}%",
                    f"{100.0 * s['active_proportion']:.1f}%",
                ]
            )
        parts.append(_markdown_table(["candidate", "selected", "in active set"], rows))
        parts.append("")
    if result.failures:
        parts.append(f"**Failed replicates: {result.failures}**")
        parts.append("")
    return "\n".join(parts)


def emit_report(result: BenchmarkResult, outdir, formats=("json", "csv", "markdown")):
    """Write the selected report formats; returns the written paths.

    The JSON and CSV documents are deterministic functions of the config
    (timings go to a separate ``timings.json`` sidecar).
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for fmt in formats:
        if fmt == "json":
            p = outdir / "report.json"
            p.write_text(json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n")
        elif fmt == "csv":
            p = write_report_csv(result, outdir / "report.csv")
        elif fmt in ("markdown", "markdown-table", "md"):
            p = outdir / "report.md"
            p.write_text(render_markdown(result) + "\n")
        else:
            raise ConfigError(f"unknown report format {fmt!r}")
        paths.append(Path(p))
    timings = outdir / "timings.json"
    timings.write_text(json.dumps({"wall_clock_seconds": result.wall_clock}) + "\n")
    return paths
