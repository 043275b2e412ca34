"""Command-line interface.

Commands:
    gen     write a synthetic benchmark dataset as CSVs + manifest
    train   fit modality encoders on a dataset, write a checkpoint
    select  score candidate modalities (marginal or conditional)
    eval    fit the prediction head on checkpointed encoders and report metrics
    bench   run the replicated benchmark and emit reports

Every command accepts ``--config FILE`` (a JSON object whose keys are the
flag names; nested "train"/"fit"/"selection" objects configure those
stages); explicit flags override config-file values.  The output
directory may also come from the SUFREP_OUTDIR environment variable.

Exit codes: 0 success, 1 usage/configuration error, 2 data error,
3 numeric/training error.
"""

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .bench import BenchConfig, emit_report, run_benchmark
from .data import export_dataset, load_multimodal_csv
from .errors import ConfigError, DataError, NumericError, SufrepError, TrainingError
from .predict import FitConfig, evaluate, fit_head, make_splits, predict
from .select import SelectionConfig, conditional_select
from .synth import SynthConfig, gen_dataset
from .train import TrainConfig, encode_all, load_checkpoint, save_checkpoint, train_encoders

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; the contract here is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _load_config_file(path):
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{p}: invalid JSON ({e})") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{p}: config must be a JSON object")
    return doc


def _merged(args, file_cfg, key, default=None):
    """Flag value if given, else config-file value, else default."""
    val = getattr(args, key.replace("-", "_"), None)
    if val is not None:
        return val
    if key in file_cfg:
        return file_cfg[key]
    return default


def _outdir(args, file_cfg):
    out = _merged(args, file_cfg, "out") or os.environ.get("SUFREP_OUTDIR")
    if out is None:
        raise ConfigError("no output location: pass --out or set SUFREP_OUTDIR")
    return Path(out)


def _stage_config(cls, file_cfg, key, **overrides):
    body = dict(file_cfg.get(key, {}))
    body.update({k: v for k, v in overrides.items() if v is not None})
    return cls(**body)


def _split_names(value):
    if value is None:
        return None
    return [s for s in (part.strip() for part in value.split(",")) if s]


def cmd_gen(args):
    file_cfg = _load_config_file(args.config)
    cfg = SynthConfig(
        scenario=int(_merged(args, file_cfg, "scenario", 1)),
        case=int(_merged(args, file_cfg, "case", 1)),
        n=int(_merged(args, file_cfg, "n", 1000)),
        p=int(_merged(args, file_cfg, "p", 10)),
        q=int(_merged(args, file_cfg, "q", 10)),
        sigma=float(_merged(args, file_cfg, "sigma", 1.0)),
        seed=int(_merged(args, file_cfg, "seed", 0)),
    )
    outdir = _outdir(args, file_cfg)
    bundle = gen_dataset(cfg)
    manifest = export_dataset(bundle.dataset, outdir)
    # record generator provenance in the manifest itself (the loader
    # ignores extra keys); scenario1_form documents that the first
    # response surface uses exp(Z2) in its second term
    doc = json.loads(manifest.read_text())
    doc["generator"] = {
        "scenario": cfg.scenario,
        "case": cfg.case,
        "n": cfg.n,
        "p": cfg.p,
        "q": cfg.q,
        "sigma": cfg.sigma,
        "seed": cfg.seed,
        "scenario1_form": "exp(Z2)",
    }
    manifest.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(manifest)
    return EXIT_OK


def _select_modalities(data, names):
    if not names:
        return data
    return data.subset([data.index_of(n) for n in names])


def cmd_train(args):
    file_cfg = _load_config_file(args.config)
    data = load_multimodal_csv(_merged(args, file_cfg, "data"))
    names = _split_names(_merged(args, file_cfg, "modalities"))
    data = _select_modalities(data, names)
    cfg = _stage_config(
        TrainConfig, file_cfg, "train",
        seed=args.seed, outer_iters=args.outer_iters, inner_steps=args.inner_steps,
        latent_dim=args.latent_dim, lam=args.lam, xi=args.xi,
        step_size=args.step_size, batch_size=args.batch_size,
    )
    bank, reps, log = train_encoders(data, cfg)
    out = _merged(args, file_cfg, "out") or str(_outdir(args, file_cfg) / "checkpoint.json")
    save_checkpoint(out, bank, cfg, data.names)
    if log:
        print(f"objective: first {log[0].total:.6f} last {log[-1].total:.6f}")
    print(out)
    return EXIT_OK


def cmd_select(args):
    file_cfg = _load_config_file(args.config)
    data = load_multimodal_csv(_merged(args, file_cfg, "data"))
    preselected = _split_names(_merged(args, file_cfg, "preselected")) or []
    candidates = _split_names(_merged(args, file_cfg, "candidates"))
    if not candidates:
        candidates = [n for n in data.names if n not in preselected]
    pre_idx = [data.index_of(n) for n in preselected]
    cand_idx = [data.index_of(n) for n in candidates]
    threshold = "fixed" if args.fixed_tau is not None else "permutation"
    sel_cfg = _stage_config(
        SelectionConfig, file_cfg, "selection",
        threshold=threshold if args.fixed_tau is not None else None,
        tau=args.fixed_tau, level=args.level, num_perms=args.num_perms, seed=args.seed,
    )
    train_cfg = _stage_config(TrainConfig, file_cfg, "train", seed=args.seed)
    bank = None
    if args.checkpoint:
        bank, ck_cfg, ck_names = load_checkpoint(args.checkpoint)
        want = [data.names[i] for i in pre_idx + cand_idx]
        if ck_names != want:
            raise ConfigError(
                f"checkpoint modalities {ck_names} do not match selection order {want}"
            )
        train_cfg = ck_cfg
    report = conditional_select(data, pre_idx, cand_idx, train_cfg, sel_cfg, bank=bank)
    out = _merged(args, file_cfg, "out")
    text = report.to_json(out)
    print(text if out is None else out)
    return EXIT_OK


def cmd_eval(args):
    file_cfg = _load_config_file(args.config)
    data = load_multimodal_csv(_merged(args, file_cfg, "data"))
    bank, ck_cfg, ck_names = load_checkpoint(_merged(args, file_cfg, "checkpoint"))
    data = _select_modalities(data, ck_names)
    reps = encode_all(bank, data)
    fit_cfg = _stage_config(FitConfig, file_cfg, "fit", seed=args.seed)
    splits = make_splits(data.n, fit_cfg.split, seed=fit_cfg.seed)
    pred = fit_head(
        reps, data.response, task=args.task, cfg=fit_cfg,
        train_idx=splits[0], val_idx=splits[1],
    )
    report = evaluate(pred, reps, data.response, split=(splits[0], splits[1], splits[2]),
                      seed=fit_cfg.seed)
    doc = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    out = _merged(args, file_cfg, "out")
    if out:
        Path(out).write_text(doc)
        print(out)
    else:
        print(doc, end="")
    if args.predictions:
        preds = predict(pred, reps)
        with open(args.predictions, "w") as fh:
            fh.write("row,prediction\n")
            for i, v in enumerate(preds[:, 0]):
                fh.write(f"{i},{v!r}\n")
    return EXIT_OK


def cmd_bench(args):
    file_cfg = _load_config_file(args.config)
    body = {k: v for k, v in file_cfg.items() if k not in ("out", "formats")}
    for key in ("scenario", "case", "n", "p", "q", "replicates", "seed", "workers"):
        val = getattr(args, key, None)
        if val is not None:
            body[key] = val
    if args.sigma is not None:
        body["sigma"] = args.sigma
    if args.no_selection:
        body["run_selection"] = False
    cfg = BenchConfig.from_dict(body)
    outdir = _outdir(args, file_cfg)
    formats = _split_names(_merged(args, file_cfg, "formats")) or ["json", "csv", "markdown"]
    result = run_benchmark(cfg)
    paths = emit_report(result, outdir, formats=formats)
    for p in paths:
        print(p)
    if result.failures:
        print(f"failed replicates: {result.failures}", file=sys.stderr)
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="sufrep", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a synthetic dataset")
    p.add_argument("--config")
    p.add_argument("--scenario", type=int)
    p.add_argument("--case", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("train", help="fit encoders, write a checkpoint")
    p.add_argument("--config")
    p.add_argument("--data", help="dataset manifest JSON")
    p.add_argument("--modalities", help="comma-separated subset to train on")
    p.add_argument("--seed", type=int)
    p.add_argument("--outer-iters", type=int)
    p.add_argument("--inner-steps", type=int)
    p.add_argument("--latent-dim", type=int)
    p.add_argument("--lam", type=float)
    p.add_argument("--xi", type=float)
    p.add_argument("--step-size", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("select", help="marginal/conditional modality selection")
    p.add_argument("--config")
    p.add_argument("--data")
    p.add_argument("--preselected", help="comma-separated modality names")
    p.add_argument("--candidates", help="comma-separated modality names")
    p.add_argument("--checkpoint", help="freeze preselected encoders from this checkpoint")
    p.add_argument("--fixed-tau", type=float)
    p.add_argument("--level", type=float)
    p.add_argument("--num-perms", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_select)

    p = sub.add_parser("eval", help="fit head on checkpointed encoders and score")
    p.add_argument("--config")
    p.add_argument("--data")
    p.add_argument("--checkpoint")
    p.add_argument("--task", default="regression",
                   choices=["regression", "binary_classification"])
    p.add_argument("--seed", type=int)
    p.add_argument("--predictions", help="also write per-row predictions CSV here")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("bench", help="replicated benchmark with reports")
    p.add_argument("--config")
    p.add_argument("--scenario", type=int)
    p.add_argument("--case", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--replicates", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--no-selection", action="store_true")
    p.add_argument("--formats", help="comma-separated: json,csv,markdown")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (TrainingError, NumericError) as e:
        print(f"numeric error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except SufrepError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
