"""The on-disk workflow: CSV manifest in, representations and metrics out.

Mirrors what the CLI does (``sufrep gen/train/select/eval``) but from
Python, on a dataset exported to the manifest format.  Point
``load_multimodal_csv`` at your own manifest to run the same pipeline on
real data: one CSV per modality plus a response CSV, row-aligned.

Run:  python3 demos/06_csv_workflow.py
"""

import tempfile
from pathlib import Path

from sufrep import (
    FitConfig,
    SynthConfig,
    TrainConfig,
    encode_all,
    evaluate,
    export_dataset,
    fit_head,
    gen_dataset,
    load_checkpoint,
    load_multimodal_csv,
    make_splits,
    save_checkpoint,
    train_encoders,
)

workdir = Path(tempfile.mkdtemp(prefix="sufrep_demo_"))

# 1. write a dataset to disk (substitute your own manifest here)
bundle = gen_dataset(SynthConfig(scenario=2, case=1, n=600, seed=0))
manifest = export_dataset(bundle.dataset, workdir / "data")
print("dataset exported:", manifest)

# 2. load it back and train on two modalities
data = load_multimodal_csv(manifest).subset([0, 1])
cfg = TrainConfig(outer_iters=30, seed=0)
bank, reps, _ = train_encoders(data, cfg)
ckpt = save_checkpoint(workdir / "checkpoint.json", bank, cfg, data.names)
print("checkpoint written:", ckpt)

# 3. reload the checkpoint and evaluate a prediction head
bank2, cfg2, names = load_checkpoint(ckpt)
reps2 = encode_all(bank2, data)
splits = make_splits(data.n, seed=0)
pred = fit_head(reps2, data.response, cfg=FitConfig(seed=0),
                train_idx=splits[0], val_idx=splits[1])
report = evaluate(pred, reps2, data.response, split=splits)
print(f"test MSE on held-out rows: {report.mse:.3f} "
      f"(train/val/test sizes {report.n_train}/{report.n_val}/{report.n_test})")
