"""Aligned multimodal sample container and the CSV manifest format.

On disk a dataset is a manifest JSON of the form

    {
      "modalities": [{"name": "X", "path": "X.csv"}, ...],
      "response": "Y.csv"
    }

with relative paths resolved against the manifest's directory.  Every CSV
has a header row and one sample per row; row order is aligned across all
files.  Parsing is strict: a missing file, a non-numeric cell, or a
row-count mismatch each raise a DataError naming the file (and line)
involved.  Floats are written with ``repr`` so export -> load round-trips
bit-exactly.
"""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError


@dataclass
class MultimodalDataset:
    """K aligned sample matrices plus a response matrix.

    modalities[k] has shape (n, p_k); response has shape (n, q).  A 1-D
    response is promoted to a column.  No missing values are allowed.
    """

    modalities: list
    response: np.ndarray
    names: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.modalities) < 1:
            raise DataError("dataset needs at least one modality")
        self.modalities = [np.asarray(m, dtype=np.float64) for m in self.modalities]
        self.response = np.asarray(self.response, dtype=np.float64)
        if self.response.ndim == 1:
            self.response = self.response[:, None]
        if not self.names:
            self.names = [f"M{k}" for k in range(len(self.modalities))]
        if len(self.names) != len(self.modalities):
            raise DataError(
                f"{len(self.names)} names for {len(self.modalities)} modalities"
            )
        n = self.response.shape[0]
        for name, m in zip(self.names, self.modalities):
            if m.ndim != 2:
                raise DataError(f"modality {name} must be a 2-D matrix")
            if m.shape[0] != n:
                raise DataError(
                    f"modality {name} has {m.shape[0]} rows, response has {n}"
                )
            if not np.all(np.isfinite(m)):
                raise DataError(f"modality {name} contains non-finite values")
        if not np.all(np.isfinite(self.response)):
            raise DataError("response contains non-finite values")

    @property
    def n(self):
        return self.response.shape[0]

    @property
    def k(self):
        return len(self.modalities)

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DataError(f"no modality named {name!r}; have {self.names}") from None

    def subset(self, indices) -> "MultimodalDataset":
        """New dataset restricted to the given modality indices (order kept)."""
        return MultimodalDataset(
            modalities=[self.modalities[i] for i in indices],
            response=self.response,
            names=[self.names[i] for i in indices],
        )

    def take_rows(self, rows) -> "MultimodalDataset":
        return MultimodalDataset(
            modalities=[m[rows] for m in self.modalities],
            response=self.response[rows],
            names=list(self.names),
        )


def _read_matrix_csv(path: Path) -> np.ndarray:
    if not path.is_file():
        raise DataError(f"missing file: {path}")
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file, expected a header row")
        width = len(header)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != width:
                raise DataError(
                    f"{path}:{lineno}: expected {width} columns, found {len(row)}"
                )
            try:
                rows.append([float(cell) for cell in row])
            except ValueError:
                bad = next(c for c in row if not _is_float(c))
                raise DataError(f"{path}:{lineno}: non-numeric cell {bad!r}") from None
    if not rows:
        raise DataError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64)


def _is_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def load_multimodal_csv(manifest_path) -> MultimodalDataset:
    """Load a dataset from a manifest JSON (see module docstring)."""
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise DataError(f"missing manifest: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as e:
        raise DataError(f"{manifest_path}: invalid JSON ({e})") from None
    if "modalities" not in manifest or "response" not in manifest:
        raise DataError(f"{manifest_path}: manifest needs 'modalities' and 'response'")
    base = manifest_path.parent
    names, matrices, paths = [], [], []
    for entry in manifest["modalities"]:
        path = base / entry["path"]
        names.append(entry["name"])
        paths.append(path)
        matrices.append(_read_matrix_csv(path))
    rpath = base / manifest["response"]
    response = _read_matrix_csv(rpath)
    n = response.shape[0]
    for name, path, m in zip(names, paths, matrices):
        if m.shape[0] != n:
            raise DataError(
                f"row-count mismatch: {path} has {m.shape[0]} rows, "
                f"{rpath} has {n}"
            )
    return MultimodalDataset(modalities=matrices, response=response, names=names)


def _write_matrix_csv(path: Path, m: np.ndarray, prefix: str):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"{prefix}{j}" for j in range(m.shape[1])])
        for row in m:
            writer.writerow([repr(float(v)) for v in row])


def export_dataset(dataset: MultimodalDataset, outdir) -> Path:
    """Write one CSV per modality plus response and manifest; returns manifest path."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    entries = []
    for name, m in zip(dataset.names, dataset.modalities):
        fname = f"{name}.csv"
        _write_matrix_csv(outdir / fname, m, prefix=f"{name.lower()}_")
        entries.append({"name": name, "path": fname})
    _write_matrix_csv(outdir / "Y.csv", dataset.response, prefix="y_")
    manifest = {"modalities": entries, "response": "Y.csv"}
    manifest_path = outdir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest_path
