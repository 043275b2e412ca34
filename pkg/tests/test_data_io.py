import json

import numpy as np
import pytest

from sufrep.data import MultimodalDataset, export_dataset, load_multimodal_csv
from sufrep.errors import DataError
from sufrep.synth import SynthConfig, gen_dataset


def write_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(str(v) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")


def write_manifest(tmp_path, modalities, response="Y.csv"):
    manifest = {"modalities": modalities, "response": response}
    p = tmp_path / "manifest.json"
    p.write_text(json.dumps(manifest))
    return p


def test_single_modality_roundtrip(tmp_path):
    write_csv(tmp_path / "A.csv", ["a0", "a1"], [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    write_csv(tmp_path / "Y.csv", ["y0"], [[0.1], [0.2], [0.3]])
    ds = load_multimodal_csv(write_manifest(tmp_path, [{"name": "A", "path": "A.csv"}]))
    assert ds.k == 1
    assert ds.n == 3
    assert ds.names == ["A"]
    assert np.array_equal(ds.modalities[0], [[1, 2], [3, 4], [5, 6]])


def test_row_count_mismatch_names_both_files(tmp_path):
    write_csv(tmp_path / "A.csv", ["a0"], [[1.0], [2.0], [3.0]])
    write_csv(tmp_path / "Y.csv", ["y0"], [[1.0], [2.0], [3.0], [4.0]])
    with pytest.raises(DataError, match="A.csv.*3.*Y.csv.*4"):
        load_multimodal_csv(write_manifest(tmp_path, [{"name": "A", "path": "A.csv"}]))


def test_non_numeric_cell_reports_file_and_line(tmp_path):
    write_csv(tmp_path / "A.csv", ["a0"], [[1.0], ["oops"], [3.0]])
    write_csv(tmp_path / "Y.csv", ["y0"], [[1.0], [2.0], [3.0]])
    with pytest.raises(DataError, match=r"A\.csv:3.*oops"):
        load_multimodal_csv(write_manifest(tmp_path, [{"name": "A", "path": "A.csv"}]))


def test_missing_file_error(tmp_path):
    write_csv(tmp_path / "Y.csv", ["y0"], [[1.0]])
    with pytest.raises(DataError, match="missing file"):
        load_multimodal_csv(write_manifest(tmp_path, [{"name": "A", "path": "gone.csv"}]))


def test_missing_manifest(tmp_path):
    with pytest.raises(DataError, match="missing manifest"):
        load_multimodal_csv(tmp_path / "none.json")


def test_ragged_row_error(tmp_path):
    (tmp_path / "A.csv").write_text("a0,a1\n1.0,2.0\n3.0\n")
    write_csv(tmp_path / "Y.csv", ["y0"], [[1.0], [2.0]])
    with pytest.raises(DataError, match=r"A\.csv:3"):
        load_multimodal_csv(write_manifest(tmp_path, [{"name": "A", "path": "A.csv"}]))


def test_synth_export_load_roundtrip_bit_exact(tmp_path):
    bundle = gen_dataset(SynthConfig(scenario=2, case=1, n=37, seed=11))
    manifest = export_dataset(bundle.dataset, tmp_path / "out")
    loaded = load_multimodal_csv(manifest)
    assert loaded.names == bundle.dataset.names
    for a, b in zip(loaded.modalities, bundle.dataset.modalities):
        assert np.array_equal(a, b)
    assert np.array_equal(loaded.response, bundle.dataset.response)


def test_dataset_validation():
    with pytest.raises(DataError):
        MultimodalDataset(modalities=[], response=np.ones((3, 1)))
    with pytest.raises(DataError):
        MultimodalDataset(modalities=[np.ones((2, 2))], response=np.ones((3, 1)))
    with pytest.raises(DataError):
        MultimodalDataset(
            modalities=[np.array([[1.0], [np.inf]])], response=np.ones((2, 1))
        )


def test_subset_and_index_of():
    ds = MultimodalDataset(
        modalities=[np.ones((4, 2)), np.zeros((4, 3))],
        response=np.arange(4.0),
        names=["A", "B"],
    )
    assert ds.index_of("B") == 1
    sub = ds.subset([1])
    assert sub.names == ["B"]
    assert sub.modalities[0].shape == (4, 3)
    with pytest.raises(DataError):
        ds.index_of("C")
