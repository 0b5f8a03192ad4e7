import struct

import numpy as np
import pytest

from robust_lsq.data_io import (
    CsvSchema,
    load_csv,
    load_dataset,
    save_dataset,
    split_batches,
)
from robust_lsq.datagen import Layout, SynthSpec, generate
from robust_lsq.errors import (
    ContractError,
    DataFormatError,
    DatasetIOError,
    UnsupportedVersionError,
)


@pytest.fixture
def dataset(tmp_path):
    spec = SynthSpec(3, 13, 4, 0.3, 0.1, Layout("heavy", 1, 0.6, 0.2), seed=9)
    batches, truth = generate(spec)
    path = tmp_path / "d.rlsq"
    save_dataset(path, batches, truth, spec)
    return path, batches, truth, spec


def test_round_trip(dataset):
    path, batches, truth, spec = dataset
    ds = load_dataset(path)
    assert ds.batches == batches
    assert ds.truth == truth
    assert ds.spec == spec
    for a, b in zip(ds.truth.uncorrupted_sets, truth.uncorrupted_sets):
        np.testing.assert_array_equal(a, b)


def test_round_trip_without_truth(tmp_path):
    batches, _ = generate(SynthSpec(2, 5, 2, seed=1))
    path = tmp_path / "plain.rlsq"
    save_dataset(path, batches)
    ds = load_dataset(path)
    assert ds.batches == batches and ds.truth is None and ds.spec is None


def test_truncated_file(dataset):
    path = dataset[0]
    blob = path.read_bytes()
    path.write_bytes(blob[:-20])
    with pytest.raises(DataFormatError):
        load_dataset(path)
    path.write_bytes(blob[:50])
    with pytest.raises(DataFormatError):
        load_dataset(path)


def test_corrupted_byte_fails_checksum(dataset):
    path = dataset[0]
    blob = bytearray(path.read_bytes())
    blob[200] ^= 0xFF
    path.write_bytes(bytes(blob))
    with pytest.raises(DataFormatError, match="checksum"):
        load_dataset(path)


def test_unsupported_version(dataset):
    path = dataset[0]
    blob = bytearray(path.read_bytes())
    struct.pack_into("<I", blob, 8, 2)
    path.write_bytes(bytes(blob))
    with pytest.raises(UnsupportedVersionError):
        load_dataset(path)


def test_bad_magic_and_missing_file(tmp_path):
    p = tmp_path / "x.bin"
    p.write_bytes(b"\0" * 200)
    with pytest.raises(DataFormatError, match="magic"):
        load_dataset(p)
    with pytest.raises(DatasetIOError):
        load_dataset(tmp_path / "nope")


def test_save_rejects_mixed_shapes(tmp_path):
    a, _ = generate(SynthSpec(2, 5, 1, seed=0))
    b, _ = generate(SynthSpec(2, 6, 1, seed=0))
    with pytest.raises(ContractError):
        save_dataset(tmp_path / "m", a + b)


def write(tmp_path, text, name="t.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_csv_reads_columns_and_drops_bad_rows(tmp_path):
    p = write(tmp_path, "a,b,y,note\n1,2,3,x\n4,,6,y\n7,8,nine,z\n10,11,12,w\n")
    data = load_csv(p, CsvSchema("y", ("b", "a")))
    np.testing.assert_array_equal(data.x, [[2, 11], [1, 10]])
    np.testing.assert_array_equal(data.y, [3, 12])
    assert data.dropped == 2


def test_csv_intercept_and_delimiter(tmp_path):
    p = write(tmp_path, "a;y\n1;2\n3;4\n")
    data = load_csv(p, CsvSchema.from_mapping(
        {"target": "y", "features": "a", "delimiter": ";", "add_intercept": "true"}))
    np.testing.assert_array_equal(data.x, [[1, 3], [1, 1]])


def test_csv_delimiter_mismatch_names_line(tmp_path):
    p = write(tmp_path, "a;y\n1;2\n")
    with pytest.raises(DataFormatError, match="line 1"):
        load_csv(p, CsvSchema("y", ("a",)))


def test_csv_ragged_row_names_line(tmp_path):
    p = write(tmp_path, "a,y\n1,2\n3,4,5\n")
    with pytest.raises(DataFormatError, match="line 3"):
        load_csv(p, CsvSchema("y", ("a",)))


def test_csv_missing_column_and_empty(tmp_path):
    with pytest.raises(DataFormatError, match="missing"):
        load_csv(write(tmp_path, "a,b\n1,2\n"), CsvSchema("y", ("a",)))
    with pytest.raises(DataFormatError):
        load_csv(write(tmp_path, "", "e.csv"), CsvSchema("y", ("a",)))
    with pytest.raises(ContractError):
        CsvSchema("y", ("y",))


def test_split_batches_counts_and_order():
    x = np.arange(20.0).reshape(2, 10)
    y = np.arange(10.0)
    seq = split_batches(x, y, 3, first_id=5)
    assert [b.id for b in seq] == [5, 6, 7]
    np.testing.assert_array_equal(seq[1].y, [3, 4, 5])
    sh1 = split_batches(x, y, 3, "shuffled", seed=1)
    sh2 = split_batches(x, y, 3, "shuffled", seed=1)
    assert sh1 == sh2
    used = np.concatenate([b.y for b in sh1])
    assert len(set(used.tolist())) == 9
    for b in sh1:
        np.testing.assert_array_equal(b.x[0], b.y)


@pytest.mark.parametrize("kw", [dict(batch_size=0), dict(batch_size=11),
                                dict(order="shuffled"), dict(order="zigzag", seed=1)])
def test_split_batches_validation(kw):
    args = dict(batch_size=3)
    args.update(kw)
    with pytest.raises(ContractError):
        split_batches(np.zeros((1, 10)), np.zeros(10), **args)
