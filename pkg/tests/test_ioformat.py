import numpy as np
import pytest

from jobrec.errors import ParseError
from jobrec.ioformat import load_arrays, save_arrays


def test_round_trip_preserves_meta_and_arrays(tmp_path):
    path = str(tmp_path / "ck.bin")
    meta = {"kind": "model", "nested": {"a": [1, 2]}, "f": 0.25}
    arrays = {
        "w": np.arange(12, dtype=np.float64).reshape(3, 4),
        "idx": np.array([5, 7], dtype=np.int64),
        "flag": np.array([1.5]),
    }
    save_arrays(path, meta, arrays)
    got_meta, got = load_arrays(path)
    assert got_meta == meta
    assert set(got) == set(arrays)
    for name in arrays:
        assert got[name].dtype == arrays[name].dtype
        assert got[name].shape == arrays[name].shape
        assert np.array_equal(got[name], arrays[name])


def test_two_saves_are_byte_identical(tmp_path):
    a, b = str(tmp_path / "a.bin"), str(tmp_path / "b.bin")
    arrays = {"w": np.linspace(0, 1, 7)}
    save_arrays(a, {"v": 1}, arrays)
    save_arrays(b, {"v": 1}, arrays)
    assert (tmp_path / "a.bin").read_bytes() == (tmp_path / "b.bin").read_bytes()


def test_non_contiguous_and_big_endian_inputs(tmp_path):
    path = str(tmp_path / "ck.bin")
    base = np.arange(16, dtype=np.float64).reshape(4, 4)
    arrays = {"t": base.T, "be": np.array([1, 2], dtype=">i4")}
    save_arrays(path, {}, arrays)
    _, got = load_arrays(path)
    assert np.array_equal(got["t"], base.T)
    assert np.array_equal(got["be"], np.array([1, 2]))
    assert got["be"].dtype.byteorder != ">"


def test_rejects_foreign_files(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"PNG....definitely not a checkpoint")
    with pytest.raises(ParseError):
        load_arrays(str(path))
