import numpy as np
import pytest

from qflow import qafld
from qflow.errors import FieldFormatError
from qflow.fields import Grid, ScalarField, VectorField

from conftest import make_rng, random_field


def test_scalar_round_trip(tmp_path, grid2):
    f = random_field(grid2, make_rng(21))
    path = tmp_path / "f.qafld"
    qafld.write(path, f)
    g = qafld.read(path)
    assert isinstance(g, ScalarField)
    assert g.grid == grid2
    assert np.array_equal(g.values, f.values)


def test_vector_round_trip(tmp_path, grid3_small):
    rng = make_rng(22)
    v = VectorField([random_field(grid3_small, rng) for _ in range(3)])
    path = tmp_path / "v.qafld"
    qafld.write(path, v)
    w = qafld.read(path)
    assert isinstance(w, VectorField)
    for a, b in zip(v, w):
        assert np.array_equal(a.values, b.values)


def test_layout_is_exactly_specified(grid2_small):
    # header: magic, n, m, N (u32 le), L (f64 le); payload interleaved re/im
    f = random_field(grid2_small, make_rng(23))
    blob = qafld.dump_bytes(f)
    assert blob[:6] == b"QAFLD1"
    assert blob[6] == 2 and blob[7] == 1
    assert int.from_bytes(blob[8:12], "little") == 8
    assert np.frombuffer(blob[12:20], dtype="<f8")[0] == 1.0
    payload = np.frombuffer(blob[20:], dtype="<f8")
    assert payload.size == 2 * 64
    assert payload[0] == f.values[0, 0].real
    assert payload[1] == f.values[0, 0].imag
    # row-major: second complex value is f[0, 1]
    assert payload[2] == f.values[0, 1].real


def test_reject_bad_magic(grid2_small):
    blob = bytearray(qafld.dump_bytes(random_field(grid2_small, make_rng(1))))
    blob[:6] = b"NOTFLD"
    with pytest.raises(FieldFormatError):
        qafld.load_bytes(bytes(blob))


def test_reject_non_power_of_two_N(grid2_small):
    blob = bytearray(qafld.dump_bytes(random_field(grid2_small, make_rng(1))))
    blob[8:12] = (12).to_bytes(4, "little")
    with pytest.raises(FieldFormatError):
        qafld.load_bytes(bytes(blob))


def test_reject_truncated_payload(grid2_small):
    blob = qafld.dump_bytes(random_field(grid2_small, make_rng(1)))
    with pytest.raises(FieldFormatError):
        qafld.load_bytes(blob[:-8])
