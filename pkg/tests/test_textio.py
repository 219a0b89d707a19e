import numpy as np
import pytest

from comwit.opcore import TensorOperator, TensorSpace
from comwit.statezoo import tau
from comwit.textio import MatrixFormatError, dumps, format_complex, io_roundtrip, loads, parse_complex

from conftest import rand_operator


def test_complex_tokens():
    for tok, z in [("1", 1), ("-2.5", -2.5), ("1+2i", 1 + 2j), ("0.5-1e-3i", 0.5 - 1e-3j), ("-3i", -3j)]:
        assert parse_complex(tok) == z
    for z in [0.1, -1 / 3 + 2j / 7, 1e-300 - 1e300j, -0.0]:
        assert parse_complex(format_complex(z)) == z
    with pytest.raises(MatrixFormatError):
        parse_complex("1+i2")


def test_roundtrip_tau(tmp_path):
    t = tau(0.4, 0.0)
    path = tmp_path / "tau.txt"
    path.write_text(dumps(t.op))
    back = io_roundtrip(path)
    assert np.abs(back.mat - t.mat).max() == 0
    assert back.dims == (2, 4)


def test_roundtrip_random():
    rng = np.random.default_rng(0)
    for dims in [(2, 2), (3, 3), (2, 2, 2)]:
        for _ in range(20):
            op = rand_operator(dims, rng)
            back = loads(dumps(op))
            assert np.array_equal(back.mat, op.mat)
            assert dumps(back) == dumps(op)


def test_dims_mismatch():
    op = TensorOperator(TensorSpace([2, 4]), np.eye(8))
    text = dumps(op)
    assert loads(text).dims == (2, 4)
    bad = text.replace("dims: 2 4", "dims: 3 3")
    with pytest.raises(MatrixFormatError):
        loads(bad)


def test_malformed_inputs():
    with pytest.raises(MatrixFormatError):
        loads("2 2\n1 0\n0 1\n")
    with pytest.raises(MatrixFormatError):
        loads("dims: 2\n1 0\n0\n")
    with pytest.raises(MatrixFormatError, match="Hermitian"):
        loads("dims: 2\n1 1\n0 1\n")
    assert loads("# comment\ndims: 2\n1 0\n0 1\n").trace() == 2
