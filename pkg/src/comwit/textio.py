"""Plain-text matrix format.

::

    dims: 2 4
    0.5 0 0 ... 0.25-0.5i
    ...

One row per line, whitespace separated. Tokens are ``a``, ``a+bi`` or
``a-bi`` with decimal reals (exponents allowed). Values are written with
17 significant digits so a write/read cycle reproduces doubles exactly.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .opcore import TensorOperator, TensorSpace, as_operator, hermitian_defect

_REAL = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[+-]?inf|nan"
_TOKEN = re.compile(rf"^(?P<re>{_REAL})(?:(?P<im>[+-](?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)i)?$")
_IMAG_ONLY = re.compile(rf"^(?P<im>{_REAL})i$")


class MatrixFormatError(ValueError):
    pass


def format_complex(z: complex) -> str:
    re_part = f"{z.real:.17g}"
    if z.imag == 0:
        return re_part
    return f"{re_part}{z.imag:+.17g}i"


def parse_complex(token: str) -> complex:
    m = _TOKEN.match(token)
    if m:
        im = m.group("im")
        return complex(float(m.group("re")), float(im) if im else 0.0)
    m = _IMAG_ONLY.match(token)
    if m:
        return complex(0.0, float(m.group("im")))
    raise MatrixFormatError(f"malformed complex token {token!r}")


def dumps(op) -> str:
    op = as_operator(op)
    lines = ["dims: " + " ".join(str(d) for d in op.dims)]
    for row in op.mat:
        lines.append(" ".join(format_complex(complex(z)) for z in row))
    return "\n".join(lines) + "\n"


def loads(text: str) -> TensorOperator:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise MatrixFormatError("empty matrix file")
    head = lines[0]
    if not head.startswith("dims:"):
        raise MatrixFormatError(f"first line must start with 'dims:', got {head!r}")
    try:
        dims = tuple(int(t) for t in head[len("dims:"):].split())
        space = TensorSpace(dims)
    except ValueError as exc:
        raise MatrixFormatError(f"malformed dims line {head!r}: {exc}") from exc
    rows = [[parse_complex(t) for t in ln.split()] for ln in lines[1:]]
    n = space.total
    if len(rows) != n or any(len(r) != n for r in rows):
        shape = f"{len(rows)}x{max((len(r) for r in rows), default=0)}"
        raise MatrixFormatError(f"dimension mismatch: dims {dims} need {n}x{n} entries, got {shape}")
    mat = np.array(rows, dtype=complex)
    asym = hermitian_defect(mat)
    if asym > 1e-12 * max(np.abs(mat).max(), 0.0):
        raise MatrixFormatError(f"matrix is not Hermitian (max asymmetry {asym:.3e})")
    return TensorOperator(space, mat)


def read_operator(path) -> TensorOperator:
    return loads(Path(path).read_text())


def write_operator(op, path) -> None:
    Path(path).write_text(dumps(op))


def io_roundtrip(path) -> TensorOperator:
    """Parse ``path`` and check that re-serialization reproduces the same values."""
    op = read_operator(path)
    again = loads(dumps(op))
    if not np.array_equal(op.mat, again.mat):
        raise MatrixFormatError("write/read cycle changed matrix entries")
    return op
