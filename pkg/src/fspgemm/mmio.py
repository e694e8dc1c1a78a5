"""Matrix Market coordinate-format reader and writer.

Supports the coordinate layout with real, integer, or pattern fields and
general or symmetric storage. Errors name the offending 1-based line
number. Duplicate coordinates are rejected rather than summed, and
symmetric files are expanded by mirroring off-diagonal entries.
"""

from __future__ import annotations

import io
from os import PathLike
from typing import TextIO, Union

import numpy as np

from fspgemm.matrices import CooMatrix, CsrMatrix, MatrixFormatError, coo_to_csr, csr_to_coo

_FIELDS = {"real", "integer", "pattern"}
_SYMMETRIES = {"general", "symmetric"}

Source = Union[str, PathLike, TextIO]


def _open_text(source: Source):
    if hasattr(source, "read"):
        return source, False
    return open(source, "r", encoding="ascii"), True


def parse_matrix_market(source: Source) -> CooMatrix:
    """Parse a coordinate Matrix Market file into a CooMatrix."""
    stream, owned = _open_text(source)
    try:
        return _parse_stream(stream)
    finally:
        if owned:
            stream.close()


def _parse_stream(stream: TextIO) -> CooMatrix:
    header = stream.readline()
    if not header:
        raise MatrixFormatError("line 1: empty file, expected MatrixMarket header")
    parts = header.split()
    if len(parts) != 5 or parts[0] != "%%MatrixMarket":
        raise MatrixFormatError("line 1: expected '%%MatrixMarket matrix coordinate <field> <symmetry>'")
    _, obj, layout, field, symmetry = (p.lower() for p in parts)
    if obj != "matrix":
        raise MatrixFormatError(f"line 1: unsupported object '{obj}', expected 'matrix'")
    if layout != "coordinate":
        raise MatrixFormatError(f"line 1: unsupported layout '{layout}', expected 'coordinate'")
    if field not in _FIELDS:
        raise MatrixFormatError(f"line 1: unsupported field '{field}', expected real, integer, or pattern")
    if symmetry not in _SYMMETRIES:
        raise MatrixFormatError(f"line 1: unsupported symmetry '{symmetry}', expected general or symmetric")

    lineno = 1
    line = ""
    for line in stream:
        lineno += 1
        if line.strip() and not line.lstrip().startswith("%"):
            break
    else:
        raise MatrixFormatError(f"line {lineno}: missing size line")

    size_parts = line.split()
    if len(size_parts) != 3:
        raise MatrixFormatError(f"line {lineno}: size line needs 'rows cols nnz'")
    try:
        rows, cols, nnz = (int(p) for p in size_parts)
    except ValueError:
        raise MatrixFormatError(f"line {lineno}: size line needs three integers") from None
    if rows < 0 or cols < 0 or nnz < 0:
        raise MatrixFormatError(f"line {lineno}: negative value in size line")

    want = 2 if field == "pattern" else 3
    r = np.empty(nnz, dtype=np.int64)
    c = np.empty(nnz, dtype=np.int64)
    v = np.empty(nnz, dtype=np.float32)
    linenos = np.empty(nnz, dtype=np.int64)
    seen = 0
    for line in stream:
        lineno += 1
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            continue
        if seen >= nnz:
            raise MatrixFormatError(f"line {lineno}: more than the declared {nnz} entries")
        parts = stripped.split()
        if len(parts) != want:
            raise MatrixFormatError(f"line {lineno}: expected {want} fields, got {len(parts)}")
        try:
            i = int(parts[0])
            j = int(parts[1])
            val = 1.0 if field == "pattern" else float(parts[2])
        except ValueError:
            raise MatrixFormatError(f"line {lineno}: malformed entry '{stripped}'") from None
        if not (1 <= i <= rows):
            raise MatrixFormatError(f"line {lineno}: row index {i} outside 1..{rows}")
        if not (1 <= j <= cols):
            raise MatrixFormatError(f"line {lineno}: column index {j} outside 1..{cols}")
        r[seen] = i - 1
        c[seen] = j - 1
        v[seen] = val
        linenos[seen] = lineno
        seen += 1
    if seen != nnz:
        raise MatrixFormatError(f"line {lineno or 3}: file ended after {seen} of {nnz} declared entries")

    _reject_duplicates(cols, r, c, linenos)

    if symmetry == "symmetric":
        if rows != cols:
            raise MatrixFormatError("symmetric matrix must be square")
        off = r != c
        r, c = np.concatenate([r, c[off]]), np.concatenate([c, r[off]])
        v = np.concatenate([v, v[off]])
        linenos = np.concatenate([linenos, linenos[off]])
        # Catches a file that stores both (i, j) and (j, i).
        _reject_duplicates(cols, r, c, linenos)

    return CooMatrix(rows, cols, r, c, v)


def _reject_duplicates(cols, r, c, linenos):
    if len(r) == 0:
        return
    key = r * np.int64(max(cols, 1)) + c
    order = np.argsort(key, kind="stable")
    dup = np.flatnonzero(key[order][1:] == key[order][:-1])
    if len(dup):
        first, second = order[dup[0]], order[dup[0] + 1]
        k = second if linenos[second] >= linenos[first] else first
        raise MatrixFormatError(
            f"line {linenos[k]}: duplicate entry for ({r[k] + 1}, {c[k] + 1})"
        )


def read_matrix_market_csr(source: Source) -> CsrMatrix:
    return coo_to_csr(parse_matrix_market(source))


def write_matrix_market(target, m: CsrMatrix | CooMatrix) -> None:
    """Write a matrix as a general real coordinate file with 1-based indices."""
    coo = csr_to_coo(m) if isinstance(m, CsrMatrix) else m
    stream, owned = _open_text_write(target)
    try:
        stream.write("%%MatrixMarket matrix coordinate real general\n")
        stream.write(f"{coo.rows} {coo.cols} {coo.nnz}\n")
        for i, j, val in zip(coo.row_idx.tolist(), coo.col_idx.tolist(), coo.values.tolist()):
            stream.write(f"{i + 1} {j + 1} {np.float32(val):.9g}\n")
    finally:
        if owned:
            stream.close()


def _open_text_write(target):
    if hasattr(target, "write"):
        return target, False
    return open(target, "w", encoding="ascii"), True


def parse_matrix_market_string(text: str) -> CooMatrix:
    return parse_matrix_market(io.StringIO(text))
