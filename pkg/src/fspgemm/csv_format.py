"""Vector-major sparse format built from fixed-width column segments.

Rows are grouped into bands of vec_width consecutive rows. Within one
band, the nonzeros of one column form a vector of at most vec_width
members that a wide memory port can fetch in a single access. The
entry arrays are kept sorted by (band, col, row), so one B-row fetch
streams its vectors contiguously and rows of a band interleave by
column, which is the order the multiply pipeline consumes.

The on-disk form (FCSV) is a little-endian binary file: a 44-byte
header followed by one 12-byte record per nonzero.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from os import PathLike
from typing import BinaryIO, Iterator, NamedTuple, Union

import numpy as np

from fspgemm.matrices import CsrMatrix, MatrixFormatError, _readonly

_HEADER = struct.Struct("<4sIQQQIQ")
_MAGIC = b"FCSV"
_VERSION = 1
_RECORD_DTYPE = np.dtype([("row", "<u4"), ("col", "<u4"), ("val", "<f4")])

HEADER_BYTES = _HEADER.size
RECORD_BYTES = _RECORD_DTYPE.itemsize


class CsvVector(NamedTuple):
    """One fetch unit: the nonzeros of one column inside one row band."""

    band: int
    col: int
    rows: np.ndarray
    vals: np.ndarray

    @property
    def members(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class CsvMatrix:
    """Sparse matrix stored as parallel entry arrays in (band, col, row) order."""

    rows: int
    cols: int
    vec_width: int
    row_idx: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.vec_width < 1:
            raise ValueError("vec_width must be at least 1")
        if self.rows < 0 or self.cols < 0:
            raise ValueError("matrix dimensions must be non-negative")
        object.__setattr__(self, "row_idx", np.ascontiguousarray(self.row_idx, dtype=np.int64))
        object.__setattr__(self, "col_idx", np.ascontiguousarray(self.col_idx, dtype=np.int64))
        object.__setattr__(self, "values", np.ascontiguousarray(self.values, dtype=np.float32))
        if not (len(self.row_idx) == len(self.col_idx) == len(self.values)):
            raise ValueError("entry arrays must have equal length")
        problem = _check_order(self)
        if problem is not None:
            raise ValueError(problem)
        for arr in (self.row_idx, self.col_idx, self.values):
            _readonly(arr)

    @property
    def nnz(self) -> int:
        return len(self.values)

    @property
    def bands(self) -> np.ndarray:
        return self.row_idx // self.vec_width


def _check_order(m: CsvMatrix) -> str | None:
    if m.nnz == 0:
        return None
    if m.row_idx.min() < 0 or m.row_idx.max() >= m.rows:
        return "row index out of range"
    if m.col_idx.min() < 0 or m.col_idx.max() >= m.cols:
        return "column index out of range"
    b = m.bands
    key_prev = (b[:-1], m.col_idx[:-1], m.row_idx[:-1])
    key_next = (b[1:], m.col_idx[1:], m.row_idx[1:])
    lt = _lex_less(key_prev, key_next)
    if not bool(lt.all()):
        k = int(np.flatnonzero(~lt)[0])
        return (
            f"entries {k} and {k + 1} violate (band, col, row) order: "
            f"({b[k]}, {m.col_idx[k]}, {m.row_idx[k]}) then "
            f"({b[k + 1]}, {m.col_idx[k + 1]}, {m.row_idx[k + 1]})"
        )
    return None


def _lex_less(a: tuple, b: tuple) -> np.ndarray:
    """Strict lexicographic a < b over parallel key component arrays."""
    b0, c0, r0 = a
    b1, c1, r1 = b
    return (b0 < b1) | ((b0 == b1) & ((c0 < c1) | ((c0 == c1) & (r0 < r1))))


def validate_csv(m: CsvMatrix) -> str | None:
    """Return a description of the first ordering violation, or None if valid."""
    return _check_order(m)


def csr_to_csv(m: CsrMatrix, vec_width: int) -> CsvMatrix:
    """Regroup a CSR matrix into (band, col, row) vector-major order."""
    if vec_width < 1:
        raise ValueError("vec_width must be at least 1")
    row_idx = np.repeat(np.arange(m.rows, dtype=np.int64), np.diff(m.row_ptr))
    bands = row_idx // vec_width
    order = np.lexsort((row_idx, m.col_index, bands))
    return CsvMatrix(m.rows, m.cols, vec_width, row_idx[order], m.col_index[order], m.values[order])


def csv_to_csr(m: CsvMatrix) -> CsrMatrix:
    """Regroup entries back into row-major CSR; inverse of csr_to_csv."""
    order = np.lexsort((m.col_idx, m.row_idx))
    counts = np.bincount(m.row_idx, minlength=m.rows) if m.nnz else np.zeros(m.rows, dtype=np.int64)
    row_ptr = np.zeros(m.rows + 1, dtype=np.int64)
    np.cumsum(counts, out=row_ptr[1:])
    return CsrMatrix(m.rows, m.cols, row_ptr, m.col_idx[order], m.values[order])


def enumerate_vectors(m: CsvMatrix) -> Iterator[CsvVector]:
    """Yield the fetch units in storage order."""
    if m.nnz == 0:
        return
    b = m.bands
    starts = np.flatnonzero(
        np.concatenate([[True], (b[1:] != b[:-1]) | (m.col_idx[1:] != m.col_idx[:-1])])
    )
    bounds = np.append(starts, m.nnz)
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        yield CsvVector(int(b[lo]), int(m.col_idx[lo]), m.row_idx[lo:hi], m.values[lo:hi])


def count_vectors(m: CsvMatrix) -> int:
    """Number of fetch units, without materialising them."""
    if m.nnz == 0:
        return 0
    b = m.bands
    changed = (b[1:] != b[:-1]) | (m.col_idx[1:] != m.col_idx[:-1])
    return int(changed.sum()) + 1


Sink = Union[str, PathLike, BinaryIO]


def _open_binary(target: Sink, mode: str):
    if hasattr(target, "read" if "r" in mode else "write"):
        return target, False
    return open(target, mode), True


def write_fcsv(target: Sink, m: CsvMatrix) -> None:
    """Serialise to the FCSV binary layout (header + 12-byte records)."""
    if m.rows >= 2**32 or m.cols >= 2**32:
        raise MatrixFormatError("FCSV stores indices as 32-bit: dimensions must be below 2**32")
    stream, owned = _open_binary(target, "wb")
    try:
        stream.write(_HEADER.pack(_MAGIC, _VERSION, m.rows, m.cols, m.nnz, m.vec_width, 0))
        records = np.empty(m.nnz, dtype=_RECORD_DTYPE)
        records["row"] = m.row_idx
        records["col"] = m.col_idx
        records["val"] = m.values
        stream.write(records.tobytes())
    finally:
        if owned:
            stream.close()


def read_fcsv(source: Sink) -> CsvMatrix:
    """Read an FCSV file back into a CsvMatrix, checking the header and length."""
    stream, owned = _open_binary(source, "rb")
    try:
        raw = stream.read(HEADER_BYTES)
        if len(raw) < HEADER_BYTES:
            raise MatrixFormatError(f"truncated header: got {len(raw)} of {HEADER_BYTES} bytes")
        magic, version, rows, cols, nnz, vec_width, reserved = _HEADER.unpack(raw)
        if magic != _MAGIC:
            raise MatrixFormatError(f"bad magic {magic!r}, expected {_MAGIC!r}")
        if version != _VERSION:
            raise MatrixFormatError(f"unsupported version {version}")
        if reserved != 0:
            raise MatrixFormatError("reserved header field must be zero")
        body = stream.read(nnz * RECORD_BYTES + 1)
        if len(body) != nnz * RECORD_BYTES:
            raise MatrixFormatError(
                f"body has {len(body)} bytes, expected exactly {nnz * RECORD_BYTES} for {nnz} entries"
            )
        records = np.frombuffer(body, dtype=_RECORD_DTYPE)
        return CsvMatrix(
            rows,
            cols,
            vec_width,
            records["row"].astype(np.int64),
            records["col"].astype(np.int64),
            records["val"].copy(),
        )
    finally:
        if owned:
            stream.close()
