"""Core sparse-matrix containers (COO and CSR) and conversions.

All values are stored as IEEE-754 single precision; indices are 0-based
int64 arrays. Matrices are immutable after construction: the backing
numpy arrays are marked read-only so they can be shared freely between
threads and between pipeline stages.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np


class MatrixFormatError(Exception):
    """A matrix file or in-memory matrix violates its format contract."""


class SparseRow(NamedTuple):
    """One sparse row as parallel (column, value) arrays, sorted by column."""

    cols: np.ndarray
    vals: np.ndarray

    @staticmethod
    def empty() -> "SparseRow":
        return SparseRow(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float32))


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def _as_index_array(a, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(a, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    return arr


def _as_value_array(a) -> np.ndarray:
    arr = np.ascontiguousarray(a, dtype=np.float32)
    if arr.ndim != 1:
        raise ValueError("values must be one-dimensional")
    return arr


@dataclass(frozen=True)
class CooMatrix:
    """Coordinate-format sparse matrix with unique, in-range entries."""

    rows: int
    cols: int
    row_idx: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "row_idx", _as_index_array(self.row_idx, "row_idx"))
        object.__setattr__(self, "col_idx", _as_index_array(self.col_idx, "col_idx"))
        object.__setattr__(self, "values", _as_value_array(self.values))
        if self.rows < 0 or self.cols < 0:
            raise ValueError("matrix dimensions must be non-negative")
        if not (len(self.row_idx) == len(self.col_idx) == len(self.values)):
            raise ValueError("row_idx, col_idx, and values must have equal length")
        if self.nnz:
            if self.row_idx.min() < 0 or self.row_idx.max() >= self.rows:
                raise ValueError("row index out of range")
            if self.col_idx.min() < 0 or self.col_idx.max() >= self.cols:
                raise ValueError("column index out of range")
            if _count_distinct_coords(self.rows, self.cols, self.row_idx, self.col_idx) != self.nnz:
                raise ValueError("duplicate (row, col) coordinate")
        for arr in (self.row_idx, self.col_idx, self.values):
            _readonly(arr)

    @property
    def nnz(self) -> int:
        return len(self.values)

    @classmethod
    def from_entries(cls, rows: int, cols: int, entries: Iterable[tuple[int, int, float]]) -> "CooMatrix":
        """Build from an iterable of (row, col, value) triples."""
        ent = list(entries)
        r = np.array([e[0] for e in ent], dtype=np.int64)
        c = np.array([e[1] for e in ent], dtype=np.int64)
        v = np.array([e[2] for e in ent], dtype=np.float32)
        return cls(rows, cols, r, c, v)

    def entries(self) -> list[tuple[int, int, float]]:
        return list(zip(self.row_idx.tolist(), self.col_idx.tolist(), self.values.tolist()))


@dataclass(frozen=True)
class CsrMatrix:
    """Compressed sparse row matrix: row_ptr offsets into col_index/values.

    The constructor checks only array shapes so that deliberately broken
    instances can still be built and handed to validate_csr; every
    conversion in this package produces matrices that pass validate_csr.
    """

    rows: int
    cols: int
    row_ptr: np.ndarray
    col_index: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "row_ptr", _as_index_array(self.row_ptr, "row_ptr"))
        object.__setattr__(self, "col_index", _as_index_array(self.col_index, "col_index"))
        object.__setattr__(self, "values", _as_value_array(self.values))
        if self.rows < 0 or self.cols < 0:
            raise ValueError("matrix dimensions must be non-negative")
        if len(self.row_ptr) != self.rows + 1:
            raise ValueError(f"row_ptr has length {len(self.row_ptr)}, expected rows+1 = {self.rows + 1}")
        if len(self.col_index) != len(self.values):
            raise ValueError("col_index and values must have equal length")
        for arr in (self.row_ptr, self.col_index, self.values):
            _readonly(arr)

    @property
    def nnz(self) -> int:
        return len(self.values)

    def row(self, i: int) -> SparseRow:
        return csr_row(self, i)


@dataclass(frozen=True)
class MatrixMeta:
    """Descriptive metadata: name, dimensions, nonzero count, density."""

    name: str
    rows: int
    cols: int
    nnz: int
    density: float = field(init=False)

    def __post_init__(self):
        size = self.rows * self.cols
        density = self.nnz / size if size else 0.0
        object.__setattr__(self, "density", density)
        if self.nnz > 0 and not (0.0 < density <= 1.0):
            raise ValueError(f"density {density} outside (0, 1]")

    @classmethod
    def from_csr(cls, name: str, m: CsrMatrix) -> "MatrixMeta":
        return cls(name, m.rows, m.cols, m.nnz)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "rows": self.rows,
            "cols": self.cols,
            "nnz": self.nnz,
            "density": self.density,
        }


def _count_distinct_coords(rows: int, cols: int, r: np.ndarray, c: np.ndarray) -> int:
    # Packed int64 key when it cannot overflow, otherwise pairwise lexsort.
    if cols == 0 or rows <= (2**62) // max(cols, 1):
        key = r * np.int64(cols) + c
        return len(np.unique(key))
    order = np.lexsort((c, r))
    rs, cs = r[order], c[order]
    if len(rs) == 0:
        return 0
    changed = (rs[1:] != rs[:-1]) | (cs[1:] != cs[:-1])
    return int(changed.sum()) + 1


def coo_to_csr(m: CooMatrix) -> CsrMatrix:
    """Sort entries by (row, col) and compress into CSR."""
    order = np.lexsort((m.col_idx, m.row_idx))
    counts = np.bincount(m.row_idx, minlength=m.rows)
    row_ptr = np.zeros(m.rows + 1, dtype=np.int64)
    np.cumsum(counts, out=row_ptr[1:])
    return CsrMatrix(m.rows, m.cols, row_ptr, m.col_idx[order], m.values[order])


def csr_to_coo(m: CsrMatrix) -> CooMatrix:
    """Expand CSR back to coordinate form, in row-major entry order."""
    row_idx = np.repeat(np.arange(m.rows, dtype=np.int64), np.diff(m.row_ptr))
    return CooMatrix(m.rows, m.cols, row_idx, m.col_index.copy(), m.values.copy())


def validate_csr(m: CsrMatrix) -> str | None:
    """Return a description of the first violated CSR invariant, or None if valid."""
    if m.row_ptr[0] != 0:
        return f"row_ptr[0] is {m.row_ptr[0]}, expected 0"
    diffs = np.diff(m.row_ptr)
    bad = np.flatnonzero(diffs < 0)
    if len(bad):
        return f"row_ptr not non-decreasing at row {bad[0]}"
    if m.row_ptr[m.rows] != m.nnz:
        return f"row_ptr[{m.rows}] is {m.row_ptr[m.rows]}, expected nnz = {m.nnz}"
    if m.nnz:
        if m.col_index.min() < 0 or m.col_index.max() >= m.cols:
            k = np.flatnonzero((m.col_index < 0) | (m.col_index >= m.cols))[0]
            return f"column index {m.col_index[k]} out of range at entry {k}"
        within = np.diff(m.col_index)
        # Non-increasing steps are only legal at row boundaries.
        boundary = np.zeros(max(m.nnz - 1, 0), dtype=bool)
        inner = m.row_ptr[1:-1]
        boundary[inner[(inner > 0) & (inner < m.nnz)] - 1] = True
        bad = np.flatnonzero((within <= 0) & ~boundary)
        if len(bad):
            i = int(np.searchsorted(m.row_ptr, bad[0], side="right")) - 1
            return f"duplicate/unsorted column index in row {i}"
    return None


def csr_row(m: CsrMatrix, i: int) -> SparseRow:
    """Row i of a CSR matrix as a sorted sparse vector (read-only views)."""
    if not 0 <= i < m.rows:
        raise IndexError(f"row index {i} out of range for {m.rows}-row matrix")
    lo, hi = m.row_ptr[i], m.row_ptr[i + 1]
    return SparseRow(m.col_index[lo:hi], m.values[lo:hi])


def csr_identity(n: int) -> CsrMatrix:
    idx = np.arange(n, dtype=np.int64)
    return CsrMatrix(n, n, np.arange(n + 1, dtype=np.int64), idx, np.ones(n, dtype=np.float32))


def random_csr(
    rows: int,
    cols: int,
    density: float,
    rng: np.random.Generator,
    value_low: float = -1.0,
    value_high: float = 1.0,
) -> CsrMatrix:
    """Uniformly random CSR matrix with distinct coordinates and nonzero values."""
    if not 0.0 <= density <= 1.0:
        raise ValueError("density must lie in [0, 1]")
    size = rows * cols
    nnz = int(round(density * size))
    flat = rng.choice(size, size=nnz, replace=False) if nnz else np.empty(0, dtype=np.int64)
    vals = rng.uniform(value_low, value_high, size=nnz).astype(np.float32)
    vals[vals == 0.0] = 1.0
    coo = CooMatrix(rows, cols, flat // max(cols, 1), flat % max(cols, 1), vals)
    return coo_to_csr(coo)


def csr_bitwise_equal(a: CsrMatrix, b: CsrMatrix) -> bool:
    """Exact equality: same dims, same structure, bit-identical float32 values."""
    return (
        a.rows == b.rows
        and a.cols == b.cols
        and np.array_equal(a.row_ptr, b.row_ptr)
        and np.array_equal(a.col_index, b.col_index)
        and np.array_equal(a.values.view(np.uint32), b.values.view(np.uint32))
    )
