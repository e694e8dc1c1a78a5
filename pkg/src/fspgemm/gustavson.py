"""Row-wise Gustavson sparse matrix product and its verification oracle.

C(i,:) is built by scaling B(j,:) by each A(i,j) and merging the scaled
rows into a sorted accumulator. The fold runs over A's row-i nonzeros in
ascending column order, and every index collision costs exactly one
addition with the accumulator value on the left. That ordering is a
contract, not an implementation detail: the dataflow simulator performs
the same operations in the same order, so the two agree bitwise.

Values that become 0.0 through multiplication or cancellation stay in
the structure; nothing here prunes numerical zeros.
"""

from __future__ import annotations

import numpy as np

from fspgemm.matrices import CsrMatrix, SparseRow, csr_row


def scale_row(alpha, row: SparseRow) -> SparseRow:
    """Multiply every value of a sorted sparse row by a float32 scalar."""
    return SparseRow(row.cols, np.float32(alpha) * row.vals)


def merge_rows(acc: SparseRow, addend: SparseRow) -> SparseRow:
    """Merge two sorted sparse rows; colliding indices add once, acc first.

    Vectorised, but element-for-element identical to a scalar two-pointer
    merge: each collision performs the single float32 addition
    acc_value + addend_value, and non-colliding values pass through
    untouched (no 0.0 + x rewrites, which would flip the sign of -0.0).
    """
    a_cols, a_vals = acc
    b_cols, b_vals = addend
    if len(a_cols) == 0:
        return addend
    if len(b_cols) == 0:
        return acc
    cols = np.union1d(a_cols, b_cols)
    vals = np.empty(len(cols), dtype=np.float32)
    ia = np.searchsorted(cols, a_cols)
    ib = np.searchsorted(cols, b_cols)
    a_hit = np.isin(a_cols, b_cols, assume_unique=True)
    b_hit = np.isin(b_cols, a_cols, assume_unique=True)
    vals[ia[~a_hit]] = a_vals[~a_hit]
    vals[ib[~b_hit]] = b_vals[~b_hit]
    vals[ia[a_hit]] = a_vals[a_hit] + b_vals[b_hit]
    return SparseRow(cols, vals)


def _require_conformable(a: CsrMatrix, b: CsrMatrix) -> None:
    if a.cols != b.rows:
        raise ValueError(f"dimension mismatch: ({a.rows}x{a.cols}) times ({b.rows}x{b.cols})")


def spgemm_rowwise(a: CsrMatrix, b: CsrMatrix) -> CsrMatrix:
    """Reference product: per-row ascending-column fold of merged scaled rows."""
    _require_conformable(a, b)
    col_chunks: list[np.ndarray] = []
    val_chunks: list[np.ndarray] = []
    row_ptr = np.zeros(a.rows + 1, dtype=np.int64)
    for i in range(a.rows):
        lo, hi = a.row_ptr[i], a.row_ptr[i + 1]
        acc = SparseRow.empty()
        for k in range(lo, hi):
            scaled = scale_row(a.values[k], csr_row(b, a.col_index[k]))
            acc = merge_rows(acc, scaled)
        row_ptr[i + 1] = row_ptr[i] + len(acc.cols)
        if len(acc.cols):
            col_chunks.append(acc.cols)
            val_chunks.append(acc.vals)
    cols = np.concatenate(col_chunks) if col_chunks else np.empty(0, dtype=np.int64)
    vals = np.concatenate(val_chunks) if val_chunks else np.empty(0, dtype=np.float32)
    return CsrMatrix(a.rows, b.cols, row_ptr, cols, vals)


def spgemm_oracle(a: CsrMatrix, b: CsrMatrix) -> CsrMatrix:
    """Independent check computed a different way: per-row dict accumulator.

    Accumulates in float64 in hash order and converts once at the end, so
    it shares neither code path nor rounding schedule with
    spgemm_rowwise. Structure (including cancellation zeros) matches
    exactly; values agree to float32 accumulation accuracy.
    """
    _require_conformable(a, b)
    a_ptr = a.row_ptr.tolist()
    a_cols = a.col_index.tolist()
    a_vals = a.values.tolist()
    b_ptr = b.row_ptr.tolist()
    b_cols = b.col_index.tolist()
    b_vals = b.values.tolist()
    row_ptr = np.zeros(a.rows + 1, dtype=np.int64)
    col_chunks: list[list[int]] = []
    val_chunks: list[list[float]] = []
    for i in range(a.rows):
        acc: dict[int, float] = {}
        for k in range(a_ptr[i], a_ptr[i + 1]):
            alpha = a_vals[k]
            j = a_cols[k]
            for t in range(b_ptr[j], b_ptr[j + 1]):
                c = b_cols[t]
                acc[c] = acc.get(c, 0.0) + alpha * b_vals[t]
        ordered = sorted(acc)
        row_ptr[i + 1] = row_ptr[i] + len(ordered)
        col_chunks.append(ordered)
        val_chunks.append([acc[c] for c in ordered])
    cols = np.array([c for chunk in col_chunks for c in chunk], dtype=np.int64)
    vals = np.array([v for chunk in val_chunks for v in chunk], dtype=np.float32)
    return CsrMatrix(a.rows, b.cols, row_ptr, cols, vals)


def count_flops(a: CsrMatrix, b: CsrMatrix) -> int:
    """2 · Σ over nonzeros A(i,j) of nnz(B(j,:)): one multiply and one add
    per partial-product element."""
    _require_conformable(a, b)
    if a.nnz == 0:
        return 0
    b_row_nnz = np.diff(b.row_ptr)
    return int(2 * b_row_nnz[a.col_index].sum())
