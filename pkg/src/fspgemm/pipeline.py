"""Functional simulation of the load / PE / store multiplication pipeline.

The load kernel walks the first operand in vector-major order, fetches
each needed row of the second operand exactly once per vector, and fans
the row out to the processing elements that own members of the vector.
Each PE multiplies the row by its scalar in sw-wide chunks, then a
sort-merge unit folds the scaled row into a double-buffered sorted
accumulator. When the scalar was the last nonzero of its output row,
the merged row is emitted to the store kernel instead of being buffered.

The simulation is functional rather than cycle-accurate: no clocks, and
fifo_depth only bounds back-pressure in a concurrent execution. Results
and statistics are deterministic and bit-identical to the row-wise
reference engine, because every float32 operation happens in the same
order with the same operands.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence

import numpy as np

from fspgemm.csv_format import CsvMatrix, csr_to_csv, enumerate_vectors
from fspgemm.gustavson import _require_conformable
from fspgemm.matrices import CsrMatrix, csr_row

_EMPTY_COLS = np.empty(0, dtype=np.int64)
_EMPTY_VALS = np.empty(0, dtype=np.float32)
_EMPTY_COLS.flags.writeable = False
_EMPTY_VALS.flags.writeable = False


class SimulationError(Exception):
    """The pipeline hit a diagnosed error (overflow, integrity violation)."""


@dataclass(frozen=True)
class PipelineConfig:
    """Architectural parameters: SIMD width, PE count, channel and buffer sizes."""

    sw: int
    num_pe: int
    fifo_depth: int = 64
    buffer_capacity: int = 65536

    def __post_init__(self):
        for name in ("sw", "num_pe", "fifo_depth", "buffer_capacity"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


class AElement(NamedTuple):
    """First-operand scalar job: value, B-vector count, output row, end-of-row flag."""

    val: np.float32
    b_num_vec: int
    a_row_ind: int
    reset: bool


class BVector(NamedTuple):
    """One sw-lane slice of a fetched B row; lanes past valid_count are inert."""

    val: np.ndarray
    b_col_ind: np.ndarray
    valid_count: int


class COutput(NamedTuple):
    """One output nonzero on the store channel."""

    val: np.float32
    c_row_ind: int
    c_col_ind: int


class BVectorStream:
    """Lazy chunking of one fetched B row into sw-lane vectors.

    Keeps only views of the row; vectors are materialised on iteration,
    the last one zero-padded up to sw lanes with an explicit valid_count.
    """

    __slots__ = ("cols", "vals", "sw")

    def __init__(self, cols: np.ndarray, vals: np.ndarray, sw: int):
        self.cols = cols
        self.vals = vals
        self.sw = sw

    @property
    def count(self) -> int:
        return -(-len(self.cols) // self.sw)

    def __iter__(self) -> Iterator[BVector]:
        sw = self.sw
        for lo in range(0, len(self.cols), sw):
            chunk_cols = self.cols[lo : lo + sw]
            chunk_vals = self.vals[lo : lo + sw]
            valid = len(chunk_cols)
            val = np.zeros(sw, dtype=np.float32)
            ind = np.zeros(sw, dtype=np.int64)
            val[:valid] = chunk_vals
            ind[:valid] = chunk_cols
            yield BVector(val, ind, valid)


class LoadEvent(NamedTuple):
    """One job for one PE: the scalar plus the B-row stream backing it.

    fresh_fetch is True only for the first member of a vector: that is
    the single off-chip row load the whole vector shares.
    """

    pe: int
    a: AElement
    bvectors: BVectorStream
    fresh_fetch: bool


class PeMemoryUnit:
    """Double-buffered sorted accumulator of one PE.

    The live region of the selected buffer is [head[S], tail[S]) with
    strictly increasing column indices; merges read it and write the
    other buffer, then flip the selector. capacity bounds the merged
    length; storage is swapped, not copied, per merge.
    """

    __slots__ = ("capacity", "head", "tail", "selector", "_cols", "_vals")

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be at least 1")
        self.capacity = capacity
        self._cols = [_EMPTY_COLS, _EMPTY_COLS]
        self._vals = [_EMPTY_VALS, _EMPTY_VALS]
        self.head = [0, 0]
        self.tail = [0, 0]
        self.selector = 0

    @property
    def occupancy(self) -> int:
        s = self.selector
        return self.tail[s] - self.head[s]

    def live(self) -> tuple[np.ndarray, np.ndarray]:
        s = self.selector
        return (
            self._cols[s][self.head[s] : self.tail[s]],
            self._vals[s][self.head[s] : self.tail[s]],
        )

    def store(self, cols: np.ndarray, vals: np.ndarray) -> None:
        """Install a merged row in the back buffer and make it the read side."""
        n = len(cols)
        if n > self.capacity:
            raise SimulationError(f"merged row of {n} entries exceeds buffer capacity {self.capacity}")
        w = 1 - self.selector
        self._cols[w] = cols
        self._vals[w] = vals
        self.head[w] = 0
        self.tail[w] = n
        self.selector = w

    def reset(self) -> None:
        """Return to the power-on state after a row is emitted."""
        self._cols = [_EMPTY_COLS, _EMPTY_COLS]
        self._vals = [_EMPTY_VALS, _EMPTY_VALS]
        self.head = [0, 0]
        self.tail = [0, 0]
        self.selector = 0


@dataclass
class SimStats:
    """Traffic and work counters accumulated over one simulation."""

    b_rows_loaded: int = 0
    b_rows_naive: int = 0
    b_vectors_sent: int = 0
    multiplications: int = 0
    merge_additions: int = 0
    c_entries_emitted: int = 0
    peak_buffer_occupancy: int = 0

    def observed_reduction(self) -> float:
        """Percentage of B-row loads saved against one load per A nonzero."""
        if self.b_rows_naive == 0:
            return 0.0
        return 100.0 * (self.b_rows_naive - self.b_rows_loaded) / self.b_rows_naive

    def to_dict(self) -> dict:
        return {
            "b_rows_loaded": self.b_rows_loaded,
            "b_rows_naive": self.b_rows_naive,
            "b_vectors_sent": self.b_vectors_sent,
            "multiplications": self.multiplications,
            "merge_additions": self.merge_additions,
            "c_entries_emitted": self.c_entries_emitted,
            "peak_buffer_occupancy": self.peak_buffer_occupancy,
            "observed_reduction": self.observed_reduction(),
        }


@dataclass(frozen=True)
class RowEmission:
    """One row's contiguous store-channel records from one PE."""

    row: int
    cols: np.ndarray
    vals: np.ndarray

    def to_coutputs(self) -> list[COutput]:
        return [
            COutput(v, self.row, int(c))
            for c, v in zip(self.cols.tolist(), np.asarray(self.vals))
        ]

    @classmethod
    def from_coutputs(cls, records: Sequence[COutput]) -> "RowEmission":
        if not records:
            raise ValueError("empty record list has no row index")
        row = records[0].c_row_ind
        if any(r.c_row_ind != row for r in records):
            raise ValueError("records span multiple rows")
        cols = np.array([r.c_col_ind for r in records], dtype=np.int64)
        vals = np.array([r.val for r in records], dtype=np.float32)
        return cls(row, cols, vals)


def load_schedule(a_csv: CsvMatrix, b: CsrMatrix, cfg: PipelineConfig) -> Iterator[LoadEvent]:
    """Walk A in vector-major order, yielding per-PE jobs.

    Each vector triggers exactly one fetch of B(col,:); the row's
    sw-lane vectors are replicated to every PE owning a member. Member
    row r goes to PE (r mod num_pe). reset marks row r's last nonzero.
    """
    if a_csv.vec_width != cfg.num_pe:
        raise ValueError(f"vec_width mismatch: A is banded for {a_csv.vec_width} PEs, config has {cfg.num_pe}")
    if a_csv.cols != b.rows:
        raise ValueError(f"dimension mismatch: ({a_csv.rows}x{a_csv.cols}) times ({b.rows}x{b.cols})")
    last_col = np.full(a_csv.rows, -1, dtype=np.int64)
    if a_csv.nnz:
        np.maximum.at(last_col, a_csv.row_idx, a_csv.col_idx)
    for vec in enumerate_vectors(a_csv):
        b_row = csr_row(b, vec.col)
        stream = BVectorStream(b_row.cols, b_row.vals, cfg.sw)
        n_vec = stream.count
        for pos, (r, aval) in enumerate(zip(vec.rows.tolist(), np.asarray(vec.vals))):
            a_el = AElement(aval, n_vec, r, bool(vec.col == last_col[r]))
            yield LoadEvent(r % cfg.num_pe, a_el, stream, pos == 0)


def pe_vecmult(a: AElement, bv: BVector) -> tuple[np.ndarray, np.ndarray, int]:
    """Scale one sw-lane vector by the job's scalar; padding lanes stay zero."""
    out = np.zeros(len(bv.val), dtype=np.float32)
    v = bv.valid_count
    out[:v] = a.val * bv.val[:v]
    return out, bv.b_col_ind, v


def _merge_live(mem: PeMemoryUnit, s_cols: np.ndarray, s_vals: np.ndarray):
    """Two-pointer merge of the live buffer with a scaled row.

    Vectorised via a stable sort that keeps buffer entries ahead of
    stream entries on equal columns, so every collision is the single
    addition buffer_value + stream_value, and leftover buffer entries
    pass through with no comparison. Returns (cols, vals, additions).
    """
    l_cols, l_vals = mem.live()
    if len(l_cols) == 0:
        return s_cols, s_vals, 0
    if len(s_cols) == 0:
        return l_cols, l_vals, 0
    cols = np.concatenate([l_cols, s_cols])
    vals = np.concatenate([l_vals, s_vals])
    order = np.argsort(cols, kind="stable")
    cols = cols[order]
    vals = vals[order]
    dup = cols[1:] == cols[:-1]
    n_add = int(dup.sum())
    if n_add == 0:
        return cols, vals, 0
    keep = np.empty(len(cols), dtype=bool)
    keep[0] = True
    keep[1:] = ~dup
    out_cols = cols[keep]
    out_vals = vals[keep].copy()
    first = np.flatnonzero(dup)
    pos = np.cumsum(keep)[first] - 1
    out_vals[pos] = vals[first] + vals[first + 1]
    return out_cols, out_vals, n_add


def pe_sort_merge(
    stream: Iterable[tuple[np.ndarray, np.ndarray, int]],
    mem: PeMemoryUnit,
    a: AElement,
    stats: Optional[SimStats] = None,
) -> tuple[list[COutput], PeMemoryUnit]:
    """Fold one job's scaled vectors into the accumulator.

    stream holds the pe_vecmult outputs for this job, in order; their
    valid lanes form one sorted scaled row. On reset the merged row is
    emitted and the unit cleared; otherwise it is buffered and the
    selector flips.
    """
    chunks_c: list[np.ndarray] = []
    chunks_v: list[np.ndarray] = []
    for c_temp, b_ind, valid in stream:
        chunks_c.append(np.asarray(b_ind[:valid], dtype=np.int64))
        chunks_v.append(np.asarray(c_temp[:valid], dtype=np.float32))
    s_cols = np.concatenate(chunks_c) if chunks_c else _EMPTY_COLS
    s_vals = np.concatenate(chunks_v) if chunks_v else _EMPTY_VALS
    cols, vals, additions = _merge_live(mem, s_cols, s_vals)
    if stats is not None:
        stats.merge_additions += additions
    if a.reset:
        emitted = RowEmission(a.a_row_ind, cols, vals).to_coutputs()
        if stats is not None:
            stats.c_entries_emitted += len(emitted)
        mem.reset()
        return emitted, mem
    _store_checked(mem, cols, vals, a.a_row_ind)
    if stats is not None:
        stats.peak_buffer_occupancy = max(stats.peak_buffer_occupancy, len(cols))
    return [], mem


def _store_checked(mem: PeMemoryUnit, cols: np.ndarray, vals: np.ndarray, row: int) -> None:
    if len(cols) > mem.capacity:
        raise SimulationError(
            f"accumulator overflow while building row {row}: "
            f"needs capacity {len(cols)}, buffer_capacity is {mem.capacity}"
        )
    mem.store(cols, vals)


def store_collect(
    emissions: Iterable[RowEmission],
    rows: int,
    cols: int,
    vec_width: int,
) -> CsvMatrix:
    """Assemble emitted rows into a vector-major matrix.

    Order of arrival does not matter: entries are sorted into canonical
    (band, col, row) order, and any duplicate (row, col) pair is an
    integrity error.
    """
    parts = [e for e in emissions if len(e.cols)]
    if not parts:
        return CsvMatrix(rows, cols, vec_width, _EMPTY_COLS, _EMPTY_COLS, _EMPTY_VALS)
    r = np.concatenate([np.full(len(e.cols), e.row, dtype=np.int64) for e in parts])
    c = np.concatenate([np.asarray(e.cols, dtype=np.int64) for e in parts])
    v = np.concatenate([np.asarray(e.vals, dtype=np.float32) for e in parts])
    band = r // vec_width
    order = np.lexsort((r, c, band))
    r, c, v = r[order], c[order], v[order]
    dup = (r[1:] == r[:-1]) & (c[1:] == c[:-1])
    if dup.any():
        k = int(np.flatnonzero(dup)[0])
        raise SimulationError(f"duplicate output entry at row {r[k]}, col {c[k]}")
    return CsvMatrix(rows, cols, vec_width, r, c, v)


def simulate(a: CsrMatrix, b: CsrMatrix, cfg: PipelineConfig) -> tuple[CsvMatrix, SimStats]:
    """Run the full pipeline on CSR operands.

    A is rebanded for num_pe internally. The hot loop fuses the per-chunk
    vector multiply into one scalar-times-row product; lane for lane this
    performs the identical float32 operations as iterating pe_vecmult
    over the job's BVectors (chunking never changes an elementwise
    multiply), and a property test pins that equivalence.
    """
    _require_conformable(a, b)
    a_csv = csr_to_csv(a, cfg.num_pe)
    stats = SimStats(b_rows_naive=a.nnz)
    mems = [PeMemoryUnit(cfg.buffer_capacity) for _ in range(cfg.num_pe)]
    emissions: list[RowEmission] = []
    for ev in load_schedule(a_csv, b, cfg):
        if ev.fresh_fetch:
            stats.b_rows_loaded += 1
        stats.b_vectors_sent += ev.a.b_num_vec
        s_cols = ev.bvectors.cols
        stats.multiplications += len(s_cols)
        s_vals = ev.a.val * ev.bvectors.vals
        mem = mems[ev.pe]
        cols, vals, additions = _merge_live(mem, s_cols, s_vals)
        stats.merge_additions += additions
        if ev.a.reset:
            emissions.append(RowEmission(ev.a.a_row_ind, cols, vals))
            stats.c_entries_emitted += len(cols)
            mem.reset()
        else:
            _store_checked(mem, cols, vals, ev.a.a_row_ind)
            stats.peak_buffer_occupancy = max(stats.peak_buffer_occupancy, len(cols))
    return store_collect(emissions, a.rows, b.cols, cfg.num_pe), stats
