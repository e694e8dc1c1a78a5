import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fspgemm.csv_format import (
    HEADER_BYTES,
    RECORD_BYTES,
    CsvMatrix,
    count_vectors,
    csr_to_csv,
    csv_to_csr,
    enumerate_vectors,
    read_fcsv,
    validate_csv,
    write_fcsv,
)
from fspgemm.matrices import (
    CooMatrix,
    MatrixFormatError,
    coo_to_csr,
    csr_bitwise_equal,
    csr_identity,
    random_csr,
)


def four_by_four():
    # nonzeros (0,0),(1,0),(2,0),(0,2),(3,3); value = 10*row + col for traceability
    return coo_to_csr(
        CooMatrix.from_entries(
            4, 4, [(0, 0, 0.0), (1, 0, 10.0), (2, 0, 20.0), (0, 2, 2.0), (3, 3, 33.0)]
        )
    )


class TestOrdering:
    def test_worked_example_width_2(self):
        csv = csr_to_csv(four_by_four(), 2)
        coords = list(zip(csv.row_idx.tolist(), csv.col_idx.tolist()))
        assert coords == [(0, 0), (1, 0), (0, 2), (2, 0), (3, 3)]

    def test_width_1_equals_row_major(self, rng):
        m = random_csr(20, 20, 0.15, rng)
        csv = csr_to_csv(m, 1)
        from fspgemm.matrices import csr_to_coo

        coo = csr_to_coo(m)
        assert csv.row_idx.tolist() == coo.row_idx.tolist()
        assert csv.col_idx.tolist() == coo.col_idx.tolist()
        assert csv.values.tolist() == coo.values.tolist()

    def test_width_at_least_rows_is_column_major(self, rng):
        m = random_csr(16, 16, 0.2, rng)
        csv = csr_to_csv(m, 16)
        assert csv.bands.max() == 0
        keys = list(zip(csv.col_idx.tolist(), csv.row_idx.tolist()))
        assert keys == sorted(keys)

    def test_constructor_rejects_bad_order(self):
        with pytest.raises(ValueError, match="order"):
            CsvMatrix(4, 4, 2, [2, 0], [0, 0], [1.0, 2.0])

    def test_validate_ok(self, rng):
        m = csr_to_csv(random_csr(15, 15, 0.2, rng), 4)
        assert validate_csv(m) is None

    def test_width_zero_rejected(self):
        with pytest.raises(ValueError, match="vec_width"):
            csr_to_csv(four_by_four(), 0)


class TestCsvToCsr:
    def test_worked_example(self):
        csv = csr_to_csv(four_by_four(), 2)
        back = csv_to_csr(csv)
        assert back.row_ptr.tolist() == [0, 2, 3, 4, 5]
        assert csr_bitwise_equal(back, four_by_four())

    def test_roundtrip_widths(self, rng):
        m = random_csr(64, 64, 0.05, rng)
        for w in (1, 2, 4, 8, 16, 32):
            assert csr_bitwise_equal(csv_to_csr(csr_to_csv(m, w)), m)

    def test_empty(self):
        m = coo_to_csr(CooMatrix.from_entries(3, 3, []))
        assert csr_bitwise_equal(csv_to_csr(csr_to_csv(m, 2)), m)


class TestEnumerateVectors:
    def test_worked_example_member_counts(self):
        csv = csr_to_csv(four_by_four(), 2)
        vectors = list(enumerate_vectors(csv))
        assert [v.members for v in vectors] == [2, 1, 1, 1]
        assert [(v.band, v.col) for v in vectors] == [(0, 0), (0, 2), (1, 0), (1, 3)]
        assert vectors[0].rows.tolist() == [0, 1]

    def test_diagonal_all_singletons(self):
        csv = csr_to_csv(csr_identity(8), 4)
        vectors = list(enumerate_vectors(csv))
        assert len(vectors) == 8
        assert all(v.members == 1 for v in vectors)

    def test_member_sum_is_nnz(self, rng):
        m = random_csr(40, 40, 0.1, rng)
        csv = csr_to_csv(m, 8)
        assert sum(v.members for v in enumerate_vectors(csv)) == m.nnz

    def test_count_matches_enumeration_and_brute_force(self, rng):
        for w in (1, 2, 3, 5, 8):
            m = random_csr(25, 25, 0.15, rng)
            csv = csr_to_csv(m, w)
            brute = {(r // w, c) for r, c in zip(csv.row_idx.tolist(), csv.col_idx.tolist())}
            assert count_vectors(csv) == len(list(enumerate_vectors(csv))) == len(brute)

    def test_members_within_band_and_width(self, rng):
        w = 4
        csv = csr_to_csv(random_csr(30, 30, 0.2, rng), w)
        for v in enumerate_vectors(csv):
            assert 1 <= v.members <= w
            assert all(r // w == v.band for r in v.rows.tolist())
            assert v.rows.tolist() == sorted(v.rows.tolist())


class TestFcsvFile:
    def test_header_size_empty_matrix(self):
        m = csr_to_csv(coo_to_csr(CooMatrix.from_entries(3, 3, [])), 2)
        buf = io.BytesIO()
        write_fcsv(buf, m)
        assert len(buf.getvalue()) == 44 == HEADER_BYTES

    def test_worked_example_file_size(self):
        buf = io.BytesIO()
        write_fcsv(buf, csr_to_csv(four_by_four(), 2))
        assert len(buf.getvalue()) == 44 + 5 * 12
        assert RECORD_BYTES == 12

    def test_roundtrip_bit_exact(self, rng):
        m = csr_to_csv(random_csr(37, 41, 0.1, rng), 3)
        buf = io.BytesIO()
        write_fcsv(buf, m)
        buf.seek(0)
        again = read_fcsv(buf)
        assert (again.rows, again.cols, again.vec_width) == (m.rows, m.cols, m.vec_width)
        assert np.array_equal(again.row_idx, m.row_idx)
        assert np.array_equal(again.col_idx, m.col_idx)
        assert np.array_equal(again.values.view(np.uint32), m.values.view(np.uint32))

    def test_file_roundtrip(self, tmp_path, rng):
        m = csr_to_csv(random_csr(10, 10, 0.3, rng), 2)
        path = tmp_path / "m.fcsv"
        write_fcsv(path, m)
        again = read_fcsv(path)
        assert np.array_equal(again.values.view(np.uint32), m.values.view(np.uint32))

    def test_bad_magic(self):
        with pytest.raises(MatrixFormatError, match="magic"):
            read_fcsv(io.BytesIO(b"XCSV" + b"\x00" * 40))

    def test_bad_version(self):
        buf = io.BytesIO()
        write_fcsv(buf, csr_to_csv(csr_identity(2), 1))
        raw = bytearray(buf.getvalue())
        raw[4] = 9
        with pytest.raises(MatrixFormatError, match="version"):
            read_fcsv(io.BytesIO(bytes(raw)))

    def test_truncated_header(self):
        with pytest.raises(MatrixFormatError, match="truncated header"):
            read_fcsv(io.BytesIO(b"FCSV\x01"))

    def test_truncated_body(self):
        buf = io.BytesIO()
        write_fcsv(buf, csr_to_csv(csr_identity(3), 1))
        raw = buf.getvalue()[:-4]
        with pytest.raises(MatrixFormatError, match="body"):
            read_fcsv(io.BytesIO(raw))

    def test_trailing_garbage(self):
        buf = io.BytesIO()
        write_fcsv(buf, csr_to_csv(csr_identity(3), 1))
        with pytest.raises(MatrixFormatError, match="body"):
            read_fcsv(io.BytesIO(buf.getvalue() + b"\x00"))

    def test_ordering_violation_on_read(self):
        # hand-build a file whose records are out of vector-major order
        import struct

        header = struct.pack("<4sIQQQIQ", b"FCSV", 1, 4, 4, 2, 2, 0)
        rec = struct.pack("<IIf", 2, 0, 1.0) + struct.pack("<IIf", 0, 0, 2.0)
        with pytest.raises(ValueError, match="order"):
            read_fcsv(io.BytesIO(header + rec))

    def test_huge_dims_rejected(self):
        m = CsvMatrix(2**32, 4, 2, [], [], [])
        with pytest.raises(MatrixFormatError, match="32-bit"):
            write_fcsv(io.BytesIO(), m)

    def test_special_values_survive(self):
        vals = np.array([np.float32("nan"), np.float32("-0.0"), np.float32("inf")], dtype=np.float32)
        m = CsvMatrix(3, 3, 1, [0, 1, 2], [0, 0, 0], vals)
        buf = io.BytesIO()
        write_fcsv(buf, m)
        buf.seek(0)
        again = read_fcsv(buf)
        assert np.array_equal(again.values.view(np.uint32), vals.view(np.uint32))


@settings(max_examples=60, deadline=None)
@given(
    rows=st.integers(1, 30),
    cols=st.integers(1, 30),
    w=st.integers(1, 34),
    seed=st.integers(0, 2**32 - 1),
    density=st.floats(0.0, 0.4),
)
def test_roundtrip_property(rows, cols, w, seed, density):
    m = random_csr(rows, cols, density, np.random.default_rng(seed))
    csv = csr_to_csv(m, w)
    assert validate_csv(csv) is None
    assert csr_bitwise_equal(csv_to_csr(csv), m)
    buf = io.BytesIO()
    write_fcsv(buf, csv)
    buf.seek(0)
    again = read_fcsv(buf)
    assert np.array_equal(again.row_idx, csv.row_idx)
    assert np.array_equal(again.col_idx, csv.col_idx)
    assert np.array_equal(again.values.view(np.uint32), csv.values.view(np.uint32))
