import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fspgemm.gustavson as gus
from fspgemm.gustavson import count_flops, merge_rows, scale_row, spgemm_oracle, spgemm_rowwise
from fspgemm.matrices import (
    CooMatrix,
    SparseRow,
    coo_to_csr,
    csr_bitwise_equal,
    csr_identity,
    random_csr,
    validate_csr,
)
from tests.conftest import random_pair


def row(pairs) -> SparseRow:
    return SparseRow(
        np.array([c for c, _ in pairs], dtype=np.int64),
        np.array([v for _, v in pairs], dtype=np.float32),
    )


def diag_a():
    return coo_to_csr(CooMatrix.from_entries(2, 2, [(0, 0, 1.0), (1, 1, 2.0)]))


def b_mat():
    # [[3, 4], [0, 5]]
    return coo_to_csr(CooMatrix.from_entries(2, 2, [(0, 0, 3.0), (0, 1, 4.0), (1, 1, 5.0)]))


def two_pointer_merge(a: SparseRow, b: SparseRow) -> SparseRow:
    """Scalar reference merge: the definition the vectorised one must match."""
    cols, vals = [], []
    i = j = 0
    while i < len(a.cols) and j < len(b.cols):
        if a.cols[i] < b.cols[j]:
            cols.append(a.cols[i]); vals.append(a.vals[i]); i += 1
        elif a.cols[i] > b.cols[j]:
            cols.append(b.cols[j]); vals.append(b.vals[j]); j += 1
        else:
            cols.append(a.cols[i]); vals.append(a.vals[i] + b.vals[j]); i += 1; j += 1
    while i < len(a.cols):
        cols.append(a.cols[i]); vals.append(a.vals[i]); i += 1
    while j < len(b.cols):
        cols.append(b.cols[j]); vals.append(b.vals[j]); j += 1
    return SparseRow(np.array(cols, dtype=np.int64), np.array(vals, dtype=np.float32))


def values_close(got: np.ndarray, want: np.ndarray) -> bool:
    g = got.astype(np.float64)
    w = want.astype(np.float64)
    return bool(np.all(np.abs(g - w) <= 1e-6 + 1e-5 * np.abs(w)))


class TestScaleRow:
    def test_identity_scalar(self):
        r = row([(0, 3.0), (1, 4.0)])
        out = scale_row(1.0, r)
        assert out.cols.tolist() == [0, 1]
        assert np.array_equal(out.vals.view(np.uint32), r.vals.view(np.uint32))

    def test_doubling(self):
        out = scale_row(2.0, row([(0, 3.0), (1, 4.0)]))
        assert out.vals.tolist() == [6.0, 8.0]

    def test_zero_kept_structurally(self):
        out = scale_row(0.0, row([(0, 3.0)]))
        assert out.cols.tolist() == [0]
        assert out.vals.tolist() == [0.0]

    def test_result_is_float32(self):
        assert scale_row(0.5, row([(2, 1.0)])).vals.dtype == np.float32


class TestMergeRows:
    def test_empty_identity(self):
        b = row([(1, 2.0), (3, 4.0)])
        out = merge_rows(SparseRow.empty(), b)
        assert out.cols.tolist() == [1, 3]
        out2 = merge_rows(b, SparseRow.empty())
        assert out2.vals.tolist() == [2.0, 4.0]

    def test_one_collision(self):
        out = merge_rows(row([(0, 1.0), (2, 5.0)]), row([(2, 3.0), (4, 7.0)]))
        assert out.cols.tolist() == [0, 2, 4]
        assert out.vals.tolist() == [1.0, 8.0, 7.0]

    def test_structure_commutes_values_exact(self, rng):
        for _ in range(50):
            a = _random_row(rng, 40)
            b = _random_row(rng, 40)
            ab = merge_rows(a, b)
            ba = merge_rows(b, a)
            assert ab.cols.tolist() == ba.cols.tolist()
            # one addition per collision: exact both ways
            assert np.array_equal(ab.vals.view(np.uint32), ba.vals.view(np.uint32))

    def test_matches_map_oracle(self, rng):
        for _ in range(100):
            a = _random_row(rng, 60)
            b = _random_row(rng, 60)
            acc: dict[int, np.float32] = {}
            for c, v in zip(a.cols.tolist(), a.vals):
                acc[c] = v
            for c, v in zip(b.cols.tolist(), b.vals):
                acc[c] = np.float32(acc[c] + v) if c in acc else v
            out = merge_rows(a, b)
            assert out.cols.tolist() == sorted(acc)
            assert all(out.vals[i] == acc[c] for i, c in enumerate(out.cols.tolist()))

    def test_bitwise_equals_two_pointer_reference(self, rng):
        specials = row([(0, -0.0), (1, np.float32(1e-38)), (5, np.float32(1.5e38))])
        cases = [(specials, row([(0, 0.0), (5, np.float32(1.5e38))]))]
        for _ in range(200):
            cases.append((_random_row(rng, 30), _random_row(rng, 30)))
        for a, b in cases:
            got = merge_rows(a, b)
            want = two_pointer_merge(a, b)
            assert got.cols.tolist() == want.cols.tolist()
            assert np.array_equal(got.vals.view(np.uint32), want.vals.view(np.uint32))


def _random_row(rng, width) -> SparseRow:
    n = int(rng.integers(0, width // 2 + 1))
    cols = np.sort(rng.choice(width, size=n, replace=False)).astype(np.int64)
    vals = rng.uniform(-10, 10, size=n).astype(np.float32)
    return SparseRow(cols, vals)


class TestSpgemmRowwise:
    def test_diagonal_example(self):
        c = spgemm_rowwise(diag_a(), b_mat())
        assert c.row_ptr.tolist() == [0, 2, 3]
        assert c.col_index.tolist() == [0, 1, 1]
        assert c.values.tolist() == [3.0, 4.0, 10.0]

    def test_empty_row_propagates(self):
        a = coo_to_csr(CooMatrix.from_entries(3, 2, [(0, 0, 1.0), (2, 1, 1.0)]))
        c = spgemm_rowwise(a, b_mat())
        assert c.row_ptr[1] == c.row_ptr[2]  # row 1 of C is empty

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            spgemm_rowwise(csr_identity(2), csr_identity(3))

    def test_identity_left_exact(self, rng):
        b = random_csr(40, 30, 0.1, rng)
        assert csr_bitwise_equal(spgemm_rowwise(csr_identity(40), b), b)

    def test_identity_right_exact(self, rng):
        a = random_csr(25, 35, 0.1, rng)
        assert csr_bitwise_equal(spgemm_rowwise(a, csr_identity(35)), a)

    def test_output_validates(self, rng):
        a, b = random_pair(rng, n_max=60)
        assert validate_csr(spgemm_rowwise(a, b)) is None


class TestSpgemmOracle:
    def test_identity_times_b(self, rng):
        b = random_csr(30, 30, 0.1, rng)
        assert csr_bitwise_equal(spgemm_oracle(csr_identity(30), b), b)

    def test_diagonal_example(self):
        c = spgemm_oracle(diag_a(), b_mat())
        assert c.col_index.tolist() == [0, 1, 1]
        assert c.values.tolist() == [3.0, 4.0, 10.0]

    def test_cancellation_kept_structurally(self):
        a = coo_to_csr(CooMatrix.from_entries(1, 2, [(0, 0, 1.0), (0, 1, -1.0)]))
        b = coo_to_csr(CooMatrix.from_entries(2, 1, [(0, 0, 1.0), (1, 0, 1.0)]))
        c = spgemm_oracle(a, b)
        assert c.nnz == 1
        assert c.col_index.tolist() == [0]
        assert c.values.tolist() == [0.0]
        # reference engine keeps the same structural zero
        assert csr_bitwise_equal(spgemm_rowwise(a, b), c)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            spgemm_oracle(csr_identity(2), csr_identity(3))


class TestEngineVsOracle:
    def test_random_pairs_structure_and_values(self, rng):
        for _ in range(100):
            a, b = random_pair(rng)
            got = spgemm_rowwise(a, b)
            want = spgemm_oracle(a, b)
            assert got.row_ptr.tolist() == want.row_ptr.tolist()
            assert got.col_index.tolist() == want.col_index.tolist()
            assert values_close(got.values, want.values)


class TestCountFlops:
    def test_identity_times_b(self, rng):
        b = random_csr(20, 20, 0.2, rng)
        assert count_flops(csr_identity(20), b) == 2 * b.nnz

    def test_diagonal_example(self):
        assert count_flops(diag_a(), b_mat()) == 6

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            count_flops(csr_identity(2), csr_identity(3))

    def test_matches_instrumented_multiplications(self, rng, monkeypatch):
        a, b = random_pair(rng, n_max=80)
        counter = {"muls": 0}
        original = gus.scale_row

        def counting_scale_row(alpha, r):
            counter["muls"] += len(r.cols)
            return original(alpha, r)

        monkeypatch.setattr(gus, "scale_row", counting_scale_row)
        gus.spgemm_rowwise(a, b)
        assert counter["muls"] == count_flops(a, b) // 2


@settings(max_examples=80, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    n=st.integers(1, 40),
    density=st.floats(0.0, 0.3),
)
def test_rowwise_equals_oracle_property(seed, n, density):
    rng = np.random.default_rng(seed)
    a = random_csr(n, n, density, rng)
    b = random_csr(n, n, density, rng)
    got = spgemm_rowwise(a, b)
    want = spgemm_oracle(a, b)
    assert got.col_index.tolist() == want.col_index.tolist()
    assert got.row_ptr.tolist() == want.row_ptr.tolist()
    assert values_close(got.values, want.values)
