import io
import warnings

import numpy as np
import pytest

from smoothgraphon.exceptions import DataError
from smoothgraphon.relational import (Cell, RelationalMatrix, induced_matrix, load_edge_list,
                                      read_dense_csv, read_edges, read_mask_csv,
                                      row_wise_split, summarize, top_active_subsample,
                                      write_dense_csv, write_edge_list, write_mask_csv)


def test_load_two_edges():
    R = load_edge_list(["0\t1", "1\t0"], 2)
    np.testing.assert_array_equal(R.entries, [[0, 1], [1, 0]])
    np.testing.assert_array_equal(R.mask, [[Cell.EXCLUDED, Cell.TRAIN],
                                           [Cell.TRAIN, Cell.EXCLUDED]])


def test_load_empty_stream():
    R = load_edge_list(io.StringIO(""), 3)
    np.testing.assert_array_equal(R.entries, np.zeros((3, 3)))


def test_duplicate_edges_are_idempotent(rng):
    edges = rng.integers(0, 6, (40, 2))
    lines = [f"{a}\t{b}" for a, b in edges] + [f"{a}\t{b}" for a, b in edges[:10]]
    R = load_edge_list(lines, 6)
    want = np.zeros((6, 6), int)
    for a, b in set(map(tuple, edges.tolist())):
        want[a, b] = 1
    np.testing.assert_array_equal(R.entries, want)


def test_comments_and_blank_lines_skipped():
    R = load_edge_list("# header\n\n0\t2\n# 1\t1\n", 3)
    assert R.entries.sum() == 1 and R.entries[0, 2] == 1


@pytest.mark.parametrize("text, lineno", [
    ("0\t1\n0\t5\n", 2),
    ("0\t1\nx\t1\n", 2),
    ("0 1 2\n", 1),
    ("# c\n-1\t0\n", 2),
])
def test_bad_lines_report_line_number(text, lineno):
    with pytest.raises(DataError, match=f"line {lineno}"):
        load_edge_list(text, 3)


def test_self_loops_flag_controls_diagonal():
    assert np.all(np.diag(RelationalMatrix.from_dense(np.ones((3, 3)), True).mask) == Cell.TRAIN)
    assert np.all(np.diag(RelationalMatrix.from_dense(np.ones((3, 3))).mask) == Cell.EXCLUDED)


def test_matrix_validation():
    with pytest.raises(DataError):
        RelationalMatrix.from_dense(np.zeros((2, 3)))
    with pytest.raises(DataError):
        RelationalMatrix.from_dense([[0, 2], [0, 0]])
    with pytest.raises(DataError):
        RelationalMatrix(np.zeros((2, 2)), np.full((2, 2), 3))


def test_matrix_is_read_only():
    R = RelationalMatrix.from_dense(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        R.entries[0, 1] = 1


def test_edge_list_round_trip(rng):
    R = RelationalMatrix.from_dense(rng.random((12, 12)) < 0.3)
    buf = io.StringIO()
    write_edge_list(R, buf)
    back = load_edge_list(io.StringIO(buf.getvalue()), 12)
    np.testing.assert_array_equal(back.entries, R.entries)


def test_dense_and_mask_csv_round_trip(rng):
    R = row_wise_split(RelationalMatrix.from_dense(rng.random((9, 9)) < 0.4), 0.7, rng)
    buf = io.StringIO()
    write_dense_csv(R, buf)
    back = read_dense_csv(io.StringIO(buf.getvalue()))
    np.testing.assert_array_equal(back.entries, R.entries)
    buf = io.StringIO()
    write_mask_csv(R, buf)
    np.testing.assert_array_equal(read_mask_csv(io.StringIO(buf.getvalue())), R.mask)


def test_dense_csv_rejects_bad_input():
    with pytest.raises(DataError):
        read_dense_csv(io.StringIO("0,1\n1,0,1\n"))
    with pytest.raises(DataError):
        read_dense_csv(io.StringIO("0,3\n1,0\n"))


# ---------------------------------------------------------------------------
# subsampling

def test_subsample_by_degree():
    # degrees: node0 = 5, node1 = 3, node2 = 1
    edges = [(0, 1), (0, 1), (1, 0), (0, 2), (0, 0)]
    got = top_active_subsample(edges, pool=2, sample=2, rng=np.random.default_rng(0))
    np.testing.assert_array_equal(got, [0, 1])


def test_subsample_ties_prefer_smaller_id():
    edges = [(3, 4), (1, 2)]  # all degree 1
    got = top_active_subsample(edges, pool=2, sample=2, rng=np.random.default_rng(5))
    np.testing.assert_array_equal(got, [1, 2])


def test_subsample_full_pool_returns_everything(rng):
    edges = rng.integers(0, 20, (200, 2))
    n = len(np.unique(edges))
    got = top_active_subsample(edges, n, n, rng)
    np.testing.assert_array_equal(got, np.unique(edges))


def test_subsample_paper_sizes(rng):
    edges = rng.integers(0, 3000, (20000, 2))
    got = top_active_subsample(edges, 1000, 500, rng)
    assert len(np.unique(got)) == 500
    ids, counts = np.unique(edges, return_counts=True)
    top = ids[np.lexsort((ids, -counts))[:1000]]
    assert set(got.tolist()) <= set(top.tolist())


def test_subsample_warns_on_short_pool():
    with pytest.warns(UserWarning, match="fewer than pool"):
        got = top_active_subsample([(0, 1)], 5, 3, np.random.default_rng(0))
    np.testing.assert_array_equal(got, [0, 1])


def test_subsample_rejects_sample_above_pool():
    with pytest.raises(ValueError):
        top_active_subsample([(0, 1)], 1, 2, np.random.default_rng(0))


def test_induced_matrix_relabels():
    R = induced_matrix([(5, 9), (9, 5), (5, 7), (2, 2)], [5, 9])
    np.testing.assert_array_equal(R.entries, [[0, 1], [1, 0]])


# ---------------------------------------------------------------------------
# row-wise split

def test_split_small_rows():
    R = RelationalMatrix.from_dense(np.zeros((4, 4)))
    S = row_wise_split(R, 2 / 3, np.random.default_rng(1))
    assert np.all((S.mask == Cell.TRAIN).sum(1) == 2)
    assert np.all((S.mask == Cell.TEST).sum(1) == 1)
    assert np.all(np.diag(S.mask) == Cell.EXCLUDED)


def test_split_paper_quota(rng):
    R = RelationalMatrix.from_dense(np.zeros((500, 500)))
    S = row_wise_split(R, 0.9, rng)
    # round-half-up(0.9 * 499) = 449
    assert np.all((S.mask == Cell.TRAIN).sum(1) == 449)
    S = row_wise_split(R, 0.1, rng)
    assert np.all((S.mask == Cell.TRAIN).sum(1) == 50)


def test_split_rounds_half_up():
    R = RelationalMatrix.from_dense(np.zeros((5, 5)))  # 4 cells per row
    S = row_wise_split(R, 0.625, np.random.default_rng(0))  # 2.5 -> 3
    assert np.all((S.mask == Cell.TRAIN).sum(1) == 3)


def test_split_counts_independent_of_seed():
    R = RelationalMatrix.from_dense(np.zeros((30, 30)))
    a = row_wise_split(R, 0.37, np.random.default_rng(1))
    b = row_wise_split(R, 0.37, np.random.default_rng(2))
    np.testing.assert_array_equal((a.mask == Cell.TRAIN).sum(1), (b.mask == Cell.TRAIN).sum(1))
    assert not np.array_equal(a.mask, b.mask)


def test_split_is_deterministic():
    R = RelationalMatrix.from_dense(np.zeros((30, 30)))
    assert row_wise_split(R, 0.5, np.random.default_rng(3)) == \
        row_wise_split(R, 0.5, np.random.default_rng(3))


def test_split_selection_is_uniform():
    R = RelationalMatrix.from_dense(np.zeros((4, 4)))
    rng = np.random.default_rng(11)
    hits = np.zeros((4, 4))
    reps = 3000
    for _ in range(reps):
        hits += row_wise_split(R, 1 / 3, rng).mask == Cell.TRAIN
    off = ~np.eye(4, dtype=bool)
    # each off-diagonal cell is TRAIN with probability 1/3
    np.testing.assert_allclose(hits[off] / reps, 1 / 3, atol=4 * np.sqrt(2 / 9 / reps))


def test_split_short_row_stays_train():
    mask = np.full((3, 3), Cell.EXCLUDED, np.uint8)
    mask[0, 1] = Cell.TRAIN
    mask[1, [0, 2]] = Cell.TRAIN
    R = RelationalMatrix(np.zeros((3, 3)), mask)
    with pytest.warns(UserWarning):
        S = row_wise_split(R, 0.5, np.random.default_rng(0))
    assert S.mask[0, 1] == Cell.TRAIN
    assert sorted(S.mask[1, [0, 2]].tolist()) == [Cell.TRAIN, Cell.TEST]


def test_split_rejects_bad_ratio():
    R = RelationalMatrix.from_dense(np.zeros((3, 3)))
    for bad in (0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            row_wise_split(R, bad, np.random.default_rng(0))


# ---------------------------------------------------------------------------
# summaries

def test_summary_zero_matrix():
    s = summarize(RelationalMatrix.from_dense(np.zeros((4, 4))))
    assert (s.positive_links, s.sparsity) == (0, 0.0)


def test_summary_two_by_two():
    s = summarize(RelationalMatrix.from_dense([[0, 1], [1, 0]]))
    assert (s.positive_links, s.sparsity) == (2, 1.0)


def test_summary_delicious_shape(rng):
    # 10,775 positive links on a 500-node grid, reported sparsity 4.31%
    n, L = 500, 10775
    flat = rng.choice(n * n - n, size=L, replace=False)
    off = np.flatnonzero(~np.eye(n, dtype=bool))
    entries = np.zeros(n * n, np.uint8)
    entries[off[flat]] = 1
    s = summarize(RelationalMatrix.from_dense(entries.reshape(n, n)), full_grid=True)
    assert s.positive_links == L
    assert abs(s.sparsity - 0.0431) <= 0.0001


def test_summary_denominators_differ_only_by_diagonal():
    R = RelationalMatrix.from_dense(np.ones((10, 10)) - np.eye(10))
    assert summarize(R).sparsity == 1.0
    assert summarize(R, full_grid=True).sparsity == pytest.approx(0.9)


def test_read_edges_shape():
    assert read_edges("").shape == (0, 2)
    np.testing.assert_array_equal(read_edges("1 2\n3\t4\n"), [[1, 2], [3, 4]])
