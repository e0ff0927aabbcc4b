"""Directed binary relational matrices, observation masks and train/test splits."""

import csv
import warnings
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .exceptions import DataError

__all__ = [
    "Cell",
    "RelationalMatrix",
    "DatasetSummary",
    "read_edges",
    "load_edge_list",
    "write_edge_list",
    "read_dense_csv",
    "write_dense_csv",
    "read_mask_csv",
    "write_mask_csv",
    "top_active_subsample",
    "induced_matrix",
    "row_wise_split",
    "summarize",
]


class Cell(IntEnum):
    """Observation status of a matrix cell (values match the mask CSV)."""

    EXCLUDED = 0
    TRAIN = 1
    TEST = 2


def default_mask(n, self_loops=False):
    mask = np.full((n, n), Cell.TRAIN, dtype=np.uint8)
    if not self_loops:
        np.fill_diagonal(mask, Cell.EXCLUDED)
    return mask


@dataclass(frozen=True)
class RelationalMatrix:
    """Square 0/1 relation array ``R`` with a tri-state observation mask.

    Both arrays are stored read-only.  Use `with_mask` to derive a matrix
    with a different mask.
    """

    entries: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.uint8, copy=True)
        mask = np.array(self.mask, dtype=np.uint8, copy=True)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DataError(f"relation array must be square, got shape {entries.shape}")
        if mask.shape != entries.shape:
            raise DataError(f"mask shape {mask.shape} does not match entries {entries.shape}")
        if np.any(entries > 1):
            raise DataError("entries must be 0 or 1")
        if np.any(mask > Cell.TEST):
            raise DataError("mask values must be 0 (excluded), 1 (train) or 2 (test)")
        entries.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def from_dense(cls, entries, self_loops=False):
        entries = np.asarray(entries)
        return cls(entries, default_mask(entries.shape[0], self_loops))

    @property
    def n(self):
        return self.entries.shape[0]

    def with_mask(self, mask):
        return RelationalMatrix(self.entries, mask)

    def cells(self, status=Cell.TRAIN):
        """Row and column indices of all cells with the given status."""
        return np.nonzero(self.mask == status)

    def __eq__(self, other):
        if not isinstance(other, RelationalMatrix):
            return NotImplemented
        return (np.array_equal(self.entries, other.entries)
                and np.array_equal(self.mask, other.mask))

    __hash__ = None


@dataclass(frozen=True)
class DatasetSummary:
    positive_links: int
    sparsity: float


def _lines(source):
    if isinstance(source, str):
        source = source.splitlines()
    for lineno, line in enumerate(source, start=1):
        yield lineno, line.strip()


def _parse_edge(lineno, line):
    fields = line.split()
    if len(fields) != 2:
        raise DataError(f"line {lineno}: expected 'src<TAB>dst', got {line!r}")
    try:
        src, dst = int(fields[0]), int(fields[1])
    except ValueError:
        raise DataError(f"line {lineno}: non-integer node id in {line!r}") from None
    if src < 0 or dst < 0:
        raise DataError(f"line {lineno}: negative node id in {line!r}")
    return src, dst


def _edges(source):
    for lineno, line in _lines(source):
        if line and not line.startswith("#"):
            yield lineno, line, _parse_edge(lineno, line)


def read_edges(source):
    """Parse ``src<TAB>dst`` lines into an ``(E, 2)`` integer array.

    Blank lines and lines starting with ``#`` are skipped.  Any whitespace
    separates the two ids.
    """
    pairs = [edge for _, _, edge in _edges(source)]
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def load_edge_list(source, n, self_loops=False):
    """Build an ``n x n`` `RelationalMatrix` from an edge-list stream.

    Duplicate edges are idempotent.  Every ``src`` and ``dst`` must be
    below `n`; the offending line number is reported otherwise.
    """
    R = np.zeros((n, n), dtype=np.uint8)
    for lineno, line, (src, dst) in _edges(source):
        if src >= n or dst >= n:
            raise DataError(f"line {lineno}: node id out of range for n={n} in {line!r}")
        R[src, dst] = 1
    return RelationalMatrix.from_dense(R, self_loops=self_loops)


def write_edge_list(R, stream):
    """Write every ``R_ij == 1`` as ``i<TAB>j`` in row-major order."""
    rows, cols = np.nonzero(R.entries)
    for i, j in zip(rows.tolist(), cols.tolist()):
        stream.write(f"{i}\t{j}\n")


def read_dense_csv(stream, self_loops=False):
    rows = [row for row in csv.reader(stream) if row]
    try:
        entries = np.array([[int(v) for v in row] for row in rows], dtype=np.int64)
    except ValueError as exc:
        raise DataError(f"dense matrix CSV must hold integers: {exc}") from None
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise DataError(f"dense matrix CSV must be square, got {len(rows)} rows")
    if np.any((entries != 0) & (entries != 1)):
        raise DataError("dense matrix CSV must hold only 0/1")
    return RelationalMatrix.from_dense(entries, self_loops=self_loops)


def write_dense_csv(R, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerows(R.entries.tolist())


def read_mask_csv(stream):
    rows = [row for row in csv.reader(stream) if row]
    return np.array([[int(v) for v in row] for row in rows], dtype=np.uint8)


def write_mask_csv(R, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerows(R.mask.tolist())


def top_active_subsample(edges, pool, sample, rng):
    """Draw `sample` node ids uniformly from the `pool` most active nodes.

    Activity is in-degree plus out-degree; ties go to the smaller id.  If
    fewer than `pool` distinct nodes exist, all of them form the pool.

    Returns
    -------
    ndarray
        Selected ids in ascending order.
    """
    if sample > pool:
        raise ValueError(f"sample ({sample}) cannot exceed pool ({pool})")
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    ids, counts = np.unique(edges.ravel(), return_counts=True)
    if ids.size < pool:
        warnings.warn(f"only {ids.size} distinct nodes available, fewer than pool={pool}",
                      stacklevel=2)
        pool = ids.size
        sample = min(sample, pool)
    # lexsort: last key is primary; ids already ascending so ties keep smaller id first
    order = np.lexsort((ids, -counts))
    top = ids[order[:pool]]
    chosen = rng.choice(top, size=sample, replace=False)
    return np.sort(chosen)


def induced_matrix(edges, nodes, self_loops=False):
    """Relation matrix among `nodes`, relabelled ``0..len(nodes)-1`` in given order."""
    nodes = np.asarray(nodes, dtype=np.int64)
    index = {int(v): k for k, v in enumerate(nodes)}
    R = np.zeros((nodes.size, nodes.size), dtype=np.uint8)
    for src, dst in np.asarray(edges, dtype=np.int64).reshape(-1, 2).tolist():
        if src in index and dst in index:
            R[index[src], index[dst]] = 1
    if not self_loops:
        np.fill_diagonal(R, 0)
    return RelationalMatrix.from_dense(R, self_loops=self_loops)


def _round_half_up(x):
    return np.floor(np.asarray(x) + 0.5).astype(np.int64)


def row_wise_split(R, train_ratio, rng):
    """Assign the same fraction of each row's observed cells to training.

    Each row keeps ``round(train_ratio * cells)`` (half-up) of its
    non-excluded cells as TRAIN, chosen uniformly; the rest become TEST.
    Rows with fewer than two usable cells stay entirely TRAIN.
    """
    if not 0 < train_ratio < 1:
        raise ValueError(f"train_ratio must lie strictly in (0, 1), got {train_ratio!r}")
    usable = R.mask != Cell.EXCLUDED
    per_row = usable.sum(axis=1)
    quota = _round_half_up(train_ratio * per_row)
    short = per_row < 2
    if np.any(short & (per_row > 0)):
        warnings.warn(f"{int(np.sum(short & (per_row > 0)))} row(s) have fewer than 2 "
                      "usable cells; kept entirely as TRAIN", stacklevel=2)
    quota = np.where(short, per_row, quota)

    keys = rng.random(R.mask.shape)
    keys[~usable] = np.inf
    ranks = np.argsort(np.argsort(keys, axis=1, kind="stable"), axis=1, kind="stable")
    mask = np.where(usable, Cell.TEST, Cell.EXCLUDED).astype(np.uint8)
    mask[usable & (ranks < quota[:, None])] = Cell.TRAIN
    return R.with_mask(mask)


def summarize(R, full_grid=False):
    """Count positive links and the sparsity ratio.

    By default the denominator is the number of non-excluded cells.  With
    ``full_grid=True`` every one of the ``n**2`` cells counts, which is the
    convention behind published dataset tables of 500-node subsamples.
    """
    if full_grid:
        L = int(R.entries.sum())
        denom = R.entries.size
    else:
        usable = R.mask != Cell.EXCLUDED
        L = int(R.entries[usable].sum())
        denom = int(usable.sum())
    S = L / denom if denom else 0.0
    return DatasetSummary(L, S)
