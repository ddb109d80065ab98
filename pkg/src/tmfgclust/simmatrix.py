"""Dataset loading, Pearson similarity matrices, and sorted neighbor lists."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _parallel

_SPLIT = re.compile(r"[\t,]")

SYMMETRY_TOL = 1e-9


class DataError(ValueError):
    """Raised for malformed input files or invalid matrices."""


@dataclass
class Dataset:
    """Labeled collection of equal-length real-valued series.

    labels are contiguous ids 0..k-1; series is an (n, L) float64 array.
    """

    labels: np.ndarray
    series: np.ndarray

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.series = np.asarray(self.series, dtype=np.float64)
        if self.series.ndim != 2:
            raise DataError("series must be a 2-d array")
        if self.n < 4:
            raise DataError(f"dataset too small: need at least 4 objects, got {self.n}")
        if self.length < 2:
            raise DataError(f"series too short: need length >= 2, got {self.length}")
        if self.labels.shape[0] != self.n:
            raise DataError("labels and series row counts differ")

    @property
    def n(self) -> int:
        return self.series.shape[0]

    @property
    def length(self) -> int:
        return self.series.shape[1]

    @property
    def num_classes(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0


def _remap_labels(raw: list[str]) -> np.ndarray:
    """Map an arbitrary label alphabet onto 0..k-1.

    Numeric-looking alphabets are ordered numerically, anything else
    lexicographically, so files with labels {3, 7} map to {0, 1}.
    """
    uniq = sorted(set(raw))
    try:
        uniq.sort(key=float)
    except ValueError:
        pass
    lookup = {lab: i for i, lab in enumerate(uniq)}
    return np.array([lookup[lab] for lab in raw], dtype=np.int64)


def load_ucr_dataset(path) -> Dataset:
    """Read a UCR-style text file: label then L values per line, tab or comma separated."""
    path = Path(path)
    raw_labels: list[str] = []
    rows: list[list[float]] = []
    width = None
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = [f for f in _SPLIT.split(line.replace(" ", "\t")) if f]
            if len(fields) < 3:
                raise DataError(f"{path}:{lineno}: expected a label and at least 2 values")
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise DataError(
                    f"{path}:{lineno}: ragged row, expected {width} fields, got {len(fields)}"
                )
            raw_labels.append(fields[0])
            try:
                values = [float(f) for f in fields[1:]]
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: non-numeric value") from exc
            if any(np.isnan(v) for v in values):
                raise DataError(f"{path}:{lineno}: NaN value in series")
            rows.append(values)
    if len(rows) < 4:
        raise DataError(f"dataset too small: need at least 4 objects, got {len(rows)}")
    return Dataset(labels=_remap_labels(raw_labels), series=np.array(rows))


def pearson_similarity(data: Dataset, workers: int | None = None) -> np.ndarray:
    """Dense Pearson correlation matrix of the dataset's rows.

    Constant rows have undefined correlation; they get 0 against every
    other row (and 1 on the diagonal), keeping the matrix NaN-free.
    """
    from . import _kernels

    workers = _parallel.resolve_workers(workers)
    _parallel.set_numba_threads(workers)
    x = data.series
    xc = x - x.mean(axis=1, keepdims=True)
    norm = np.sqrt(np.einsum("ij,ij->i", xc, xc))
    inv = np.zeros_like(norm)
    nz = norm > 0.0
    inv[nz] = 1.0 / norm[nz]
    out = np.empty((data.n, data.n))
    _kernels.pearson_kernel(xc, inv, out)
    return out


def validate_similarity(S: np.ndarray) -> np.ndarray:
    """Check SimilarityMatrix invariants; returns the validated float64 array."""
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DataError(f"similarity matrix must be square, got shape {S.shape}")
    if np.isnan(S).any():
        raise DataError("similarity matrix contains NaN")
    if not np.array_equal(S, S.T):
        raise DataError("similarity matrix is not symmetric")
    if not np.array_equal(np.diag(S), np.ones(S.shape[0])):
        raise DataError("similarity matrix diagonal must be exactly 1")
    if S.min() < -1.0 or S.max() > 1.0:
        raise DataError("similarity values must lie in [-1, 1]")
    return S


def write_matrix_binary(path, M: np.ndarray) -> None:
    """Write any square matrix: 8-byte little-endian n, then n*n row-major float64."""
    M = np.ascontiguousarray(M, dtype="<f8")
    n = M.shape[0]
    with open(path, "wb") as fh:
        fh.write(np.array(n, dtype="<u8").tobytes())
        fh.write(M.tobytes())


def read_matrix_binary(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 8:
        raise DataError(f"{path}: truncated binary matrix")
    n = int(np.frombuffer(raw[:8], dtype="<u8")[0])
    expected = 8 + 8 * n * n
    if len(raw) != expected:
        raise DataError(f"{path}: size mismatch, expected {expected} bytes for n={n}")
    return np.frombuffer(raw[8:], dtype="<f8").reshape(n, n).copy()


def save_matrix(path, S: np.ndarray) -> None:
    """Persist a similarity matrix in the binary format."""
    write_matrix_binary(path, validate_similarity(S))


def _looks_binary(path) -> bool:
    p = Path(path)
    size = p.stat().st_size
    if size < 8:
        return False
    with p.open("rb") as fh:
        n = int(np.frombuffer(fh.read(8), dtype="<u8")[0])
    return n > 0 and size == 8 + 8 * n * n


def load_matrix(path) -> np.ndarray:
    """Load a similarity matrix from text rows or the binary format.

    Asymmetry above 1e-9 (or a diagonal off 1 by more than that) is
    rejected; smaller deviations are symmetrized away exactly.
    """
    if _looks_binary(path):
        S = read_matrix_binary(path)
    else:
        try:
            S = np.loadtxt(path, delimiter=None)
        except ValueError:
            S = np.loadtxt(path, delimiter=",")
        S = np.atleast_2d(np.asarray(S, dtype=np.float64))
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DataError(f"{path}: matrix must be square, got shape {S.shape}")
    if np.isnan(S).any():
        raise DataError(f"{path}: matrix contains NaN")
    asym = np.abs(S - S.T).max()
    if asym > SYMMETRY_TOL:
        raise DataError(f"{path}: matrix asymmetry {asym:.3e} exceeds {SYMMETRY_TOL}")
    S = (S + S.T) / 2.0
    if np.abs(np.diag(S) - 1.0).max() > SYMMETRY_TOL:
        raise DataError(f"{path}: diagonal entries must equal 1")
    np.fill_diagonal(S, 1.0)
    return validate_similarity(S)


class SortedNeighborLists:
    """Per-vertex neighbor ids ordered by similarity descending, id ascending.

    Stores the (n, n-1) id table plus the matrix it was sorted from;
    similarity values are read back through the matrix.
    """

    def __init__(self, S: np.ndarray, order: np.ndarray):
        self.S = S
        self.order = order

    @property
    def n(self) -> int:
        return self.order.shape[0]

    def pairs(self, v: int) -> list[tuple[float, int]]:
        """The (similarity, neighbor) list for vertex v, best first."""
        return [(float(self.S[v, u]), int(u)) for u in self.order[v]]


def sort_neighbor_lists(S: np.ndarray, workers: int | None = None) -> SortedNeighborLists:
    """Sort every vertex's neighbors by (similarity desc, id asc).

    Rows are sorted independently in fixed-size chunks, so the result is
    identical for any worker count.
    """
    S = np.asarray(S, dtype=np.float64)
    n = S.shape[0]
    workers = _parallel.resolve_workers(workers)
    ids = np.arange(n)
    out = np.empty((n, n - 1), dtype=np.int32)

    def sort_rows(lo: int, hi: int) -> None:
        neg = -S[lo:hi]
        order = np.argsort(neg, axis=1, kind="quicksort")
        vals = np.take_along_axis(neg, order, axis=1)
        tied = (vals[:, 1:] == vals[:, :-1]).any(axis=1)
        for r in np.flatnonzero(tied):
            # ties need the id-ascending rule; redo those rows stably
            order[r] = np.lexsort((ids, neg[r]))
        keep = order != ids[lo:hi, None]
        out[lo:hi] = order[keep].reshape(hi - lo, n - 1)

    _parallel.run_chunked(sort_rows, n, workers)
    return SortedNeighborLists(S, out)
