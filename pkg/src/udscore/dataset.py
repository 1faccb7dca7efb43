"""Columnar real-valued datasets with cached per-column rank indexes.

Every downstream entropy computation works on sorted views of columns, so
the sort permutation of each column (its rank index) is computed once and
cached on the dataset. Datasets are immutable after construction and safe
to share across threads and processes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Dataset", "DataError", "load_csv", "write_csv", "rank_index"]


class DataError(ValueError):
    """Raised when input data violates the dataset contract."""


def _as_finite_matrix(columns: list[np.ndarray], names: list[str]) -> None:
    for name, col in zip(names, columns):
        if not np.all(np.isfinite(col)):
            bad = int(np.flatnonzero(~np.isfinite(col))[0])
            raise DataError(f"non-finite value in column {name!r} at record {bad + 1}")


@dataclass(frozen=True)
class Dataset:
    """Immutable column-major table of float64 values.

    ``names`` and ``columns`` are aligned; all columns share length ``m``.
    Rank indexes (stable sort permutations) are computed lazily, once per
    column, and cached for reuse by every scoring call.
    """

    names: tuple[str, ...]
    columns: tuple[np.ndarray, ...]
    _rank_cache: dict[int, np.ndarray] = field(
        default_factory=dict, repr=False, compare=False
    )
    # Package-internal memo for per-column derived artifacts (initial
    # binnings, column CE values); keyed by the computing module.
    _aux_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.names) != len(self.columns):
            raise DataError("names and columns must align")
        if len(self.names) == 0:
            raise DataError("dataset needs at least one column")
        if len(set(self.names)) != len(self.names):
            raise DataError("duplicate column names")
        if any(not n for n in self.names):
            raise DataError("column names must be non-empty")
        lengths = {len(c) for c in self.columns}
        if len(lengths) != 1:
            raise DataError(f"columns have differing lengths: {sorted(lengths)}")
        m = lengths.pop()
        if m < 2:
            raise DataError("m >= 2 required")
        cols = tuple(np.ascontiguousarray(c, dtype=np.float64) for c in self.columns)
        _as_finite_matrix(list(cols), list(self.names))
        for c in cols:
            c.flags.writeable = False
        object.__setattr__(self, "columns", cols)

    @property
    def m(self) -> int:
        """Record count."""
        return len(self.columns[0])

    @property
    def n(self) -> int:
        """Dimension count."""
        return len(self.columns)

    def column_index(self, column_id: int | str) -> int:
        """Resolve a column name or integer index to an integer index."""
        if isinstance(column_id, str):
            try:
                return self.names.index(column_id)
            except ValueError:
                raise DataError(f"unknown column {column_id!r}") from None
        idx = int(column_id)
        if not 0 <= idx < self.n:
            raise DataError(f"column index {idx} out of range [0, {self.n})")
        return idx

    def column(self, column_id: int | str) -> np.ndarray:
        return self.columns[self.column_index(column_id)]

    def rank_index(self, column_id: int | str) -> np.ndarray:
        """Stable sort permutation of a column (ties by ascending record index).

        Returns record indices such that ``column[order]`` is non-decreasing.
        Cached per column.
        """
        idx = self.column_index(column_id)
        order = self._rank_cache.get(idx)
        if order is None:
            order = np.argsort(self.columns[idx], kind="stable")
            order.flags.writeable = False
            self._rank_cache[idx] = order
        return order

    def sorted_column(self, column_id: int | str) -> np.ndarray:
        """Column values in non-decreasing order (via the rank index)."""
        idx = self.column_index(column_id)
        return self.columns[idx][self.rank_index(idx)]

    @classmethod
    def from_arrays(cls, names, columns) -> "Dataset":
        return cls(tuple(names), tuple(np.asarray(c, dtype=np.float64) for c in columns))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, names=None) -> "Dataset":
        """Build a dataset from an (m, n) matrix, synthesizing names if absent."""
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise DataError("matrix must be two-dimensional")
        if names is None:
            names = [f"col{i + 1}" for i in range(matrix.shape[1])]
        return cls.from_arrays(names, [matrix[:, j] for j in range(matrix.shape[1])])


def rank_index(dataset: Dataset, column_id: int | str) -> np.ndarray:
    """Stable sort permutation of one column; cached on the dataset."""
    return dataset.rank_index(column_id)


def _parse_cell(text: str, row: int, col: int, drop_na: bool) -> float:
    stripped = text.strip()
    if stripped == "":
        if drop_na:
            return math.nan
        raise DataError(f"empty cell at row {row}, column {col}")
    try:
        value = float(stripped)
    except ValueError:
        raise DataError(
            f"cannot parse {text!r} as a number at row {row}, column {col}"
        ) from None
    if math.isnan(value):
        if drop_na:
            return value
        raise DataError(f"NaN value at row {row}, column {col}")
    if math.isinf(value):
        raise DataError(f"infinite value at row {row}, column {col}")
    return value


def load_csv(
    path,
    has_header: bool = True,
    delimiter: str = ",",
    drop_na: bool = False,
) -> Dataset:
    """Load a delimited text file of real numbers into a Dataset.

    Rows must all have the same arity and every cell must parse as a finite
    decimal number (scientific notation accepted). With ``drop_na`` set,
    rows containing missing cells (empty or NaN) are dropped whole;
    otherwise they are an error. Row/column locations in error messages are
    1-based and count the header row if present.
    """
    rows: list[list[float]] = []
    names: list[str] | None = None
    arity: int | None = None
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        for lineno, record in enumerate(reader, start=1):
            if not record:
                continue
            if names is None and has_header:
                names = [cell.strip() for cell in record]
                if len(set(names)) != len(names):
                    raise DataError("duplicate header names")
                arity = len(names)
                continue
            if arity is None:
                arity = len(record)
            if len(record) != arity:
                raise DataError(
                    f"ragged row at line {lineno}: expected {arity} cells, "
                    f"got {len(record)}"
                )
            parsed = [
                _parse_cell(cell, lineno, col + 1, drop_na)
                for col, cell in enumerate(record)
            ]
            if drop_na and any(math.isnan(v) for v in parsed):
                continue
            rows.append(parsed)
    if arity is None:
        raise DataError(f"{path}: no data rows")
    if names is None:
        names = [f"col{i + 1}" for i in range(arity)]
    if len(rows) < 2:
        raise DataError("m >= 2 required: fewer than 2 usable records")
    matrix = np.array(rows, dtype=np.float64)
    return Dataset.from_arrays(names, [matrix[:, j] for j in range(arity)])


def write_csv(dataset: Dataset, path, delimiter: str = ",") -> None:
    """Write a dataset to CSV with round-trip-exact float formatting."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        writer.writerow(dataset.names)
        for i in range(dataset.m):
            writer.writerow([repr(float(col[i])) for col in dataset.columns])
