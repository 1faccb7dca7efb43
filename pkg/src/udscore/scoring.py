"""Universal dependency scores over column subsets.

The score of an ordered tuple of columns is the sum of cumulative-entropy
reductions h(X_i) - h(X_i | X_1..X_{i-1}) for i >= 2, normalized by the
sum of the unconditional terms, so every subspace lands on a common [0, 1]
scale. Conditional terms come from the discretizer pipeline: at step i the
previous column is discretized (optimal merge plus bin-count selection)
against the current target and joins the conditioning cells for all later
steps; columns already discretized are never revisited.

``uds_pr`` evaluates the single permutation sorting columns by descending
CE; ``uds_exact`` maximizes over all permutations for small subsets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .discretizer import (
    CellPartition,
    band_ce_table,
    equal_frequency_bins,
    extend_cells,
    optimal_merge,
    select_bin_count,
    _grouped_ce,
)
from .entropy import _ce_sorted

__all__ = [
    "ScoreResult",
    "uds_pr",
    "uds_exact",
    "unnormalized_score",
    "column_ce",
    "DEFAULT_BETA",
    "MAX_EXACT_DIMS",
]

DEFAULT_BETA = 20
MAX_EXACT_DIMS = 6


@dataclass(frozen=True)
class ScoreResult:
    """A dependency score with its full evaluation trace.

    ``permutation`` is the evaluation order (column indices);
    ``unconditional``/``conditional`` hold the per-step CE terms for
    positions 2..d of that order; ``bin_counts`` the chosen bin count of
    each discretized column (positions 1..d-1).
    """

    score: float
    permutation: tuple[int, ...]
    unconditional: tuple[float, ...]
    conditional: tuple[float, ...]
    bin_counts: tuple[int, ...]
    numerator: float
    denominator: float
    beta: int

    def to_dict(self, dataset: Dataset | None = None) -> dict:
        doc = {
            "score": self.score,
            "permutation": list(self.permutation),
            "unconditional_ce": list(self.unconditional),
            "conditional_ce": list(self.conditional),
            "bin_counts": list(self.bin_counts),
            "numerator": self.numerator,
            "denominator": self.denominator,
            "beta": self.beta,
        }
        if dataset is not None:
            doc["columns"] = [dataset.names[i] for i in self.permutation]
        return doc


def column_ce(dataset: Dataset, column_id: int | str) -> float:
    """Unconditional CE of one column, cached on the dataset."""
    idx = dataset.column_index(column_id)
    cached = dataset._aux_cache.get(("ce", idx))
    if cached is None:
        cached = _ce_sorted(dataset.sorted_column(idx))
        dataset._aux_cache[("ce", idx)] = cached
    return cached


def _partition_ce(
    target: np.ndarray, labels: np.ndarray, target_order: np.ndarray
) -> float:
    """Conditional CE of the target given dense partition labels."""
    m = target.shape[0]
    rank = np.empty(m, dtype=np.int64)
    rank[target_order] = np.arange(m)
    keys = labels.astype(np.int64) * m + rank
    order = np.argsort(keys)
    return _grouped_ce(keys[order], target[order], m)


def _resolve_dims(dataset: Dataset, dims) -> list[int]:
    if isinstance(dims, (str, int)):
        raise ValueError("dims must be a collection of column ids")
    return [dataset.column_index(d) for d in dims]


def _pipeline(dataset: Dataset, order: list[int], beta: int) -> ScoreResult:
    """Evaluate the score of one fixed evaluation order."""
    cells = CellPartition.trivial(dataset.m)
    unconds: list[float] = []
    conds: list[float] = []
    lams: list[int] = []
    for prev, cur in zip(order, order[1:]):
        target = dataset.columns[cur]
        target_order = dataset.rank_index(cur)
        h_target = column_ce(dataset, cur)
        binning = equal_frequency_bins(dataset, prev, beta)
        f = band_ce_table(target, cells, binning, target_order=target_order)
        table = optimal_merge(np.cumsum(binning.sizes), f)
        chosen = select_bin_count(table, h_target, cells, binning)
        cells = extend_cells(cells, chosen.binning)
        unconds.append(h_target)
        conds.append(_partition_ce(target, cells.labels, target_order))
        lams.append(chosen.lam)
    numerator = math.fsum(u - c for u, c in zip(unconds, conds))
    denominator = math.fsum(unconds)
    score = numerator / denominator if denominator > 0.0 else 0.0
    return ScoreResult(
        score=score,
        permutation=tuple(order),
        unconditional=tuple(unconds),
        conditional=tuple(conds),
        bin_counts=tuple(lams),
        numerator=numerator,
        denominator=denominator,
        beta=beta,
    )


def uds_pr(dataset: Dataset, dims, beta: int = DEFAULT_BETA) -> ScoreResult:
    """Practical universal dependency score of a column subset.

    Columns are evaluated in descending order of unconditional CE (ties by
    ascending column index); the result is in [0, 1], with 0/0 read as 0.
    """
    idx = sorted(set(_resolve_dims(dataset, dims)))
    if len(idx) < 2:
        raise ValueError("need at least 2 distinct columns to score")
    order = sorted(idx, key=lambda c: (-column_ce(dataset, c), c))
    return _pipeline(dataset, order, beta)


def uds_exact(
    dataset: Dataset,
    dims,
    beta: int = DEFAULT_BETA,
    max_dims: int = MAX_EXACT_DIMS,
) -> ScoreResult:
    """Maximum score over every evaluation order (d! enumeration).

    Capped at ``max_dims`` columns; the first permutation attaining the
    maximum (in lexicographic enumeration order) is reported.
    """
    idx = sorted(set(_resolve_dims(dataset, dims)))
    if len(idx) < 2:
        raise ValueError("need at least 2 distinct columns to score")
    if len(idx) > max_dims:
        raise ValueError(
            f"{len(idx)} columns exceed the exact-enumeration cap {max_dims}"
        )
    best: ScoreResult | None = None
    for perm in itertools.permutations(idx):
        result = _pipeline(dataset, list(perm), beta)
        if best is None or result.score > best.score:
            best = result
    assert best is not None
    return best


def unnormalized_score(dataset: Dataset, dims, beta: int = DEFAULT_BETA) -> float:
    """Sum of CE reductions for a fixed, caller-supplied column order.

    This is the raw (non-universal) dependency total; it grows as columns
    are appended and is bounded by the sum of unconditional CE terms.
    """
    order = _resolve_dims(dataset, dims)
    if len(order) < 2:
        raise ValueError("need at least 2 columns")
    if len(set(order)) != len(order):
        raise ValueError("ordered dims must be distinct")
    result = _pipeline(dataset, order, beta)
    return result.numerator
