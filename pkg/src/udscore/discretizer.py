"""Optimal single-column discretization against a conditioning partition.

Given a target column, a column to discretize, and the hypercube cells of
already-discretized dimensions, this module finds, for every bin count
lambda, the contiguous merge of equal-frequency initial bins minimizing
the cell-conditioned cumulative entropy of the target, then selects the
bin count that best trades that reduction against a Shannon-entropy
regularizer penalizing fine partitions.

The precomputed ingredient is the band table: conditional CE of the
target restricted to every contiguous range of initial bins. It is built
by presorting target values per (cell, initial bin) through the target's
rank index and growing bands with sorted-array merges, so each band costs
one linear pass instead of a fresh sort.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .entropy import CellGroups, shannon_entropy

__all__ = [
    "InitialBinning",
    "CellPartition",
    "MergedBinning",
    "MergeTable",
    "equal_frequency_bins",
    "band_ce_table",
    "optimal_merge",
    "select_bin_count",
    "extend_cells",
    "MAX_BETA",
]

# Band tables are dense upper-triangular beta x beta arrays; the cap keeps
# them negligible in memory and the DP cubic term small.
MAX_BETA = 64


@dataclass(frozen=True)
class InitialBinning:
    """Equal-frequency initial bins of one column, ties kept whole.

    ``bin_of`` maps each record to its 0-based bin; ``boundaries`` holds
    the upper edge value of every bin but the last (strictly increasing,
    falling only in gaps between distinct values). ``bin_count`` may be
    smaller than requested under heavy ties.
    """

    column_id: int
    bin_of: np.ndarray
    sizes: np.ndarray
    boundaries: np.ndarray
    requested: int

    @property
    def bin_count(self) -> int:
        return len(self.sizes)

    @property
    def capped(self) -> bool:
        return self.bin_count < self.requested


@dataclass(frozen=True)
class CellPartition:
    """Assignment of every record to a non-empty hypercube cell.

    ``labels`` are dense cell ids in [0, k); ``bin_counts`` holds the
    number of bins each already-discretized dimension was split into
    (the e_i of the model-selection denominator).
    """

    labels: np.ndarray
    bin_counts: tuple[int, ...]

    @property
    def k(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels)

    @classmethod
    def trivial(cls, m: int) -> "CellPartition":
        """One cell containing every record (no dimension discretized yet)."""
        return cls(np.zeros(m, dtype=np.intp), ())

    def groups(self) -> CellGroups:
        return CellGroups.from_labels(self.labels)


@dataclass(frozen=True)
class MergedBinning:
    """A chosen merge of initial bins into ``bin_count`` contiguous bins."""

    column_id: int
    labels: np.ndarray
    bin_count: int
    boundaries: np.ndarray
    segments: tuple[tuple[int, int], ...]


def equal_frequency_bins(
    dataset: Dataset, column_id: int | str, beta: int
) -> InitialBinning:
    """Split a column into up to ``beta`` near-equal-count bins.

    Cut points land only in gaps between distinct values, each shifted to
    the nearest permissible gap (ties toward the earlier gap), so records
    with equal values never split across bins. When the column has fewer
    than ``beta`` distinct values, every distinct value gets its own bin.
    """
    if beta < 1:
        raise ValueError("beta must be >= 1")
    if beta > MAX_BETA:
        raise ValueError(f"beta {beta} exceeds the cap {MAX_BETA}")
    idx = dataset.column_index(column_id)
    cached = dataset._aux_cache.get(("bins", idx, beta))
    if cached is not None:
        return cached
    order = dataset.rank_index(idx)
    xs = dataset.columns[idx][order]
    m = xs.shape[0]
    gaps = np.flatnonzero(xs[1:] > xs[:-1]) + 1  # permissible cut positions
    distinct = gaps.size + 1
    if beta >= distinct:
        cuts = gaps
    else:
        ideal = np.arange(1, beta, dtype=np.float64) * (m / beta)
        right = np.searchsorted(gaps, ideal)
        left = np.clip(right - 1, 0, gaps.size - 1)
        right = np.clip(right, 0, gaps.size - 1)
        pick_left = np.abs(gaps[left] - ideal) <= np.abs(gaps[right] - ideal)
        cuts = np.unique(np.where(pick_left, gaps[left], gaps[right]))
    edges = np.concatenate([[0], cuts, [m]])
    sizes = np.diff(edges)
    positions = np.empty(m, dtype=np.intp)
    positions[order] = np.arange(m)
    bin_of = np.searchsorted(cuts, positions, side="right").astype(np.intp)
    boundaries = xs[cuts - 1] if cuts.size else np.empty(0, dtype=np.float64)
    binning = InitialBinning(
        column_id=idx,
        bin_of=bin_of,
        sizes=sizes,
        boundaries=boundaries,
        requested=beta,
    )
    dataset._aux_cache[("bins", idx, beta)] = binning
    return binning


def _merge_sorted(k1, v1, k2, v2):
    """Merge two key-sorted runs; keys are globally distinct integers."""
    out_k = np.empty(k1.size + k2.size, dtype=np.int64)
    out_v = np.empty(k1.size + k2.size, dtype=np.float64)
    pos1 = np.searchsorted(k2, k1) + np.arange(k1.size)
    pos2 = np.searchsorted(k1, k2) + np.arange(k2.size)
    out_k[pos1] = k1
    out_k[pos2] = k2
    out_v[pos1] = v1
    out_v[pos2] = v2
    return out_k, out_v


def _grouped_ce(keys: np.ndarray, values: np.ndarray, stride: int) -> float:
    """Size-weighted CE over cell groups of a (cell, value)-sorted band.

    ``keys`` encode (cell id * stride + value rank); groups are contiguous
    runs sharing ``keys // stride``. Returns sum_y (L_y / n) * ce(group y).
    """
    n = keys.size
    if n < 2:
        return 0.0
    cells = keys // stride
    new_group = np.empty(n, dtype=bool)
    new_group[0] = True
    np.not_equal(cells[1:], cells[:-1], out=new_group[1:])
    starts = np.flatnonzero(new_group)
    group_len = np.diff(np.append(starts, n))
    group_idx = np.cumsum(new_group) - 1
    local_rank = np.arange(n) - starts[group_idx]
    inner = np.flatnonzero(local_rank >= 1)
    if inner.size == 0:
        return 0.0
    sizes = group_len[group_idx[inner]].astype(np.float64)
    p = local_rank[inner] / sizes
    # Weights applied as (size/n) * (gap * g) so a single full-population
    # group reproduces the unconditional closed form bit-for-bit.
    weights = sizes / n
    contributions = weights * ((values[inner] - values[inner - 1]) * (-p * np.log(p)))
    return float(np.sum(contributions))


def band_ce_table(
    target_column: np.ndarray,
    cells: CellPartition,
    binning: InitialBinning,
    target_order: np.ndarray | None = None,
) -> np.ndarray:
    """Conditional CE of the target over every contiguous band of bins.

    Entry [j, i] (0-based, j <= i) conditions the target, restricted to
    records in initial bins j..i, on the partition cells intersected with
    that band. Values below the diagonal are NaN. ``target_order`` is the
    target column's rank index; it is recomputed if not supplied.
    """
    target = np.asarray(target_column, dtype=np.float64)
    m = target.shape[0]
    if cells.labels.shape[0] != m or binning.bin_of.shape[0] != m:
        raise ValueError("cells, binning, and target must cover the same records")
    if target_order is None:
        target_order = np.argsort(target, kind="stable")
    rank = np.empty(m, dtype=np.int64)
    rank[target_order] = np.arange(m)
    keys = cells.labels.astype(np.int64) * m + rank
    by_bin = np.lexsort((keys, binning.bin_of))
    bin_starts = np.concatenate([[0], np.cumsum(binning.sizes)])
    beta = binning.bin_count
    block_keys = [
        keys[by_bin[bin_starts[b] : bin_starts[b + 1]]] for b in range(beta)
    ]
    block_vals = [
        target[by_bin[bin_starts[b] : bin_starts[b + 1]]] for b in range(beta)
    ]
    f = np.full((beta, beta), np.nan)
    for j in range(beta):
        band_k, band_v = block_keys[j], block_vals[j]
        f[j, j] = _grouped_ce(band_k, band_v, m)
        for i in range(j + 1, beta):
            band_k, band_v = _merge_sorted(band_k, band_v, block_keys[i], block_vals[i])
            f[j, i] = _grouped_ce(band_k, band_v, m)
    return f


@dataclass(frozen=True)
class MergeTable:
    """Completed dynamic program over contiguous bin merges.

    ``val[lam, i]`` (1-based in both axes) is the minimum weighted
    conditional CE achievable by merging initial bins 1..i into lam bins;
    ``choice`` records the argmin split point for backtracking. Entries
    with lam > i are +inf (infeasible).
    """

    val: np.ndarray
    choice: np.ndarray
    supports: np.ndarray
    bin_count: int

    def objective(self, lam: int) -> float:
        return float(self.val[lam, self.bin_count])

    def objectives(self) -> np.ndarray:
        """Objective per lam in [1, bin_count] (index 0 unused, +inf)."""
        return self.val[:, self.bin_count]

    def cuts(self, lam: int) -> list[int]:
        """1-based initial-bin indexes ending each merged bin but the last."""
        if not 1 <= lam <= self.bin_count:
            raise ValueError(f"lam {lam} outside [1, {self.bin_count}]")
        cuts: list[int] = []
        i, level = self.bin_count, lam
        while level > 1:
            pos = int(self.choice[level, i])
            cuts.append(pos)
            i, level = pos, level - 1
        cuts.reverse()
        return cuts

    def segments(self, lam: int) -> tuple[tuple[int, int], ...]:
        """0-based inclusive (first, last) initial-bin ranges per merged bin."""
        ends = self.cuts(lam) + [self.bin_count]
        starts = [1] + [c + 1 for c in self.cuts(lam)]
        return tuple((s - 1, e - 1) for s, e in zip(starts, ends))

    def merged_labels(self, lam: int, bin_of: np.ndarray) -> np.ndarray:
        """Map per-record initial-bin ids to merged-bin ids for ``lam``."""
        ends = np.array(self.cuts(lam) + [self.bin_count])
        return np.searchsorted(ends, bin_of + 1, side="left").astype(np.intp)


def optimal_merge(
    supports: np.ndarray, band_ce: np.ndarray, beta: int | None = None
) -> MergeTable:
    """Solve the optimal-merge recurrence for every bin count.

    ``supports[i]`` (1-based) is the cumulative record count of initial
    bins 1..i; ``band_ce`` is the 0-based band table. The recurrence
    splits bins 1..i into an optimal (lam-1)-merge of a prefix plus one
    final band, with argmin ties broken toward the smallest split point.
    """
    band_ce = np.asarray(band_ce, dtype=np.float64)
    if beta is None:
        beta = band_ce.shape[0]
    s = np.zeros(beta + 1, dtype=np.float64)
    s[1:] = np.asarray(supports, dtype=np.float64)[:beta]
    if np.any(np.diff(s) <= 0):
        raise ValueError("cumulative supports must be strictly increasing")
    f = np.full((beta + 1, beta + 1), np.nan)
    f[1 : beta + 1, 1 : beta + 1] = band_ce[:beta, :beta]
    val = np.full((beta + 1, beta + 1), np.inf)
    choice = np.zeros((beta + 1, beta + 1), dtype=np.intp)
    val[1, 1 : beta + 1] = f[1, 1 : beta + 1]
    for lam in range(2, beta + 1):
        for i in range(lam, beta + 1):
            js = np.arange(lam - 1, i)
            omega = (s[i] - s[js]) / s[i] * f[js + 1, i] + s[js] / s[i] * val[
                lam - 1, js
            ]
            best = int(np.argmin(omega))
            val[lam, i] = omega[best]
            choice[lam, i] = js[best]
    return MergeTable(val=val, choice=choice, supports=s, bin_count=beta)


@dataclass(frozen=True)
class BinCountChoice:
    """Outcome of model selection: the bin count and its merged binning."""

    lam: int
    binning: MergedBinning
    objective_terms: np.ndarray


def select_bin_count(
    table: MergeTable,
    h_target: float,
    cells: CellPartition,
    binning: InitialBinning,
) -> BinCountChoice:
    """Pick the bin count balancing CE reduction against partition entropy.

    Minimizes val(lam)/h(target) + H(cells, lam-binning)/(ln beta +
    sum ln e_i) over lam in [1, beta], with 0/0 in the first term read as
    0 and ties broken toward smaller lam. A lone column with beta = 1
    would zero the regularizer denominator, so that case returns lam = 1
    outright.
    """
    beta = table.bin_count
    depth = len(cells.bin_counts)
    if beta == 1 and depth == 0:
        merged = _merged_binning(table, 1, binning)
        return BinCountChoice(1, merged, np.zeros(2, dtype=np.float64))
    denom = float(np.log(beta) + sum(np.log(e) for e in cells.bin_counts))
    objective = np.full(beta + 1, np.inf)
    for lam in range(1, beta + 1):
        labels = table.merged_labels(lam, binning.bin_of)
        joint = cells.labels.astype(np.int64) * lam + labels
        counts = np.bincount(joint)
        joint_entropy = shannon_entropy(counts[counts > 0])
        fit = 0.0 if h_target == 0.0 else table.objective(lam) / h_target
        objective[lam] = fit + joint_entropy / denom
    lam_star = int(np.argmin(objective[1:])) + 1
    merged = _merged_binning(table, lam_star, binning)
    return BinCountChoice(lam_star, merged, objective)


def _merged_binning(
    table: MergeTable, lam: int, binning: InitialBinning
) -> MergedBinning:
    segments = table.segments(lam)
    cuts = table.cuts(lam)
    # Boundary of a merged bin is the upper edge of its last initial bin.
    boundaries = (
        binning.boundaries[np.array(cuts, dtype=np.intp) - 1]
        if cuts
        else np.empty(0, dtype=np.float64)
    )
    labels = table.merged_labels(lam, binning.bin_of)
    return MergedBinning(
        column_id=binning.column_id,
        labels=labels,
        bin_count=lam,
        boundaries=boundaries,
        segments=segments,
    )


def extend_cells(cells: CellPartition, binning: MergedBinning) -> CellPartition:
    """Refine a partition with one newly discretized dimension.

    Cell ids are re-densified in ascending (old cell, new bin) order so the
    result is deterministic and independent of record order.
    """
    if binning.labels.shape[0] != cells.labels.shape[0]:
        raise ValueError("binning and cells must cover the same records")
    joint = cells.labels.astype(np.int64) * binning.bin_count + binning.labels
    _, dense = np.unique(joint, return_inverse=True)
    return CellPartition(
        labels=dense.astype(np.intp),
        bin_counts=cells.bin_counts + (binning.bin_count,),
    )
