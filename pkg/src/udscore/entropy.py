"""Cumulative-entropy and Shannon-entropy kernels.

Cumulative entropy (CE) is the information content of a distribution
measured through its cdf, h(X) = -integral P(x) ln P(x) dx. On an
empirical sample it has a closed form over the sorted values, which is
what every other module in this package ultimately calls. Natural
logarithm throughout; all normalized quantities downstream are
base-invariant, so one global base removes a silent degree of freedom.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["CellGroups", "empirical_ce", "conditional_ce", "shannon_entropy"]


def _ce_sorted(sorted_values: np.ndarray) -> float:
    """Closed-form CE of an already-sorted sample.

    h = -sum_{i=1}^{m-1} (x_{i+1} - x_i) * (i/m) * ln(i/m), accumulated in
    sorted-value order so results are bit-reproducible. Constant or
    single-point samples give exactly 0 (every gap is zero / no gaps).
    """
    m = sorted_values.shape[0]
    if m < 2:
        return 0.0
    gaps = np.diff(sorted_values)
    p = np.arange(1, m, dtype=np.float64) / m
    return float(np.sum(gaps * (-p * np.log(p))))


def empirical_ce(values) -> float:
    """Empirical cumulative entropy of a real-valued sample.

    Non-negative; zero iff the sample is constant (or has < 2 points).
    Translation-invariant and positively homogeneous: ce(a*x + t) = a*ce(x)
    for a > 0.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        arr = arr.ravel()
    if arr.size == 0:
        raise ValueError("empirical_ce of an empty sample is undefined")
    if not np.all(np.isfinite(arr)):
        raise ValueError("empirical_ce requires finite values")
    return _ce_sorted(np.sort(arr, kind="stable"))


@dataclass(frozen=True)
class CellGroups:
    """Disjoint record-index groups covering a conditioning population.

    One group per non-empty cell of the conditioning space; weights are
    group size over total size.
    """

    groups: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if not self.groups:
            raise ValueError("CellGroups needs at least one group")
        cleaned = []
        seen: set[int] = set()
        for g in self.groups:
            idx = np.asarray(g, dtype=np.intp)
            if idx.size == 0:
                raise ValueError("empty group in CellGroups")
            overlap = seen.intersection(idx.tolist())
            if overlap:
                raise ValueError(f"groups overlap at record {min(overlap)}")
            seen.update(idx.tolist())
            cleaned.append(idx)
        object.__setattr__(self, "groups", tuple(cleaned))

    @property
    def total(self) -> int:
        return sum(g.size for g in self.groups)

    @classmethod
    def from_labels(cls, labels) -> "CellGroups":
        """Group record indices by their (arbitrary hashable) cell label.

        Groups are ordered by ascending label so the construction is
        deterministic and independent of record order.
        """
        labels = np.asarray(labels)
        order = np.argsort(labels, kind="stable")
        sorted_labels = labels[order]
        boundaries = np.flatnonzero(sorted_labels[1:] != sorted_labels[:-1]) + 1
        return cls(tuple(np.split(order, boundaries)))


def conditional_ce(target, cells: CellGroups) -> float:
    """Cell-conditioned cumulative entropy: size-weighted within-cell CE.

    Groups of size 1 contribute 0. Weighted terms accumulate in cell-id
    order (the order of ``cells.groups``), within-cell sums in sorted-value
    order, so repeated evaluation is bit-identical.
    """
    arr = np.asarray(target, dtype=np.float64)
    total = cells.total
    terms = np.empty(len(cells.groups), dtype=np.float64)
    for i, g in enumerate(cells.groups):
        if np.any(g >= arr.size) or np.any(g < 0):
            raise ValueError("cell group indexes outside the target sample")
        terms[i] = (g.size / total) * _ce_sorted(np.sort(arr[g], kind="stable"))
    return float(np.sum(terms))


def shannon_entropy(cell_counts) -> float:
    """Plug-in Shannon entropy of positive integer counts, in nats."""
    counts = np.asarray(cell_counts, dtype=np.float64)
    if counts.size == 0:
        raise ValueError("shannon_entropy of no cells is undefined")
    if np.any(counts < 1):
        raise ValueError("cell counts must be >= 1")
    p = counts / counts.sum()
    return float(np.sum(-p * np.log(p)))
