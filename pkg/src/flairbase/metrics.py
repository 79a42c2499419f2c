"""Dataset-wise voxel metrics: Dice, best-Dice threshold search, PR and ROC.

All curve metrics work on voxels pooled over every scan of a dataset
(:class:`ScoredVoxelSet`). The Dice search needs per-scan geometry for the
component filter, so it takes :class:`ScoredScan` objects instead.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .components import check_connectivity, to_kernel_layout
from .errors import DegenerateLabels, DimMismatch, NoPositives

DEFAULT_N_THRESHOLDS = 100
SCOPES = ("all_voxels", "brain_only")


def dice(pred: np.ndarray, gt: np.ndarray) -> float:
    pred = np.asarray(pred, dtype=bool)
    gt = np.asarray(gt, dtype=bool)
    if pred.shape != gt.shape:
        raise DimMismatch(f"prediction {pred.shape} vs ground truth {gt.shape}")
    total = int(pred.sum()) + int(gt.sum())
    if total == 0:
        return 1.0
    return 2.0 * int(np.count_nonzero(pred & gt)) / total


def dice_from_counts(tp, pred, positives):
    """2·TP / (|pred| + |gt|), elementwise over count arrays."""
    tp = np.asarray(tp, dtype=np.int64)
    denom = np.asarray(pred, dtype=np.int64) + positives
    return np.where(denom > 0, 2.0 * tp / np.maximum(denom, 1), 1.0)


# --------------------------------------------------------------------------
# pooled scores


@dataclass(frozen=True, eq=False)
class ScoredVoxelSet:
    """Pooled (score, label) pairs. Merging concatenates; order never matters."""

    chunks: tuple = field(default=())

    @classmethod
    def from_arrays(cls, scores, labels) -> "ScoredVoxelSet":
        scores = np.asarray(scores, dtype=np.float64).ravel()
        labels = np.asarray(labels, dtype=bool).ravel()
        if scores.shape != labels.shape:
            raise DimMismatch(f"{scores.size} scores vs {labels.size} labels")
        return cls(((scores, labels),))

    def merge(self, other: "ScoredVoxelSet") -> "ScoredVoxelSet":
        return ScoredVoxelSet(self.chunks + other.chunks)

    __add__ = merge

    @property
    def scores(self) -> np.ndarray:
        if not self.chunks:
            return np.empty(0)
        return np.concatenate([c[0] for c in self.chunks])

    @property
    def labels(self) -> np.ndarray:
        if not self.chunks:
            return np.empty(0, dtype=bool)
        return np.concatenate([c[1] for c in self.chunks])

    @property
    def positives(self) -> int:
        return sum(int(np.count_nonzero(c[1])) for c in self.chunks)

    def __len__(self) -> int:
        return sum(c[0].size for c in self.chunks)

    @property
    def negatives(self) -> int:
        return len(self) - self.positives


def pool_scan(scores: np.ndarray, gt: np.ndarray, scope_mask: np.ndarray | None = None) -> ScoredVoxelSet:
    scores = np.asarray(scores)
    gt = np.asarray(gt, dtype=bool)
    if scores.shape != gt.shape:
        raise DimMismatch(f"anomaly map {scores.shape} vs ground truth {gt.shape}")
    if scope_mask is None:
        return ScoredVoxelSet.from_arrays(scores, gt)
    return ScoredVoxelSet.from_arrays(scores[scope_mask], gt[scope_mask])


def pool_dataset(maps, gts, scope: str = "all_voxels") -> ScoredVoxelSet:
    """Concatenate (score, label) over all scans; ``maps`` are AnomalyMaps."""
    if scope not in SCOPES:
        raise ValueError(f"scope must be one of {SCOPES}, got {scope!r}")
    if len(maps) != len(gts):
        raise DimMismatch(f"{len(maps)} anomaly maps vs {len(gts)} ground truths")
    pool = ScoredVoxelSet()
    for amap, gt in zip(maps, gts):
        pool = pool + pool_scan(amap.scores, gt, amap.mask if scope == "brain_only" else None)
    return pool


# --------------------------------------------------------------------------
# curves


class CurvePoint(NamedTuple):
    threshold: float
    precision: float
    recall: float
    fpr: float
    tpr: float


@dataclass(frozen=True, eq=False)
class Curve:
    """Operating points at every distinct score, highest first.

    Point ``k`` predicts positive for ``score >= threshold[k]``.
    """

    threshold: np.ndarray
    tp: np.ndarray
    fp: np.ndarray
    positives: int
    negatives: int

    def __len__(self) -> int:
        return self.threshold.size

    @property
    def precision(self) -> np.ndarray:
        return self.tp / (self.tp + self.fp)

    @property
    def recall(self) -> np.ndarray:
        return self.tp / self.positives

    tpr = recall

    @property
    def fpr(self) -> np.ndarray:
        return self.fp / self.negatives

    def __getitem__(self, k) -> CurvePoint:
        tp, fp = int(self.tp[k]), int(self.fp[k])
        return CurvePoint(
            float(self.threshold[k]),
            tp / (tp + fp),
            tp / self.positives,
            fp / self.negatives,
            tp / self.positives,
        )

    def points(self) -> list[CurvePoint]:
        return [self[k] for k in range(len(self))]

    def decimate(self, max_points: int) -> "Curve":
        """Evenly spaced subset of points, always keeping both ends."""
        if max_points <= 0 or len(self) <= max_points:
            return self
        idx = np.unique(np.linspace(0, len(self) - 1, max_points).round().astype(np.intp))
        return Curve(self.threshold[idx], self.tp[idx], self.fp[idx], self.positives, self.negatives)


def sweep(pool: ScoredVoxelSet) -> Curve:
    """Sort by descending score and accumulate TP/FP per tie group."""
    scores, labels = pool.scores, pool.labels
    n_pos = int(np.count_nonzero(labels))
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels(f"need both classes, got P={n_pos}, N={n_neg}")
    order = np.argsort(scores, kind="stable")[::-1]
    s = scores[order]
    tp = np.cumsum(labels[order], dtype=np.int64)
    last = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tp = tp[last]
    fp = last + 1 - tp
    return Curve(s[last], tp, fp, n_pos, n_neg)


def average_precision(curve: Curve) -> float:
    # divide once at the end so a perfect ranking gives exactly 1.0
    tp_steps = np.diff(np.r_[0, curve.tp])
    return float(np.sum(tp_steps * curve.precision) / curve.positives)


def rank_auroc(curve: Curve) -> float:
    """Mann-Whitney statistic with midranks, computed from the tie groups.

    Everything stays integer until the final division.
    """
    n = int(curve.tp[-1] + curve.fp[-1])
    cum = curve.tp + curve.fp
    group = np.diff(np.r_[0, cum])
    pos = np.diff(np.r_[0, curve.tp])
    # twice the midrank of each group in ascending order
    twice_rank = 2 * (n - cum) + group + 1
    twice_rank_sum = int(np.sum(pos * twice_rank))
    p, q = curve.positives, curve.negatives
    twice_u = twice_rank_sum - p * (p + 1)
    return twice_u / (2 * p * q)


def trapezoid_auroc(curve: Curve) -> float:
    fpr = np.r_[0.0, curve.fpr]
    tpr = np.r_[0.0, curve.tpr]
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2))


def pr_curve(pool: ScoredVoxelSet) -> tuple[Curve, float]:
    curve = sweep(pool)
    return curve, average_precision(curve)


def roc_auc(pool: ScoredVoxelSet) -> tuple[Curve, float]:
    curve = sweep(pool)
    return curve, rank_auroc(curve)


# --------------------------------------------------------------------------
# Dice ceiling


class ScoredScan(NamedTuple):
    """One scan's anomaly scores and ground truth, kept in 3D for filtering."""

    scores: np.ndarray
    gt: np.ndarray
    scope: np.ndarray | None = None


def grid_thresholds(n_thresholds: int = DEFAULT_N_THRESHOLDS) -> np.ndarray:
    """Interior uniform grid i / (n + 1), i = 1..n."""
    if n_thresholds < 1:
        raise ValueError("n_thresholds must be >= 1")
    return np.arange(1, n_thresholds + 1) / (n_thresholds + 1)


class _ScanOrder(NamedTuple):
    order: np.ndarray  # in-scope flat indices, highest score first
    ascending: np.ndarray  # their scores, lowest first
    flat_gt: np.ndarray
    shape: tuple


def _scan_order(scan: ScoredScan) -> _ScanOrder:
    scores = np.asarray(scan.scores, dtype=np.float64)
    gt = np.asarray(scan.gt, dtype=bool)
    if scores.shape != gt.shape:
        raise DimMismatch(f"anomaly map {scores.shape} vs ground truth {gt.shape}")
    flat_scores = to_kernel_layout(scores, np.float64).ravel()
    flat_gt = to_kernel_layout(gt if scan.scope is None else gt & scan.scope).ravel()
    if scan.scope is None:
        cand = np.arange(flat_scores.size, dtype=np.int64)
    else:
        cand = np.flatnonzero(to_kernel_layout(scan.scope).ravel()).astype(np.int64)
    order = cand[np.argsort(-flat_scores[cand], kind="stable")]
    return _ScanOrder(order, flat_scores[order][::-1], flat_gt, scores.shape[::-1])


def scan_counts(scan: ScoredScan, thresholds, postfilter=None, _order: _ScanOrder | None = None):
    """(|pred|, TP) of ``score > t`` for each threshold, after optional filtering.

    ``postfilter`` is ``(connectivity, min_size)``; components are measured
    on the binarized map of this scan alone.
    """
    so = _scan_order(scan) if _order is None else _order
    thresholds = np.asarray(thresholds, dtype=np.float64)
    active = so.order.size - np.searchsorted(so.ascending, thresholds, side="right")
    if postfilter is None:
        cum_gt = np.r_[0, np.cumsum(so.flat_gt[so.order], dtype=np.int64)]
        return active.astype(np.int64), cum_gt[active]
    connectivity, min_size = postfilter
    check_connectivity(connectivity)
    records, inverse = np.unique(active, return_inverse=True)
    pred, tp = _kernels.sweep_components(
        so.order, so.shape, so.flat_gt, records.astype(np.int64), int(connectivity), int(min_size)
    )
    return np.asarray(pred)[inverse], np.asarray(tp)[inverse]


def scan_counts_both(scan: ScoredScan, thresholds, postfilter):
    """Filtered and unfiltered counts sharing one sort."""
    so = _scan_order(scan)
    return scan_counts(scan, thresholds, postfilter, so), scan_counts(scan, thresholds, None, so)


def scope_positives(scan: ScoredScan) -> int:
    gt = np.asarray(scan.gt, dtype=bool)
    return int(np.count_nonzero(gt if scan.scope is None else gt & scan.scope))


@dataclass(frozen=True, eq=False)
class DiceSearch:
    dsc_ceiling: float
    best_threshold: float
    thresholds: np.ndarray
    dice: np.ndarray
    exhaustive_ceiling: float | None = None
    exhaustive_threshold: float | None = None


def pick_best(thresholds, dices) -> tuple[float, float]:
    """Max Dice and the lowest threshold achieving it."""
    order = np.argsort(thresholds, kind="stable")
    d = np.asarray(dices)[order]
    k = int(np.argmax(d))
    return float(d[k]), float(np.asarray(thresholds)[order][k])


def candidate_thresholds(scans: Sequence[ScoredScan]) -> np.ndarray:
    """-inf plus every distinct in-scope score: one threshold per reachable binarization."""
    values = [
        np.unique(s.scores if s.scope is None else np.asarray(s.scores)[s.scope]) for s in scans
    ]
    return np.r_[-np.inf, np.unique(np.concatenate(values))]


def best_dice(
    scans: Sequence[ScoredScan],
    n_thresholds: int = DEFAULT_N_THRESHOLDS,
    postfilter=None,
    exhaustive: bool = False,
) -> DiceSearch:
    """Dataset-wise Dice at each grid threshold; returns the maximum.

    With ``exhaustive=True`` the same search is also run over every distinct
    score, giving the ceiling the grid can at best approach.
    """
    grid = grid_thresholds(n_thresholds)
    positives = sum(scope_positives(s) for s in scans)
    if positives == 0:
        raise NoPositives("ground truth has no positive voxels")
    pred = np.zeros(grid.size, np.int64)
    tp = np.zeros(grid.size, np.int64)
    cand = candidate_thresholds(scans) if exhaustive else None
    if exhaustive:
        cpred = np.zeros(cand.size, np.int64)
        ctp = np.zeros(cand.size, np.int64)
    for scan in scans:
        if exhaustive:
            both = np.r_[grid, cand]
            p, t = scan_counts(scan, both, postfilter)
            pred += p[: grid.size]
            tp += t[: grid.size]
            cpred += p[grid.size :]
            ctp += t[grid.size :]
        else:
            p, t = scan_counts(scan, grid, postfilter)
            pred += p
            tp += t
    dices = dice_from_counts(tp, pred, positives)
    ceiling, threshold = pick_best(grid, dices)
    if not exhaustive:
        return DiceSearch(ceiling, threshold, grid, dices)
    ex_ceiling, ex_threshold = pick_best(cand, dice_from_counts(ctp, cpred, positives))
    return DiceSearch(ceiling, threshold, grid, dices, ex_ceiling, ex_threshold)
