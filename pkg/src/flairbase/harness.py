"""End-to-end runs over a dataset manifest: evaluate, predict, stats."""
from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import _kernels
from .components import component_stats, filter_small
from .config import DatasetManifest, ExperimentConfig
from .equalize import AnomalyMap, EqualizeConfig, equalize_volume
from .errors import DataError, DimMismatch, NoPositives, ScanError
from .metrics import (
    Curve,
    ScoredScan,
    ScoredVoxelSet,
    best_dice,
    dice_from_counts,
    grid_thresholds,
    pick_best,
    pool_scan,
    rank_auroc,
    average_precision,
    scan_counts_both,
    scope_positives,
    sweep,
)
from .nifti import read_volume, write_volume
from .volume import (
    Volume,
    binarize_gt,
    resize_mask,
    resize_slices,
    select_mask_slices,
    select_slices,
)

log = logging.getLogger(__name__)

PIPELINE_ORDER = {
    "flair": ["read", "select_slices", "resize_slices(bilinear)", "brain_mask", "equalize"],
    "gt": ["read", "binarize_gt", "select_slices", "resize(nearest)"],
    "postfilter": "per scan on each binarized prediction inside the Dice sweep; "
    "AUPRC/AUROC use the unfiltered map",
    "thresholds": "t_i = i/(n+1), prediction is score > t",
}


def prepare_flair(flair: Volume, cfg: ExperimentConfig) -> Volume:
    if cfg.slice_window is not None:
        flair = select_slices(flair, cfg.slice_window)
    if cfg.resolution is not None:
        flair = resize_slices(flair, cfg.resolution, "bilinear")
    return flair


def prepare_gt(gt: Volume, cfg: ExperimentConfig) -> np.ndarray:
    mask = binarize_gt(gt, cfg.gt_threshold)
    if cfg.slice_window is not None:
        mask = select_mask_slices(mask, cfg.slice_window)
    if cfg.resolution is not None:
        mask = resize_mask(mask, cfg.resolution)
    return mask


def anomaly_map(flair: Volume, cfg: ExperimentConfig) -> AnomalyMap:
    return equalize_volume(prepare_flair(flair, cfg), EqualizeConfig(cfg.bins, cfg.equalize_scope))


@dataclass
class ScanResult:
    id: str
    positives: int
    pred_filtered: np.ndarray
    tp_filtered: np.ndarray
    pred_raw: np.ndarray
    tp_raw: np.ndarray
    pool: ScoredVoxelSet
    scan: ScoredScan | None = None


def process_scan(entry, cfg: ExperimentConfig, keep_scan: bool = False) -> ScanResult:
    if entry.gt_path is None:
        raise DataError(f"scan {entry.id!r} has no ground truth path")
    flair = read_volume(entry.flair_path)
    gt = read_volume(entry.gt_path)
    if flair.dims != gt.dims:
        raise DimMismatch(f"FLAIR dims {flair.dims} != ground truth dims {gt.dims}")
    amap = anomaly_map(flair, cfg)
    gt_mask = prepare_gt(gt, cfg)
    scope = amap.mask if cfg.scope == "brain_only" else None
    scan = ScoredScan(amap.scores, gt_mask, scope)
    grid = grid_thresholds(cfg.n_thresholds)
    (pf, tf), (pr, tr) = scan_counts_both(scan, grid, (cfg.connectivity, cfg.min_component_size))
    return ScanResult(
        entry.id,
        scope_positives(scan),
        pf,
        tf,
        pr,
        tr,
        pool_scan(amap.scores, gt_mask, scope),
        scan if keep_scan else None,
    )


def _run_scans(manifest: DatasetManifest, cfg: ExperimentConfig, jobs: int, keep_scan: bool):
    def run(entry):
        try:
            return process_scan(entry, cfg, keep_scan)
        except (DataError, OSError, ValueError) as exc:
            raise ScanError(entry.id, exc) from exc

    if jobs <= 1:
        return [run(e) for e in manifest.scans]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run, manifest.scans))


@dataclass
class EvalReport:
    dataset: str
    dsc_ceiling: float
    best_threshold: float
    auprc: float
    auroc: float
    curve: Curve
    config: dict
    scan_ids: list[str]
    dsc_ceiling_unfiltered: float
    best_threshold_unfiltered: float
    thresholds: np.ndarray
    dice_filtered: np.ndarray
    dice_unfiltered: np.ndarray
    dsc_ceiling_exhaustive: float | None = None
    exhaustive_threshold: float | None = None
    generated_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def to_dict(self) -> dict:
        curve = self.curve.decimate(self.config.get("curve_points", 0))
        return {
            "dataset": self.dataset,
            "dsc_ceiling": self.dsc_ceiling,
            "best_threshold": self.best_threshold,
            "auprc": self.auprc,
            "auroc": self.auroc,
            "dsc_ceiling_unfiltered": self.dsc_ceiling_unfiltered,
            "best_threshold_unfiltered": self.best_threshold_unfiltered,
            "dsc_ceiling_exhaustive": self.dsc_ceiling_exhaustive,
            "exhaustive_threshold": self.exhaustive_threshold,
            "positives": self.curve.positives,
            "negatives": self.curve.negatives,
            "n_scans": len(self.scan_ids),
            "scans": self.scan_ids,
            "config": self.config,
            "pipeline": PIPELINE_ORDER,
            "dice_curve": {
                "threshold": self.thresholds.tolist(),
                "filtered": self.dice_filtered.tolist(),
                "unfiltered": self.dice_unfiltered.tolist(),
            },
            "curve": [p._asdict() for p in curve.points()],
            "curve_points_total": len(self.curve),
            "generated_at": self.generated_at,
        }


def evaluate(manifest: DatasetManifest, cfg: ExperimentConfig, jobs: int = 1) -> EvalReport:
    """Run the full pipeline on every scan and compute dataset-wise metrics."""
    results = _run_scans(manifest, cfg, jobs, keep_scan=cfg.exhaustive_ceiling)
    positives = sum(r.positives for r in results)
    if positives == 0:
        raise NoPositives(f"dataset {manifest.name!r}: ground truth has no positive voxels")
    grid = grid_thresholds(cfg.n_thresholds)
    pred_f = sum(r.pred_filtered for r in results)
    tp_f = sum(r.tp_filtered for r in results)
    pred_r = sum(r.pred_raw for r in results)
    tp_r = sum(r.tp_raw for r in results)
    dice_f = dice_from_counts(tp_f, pred_f, positives)
    dice_r = dice_from_counts(tp_r, pred_r, positives)
    ceiling, best_t = pick_best(grid, dice_f)
    ceiling_r, best_tr = pick_best(grid, dice_r)

    pool = ScoredVoxelSet()
    for r in results:
        pool = pool + r.pool
    curve = sweep(pool)

    ex_ceiling = ex_t = None
    if cfg.exhaustive_ceiling:
        search = best_dice(
            [r.scan for r in results],
            cfg.n_thresholds,
            (cfg.connectivity, cfg.min_component_size),
            exhaustive=True,
        )
        ex_ceiling, ex_t = search.exhaustive_ceiling, search.exhaustive_threshold

    return EvalReport(
        dataset=manifest.name,
        dsc_ceiling=ceiling,
        best_threshold=best_t,
        auprc=average_precision(curve),
        auroc=rank_auroc(curve),
        curve=curve,
        config=cfg.to_dict(),
        scan_ids=[r.id for r in results],
        dsc_ceiling_unfiltered=ceiling_r,
        best_threshold_unfiltered=best_tr,
        thresholds=grid,
        dice_filtered=dice_f,
        dice_unfiltered=dice_r,
        dsc_ceiling_exhaustive=ex_ceiling,
        exhaustive_threshold=ex_t,
    )


CURVE_HEADER = ["threshold", "precision", "recall", "fpr", "tpr"]


def write_curve_csv(curve: Curve, path) -> None:
    table = np.column_stack([curve.threshold, curve.precision, curve.recall, curve.fpr, curve.tpr])
    np.savetxt(path, table, fmt="%.17g", delimiter=",", header=",".join(CURVE_HEADER), comments="")


def write_report(report: EvalReport, path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2) + "\n")


def predict(
    input_path,
    output_path,
    cfg: ExperimentConfig = ExperimentConfig(),
    threshold: float | None = None,
    mask_path=None,
) -> tuple[AnomalyMap, np.ndarray | None]:
    """Write the anomaly map (float32) and, given a threshold, the filtered binary mask (uint8)."""
    flair = read_volume(input_path)
    prepared = prepare_flair(flair, cfg)
    amap = equalize_volume(prepared, EqualizeConfig(cfg.bins, cfg.equalize_scope))
    write_volume(prepared.with_data(amap.scores), output_path, "float32")
    mask = None
    if threshold is not None:
        mask = filter_small(amap.scores > threshold, cfg.connectivity, cfg.min_component_size)
        if mask_path is None:
            mask_path = default_mask_path(output_path)
        write_volume(prepared.with_data(mask.astype(np.float64)), mask_path, "uint8")
    return amap, mask


def default_mask_path(output_path) -> Path:
    p = Path(output_path)
    for ext in (".nii.gz", ".nii"):
        if p.name.endswith(ext):
            return p.with_name(p.name[: -len(ext)] + "_mask" + ext)
    return p.with_name(p.name + "_mask.nii")


STATS_HEADER = [
    "dataset",
    "connectivity",
    "n_scans",
    "n_components",
    "avg_components_per_scan",
    "avg_component_size",
]


def dataset_stats(manifest: DatasetManifest, cfg: ExperimentConfig, connectivities=(6, 18, 26)) -> list[dict]:
    masks = []
    for entry in manifest.scans:
        try:
            if entry.gt_path is None:
                raise DataError("no ground truth path")
            masks.append(prepare_gt(read_volume(entry.gt_path), cfg))
        except (DataError, OSError, ValueError) as exc:
            raise ScanError(entry.id, exc) from exc
    rows = []
    for conn in connectivities:
        st = component_stats(masks, conn)
        rows.append(
            {
                "dataset": manifest.name,
                "connectivity": conn,
                "n_scans": st.n_scans,
                "n_components": st.n_components,
                "avg_components_per_scan": st.avg_components_per_scan,
                "avg_component_size": st.avg_component_size,
            }
        )
    return rows


def write_stats_csv(rows: list[dict], fh) -> None:
    writer = csv.DictWriter(fh, fieldnames=STATS_HEADER, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)


def backend() -> str:
    return _kernels.BACKEND
