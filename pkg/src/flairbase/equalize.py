"""Masked histogram equalization used directly as the anomaly map.

Lesions are hyperintense on FLAIR, so after equalizing the brain's intensity
histogram a voxel's score is simply its (interpolated) cumulative rank among
brain voxels. Scores are 0 outside the mask and in (0, 1] inside, with the
brightest voxel at exactly 1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyMask
from .volume import Volume, brain_mask

DEFAULT_BINS = 256
# values landing within this many bin-widths of an upper edge count as on it;
# keeps bin membership stable under affine rescaling of the input
_EDGE_SNAP = 1e-9


@dataclass(frozen=True)
class EqualizeConfig:
    bins: int = DEFAULT_BINS
    scope: str = "volume"

    def __post_init__(self):
        if int(self.bins) != self.bins or self.bins < 2:
            raise ValueError(f"bins must be an integer >= 2, got {self.bins}")
        if self.scope not in ("volume", "slice"):
            raise ValueError(f"scope must be 'volume' or 'slice', got {self.scope!r}")


@dataclass(frozen=True, eq=False)
class AnomalyMap:
    scores: np.ndarray
    mask: np.ndarray

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.scores.shape


def equalize_values(values: np.ndarray, bins: int = DEFAULT_BINS) -> np.ndarray:
    """Equalized score of each value in a 1D sample.

    A ``bins``-bin histogram spans [min, max]; the normalized cumulative
    counts are placed at bin centers and linearly interpolated (clamped at
    both ends). A constant sample maps to all ones.
    """
    values = np.asarray(values, dtype=np.float64)
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.ones_like(values)
    pos = (values - lo) / (hi - lo)
    idx = np.floor(pos * bins + _EDGE_SNAP).astype(np.intp)
    np.clip(idx, 0, bins - 1, out=idx)
    cdf = np.cumsum(np.bincount(idx, minlength=bins)) / values.size
    centers = (np.arange(bins) + 0.5) / bins
    return np.interp(pos, centers, cdf)


def equalize_hist(
    volume: Volume, mask: np.ndarray, cfg: EqualizeConfig = EqualizeConfig()
) -> AnomalyMap:
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != volume.dims:
        raise ValueError(f"mask shape {mask.shape} != volume dims {volume.dims}")
    if not mask.any():
        raise EmptyMask("brain mask has no voxels")
    scores = np.zeros(volume.dims, dtype=np.float64)
    if cfg.scope == "volume":
        scores[mask] = equalize_values(volume.data[mask], cfg.bins)
    else:
        for z in range(volume.dims[2]):
            m = mask[:, :, z]
            if m.any():
                scores[:, :, z][m] = equalize_values(volume.data[:, :, z][m], cfg.bins)
    return AnomalyMap(scores, mask)


def equalize_volume(volume: Volume, cfg: EqualizeConfig = EqualizeConfig()) -> AnomalyMap:
    return equalize_hist(volume, brain_mask(volume), cfg)
