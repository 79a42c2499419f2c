"""3D connected components, small-component removal and per-dataset statistics."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels
from ._kernels._offsets import CONNECTIVITIES

log = logging.getLogger(__name__)

DEFAULT_CONNECTIVITY = 26
DEFAULT_MIN_SIZE = 20


def check_connectivity(connectivity: int) -> int:
    if connectivity not in CONNECTIVITIES:
        raise ValueError(f"connectivity must be one of {CONNECTIVITIES}, got {connectivity}")
    return int(connectivity)


def to_kernel_layout(arr: np.ndarray, dtype=np.uint8) -> np.ndarray:
    """[x, y, z] array -> C-contiguous [z, y, x] so flat order is x fastest."""
    return np.ascontiguousarray(np.asarray(arr).T, dtype=dtype)


@dataclass(frozen=True, eq=False)
class LabelMap:
    labels: np.ndarray  # int32, 0 = background
    sizes: np.ndarray  # sizes[k - 1] is the voxel count of label k
    connectivity: int

    @property
    def n_components(self) -> int:
        return int(self.sizes.size)


def label_components(mask: np.ndarray, connectivity: int = DEFAULT_CONNECTIVITY) -> LabelMap:
    """Label connected foreground voxels.

    Components are numbered 1..K in order of their first voxel in NIfTI
    linear order (x fastest, then y, then z).
    """
    check_connectivity(connectivity)
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 3:
        raise ValueError(f"mask must be 3D, got shape {mask.shape}")
    labels, sizes = _kernels.label_components(to_kernel_layout(mask), connectivity)
    return LabelMap(np.asarray(labels).T, np.asarray(sizes, dtype=np.int64), connectivity)


def filter_small(
    mask: np.ndarray,
    connectivity: int = DEFAULT_CONNECTIVITY,
    min_size: int = DEFAULT_MIN_SIZE,
) -> np.ndarray:
    """Drop components with fewer than ``min_size`` voxels (size == min_size is kept)."""
    if min_size < 0:
        raise ValueError("min_size must be >= 0")
    mask = np.asarray(mask, dtype=bool)
    if min_size <= 1:
        return mask.copy()
    lm = label_components(mask, connectivity)
    keep = np.concatenate([[False], lm.sizes >= min_size])
    return keep[lm.labels]


@dataclass(frozen=True)
class ComponentStats:
    n_scans: int
    n_components: int
    n_voxels: int

    @property
    def avg_components_per_scan(self) -> float:
        return self.n_components / self.n_scans

    @property
    def avg_component_size(self) -> float:
        return self.n_voxels / self.n_components if self.n_components else 0.0


def component_stats(
    masks: Iterable[np.ndarray], connectivity: int = DEFAULT_CONNECTIVITY
) -> ComponentStats:
    n_scans = n_comp = n_vox = 0
    for mask in masks:
        lm = label_components(mask, connectivity)
        n_scans += 1
        n_comp += lm.n_components
        n_vox += int(lm.sizes.sum())
    if n_scans == 0:
        raise ValueError("component_stats needs at least one mask")
    if n_comp == 0:
        log.warning("no components found in %d scan(s); average size reported as 0", n_scans)
    return ComponentStats(n_scans, n_comp, n_vox)
