"""Volume container and geometric / mask transforms.

Arrays are indexed ``[x, y, z]``; the flattened NIfTI order (x fastest) is
``arr.ravel(order="F")``. Binary masks are plain boolean arrays of the same
shape as the volume they came from.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, NamedTuple

import numpy as np

from .errors import GtOutOfRange, NonFiniteData, WindowOutOfBounds

if TYPE_CHECKING:
    from .nifti import NiftiHeader

GT_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class Volume:
    """3D scalar grid with voxel spacing in mm."""

    data: np.ndarray
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    header: "NiftiHeader | None" = None

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 3:
            raise ValueError(f"volume data must be 3D, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise NonFiniteData("volume contains NaN or Inf")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "spacing", tuple(float(s) for s in self.spacing))

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.data.shape

    def with_data(self, data: Any, spacing=None) -> "Volume":
        return Volume(data, self.spacing if spacing is None else spacing, self.header)


class SliceWindow(NamedTuple):
    lo: int
    hi: int


def brain_mask(volume: Volume) -> np.ndarray:
    """Voxels above zero; inputs are skull-stripped with an exact-zero background."""
    return volume.data > 0


def select_slices(volume: Volume, window: SliceWindow | tuple[int, int]) -> Volume:
    lo, hi = window
    nz = volume.dims[2]
    if not 0 <= lo <= hi < nz:
        raise WindowOutOfBounds(f"window [{lo}, {hi}] outside 0..{nz - 1}")
    return volume.with_data(volume.data[:, :, lo : hi + 1])


def select_mask_slices(mask: np.ndarray, window) -> np.ndarray:
    lo, hi = window
    if not 0 <= lo <= hi < mask.shape[2]:
        raise WindowOutOfBounds(f"window [{lo}, {hi}] outside 0..{mask.shape[2] - 1}")
    return mask[:, :, lo : hi + 1]


def source_coords(n_src: int, n_dst: int) -> np.ndarray:
    """Pixel-center aligned source coordinate of each target index, clamped."""
    xs = (np.arange(n_dst) + 0.5) * n_src / n_dst - 0.5
    return np.clip(xs, 0.0, n_src - 1)


def _bilinear_axis(arr: np.ndarray, axis: int, n_dst: int) -> np.ndarray:
    n_src = arr.shape[axis]
    xs = source_coords(n_src, n_dst)
    lo = np.floor(xs).astype(np.intp)
    hi = np.minimum(lo + 1, n_src - 1)
    frac = xs - lo
    shape = [1] * arr.ndim
    shape[axis] = n_dst
    frac = frac.reshape(shape)
    a = np.take(arr, lo, axis=axis)
    b = np.take(arr, hi, axis=axis)
    return a + (b - a) * frac


def nearest_indices(n_src: int, n_dst: int) -> np.ndarray:
    # ties at .5 go to the lower index
    xs = source_coords(n_src, n_dst)
    return np.clip(np.ceil(xs - 0.5), 0, n_src - 1).astype(np.intp)


def _nearest(arr: np.ndarray, target: tuple[int, int]) -> np.ndarray:
    ix = nearest_indices(arr.shape[0], target[0])
    iy = nearest_indices(arr.shape[1], target[1])
    return arr[ix][:, iy]


def resize_slices(volume: Volume, target: tuple[int, int], method: str = "bilinear") -> Volume:
    """Resample every z-slice to ``target = (W, H)``; z is left alone."""
    w, h = target
    if w < 1 or h < 1:
        raise ValueError(f"target size must be positive, got {target}")
    nx, ny, _ = volume.dims
    spacing = (volume.spacing[0] * nx / w, volume.spacing[1] * ny / h, volume.spacing[2])
    if (nx, ny) == (w, h):
        return volume.with_data(volume.data, spacing)
    if method == "bilinear":
        data = _bilinear_axis(_bilinear_axis(volume.data, 0, w), 1, h)
    elif method == "nearest":
        data = _nearest(volume.data, (w, h))
    else:
        raise ValueError(f"unknown resize method {method!r}")
    return volume.with_data(data, spacing)


def resize_mask(mask: np.ndarray, target: tuple[int, int]) -> np.ndarray:
    """Nearest-neighbour resize of a boolean mask, slice by slice."""
    if mask.shape[:2] == tuple(target):
        return mask
    return _nearest(mask, target)


def binarize_gt(gt: Volume | np.ndarray, threshold: float = 0.9) -> np.ndarray:
    """Strict ``value > threshold`` on a ground-truth map with values in [0, 1]."""
    data = gt.data if isinstance(gt, Volume) else np.asarray(gt, dtype=np.float64)
    if data.size and (data.min() < -GT_TOLERANCE or data.max() > 1 + GT_TOLERANCE):
        raise GtOutOfRange(
            f"ground truth values span [{data.min():g}, {data.max():g}], expected [0, 1]"
        )
    return data > threshold
