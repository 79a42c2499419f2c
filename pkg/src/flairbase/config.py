"""Experiment configuration and dataset manifests."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .components import DEFAULT_CONNECTIVITY, DEFAULT_MIN_SIZE, check_connectivity
from .equalize import DEFAULT_BINS
from .metrics import DEFAULT_N_THRESHOLDS, SCOPES

DEFAULT_GT_THRESHOLD = 0.9
# alternative a radiologist judged acceptable; not the default
RADIOLOGIST_GT_THRESHOLD = 0.4

PRESETS = {
    "experiment-1": {"slice_window": (15, 125), "resolution": (128, 128)},
    "experiment-2": {"slice_window": (84, 87), "resolution": (224, 224)},
    "native": {"slice_window": None, "resolution": None},
}


@dataclass(frozen=True)
class ExperimentConfig:
    slice_window: tuple[int, int] | None = None
    resolution: tuple[int, int] | None = None
    gt_threshold: float = DEFAULT_GT_THRESHOLD
    bins: int = DEFAULT_BINS
    min_component_size: int = DEFAULT_MIN_SIZE
    connectivity: int = DEFAULT_CONNECTIVITY
    n_thresholds: int = DEFAULT_N_THRESHOLDS
    scope: str = "all_voxels"
    equalize_scope: str = "volume"
    preset: str | None = None
    curve_points: int = 1000
    exhaustive_ceiling: bool = False

    def __post_init__(self):
        if self.slice_window is not None:
            lo, hi = self.slice_window
            if not 0 <= lo <= hi:
                raise ValueError(f"bad slice window {self.slice_window}")
            object.__setattr__(self, "slice_window", (int(lo), int(hi)))
        if self.resolution is not None:
            w, h = self.resolution
            if w < 1 or h < 1:
                raise ValueError(f"bad resolution {self.resolution}")
            object.__setattr__(self, "resolution", (int(w), int(h)))
        if self.bins < 2:
            raise ValueError("bins must be >= 2")
        if self.min_component_size < 0:
            raise ValueError("min_component_size must be >= 0")
        check_connectivity(self.connectivity)
        if self.n_thresholds < 1:
            raise ValueError("n_thresholds must be >= 1")
        if self.scope not in SCOPES:
            raise ValueError(f"scope must be one of {SCOPES}")
        if self.equalize_scope not in ("volume", "slice"):
            raise ValueError("equalize_scope must be 'volume' or 'slice'")

    @classmethod
    def from_preset(cls, name: str, **overrides) -> "ExperimentConfig":
        if name not in PRESETS:
            raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        return cls(preset=name, **{**PRESETS[name], **overrides})

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("slice_window", "resolution"):
            if d[key] is not None:
                d[key] = list(d[key])
        return d


@dataclass(frozen=True)
class ScanEntry:
    id: str
    flair_path: Path
    gt_path: Path | None = None


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    scans: tuple[ScanEntry, ...]
    notes: str = ""
    path: Path | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.scans:
            raise ValueError(f"manifest {self.name!r} lists no scans")
        ids = [s.id for s in self.scans]
        if len(set(ids)) != len(ids):
            raise ValueError(f"manifest {self.name!r} has duplicate scan ids")
        paths = [s.flair_path for s in self.scans] + [s.gt_path for s in self.scans if s.gt_path]
        if len(set(paths)) != len(paths):
            raise ValueError(f"manifest {self.name!r} reuses a file path")


def load_manifest(path) -> DatasetManifest:
    """Read a JSON manifest; relative paths resolve against its directory.

    Format::

        {"name": "BraTS", "notes": "...",
         "scans": [{"id": "s1", "flair": "s1_flair.nii.gz", "gt": "s1_seg.nii.gz"}]}
    """
    path = Path(path)
    raw = json.loads(path.read_text())
    base = path.parent
    scans = []
    for i, entry in enumerate(raw.get("scans", [])):
        try:
            flair = entry["flair"]
        except KeyError:
            raise ValueError(f"{path}: scan #{i} has no 'flair' path") from None
        gt = entry.get("gt")
        scans.append(
            ScanEntry(
                id=str(entry.get("id", f"scan{i:03d}")),
                flair_path=(base / flair).resolve(),
                gt_path=(base / gt).resolve() if gt else None,
            )
        )
    return DatasetManifest(str(raw.get("name", path.stem)), tuple(scans), str(raw.get("notes", "")), path)
