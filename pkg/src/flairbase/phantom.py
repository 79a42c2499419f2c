"""Synthetic FLAIR-like phantoms with known lesion ground truth.

A phantom is an ellipsoidal "brain" of baseline intensity with bounded
multiplicative white noise on a zero background, plus non-touching spherical
lesions at ``baseline * contrast``. With ``contrast * (1 - noise) > 1 + noise``
every lesion voxel is brighter than every normal voxel.

The noise is a Gaussian truncated at 3 sigma = ``noise``. Thin tails keep the
brightest normal histogram bin nearly empty; with flat noise that bin is full
and all of its upper half ties at one equalized score, which costs Dice at
every grid threshold.

Lesion radii are drawn once per phantom set (from the seed alone), so every
scan of a set has the same brain and lesion voxel counts. Equalization is
per volume, and equal counts put the top normal score of every scan at the
same value; pooled over the set, lesions still rank strictly first.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .nifti import write_volume
from .volume import Volume


@dataclass(frozen=True)
class PhantomSpec:
    seed: int = 0
    dims: tuple[int, int, int] = (128, 128, 140)
    n_lesions: int = 4
    lesion_radius_range: tuple[int, int] = (5, 8)
    lesion_contrast: float = 3.0
    registration_blur: float = 0.0
    baseline: float = 100.0
    noise: float = 0.1
    brain_fraction: float = 0.4  # ellipsoid semi-axis as a fraction of each extent
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def validate(self) -> None:
        if len(self.dims) != 3 or min(self.dims) < 3:
            raise ValueError(f"dims must be three extents >= 3, got {self.dims}")
        if self.n_lesions < 0:
            raise ValueError("n_lesions must be >= 0")
        lo, hi = self.lesion_radius_range
        if not 1 <= lo <= hi:
            raise ValueError(f"bad lesion radius range {self.lesion_radius_range}")
        if self.lesion_contrast <= 0:
            raise ValueError("lesion_contrast must be positive")
        if not 0 <= self.noise < 1:
            raise ValueError("noise must lie in [0, 1)")
        if self.registration_blur < 0:
            raise ValueError("registration_blur must be >= 0")
        if not 0 < self.brain_fraction <= 0.5:
            raise ValueError("brain_fraction must lie in (0, 0.5]")

    @property
    def separable(self) -> bool:
        return self.lesion_contrast * (1 - self.noise) > 1 + self.noise


@dataclass(frozen=True, eq=False)
class Phantom:
    flair: Volume
    gt: Volume
    brain: np.ndarray
    lesions: np.ndarray
    truth: dict


def _ellipsoid(dims, fraction) -> np.ndarray:
    grids = np.ogrid[tuple(slice(0, n) for n in dims)]
    acc = 0
    for g, n in zip(grids, dims):
        c = (n - 1) / 2
        acc = acc + ((g - c) / (fraction * n)) ** 2
    return acc <= 1.0


def _ball(radius: int) -> np.ndarray:
    r = np.arange(-radius, radius + 1)
    dx, dy, dz = np.meshgrid(r, r, r, indexing="ij")
    return dx**2 + dy**2 + dz**2 <= radius**2


def _truncated_normal(rng, shape, bound: float = 3.0) -> np.ndarray:
    z = rng.standard_normal(shape)
    bad = np.abs(z) > bound
    while bad.any():
        z[bad] = rng.standard_normal(int(bad.sum()))
        bad = np.abs(z) > bound
    return z


def lesion_radii(spec: PhantomSpec) -> list[int]:
    """Radii shared by every scan generated from ``spec``, largest first."""
    lo, hi = spec.lesion_radius_range
    radii = np.random.default_rng(spec.seed).integers(lo, hi + 1, spec.n_lesions)
    return sorted((int(r) for r in radii), reverse=True)


def generate_phantom(spec: PhantomSpec, index: int = 0, max_attempts: int = 2000) -> Phantom:
    spec.validate()
    rng = np.random.default_rng([spec.seed, index])
    dims = tuple(int(d) for d in spec.dims)
    brain = _ellipsoid(dims, spec.brain_fraction)
    lesions = np.zeros(dims, dtype=bool)
    placed = []
    radii = lesion_radii(spec)
    brain_idx = np.argwhere(brain)
    attempts = 0
    while len(placed) < spec.n_lesions:
        attempts += 1
        if attempts > max_attempts:
            raise ValueError(
                f"could not place {spec.n_lesions} lesions in {dims} after {max_attempts} attempts"
            )
        radius = radii[len(placed)]
        center = brain_idx[rng.integers(len(brain_idx))]
        if any(
            np.linalg.norm(center - c) < radius + r + 3 for c, r, _ in placed
        ):
            continue
        box = tuple(slice(c - radius, c + radius + 1) for c in center)
        if any(c - radius < 0 or c + radius >= n for c, n in zip(center, dims)):
            continue
        ball = _ball(radius)
        if not np.all(brain[box][ball]):
            continue
        lesions[box] |= ball
        placed.append((center, radius, int(ball.sum())))

    noise = _truncated_normal(rng, dims) * (spec.noise / 3.0)
    flair = np.zeros(dims)
    flair[brain] = spec.baseline * (1.0 + noise[brain])
    flair[lesions] *= spec.lesion_contrast

    gt = lesions.astype(np.float64)
    if spec.registration_blur > 0:
        gt = np.clip(ndimage.gaussian_filter(gt, spec.registration_blur), 0.0, 1.0)

    truth = {
        "seed": spec.seed,
        "index": index,
        "dims": list(dims),
        "spacing": list(spec.spacing),
        "brain_voxels": int(brain.sum()),
        "lesion_voxels": int(lesions.sum()),
        "lesions": [
            {"center": [int(v) for v in c], "radius": r, "voxels": n} for c, r, n in placed
        ],
        "lesion_contrast": spec.lesion_contrast,
        "registration_blur": spec.registration_blur,
        "separable": bool(spec.separable and spec.n_lesions > 0),
    }
    return Phantom(Volume(flair, spec.spacing), Volume(gt, spec.spacing), brain, lesions, truth)


def write_phantom_set(
    spec: PhantomSpec, out_dir, n_scans: int = 1, name: str = "phantom", gzip_output: bool = False
) -> Path:
    """Write ``n_scans`` phantoms, their truth sidecars and a manifest; return the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ext = ".nii.gz" if gzip_output else ".nii"
    scans = []
    for i in range(n_scans):
        ph = generate_phantom(spec, i)
        sid = f"{name}_{i:03d}"
        flair_name, gt_name = f"{sid}_flair{ext}", f"{sid}_gt{ext}"
        write_volume(ph.flair, out / flair_name, "float32", gzip_output)
        gt_type = "float32" if spec.registration_blur > 0 else "uint8"
        write_volume(ph.gt, out / gt_name, gt_type, gzip_output)
        truth = dict(ph.truth, id=sid, flair=flair_name, gt=gt_name)
        (out / f"{sid}_truth.json").write_text(json.dumps(truth, indent=2) + "\n")
        scans.append({"id": sid, "flair": flair_name, "gt": gt_name})
    spec_dict = asdict(spec)
    manifest = {
        "name": name,
        "scans": scans,
        "notes": "synthetic phantoms; spec: " + json.dumps(spec_dict, sort_keys=True),
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path
