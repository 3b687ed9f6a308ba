"""Image and dataset I/O.

Conventions used throughout the package:

* RGB images are ``(H, W, 3)`` uint8 arrays with channels in r, g, b order.
* Grayscale working images are ``(H, W)`` float64 arrays normalized to [0, 1].
* Masks are ``(H, W)`` bool arrays.

Dataset layouts follow the published DRIVE / STARE / CHASE_DB1 distributions;
custom datasets are described by a plain-text manifest with one tab-separated
``image<TAB>ground_truth[<TAB>fov_mask]`` line per entry.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import FormatError, FovEstimationError, ManifestError

SUPPORTED_FORMATS = {"PNG", "PPM", "JPEG", "GIF", "TIFF"}

_IMAGE_SUFFIXES = {".png", ".ppm", ".jpg", ".jpeg", ".gif", ".tif", ".tiff"}


def load_image(path):
    """Decode an image file into an (H, W, 3) uint8 RGB array.

    Raises OSError for unreadable files and FormatError for formats outside
    the supported set (PNG, PPM, JPEG, GIF, TIFF).
    """
    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.format not in SUPPORTED_FORMATS:
                raise FormatError(f"unsupported image format {im.format!r}: {path}")
            rgb = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise FormatError(f"cannot decode {path}: {exc}") from exc
    if rgb.ndim != 3 or rgb.shape[0] < 1 or rgb.shape[1] < 1:
        raise FormatError(f"empty or malformed image: {path}")
    return rgb


def load_mask(path):
    """Load a binary mask image; any pixel above half intensity is True."""
    path = Path(path)
    try:
        with Image.open(path) as im:
            gray = np.asarray(im.convert("L"))
    except UnidentifiedImageError as exc:
        raise FormatError(f"cannot decode mask {path}: {exc}") from exc
    return gray > 127


def save_mask(path, mask):
    """Write a bool mask as an 8-bit PNG (False=0, True=255)."""
    arr = np.where(np.asarray(mask, bool), 255, 0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(Path(path), format="PNG")


def save_gray_png(path, arr):
    """Write a uint8 or [0,1]-float grayscale array as PNG."""
    arr = np.asarray(arr)
    if arr.dtype != np.uint8:
        arr = np.clip(np.round(arr * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(Path(path), format="PNG")


def save_rgb_png(path, arr):
    Image.fromarray(np.asarray(arr, dtype=np.uint8), mode="RGB").save(
        Path(path), format="PNG"
    )


def green_channel(img):
    """Extract the green channel as a [0, 1] float image (g / 255)."""
    img = np.asarray(img)
    return img[:, :, 1].astype(float) / 255.0


def fov_mask(img, provided=None, threshold=0.08, min_cover=0.10):
    """Return the field-of-view mask for a fundus image.

    A dataset-provided mask is returned unchanged.  Otherwise the FOV is
    estimated by thresholding mean luminance at ``threshold`` times its
    maximum and keeping the largest 8-connected component.  An estimate
    covering less than ``min_cover`` of the frame raises FovEstimationError.
    """
    if provided is not None:
        return np.asarray(provided, bool)
    from .regions import connected_components

    img = np.asarray(img)
    lum = img.mean(axis=2) / 255.0
    rough = lum > threshold * lum.max()
    labels, count = connected_components(rough)
    if count == 0:
        raise FovEstimationError("luminance threshold left no candidate FOV pixels")
    areas = np.bincount(labels.ravel())[1:]
    mask = labels == (int(np.argmax(areas)) + 1)
    if mask.sum() < min_cover * mask.size:
        raise FovEstimationError(
            f"estimated FOV covers {mask.mean():.1%} of the frame (< {min_cover:.0%})"
        )
    return mask


def _neighbor_mean(values, region):
    """Mean of 8-neighbor ``values`` restricted to ``region`` pixels."""
    h, w = values.shape
    num = np.zeros_like(values)
    den = np.zeros(values.shape)
    v = np.pad(values, 1)
    r = np.pad(region, 1)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            vv = v[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
            rr = r[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
            num += vv * rr
            den += rr
    return num / np.where(den > 0, den, 1.0), den > 0


def extend_outside_fov(gray, fov, rounds=5):
    """Grow image content a few pixels past the FOV rim by boundary replication.

    Each round assigns to pixels just outside the current region the mean of
    their already-filled 8-neighbors.  This keeps the enhancement filters from
    seeing the hard dark edge at the FOV boundary and ringing a spurious rim.
    """
    fov = np.asarray(fov, bool)
    if fov.all() or rounds <= 0:
        return np.asarray(gray, float)
    filled = np.asarray(gray, float).copy()
    region = fov.copy()
    for _ in range(rounds):
        means, touchable = _neighbor_mean(filled, region)
        ring = touchable & ~region
        if not ring.any():
            break
        filled[ring] = means[ring]
        region |= ring
    return filled


@dataclass(frozen=True)
class DatasetEntry:
    image: Path
    ground_truth: Path
    fov: Optional[Path] = None


@dataclass
class DatasetManifest:
    name: str
    entries: list

    def __len__(self):
        return len(self.entries)


def _list_images(directory):
    directory = Path(directory)
    if not directory.is_dir():
        raise ManifestError(f"dataset directory not found: {directory}")
    files = [
        p for p in sorted(directory.iterdir(), key=lambda p: p.name)
        if p.suffix.lower() in _IMAGE_SUFFIXES
    ]
    if not files:
        raise ManifestError(f"no images found under {directory}")
    return files


def _load_drive(root):
    root = Path(root)
    base = root / "test" if (root / "test").is_dir() else root
    entries = []
    for img in _list_images(base / "images"):
        prefix = img.stem.split("_")[0]
        gt = base / "1st_manual" / f"{prefix}_manual1.gif"
        if not gt.exists():
            raise ManifestError(f"missing ground truth {gt.name} for image {img.name}")
        mask = None
        for cand in (f"{prefix}_test_mask.gif", f"{prefix}_training_mask.gif"):
            if (base / "mask" / cand).exists():
                mask = base / "mask" / cand
                break
        entries.append(DatasetEntry(img, gt, mask))
    return DatasetManifest("DRIVE", entries)


def _load_stare(root):
    root = Path(root)
    entries = []
    for img in _list_images(root / "images"):
        stem = img.stem
        gt = None
        for cand in (f"{stem}.ah.ppm", f"{stem}.ah.png", f"{stem}.ah.tif"):
            if (root / "labels-ah" / cand).exists():
                gt = root / "labels-ah" / cand
                break
        if gt is None:
            raise ManifestError(f"missing labels-ah annotation for image {img.name}")
        entries.append(DatasetEntry(img, gt))
    return DatasetManifest("STARE", entries)


def _load_chase(root):
    root = Path(root)
    imgdir = root / "images" if (root / "images").is_dir() else root
    images = [p for p in _list_images(imgdir) if "stHO" not in p.stem and "ndHO" not in p.stem]
    entries = []
    for img in images:
        gt = None
        for d in (root / "1stHO", imgdir, root):
            cand = d / f"{img.stem}_1stHO.png"
            if cand.exists():
                gt = cand
                break
        if gt is None:
            raise ManifestError(f"missing 1stHO ground truth for image {img.name}")
        entries.append(DatasetEntry(img, gt))
    return DatasetManifest("CHASE_DB1", entries)


def _load_custom(manifest_path):
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise ManifestError(f"custom manifest file not found: {manifest_path}")
    entries = []
    for lineno, raw in enumerate(manifest_path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) not in (2, 3):
            raise ManifestError(
                f"{manifest_path}:{lineno}: expected 2 or 3 tab-separated paths"
            )
        base = manifest_path.parent
        paths = [(base / p).resolve() if not Path(p).is_absolute() else Path(p) for p in parts]
        img, gt = paths[0], paths[1]
        fov = paths[2] if len(parts) == 3 else None
        for p in (img, gt) + ((fov,) if fov else ()):
            if not p.exists():
                raise ManifestError(f"{manifest_path}:{lineno}: missing file {p}")
        entries.append(DatasetEntry(img, gt, fov))
    if not entries:
        raise ManifestError(f"custom manifest is empty: {manifest_path}")
    return DatasetManifest("custom", entries)


_LOADERS = {
    "DRIVE": _load_drive,
    "STARE": _load_stare,
    "CHASE_DB1": _load_chase,
    "custom": _load_custom,
}


def load_dataset(root, name):
    """Build a DatasetManifest for one of DRIVE / STARE / CHASE_DB1 / custom.

    Entries pair each image with its first-observer ground truth (and, for
    DRIVE, the distributed FOV mask), ordered lexicographically by filename.
    """
    key = str(name).upper() if str(name).lower() != "custom" else "custom"
    if key not in _LOADERS:
        raise ManifestError(f"unknown dataset name {name!r}")
    return _LOADERS[key](root)
