"""Connected components, per-region shape features, and Otsu thresholding.

Region shapes are summarized by Area, BoundingBox, Extent (area over bbox
area), VRatio (bbox elongation, always >= 1), and Solidity (area over convex
hull area).  Hull geometry treats every pixel as a unit square, so a filled
rectangle has solidity exactly 1 and thin regions never exceed it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .errors import ConfigError

_EIGHT = np.ones((3, 3), bool)


def connected_components(mask):
    """8-connected labeling of a bool mask.

    Returns ``(labels, count)`` where labels run 1..count in raster-scan
    first-touch order and 0 marks background.
    """
    mask = np.asarray(mask, bool)
    raw, count = ndimage.label(mask, structure=_EIGHT)
    if count == 0:
        return raw.astype(np.int32), 0
    values, first = np.unique(raw.ravel(), return_index=True)
    nz = values > 0
    values, first = values[nz], first[nz]
    remap = np.zeros(count + 1, dtype=np.int32)
    remap[values[np.argsort(first, kind="stable")]] = np.arange(1, count + 1)
    return remap[raw], count


@dataclass(frozen=True)
class RegionFeatures:
    area: int
    bbox: tuple  # (min_x, min_y, width, height)
    extent: float
    vratio: float
    solidity: float
    hull_area: float


def _convex_hull(points):
    """Monotone-chain convex hull of (x, y) points, counter-clockwise."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _polygon_area(vertices):
    if len(vertices) < 3:
        return 0.0
    x = np.array([v[0] for v in vertices], float)
    y = np.array([v[1] for v in vertices], float)
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _pixel_hull_area(rows, cols):
    """Convex hull area of the union of unit pixel squares.

    Only the per-row extreme pixels can contribute hull vertices, so the
    candidate set is the four square corners of each row's leftmost and
    rightmost pixel.
    """
    order = np.argsort(rows, kind="stable")
    rs, cs = rows[order], cols[order]
    starts = np.flatnonzero(np.r_[True, rs[1:] != rs[:-1]])
    row_vals = rs[starts]
    cmin = np.minimum.reduceat(cs, starts)
    cmax = np.maximum.reduceat(cs, starts)
    corners = []
    for y, lo, hi in zip(row_vals.tolist(), cmin.tolist(), cmax.tolist()):
        corners += [(lo, y), (hi + 1, y), (lo, y + 1), (hi + 1, y + 1)]
    return _polygon_area(_convex_hull(corners))


def _features_from_coords(rows, cols):
    area = int(rows.size)
    min_x, max_x = int(cols.min()), int(cols.max())
    min_y, max_y = int(rows.min()), int(rows.max())
    width = max_x - min_x + 1
    height = max_y - min_y + 1
    extent = area / (width * height)
    vratio = max(width, height) / min(width, height)
    hull_area = _pixel_hull_area(rows, cols)
    return RegionFeatures(
        area=area,
        bbox=(min_x, min_y, width, height),
        extent=extent,
        vratio=vratio,
        solidity=area / hull_area,
        hull_area=hull_area,
    )


def region_features(labels, label):
    """Shape features of one labeled component (raises for absent labels)."""
    rows, cols = np.nonzero(labels == label)
    if rows.size == 0:
        raise ValueError(f"label {label} not present in label map")
    return _features_from_coords(rows, cols)


def all_region_features(labels, count):
    """Features for labels 1..count, indexed [label-1]."""
    rows, cols = np.nonzero(labels)
    labs = labels[rows, cols]
    order = np.argsort(labs, kind="stable")
    rows, cols, labs = rows[order], cols[order], labs[order]
    starts = np.searchsorted(labs, np.arange(1, count + 2))
    return [
        _features_from_coords(rows[starts[i]:starts[i + 1]],
                              cols[starts[i]:starts[i + 1]])
        for i in range(count)
    ]


class OtsuResult(NamedTuple):
    threshold: float
    degenerate: bool


def otsu(img, bins=256):
    """Histogram threshold maximizing between-class variance on [0, 1].

    Ties break toward the lowest qualifying bin; the returned threshold is
    that bin's upper edge.  A constant image is flagged degenerate and its
    value returned unchanged.
    """
    vals = np.asarray(img, float).ravel()
    if vals.size == 0:
        raise ValueError("otsu needs a nonempty image")
    if vals.max() == vals.min():
        return OtsuResult(float(vals[0]), True)
    hist, _ = np.histogram(vals, bins=bins, range=(0.0, 1.0))
    total = hist.sum()
    if total == 0 or np.count_nonzero(hist) <= 1:
        return OtsuResult(float(vals.mean()), True)
    p = hist / total
    idx = np.arange(bins)
    w0 = np.cumsum(p)
    mu0 = np.cumsum(p * idx)
    mu_t = mu0[-1]
    w1 = 1.0 - w0
    ok = (w0 > 0) & (w1 > 0)
    between = np.full(bins, -np.inf)
    between[ok] = (mu_t * w0[ok] - mu0[ok]) ** 2 / (w0[ok] * w1[ok])
    k = int(np.argmax(between))  # argmax returns the first (lowest) maximizer
    return OtsuResult((k + 1) / bins, False)


def internal_factor(height, width, d=21):
    """Size-adaptive area thresholds: f_i = d * max(h,w)/min(h,w), a1 = 2 f_i,
    a2 = 35 f_i.  Symmetric in (height, width); thresholds stay real-valued."""
    if height < 1 or width < 1:
        raise ValueError("image dimensions must be >= 1")
    f_i = d * max(height, width) / min(height, width)
    return f_i, 2.0 * f_i, 35.0 * f_i


@dataclass(frozen=True)
class FeatureThresholds:
    """Region-feature thresholds for noise filtering.

    e1/e2 gate Extent, r gates VRatio, s gates Solidity; a1/a2 are the
    image-size-dependent area cutoffs.
    """

    e1: float = 0.35
    e2: float = 0.25
    r: float = 2.2
    s: float = 0.53
    a1: float = 42.0
    a2: float = 735.0

    def __post_init__(self):
        if self.e1 <= 0 or self.e2 <= 0:
            raise ConfigError(f"extent thresholds must be positive, got "
                              f"e1={self.e1}, e2={self.e2}")
        if self.e2 >= self.e1:
            # allowed but unusual: the recommended ranges of e1 and e2 overlap
            # and the two gate independent rules, so sweeps may cross them
            warnings.warn(f"e2={self.e2} >= e1={self.e1}; thresholds crossed")
        if self.r <= 0 or self.s <= 0:
            raise ConfigError("r and s must be positive")
        if not (0 < self.a1 < self.a2):
            raise ConfigError(f"need 0 < a1 < a2, got a1={self.a1}, a2={self.a2}")

    @classmethod
    def for_image(cls, height, width, d=21, e1=0.35, e2=0.25, r=2.2, s=0.53):
        _, a1, a2 = internal_factor(height, width, d)
        return cls(e1=e1, e2=e2, r=r, s=s, a1=a1, a2=a2)

    def with_value(self, name, value):
        if name not in ("e1", "e2", "r", "s", "a1", "a2"):
            raise ConfigError(f"unknown feature threshold {name!r}")
        return replace(self, **{name: float(value)})

    @classmethod
    def from_file(cls, path):
        """Load thresholds from key=value lines; unknown keys are rejected."""
        fields = {}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in ("e1", "e2", "r", "s", "a1", "a2"):
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            fields[key] = float(value)
        return cls(**fields)
