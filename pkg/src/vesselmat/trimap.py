"""Automatic trimap construction.

The enhanced top-hat image is split into background / unknown / preliminary
vessel bands, the vessel band is cleaned by region features, a vessel
skeleton is extracted from the wavelet-enhanced image, and the final vessel
class is the union of the cleaned band and the skeleton.  Everything outside
the field of view is background.
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import ConfigError
from .regions import all_region_features, connected_components, otsu

BACKGROUND = 0
UNKNOWN = 1
VESSEL = 2

# single-channel PNG encoding of the three classes
PNG_LEVELS = {BACKGROUND: 0, UNKNOWN: 128, VESSEL: 255}


def segment_three_way(i_mr, p1=0.2, p2=0.35):
    """Split a [0,1] image into (background, unknown, vessel) bands.

    background: value < p1 (pixels at exactly 0 included);
    unknown: p1 <= value < p2; vessel: p2 <= value.
    """
    if not p1 < p2:
        raise ConfigError(f"need p1 < p2, got p1={p1}, p2={p2}")
    i_mr = np.asarray(i_mr, float)
    background = i_mr < p1
    unknown = (i_mr >= p1) & (i_mr < p2)
    vessel = i_mr >= p2
    return background, unknown, vessel


def _keep_components(labels, keep_flags):
    lookup = np.zeros(len(keep_flags) + 1, bool)
    lookup[1:] = keep_flags
    return lookup[labels]


def _is_noise_region(feat, th):
    """Compact, blob-like, solid regions are treated as noise."""
    return feat.extent <= th.e1 and feat.vratio <= th.r and feat.solidity >= th.s


def denoise_preliminary(v1, thresholds):
    """Area-filter the preliminary vessel band and drop blob-like noise.

    Components with area <= a1 are removed outright; of the survivors, those
    that are simultaneously low-extent, non-elongated and solid are dropped.
    """
    labels, count = connected_components(v1)
    if count == 0:
        return np.zeros_like(np.asarray(v1, bool))
    feats = all_region_features(labels, count)
    keep = np.array(
        [f.area > thresholds.a1 and not _is_noise_region(f, thresholds) for f in feats],
        bool,
    )
    return _keep_components(labels, keep)


def skeleton_threshold(i_iuw, epsilon=0.03):
    """Binarize the wavelet-enhanced image at (otsu - epsilon), strict >."""
    result = otsu(i_iuw)
    if result.degenerate:
        warnings.warn("degenerate Otsu threshold (flat image); skeleton source empty")
        return np.zeros(np.asarray(i_iuw).shape, bool)
    return np.asarray(i_iuw, float) > (result.threshold - epsilon)


def partition_by_area(t, a1, a2):
    """Split components of ``t`` into small (< a1), mid ([a1, a2]), large (> a2)."""
    if not a1 < a2:
        raise ConfigError(f"need a1 < a2, got a1={a1}, a2={a2}")
    labels, count = connected_components(t)
    if count == 0:
        empty = np.zeros_like(np.asarray(t, bool))
        return empty, empty.copy(), empty.copy()
    areas = np.bincount(labels.ravel())[1:].astype(float)
    t1 = _keep_components(labels, areas < a1)
    t2 = _keep_components(labels, (areas >= a1) & (areas <= a2))
    t3 = _keep_components(labels, areas > a2)
    return t1, t2, t3


def _keep_t4(feat, th):
    return feat.extent > th.e2 and feat.vratio <= th.r


def select_t4(t2, thresholds):
    """Keep mid-sized components that look vessel-like (extent > e2, vratio <= r)."""
    labels, count = connected_components(t2)
    if count == 0:
        return np.zeros_like(np.asarray(t2, bool))
    feats = all_region_features(labels, count)
    keep = np.array([_keep_t4(f, thresholds) for f in feats], bool)
    return _keep_components(labels, keep)


def _thin_neighbors(padded):
    # (N, NE, E, SE, S, SW, W, NW) views of the padded image
    return (padded[:-2, 1:-1], padded[:-2, 2:], padded[1:-1, 2:], padded[2:, 2:],
            padded[2:, 1:-1], padded[2:, :-2], padded[1:-1, :-2], padded[:-2, :-2])


def extract_skeleton(mask):
    """Two-subiteration parallel thinning to a width-1, 8-connected centerline.

    Deletion requires crossing number 1 and a neighbor count in [2, 3], so
    endpoints and isolated pixels survive and component count is preserved.
    Iterates until a full pass removes nothing.
    """
    img = np.asarray(mask, bool).copy()
    while True:
        changed = False
        for subiter in (0, 1):
            p = np.pad(img, 1)
            p2, p3, p4, p5, p6, p7, p8, p9 = _thin_neighbors(p)
            c = ((~p2 & (p3 | p4)).astype(np.uint8) + (~p4 & (p5 | p6))
                 + (~p6 & (p7 | p8)) + (~p8 & (p9 | p2)))
            n1 = (p9 | p2).astype(np.uint8) + (p3 | p4) + (p5 | p6) + (p7 | p8)
            n2 = (p2 | p3).astype(np.uint8) + (p4 | p5) + (p6 | p7) + (p8 | p9)
            n = np.minimum(n1, n2)
            if subiter == 0:
                m = (p6 | p7 | ~p9) & p8
            else:
                m = (p2 | p3 | ~p5) & p4
            deletable = img & (c == 1) & (n >= 2) & (n <= 3) & ~m
            if deletable.any():
                img &= ~deletable
                changed = True
        if not changed:
            return img


def build_trimap(i_mr, i_iuw, fov, thresholds, *, p1=0.2, p2=0.35, epsilon=0.03,
                 with_skeleton=True):
    """Run the full trimap flow and return a uint8 label map.

    Vessel = cleaned preliminary band union skeleton; Unknown = unknown band
    minus Vessel; everything else (and everything outside the FOV) is
    Background.  ``with_skeleton=False`` omits the skeleton term (ablation).
    """
    i_mr = np.asarray(i_mr, float)
    i_iuw = np.asarray(i_iuw, float)
    fov = np.asarray(fov, bool)
    if not (i_mr.shape == i_iuw.shape == fov.shape):
        raise ValueError("enhanced images and FOV mask must share dimensions")
    _, unknown, v1 = segment_three_way(i_mr, p1, p2)
    vessel = denoise_preliminary(v1, thresholds)
    if with_skeleton:
        t = skeleton_threshold(i_iuw, epsilon)
        _, t2, t3 = partition_by_area(t, thresholds.a1, thresholds.a2)
        t4 = select_t4(t2, thresholds)
        skeleton = extract_skeleton(t3 | t4)
        vessel = vessel | skeleton
    tm = np.full(i_mr.shape, BACKGROUND, dtype=np.uint8)
    tm[unknown & fov] = UNKNOWN
    tm[vessel & fov] = VESSEL
    return tm


def trimap_to_gray(tm):
    """Encode a trimap as uint8 levels 0 / 128 / 255 for PNG output."""
    out = np.zeros(tm.shape, np.uint8)
    out[tm == UNKNOWN] = PNG_LEVELS[UNKNOWN]
    out[tm == VESSEL] = PNG_LEVELS[VESSEL]
    return out


def trimap_from_gray(gray):
    """Inverse of trimap_to_gray."""
    tm = np.full(gray.shape, BACKGROUND, np.uint8)
    tm[gray == PNG_LEVELS[UNKNOWN]] = UNKNOWN
    tm[gray == PNG_LEVELS[VESSEL]] = VESSEL
    return tm
