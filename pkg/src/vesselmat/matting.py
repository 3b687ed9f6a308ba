"""Hierarchical matting of the trimap's unknown pixels.

Unknown pixels are stratified by their exact distance to the nearest vessel
pixel, pixels sharing a distance forming one hierarchy.  Hierarchies resolve
in ascending order: each unknown pixel compares itself against every labelled
pixel inside its window through a correlation score (intensity difference
plus a window-normalized spatial term) and adopts the label of the best
match.  Labels assigned within a hierarchy become visible only once the whole
hierarchy commits, so results do not depend on intra-hierarchy ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ConfigError, StratificationError
from .regions import all_region_features, connected_components
from .trimap import BACKGROUND, UNKNOWN, VESSEL

_METRICS = ("euclidean", "chebyshev")


@dataclass
class HierarchySet:
    """Unknown pixels grouped by distance-to-vessel, ascending.

    ``hierarchies[j]`` is an (n_j, 2) array of (row, col) coordinates;
    ``distances[j]`` is the shared distance of that hierarchy.
    """

    hierarchies: list
    distances: list

    def total_pixels(self):
        return sum(len(h) for h in self.hierarchies)


@dataclass
class SegmentedImage:
    """Final vessel mask plus a count of pixels that fell back to background
    because no labelled pixel ever entered their window."""

    vessel: np.ndarray
    unresolved: int = 0


def stratify(tm, metric="euclidean"):
    """Group unknown pixels into hierarchies of equal distance to the vessels.

    Distances are exact: euclidean values are square roots of integer squared
    distances (grouping compares the integers, so no float-equality traps),
    chebyshev values are integers.
    """
    if metric not in _METRICS:
        raise ConfigError(f"unknown distance metric {metric!r}")
    tm = np.asarray(tm)
    vessel = tm == VESSEL
    if not vessel.any():
        raise StratificationError("trimap contains no vessel pixels")
    unknown = tm == UNKNOWN
    ur, uc = np.nonzero(unknown)
    if ur.size == 0:
        return HierarchySet([], [])
    if metric == "euclidean":
        iy, ix = ndimage.distance_transform_edt(
            ~vessel, return_distances=False, return_indices=True
        )
        gy, gx = np.indices(tm.shape)
        key_grid = (iy - gy) ** 2 + (ix - gx) ** 2  # integer squared distances
        to_value = math.sqrt
    else:
        key_grid = ndimage.distance_transform_cdt(~vessel, metric="chessboard")
        to_value = float
    keys = key_grid[ur, uc]
    order = np.argsort(keys, kind="stable")  # raster order within equal keys
    ur, uc, keys = ur[order], uc[order], keys[order]
    starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
    bounds = np.r_[starts, keys.size]
    hierarchies = [
        np.column_stack((ur[a:b], uc[a:b])) for a, b in zip(bounds[:-1], bounds[1:])
    ]
    distances = [to_value(int(keys[a])) for a in starts]
    return HierarchySet(hierarchies, distances)


def correlation(u, k, i_mr, window_stats, omega=0.5):
    """Correlation score between an unknown pixel ``u`` and a labelled ``k``.

    ``window_stats = (x_min, x_max)`` are the extreme distances from ``u`` to
    the labelled pixels in its window; when they coincide the spatial term is
    zero by definition.  Lower scores mean stronger correlation.
    """
    x_min, x_max = window_stats
    dy = u[0] - k[0]
    dx = u[1] - k[1]
    dist = math.sqrt(dy * dy + dx * dx)
    color = abs(float(i_mr[u[0], u[1]]) - float(i_mr[k[0], k[1]]))
    spatial = 0.0 if x_max == x_min else (dist - x_min) / (x_max - x_min)
    return color + omega * spatial


def _window_offsets(window):
    half = window // 2
    offs = [
        (dy, dx)
        for dy in range(-half, half + 1)
        for dx in range(-half, half + 1)
        if (dy, dx) != (0, 0)
    ]
    arr = np.array(offs)
    dist = np.sqrt((arr[:, 0] ** 2 + arr[:, 1] ** 2).astype(float))
    return arr[:, 0], arr[:, 1], dist


class _State:
    """Padded label/intensity planes; labels are +1 vessel, -1 background,
    0 unresolved (the padding ring stays 0, i.e. never counts as labelled)."""

    def __init__(self, tm, i_mr, half):
        h, w = tm.shape
        self.half = half
        self.lab = np.zeros((h + 2 * half, w + 2 * half), np.int8)
        core = self.lab[half:half + h, half:half + w]
        core[tm == VESSEL] = 1
        core[tm == BACKGROUND] = -1
        self.vals = np.zeros((h + 2 * half, w + 2 * half), float)
        self.vals[half:half + h, half:half + w] = np.asarray(i_mr, float)

    def commit(self, coords, labels):
        self.lab[coords[:, 0] + self.half, coords[:, 1] + self.half] = labels

    def interior_vessel(self, shape):
        h, w = shape
        return self.lab[self.half:self.half + h, self.half:self.half + w] == 1


def _resolve_batch(state, coords, offs_dy, offs_dx, offs_dist, omega):
    """Score one batch of unknown pixels against the current labels (Jacobi).

    Returns ``(resolved, labels)``: ``labels[i]`` is +-1 where ``resolved[i]``,
    chosen as the score-minimizing labelled window pixel with ties broken by
    smaller distance, then vessel over background, then raster order.
    """
    half = state.half
    rr = coords[:, 0, None] + offs_dy[None, :] + half
    cc = coords[:, 1, None] + offs_dx[None, :] + half
    lab = state.lab[rr, cc]
    labelled = lab != 0
    resolved = labelled.any(axis=1)
    vals = state.vals[rr, cc]
    center = state.vals[coords[:, 0] + half, coords[:, 1] + half]
    color = np.abs(center[:, None] - vals)
    dist = np.broadcast_to(offs_dist, lab.shape)
    x_min = np.where(labelled, dist, np.inf).min(axis=1)
    x_max = np.where(labelled, dist, -np.inf).max(axis=1)
    denom = x_max - x_min
    safe = np.where(denom > 0, denom, 1.0)
    spatial = np.where(denom[:, None] > 0, (dist - x_min[:, None]) / safe[:, None], 0.0)
    beta = color + omega * spatial
    beta[~labelled] = np.inf
    best = beta.min(axis=1)
    cand = beta == best[:, None]
    dmin = np.where(cand, dist, np.inf).min(axis=1)
    cand &= dist == dmin[:, None]
    vessel_cand = cand & (lab == 1)
    has_vessel = vessel_cand.any(axis=1)
    cand = np.where(has_vessel[:, None], vessel_cand, cand)
    pick = cand.argmax(axis=1)  # offsets are in raster order; first tie wins
    labels = lab[np.arange(len(coords)), pick]
    return resolved, labels


def _resolve_serial(state, coords, offs, omega):
    """Gauss-Seidel variant: raster-order pixels see earlier commits at once."""
    offs_dy, offs_dx, offs_dist = offs
    resolved = np.zeros(len(coords), bool)
    labels = np.zeros(len(coords), np.int8)
    for i, (r, c) in enumerate(coords):
        row, lab = _resolve_batch(
            state, np.array([[r, c]]), offs_dy, offs_dx, offs_dist, omega
        )
        if row[0]:
            resolved[i] = True
            labels[i] = lab[0]
            state.commit(np.array([[r, c]]), lab[:1])
    return resolved, labels


def hierarchical_update(tm, i_mr, window=9, omega=0.5, metric="euclidean",
                        gauss_seidel=False):
    """Resolve every unknown pixel of the trimap to vessel or background.

    Hierarchies (ascending distance to the vessel set) resolve one at a time;
    within a hierarchy all pixels read the same committed state unless
    ``gauss_seidel`` is set.  Pixels whose window holds no labelled pixel are
    parked on a retry queue that reruns after each hierarchy commit; any left
    at the end default to background and are counted as unresolved.
    """
    if window < 3 or window % 2 == 0:
        raise ConfigError(f"window must be an odd size >= 3, got {window}")
    tm = np.asarray(tm)
    vessel0 = tm == VESSEL
    if not (tm == UNKNOWN).any():
        return SegmentedImage(vessel0.copy(), 0)
    hier = stratify(tm, metric)
    half = window // 2
    offs_dy, offs_dx, offs_dist = _window_offsets(window)
    state = _State(tm, i_mr, half)
    pending = np.empty((0, 2), dtype=int)
    for coords in hier.hierarchies:
        if gauss_seidel:
            resolved, labels = _resolve_serial(
                state, coords, (offs_dy, offs_dx, offs_dist), omega
            )
        else:
            resolved, labels = _resolve_batch(
                state, coords, offs_dy, offs_dx, offs_dist, omega
            )
            state.commit(coords[resolved], labels[resolved])
        pending = np.vstack((pending, coords[~resolved]))
        if len(pending):
            resolved, labels = _resolve_batch(
                state, pending, offs_dy, offs_dx, offs_dist, omega
            )
            state.commit(pending[resolved], labels[resolved])
            pending = pending[~resolved]
    unresolved = len(pending)
    if unresolved:
        state.commit(pending, np.full(unresolved, -1, np.int8))
    return SegmentedImage(state.interior_vessel(tm.shape), unresolved)


def _is_spurious(feat, th):
    return feat.area < th.a2 and feat.extent > th.e2 and feat.vratio < th.r


def postprocess(seg, thresholds):
    """Drop small compact non-elongated components from the segmented image."""
    mask = np.asarray(seg.vessel, bool)
    labels, count = connected_components(mask)
    if count == 0:
        return SegmentedImage(mask.copy(), seg.unresolved)
    feats = all_region_features(labels, count)
    drop = np.zeros(count + 1, bool)
    drop[1:] = [_is_spurious(f, thresholds) for f in feats]
    return SegmentedImage(mask & ~drop[labels], seg.unresolved)
