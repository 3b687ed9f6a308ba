"""Directional top-hat vessel enhancement.

Dark vessels are brightened by complementing the green channel, opening it
with a thin line structuring element at one orientation, and subtracting.
Summing the responses over a fan of orientations and rescaling to [0, 1]
yields the enhanced image used for trimap generation.

Grayscale erosion/dilation are flat min/max filters over the line's pixel
offsets.  Offsets that fall outside the image are ignored (the min/max runs
over in-bounds samples only); this keeps openings anti-extensive and
idempotent right up to the border instead of inventing values there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .util import minmax_normalize

DEFAULT_SE_LENGTH = 21

# Orientations in degrees: multiples of 15 strictly inside (0, 180).
DEFAULT_ANGLES = tuple(float(a) for a in range(15, 180, 15))


def default_angles(include_horizontal=False):
    """The default orientation fan; optionally prepend 0 deg (horizontal)."""
    if include_horizontal:
        return (0.0,) + DEFAULT_ANGLES
    return DEFAULT_ANGLES


@dataclass(frozen=True)
class StructuringElement:
    """A flat, 1-pixel-wide discrete line of offsets centered on the origin.

    ``offsets`` holds (dy, dx) pairs; dy grows downward in array coordinates.
    """

    offsets: tuple
    angle: float
    length: int

    def extent(self):
        ry = max(abs(dy) for dy, _ in self.offsets)
        rx = max(abs(dx) for _, dx in self.offsets)
        return ry, rx


def _round_away(x):
    """Nearest integer, ties away from zero (symmetric under negation)."""
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def linear_se(length, angle):
    """Rasterize a centered line of the given pixel length at ``angle`` degrees.

    Endpoints are placed at (+-round(h*cos), -+round(h*sin)) with
    h = (length-1)/2, and the 8-connected line between them is traced by
    rounding equally spaced points along the segment.  The result is
    symmetric about the origin and contains it.
    """
    if length < 1:
        raise ConfigError(f"structuring element length must be >= 1, got {length}")
    half = (length - 1) / 2.0
    theta = math.radians(angle)
    rx = _round_away(half * math.cos(theta))
    ry = _round_away(half * math.sin(theta))
    n = max(abs(rx), abs(ry))
    if n == 0:
        return StructuringElement(((0, 0),), float(angle), int(length))
    offsets = tuple(
        (-_round_away(t * ry / n), _round_away(t * rx / n)) for t in range(-n, n + 1)
    )
    return StructuringElement(offsets, float(angle), int(length))


def _sliding(img, se, pad_value, reduce):
    h, w = img.shape
    ry, rx = se.extent()
    padded = np.full((h + 2 * ry, w + 2 * rx), pad_value, dtype=float)
    padded[ry:ry + h, rx:rx + w] = img
    out = None
    for dy, dx in se.offsets:
        view = padded[ry + dy:ry + dy + h, rx + dx:rx + dx + w]
        if out is None:
            out = view.copy()
        else:
            reduce(out, view, out=out)
    return out


def erode(img, se):
    """Grayscale erosion: per-pixel min of in-bounds samples over the SE."""
    return _sliding(np.asarray(img, float), se, np.inf, np.minimum)


def dilate(img, se):
    """Grayscale dilation: per-pixel max of in-bounds samples over the SE."""
    return _sliding(np.asarray(img, float), se, -np.inf, np.maximum)


def opening(img, se):
    """Morphological opening (erosion then dilation) with the same SE."""
    return dilate(erode(img, se), se)


def tophat_directional(i_g, angle, length=DEFAULT_SE_LENGTH):
    """Top-hat response at one orientation.

    The input is complemented first (vessels become bright ridges), then the
    opening by the line SE at ``angle`` is subtracted.  The result is >= 0
    everywhere because opening never exceeds its input.
    """
    comp = 1.0 - np.asarray(i_g, float)
    return comp - opening(comp, linear_se(length, angle))


def morph_reconstructed(i_g, angles=DEFAULT_ANGLES, se_length=DEFAULT_SE_LENGTH,
                        normalize=True):
    """Sum of directional top-hats over the orientation fan, scaled to [0, 1].

    The angle order is fixed, so the accumulated sum (and hence the output)
    is bit-reproducible.  A flat input yields an all-zero image.
    """
    angles = tuple(angles)
    if not angles:
        raise ConfigError("morph_reconstructed needs at least one angle")
    i_g = np.asarray(i_g, float)
    acc = np.zeros_like(i_g)
    for angle in angles:
        acc += tophat_directional(i_g, angle, se_length)
    return minmax_normalize(acc) if normalize else acc
