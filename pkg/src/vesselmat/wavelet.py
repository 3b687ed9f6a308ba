"""Isotropic undecimated wavelet transform (a trous scheme, cubic B-spline).

Each level smooths the previous scaling image by a separable convolution with
the kernel [1,4,6,4,1]/16, upsampled by inserting 2^j - 1 zeros between taps;
detail coefficients are the difference of adjacent scaling images, so the
input always equals the last scaling image plus the sum of all details.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve1d

from .errors import ConfigError
from .util import minmax_normalize

H0 = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0

_BOUNDARY_MODES = {"replicate": "nearest", "periodic": "wrap"}


def atrous_kernel(level):
    """The level-``j`` smoothing kernel: H0 with 2^j - 1 zeros between taps."""
    if level < 0:
        raise ConfigError(f"kernel level must be >= 0, got {level}")
    if level == 0:
        return H0.copy()
    step = 2 ** level
    kernel = np.zeros(4 * step + 1)
    kernel[::step] = H0
    return kernel


@dataclass
class IuwtDecomposition:
    """Scaling images c_1..c_n and detail images w_1..w_n (w_j = c_{j-1} - c_j)."""

    scaling: list
    detail: list
    levels: int

    def reconstruct(self):
        """Sum the last scaling image and every detail image (exact inverse)."""
        out = self.scaling[-1].copy()
        for w in self.detail:
            out += w
        return out


def iuwt_decompose(img, levels, boundary="replicate"):
    """Decompose a 2-D image into ``levels`` wavelet scales.

    Parameters
    ----------
    img : 2-D array
        Input image.
    levels : int
        Number of scales (>= 1).  Raises ConfigError when the largest kernel
        would exceed four times the smaller image side.
    boundary : {"replicate", "periodic"}
        Edge handling for the separable convolutions.  Periodic mode exists
        for shift-covariance checks; replicate is the working default.
    """
    img = np.asarray(img, float)
    if img.ndim != 2 or img.size == 0:
        raise ConfigError("iuwt_decompose expects a nonempty 2-D image")
    if levels < 1:
        raise ConfigError(f"levels must be >= 1, got {levels}")
    if boundary not in _BOUNDARY_MODES:
        raise ConfigError(f"unknown boundary mode {boundary!r}")
    largest = 4 * 2 ** (levels - 1) + 1
    if largest > 4 * min(img.shape):
        raise ConfigError(
            f"level {levels} kernel ({largest} taps) exceeds 4x the image extent"
        )
    mode = _BOUNDARY_MODES[boundary]
    scaling = []
    detail = []
    c = img
    for j in range(levels):
        k = atrous_kernel(j)
        smooth = convolve1d(convolve1d(c, k, axis=0, mode=mode), k, axis=1, mode=mode)
        detail.append(c - smooth)
        scaling.append(smooth)
        c = smooth
    return IuwtDecomposition(scaling, detail, levels)


def iuwt_enhance(i_g, scales=(2, 3), levels=None, *, include_residual=False,
                 complement=True, normalize=True, boundary="replicate"):
    """Vessel-enhanced image from selected wavelet scales.

    By default the decomposition runs on the complement (1 - i_g) so that
    dark vessels come out as positive detail coefficients, and the sum of the
    selected detail scales is rescaled to [0, 1].  ``include_residual`` adds
    the final scaling image, which together with ``scales=1..n``,
    ``complement=False`` and ``normalize=False`` reproduces the input exactly.
    """
    scale_list = sorted({int(s) for s in scales})
    if not scale_list:
        raise ConfigError("iuwt_enhance needs at least one scale")
    if scale_list[0] < 1:
        raise ConfigError(f"scales must be >= 1, got {scale_list[0]}")
    n = max(scale_list) if levels is None else int(levels)
    if scale_list[-1] > n:
        raise ConfigError(f"scale {scale_list[-1]} exceeds decomposition depth {n}")
    base = 1.0 - np.asarray(i_g, float) if complement else np.asarray(i_g, float)
    dec = iuwt_decompose(base, n, boundary)
    acc = np.zeros_like(base)
    for s in scale_list:
        acc += dec.detail[s - 1]
    if include_residual:
        acc += dec.scaling[-1]
    return minmax_normalize(acc) if normalize else acc
