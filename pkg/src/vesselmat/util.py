"""Small shared numeric helpers."""

import numpy as np


def minmax_normalize(arr):
    """Rescale an array to [0, 1] by its min/max; a flat array maps to zeros."""
    arr = np.asarray(arr, dtype=float)
    lo = arr.min()
    hi = arr.max()
    if hi <= lo:
        return np.zeros_like(arr)
    return (arr - lo) / (hi - lo)
