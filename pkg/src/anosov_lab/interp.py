"""Periodic bicubic interpolation on uniform N x N torus grids."""

from __future__ import annotations

import numpy as np
from scipy import ndimage


class PeriodicBicubic:
    """Bicubic spline interpolation of grid data with periodic wrap.

    ``values`` has shape (N, N) or (N, N, m); sample i, j sits at the torus
    point (i / N, j / N).
    """

    def __init__(self, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        self.n = values.shape[0]
        if values.ndim == 2:
            values = values[:, :, None]
        self._coeffs = [
            ndimage.spline_filter(values[:, :, m], order=3, mode="grid-wrap")
            for m in range(values.shape[2])
        ]

    def __call__(self, x) -> np.ndarray:
        """Evaluate at torus points of shape (2,) or (n, 2)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        coords = (pts.T * self.n) % self.n
        out = np.stack(
            [
                ndimage.map_coordinates(c, coords, order=3, mode="grid-wrap", prefilter=False)
                for c in self._coeffs
            ],
            axis=1,
        )
        if out.shape[1] == 1:
            out = out[:, 0]
        return out[0] if single else out
