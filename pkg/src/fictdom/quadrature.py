"""Quadrature rules on the unit interval and the reference triangle."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi


@dataclass(frozen=True)
class QuadratureRule:
    """Points and weights on a reference cell.

    ``points`` are coordinates on ``[0, 1]`` (segments, shape (m,)) or on the
    triangle with vertices (0,0), (1,0), (0,1) (shape (m, 2)).  Weights sum to
    the reference measure (1 or 1/2).
    """

    points: np.ndarray
    weights: np.ndarray
    exactness_degree: int

    @property
    def barycentric(self) -> np.ndarray:
        """Barycentric coordinates of triangle points, shape (m, 3)."""
        p = np.atleast_2d(self.points)
        return np.column_stack([1.0 - p[:, 0] - p[:, 1], p[:, 0], p[:, 1]])


@lru_cache(maxsize=None)
def gauss_segment(n_points: int) -> QuadratureRule:
    """Gauss-Legendre rule on [0, 1], exact to degree ``2 * n_points - 1``."""
    x, w = leggauss(n_points)
    return QuadratureRule(0.5 * (x + 1.0), 0.5 * w, 2 * n_points - 1)


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> QuadratureRule:
    """Collapsed (conical product) Gauss rule on the reference triangle.

    Uses the Duffy map ``(u, v) -> (u (1 - v), v)``: Gauss-Legendre in ``u``
    and Gauss-Jacobi with weight ``(1 - v)`` in ``v``, ``m = ceil((degree+1)/2)``
    points per direction.
    """
    m = max(1, math.ceil((degree + 1) / 2))
    xu, wu = leggauss(m)
    u, wu = 0.5 * (xu + 1.0), 0.5 * wu
    tv, wv = roots_jacobi(m, 1.0, 0.0)
    v, wv = 0.5 * (tv + 1.0), 0.25 * wv
    U, V = np.meshgrid(u, v, indexing="ij")
    W = np.outer(wu, wv)
    pts = np.column_stack([(U * (1.0 - V)).ravel(), V.ravel()])
    return QuadratureRule(pts, W.ravel(), 2 * m - 1)
