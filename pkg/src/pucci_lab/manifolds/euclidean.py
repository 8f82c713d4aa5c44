"""Flat space in Cartesian coordinates."""

from __future__ import annotations

import math

import numpy as np

from ..numerics import unit_ball_volume
from .base import Manifold


class Euclidean(Manifold):
    """R^n with the standard metric; the frame is the identity."""

    def __init__(self, dim: int):
        if dim < 2:
            raise ValueError("dim must be >= 2")
        self.dim = dim
        self.coord_dim = dim
        self.name = f"euclid:n={dim}"

    def check_point(self, x, tol=1e-12):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected shape ({self.dim},), got {x.shape}")

    def frame(self, x):
        return np.eye(self.dim)

    def exp(self, x, xi):
        return np.asarray(x, dtype=float) + np.asarray(xi, dtype=float)

    def exp_batch(self, x, xis):
        return np.asarray(x, dtype=float)[None, :] + np.asarray(xis, dtype=float)

    def log(self, x, z):
        return np.asarray(z, dtype=float) - np.asarray(x, dtype=float)

    def dist(self, x, z):
        return float(np.linalg.norm(np.asarray(z, dtype=float) - np.asarray(x, dtype=float)))

    def dist_batch(self, x, zs):
        return np.linalg.norm(np.asarray(zs, dtype=float) - np.asarray(x, dtype=float)[None, :], axis=1)

    def reflect(self, x, z):
        return 2.0 * np.asarray(x, dtype=float) - np.asarray(z, dtype=float)

    def polar(self, x, radii, dirs):
        radii = np.asarray(radii, dtype=float)
        dirs = np.asarray(dirs, dtype=float)
        pts = x[None, None, :] + radii[:, None, None] * dirs[None, :, :]
        jac = np.ones((len(radii), len(dirs)))
        return pts, jac

    def polar_pairs(self, x, radii, dirs):
        radii = np.asarray(radii, dtype=float)
        pts = x[None, :] + radii[:, None] * np.asarray(dirs, dtype=float)
        return pts, np.ones(len(radii))

    def ball_volume(self, x, r):
        return unit_ball_volume(self.dim) * r**self.dim

    def ball_volume_fn(self, x, rmax):
        omega = unit_ball_volume(self.dim)
        n = self.dim
        return lambda r: omega * np.asarray(r, dtype=float) ** n

    def injectivity_radius(self, x):
        return math.inf

    def conjugate_radius(self, x):
        return math.inf

    def sectional_curvature_sup(self, x, r):
        return 0.0
