"""Round spheres of constant curvature K > 0.

Points are unit vectors in R^(n+1); all metric quantities are scaled by the
radius 1/sqrt(K).  Distances use the asin form near coincidence for accuracy.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import CutLocusError
from ..numerics import unit_sphere_area
from .base import CUT_GUARD, Manifold


class Sphere(Manifold):
    def __init__(self, dim: int, curvature: float = 1.0):
        if dim < 2:
            raise ValueError("dim must be >= 2")
        if curvature <= 0:
            raise ValueError("curvature must be positive")
        self.dim = dim
        self.coord_dim = dim + 1
        self.curvature = float(curvature)
        self.radius = 1.0 / math.sqrt(curvature)
        self.name = f"sphere:n={dim},K={curvature:g}"

    def check_point(self, x, tol=1e-12):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.coord_dim,):
            raise ValueError(f"expected shape ({self.coord_dim},), got {x.shape}")
        if abs(np.dot(x, x) - 1.0) > 10 * tol:
            raise ValueError("point is not on the unit sphere embedding")

    # -- helpers -------------------------------------------------------------

    def _angle(self, x, z):
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        inner = np.dot(x, z)
        if inner > 0:
            return 2.0 * math.asin(min(np.linalg.norm(z - x) / 2.0, 1.0))
        return math.pi - 2.0 * math.asin(min(np.linalg.norm(z + x) / 2.0, 1.0))

    def _angle_batch(self, x, zs):
        x = np.asarray(x, dtype=float)
        zs = np.asarray(zs, dtype=float)
        inner = zs @ x
        near = 2.0 * np.arcsin(np.minimum(np.linalg.norm(zs - x[None, :], axis=1) / 2.0, 1.0))
        far = math.pi - 2.0 * np.arcsin(np.minimum(np.linalg.norm(zs + x[None, :], axis=1) / 2.0, 1.0))
        return np.where(inner > 0, near, far)

    def frame(self, x):
        # Householder reflection taking the last basis vector to x gives a
        # deterministic orthonormal tangent basis.
        x = np.asarray(x, dtype=float)
        m = self.coord_dim
        e = np.zeros(m)
        e[-1] = math.copysign(1.0, x[-1]) if x[-1] != 0 else 1.0
        v = x - e
        nv2 = np.dot(v, v)
        if nv2 < 1e-30:
            basis = np.eye(m)[: self.dim]
        else:
            h = np.eye(m) - 2.0 * np.outer(v, v) / nv2
            basis = h[:, : self.dim].T
            if e[-1] < 0:
                basis = -basis
        return basis

    # -- maps ----------------------------------------------------------------

    def exp(self, x, xi):
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        u = xi @ self.frame(x)
        norm = np.linalg.norm(u)
        if norm < 1e-300:
            return x.copy()
        theta = norm / self.radius
        out = math.cos(theta) * x + math.sin(theta) * (u / norm)
        return out / np.linalg.norm(out)

    def exp_batch(self, x, xis):
        x = np.asarray(x, dtype=float)
        xis = np.asarray(xis, dtype=float)
        us = xis @ self.frame(x)
        norms = np.linalg.norm(us, axis=1)
        theta = norms / self.radius
        safe = np.maximum(norms, 1e-300)
        out = np.cos(theta)[:, None] * x[None, :] + np.sin(theta)[:, None] * (us / safe[:, None])
        return out / np.linalg.norm(out, axis=1, keepdims=True)

    def log(self, x, z):
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        d = self.dist(x, z)
        if d >= self.injectivity_radius(x) - CUT_GUARD:
            raise CutLocusError("log undefined at or beyond the antipode")
        if d == 0.0:
            return np.zeros(self.dim)
        w = z - np.dot(x, z) * x
        nw = np.linalg.norm(w)
        if nw < 1e-300:
            return np.zeros(self.dim)
        u = (d / nw) * w
        return self.frame(x) @ u

    def dist(self, x, z):
        return self.radius * self._angle(x, z)

    def dist_batch(self, x, zs):
        return self.radius * self._angle_batch(x, zs)

    def reflect(self, x, z):
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        d = self.dist(x, z)
        if d >= self.injectivity_radius(x) - CUT_GUARD:
            raise CutLocusError("reflection undefined at or beyond the antipode")
        out = 2.0 * np.dot(x, z) * x - z
        return out / np.linalg.norm(out)

    # -- polar ----------------------------------------------------------------

    def polar(self, x, radii, dirs):
        x = np.asarray(x, dtype=float)
        radii = np.asarray(radii, dtype=float)
        dirs = np.asarray(dirs, dtype=float)
        us = dirs @ self.frame(x)  # (m, coord_dim) unit ambient tangents
        theta = radii / self.radius  # (k,)
        pts = (np.cos(theta)[:, None, None] * x[None, None, :]
               + np.sin(theta)[:, None, None] * us[None, :, :])
        jac = self._jacobian(radii)[:, None] * np.ones((1, len(dirs)))
        return pts, jac

    def polar_pairs(self, x, radii, dirs):
        x = np.asarray(x, dtype=float)
        radii = np.asarray(radii, dtype=float)
        us = np.asarray(dirs, dtype=float) @ self.frame(x)
        theta = radii / self.radius
        pts = np.cos(theta)[:, None] * x[None, :] + np.sin(theta)[:, None] * us
        return pts, self._jacobian(radii)

    def _jacobian(self, radii):
        theta = np.asarray(radii, dtype=float) / self.radius
        ratio = np.where(theta > 1e-9, np.sin(theta) / np.maximum(theta, 1e-300), 1.0 - theta**2 / 6.0)
        return ratio ** (self.dim - 1)

    # -- volumes ---------------------------------------------------------------

    def ball_volume(self, x, r):
        return float(self._volume(np.array([r]))[0])

    def ball_volume_fn(self, x, rmax):
        return self._volume

    def _volume(self, r):
        a = self.radius
        rho = np.minimum(np.asarray(r, dtype=float) / a, math.pi)
        if self.dim == 2:
            return 2.0 * math.pi * a**2 * (1.0 - np.cos(rho))
        if self.dim == 3:
            return 2.0 * math.pi * a**3 * (rho - np.sin(rho) * np.cos(rho))
        # generic dimension: cumulative radial integral on a fixed fine grid
        grid = np.linspace(0.0, math.pi, 4097)
        dens = unit_sphere_area(self.dim) * (a * np.sin(grid)) ** (self.dim - 1) * a
        cum = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2.0 * np.diff(grid))])
        return np.interp(rho, grid, cum)

    def injectivity_radius(self, x):
        return math.pi * self.radius

    def conjugate_radius(self, x):
        return math.pi * self.radius

    def sectional_curvature_sup(self, x, r):
        return self.curvature
