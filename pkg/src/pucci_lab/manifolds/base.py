"""Common interface for the closed-form model manifolds.

Points are plain numpy coordinate arrays (chart or embedding coordinates,
depending on the manifold).  Tangent vectors are components in the
orthonormal frame returned by ``frame(x)``, so their metric norm is the
Euclidean norm of the components.  All operations are pure functions of
immutable inputs and safe to call concurrently.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass

import numpy as np

from ..errors import CutLocusError
from ..numerics import ball_parameter_stream, unit_ball_volume

# Margin used by every log/reflect guard: queries at distance >= inj - GUARD
# are rejected rather than extrapolated.
CUT_GUARD = 1e-9


@dataclass(frozen=True)
class GeometryReport:
    """Measured constants of a ball: injectivity data and volume behavior."""

    inj: float
    conj: float
    curvature_sup: float
    doubling_exponent: float
    reverse_doubling_const: float  # in (0, 1]
    comparability_const: float  # >= 1
    gromov_violations: int


class Manifold(abc.ABC):
    """A model manifold with closed-form exp/log/distance/volume."""

    dim: int
    coord_dim: int
    name: str

    # -- points ------------------------------------------------------------

    @abc.abstractmethod
    def check_point(self, x: np.ndarray, tol: float = 1e-12) -> None:
        """Raise ValueError if ``x`` does not lie on the manifold."""

    # -- frame and maps ----------------------------------------------------

    @abc.abstractmethod
    def frame(self, x: np.ndarray) -> np.ndarray:
        """Orthonormal tangent frame at x, shape (dim, coord_dim)."""

    @abc.abstractmethod
    def exp(self, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        """Geodesic endpoint exp_x(xi); xi in frame components."""

    @abc.abstractmethod
    def log(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Inverse of exp; raises CutLocusError past the injectivity guard."""

    @abc.abstractmethod
    def dist(self, x: np.ndarray, z: np.ndarray) -> float:
        """Riemannian distance."""

    def dist_batch(self, x: np.ndarray, zs: np.ndarray) -> np.ndarray:
        """Distances from x to each row of ``zs``."""
        return np.array([self.dist(x, z) for z in zs])

    def exp_batch(self, x: np.ndarray, xis: np.ndarray) -> np.ndarray:
        """Geodesic endpoints for each row of frame components ``xis``."""
        return np.array([self.exp(x, xi) for xi in xis])

    def reflect(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Geodesic point reflection of z through x."""
        return self.exp(x, -self.log(x, z))

    # -- polar coordinates -------------------------------------------------

    @abc.abstractmethod
    def polar(self, x: np.ndarray, radii: np.ndarray, dirs: np.ndarray
              ) -> tuple[np.ndarray, np.ndarray]:
        """Points and area densities of the geodesic polar grid at x.

        Parameters
        ----------
        radii : (k,) increasing positive radii.
        dirs : (m, dim) unit directions in the frame at x.

        Returns
        -------
        points : (k, m, coord_dim)
        jac : (k, m) densities J(t, v) with dV = J t^(dim-1) dt dv and
            J(0, v) = 1.
        """

    @abc.abstractmethod
    def polar_pairs(self, x: np.ndarray, radii: np.ndarray, dirs: np.ndarray
                    ) -> tuple[np.ndarray, np.ndarray]:
        """Pointwise exp_x(t_i v_i) and densities for paired (t_i, v_i).

        ``radii`` has shape (m,) and ``dirs`` (m, dim); returns points of
        shape (m, coord_dim) and densities of shape (m,).
        """

    def exp_jacobian(self, x: np.ndarray, t: float, v: np.ndarray) -> float:
        """Polar volume density J(t, v) at radius t in unit direction v."""
        if t >= self.injectivity_radius(x):
            raise CutLocusError(f"radius {t} reaches the cut locus at {x}")
        if t == 0.0:
            return 1.0
        _, jac = self.polar(x, np.array([t]), v[None, :])
        return float(jac[0, 0])

    # -- volumes and radii ---------------------------------------------------

    @abc.abstractmethod
    def ball_volume(self, x: np.ndarray, r: float) -> float:
        """Riemannian measure of the metric ball B(x, r)."""

    def ball_volume_fn(self, x: np.ndarray, rmax: float):
        """Vectorized r -> volume map, memoizable by subclasses."""
        def fn(r: np.ndarray) -> np.ndarray:
            r = np.atleast_1d(np.asarray(r, dtype=float))
            return np.array([self.ball_volume(x, float(v)) for v in r])
        return fn

    @abc.abstractmethod
    def injectivity_radius(self, x: np.ndarray) -> float: ...

    @abc.abstractmethod
    def conjugate_radius(self, x: np.ndarray) -> float: ...

    @abc.abstractmethod
    def sectional_curvature_sup(self, x: np.ndarray, r: float) -> float:
        """Supremum of sectional curvatures over the ball B(x, r)."""

    # -- derived operations --------------------------------------------------

    def dist_squared_hessian(self, y: np.ndarray, x: np.ndarray,
                             step: float | None = None) -> np.ndarray:
        """Finite-difference Hessian of d_y^2/2 at x, in the frame at x.

        Valid for d(x,y) below both the injectivity radius of y and the
        quarter-period pi/(2 sqrt(K)) of the largest nearby curvature.
        """
        d = self.dist(x, y)
        k_sup = self.sectional_curvature_sup(x, max(d, 1e-6))
        limit = self.injectivity_radius(y)
        if k_sup > 0:
            limit = min(limit, math.pi / (2.0 * math.sqrt(k_sup)))
        if d >= limit - CUT_GUARD:
            raise CutLocusError("base point outside the Hessian-bound region")
        n = self.dim
        h = step if step is not None else 1e-4 * max(d, 1e-2)

        def f(xi):
            return 0.5 * self.dist(self.exp(x, xi), y) ** 2

        f0 = f(np.zeros(n))
        hess = np.empty((n, n))
        for i in range(n):
            ei = np.zeros(n)
            ei[i] = h
            fpp = f(ei)
            fmm = f(-ei)
            hess[i, i] = (fpp - 2.0 * f0 + fmm) / h**2
            for j in range(i + 1, n):
                ej = np.zeros(n)
                ej[j] = h
                fpj = f(ei + ej)
                fmj = f(-ei - ej)
                fpm = f(ei - ej)
                fmp = f(-ei + ej)
                hess[i, j] = hess[j, i] = (fpj + fmj - fpm - fmp) / (4.0 * h**2)
        return 0.5 * (hess + hess.T)

    def sample_ball(self, x: np.ndarray, r: float, count: int, skip: int = 0
                    ) -> tuple[np.ndarray, np.ndarray, float]:
        """Low-discrepancy sample of B(x, r) with quadrature weights.

        Returns ``(points, weights, box)`` such that for any integrand f,
        ``box * mean(weights * f(points))`` estimates the mu_g-integral of f
        over the ball; ``box`` is the Euclidean ball volume of radius r.
        """
        t, v = ball_parameter_stream(self.dim, count, skip=skip)
        pts, jac = self.polar_pairs(x, t * r, v)
        box = unit_ball_volume(self.dim) * r**self.dim
        return pts, jac, box

    def sample_annulus(self, x: np.ndarray, r_in: float, r_out: float,
                       count: int, skip: int = 0
                       ) -> tuple[np.ndarray, np.ndarray, float]:
        """Like ``sample_ball`` on the annulus r_in < t < r_out."""
        u, v = ball_parameter_stream(self.dim, count, skip=skip)
        n = self.dim
        t = (r_in**n + (u**n) * (r_out**n - r_in**n)) ** (1.0 / n)
        pts, jac = self.polar_pairs(x, t, v)
        box = unit_ball_volume(n) * (r_out**n - r_in**n)
        return pts, jac, box

    def measure_fraction(self, x: np.ndarray, r_in: float, r_out: float,
                         indicator, count: int, skip: int = 0) -> float:
        """mu_g-fraction of the annulus (ball when r_in = 0) where
        ``indicator(points)`` holds."""
        if r_in <= 0:
            pts, w, _ = self.sample_ball(x, r_out, count, skip=skip)
        else:
            pts, w, _ = self.sample_annulus(x, r_in, r_out, count, skip=skip)
        flags = np.asarray(indicator(pts), dtype=float)
        total = float(np.sum(w))
        if total <= 0:
            return 0.0
        return float(np.sum(w * flags) / total)


def fd_gradient(manifold: Manifold, f, x: np.ndarray, h: float) -> np.ndarray:
    """Central-difference Riemannian gradient of f at x, frame components."""
    n = manifold.dim
    g = np.empty(n)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        g[i] = (f(manifold.exp(x, ei)) - f(manifold.exp(x, -ei))) / (2.0 * h)
    return g
