"""Surfaces of revolution with nonnegative Gauss curvature.

Chart coordinates are (q, phi): meridian coordinate and rotation angle, with
metric E(q) dq^2 + G(q) dphi^2.  Named profiles keep E, G in closed form:

* ``plane``       E = 1,        G = q^2        (flat, sanity profile)
* ``paraboloid``  E = 1 + 4q^2, G = q^2        (graph z = q^2 rotated)
* ``dome``        E = 1,        G = sin(q)^2   (unit round sphere)

Geodesics, Jacobi fields and the log map run through a compiled kernel when
available, with a numpy fallback selected at import (see ``backend_name``).
The orthonormal frame at (q, phi) is (d_q / sqrt(E), d_phi / sqrt(G)).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import CutLocusError
from ..numerics import wrap_angle
from .base import CUT_GUARD, Manifold

if os.environ.get("PUCCI_LAB_FORCE_PURE"):
    from . import _revol_fallback as _impl
else:
    try:
        from . import _revol_kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _revol_fallback as _impl


def backend_name() -> str:
    """Which geodesic kernel implementation is active."""
    return _impl.BACKEND_NAME


def get_backend(pure: bool = False):
    """Kernel module; ``pure=True`` forces the numpy fallback (benchmarks)."""
    if pure:
        from . import _revol_fallback
        return _revol_fallback
    return _impl


@dataclass(frozen=True)
class RevolutionProfile:
    name: str
    pid: int
    curvature: Callable[[np.ndarray], np.ndarray]
    arc: Callable[[float], float]          # meridian arc from the apex
    arc_inv: Callable[[float], float]
    apex_ball_area: Callable[[float], float]
    curvature_sup_global: float
    apex_inj: float
    q_max: float                            # chart domain bound


def _parab_arc(q: float) -> float:
    return q * math.sqrt(1.0 + 4.0 * q * q) / 2.0 + math.asinh(2.0 * q) / 4.0


def _parab_arc_inv(s: float) -> float:
    if s <= 0:
        return 0.0
    q = s
    for _ in range(60):
        f = _parab_arc(q) - s
        df = math.sqrt(1.0 + 4.0 * q * q)
        step = f / df
        q -= step
        if abs(step) < 1e-15 * (1.0 + q):
            break
    return max(q, 0.0)


PROFILES = {
    "plane": RevolutionProfile(
        name="plane", pid=_impl.PROFILE_PLANE,
        curvature=lambda q: np.zeros_like(np.asarray(q, dtype=float)),
        arc=lambda q: q, arc_inv=lambda s: s,
        apex_ball_area=lambda r: math.pi * r * r,
        curvature_sup_global=0.0, apex_inj=math.inf, q_max=math.inf,
    ),
    "paraboloid": RevolutionProfile(
        name="paraboloid", pid=_impl.PROFILE_PARABOLOID,
        curvature=lambda q: 4.0 / (1.0 + 4.0 * np.asarray(q, dtype=float) ** 2) ** 2,
        arc=_parab_arc, arc_inv=_parab_arc_inv,
        apex_ball_area=lambda r: 2.0 * math.pi
        * ((1.0 + 4.0 * _parab_arc_inv(r) ** 2) ** 1.5 - 1.0) / 12.0,
        curvature_sup_global=4.0, apex_inj=math.inf, q_max=math.inf,
    ),
    "dome": RevolutionProfile(
        name="dome", pid=_impl.PROFILE_DOME,
        curvature=lambda q: np.ones_like(np.asarray(q, dtype=float)),
        arc=lambda q: q, arc_inv=lambda s: s,
        apex_ball_area=lambda r: 2.0 * math.pi * (1.0 - math.cos(min(r, math.pi))),
        curvature_sup_global=1.0, apex_inj=math.pi, q_max=math.pi,
    ),
}

_APEX_EPS = 1e-12


class RevolutionSurface(Manifold):
    """Rotationally symmetric surface (n = 2) with r'' <= 0 profiles."""

    def __init__(self, profile: str = "paraboloid", ode_step: float = 2e-3,
                 volume_rays: int = 256, volume_grid: int = 513):
        if profile not in PROFILES:
            raise ValueError(f"unknown profile {profile!r}; have {sorted(PROFILES)}")
        self.profile = PROFILES[profile]
        self.dim = 2
        self.coord_dim = 2
        self.name = f"revolution:profile={profile},n=2"
        self.ode_step = float(ode_step)
        self.volume_rays = volume_rays
        self.volume_grid = volume_grid
        self._volume_tables: dict = {}

    # -- chart handling ------------------------------------------------------

    def normalize(self, q: float, phi: float) -> np.ndarray:
        if q < 0:
            q, phi = -q, phi + math.pi
        if self.profile.q_max < math.inf and q > self.profile.q_max:
            q, phi = 2.0 * self.profile.q_max - q, phi + math.pi
        return np.array([q, float(wrap_angle(phi))])

    def _normalize_batch(self, states: np.ndarray) -> np.ndarray:
        q = states[..., 0].copy()
        phi = states[..., 1].copy()
        neg = q < 0
        q = np.where(neg, -q, q)
        phi = np.where(neg, phi + math.pi, phi)
        if self.profile.q_max < math.inf:
            over = q > self.profile.q_max
            q = np.where(over, 2.0 * self.profile.q_max - q, q)
            phi = np.where(over, phi + math.pi, phi)
        return np.stack([q, wrap_angle(phi)], axis=-1)

    def check_point(self, x, tol=1e-12):
        x = np.asarray(x, dtype=float)
        if x.shape != (2,):
            raise ValueError(f"expected shape (2,), got {x.shape}")
        if x[0] < -tol or x[0] > self.profile.q_max + tol:
            raise ValueError("meridian coordinate outside the profile domain")

    def frame(self, x):
        return np.eye(2)

    def _is_apex(self, x) -> bool:
        return abs(float(x[0])) < _APEX_EPS

    # -- maps ------------------------------------------------------------------

    def exp(self, x, xi):
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        t = float(np.linalg.norm(xi))
        if t < 1e-300:
            return x.copy()
        beta = math.atan2(xi[1], xi[0])
        if self._is_apex(x):
            # departing the apex: the azimuth of the meridian is the frame angle
            return self.normalize(self.profile.arc_inv(t), beta)
        state = _impl.initial_state(self.profile.pid, float(x[0]), float(x[1]),
                                    np.array([beta]))
        nsteps = max(16, int(math.ceil(t / self.ode_step)))
        out = _impl.advance(self.profile.pid, state, np.array([t]), nsteps)
        return self.normalize(float(out[0, 0]), float(out[0, 1]))

    def exp_batch(self, x, xis):
        x = np.asarray(x, dtype=float)
        xis = np.asarray(xis, dtype=float)
        t = np.linalg.norm(xis, axis=1)
        betas = np.arctan2(xis[:, 1], xis[:, 0])
        if self._is_apex(x):
            qs = np.array([self.profile.arc_inv(float(v)) for v in t])
            return self._normalize_batch(np.stack([qs, betas], axis=-1))
        state = _impl.initial_state(self.profile.pid, float(x[0]), float(x[1]), betas)
        nsteps = max(16, int(math.ceil(float(np.max(t)) / self.ode_step)))
        out = _impl.advance(self.profile.pid, state, t, nsteps)
        res = self._normalize_batch(out[:, :2])
        res[t < 1e-300] = x
        return res

    def _log_batch(self, x, zs):
        """Frame components and lengths of log_x at each row of zs."""
        x = np.asarray(x, dtype=float)
        zs = np.atleast_2d(np.asarray(zs, dtype=float))
        arc = self.profile.arc
        if self._is_apex(x):
            t = np.array([arc(float(q)) for q in zs[:, 0]])
            xi = np.column_stack([t * np.cos(zs[:, 1]), t * np.sin(zs[:, 1])])
            return xi, t, np.zeros(len(zs))
        arc0 = arc(float(x[0]))
        arcs = np.array([arc(float(q)) for q in zs[:, 0]])
        beta, tlen, resid = _impl.shoot(
            self.profile.pid, float(x[0]), float(x[1]), zs[:, 0], zs[:, 1],
            arc0, arcs, self.ode_step)
        xi = np.column_stack([tlen * np.cos(beta), tlen * np.sin(beta)])
        return xi, tlen, resid

    def log(self, x, z):
        xi, tlen, resid = self._log_batch(x, np.asarray(z, dtype=float)[None, :])
        t = float(tlen[0])
        if t >= self.injectivity_radius(x) - CUT_GUARD:
            raise CutLocusError("log query beyond the certified injectivity bound")
        if resid[0] > 1e-6 * (1.0 + t):
            raise RuntimeError(f"geodesic shooting failed (residual {resid[0]:.2e})")
        return xi[0]

    def dist(self, x, z):
        _, tlen, resid = self._log_batch(x, np.asarray(z, dtype=float)[None, :])
        if resid[0] > 1e-6 * (1.0 + tlen[0]):
            raise RuntimeError(f"geodesic shooting failed (residual {resid[0]:.2e})")
        return float(tlen[0])

    def dist_batch(self, x, zs):
        _, tlen, _ = self._log_batch(x, zs)
        return tlen

    # -- polar -------------------------------------------------------------------

    def _apex_polar(self, radii, betas):
        radii = np.asarray(radii, dtype=float)
        qs = np.array([self.profile.arc_inv(float(t)) for t in radii])
        _, _, g, _, _ = _impl_coeffs(self.profile.pid, qs)
        pts = np.stack(np.broadcast_arrays(qs[:, None], betas[None, :]), axis=-1)
        jac = np.sqrt(np.maximum(g, 0.0))[:, None] / np.maximum(radii, 1e-300)[:, None]
        jac = np.where(radii[:, None] > 1e-12, jac, 1.0)
        return pts, np.broadcast_to(jac, (len(radii), len(betas))).copy()

    def polar(self, x, radii, dirs):
        x = np.asarray(x, dtype=float)
        radii = np.asarray(radii, dtype=float)
        dirs = np.asarray(dirs, dtype=float)
        betas = np.arctan2(dirs[:, 1], dirs[:, 0])
        if self._is_apex(x):
            pts, jac = self._apex_polar(radii, betas)
            return self._normalize_batch(pts), jac
        states = _impl.ray_grid(self.profile.pid, float(x[0]), float(x[1]),
                                betas, radii, self.ode_step)
        pts = self._normalize_batch(states[:, :, :2])
        tcol = np.maximum(radii, 1e-300)[:, None]
        jac = np.where(radii[:, None] > 1e-12, states[:, :, 4] / tcol, 1.0)
        return pts, jac

    def polar_pairs(self, x, radii, dirs):
        x = np.asarray(x, dtype=float)
        radii = np.asarray(radii, dtype=float)
        dirs = np.asarray(dirs, dtype=float)
        betas = np.arctan2(dirs[:, 1], dirs[:, 0])
        if self._is_apex(x):
            pts, jac = self._apex_polar(radii, betas[:1])
            idx = np.arange(len(radii))
            out = np.stack([pts[idx, 0, 0], betas], axis=-1)
            return self._normalize_batch(out), jac[:, 0]
        state = _impl.initial_state(self.profile.pid, float(x[0]), float(x[1]), betas)
        nsteps = max(16, int(math.ceil(float(np.max(radii)) / self.ode_step)))
        out = _impl.advance(self.profile.pid, state, radii, nsteps)
        pts = self._normalize_batch(out[:, :2])
        jac = np.where(radii > 1e-12, out[:, 4] / np.maximum(radii, 1e-300), 1.0)
        return pts, jac

    def exp_jacobian(self, x, t, v):
        if t >= self.injectivity_radius(x) - CUT_GUARD:
            raise CutLocusError(f"radius {t} reaches the certified cut bound")
        if t <= 1e-12:
            return 1.0
        _, jac = self.polar_pairs(x, np.array([t]), np.asarray(v, dtype=float)[None, :])
        return float(jac[0])

    # -- volumes --------------------------------------------------------------

    def ball_volume(self, x, r):
        return float(self.ball_volume_fn(x, max(r * 1.25, 1e-6))(np.array([r]))[0])

    def ball_volume_fn(self, x, rmax):
        x = np.asarray(x, dtype=float)
        if self._is_apex(x):
            area = self.profile.apex_ball_area
            def fn(r):
                r = np.atleast_1d(np.asarray(r, dtype=float))
                return np.array([area(float(v)) for v in r])
            return fn
        key = (round(float(x[0]), 14), round(float(x[1]), 14), round(float(rmax), 14))
        table = self._volume_tables.get(key)
        if table is None:
            table = self._build_volume_table(x, rmax)
            self._volume_tables[key] = table
        grid, vols = table
        return lambda r: np.interp(np.asarray(r, dtype=float), grid, vols)

    def _build_volume_table(self, x, rmax):
        betas = 2.0 * math.pi * (np.arange(self.volume_rays) + 0.5) / self.volume_rays
        grid = np.linspace(0.0, rmax, self.volume_grid)
        states = _impl.ray_grid(self.profile.pid, float(x[0]), float(x[1]),
                                betas, grid[1:], self.ode_step)
        jmean = np.concatenate([[0.0], states[:, :, 4].mean(axis=1)])
        ring = 2.0 * math.pi * np.maximum(jmean, 0.0)
        vols = np.concatenate([[0.0], np.cumsum((ring[1:] + ring[:-1]) / 2.0 * np.diff(grid))])
        return grid, vols

    # -- radii and curvature ------------------------------------------------------

    def injectivity_radius(self, x):
        if self.profile.name == "dome":
            return math.pi
        conj = self.conjugate_radius(x)
        bound = min(self.profile.apex_inj, conj) - self.profile.arc(float(x[0]))
        return max(bound, 0.0)

    def conjugate_radius(self, x):
        k = self.profile.curvature_sup_global
        return math.inf if k <= 0 else math.pi / math.sqrt(k)

    def sectional_curvature_sup(self, x, r, samples: int = 10_000):
        s0 = self.profile.arc(float(x[0]))
        qlo = self.profile.arc_inv(max(s0 - r, 0.0))
        qhi = self.profile.arc_inv(s0 + r)
        qs = np.linspace(qlo, qhi, samples)
        return float(np.max(self.profile.curvature(qs)))

    def curvature_at(self, x) -> float:
        """Gauss curvature at a point (closed form)."""
        return float(self.profile.curvature(np.asarray([float(x[0])]))[0])


def _impl_coeffs(pid, q):
    """Metric coefficients through whichever backend module is active."""
    from . import _revol_fallback
    return _revol_fallback._coeffs(pid, np.asarray(q, dtype=float))
