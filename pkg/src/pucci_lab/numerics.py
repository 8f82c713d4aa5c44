"""Shared numerical utilities: quadrature nodes, direction sets, streams.

Everything here is deterministic for a fixed input; low-discrepancy streams
are unscrambled Halton sequences so reruns are bit-reproducible.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import qmc

# Gauss-Legendre nodes on (-1, 1); the 3-point rule is the reported value,
# the 2-point rule is the embedded error probe.
GAUSS3_NODES = np.array([-math.sqrt(3.0 / 5.0), 0.0, math.sqrt(3.0 / 5.0)])
GAUSS3_WEIGHTS = np.array([5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
GAUSS2_NODES = np.array([-1.0 / math.sqrt(3.0), 1.0 / math.sqrt(3.0)])
GAUSS2_WEIGHTS = np.array([1.0, 1.0])


def unit_ball_volume(n: int) -> float:
    """Volume of the n-dimensional Euclidean unit ball."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def unit_sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^(n-1) in R^n."""
    return n * unit_ball_volume(n)


def halton(dim: int, count: int, skip: int = 0) -> np.ndarray:
    """Deterministic low-discrepancy points in [0,1)^dim."""
    sampler = qmc.Halton(d=dim, scramble=False)
    if skip:
        sampler.fast_forward(skip)
    return sampler.random(count)


def kahan_sum(values: np.ndarray) -> float:
    """Compensated sum in fixed index order."""
    total = 0.0
    comp = 0.0
    for v in np.asarray(values, dtype=float).ravel():
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def symmetric_directions(n: int, count: int) -> np.ndarray:
    """Antipodally symmetric unit directions in R^n, shape (count, n).

    The set is ordered so that direction ``i + count//2`` is the antipode of
    direction ``i``; ``count`` must be even.  Deterministic.
    """
    if count % 2 != 0:
        raise ValueError("direction count must be even")
    half = count // 2
    if n == 2:
        theta = math.pi * (np.arange(half) + 0.5) / half
        base = np.column_stack([np.cos(theta), np.sin(theta)])
    elif n == 3:
        # Fibonacci points on the upper hemisphere.
        golden = (1.0 + math.sqrt(5.0)) / 2.0
        i = np.arange(half)
        z = (i + 0.5) / half  # in (0, 1): upper hemisphere
        phi = 2.0 * math.pi * ((i / golden) % 1.0)
        rho = np.sqrt(1.0 - z * z)
        base = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    else:
        raise ValueError("direction sets implemented for n = 2, 3 only")
    return np.vstack([base, -base])


def ball_parameter_stream(n: int, count: int, skip: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Low-discrepancy (radius-fraction, direction) pairs for ball sampling.

    Returns ``(t, v)`` with ``t`` in (0,1) distributed like the Euclidean
    radial law t^(n-1) dt and ``v`` unit directions; together with a Jacobian
    weight these estimate Riemannian ball integrals.
    """
    pts = halton(n, count, skip=skip)
    t = pts[:, 0] ** (1.0 / n)
    if n == 2:
        theta = 2.0 * math.pi * pts[:, 1]
        v = np.column_stack([np.cos(theta), np.sin(theta)])
    elif n == 3:
        z = 2.0 * pts[:, 1] - 1.0
        phi = 2.0 * math.pi * pts[:, 2]
        rho = np.sqrt(np.maximum(1.0 - z * z, 0.0))
        v = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    else:
        raise ValueError("ball streams implemented for n = 2, 3 only")
    return t, v


def wrap_angle(a: np.ndarray) -> np.ndarray:
    """Wrap angles to (-pi, pi]."""
    out = np.mod(np.asarray(a) + math.pi, 2.0 * math.pi) - math.pi
    return np.where(out <= -math.pi, math.pi, out)


def power_law_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares fit y = C * x^p in log-log space; returns (p, C)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = (x > 0) & (y > 0)
    if mask.sum() < 2:
        return float("nan"), float("nan")
    lx = np.log(x[mask])
    ly = np.log(y[mask])
    p, logc = np.polyfit(lx, ly, 1)
    return float(p), float(math.exp(logc))
