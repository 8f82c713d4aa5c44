"""The admissible kernel class: densities pinched between ellipticity bounds.

A density nu_x(z) is admissible when

* ``lam * k(x,z) <= nu_x(z) <= Lam * k(x,z)`` where
  ``k(x,z) = (2 - sigma) / (mu_g(B(x, d(x,z))) * d(x,z)^sigma)`` is the model
  kernel (the order-normalizing ``2 - sigma`` factor lives inside ``k``), and
* ``nu_x(z) = nu_x(T_x z)`` under geodesic reflection through x, whenever
  d(x,z) is below the injectivity radius.

Densities are represented by a radial/angular weight in [lam, Lam]
multiplying the model kernel, which keeps reflection symmetry structural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import SingularityError
from .manifolds.base import Manifold


@dataclass(frozen=True)
class KernelParams:
    """Ellipticity constants and kernel order."""

    lam: float
    Lam: float
    sigma: float
    sigma0: float = 0.5

    def __post_init__(self):
        if not (0 < self.lam <= self.Lam):
            raise ValueError("need 0 < lam <= Lam")
        if not (0 < self.sigma0 <= self.sigma < 2):
            raise ValueError("need 0 < sigma0 <= sigma < 2")

    def with_sigma(self, sigma: float) -> "KernelParams":
        return KernelParams(self.lam, self.Lam, sigma, min(self.sigma0, sigma))


def model_density(manifold: Manifold, x: np.ndarray, z: np.ndarray,
                  params: KernelParams) -> float:
    """Model kernel k(x, z); raises SingularityError on the diagonal."""
    d = manifold.dist(x, z)
    if d <= 0.0:
        raise SingularityError("model kernel is singular at z = x")
    vol = manifold.ball_volume(x, d)
    return (2.0 - params.sigma) / (vol * d**params.sigma)


def model_density_radial(vol: np.ndarray, t: np.ndarray, sigma: float) -> np.ndarray:
    """Vectorized model kernel from precomputed ball volumes."""
    return (2.0 - sigma) / (vol * np.asarray(t, dtype=float) ** sigma)


@dataclass
class KernelDensity:
    """An admissible density: weight(t, v) in [lam, Lam] times the model kernel.

    ``weight`` receives radial distances ``t`` of shape (k, 1) or (m,) and
    frame-coordinate unit directions ``v`` of shape (m, n); it must be even
    in v.  ``v`` may be None for queries where only the radial part matters
    (beyond the injectivity radius symmetry is not required).
    """

    manifold: Manifold
    params: KernelParams
    weight: Callable[[np.ndarray, np.ndarray | None], np.ndarray]
    label: str = "custom"
    constant_weight: float | None = None  # set when weight is a constant

    def nu(self, x: np.ndarray, z: np.ndarray) -> float:
        """Pointwise density value."""
        d = self.manifold.dist(x, z)
        if d <= 0.0:
            raise SingularityError("density is singular at z = x")
        base = model_density(self.manifold, x, z, self.params)
        if d < self.manifold.injectivity_radius(x):
            xi = self.manifold.log(x, z)
            v = (xi / d)[None, :]
        else:
            v = None
        w = np.asarray(self.weight(np.asarray([d]), v), dtype=float)
        return float(base * w.reshape(-1)[0])


def parse_kernel(spec: str, manifold: Manifold, params: KernelParams) -> KernelDensity:
    """Kernel specification strings: ``model``, ``const:w=<v>``, ``aniso:seed=<k>``."""
    from .errors import ConfigError

    if spec == "model":
        return constant_weight_kernel(manifold, params, 1.0, label="model")
    kind, _, rest = spec.partition(":")
    kv = dict(item.split("=", 1) for item in rest.split(",") if "=" in item)
    if kind == "const":
        try:
            w = float(kv["w"])
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad kernel spec {spec!r}") from exc
        return constant_weight_kernel(manifold, params, w, label=spec)
    if kind == "aniso":
        try:
            seed = int(kv["seed"])
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad kernel spec {spec!r}") from exc
        return anisotropic_family(manifold, params, seed)
    raise ConfigError(f"unknown kernel spec {spec!r}")


def constant_weight_kernel(manifold: Manifold, params: KernelParams, w: float,
                           label: str | None = None) -> KernelDensity:
    """Density w * k with a constant weight; admissible for lam <= w <= Lam."""
    if not (params.lam <= w <= params.Lam):
        raise ValueError("constant weight outside [lam, Lam]")

    def weight(t, v):
        t = np.asarray(t, dtype=float)
        m = 1 if v is None else np.shape(v)[0]
        if t.ndim == 2:
            return np.full((t.shape[0], m), w)
        return np.full(t.shape, w)

    return KernelDensity(manifold, params, weight, label=label or f"const:w={w:g}",
                         constant_weight=w)


def anisotropic_family(manifold: Manifold, params: KernelParams, seed: int) -> KernelDensity:
    """Seeded admissible density with radial and even angular modulation.

    weight = lam + (Lam - lam) * g(t) * h(v) with g in [0, 1] smooth radial
    and h(v) = v^T Q v for a positive semidefinite Q with spectrum in [0, 1];
    h is even, so reflection symmetry holds wherever the pairing is defined.
    """
    rng = np.random.default_rng(seed)
    n = manifold.dim
    freq = float(rng.uniform(0.5, 3.0))
    phase = float(rng.uniform(0.0, 2.0 * math.pi))
    eigs = rng.uniform(0.0, 1.0, size=n)
    basis, _ = np.linalg.qr(rng.normal(size=(n, n)))
    quad = basis @ np.diag(eigs) @ basis.T

    lam, Lam = params.lam, params.Lam

    def weight(t, v):
        t = np.asarray(t, dtype=float)
        g = 0.5 * (1.0 + np.cos(freq * np.arctan(t) + phase))
        if v is None:
            h = 0.5
        else:
            v = np.asarray(v, dtype=float)
            h = np.einsum("mi,ij,mj->m", v, quad, v)
        # broadcasting: (k,1) radial against (m,) angular gives (k,m)
        return lam + (Lam - lam) * g * h

    return KernelDensity(manifold, params, weight, label=f"aniso:seed={seed}")


@dataclass
class AdmissibilityReport:
    ok: bool
    worst_ellipticity: float        # positive = violation magnitude
    worst_symmetry: float
    witness: tuple | None = field(default=None)
    samples: int = 0


def check_admissible(density: KernelDensity, center: np.ndarray, radius: float,
                     sample_budget: int = 200, tol: float = 1e-8) -> AdmissibilityReport:
    """Sample the two admissibility invariants inside a working ball."""
    if sample_budget < 1:
        raise ValueError("sample_budget must be >= 1")
    man = density.manifold
    params = density.params
    n_centers = max(1, int(round(math.sqrt(sample_budget / 8))))
    n_targets = max(4, sample_budget // max(n_centers, 1))
    xs, _, _ = man.sample_ball(center, radius / 3.0, n_centers, skip=17)
    worst_ell = -math.inf
    worst_sym = -math.inf
    witness = None
    count = 0
    for x in xs:
        inj = man.injectivity_radius(x)
        zs, _, _ = man.sample_annulus(x, radius * 1e-3, radius, n_targets, skip=101)
        for z in zs:
            d = man.dist(x, z)
            if d <= 0:
                continue
            count += 1
            base = model_density(man, x, z, params)
            nu = density.nu(x, z)
            ell = max(params.lam * base - nu, nu - params.Lam * base) / base
            if ell > worst_ell:
                worst_ell = ell
                if ell > tol:
                    witness = (x.copy(), z.copy())
            if d < inj - 1e-9:
                zr = man.reflect(x, z)
                sym = abs(nu - density.nu(x, zr)) / base
                if sym > worst_sym:
                    worst_sym = sym
                    if sym > tol:
                        witness = (x.copy(), z.copy())
    ok = worst_ell <= tol and worst_sym <= tol
    return AdmissibilityReport(ok=ok, worst_ellipticity=float(worst_ell),
                               worst_symmetry=float(worst_sym),
                               witness=witness, samples=count)
