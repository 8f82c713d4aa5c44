"""Model manifolds with closed-form geometry."""

from __future__ import annotations

from .base import CUT_GUARD, GeometryReport, Manifold, fd_gradient
from .euclidean import Euclidean
from .revolution import PROFILES, RevolutionSurface, backend_name, get_backend
from .sphere import Sphere


def parse_manifold(spec: str) -> Manifold:
    """Build a manifold from its specification string.

    Accepted forms: ``euclid:n=2``, ``sphere:n=2,K=1.0``,
    ``revolution:profile=paraboloid,n=2``.
    """
    from ..errors import ConfigError

    try:
        kind, _, rest = spec.partition(":")
        kv = {}
        if rest:
            for item in rest.split(","):
                key, _, val = item.partition("=")
                if not val:
                    raise ValueError(f"malformed field {item!r}")
                kv[key.strip()] = val.strip()
        if kind == "euclid":
            return Euclidean(dim=int(kv.pop("n")))
        if kind == "sphere":
            return Sphere(dim=int(kv.pop("n")), curvature=float(kv.pop("K", 1.0)))
        if kind == "revolution":
            n = int(kv.pop("n", 2))
            if n != 2:
                raise ValueError("surfaces of revolution require n=2")
            return RevolutionSurface(profile=kv.pop("profile"))
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"bad manifold spec {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown manifold kind in spec {spec!r}")


__all__ = [
    "CUT_GUARD", "Euclidean", "GeometryReport", "Manifold", "PROFILES",
    "RevolutionSurface", "Sphere", "backend_name", "fd_gradient",
    "get_backend", "parse_manifold",
]
