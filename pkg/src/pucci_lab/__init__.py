"""Nonlocal Pucci-type extremal operators on model Riemannian manifolds."""

__version__ = "0.1.0"
