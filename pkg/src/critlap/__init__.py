"""Numerical toolkit for vector-valued anisotropic p-Laplacian problems at the critical Sobolev exponent."""

__version__ = "0.1.0"

from .errors import CritlapError  # noqa: E402

__all__ = ["__version__", "CritlapError"]
