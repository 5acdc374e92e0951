"""Exterior-algebra complexes, the BGG functor and Tate resolutions for vector bundles on P^n."""

from .exactla import GF, QQ, HAVE_EXTENSION, Mat, parse_field

__version__ = "0.1.0"

__all__ = ["GF", "QQ", "HAVE_EXTENSION", "Mat", "parse_field", "__version__"]
