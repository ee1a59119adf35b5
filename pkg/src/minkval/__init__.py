"""minkval: zonal convolution calculus and integral geometry of Minkowski
valuations on convex polytopes."""

from . import constants, convex, harmonics, integral_geom, valuation, zonal

__version__ = "0.1.0"

__all__ = ["constants", "convex", "harmonics", "integral_geom", "valuation",
           "zonal", "__version__"]
