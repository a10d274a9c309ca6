"""Numerics for the discrete double Hilbert transform along polynomial surfaces.

Modules: polynomial, newton, rational, arcs, numtheory, expsum, oscint,
verify, cli.
"""

from .polynomial import Polynomial, parse, render

__version__ = "0.1.0"
__all__ = ["Polynomial", "parse", "render", "__version__"]
