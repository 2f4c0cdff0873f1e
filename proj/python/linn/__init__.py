"""Lightweight two-stage neural binaural audio synthesis."""

try:
    from linn._linn import *  # noqa: F401,F403  (installed package layout)
except ImportError:
    from _linn import *  # noqa: F401,F403  (in-tree CMake build layout)

__version__ = "0.1.0"
