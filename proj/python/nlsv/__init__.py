"""Spectral toolkit for the 3d cubic NLS with a decaying potential.

Kato-class diagnostics, Schrodinger-operator spectral analysis, heat-kernel
fractional calculus, dispersive/Strichartz measurement, and the Duhamel
contraction solver, backed by the C++ core in nlsv._core.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
