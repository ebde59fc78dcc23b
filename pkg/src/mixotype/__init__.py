"""Mixed-type 2x2 hydrodynamic systems: classification, transition-line
geometry, crossing verdicts and time evolution."""

from .errors import *  # noqa: F401,F403
from .expr import parse, evaluate, differentiate  # noqa: F401
from .syscore import (SystemDef, Provenance, PointType, classify, char_speeds,  # noqa: F401
                      hodograph_speeds, hodograph_pde_coefficients, beltrami_dilation,
                      swap_variables, discriminant)

__version__ = "0.1.0"
