"""Cut-and-project model sets over Euclidean and p-adic internal spaces:
construction, order diagnostics and diffraction."""

from .exact import Golden, Icosian, PAdicApprox, golden_conjugate, icosian_generators
from .scheme import (CutProjectScheme, InternalSpace, builtin_scheme, dual_lattice,
                     make_fibonacci_scheme, make_icosian_scheme, make_robinson_scheme,
                     restrict_to_pure_quaternions, star_map)
from .window import Ball, Box, CosetUnion, EmptyWindow, Interval, Membership, Polytope

__version__ = "0.1.0"
