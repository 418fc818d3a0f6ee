"""Exact rational linear algebra, linear programming and double description."""

from .dd import DDError, Facet, Hull, affine_hull, check_hull, dd_facets, dd_vertices, extreme_rays
from .linalg import (as_rational, gcd_of, integer_scaling, inverse, lcm_of_denominators, nullspace, rank,
                     rank_mod_p, rref, solve_square)
from .lp import (CertificateError, LinearProgram, LpError, LpResult, check_feasible, maximize_over_inequalities,
                 solve_lp, verify)
