"""Time-ordered local, Bell-local and post-selection-local sets."""

from .facets import cache_dir, load_facet_records, records_to_functionals, toloc_facets
from .functionals import (BUILTINS, CHSH_PATTERNS, CORRELATOR, PROBABILITY, BellFunctional, builtin,
                          chsh_first_step, chsh_second_step, chsh_values, conditioned_chsh, load_functional,
                          positivity, sequential_chsh)
from .membership import (Membership, PostLocMaximum, PostLocMembership, fine_local, hull_membership,
                         lp_local, maximize_over_postloc, member_bell_local, member_postloc, member_toloc,
                         verify_membership)
from .strategies import (CapExceeded, DeterministicStrategy, TimeOrderedModel, enumerate_local_vertices,
                         enumerate_toloc_vertices, local_vertex_set, time_ordered_strategies,
                         toloc_vertex_set)
from .symmetry import FULL, NONADAPTIVE, Classification, Orbit, classify_facets, generators, orbit_of
