"""Depth and Stanley depth of reduced intersections of monomial prime ideals."""

__version__ = "0.1.0"

from .core import (ZERO, FamilyError, PrimeFamily, RingContext, StanleyLabError, canonical_form,
                   decode_family, family_from_masks, permute_family, reduce_family,
                   restrict_family, subfamily, sum_family, support_family, varset)
from .depth import DepthReport, depth_by_formula, depth_oracle, projective_dimension
from .invariants import (big_size, bipartition_condition, distinguished_pair_shape,
                         has_disjoint_defect_pairs, min_pair_defect, non_absorbed,
                         pair_sum_table, size)
from .lab import (ConjectureVerdict, Status, check_instance, enumerate_families,
                  golden_fixtures, sweep)
from .sdepth import (BoundCertificate, CharPoset, IntervalPartition, SplitResult,
                     char_poset, exact_sdepth, prime_sdepth, sdepth_lower_bound, split,
                     verify_direct_sum)
