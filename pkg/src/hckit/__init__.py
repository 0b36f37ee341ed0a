"""Convexity certificates for planar images of quadratic maps.

Given a pair of quadratic functions ``F = (f, g)`` on R^n and a convex cone
spanned by two independent plane vectors, the set ``F(R^n) + cone`` is
convex; this package turns that fact into executable artifacts: it
classifies images of lines (point / ray / line / parabola), constructs
explicit convex-combination witnesses with audit traces, decides the
two-quadratic alternative (multiplier vs. counterexample), and restricts
everything to affine manifolds.
"""

from .config import DEFAULT_SEARCH, DEFAULT_TOLERANCES, SearchConfig, ToleranceConfig
from .cone2d import Cone2, ConeCoords, contains, coords, make_cone, positive_quadrant
from .conic2d import (Conic2, ConicClass, chord_interior_sign, classify,
                      first_negative_ray_hit, normalize_parabola,
                      ray_intersections)
from .quadmap import (AffineManifold, LineImage, LineImageKind, QuadraticForm,
                      QuadraticMap, classify_line_image, eval_map, line_coeffs,
                      manifold_from_linear_system, preimage_on_line,
                      restrict_to_manifold)
from .slemma import (OracleVerdict, Outcome, SLemmaVerdict, brute_force_oracle,
                     decide, dual_lower_bound, dual_value, slater_check)
from .smallmat import (EigenDecomp, MinResult, eigh, min_of_quadratic,
                       null_space_basis, numerical_rank, symmetrize)
from .witness import (Branch, ConePoint, ConvexityReport, WitnessCertificate,
                      cone_point, convexity_probe, verify_certificate,
                      witness_convex_combination)

__version__ = "0.1.0"

__all__ = [
    "AffineManifold", "Branch", "Cone2", "ConeCoords", "ConePoint", "Conic2",
    "ConicClass", "ConvexityReport", "DEFAULT_SEARCH", "DEFAULT_TOLERANCES",
    "EigenDecomp", "LineImage", "LineImageKind", "MinResult", "OracleVerdict",
    "Outcome", "QuadraticForm", "QuadraticMap", "SLemmaVerdict", "SearchConfig",
    "ToleranceConfig", "WitnessCertificate", "brute_force_oracle",
    "chord_interior_sign", "classify", "classify_line_image", "cone_point",
    "contains", "convexity_probe", "coords", "decide", "dual_lower_bound",
    "dual_value", "eigh", "eval_map", "first_negative_ray_hit", "line_coeffs",
    "make_cone", "manifold_from_linear_system", "min_of_quadratic",
    "normalize_parabola", "null_space_basis", "numerical_rank",
    "positive_quadrant", "preimage_on_line", "ray_intersections",
    "restrict_to_manifold", "slater_check", "symmetrize",
    "verify_certificate", "witness_convex_combination",
]
