"""Numerical tolerances used across the package.

All tolerances live here as module-level defaults, bundled into a
:class:`Tolerances` value so callers (notably the CLI's
``--tolerance-profile``) can substitute a tighter profile without touching
call sites.  Functions take an optional ``tol`` argument defaulting to
:data:`DEFAULT`.
"""

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    # Plücker quadratic-relation residual, relative to the norm scale.
    plucker: float = 1e-12
    # Incidence residuals (point-on-line, line-in-plane, point-on-plane).
    incidence: float = 1e-10
    # Chordal distance below which two projective objects are "equal".
    chordal_eq: float = 1e-10
    # Eigenpair residual ||Mv - lambda v||, relative to the spectral scale.
    eigen_residual: float = 1e-9
    # Minimum ratio of consecutive eigenvalue moduli (1 + gap_margin).
    gap_margin: float = 1e-8
    # Cross-ratio invariance / identity checks.
    cross_ratio: float = 1e-9
    # Surface-group relation residual for valid representations.
    relation: float = 1e-9
    # Gauss-Newton stopping residual.
    projection: float = 1e-10
    # Agreement between sampled flags and closed forms / recoveries.
    flag_match: float = 1e-8
    # Angle dedup resolution for sampled boundary points.
    angle_dedup: float = 1e-10
    # Strict-inequality slack treated as zero (cone membership etc.).
    strict_slack: float = 1e-12


DEFAULT = Tolerances()

# The strict profile tightens the residual-style tolerances by one order of
# magnitude; hard floating-point floors (Plücker relation, dedup resolution)
# stay put because they already sit near machine precision.
STRICT = replace(
    DEFAULT,
    incidence=1e-11,
    chordal_eq=1e-11,
    eigen_residual=1e-10,
    cross_ratio=1e-10,
    relation=1e-10,
    flag_match=1e-9,
)

PROFILES = {"default": DEFAULT, "strict": STRICT}
