"""Exception hierarchy for geometric and numerical failure modes.

Every error that signals a *geometric* degeneracy (rather than a programming
mistake) derives from :class:`GeometryError`, so callers can catch the whole
family while tests assert the precise subclass.
"""


class GeometryError(Exception):
    """Base class for all geometric/numerical failures in this package."""


class DegenerateSpan(GeometryError):
    """Join or meet of coincident objects (no well-defined span)."""


class LineInPlane(GeometryError):
    """A line lies entirely inside the plane it was to be intersected with."""


class PointOnLine(GeometryError):
    """A point lies on the line it was supposed to extend to a plane."""


class NotCollinear(GeometryError):
    """Four points fed to the cross-ratio do not share a line."""


class IndeterminateRatio(GeometryError):
    """Cross-ratio hit a 0/0 configuration."""


class NotRealSplit(GeometryError):
    """A matrix expected to be real-split has a complex eigenvalue pair."""


class ModulusCollision(GeometryError):
    """Two eigenvalue moduli are too close to order a flag reliably."""


class NotHyperbolic(GeometryError):
    """A 2x2 matrix with |trace| <= 2 where a hyperbolic element is required."""


class UnsupportedGenus(GeometryError):
    """Surface-group constructions require genus >= 2."""


class CoincidentPoints(GeometryError):
    """Boundary points expected to be pairwise distinct coincide."""


class NotUnimodular(GeometryError):
    """Input matrix does not have determinant 1 within tolerance."""


class NoInvariantForm(GeometryError):
    """Invariant-form solve did not find a 1-dimensional solution space."""


class NoConvergence(GeometryError):
    """Gauss-Newton projection failed to reach the target residual."""


class TooFewSamples(GeometryError):
    """A sampled curve ended up with too few distinct boundary angles."""


class DegenerateConfiguration(GeometryError):
    """Developing-map lines failed to meet inside their common plane."""


class RankDeficient(GeometryError):
    """Stacked covectors were expected to have full rank and do not."""


class SkewLines(GeometryError):
    """Two lines expected to meet (certification identity) do not."""


class AmbiguousCount(GeometryError):
    """Zero-cluster count along the plane family is neither 1 nor 3.

    Carries the observed count; reported rather than guessed.
    """

    def __init__(self, count: int, message: str = ""):
        self.count = count
        super().__init__(message or f"ambiguous zero-cluster count: {count}")


class NotConvexSamples(GeometryError):
    """Leaf boundary samples fail the polygon-convexity test."""


class NotProperlyConvex(GeometryError):
    """Convex sample set admits no separating projective line."""


class NotTransverse(GeometryError):
    """Lagrangian planes required to be pairwise transverse are not."""
