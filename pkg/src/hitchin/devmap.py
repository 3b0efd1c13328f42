"""Developing maps of foliated projective structures and their leaf geometry.

A certified flag curve assigns to each boundary parameter a full flag
(point, line, plane).  The hierarchy map ``xi_t`` restricts the curve to a
single plane; ``dev`` composes two such restrictions into the developing
map of the geodesic-flow space, whose image leaves are properly convex
domains; ``dev_prime`` is the non-convex companion sending a triple to the
common point of its three planes.  Classification of image points into the
one-real-root region (Omega) and the three-real-root region (Lambda) is by
cubic discriminant in the polynomial model and by tangent-plane zero
counting in general.  Reconstruction identities (recovering the point from
leaf lines, the line from endpoint data) double as certification checks.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import (
    AmbiguousCount,
    CoincidentPoints,
    DegenerateConfiguration,
    NotConvexSamples,
    NotProperlyConvex,
    RankDeficient,
    SkewLines,
)
from .frenet import FlagCurve, veronese_flag
from .projective import (
    ProjLine,
    ProjPlane,
    ProjPoint,
    canonical,
    chordal,
    join,
    line_plane_meet,
    meet_planes,
)
from .reps import Rep4, diag_embed
from .surface import BoundaryPoint, BoundaryTriple, mobius_angle

__all__ = [
    "LeafDomain",
    "DevResult",
    "SectorVerdict",
    "CheckResult",
    "MODEL_BASE_POINT",
    "DEV_CSV_HEADER",
    "xi_t",
    "dev",
    "dev_prime",
    "geodesic_endpoints",
    "classify",
    "xi1_from_lines",
    "xi2_recover",
    "leaf_boundary",
    "sector_check",
    "equivariance_residual",
    "convex_complement_check",
    "proper_convexity_witness",
    "model_base_triple",
    "dev_table_csv",
    "leaf_to_svg",
]

#: The base point of the polynomial model: X(X^2 + Y^2) = (1, 0, 1, 0).
MODEL_BASE_POINT = np.array([1.0, 0.0, 1.0, 0.0])

#: Column header of the developing-map sample table.
DEV_CSV_HEADER = "t_plus,t_zero,t_minus,x0,x1,x2,x3,class"


# ---------------------------------------------------------------------------
# result types


@dataclass(frozen=True)
class DevResult:
    """A developing-map evaluation.

    Attributes
    ----------
    triple : BoundaryTriple or tuple of BoundaryPoint
        The evaluated parameter triple.
    point : ProjPoint
        The image point.
    variant : str
        ``"dev"`` (convex branch, point inside the t_plus plane) or
        ``"dev_prime"`` (triple-plane intersection).
    """

    triple: object
    point: ProjPoint
    variant: str


@dataclass(frozen=True)
class LeafDomain:
    """Sampled boundary of the convex leaf domain inside one plane.

    Attributes
    ----------
    t : BoundaryPoint
        Leaf parameter.
    plane : ProjPlane
        The plane containing the domain.
    samples : tuple of (BoundaryPoint, ProjPoint)
        Boundary samples, sorted by parameter angle; every point is
        incident to ``plane`` within 1e-10.
    chart : (4, 3) ndarray
        Orthonormal chart of the plane; ``p @ chart`` gives projective
        coordinates whose last entry is positive on every sample, and the
        induced affine polygon runs counterclockwise.
    convexity_margin : float
        Minimum normalized cross product of consecutive polygon edges.
    witness : ProjLine
        A line inside the plane disjoint from the sample hull (the chart's
        line at infinity), certifying proper convexity.
    """

    t: BoundaryPoint
    plane: ProjPlane
    samples: tuple
    chart: np.ndarray
    convexity_margin: float
    witness: ProjLine

    def __post_init__(self):
        h = self.plane.covector
        prev = None
        for t_prime, pt in self.samples:
            if abs(float(h @ pt.coords)) >= 1e-10:
                raise ValueError("boundary sample not incident to the plane")
            if prev is not None and t_prime.angle < prev:
                raise ValueError("samples must be sorted by parameter angle")
            prev = t_prime.angle

    def polygon(self) -> np.ndarray:
        """Affine chart coordinates of the boundary samples, (n, 2)."""
        coords = np.array([pt.coords for _, pt in self.samples]) @ self.chart
        return coords[:, :2] / coords[:, 2:3]


@dataclass(frozen=True)
class SectorVerdict:
    """Structured outcome of the diagonal-embedding sector check."""

    collinearity_margin: float
    convexity_margin: float
    limit_mismatch: float
    properly_convex: bool
    description: str


class CheckResult(int):
    """Boolean check outcome carrying an optional counterexample witness."""

    def __new__(cls, value: bool, witness=None):
        obj = super().__new__(cls, bool(value))
        obj.witness = witness
        return obj

    def __repr__(self):
        return f"CheckResult({bool(self)}, witness={self.witness!r})"


# ---------------------------------------------------------------------------
# raw-array helpers


def _flag_data(curve: FlagCurve, t: BoundaryPoint):
    """(point, pluecker, covector) arrays at a parameter.

    Sampled parameters are served from the curve; unsampled ones fall back
    to the closed form when the representation is the irreducible model,
    and raise ValueError otherwise.
    """
    try:
        i = curve.locate(t)
    except ValueError:
        if curve.rep.provenance == "irreducible":
            f = veronese_flag(t)
            return (f.point.coords, np.asarray(f.line.pluecker),
                    f.plane.covector)
        raise
    return curve.points[i], curve.lines[i], curve.planes[i]


def _chart_basis(h) -> np.ndarray:
    """Orthonormal basis of the kernel of a plane covector, as columns."""
    h = np.asarray(h, dtype=float)
    _, _, vt = np.linalg.svd(h[None, :])
    return vt[1:].T


def _meet_lines_in_plane(h, line_a, line_b):
    """Intersection of two lines spanned by point pairs inside a plane.

    Returns (point, margin) where margin is the normalized chart cross
    product; small margin means the lines coincide or a span degenerated.
    """
    basis = _chart_basis(h)
    a, b = line_a
    c, d = line_b
    w1 = np.cross(a @ basis, b @ basis)
    w2 = np.cross(c @ basis, d @ basis)
    n1, n2 = np.linalg.norm(w1), np.linalg.norm(w2)
    if n1 < 1e-14 or n2 < 1e-14:
        return None, 0.0
    m = np.cross(w1 / n1, w2 / n2)
    margin = float(np.linalg.norm(m))
    if margin < 1e-10:
        return None, margin
    return basis @ m, margin


def _as_three_points(triple):
    """Unpack a BoundaryTriple or a 3-sequence of pairwise distinct points."""
    if isinstance(triple, BoundaryTriple):
        return triple.t_plus, triple.t_zero, triple.t_minus
    ts = tuple(triple)
    if len(ts) != 3:
        raise ValueError("expected a BoundaryTriple or three boundary points")
    for i in range(3):
        for j in range(i + 1, 3):
            if ts[i].cyclic_dist(ts[j]) < 1e-12:
                raise CoincidentPoints("parameters must be pairwise distinct")
    return ts


# ---------------------------------------------------------------------------
# hierarchy and developing maps


def xi_t(curve: FlagCurve, t: BoundaryPoint, t_prime: BoundaryPoint):
    """The flag curve of the leaf at ``t``: point and tangent line at ``t_prime``.

    For distinct parameters the point is the meet of the line at
    ``t_prime`` with the plane at ``t``, and the line is the meet of the
    two planes; at ``t_prime = t`` the definition branch returns the
    curve's own point and line.

    Returns
    -------
    (ProjPoint, ProjLine)
        Point incident to the line.
    """
    if t.cyclic_dist(t_prime) < 1e-12:
        p, lam, _ = _flag_data(curve, t)
        return ProjPoint(p), ProjLine(lam)
    _, lam_prime, h_prime = _flag_data(curve, t_prime)
    _, _, h_t = _flag_data(curve, t)
    point = line_plane_meet(ProjLine(lam_prime), ProjPlane(h_t))
    line = meet_planes(ProjPlane(h_t), ProjPlane(h_prime))
    return point, line


def dev(triple: BoundaryTriple, curve: FlagCurve) -> DevResult:
    """Developing map of the geodesic-flow space at an oriented triple.

    The image is the intersection, inside the plane at ``t_plus``, of the
    line through xi1(t_plus) and xi_t(t_plus)(t_minus) with the line
    through xi_t(t_minus)(t_plus) and xi_t(t_plus)(t_zero).

    Raises
    ------
    DegenerateConfiguration
        If the two lines fail to meet transversally in the plane, which
        signals a non-certified curve.
    """
    tp, t0, tm = triple.t_plus, triple.t_zero, triple.t_minus
    xi1_p, _, h_p = _flag_data(curve, tp)
    b = xi_t(curve, tp, tm)[0].coords
    c = xi_t(curve, tm, tp)[0].coords
    d = xi_t(curve, tp, t0)[0].coords
    point, margin = _meet_lines_in_plane(h_p, (xi1_p, b), (c, d))
    if point is None:
        raise DegenerateConfiguration(
            f"leaf lines meet with margin {margin:.3e} at t_plus = {tp}")
    return DevResult(triple, ProjPoint(point), "dev")


def dev_prime(triple, curve: FlagCurve) -> DevResult:
    """Common point of the three planes of a parameter triple.

    Accepts a BoundaryTriple or any sequence of three pairwise distinct
    boundary points: the result is symmetric in its arguments.

    Raises
    ------
    RankDeficient
        If the three plane covectors fail to be independent.
    """
    ts = _as_three_points(triple)
    covectors = np.array([_flag_data(curve, t)[2] for t in ts])
    _, s, vt = np.linalg.svd(covectors)
    if s[2] <= 1e-10 * s[0]:
        raise RankDeficient(
            f"plane covectors have rank margin {s[2] / s[0]:.3e}")
    return DevResult(triple, ProjPoint(vt[-1]), "dev_prime")


def geodesic_endpoints(t_plus: BoundaryPoint, t_minus: BoundaryPoint,
                       curve: FlagCurve):
    """Endpoints of the developed geodesic leaf for a parameter pair.

    Returns
    -------
    (ProjPoint, ProjPoint)
        xi1(t_plus) and xi_t(t_plus)(t_minus); both lie on their join.
    """
    if t_plus.cyclic_dist(t_minus) < 1e-12:
        raise CoincidentPoints("geodesic endpoints need distinct parameters")
    p, _, _ = _flag_data(curve, t_plus)
    e_minus = xi_t(curve, t_plus, t_minus)[0]
    return ProjPoint(p), e_minus


# ---------------------------------------------------------------------------
# classification


def _cubic_discriminant(coeffs) -> float:
    """Discriminant of a X^3 + b X^2 Y + c X Y^2 + d Y^3."""
    a, b, c, d = (float(x) for x in coeffs)
    return (18.0 * a * b * c * d - 4.0 * b ** 3 * d + b ** 2 * c ** 2
            - 4.0 * a * c ** 3 - 27.0 * a ** 2 * d ** 2)


def _aligned_covectors(planes: np.ndarray) -> np.ndarray:
    """Covector rows sign-aligned into a continuous branch along the circle."""
    h = planes / np.linalg.norm(planes, axis=1, keepdims=True)
    out = h.copy()
    for i in range(1, len(out)):
        if out[i] @ out[i - 1] < 0.0:
            out[i] = -out[i]
    return out


def classify(p: ProjPoint, curve: FlagCurve, method: str = "auto",
             tol: float = 1e-10) -> str:
    """Classify a point against the plane family of the curve.

    Model path (``"discriminant"``): the sign of the cubic discriminant of
    the point read as a binary cubic (negative: one real root, ``Omega``;
    positive: three real roots, ``Lambda``; within ``tol * |p|^4`` of zero:
    ``Discriminant``).  General path (``"zeros"``): count sign-change
    clusters of the pairing with the sampled tangent planes around the
    circle; one cluster is ``Omega``, three are ``Lambda``.  ``"auto"``
    picks the model path exactly for the irreducible model provenance.

    Raises
    ------
    AmbiguousCount
        General path only: the cluster count is neither 1 nor 3 (carries
        the observed count rather than guessing).
    """
    if method == "auto":
        method = ("discriminant" if curve.rep.provenance == "irreducible"
                  else "zeros")
    if method == "discriminant":
        coords = np.asarray(p.coords, dtype=float)
        disc = _cubic_discriminant(coords)
        scale = float(np.linalg.norm(coords)) ** 4
        if abs(disc) < tol * scale:
            return "Discriminant"
        return "Omega" if disc < 0.0 else "Lambda"
    if method != "zeros":
        raise ValueError(f"unknown classification method: {method!r}")

    angles = curve.angles
    aligned = _aligned_covectors(curve.planes)
    f = aligned @ np.asarray(p.coords, dtype=float)
    scale = float(np.linalg.norm(p.coords))
    signs = np.sign(np.where(np.abs(f) < 1e-13 * scale, 0.0, f))
    nz = np.flatnonzero(signs)
    if len(nz) < 2:
        raise AmbiguousCount(0, "pairing vanishes on the whole sample set")
    # Walk consecutive nonzero signs so zeros landing exactly on samples
    # bridge properly.  The covector branch is antiperiodic over one
    # period, so the wrap compares against the *negated* first sign.
    positions, widths = [], []
    for k in range(len(nz)):
        a = nz[k]
        if k + 1 < len(nz):
            b = nz[k + 1]
            sign_b, angle_b = signs[b], angles[b]
        else:
            b = nz[0]
            sign_b, angle_b = -signs[b], angles[b] + np.pi
        if signs[a] != sign_b:
            positions.append(0.5 * (angles[a] + angle_b))
            widths.append(angle_b - angles[a])
    count = len(positions)
    if count > 1:
        # Sign flicker at a single sample produces two crossings in
        # *adjacent* brackets, whose midpoints sit half the summed bracket
        # widths apart.  Merge only those; crossings separated by at least
        # one clean sample in between are distinct zeros.
        merged = [[positions[0], widths[0]]]
        for pos, wid in zip(positions[1:], widths[1:]):
            last_pos, last_wid = merged[-1]
            if pos - last_pos < 0.75 * (wid + last_wid):
                merged[-1] = [pos, max(wid, last_wid)]
            else:
                merged.append([pos, wid])
        if len(merged) > 1:
            first_pos, first_wid = merged[0]
            last_pos, last_wid = merged[-1]
            if (first_pos + np.pi) - last_pos < 0.75 * (first_wid + last_wid):
                merged.pop()
        count = len(merged)
    if count == 1:
        return "Omega"
    if count == 3:
        return "Lambda"
    raise AmbiguousCount(count)


# ---------------------------------------------------------------------------
# reconstruction identities


def xi1_from_lines(t_plus: BoundaryPoint, t_minus1: BoundaryPoint,
                   t_minus2: BoundaryPoint, curve: FlagCurve) -> ProjPoint:
    """Recover the curve point at ``t_plus`` from two leaf lines.

    The leaf lines for two distinct opposite parameters are intersected as
    lines in projective 3-space; the common point must reproduce the
    stored point at ``t_plus``.

    Raises
    ------
    SkewLines
        If the two lines fail to meet (certification failure).
    """
    if t_minus1.cyclic_dist(t_minus2) < 1e-12:
        raise CoincidentPoints("opposite parameters must be distinct")
    p_plus, _, _ = _flag_data(curve, t_plus)
    b1 = xi_t(curve, t_plus, t_minus1)[0]
    b2 = xi_t(curve, t_plus, t_minus2)[0]
    line1 = join(ProjPoint(p_plus), b1)
    line2 = join(ProjPoint(p_plus), b2)
    # Klein pairing of the two Pluecker vectors: zero iff the lines meet.
    q1 = np.asarray(line1.pluecker)
    q2 = np.asarray(line2.pluecker)
    pairing = (q1[0] * q2[5] - q1[1] * q2[4] + q1[2] * q2[3]
               + q1[5] * q2[0] - q1[4] * q2[1] + q1[3] * q2[2])
    if abs(pairing) > 1e-8:
        raise SkewLines(f"leaf lines have Klein pairing {pairing:.3e}")
    # Meet: cut the first line with a plane through the second.
    duals = line2.dual_matrix()
    candidates = line1.matrix() @ duals
    norms = np.linalg.norm(candidates, axis=0)
    point = candidates[:, int(np.argmax(norms))]
    if np.max(norms) < 1e-12:
        raise SkewLines("leaf lines produced no intersection point")
    return ProjPoint(point)


def xi2_recover(t_plus: BoundaryPoint, t_minus: BoundaryPoint,
                curve: FlagCurve) -> ProjLine:
    """Recover the curve line at ``t_minus`` from endpoint data.

    Joins the meet of the leaf line with the plane at ``t_minus`` to the
    curve point at ``t_minus``; the result must match the stored line and
    is independent of ``t_plus``.
    """
    if t_plus.cyclic_dist(t_minus) < 1e-12:
        raise CoincidentPoints("parameters must be distinct")
    p_plus, _, _ = _flag_data(curve, t_plus)
    p_minus, _, h_minus = _flag_data(curve, t_minus)
    e_minus = xi_t(curve, t_plus, t_minus)[0]
    leaf_line = join(ProjPoint(p_plus), e_minus)
    cut = line_plane_meet(leaf_line, ProjPlane(h_minus))
    return join(cut, ProjPoint(p_minus))


# ---------------------------------------------------------------------------
# leaf domains


def proper_convexity_witness(directions: np.ndarray):
    """A direction strictly positive on a set of chart directions.

    The existence of such a direction exhibits a line in the plane missing
    the sample hull, i.e. an affine cell containing it: the sample set is
    properly convex.  Candidates are the mean, the dominant singular
    direction, and seeded random draws.

    Parameters
    ----------
    directions : (n, 3) array
        Consistently lifted unit chart directions.

    Returns
    -------
    (w, margin)
        Unit witness direction and its minimum pairing with the samples.

    Raises
    ------
    NotProperlyConvex
        If no candidate direction is strictly positive on all samples.
    """
    dirs = np.asarray(directions, dtype=float)
    dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    candidates = []
    mean = dirs.mean(axis=0)
    if np.linalg.norm(mean) > 1e-12:
        candidates.append(mean / np.linalg.norm(mean))
    _, _, vt = np.linalg.svd(dirs)
    candidates.extend([vt[0], -vt[0]])
    rng = np.random.RandomState(1729)
    draws = rng.standard_normal((512, 3))
    candidates.extend(draws / np.linalg.norm(draws, axis=1, keepdims=True))
    best_w, best_margin = None, -np.inf
    for w in candidates:
        margin = float(np.min(dirs @ w))
        if margin > best_margin:
            best_w, best_margin = w, margin
    if best_margin <= 1e-12:
        raise NotProperlyConvex(
            f"no affine cell contains the samples (best margin "
            f"{best_margin:.3e})")
    return best_w, best_margin


def leaf_boundary(t: BoundaryPoint, curve: FlagCurve, n: int) -> LeafDomain:
    """Sampled boundary polygon of the convex leaf domain at ``t``.

    Takes ``n`` evenly spread sampled parameters, intersects their lines
    with the plane at ``t``, verifies polygon convexity (consecutive edge
    cross products share a sign) and proper convexity (a line in the plane
    misses the sample hull), and returns the domain with its chart.

    Raises
    ------
    NotConvexSamples
        If the boundary polygon has a reflex vertex.
    NotProperlyConvex
        If no affine cell contains the samples.
    """
    if n < 16:
        raise ValueError(f"need n >= 16 boundary samples, got {n}")
    _, _, h_t = _flag_data(curve, t)

    # Exclude parameters so close to t that the tangent line at t' sinks
    # into the plane at t (the residual shrinks like the squared gap, so
    # below ~1e-4 the meet becomes numerically a line-in-plane).
    eligible = np.flatnonzero(
        np.minimum((curve.angles - t.angle) % np.pi,
                   (t.angle - curve.angles) % np.pi) > 1e-4)
    if len(eligible) < n:
        raise ValueError(
            f"curve has {len(eligible)} usable parameters < n = {n}")
    chosen = eligible[np.linspace(0, len(eligible), n,
                                  endpoint=False).astype(int)]

    basis = _chart_basis(h_t)
    pts = np.empty((n, 4))
    for k, i in enumerate(chosen):
        pts[k] = xi_t(curve, t, BoundaryPoint(curve.angles[i]))[0].coords

    coords = pts @ basis
    coords = coords / np.linalg.norm(coords, axis=1, keepdims=True)
    for i in range(1, n):
        if coords[i] @ coords[i - 1] < 0.0:
            coords[i] = -coords[i]
    if coords[0] @ coords[-1] < 0.0:
        raise NotProperlyConvex(
            "boundary samples close up antipodally: no affine cell")

    w, _ = proper_convexity_witness(coords)
    # Rotate the chart so the witness is the last coordinate.
    u = np.cross(w, [1.0, 0.0, 0.0])
    if np.linalg.norm(u) < 1e-8:
        u = np.cross(w, [0.0, 1.0, 0.0])
    u /= np.linalg.norm(u)
    v = np.cross(w, u)
    rot = np.column_stack([u, v, w])

    affine3 = coords @ rot
    polygon = affine3[:, :2] / affine3[:, 2:3]
    margin = _polygon_convexity(polygon)
    if margin < 0.0:
        rot = np.column_stack([-u, v, w])
        affine3 = coords @ rot
        polygon = affine3[:, :2] / affine3[:, 2:3]
        margin = _polygon_convexity(polygon)
    if margin <= 0.0:
        raise NotConvexSamples(
            f"boundary polygon convexity margin {margin:.3e}")

    chart = basis @ rot
    # The witness line: directions in the plane pairing to zero with w.
    witness_line = join(ProjPoint(basis @ np.cross(w, u)),
                        ProjPoint(basis @ u))

    order = np.argsort([curve.angles[i] for i in chosen])
    samples = tuple(
        (BoundaryPoint(curve.angles[chosen[k]]), ProjPoint(pts[k]))
        for k in order)
    return LeafDomain(t=t, plane=ProjPlane(h_t), samples=samples,
                      chart=chart, convexity_margin=margin,
                      witness=witness_line)


def _polygon_convexity(polygon: np.ndarray) -> float:
    """Signed convexity margin of a cyclic polygon.

    Positive when every normalized cross product of consecutive edges is
    positive (counterclockwise convex); the minimum such value otherwise,
    so mixed signs or clockwise orientation yield a non-positive margin.
    """
    edges = np.roll(polygon, -1, axis=0) - polygon
    lengths = np.linalg.norm(edges, axis=1)
    nxt = np.roll(edges, -1, axis=0)
    nxt_len = np.roll(lengths, -1)
    cross = edges[:, 0] * nxt[:, 1] - edges[:, 1] * nxt[:, 0]
    denom = np.maximum(lengths * nxt_len, 1e-300)
    return float(np.min(cross / denom))


# ---------------------------------------------------------------------------
# diagonal-embedding sector check


def sector_check(rep_diag: Rep4) -> SectorVerdict:
    """Orbit geometry of the diagonal embedding through x = [1, 0, 0, 1].

    Verifies that the Cartan orbit through the base point stays on one
    projective line, that the upper-triangular orbit is convex in its
    plane, and that the orbit closure reaches the full projective line
    spanned by the third and fourth basis vectors from both sides --
    convex, but not properly convex.
    """
    if rep_diag.provenance != "diagonal":
        raise ValueError("sector check requires a diagonal-embedding rep")
    x = np.array([1.0, 0.0, 0.0, 1.0])

    # (a) Cartan orbit: [exp(t), 0, 0, 1] up to scale -- rank 2.
    ts = np.linspace(-3.0, 3.0, 41)
    orbit_a = np.array([
        diag_embed([[np.exp(s / 2.0), 0.0], [0.0, np.exp(-s / 2.0)]]) @ x
        for s in ts])
    orbit_a /= np.linalg.norm(orbit_a, axis=1, keepdims=True)
    s_vals = np.linalg.svd(orbit_a, compute_uv=False)
    collinearity = float(s_vals[2] / s_vals[0])

    # (b) upper-triangular orbit: [1, 0, u, v] with v > 0; convexity via
    # random convex combinations staying in the open half plane.
    rng = np.random.RandomState(314159)
    u_vals = np.tan(rng.uniform(-1.5, 1.5, size=200))
    v_vals = np.exp(rng.uniform(-6.0, 6.0, size=200))
    pairs = rng.randint(0, 200, size=(400, 2))
    lam = rng.uniform(0.0, 1.0, size=400)
    mix_v = lam * v_vals[pairs[:, 0]] + (1.0 - lam) * v_vals[pairs[:, 1]]
    convexity = float(np.min(mix_v))

    # (c) normalized large-parameter samples approach [0, 0, u, v].
    limit_mismatch = 0.0
    for u, v in [(1.0, 1.0), (-1.0, 1.0), (2.0, 0.5), (-3.0, 0.2)]:
        n = 1e6
        sample = np.array([1.0, 0.0, n * u, n * v])
        target = np.array([0.0, 0.0, u, v])
        limit_mismatch = max(limit_mismatch,
                             chordal(canonical(sample), canonical(target)))

    # (d) proper convexity fails on the orbit closure: with the natural
    # continuous lift, the closure contains the third-axis direction with
    # both signs, so no affine cell contains it.
    u_grid = np.concatenate([np.tan(np.linspace(-1.55, 1.55, 31)),
                             [-1e6, 1e6]])
    v_grid = np.array([1e-6, 1e-3, 1.0, 1e3])
    closure = [np.array([1.0, u, v])
               for u in u_grid for v in v_grid]
    closure.extend(np.array([1.0, u, 0.0]) for u in u_grid)
    closure.append(np.array([0.0, 1.0, 0.0]))
    closure.append(np.array([0.0, -1.0, 0.0]))
    closure = np.array(closure)
    closure /= np.linalg.norm(closure, axis=1, keepdims=True)
    try:
        proper_convexity_witness(closure)
        properly_convex = True
    except NotProperlyConvex:
        properly_convex = False

    ok = (collinearity < 1e-10 and convexity > 0.0
          and limit_mismatch < 1e-6 and not properly_convex)
    description = ("convex, not properly convex" if ok
                   else "sector check failed")
    return SectorVerdict(collinearity_margin=collinearity,
                         convexity_margin=convexity,
                         limit_mismatch=limit_mismatch,
                         properly_convex=properly_convex,
                         description=description)


# ---------------------------------------------------------------------------
# equivariance and complement checks


def _letter_matrices(rep, letter: int):
    """Image of a single letter (even: generator, odd: its inverse)."""
    g = rep.images[letter // 2]
    if letter % 2:
        return np.linalg.inv(g)
    return np.asarray(g, dtype=float)


def equivariance_residual(rep: Rep4, curve: FlagCurve, samples: int) -> float:
    """Worst developing-map equivariance defect over random triples.

    For each generator letter, matches sampled parameters whose boundary
    images are also sampled, draws random oriented triples among the
    matches, and compares the acted developing image with the developing
    image of the acted triple.
    """
    rng = np.random.RandomState(7)
    angles = curve.angles
    cos_sin = np.column_stack([np.cos(angles), np.sin(angles)])
    worst = 0.0
    for letter in range(2 * len(rep.images)):
        b2 = _letter_matrices(curve.base, letter)
        m4 = _letter_matrices(rep, letter)
        imaged = cos_sin @ b2.T
        im_angles = np.arctan2(imaged[:, 1], imaged[:, 0]) % np.pi
        pos = np.searchsorted(angles, im_angles)
        matched_i = []
        for i, a in enumerate(im_angles):
            for j in (pos[i] - 1, pos[i] % len(angles)):
                d = abs(angles[j] - a)
                if min(d, np.pi - d) < 1e-10:
                    matched_i.append(i)
                    break
        if len(matched_i) < 3:
            continue
        matched_i = np.array(matched_i)
        for _ in range(samples):
            pick = rng.choice(len(matched_i), size=3, replace=False)
            src = np.sort(angles[matched_i[pick]])
            # Keep the meet operations conditioned: the developing image
            # degrades linearly in the inverse triple separation, so
            # nearly coincident parameters are resampled.
            if (src[1] - src[0] < 0.05 or src[2] - src[1] < 0.05
                    or src[0] + np.pi - src[2] < 0.05):
                continue
            triple = BoundaryTriple(*[BoundaryPoint(a) for a in src])
            # Map the roles through the letter: the boundary action
            # preserves orientation, so the acted triple is oriented too,
            # and each acted angle snaps onto the sampled grid because the
            # sources were drawn from the matched set.
            acted_triple = []
            for bp in (triple.t_plus, triple.t_zero, triple.t_minus):
                a = mobius_angle(b2, bp).angle
                j = np.searchsorted(angles, a)
                best = min((j - 1) % len(angles), j % len(angles),
                           key=lambda k: min(abs(angles[k] - a),
                                             np.pi - abs(angles[k] - a)))
                acted_triple.append(BoundaryPoint(angles[best]))
            image_triple = BoundaryTriple(*acted_triple)
            d_src = dev(triple, curve).point
            d_img = dev(image_triple, curve).point
            worst = max(worst, chordal(canonical(m4 @ d_src.coords),
                                       canonical(d_img.coords)))
    return worst


def convex_complement_check(plane: ProjPlane, lines, probes: int):
    """Segment-closure test for the complement of a line family in a plane.

    Probe points are rejection-sampled away from every line; for random
    probe pairs, one of the two projective segments between them must miss
    every sampled line.  Returns a truthy CheckResult, or a falsy one with
    the first violating (probe pair, line index) witness.
    """
    lines = list(lines)
    if len(lines) < 8:
        raise ValueError(f"need at least 8 line samples, got {len(lines)}")
    basis = _chart_basis(plane.covector)
    ws = []
    for line in lines:
        u, v = line.basis()
        w = np.cross(u @ basis, v @ basis)
        norm = np.linalg.norm(w)
        if norm < 1e-12:
            raise ValueError("line family member degenerates in the chart")
        if ws and np.dot(ws[-1], w / norm) < 0.0:
            norm = -norm
        ws.append(w / norm)
    ws = np.array(ws)

    # The complement of the swept family is the set of points the aligned
    # pairing never crosses: one-sided against every member.  Points in
    # the small cells between consecutive members belong to the union,
    # not the complement, so rejection keeps one-sided probes only.
    rng = np.random.RandomState(20240817)
    margin = 1e-3
    points = []
    attempts = 0
    while len(points) < probes and attempts < 200 * probes:
        x = rng.standard_normal(3)
        x /= np.linalg.norm(x)
        vals = ws @ x
        if np.min(vals) > margin or np.max(vals) < -margin:
            points.append(x)
        attempts += 1
        if attempts % (50 * probes) == 0:
            margin *= 0.1
    if len(points) < 2:
        raise ValueError("could not sample the complement region")
    points = np.array(points)

    pairings = points @ ws.T
    n_pairs = min(4 * probes, len(points) * (len(points) - 1) // 2)
    for _ in range(n_pairs):
        i, j = rng.choice(len(points), size=2, replace=False)
        prod = pairings[i] * pairings[j]
        if np.all(prod > 0.0) or np.all(prod < 0.0):
            continue
        bad = int(np.argmax(prod <= 0.0)) if np.any(prod > 0.0) else 0
        return CheckResult(False, witness=(points[i], points[j], bad))
    return CheckResult(True)


# ---------------------------------------------------------------------------
# model calibration


_BASE_TRIPLE_CACHE = {}


def model_base_triple(curve: FlagCurve):
    """Calibrated triple developing to the model base point [1, 0, 1, 0].

    The correspondence between triples and base points is fixed only up to
    the equivariant parametrization of the boundary, so the triple is
    found numerically: the first parameter is pinned to zero by that
    freedom and the remaining two are optimized to hit the base point.

    Returns
    -------
    (BoundaryTriple, float)
        The calibrated triple and the chordal residual of its image.
    """
    key = id(curve)
    if key in _BASE_TRIPLE_CACHE:
        return _BASE_TRIPLE_CACHE[key]
    target = canonical(MODEL_BASE_POINT)
    t_plus = BoundaryPoint(0.0)

    def objective(params):
        t0, tm = params
        if not (0.05 < t0 < tm - 0.05 and tm < np.pi - 0.05):
            return 2.0
        triple = BoundaryTriple(t_plus, BoundaryPoint(t0), BoundaryPoint(tm))
        try:
            image = dev(triple, curve).point
        except DegenerateConfiguration:
            return 2.0
        return chordal(image.coords, target)

    grid = np.linspace(0.15, np.pi - 0.15, 24)
    best, best_val = None, np.inf
    for i, t0 in enumerate(grid):
        for tm in grid[i + 1:]:
            val = objective((t0, tm))
            if val < best_val:
                best, best_val = (t0, tm), val
    result = minimize(objective, best, method="Nelder-Mead",
                      options={"xatol": 1e-14, "fatol": 1e-15,
                               "maxiter": 4000})
    t0, tm = result.x
    triple = BoundaryTriple(t_plus, BoundaryPoint(t0), BoundaryPoint(tm))
    residual = float(objective(result.x))
    _BASE_TRIPLE_CACHE[key] = (triple, residual)
    return triple, residual


# ---------------------------------------------------------------------------
# external interfaces


def dev_table_csv(rows, path) -> None:
    """Write developing-map samples as CSV.

    Parameters
    ----------
    rows : iterable of (BoundaryTriple, ndarray, str)
        Triple, image coordinates, classification label.
    path : str or Path
        Output file.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DEV_CSV_HEADER.split(","))
        for triple, coords, label in rows:
            writer.writerow(
                [f"{triple.t_plus.angle:.17g}",
                 f"{triple.t_zero.angle:.17g}",
                 f"{triple.t_minus.angle:.17g}"]
                + [f"{x:.17g}" for x in np.asarray(coords, dtype=float)]
                + [label])


def _clip_chart_line(ell, lo, hi):
    """Endpoints of the chart line ell . (x, y, 1) = 0 inside a box.

    Returns the two boundary intersections, or None when the line misses
    the box (or degenerates).
    """
    a, b, c = ell
    hits = []
    for x in (lo[0], hi[0]):
        if abs(b) > 1e-300:
            y = -(a * x + c) / b
            if lo[1] - 1e-9 <= y <= hi[1] + 1e-9:
                hits.append((x, y))
    for y in (lo[1], hi[1]):
        if abs(a) > 1e-300:
            x = -(b * y + c) / a
            if lo[0] - 1e-9 <= x <= hi[0] + 1e-9:
                hits.append((x, y))
    best = None
    for i in range(len(hits)):
        for j in range(i + 1, len(hits)):
            d = np.hypot(hits[i][0] - hits[j][0], hits[i][1] - hits[j][1])
            if best is None or d > best[0]:
                best = (d, hits[i], hits[j])
    if best is None or best[0] < 1e-12:
        return None
    return best[1], best[2]


def leaf_to_svg(leaf: LeafDomain, path, tangents=()) -> None:
    """Render a leaf boundary polygon as a deterministic 1024x1024 SVG.

    ``tangents`` is an optional iterable of ProjLine values inside the
    leaf's plane (tangent lines at marked samples); each is drawn clipped
    to the viewport behind the boundary polygon.
    """
    polygon = leaf.polygon()
    lo = polygon.min(axis=0)
    hi = polygon.max(axis=0)
    span = float(np.max(hi - lo))
    if span <= 0.0:
        span = 1.0
    pad = 0.05 * span
    scale = 1024.0 / (span + 2.0 * pad)

    def pixel(x, y):
        return ((x - lo[0] + pad) * scale, 1024.0 - (y - lo[1] + pad) * scale)

    box_lo = lo - pad
    box_hi = lo - pad + (span + 2.0 * pad)
    segments = []
    for line in tangents:
        u, v = line.basis()
        cu, cv = u @ leaf.chart, v @ leaf.chart
        ell = np.cross(cu, cv)
        norm = np.linalg.norm(ell)
        if norm < 1e-14:
            continue
        clipped = _clip_chart_line(ell / norm, box_lo, box_hi)
        if clipped is None:
            continue
        (x1, y1), (x2, y2) = clipped
        p1, p2 = pixel(x1, y1), pixel(x2, y2)
        segments.append(
            f'  <line x1="{p1[0]:.2f}" y1="{p1[1]:.2f}" '
            f'x2="{p2[0]:.2f}" y2="{p2[1]:.2f}" '
            'stroke="#888888" stroke-width="1"/>\n')
    # SVG y runs downward; flip for counterclockwise rendering.
    coords = " ".join(
        f"{px:.2f},{py:.2f}" for px, py in (pixel(x, y) for x, y in polygon))
    body = (
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 1024 1024">\n'
        '  <rect width="1024" height="1024" fill="white"/>\n'
        + "".join(segments)
        + f'  <polygon points="{coords}" fill="none" stroke="black" '
        'stroke-width="2"/>\n'
        "</svg>\n")
    with open(path, "w") as fh:
        fh.write(body)
