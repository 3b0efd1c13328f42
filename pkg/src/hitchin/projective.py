"""Projective linear algebra in RP^3: points, planes, Plücker lines, flags.

Conventions
-----------
Homogeneous vectors are canonicalized to unit Euclidean norm with the first
coordinate of modulus above ``1e-12`` made positive, so equality testing and
text output are deterministic.  Lines are stored in Plücker coordinates
``(p01, p02, p03, p12, p13, p23)`` with ``p_ij = u_i v_j - u_j v_i`` for any
spanning pair ``u, v``; the quadratic relation
``p01*p23 - p02*p13 + p03*p12 = 0`` is enforced on construction.

The cross-ratio convention is ``[a,b;c,d] = ((a-c)(b-d)) / ((a-d)(b-c))``,
evaluated through 2x2 determinants in an orthonormal frame of the common
line, which handles points at infinity of any affine chart uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSpan,
    IndeterminateRatio,
    LineInPlane,
    ModulusCollision,
    NotCollinear,
    NotRealSplit,
    PointOnLine,
)
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "ProjPoint",
    "ProjPlane",
    "ProjLine",
    "Flag3",
    "Map4",
    "EigenData",
    "canonical",
    "chordal",
    "join",
    "meet_planes",
    "line_plane_meet",
    "span_line_point",
    "rank_margin",
    "cross_ratio",
    "eigen_flags",
]


def canonical(v):
    """Return the canonical homogeneous representative of ``v``.

    Unit Euclidean norm; the first coordinate with modulus > 1e-12 is made
    positive.  Raises ``DegenerateSpan`` on (numerically) zero input.
    """
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n < 1e-14:
        raise DegenerateSpan("zero homogeneous vector")
    v = v / n
    for x in v:
        if abs(x) > 1e-12:
            if x < 0.0:
                v = -v
            break
    v.flags.writeable = False
    return v


def chordal(u, v) -> float:
    """Chordal distance min(|u - v|, |u + v|) between unit representatives."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return min(np.linalg.norm(u - v), np.linalg.norm(u + v))


@dataclass(frozen=True)
class ProjPoint:
    """A point of RP^3 as a canonical homogeneous 4-vector."""

    coords: np.ndarray

    def __init__(self, coords):
        object.__setattr__(self, "coords", canonical(coords))

    def dist(self, other: "ProjPoint") -> float:
        return chordal(self.coords, other.coords)

    def same(self, other: "ProjPoint", tol: Tolerances = DEFAULT) -> bool:
        return self.dist(other) < tol.chordal_eq

    def __repr__(self):
        return f"ProjPoint({np.array2string(self.coords, precision=6)})"


@dataclass(frozen=True)
class ProjPlane:
    """A plane of RP^3 as a canonical homogeneous dual 4-vector."""

    covector: np.ndarray

    def __init__(self, covector):
        object.__setattr__(self, "covector", canonical(covector))

    def dist(self, other: "ProjPlane") -> float:
        return chordal(self.covector, other.covector)

    def same(self, other: "ProjPlane", tol: Tolerances = DEFAULT) -> bool:
        return self.dist(other) < tol.chordal_eq

    def contains(self, p: ProjPoint, tol: Tolerances = DEFAULT) -> bool:
        return abs(float(self.covector @ p.coords)) < tol.incidence

    def __repr__(self):
        return f"ProjPlane({np.array2string(self.covector, precision=6)})"


def _pluecker_residual(p) -> float:
    return abs(p[0] * p[5] - p[1] * p[4] + p[2] * p[3])


def _primal_matrix(p):
    """The antisymmetric 4x4 matrix L with L@h = (meet of line and plane h)."""
    p01, p02, p03, p12, p13, p23 = p
    return np.array(
        [
            [0.0, p01, p02, p03],
            [-p01, 0.0, p12, p13],
            [-p02, -p12, 0.0, p23],
            [-p03, -p13, -p23, 0.0],
        ]
    )


def _dual_coords(p):
    """Plücker involution: coordinates of the same line in the dual space."""
    p01, p02, p03, p12, p13, p23 = p
    return np.array([p23, -p13, p12, p03, -p02, p01])


def _from_matrix(L):
    """Extract Plücker coordinates from an antisymmetric 4x4 matrix."""
    return np.array([L[0, 1], L[0, 2], L[0, 3], L[1, 2], L[1, 3], L[2, 3]])


@dataclass(frozen=True)
class ProjLine:
    """A line of RP^3 in canonical Plücker coordinates ``p01..p23``."""

    pluecker: np.ndarray

    def __init__(self, pluecker, tol: Tolerances = DEFAULT):
        p = canonical(pluecker)
        if _pluecker_residual(p) > tol.plucker:
            raise DegenerateSpan(
                f"Plücker relation violated: residual {_pluecker_residual(p):.3e}"
            )
        object.__setattr__(self, "pluecker", p)

    def dist(self, other: "ProjLine") -> float:
        return chordal(self.pluecker, other.pluecker)

    def same(self, other: "ProjLine", tol: Tolerances = DEFAULT) -> bool:
        return self.dist(other) < tol.chordal_eq

    def matrix(self):
        return _primal_matrix(self.pluecker)

    def dual_matrix(self):
        return _primal_matrix(_dual_coords(self.pluecker))

    def basis(self):
        """An orthonormal 2x4 basis of the line's 2-dimensional subspace.

        The primal matrix has rank 2 and its column space is exactly the
        line (its columns are meets with the coordinate planes).
        """
        u, s, _ = np.linalg.svd(self.matrix())
        return u[:, :2].T

    def contains(self, p: ProjPoint, tol: Tolerances = DEFAULT) -> bool:
        return point_line_residual(p, self) < tol.incidence

    def __repr__(self):
        return f"ProjLine({np.array2string(self.pluecker, precision=6)})"


def point_line_residual(p: ProjPoint, L: ProjLine) -> float:
    """0 iff p lies on L: norm of the dual matrix applied to the point."""
    return float(np.linalg.norm(L.dual_matrix() @ p.coords))


def line_plane_residual(L: ProjLine, h: ProjPlane) -> float:
    """0 iff L lies inside h: norm of the primal matrix applied to h."""
    return float(np.linalg.norm(L.matrix() @ h.covector))


@dataclass(frozen=True)
class Flag3:
    """A full flag point < line < plane with verified incidences."""

    point: ProjPoint
    line: ProjLine
    plane: ProjPlane

    def __init__(self, point, line, plane, tol: Tolerances = DEFAULT):
        r1 = point_line_residual(point, line)
        r2 = line_plane_residual(line, plane)
        if r1 > tol.incidence or r2 > tol.incidence:
            raise DegenerateSpan(
                f"flag incidences fail: point-line {r1:.3e}, line-plane {r2:.3e}"
            )
        object.__setattr__(self, "point", point)
        object.__setattr__(self, "line", line)
        object.__setattr__(self, "plane", plane)

    def dual(self) -> "Flag3":
        """The dual flag: covector as point, annihilator line, point as covector."""
        p = ProjPoint(self.plane.covector)
        h = ProjPlane(self.point.coords)
        L = ProjLine(_dual_coords(self.line.pluecker))
        return Flag3(p, L, h)


class Map4:
    """An element of PGL_4(R), normalized to determinant +-1.

    Acts on points by the matrix, on planes by the inverse transpose, and on
    lines by the induced action on Plücker coordinates.
    """

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=float)
        if m.shape != (4, 4):
            raise ValueError("Map4 expects a 4x4 matrix")
        d = np.linalg.det(m)
        if abs(d) < 1e-300:
            raise DegenerateSpan("singular matrix")
        m = m / abs(d) ** 0.25
        m.flags.writeable = False
        self.matrix = m

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    def inverse(self) -> "Map4":
        return Map4(np.linalg.inv(self.matrix))

    def act_point(self, p: ProjPoint) -> ProjPoint:
        return ProjPoint(self.matrix @ p.coords)

    def act_plane(self, h: ProjPlane) -> ProjPlane:
        return ProjPlane(np.linalg.inv(self.matrix).T @ h.covector)

    def act_line(self, L: ProjLine) -> ProjLine:
        lam = self.matrix @ L.matrix() @ self.matrix.T
        return ProjLine(_from_matrix(lam))

    def act_flag(self, f: Flag3) -> Flag3:
        return Flag3(self.act_point(f.point), self.act_line(f.line), self.act_plane(f.plane))

    def line_matrix(self):
        """The induced 6x6 matrix on Plücker coordinates."""
        cols = []
        basis_pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        for i, j in basis_pairs:
            u = self.matrix[:, i]
            v = self.matrix[:, j]
            w = np.outer(u, v) - np.outer(v, u)
            cols.append(_from_matrix(w))
        return np.array(cols).T

    def __matmul__(self, other: "Map4") -> "Map4":
        return Map4(self.matrix @ other.matrix)

    def __repr__(self):
        return f"Map4({np.array2string(self.matrix, precision=6)})"


@dataclass(frozen=True)
class EigenData:
    """Real 4x4 spectrum sorted by decreasing modulus, with eigenlines.

    ``gap`` is the smallest ratio ``|l_i| / |l_{i+1}|``; ``signs`` records the
    sign pattern of the sorted eigenvalues.  Residuals are measured relative
    to the spectral scale ``max |l_i|`` so large word-images remain checkable
    in floating point.
    """

    eigenvalues: np.ndarray
    eigenlines: tuple
    gap: float
    signs: tuple


def join(p: ProjPoint, q: ProjPoint, tol: Tolerances = DEFAULT) -> ProjLine:
    """The line through two distinct points.

    Parameters
    ----------
    p, q : ProjPoint
        Distinct points (chordal distance > 1e-10).

    Returns
    -------
    ProjLine
        ``p_ij = p_i q_j - p_j q_i``, canonicalized.
    """
    if p.dist(q) < tol.chordal_eq:
        raise DegenerateSpan("join of coincident points")
    u, v = p.coords, q.coords
    w = np.array(
        [
            u[0] * v[1] - u[1] * v[0],
            u[0] * v[2] - u[2] * v[0],
            u[0] * v[3] - u[3] * v[0],
            u[1] * v[2] - u[2] * v[1],
            u[1] * v[3] - u[3] * v[1],
            u[2] * v[3] - u[3] * v[2],
        ]
    )
    return ProjLine(w)


def meet_planes(h: ProjPlane, k: ProjPlane, tol: Tolerances = DEFAULT) -> ProjLine:
    """The intersection line of two distinct planes (dual join)."""
    if h.dist(k) < tol.chordal_eq:
        raise DegenerateSpan("meet of coincident planes")
    a, b = h.covector, k.covector
    q = np.array(
        [
            a[0] * b[1] - a[1] * b[0],
            a[0] * b[2] - a[2] * b[0],
            a[0] * b[3] - a[3] * b[0],
            a[1] * b[2] - a[2] * b[1],
            a[1] * b[3] - a[3] * b[1],
            a[2] * b[3] - a[3] * b[2],
        ]
    )
    return ProjLine(_dual_coords(q))


def line_plane_meet(L: ProjLine, h: ProjPlane, tol: Tolerances = DEFAULT) -> ProjPoint:
    """The intersection point of a line with a plane not containing it.

    Raises
    ------
    LineInPlane
        If every point of ``L`` is incident to ``h`` (rank test on the
        primal-matrix image).
    """
    v = L.matrix() @ h.covector
    if np.linalg.norm(v) < tol.incidence:
        raise LineInPlane("line lies in the plane")
    return ProjPoint(v)


def span_line_point(L: ProjLine, p: ProjPoint, tol: Tolerances = DEFAULT) -> ProjPlane:
    """The plane spanned by a line and a point off it (dual of the meet)."""
    w = L.dual_matrix() @ p.coords
    if np.linalg.norm(w) < tol.incidence:
        raise PointOnLine("point lies on the line")
    return ProjPlane(w)


def rank_margin(vectors) -> float:
    """Smallest singular value of the stacked (normalized) vectors.

    Positive iff the spans are in direct sum; 0 signals degeneracy.  The
    value is invariant under permutation and scaling of the inputs.
    """
    rows = [canonical(v) for v in vectors]
    if not 1 <= len(rows) <= 4:
        raise ValueError("rank_margin expects 1 to 4 vectors")
    s = np.linalg.svd(np.array(rows), compute_uv=False)
    return float(s[-1])


def cross_ratio(a: ProjPoint, b: ProjPoint, c: ProjPoint, d: ProjPoint,
                tol: Tolerances = DEFAULT) -> float:
    """Cross-ratio [a,b;c,d] = ((a-c)(b-d)) / ((a-d)(b-c)) on a common line.

    Evaluated through 2x2 determinants in an orthonormal frame of the line,
    so points at infinity of any particular affine chart need no special
    casing.  Exact coincidence a = b or c = d returns 1 (the documented
    normalization convention); a genuine pole (b = c with the rest distinct)
    returns ``inf``; a 0/0 configuration raises ``IndeterminateRatio``.

    Raises
    ------
    NotCollinear
        If the four points do not lie on one line (rank > 2 of the stack).
    """
    stack = np.array([a.coords, b.coords, c.coords, d.coords])
    u, s, vt = np.linalg.svd(stack)
    if s[2] > 1e-8:
        raise NotCollinear(f"third singular value {s[2]:.3e}")
    if a.dist(b) < tol.chordal_eq or c.dist(d) < tol.chordal_eq:
        return 1.0
    frame = vt[:2]  # orthonormal basis of the common 2-space
    pa, pb, pc, pd = (frame @ v for v in stack)

    def det2(u, v):
        return u[0] * v[1] - u[1] * v[0]

    num = det2(pa, pc) * det2(pb, pd)
    den = det2(pa, pd) * det2(pb, pc)
    if abs(den) < 1e-15:
        if abs(num) < 1e-15:
            raise IndeterminateRatio("0/0 cross-ratio configuration")
        return float("inf")
    return float(num / den)


def eigen_flags(M: Map4, tol: Tolerances = DEFAULT) -> EigenData:
    """Real spectrum of a 4x4 map, sorted by decreasing modulus.

    Raises
    ------
    NotRealSplit
        If a complex eigenvalue pair is detected.
    ModulusCollision
        If two consecutive moduli have ratio below ``1 + 1e-8``.
    """
    w, v = np.linalg.eig(M.matrix)
    scale = float(np.max(np.abs(w)))
    if np.any(np.abs(w.imag) > 1e-9 * max(scale, 1.0)):
        raise NotRealSplit("complex eigenvalue pair")
    w = w.real
    v = v.real
    order = np.argsort(-np.abs(w))
    w = w[order]
    v = v[:, order]
    ratios = np.abs(w[:-1]) / np.abs(w[1:])
    gap = float(np.min(ratios))
    if gap < 1.0 + tol.gap_margin:
        raise ModulusCollision(f"modulus gap {gap:.12f}")
    lines = tuple(ProjPoint(v[:, i]) for i in range(4))
    # Residual check, relative to the spectral scale.
    for i in range(4):
        r = np.linalg.norm(M.matrix @ v[:, i] - w[i] * v[:, i])
        if r > tol.eigen_residual * max(scale, 1.0):
            raise ModulusCollision(f"eigenpair residual {r:.3e} at scale {scale:.3e}")
    return EigenData(
        eigenvalues=w,
        eigenlines=lines,
        gap=gap,
        signs=tuple(int(np.sign(x)) for x in w),
    )
