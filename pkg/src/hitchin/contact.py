"""Symplectic geometry along the flag curve.

The middle flag components of a symplectic Frenet curve are Lagrangian
lines, and any pairwise transverse Lagrangian triple induces a linear
complex structure on the ambient four-dimensional space.  This module
certifies the Lagrangian property against the recovered invariant form,
builds the complex structure from Lagrangian triples, derives the contact
hyperplane field, and evaluates the induced contact vector at developing-
map images, together with the definiteness checks that make the structure
a certificate rather than a construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .devmap import _flag_data, dev
from .errors import NotTransverse
from .frenet import FlagCurve
from .projective import ProjLine, ProjPlane, ProjPoint
from .reps import SymplecticForm, invariant_symplectic
from .surface import BoundaryPoint, BoundaryTriple

__all__ = [
    "ComplexStructure",
    "ContactVector",
    "contact_field",
    "contact_plane",
    "definiteness_check",
    "j_from_lagrangians",
    "lagrangian_residual",
    "oriented_form",
]


@dataclass(frozen=True)
class ComplexStructure:
    """A linear complex structure on R^4: a real matrix squaring to -Id."""

    j: np.ndarray

    def __init__(self, j):
        m = np.asarray(j, dtype=float)
        if m.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got {m.shape}")
        residual = np.linalg.norm(m @ m + np.eye(4))
        # Squaring a stored matrix already rounds at the square of its
        # norm, so the gate scales with it; for order-1 structures this
        # is the plain absolute bound.
        if residual > 1e-9 * max(1.0, np.linalg.norm(m) ** 2):
            raise ValueError(f"matrix does not square to -Id: {residual:.3e}")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "j", m)

    def apply(self, v):
        return self.j @ np.asarray(v, dtype=float)

    def square_residual(self) -> float:
        return float(np.linalg.norm(self.j @ self.j + np.eye(4)))


@dataclass(frozen=True)
class ContactVector:
    """The contact direction at a developing-map image.

    ``vector`` is the representative of J.point modulo the point itself
    (the component orthogonal to the point's lift, unit-normalized), and
    ``margin`` is its transversality against the contact plane at the
    point: the absolute pairing with the plane's unit covector.
    """

    point: ProjPoint
    vector: np.ndarray
    margin: float


def lagrangian_residual(line: ProjLine, omega: SymplecticForm) -> float:
    """Symplectic pairing of an orthonormal basis of the line.

    Zero means the 2-dimensional subspace is Lagrangian for ``omega``; the
    value is basis-independent up to sign because the basis is unit.
    """
    u, v = line.basis()
    return abs(omega.pair(u, v))


def _transversality_margin(l1: ProjLine, l2: ProjLine) -> float:
    """Smallest singular value of the stacked orthonormal bases.

    1 for orthogonal complements, 0 when the lines share a direction.
    """
    stacked = np.vstack([l1.basis(), l2.basis()]).T
    return float(np.linalg.svd(stacked, compute_uv=False)[-1])


def j_from_lagrangians(l_plus: ProjLine, l_zero: ProjLine,
                       l_minus: ProjLine) -> ComplexStructure:
    """Complex structure from a pairwise transverse line triple.

    The middle line is the graph of an isomorphism F between the outer
    two: for u in ``l_plus`` there is a unique F(u) in ``l_minus`` with
    u + F(u) in ``l_zero``.  The returned structure maps u to F(u) on
    ``l_plus`` and w to -F^{-1}(w) on ``l_minus``, which squares to -Id
    by construction and is independent of basis choices.

    Raises
    ------
    NotTransverse
        If any pair of the three lines has transversality margin <= 1e-8.
    """
    pairs = [("plus/minus", l_plus, l_minus), ("plus/zero", l_plus, l_zero),
             ("zero/minus", l_zero, l_minus)]
    for name, a, b in pairs:
        margin = _transversality_margin(a, b)
        if margin <= 1e-8:
            raise NotTransverse(
                f"line pair {name} has transversality margin {margin:.3e}")
    frame = np.vstack([l_plus.basis(), l_minus.basis()]).T
    coords = np.linalg.solve(frame, l_zero.basis().T)
    graph = coords[2:] @ np.linalg.inv(coords[:2])
    j_frame = np.zeros((4, 4))
    j_frame[2:, :2] = graph
    j_frame[:2, 2:] = -np.linalg.inv(graph)
    j = frame @ j_frame @ np.linalg.inv(frame)
    # The frame sandwich amplifies roundoff by its condition number; the
    # Newton step for X^2 = -Id restores the square quadratically while
    # fixing the two swapped subspaces.
    for _ in range(3):
        if np.linalg.norm(j @ j + np.eye(4)) < 1e-12 * max(
                1.0, np.linalg.norm(j) ** 2):
            break
        j = 0.5 * (j - np.linalg.inv(j))
    return ComplexStructure(j)


def contact_plane(l: ProjPoint, omega: SymplecticForm) -> ProjPlane:
    """The symplectic annihilator hyperplane of a point.

    The covector is omega applied to the point's lift; antisymmetry makes
    the point incident to its own contact plane.
    """
    return ProjPlane(omega.omega @ l.coords)


def contact_field(triple: BoundaryTriple, curve: FlagCurve,
                  omega: SymplecticForm) -> ContactVector:
    """Contact direction at the developing image of an oriented triple.

    The complex structure of the triple's three middle flag lines is
    applied to the developing image; the component modulo the point is
    the contact direction, certified transverse to the contact plane.

    Raises
    ------
    NotTransverse
        Propagated from the structure construction, or raised directly
        when the direction is not transverse to the contact plane.
    """
    lines = [ProjLine(_flag_data(curve, bp)[1])
             for bp in (triple.t_plus, triple.t_zero, triple.t_minus)]
    structure = j_from_lagrangians(*lines)
    point = dev(triple, curve).point
    image = structure.apply(point.coords)
    direction = image - (image @ point.coords) * point.coords
    norm = np.linalg.norm(direction)
    if norm < 1e-12:
        raise NotTransverse("contact direction degenerates at the point")
    direction /= norm
    plane = contact_plane(point, omega)
    margin = float(abs(plane.covector @ direction))
    if margin <= 1e-12:
        raise NotTransverse(
            f"contact direction lies in the contact plane: {margin:.3e}")
    return ContactVector(point=point, vector=direction, margin=margin)


def definiteness_check(omega: SymplecticForm, structure: ComplexStructure,
                       vectors: int = 1000, seed: int = 20240817):
    """Definiteness data for the bilinear form omega(., J.).

    Returns the smallest eigenvalue of the symmetric part of omega @ J
    (the decisive test) together with the smallest value of the form on
    unit random vectors (the sampling surrogate).
    """
    g = omega.omega @ structure.j
    sym = 0.5 * (g + g.T)
    min_eig = float(np.linalg.eigvalsh(sym)[0])
    rng = np.random.RandomState(seed)
    vs = rng.standard_normal((vectors, 4))
    vs /= np.linalg.norm(vs, axis=1, keepdims=True)
    min_sample = float(np.min(np.einsum("ni,ij,nj->n", vs, g, vs)))
    return min_eig, min_sample


_ORIENTED_ANGLES = (0.0, np.pi / 3.0, 2.0 * np.pi / 3.0)


def oriented_form(curve: FlagCurve, omega: SymplecticForm | None = None
                  ) -> SymplecticForm:
    """Invariant form signed so oriented triples tame their structure.

    The recovered invariant form is only determined up to scale, and its
    deterministic sign convention is blind to orientation; both signs are
    invariant.  This fixes the sign by requiring omega(v, Jv) > 0 for the
    complex structure of one well-separated oriented triple, which the
    definiteness of the oriented construction propagates to all of them.
    """
    if omega is None:
        omega = invariant_symplectic(curve.rep)
    idx = [int(np.argmin(np.abs(curve.angles - a))) for a in _ORIENTED_ANGLES]
    lines = [ProjLine(curve.lines[i]) for i in idx]
    structure = j_from_lagrangians(*lines)
    min_eig, _ = definiteness_check(omega, structure, vectors=8)
    if min_eig < 0.0:
        return omega.negate()
    return omega
