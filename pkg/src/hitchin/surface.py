"""The genus-2 surface group: words, the octagon Fuchsian representation,
the boundary circle RP^1, fixed points, orientation, lengths, proximality.

Words
-----
A word is a tuple of letters; letter ``2k`` is generator ``k`` and ``2k + 1``
its inverse (generators in order a1, b1, a2, b2 for genus 2).  The string
form uses ``a b c d`` for the generators and capitals for inverses.

Boundary
--------
The boundary circle is RP^1 with points ``[cos t : sin t]`` parametrized by
the angle ``t in [0, pi)``.  A triple is positively oriented when the angles
occur in counterclockwise cyclic order (period pi).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoincidentPoints, NotHyperbolic, UnsupportedGenus

GENUS = 2
ALPHABET = 4 * GENUS  # letters 0..7: a, A, b, B, c, C, d, D

_LETTER_CHARS = "aAbBcCdD"


def inverse_letter(letter: int) -> int:
    return letter ^ 1


def word_to_string(w) -> str:
    return "".join(_LETTER_CHARS[letter] for letter in w)


def word_from_string(s: str):
    try:
        return tuple(_LETTER_CHARS.index(ch) for ch in s)
    except ValueError:
        raise ValueError(f"invalid word string {s!r}") from None


def is_reduced(w) -> bool:
    return all(w[i + 1] != inverse_letter(w[i]) for i in range(len(w) - 1))


def is_cyclically_reduced(w) -> bool:
    if not is_reduced(w):
        return False
    return len(w) < 2 or w[0] != inverse_letter(w[-1])


def relation_word(genus: int):
    """The surface relator [a1,b1]...[ag,bg] as a word (length 4*genus)."""
    if genus < 2:
        raise UnsupportedGenus(f"genus {genus} < 2")
    letters = []
    for i in range(genus):
        a, b = 2 * (2 * i), 2 * (2 * i + 1)
        letters += [a, b, inverse_letter(a), inverse_letter(b)]
    return tuple(letters)


class Rep:
    """A representation given by generator images (square matrices).

    Word evaluation is memoized by prefix; the memo is an internal cache and
    ``eval_word`` is observationally pure (concurrent duplicate fills are
    harmless).
    """

    def __init__(self, images):
        mats = [np.asarray(m, dtype=float) for m in images]
        n = mats[0].shape[0]
        if any(m.shape != (n, n) for m in mats):
            raise ValueError("generator images must share one square shape")
        self.dim = n
        self.images = tuple(mats)
        letters = []
        for m in mats:
            letters.append(m)
            letters.append(np.linalg.inv(m))
        self._letters = tuple(letters)
        self._memo = {(): np.eye(n)}

    def letter_matrix(self, letter: int):
        return self._letters[letter]

    def eval(self, w):
        w = tuple(w)
        cached = self._memo.get(w)
        if cached is not None:
            return cached
        m = self.eval(w[:-1]) @ self._letters[w[-1]]
        self._memo[w] = m
        return m


class Rep2(Rep):
    """A surface-group representation into SL_2(R) (genus 2)."""

    def __init__(self, images):
        super().__init__(images)
        if self.dim != 2 or len(self.images) != 4:
            raise ValueError("Rep2 expects 4 matrices of shape (2, 2)")
        for m in self.images:
            if abs(np.linalg.det(m) - 1.0) > 1e-12:
                raise ValueError("generator image is not in SL_2 (det != 1)")


def eval_word(rep: Rep, w):
    """Left-to-right product of generator images along the word."""
    return rep.eval(w)


def relation_residual_2(rep: Rep2) -> float:
    """Frobenius distance of the evaluated relator from +-Id."""
    r = rep.eval(relation_word(GENUS))
    eye = np.eye(rep.dim)
    return min(np.linalg.norm(r - eye), np.linalg.norm(r + eye))


# --- The octagon uniformization -------------------------------------------
#
# Regular hyperbolic octagon centered at i in the upper half-plane, vertex
# angle pi/4.  cosh(apothem) = cot(pi/8) = 1 + sqrt(2).  Side k is paired
# with side k+4 by pair(i, j) = M_i * rot(pi) * M_j^(-1), where M_k moves the
# base point to the midpoint of side k.  The labeling below is the one whose
# commutator relator evaluates to +Id (verified by walking the vertex cycle
# of the side-pairing).


def _rot(phi):
    c, s = np.cos(phi / 2.0), np.sin(phi / 2.0)
    return np.array([[c, s], [-s, c]])


def _trans(length):
    return np.array([[np.exp(length / 2.0), 0.0], [0.0, np.exp(-length / 2.0)]])


def fuchsian_octagon() -> Rep2:
    """Generator images of the genus-2 uniformization from the regular octagon.

    All four images have trace of modulus 2 + sqrt(2) and the relator
    [a1,b1][a2,b2] evaluates to the identity to machine precision.
    """
    apothem = np.arccosh(1.0 + np.sqrt(2.0))
    flip = _rot(np.pi)

    def side(k):
        return _rot(k * np.pi / 4.0) @ _trans(apothem)

    def pair(i, j):
        return side(i) @ flip @ np.linalg.inv(side(j))

    return Rep2([pair(3, 1), pair(0, 2), pair(7, 5), pair(4, 6)])


# --- Boundary circle -------------------------------------------------------


@dataclass(frozen=True)
class BoundaryPoint:
    """A point [cos t : sin t] of RP^1, canonical angle in [0, pi)."""

    angle: float

    def __init__(self, angle: float):
        object.__setattr__(self, "angle", float(angle) % np.pi)

    def vector(self):
        return np.array([np.cos(self.angle), np.sin(self.angle)])

    def cyclic_dist(self, other: "BoundaryPoint") -> float:
        d = abs(self.angle - other.angle) % np.pi
        return min(d, np.pi - d)


def mobius_angle(A, t: BoundaryPoint) -> BoundaryPoint:
    """The image angle of a boundary point under a 2x2 matrix."""
    v = np.asarray(A, dtype=float) @ t.vector()
    return BoundaryPoint(np.arctan2(v[1], v[0]))


def oriented(t1: BoundaryPoint, t2: BoundaryPoint, t3: BoundaryPoint) -> bool:
    """True iff the angles occur in counterclockwise cyclic order (period pi)."""
    if (
        t1.cyclic_dist(t2) < 1e-12
        or t1.cyclic_dist(t3) < 1e-12
        or t2.cyclic_dist(t3) < 1e-12
    ):
        raise CoincidentPoints("oriented() needs pairwise distinct points")
    d2 = (t2.angle - t1.angle) % np.pi
    d3 = (t3.angle - t1.angle) % np.pi
    return d2 < d3


@dataclass(frozen=True)
class BoundaryTriple:
    """A positively oriented triple (t_plus, t_zero, t_minus)."""

    t_plus: BoundaryPoint
    t_zero: BoundaryPoint
    t_minus: BoundaryPoint

    def __init__(self, t_plus, t_zero, t_minus):
        if not oriented(t_plus, t_zero, t_minus):
            raise CoincidentPoints("triple is not positively oriented")
        object.__setattr__(self, "t_plus", t_plus)
        object.__setattr__(self, "t_zero", t_zero)
        object.__setattr__(self, "t_minus", t_minus)


def fixed_points(A):
    """(attracting, repelling) boundary fixed points of a hyperbolic matrix."""
    A = np.asarray(A, dtype=float)
    tr = A[0, 0] + A[1, 1]
    if abs(tr) <= 2.0:
        raise NotHyperbolic(f"|trace| = {abs(tr)} <= 2")
    root = np.sqrt(tr * tr - 4.0)
    sign = 1.0 if tr > 0 else -1.0
    lam_att = (tr + sign * root) / 2.0
    lam_rep = (tr - sign * root) / 2.0

    def direction(lam):
        v1 = np.array([A[0, 1], lam - A[0, 0]])
        v2 = np.array([lam - A[1, 1], A[1, 0]])
        v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
        return BoundaryPoint(np.arctan2(v[1], v[0]))

    return direction(lam_att), direction(lam_rep)


def translation_length(A) -> float:
    """2 * arccosh(|trace| / 2) for a hyperbolic 2x2 matrix."""
    A = np.asarray(A, dtype=float)
    tr = abs(A[0, 0] + A[1, 1])
    if tr <= 2.0:
        raise NotHyperbolic(f"|trace| = {tr} <= 2")
    return 2.0 * float(np.arccosh(tr / 2.0))


# --- Word enumeration ------------------------------------------------------


def _reduced_levels(max_len: int):
    """Reduced words by length, as int arrays of shape (count, length)."""
    levels = [np.arange(ALPHABET, dtype=np.int64).reshape(-1, 1)]
    for _ in range(2, max_len + 1):
        prev = levels[-1]
        blocks = []
        for letter in range(ALPHABET):
            ok = prev[:, -1] != inverse_letter(letter)
            chunk = prev[ok]
            col = np.full((len(chunk), 1), letter, dtype=np.int64)
            blocks.append(np.hstack([chunk, col]))
        levels.append(np.vstack(blocks))
    return levels


def enumerate_words(max_len: int):
    """All cyclically reduced words of length 1..max_len.

    Ordered by (length, lexicographic on letter codes); no quotienting by the
    surface relation is attempted.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    out = []
    for level in _reduced_levels(max_len):
        mask = level[:, -1] != (level[:, 0] ^ 1)
        if level.shape[1] == 1:
            mask = np.ones(len(level), dtype=bool)
        sel = level[mask]
        order = np.lexsort(sel.T[::-1])
        out.extend(map(tuple, sel[order]))
    return out


def batch_images(rep: Rep, max_len: int):
    """(words, matrices) for all cyclically reduced words up to max_len.

    Matrices are stacked as an array of shape (count, dim, dim), evaluated
    level by level with one batched multiply per letter — the bulk companion
    of eval_word for certification sweeps.
    """
    dim = rep.dim
    mats = np.array([rep.letter_matrix(letter) for letter in range(ALPHABET)])
    level_words = np.arange(ALPHABET, dtype=np.int64).reshape(-1, 1)
    level_mats = mats.copy()
    words, images = [], []

    def emit(lw, lm):
        mask = lw[:, -1] != (lw[:, 0] ^ 1) if lw.shape[1] > 1 else np.ones(len(lw), bool)
        sel_w, sel_m = lw[mask], lm[mask]
        order = np.lexsort(sel_w.T[::-1])
        words.extend(map(tuple, sel_w[order]))
        images.append(sel_m[order])

    emit(level_words, level_mats)
    for _ in range(2, max_len + 1):
        blocks_w, blocks_m = [], []
        for letter in range(ALPHABET):
            ok = level_words[:, -1] != inverse_letter(letter)
            chunk_w = level_words[ok]
            col = np.full((len(chunk_w), 1), letter, dtype=np.int64)
            blocks_w.append(np.hstack([chunk_w, col]))
            blocks_m.append(level_mats[ok] @ mats[letter])
        level_words = np.vstack(blocks_w)
        level_mats = np.vstack(blocks_m)
        emit(level_words, level_mats)
    return words, np.vstack(images)


# --- Proximality -----------------------------------------------------------


def is_proximal(A, r: float, eps: float) -> bool:
    """Grid check of (r, eps)-proximality on the boundary circle.

    True iff the fixed points are at cyclic distance >= 2r and, on a
    720-point grid excluding the eps-ball around the repelling point, the
    matrix maps everything into the eps-ball around the attracting point and
    is eps-Lipschitz there.  Non-hyperbolic input returns False (no axis).
    """
    if not r > eps > 0:
        raise ValueError("need r > eps > 0")
    A = np.asarray(A, dtype=float)
    if abs(A[0, 0] + A[1, 1]) <= 2.0:
        return False
    att, rep = fixed_points(A)
    if att.cyclic_dist(rep) < 2.0 * r:
        return False
    grid = np.linspace(0.0, np.pi, 720, endpoint=False)
    pts = [BoundaryPoint(t) for t in grid]
    kept = [t for t in pts if t.cyclic_dist(rep) >= eps]
    imgs = [mobius_angle(A, t) for t in kept]
    if any(img.cyclic_dist(att) > eps for img in imgs):
        return False
    for i in range(len(kept)):
        j = (i + 1) % len(kept)
        d = kept[i].cyclic_dist(kept[j])
        if d > 0 and imgs[i].cyclic_dist(imgs[j]) > eps * d:
            return False
    return True
