"""The flag curve of a convex representation: closed form at the symmetric
point, attracting-flag sampling elsewhere, direct-sum certificates, the
finite-difference osculation surrogate, and duality.

A boundary point [cos t : sin t] carries the full flag of the cubic-powers
curve: the point [S^3], the line of cubics divisible by S^2, and the plane
of cubics divisible by S, for S = cos t * X + sin t * Y.  For deformed
representations the same flags are harvested from eigenvectors of word
images at the attracting fixed points of the base group, which are dense on
the boundary circle.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ModulusCollision, NotHyperbolic, NotRealSplit, TooFewSamples
from .parallel import worker_count
from .projective import (
    Flag3,
    Map4,
    ProjLine,
    ProjPlane,
    ProjPoint,
    canonical,
    eigen_flags,
    join,
    rank_margin,
)
from .reps import Rep4, _inv_ld
from .surface import BoundaryPoint, Rep2, batch_images, fixed_points, word_to_string

__all__ = [
    "FlagSample",
    "FlagCurve",
    "veronese_flag",
    "flag_from_element",
    "sample_curve",
    "check_sum_partitions",
    "osculation_check",
    "dual_curve",
    "flag_equivariance_residual",
    "curve_to_csv",
]


def veronese_flag(t: BoundaryPoint) -> Flag3:
    """The flag of the cubic-powers curve at a boundary point.

    For S = cos(t) X + sin(t) Y the point is [S^3] = (c^3, 3c^2 s, 3c s^2,
    s^3); the line is the span of S^2 X and S^2 Y (cubics divisible by
    S^2); the plane is the cubics divisible by S, whose covector is
    evaluation at the root of S.

    Parameters
    ----------
    t : BoundaryPoint
        Parameter on the boundary circle.

    Returns
    -------
    Flag3
        Point in line in plane; incidences hold by construction.
    """
    c, s = float(np.cos(t.angle)), float(np.sin(t.angle))
    point = ProjPoint([c ** 3, 3 * c * c * s, 3 * c * s * s, s ** 3])
    line = ProjLine(
        [c ** 4, 2 * c ** 3 * s, c * c * s * s, 3 * c * c * s * s, 2 * c * s ** 3, s ** 4]
    )
    # p is divisible by S iff p(s, -c) = 0.
    plane = ProjPlane([s ** 3, -s * s * c, s * c * c, -c ** 3])
    return Flag3(point, line, plane)


def flag_from_element(M: Map4) -> Flag3:
    """Attracting flag of a real-split map with distinct eigenvalue moduli.

    The point is the top eigenline, the line the span of the top two, the
    plane the span of the top three (computed as the annihilator of their
    stack, which equals the kernel of the bottom left-eigencovector).

    Raises
    ------
    NotRealSplit, ModulusCollision
        Propagated from the eigenvalue decomposition.
    """
    data = eigen_flags(M)
    point = data.eigenlines[0]
    line = join(point, data.eigenlines[1])
    top3 = np.array([l.coords for l in data.eigenlines[:3]])
    _, _, vt = np.linalg.svd(top3)
    plane = ProjPlane(vt[-1])
    return Flag3(point, line, plane)


@dataclass(frozen=True)
class FlagSample:
    """One flag on the curve: parameter, flag, and where it came from."""

    t: BoundaryPoint
    flag: Flag3
    source: str


class FlagCurve:
    """Flag samples sorted strictly by boundary angle.

    Coordinates are stored as arrays (rows canonicalized) so that bulk
    geometry stays vectorized; ``samples`` materializes the object view on
    first use.  Construction validates sorting, the minimum sample count,
    and every incidence; the equivariance of stored samples is a property
    of certified curves checked by ``flag_equivariance_residual``, not
    enforced here.
    """

    def __init__(self, angles, points, lines, planes, sources, rep: Rep4,
                 base: Rep2, skipped: int = 0):
        angles = np.asarray(angles, dtype=float)
        n = len(angles)
        if n < 4:
            raise TooFewSamples(f"{n} samples < 4")
        if not np.all(np.diff(angles) > 0):
            raise ValueError("angles must be strictly increasing")
        points = np.array([canonical(v) for v in np.asarray(points, dtype=float)])
        lines = np.array([canonical(v) for v in np.asarray(lines, dtype=float)])
        planes = np.array([canonical(v) for v in np.asarray(planes, dtype=float)])
        if not (len(points) == len(lines) == len(planes) == len(sources) == n):
            raise ValueError("field lengths disagree")
        self._validate_incidences(points, lines, planes)
        for arr in (angles, points, lines, planes):
            arr.flags.writeable = False
        self.angles = angles
        self.points = points
        self.lines = lines
        self.planes = planes
        self.sources = tuple(sources)
        self.rep = rep
        self.base = base
        self.skipped = int(skipped)

    @staticmethod
    def _validate_incidences(points, lines, planes, tol=1e-10):
        pp = np.abs(np.einsum("ij,ij->i", points, planes))
        lam = _primal_matrices(lines)
        dual = _primal_matrices(_involute(lines))
        pl = np.linalg.norm(np.einsum("nij,nj->ni", dual, points), axis=1)
        lp = np.linalg.norm(np.einsum("nij,nj->ni", lam, planes), axis=1)
        worst = max(pp.max(), pl.max(), lp.max())
        if worst > tol:
            raise ValueError(f"flag incidence residual {worst:.3e}")

    def __len__(self) -> int:
        return len(self.angles)

    @cached_property
    def samples(self):
        out = []
        for i in range(len(self)):
            out.append(FlagSample(BoundaryPoint(self.angles[i]), self.flag(i),
                                  self.sources[i]))
        return out

    def point(self, i: int) -> ProjPoint:
        return ProjPoint(self.points[i])

    def line(self, i: int) -> ProjLine:
        return ProjLine(self.lines[i])

    def plane(self, i: int) -> ProjPlane:
        return ProjPlane(self.planes[i])

    def flag(self, i: int) -> Flag3:
        return Flag3(self.point(i), self.line(i), self.plane(i))

    def locate(self, t, tol: float = 1e-10) -> int:
        """Index of the sample at boundary parameter ``t`` (within ``tol``).

        Raises
        ------
        ValueError
            If no sample sits at that angle — the caller asked for an
            unsampled parameter.
        """
        a = t.angle if isinstance(t, BoundaryPoint) else float(t) % np.pi
        i = int(np.searchsorted(self.angles, a))
        best, best_d = -1, np.inf
        for j in (i - 1, i % len(self), (i + 1) % len(self)):
            d = abs(self.angles[j] - a) % np.pi
            d = min(d, np.pi - d)
            if d < best_d:
                best, best_d = j, d
        if best_d > tol:
            raise ValueError(f"no sample within {tol} of angle {a}")
        return best


def _primal_matrices(lines):
    """Antisymmetric primal matrices for rows of Pluecker coordinates."""
    n = len(lines)
    out = np.zeros((n, 4, 4))
    p01, p02, p03, p12, p13, p23 = (lines[:, k] for k in range(6))
    out[:, 0, 1], out[:, 0, 2], out[:, 0, 3] = p01, p02, p03
    out[:, 1, 2], out[:, 1, 3], out[:, 2, 3] = p12, p13, p23
    out -= np.transpose(out, (0, 2, 1))
    return out


def _involute(lines):
    """The dual-coordinates involution on rows of Pluecker coordinates."""
    p01, p02, p03, p12, p13, p23 = (lines[:, k] for k in range(6))
    return np.column_stack([p23, -p13, p12, p03, -p02, p01])


def _pluecker_rows(u, v):
    """Pluecker coordinates of span(u_i, v_i) for stacked row vectors."""
    return np.column_stack(
        [
            u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0],
            u[:, 0] * v[:, 2] - u[:, 2] * v[:, 0],
            u[:, 0] * v[:, 3] - u[:, 3] * v[:, 0],
            u[:, 1] * v[:, 2] - u[:, 2] * v[:, 1],
            u[:, 1] * v[:, 3] - u[:, 3] * v[:, 1],
            u[:, 2] * v[:, 3] - u[:, 3] * v[:, 2],
        ]
    )


def _annihilators(triples):
    """Covectors annihilating stacked (n, 3, 4) row triples, via 3x3 minors.

    Cofactor expansion keeps the arithmetic dtype of the input (LAPACK
    determinants would force float64).
    """
    n = len(triples)
    out = np.empty((n, 4), dtype=triples.dtype)
    cols = np.arange(4)
    for k in range(4):
        a, b, c = cols[cols != k]
        r0, r1, r2 = triples[:, 0], triples[:, 1], triples[:, 2]
        det = (r0[:, a] * (r1[:, b] * r2[:, c] - r1[:, c] * r2[:, b])
               - r0[:, b] * (r1[:, a] * r2[:, c] - r1[:, c] * r2[:, a])
               + r0[:, c] * (r1[:, a] * r2[:, b] - r1[:, b] * r2[:, a]))
        out[:, k] = (-1.0) ** k * det
    return out


def _batched_eig(mats, workers: int):
    """np.linalg.eig over row-chunks, fanned out to threads."""
    if workers <= 1 or len(mats) < 256:
        return np.linalg.eig(mats)
    chunks = np.array_split(mats, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(np.linalg.eig, chunks))
    return (np.concatenate([r[0] for r in results]),
            np.concatenate([r[1] for r in results]))


def _images_longdouble(rep: Rep4, word_list) -> np.ndarray:
    """Word images accumulated in extended precision.

    Float64 products carry relative entry error that eigenvector
    extraction amplifies by the spectral spread of the image; harvesting
    flags to 1e-10 and better needs the images themselves accurate beyond
    float64.  Prefix products are cached, so the cost is one extended
    matmul per distinct prefix.
    """
    letters = {}
    for k, g in enumerate(rep.images):
        letters[2 * k] = np.asarray(g, dtype=np.longdouble)
        letters[2 * k + 1] = _inv_ld(g)
    cache = {(): np.eye(4, dtype=np.longdouble)}

    def img(wd):
        got = cache.get(wd)
        if got is None:
            got = img(wd[:-1]) @ letters[wd[-1]]
            cache[wd] = got
        return got

    return np.stack([img(tuple(int(s) for s in wd)) for wd in word_list])


def _refine_pairs(mld: np.ndarray, lam: np.ndarray, vecs: np.ndarray,
                  iters: int = 2):
    """Mixed-precision Newton refinement of simple eigenpairs.

    Residuals are accumulated in extended precision against ``mld`` while
    the bordered correction system is solved in float64, so each pair
    converges to the extended-precision eigenvector of the stored image
    rather than stalling at the float64 backward-error floor.

    Parameters
    ----------
    mld : (n, 4, 4) longdouble array
        Matrices whose eigenpairs are refined.
    lam : (n,) float array
        Eigenvalue estimates (simple, real).
    vecs : (n, 4) float array
        Eigenvector estimates.

    Returns
    -------
    (n, 4) longdouble eigenvectors (unit norm), (n,) longdouble eigenvalues.
    """
    v = vecs.astype(np.longdouble)
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    lam = lam.astype(np.longdouble)
    n = len(lam)
    eye = np.eye(4)
    mf = mld.astype(float)
    for _ in range(iters):
        mv = np.einsum("nij,nj->ni", mld, v)
        lam = np.einsum("ni,ni->n", v, mv)
        r = mv - lam[:, None] * v
        bordered = np.zeros((n, 5, 5))
        bordered[:, :4, :4] = mf - lam.astype(float)[:, None, None] * eye
        vf = v.astype(float)
        bordered[:, :4, 4] = vf
        bordered[:, 4, :4] = vf
        rhs = np.zeros((n, 5, 1))
        rhs[:, :4, 0] = -r.astype(float)
        try:
            sol = np.linalg.solve(bordered, rhs)
        except np.linalg.LinAlgError:
            break
        v = v + sol[:, :4, 0].astype(np.longdouble)
        v /= np.linalg.norm(v, axis=1, keepdims=True)
    mv = np.einsum("nij,nj->ni", mld, v)
    lam = np.einsum("ni,ni->n", v, mv)
    return v, lam


def sample_curve(rep: Rep4, base: Rep2, max_len: int) -> FlagCurve:
    """Harvest the flag curve at attracting fixed points of short words.

    Every cyclically reduced word up to ``max_len`` contributes the
    attracting fixed point of its base image as the parameter and the
    attracting flag of its 4x4 image as the flag.  Words whose images are
    not real-split with distinct eigenvalue moduli (or whose base image is
    not hyperbolic) are skipped and counted, not fatal.  Parameters are
    deduplicated at 1e-10 angle resolution, keeping the earliest word in
    (length, lexicographic) order.

    Raises
    ------
    TooFewSamples
        If fewer than 16 distinct parameters survive.
    """
    words, mats4 = batch_images(rep, max_len)
    _, mats2 = batch_images(base, max_len)
    n = len(words)
    eigvals, eigvecs = _batched_eig(mats4, worker_count())

    scale = np.max(np.abs(eigvals), axis=1)
    real_ok = np.all(
        np.abs(eigvals.imag) <= 1e-9 * np.maximum(scale, 1.0)[:, None], axis=1)
    w = eigvals.real
    order = np.argsort(-np.abs(w), axis=1)
    w_sorted = np.take_along_axis(w, order, axis=1)
    ratios = np.abs(w_sorted[:, :-1]) / np.abs(w_sorted[:, 1:])
    gap_ok = np.min(ratios, axis=1) >= 1.0 + 1e-8

    traces2 = np.abs(mats2[:, 0, 0] + mats2[:, 1, 1])
    hyp_ok = traces2 > 2.0

    # The trailing eigenvectors of an image are poorly conditioned: their
    # eigenvalues sit at the bottom of a spectrum whose top sets the matrix
    # norm.  The enumeration always contains each word's inverse, whose
    # image shares the same eigenbasis with reciprocal eigenvalues, so the
    # third and fourth basis vectors are read off as the *leading* two
    # eigenvectors of the inverse word's image instead.
    index_of = {tuple(int(s) for s in wd): k for k, wd in enumerate(words)}
    inv_perm = np.array([
        index_of[tuple(int(s) ^ 1 for s in reversed(wd))] for wd in words])

    keep = real_ok & gap_ok & hyp_ok
    keep &= keep[inv_perm]
    skipped = int(n - keep.sum())

    idx = np.flatnonzero(keep)
    if len(idx) < 16:
        raise TooFewSamples(f"{len(idx)} usable words < 16")
    pos = {int(i): p for p, i in enumerate(idx)}
    jpos = np.array([pos[int(j)] for j in inv_perm[idx]], dtype=int)

    # Refine the two leading eigenpairs of every kept image against an
    # extended-precision product; the trailing two basis vectors are the
    # leading pair of the inverse word's image.
    mld = _images_longdouble(rep, [words[i] for i in idx])
    v_f64 = np.take_along_axis(eigvecs.real[idx], order[idx][:, None, :], axis=2)
    w_s = w_sorted[idx]
    v1, l1 = _refine_pairs(mld, w_s[:, 0], v_f64[:, :, 0])
    v2, l2 = _refine_pairs(mld, w_s[:, 1], v_f64[:, :, 1])
    v = np.stack([v1, v2, v2[jpos], v1[jpos]], axis=2)
    lam = np.stack(
        [l1, l2, 1.0 / l2[jpos], 1.0 / l1[jpos]], axis=1)
    # Residual check relative to the spectral scale, as in eigen_flags.
    resid = np.linalg.norm(
        (np.einsum("nij,njk->nik", mld, v)
         - lam[:, None, :] * v).astype(float), axis=1)
    res_ok = np.all(resid <= 1e-9 * np.maximum(scale[idx], 1.0)[:, None], axis=1)
    if not np.all(res_ok):
        sub = np.flatnonzero(res_ok)
        skipped += int(len(idx) - len(sub))
        idx, v = idx[sub], v[sub]

    points = v[:, :, 0].astype(float)
    lines = _pluecker_rows(v[:, :, 0], v[:, :, 1]).astype(float)
    planes = _annihilators(
        np.transpose(v[:, :, :3], (0, 2, 1))).astype(float)

    angles = np.empty(len(idx))
    for j, i in enumerate(idx):
        att, _ = fixed_points(mats2[i])
        angles[j] = att.angle

    # Deduplicate by angle (1e-10), earliest enumerated word wins.
    order_a = np.argsort(angles, kind="stable")
    kept = []
    for j in order_a:
        if kept and abs(angles[j] - angles[kept[-1]]) < 1e-10:
            if idx[j] < idx[kept[-1]]:
                kept[-1] = j
            continue
        kept.append(j)
    if len(kept) > 1:
        first, last = kept[0], kept[-1]
        if (angles[first] - angles[last]) % np.pi < 1e-10:
            drop = last if idx[first] <= idx[last] else first
            kept.remove(drop)
    kept = np.array(kept, dtype=int)
    if len(kept) < 16:
        raise TooFewSamples(f"{len(kept)} distinct parameters < 16")

    sources = [word_to_string(words[i]) for i in idx[kept]]
    return FlagCurve(angles[kept], points[kept], lines[kept], planes[kept],
                     sources, rep, base, skipped=skipped)


def check_sum_partitions(curve: FlagCurve, partition, samples) -> float:
    """Direct-sum margin for flag subspaces at distinct samples.

    Stacks bases of the n_i-dimensional flag pieces at each sample (point
    coordinates for 1, a line basis for 2, a plane basis for 3) and returns
    the rank margin of the stack.  Zero means the sum is not direct; the
    caller asserts a threshold.

    Parameters
    ----------
    partition : sequence of int
        Piece dimensions, each >= 1, summing to at most 4.
    samples : sequence of int or FlagSample
        As many samples as parts; indices refer to ``curve``.
    """
    partition = [int(p) for p in partition]
    if any(p < 1 for p in partition):
        raise ValueError("partition entries must be >= 1")
    if sum(partition) > 4:
        raise ValueError("partition sums beyond the ambient dimension")
    if len(partition) != len(samples):
        raise ValueError("need as many samples as partition entries")
    rows = []
    for p, s in zip(partition, samples):
        flag = curve.flag(s) if isinstance(s, (int, np.integer)) else s.flag
        if p == 1:
            rows.append(flag.point.coords)
        elif p == 2:
            rows.extend(flag.line.basis())
        elif p == 3:
            _, _, vt = np.linalg.svd(flag.plane.covector.reshape(1, 4))
            rows.extend(vt[1:])
        else:
            rows.extend(np.eye(4))
    return rank_margin(rows)


def osculation_check(flag_map, t: BoundaryPoint, h: float) -> float:
    """Finite-difference osculation residual at parameter ``t``.

    Compares span(point(t-h), point(t), point(t+h)) against the plane at
    ``t`` and span(point(t), point(t+/-h)) against the line at ``t`` by
    principal angles; the maximum residual decays like O(h) on a curve
    whose flags osculate.

    Parameters
    ----------
    flag_map : callable BoundaryPoint -> Flag3
        Closed-form curve evaluation (e.g. ``veronese_flag``).
    h : float
        Step, within [1e-6, 1e-2].
    """
    if not 1e-6 <= h <= 1e-2:
        raise ValueError("step h must lie in [1e-6, 1e-2]")
    f0 = flag_map(t)
    fm = flag_map(BoundaryPoint(t.angle - h))
    fp = flag_map(BoundaryPoint(t.angle + h))
    pts = np.array([fm.point.coords, f0.point.coords, fp.point.coords])
    if min(fm.point.dist(f0.point), fp.point.dist(f0.point),
           fm.point.dist(fp.point)) < 1e-12:
        raise ValueError("repeated points span nothing")
    q3, _ = np.linalg.qr(pts.T)  # columns: orthonormal basis of the 3-span
    r_plane = float(np.linalg.norm(q3.T @ f0.plane.covector))

    line_basis = np.array(f0.line.basis())
    r_line = 0.0
    for other in (fm, fp):
        q2, _ = np.linalg.qr(np.array([f0.point.coords, other.point.coords]).T)
        sigma = np.linalg.svd(line_basis @ q2, compute_uv=False)
        r_line = max(r_line, float(np.sqrt(max(0.0, 1.0 - sigma[-1] ** 2))))
    return max(r_plane, r_line)


def dual_curve(curve: FlagCurve) -> FlagCurve:
    """The dual flag curve: planes become points, points become planes.

    Lines map through the dual-coordinates involution; the parameter and
    its orientation are untouched.  The dual curve is equivariant for the
    inverse-transpose representation, which is what its ``rep`` field
    holds.
    """
    dual_rep = Rep4([np.linalg.inv(g).T for g in curve.rep.images],
                    curve.rep.provenance)
    return FlagCurve(curve.angles, curve.planes.copy(), _involute(curve.lines),
                     curve.points.copy(), curve.sources, dual_rep, curve.base,
                     skipped=curve.skipped)


def _chordal_rows(u, v):
    """Row-wise chordal distance between two stacks of projective vectors."""
    un = u / np.linalg.norm(u, axis=1, keepdims=True)
    vn = v / np.linalg.norm(v, axis=1, keepdims=True)
    return np.minimum(np.linalg.norm(un - vn, axis=1),
                      np.linalg.norm(un + vn, axis=1))


def flag_equivariance_residual(curve: FlagCurve):
    """Max chordal mismatch of stored flags under the group action.

    For every letter g, each sampled parameter t is pushed to the boundary
    image of t under the base letter; wherever that angle is itself sampled
    (1e-10), the stored flag there is compared against the acted flag.
    Returns (max residual over point/line/plane, number of matched pairs).
    """
    worst, matched = 0.0, 0
    cos_sin = np.column_stack([np.cos(curve.angles), np.sin(curve.angles)])
    for letter in range(8):
        B = curve.base.letter_matrix(letter)
        M = curve.rep.letter_matrix(letter)
        imgs = cos_sin @ B.T
        im_angles = np.arctan2(imgs[:, 1], imgs[:, 0]) % np.pi
        pos = np.searchsorted(curve.angles, im_angles)
        cand = np.stack([(pos - 1) % len(curve), pos % len(curve)])
        diffs = np.abs(curve.angles[cand] - im_angles[None, :]) % np.pi
        diffs = np.minimum(diffs, np.pi - diffs)
        which = np.argmin(diffs, axis=0)
        best = cand[which, np.arange(len(curve))]
        hit = diffs[which, np.arange(len(curve))] < 1e-10
        if not np.any(hit):
            continue
        src = np.flatnonzero(hit)
        dst = best[hit]
        matched += len(src)
        acted_pts = curve.points[src] @ M.T
        worst = max(worst, _chordal_rows(acted_pts, curve.points[dst]).max())
        minv_t = np.linalg.inv(M).T
        acted_planes = curve.planes[src] @ minv_t.T
        worst = max(worst, _chordal_rows(acted_planes, curve.planes[dst]).max())
        lam = _primal_matrices(curve.lines[src])
        acted = np.einsum("ij,njk,lk->nil", M, lam, M)
        acted_lines = np.column_stack(
            [acted[:, 0, 1], acted[:, 0, 2], acted[:, 0, 3],
             acted[:, 1, 2], acted[:, 1, 3], acted[:, 2, 3]])
        worst = max(worst, _chordal_rows(acted_lines, curve.lines[dst]).max())
    return worst, matched


def curve_to_csv(curve: FlagCurve, path) -> None:
    """Write the curve as CSV: angle, point, line, plane, source word."""
    header = ("angle,x0,x1,x2,x3,p01,p02,p03,p12,p13,p23,"
              "h0,h1,h2,h3,source")
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for i in range(len(curve)):
            nums = np.concatenate(
                [[curve.angles[i]], curve.points[i], curve.lines[i],
                 curve.planes[i]])
            fh.write(",".join("%.17g" % x for x in nums)
                     + f",{curve.sources[i]}\n")
