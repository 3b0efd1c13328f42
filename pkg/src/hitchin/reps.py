"""Representations into SL_4(R): the symmetric-cube lift, the diagonal
embedding, the invariant symplectic form, and projection back onto the
representation variety after a deformation.

The symmetric-cube convention: a 2x2 matrix [[a, b], [c, d]] acts on binary
cubics by the substitution X -> aX + cY, Y -> bX + dY, so that coefficient
vectors in the monomial basis (X^3, X^2 Y, X Y^2, Y^3) transform by sym3 of
the matrix itself.  This is the convention under which the coefficient
parametrization [cos t : sin t] -> (cos^3, 3 cos^2 sin, 3 cos sin^2, sin^3)
of the cubic-powers curve is equivariant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import NoConvergence, NoInvariantForm, NotUnimodular
from .surface import ALPHABET, GENUS, Rep, Rep2, relation_word

__all__ = [
    "Rep4",
    "SymplecticForm",
    "sym3",
    "diag_embed",
    "sym3_rep",
    "diag_rep",
    "invariant_symplectic",
    "relation_residual",
    "project_to_variety",
    "deform",
    "SplitMix64",
]


def _check_unimodular(A, tol):
    if abs(np.linalg.det(A) - 1.0) > tol:
        raise NotUnimodular(f"det = {np.linalg.det(A)}")


def sym3(A):
    """Induced action of an SL_2 matrix on the monomial basis of binary cubics.

    Column k holds the coefficients of (aX + cY)^(3-k) (bX + dY)^k, computed
    by coefficient convolution.  Multiplicative, determinant 1.
    """
    A = np.asarray(A, dtype=float)
    _check_unimodular(A, 1e-10)
    col_x = np.array([A[0, 0], A[1, 0]])  # image of X
    col_y = np.array([A[0, 1], A[1, 1]])  # image of Y
    cols = []
    for k in range(4):
        c = np.array([1.0])
        for _ in range(3 - k):
            c = np.convolve(c, col_x)
        for _ in range(k):
            c = np.convolve(c, col_y)
        full = np.zeros(4)
        full[4 - len(c):] = c
        cols.append(full)
    return np.array(cols).T


def diag_embed(A):
    """Block-diagonal embedding diag(A, A) of an SL_2 matrix."""
    A = np.asarray(A, dtype=float)
    _check_unimodular(A, 1e-10)
    out = np.zeros((4, 4))
    out[:2, :2] = A
    out[2:, 2:] = A
    return out


class Rep4(Rep):
    """A surface-group representation into SL_4(R) with a provenance tag."""

    def __init__(self, images, provenance: str):
        super().__init__(images)
        if self.dim != 4 or len(self.images) != 4:
            raise ValueError("Rep4 expects 4 matrices of shape (4, 4)")
        for m in self.images:
            if abs(np.linalg.det(m) - 1.0) > 1e-10:
                raise NotUnimodular("generator image is not in SL_4")
        if provenance not in ("irreducible", "diagonal", "deformed"):
            raise ValueError(f"unknown provenance {provenance!r}")
        self.provenance = provenance


def sym3_rep(base: Rep2) -> Rep4:
    return Rep4([sym3(m) for m in base.images], "irreducible")


def diag_rep(base: Rep2) -> Rep4:
    return Rep4([diag_embed(m) for m in base.images], "diagonal")


def relation_residual(rep: Rep) -> float:
    """Frobenius distance of the evaluated relator from the identity,
    after projectively aligning sign.

    The relator is accumulated in extended precision: its factors have norm
    ~30, so plain float64 evaluation carries ~1e-10 of rounding noise, which
    would mask exactly the residuals this function is meant to measure.
    """
    typed = [np.asarray(m, dtype=np.longdouble) for m in rep.images]
    inv = [_inv_ld(m) for m in typed]
    table = {}
    for k, (m, mi) in enumerate(zip(typed, inv)):
        table[2 * k] = m
        table[2 * k + 1] = mi
    r = np.eye(rep.dim, dtype=np.longdouble)
    for letter in relation_word(len(rep.images) // 2):
        r = r @ table[letter]
    r = np.asarray(r, dtype=float)
    eye = np.eye(rep.dim)
    return float(min(np.linalg.norm(r - eye), np.linalg.norm(r + eye)))


@dataclass(frozen=True)
class SymplecticForm:
    """An invariant symplectic form, Frobenius-normalized."""

    omega: np.ndarray

    def __init__(self, omega):
        m = np.asarray(omega, dtype=float)
        if np.linalg.norm(m + m.T) > 1e-9 * np.linalg.norm(m):
            raise ValueError("form is not antisymmetric")
        m = m / np.linalg.norm(m)
        if np.linalg.det(m) <= 1e-12:
            raise ValueError("form is degenerate")
        m.flags.writeable = False
        object.__setattr__(self, "omega", m)

    def pair(self, u, v) -> float:
        return float(u @ self.omega @ v)

    def negate(self) -> "SymplecticForm":
        return SymplecticForm(-self.omega)


_ANTISYM_BASIS = []
for _i in range(4):
    for _j in range(_i + 1, 4):
        _m = np.zeros((4, 4))
        _m[_i, _j] = 1.0
        _m[_j, _i] = -1.0
        _ANTISYM_BASIS.append(_m)


def invariant_symplectic(rep: Rep4) -> SymplecticForm:
    """Solve g^T W g = W over antisymmetric W for the first two generators.

    The solution space must be exactly 1-dimensional; the returned form is
    normalized with the deterministic sign convention (first nonzero entry of
    (w01, w02, w03, w12, w13, w23) positive) and verified invariant for all
    four generators to 1e-9 relative.

    Raises
    ------
    NoInvariantForm
        If the solution space dimension differs from 1, or the residual check
        on the remaining generators fails.
    """
    blocks = []
    for g in rep.images[:2]:
        cols = [(g.T @ b @ g - b).ravel() for b in _ANTISYM_BASIS]
        blocks.append(np.array(cols).T)  # (16, 6) constraint block
    system = np.vstack(blocks)  # (32, 6); null space = invariant forms
    _, s, vt = np.linalg.svd(system, full_matrices=True)
    null_dim = int(np.sum(s < 1e-10 * s[0]))
    if null_dim != 1:
        raise NoInvariantForm(f"solution space dimension {null_dim}")
    coeffs = vt[-1]
    # Deterministic sign: first coefficient of modulus > 1e-12 made positive.
    for x in coeffs:
        if abs(x) > 1e-12:
            if x < 0:
                coeffs = -coeffs
            break
    w = sum(c * b for c, b in zip(coeffs, _ANTISYM_BASIS))
    form = SymplecticForm(w)
    for g in rep.images:
        residual = np.linalg.norm(g.T @ form.omega @ g - form.omega)
        if residual > 1e-9 * np.linalg.norm(g) ** 2:
            raise NoInvariantForm(f"invariance residual {residual:.3e}")
    return form


# --- Gauss-Newton projection onto the relation variety ---------------------

# Orthonormal basis of sl_4 (trace-free 4x4), as a (15, 16) matrix acting on
# row-major flattened matrices.


def _sl4_basis():
    mats = []
    for i in range(4):
        for j in range(4):
            if i != j:
                m = np.zeros((4, 4))
                m[i, j] = 1.0
                mats.append(m)
    diags = [np.diag([1.0, -1.0, 0.0, 0.0]), np.diag([1.0, 1.0, -2.0, 0.0]),
             np.diag([1.0, 1.0, 1.0, -3.0])]
    for d in diags:
        mats.append(d / np.linalg.norm(d))
    return mats


_SL4 = _sl4_basis()
_SL4_FLAT = np.array([m.ravel() for m in _SL4])  # (15, 16), orthonormal rows


def _dlog_series(L):
    """The 16x16 operator x / (e^x - 1) evaluated at ad_L.

    Maps the right-trivialized increment R' R^{-1} to the derivative of
    log R.  Series 1 - x/2 + x^2/12 - x^4/720 + x^6/30240 - x^8/1209600,
    accurate to ~1e-12 for the relator logs this is applied to (norm << 1).
    """
    eye4 = np.eye(4)
    K = np.kron(L, eye4) - np.kron(eye4, L.T)
    K2 = K @ K
    K4 = K2 @ K2
    K6 = K4 @ K2
    K8 = K4 @ K4
    return (
        np.eye(16)
        - K / 2.0
        + K2 / 12.0
        - K4 / 720.0
        + K6 / 30240.0
        - K8 / 1209600.0
    )


def _relator_letters():
    return relation_word(GENUS)


def _word_factors(mats, letters, dtype=float):
    typed = [np.asarray(m, dtype=dtype) for m in mats]
    inv = [np.linalg.inv(m) if dtype == float else _inv_ld(m) for m in typed]
    table = {}
    for k in range(len(mats)):
        table[2 * k] = typed[k]
        table[2 * k + 1] = inv[k]
    return [table[letter] for letter in letters]


def _inv_ld(m):
    """Longdouble matrix inverse: Newton refinement of the float64 inverse."""
    x = np.linalg.inv(np.asarray(m, dtype=float)).astype(np.longdouble)
    m = np.asarray(m, dtype=np.longdouble)
    eye = np.eye(m.shape[0], dtype=np.longdouble)
    for _ in range(2):
        x = x @ (2.0 * eye - m @ x)
    return x


def _relator_value(mats):
    """The relator image, accumulated in extended precision.

    Products of eight factors of norm ~30 amplify rounding by ~1e6, which
    would put plain float64 evaluation noise right at the 1e-10 convergence
    target; longdouble accumulation keeps the measured residual honest.
    """
    R = np.eye(4, dtype=np.longdouble)
    for f in _word_factors(mats, _relator_letters(), dtype=np.longdouble):
        R = R @ f
    return R


# The trace-free log residual only makes sense close to the variety.  Far
# from it the relation is solved by direct reconstruction; once |R - Id|
# drops below _LOG_PHASE the Gauss-Newton polish takes over, where both the
# log series and its differential are accurate to ~1e-12 or better.
_LOG_PHASE = 0.3

# A representation whose relator image is within this Frobenius distance of
# the identity counts as a member of the relation variety (the same bound
# the rest of the library uses for relation checks); projection returns
# such input unchanged.
_ON_VARIETY = 1e-9


def _residual_far(R):
    return np.asarray((R - np.eye(4, dtype=R.dtype)).ravel(), dtype=float)


def _residual_log(R):
    """Trace-free log coordinates of a relator image with |R - Id| < 1.

    The principal log is computed by the Mercator series on D = R - Id in
    the accumulation precision, so the returned 15-vector is exact to well
    below the 1e-10 stopping target.
    """
    D = R - np.eye(4, dtype=R.dtype)
    if np.linalg.norm(np.asarray(D, dtype=float)) >= 1.0:
        raise NoConvergence("relator too far from identity for the log branch")
    L = np.zeros((4, 4), dtype=R.dtype)
    term = np.eye(4, dtype=R.dtype)
    for k in range(1, 60):
        term = term @ D
        L = L + ((-1.0) ** (k + 1) / k) * term
    L = np.asarray(L, dtype=float)
    L = L - np.trace(L) / 4.0 * np.eye(4)
    return _SL4_FLAT @ L.ravel(), L


def _word_derivatives(mats, letters, gens):
    """Derivative of a word's image for each (generator, direction) pair.

    Returns the matrices d_{i,m} W, ordered generator-major over ``gens``,
    for right-translated charts g_i -> g_i exp(eps E_m).
    """
    factors = _word_factors(mats, letters)
    n = len(factors)
    prefixes = [np.eye(4)]
    for f in factors[:-1]:
        prefixes.append(prefixes[-1] @ f)
    suffixes = [np.eye(4)] * n
    acc = np.eye(4)
    for k in range(n - 2, -1, -1):
        acc = factors[k + 1] @ acc
        suffixes[k] = acc
    out = []
    for i in gens:
        gi = mats[i]
        gi_inv = np.linalg.inv(gi)
        for Em in _SL4:
            dW = np.zeros((4, 4))
            for k, letter in enumerate(letters):
                if letter // 2 != i:
                    continue
                if letter % 2 == 0:
                    d_factor = gi @ Em
                else:
                    d_factor = -Em @ gi_inv
                dW += prefixes[k] @ d_factor @ suffixes[k]
            out.append(dW)
    return out


def _jacobian_log(mats, R, L):
    """Jacobian of the trace-free log residual: d(log) series at ad_L."""
    Rinv = np.linalg.inv(np.asarray(R, dtype=float))
    dlog = _dlog_series(L)
    cols = []
    for dR in _word_derivatives(mats, _relator_letters(), (0, 1, 2, 3)):
        C = dR @ Rinv
        dL = (dlog @ C.ravel()).reshape(4, 4)
        cols.append(_SL4_FLAT @ dL.ravel())
    return np.array(cols).T  # (15, 60)


def _apply_step(mats, gens, step, alpha):
    trial = [m.copy() for m in mats]
    for idx, i in enumerate(gens):
        X = sum(step[15 * idx + m] * _SL4[m] for m in range(15)) * alpha
        trial[i] = mats[i] @ expm(X)
    return trial


# The relation [a1,b1][a2,b2] = Id determines the last generator up to a
# linear solve: with C = [a1,b1] it reads (C a2) b2 = b2 a2, a Sylvester
# equation, solvable exactly when C a2 is similar to a2.  The word below is
# C a2; matching its characteristic polynomial to a2's is the solvability
# condition, and the only nonlinear step of the reconstruction.
_CHAR_WORD = (0, 2, 1, 3, 4)


def _char_coeffs(M):
    """First three elementary symmetric functions of the eigenvalues.

    (The fourth is the determinant, which is 1 for everything this is
    applied to.)  Computed from power traces in the input's dtype.
    """
    t1 = np.trace(M)
    M2 = M @ M
    t2 = np.trace(M2)
    t3 = np.trace(M2 @ M)
    e2 = (t1 * t1 - t2) / 2.0
    e3 = (t1 ** 3 - 3.0 * t1 * t2 + 2.0 * t3) / 6.0
    return np.array([t1, e2, e3])


def _char_word_value(mats):
    M = np.eye(4, dtype=np.longdouble)
    for f in _word_factors(mats, _CHAR_WORD, dtype=np.longdouble):
        M = M @ f
    return M


def _match_characters(mats, max_iter=20, tol=1e-10):
    """Minimum-norm correction of the first two generators until [a1,b1] a2
    has (nearly) the same characteristic polynomial as a2.

    Three scalar conditions against thirty trace-free directions; the
    conditions are evaluated in extended precision (their power traces
    suffer the same rounding amplification as the relator) and equilibrated
    row-wise, since the three coefficients live on very different scales.
    Stops at ``tol`` or at the evaluation noise floor, whichever comes
    first — the caller judges success by the relator itself.
    """
    mats = [m.copy() for m in mats]
    target = np.asarray(
        _char_coeffs(np.asarray(mats[2], dtype=np.longdouble)), dtype=float)
    weights = np.maximum(1.0, np.abs(target))

    def conditions(ms):
        coeffs = np.asarray(_char_coeffs(_char_word_value(ms)), dtype=float)
        return (coeffs - target) / weights

    c = conditions(mats)
    for _ in range(max_iter):
        if np.linalg.norm(c) < tol:
            break
        M = np.asarray(_char_word_value(mats), dtype=float)
        MM = M @ M
        t1 = np.trace(M)
        t2 = np.trace(MM)
        dWs = _word_derivatives(mats, _CHAR_WORD, (0, 1))
        J = np.empty((3, len(dWs)))
        for j, dM in enumerate(dWs):
            dt1 = np.trace(dM)
            m1 = np.trace(M @ dM)
            m2 = np.trace(MM @ dM)
            J[0, j] = dt1
            J[1, j] = t1 * dt1 - m1
            J[2, j] = (t1 * t1 - t2) / 2.0 * dt1 - t1 * m1 + m2
        J /= weights[:, None]
        step, *_ = np.linalg.lstsq(J, -c, rcond=None)
        base = np.linalg.norm(c)
        alpha = 1.0
        for _halve in range(30):
            trial = _apply_step(mats, (0, 1), step, alpha)
            ct = conditions(trial)
            if np.linalg.norm(ct) < base:
                mats, c = trial, ct
                break
            alpha /= 2.0
        else:
            break  # noise floor: no direction improves the conditions
    return mats


def _reconstruct_last(mats):
    """Rebuild the last generator from the linear form of the relation.

    The solution space of (C a2) S = S a2 is computed from the small
    singular vectors of the Sylvester operator; the current last generator
    is orthogonally projected onto it and rescaled to determinant one.  The
    projection is the closest relation-exact replacement, so a small input
    perturbation stays small.
    """
    a2 = mats[2]
    CA = np.asarray(_char_word_value(mats), dtype=float)
    K = np.kron(CA, np.eye(4)) - np.kron(np.eye(4), a2.T)
    _, s, vt = np.linalg.svd(K)
    near_null = int(np.sum(s < 1e-6 * s[0]))
    k = max(4, near_null)
    basis = vt[len(s) - k:]  # orthonormal rows spanning the solution space
    coeffs = basis @ mats[3].ravel()
    S = (coeffs @ basis).reshape(4, 4)
    d = np.linalg.det(S)
    if d <= 1e-12:
        raise NoConvergence("reconstructed generator is degenerate")
    out = [m.copy() for m in mats]
    out[3] = S / d ** 0.25
    return out


def project_to_variety(rep: Rep4, max_iter: int = 50, target: float = 1e-10) -> Rep4:
    """Project generator images onto the relation variety.

    Far from the variety (relator image more than 0.1 from the identity)
    the relation is solved directly: the first two generators get a
    minimum-norm correction making [a1,b1] a2 similar to a2 — the exact
    solvability condition — and the last generator is rebuilt from the
    resulting linear conjugacy equation.  The leftover defect (rounding of
    the reconstruction, amplified ~1e6 by the relator's conditioning) is
    then polished by Gauss-Newton on the trace-free log of the relator
    image, evaluated in extended precision so residuals near the 1e-10
    target stay measurable.  Input already on the variety (relation
    residual below the 1e-9 membership bound) is returned unchanged.

    Raises
    ------
    NoConvergence
        If reconstruction degenerates or the polish residual does not reach
        ``target`` within ``max_iter`` steps.
    """
    mats = [m.copy() for m in rep.images]
    R = _relator_value(mats)
    if np.linalg.norm(_residual_far(R)) < max(target, _ON_VARIETY):
        return rep

    for _ in range(3):
        if np.linalg.norm(_residual_far(R)) < _LOG_PHASE:
            break
        mats = _match_characters(mats)
        mats = _reconstruct_last(mats)
        R = _relator_value(mats)
    else:
        raise NoConvergence(
            f"reconstruction left |R - Id| = {np.linalg.norm(_residual_far(R)):.3e}")

    for _ in range(max_iter):
        F, L = _residual_log(R)
        if np.linalg.norm(F) < target:
            break
        J = _jacobian_log(mats, R, L)
        step, *_ = np.linalg.lstsq(J, -F, rcond=None)
        base_norm = np.linalg.norm(F)
        alpha = 1.0
        for _halve in range(40):
            trial = _apply_step(mats, (0, 1, 2, 3), step, alpha)
            Rt = _relator_value(trial)
            try:
                Ft = _residual_log(Rt)[0]
            except NoConvergence:
                alpha /= 2.0
                continue
            if np.linalg.norm(Ft) < base_norm:
                mats, R = trial, Rt
                break
            alpha /= 2.0
        else:
            raise NoConvergence(f"polish stagnated at residual {base_norm:.3e}")
    else:
        raise NoConvergence(
            f"no convergence after {max_iter} polish steps: "
            f"residual {np.linalg.norm(_residual_log(R)[0]):.3e}")
    # No determinant rescale here: the polish steps preserve det to ~1e-15,
    # and rescaling would re-round every entry — rounding the relator
    # amplifies a million-fold, which would undo the convergence just won.
    return Rep4(mats, rep.provenance)


class SplitMix64:
    """The splitmix64 sequence: deterministic, platform-independent."""

    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0 ** -53


def deform(rep: Rep4, seed: int, eps: float) -> Rep4:
    """Perturb generators by seeded trace-free directions, then re-project.

    eps = 0 returns the representation unchanged.  Directions are drawn from
    splitmix64 (16 floats per generator, centered, trace removed, Frobenius
    normalized), so the output is bit-reproducible for a given (seed, eps).
    """
    if eps > 1e-2:
        raise ValueError("eps must be <= 1e-2 (projection basin)")
    if eps == 0.0:
        return rep
    rng = SplitMix64(seed)
    new_mats = []
    for g in rep.images:
        entries = np.array([rng.next_float() - 0.5 for _ in range(16)]).reshape(4, 4)
        entries -= np.trace(entries) / 4.0 * np.eye(4)
        entries /= np.linalg.norm(entries)
        new_mats.append(g @ expm(eps * entries))
    new_mats = [m / abs(np.linalg.det(m)) ** 0.25 for m in new_mats]
    perturbed = Rep4(new_mats, "deformed")
    projected = project_to_variety(perturbed)
    return Rep4(projected.images, "deformed")
