"""Independent oracles for the test suite.

Every function here recomputes a quantity by a route different from the
package implementation — symbolic algebra, brute-force enumeration,
closed-form identities, exact rational arithmetic, or extended-precision
linear algebra — so that agreement between package and oracle is evidence
rather than tautology.  Nothing in this module imports the package.
"""

import itertools
import math
from fractions import Fraction

import numpy as np
import sympy as sp

# ---------------------------------------------------------------------------
# Symbolic cubic symmetric power (polynomial substitution).
# ---------------------------------------------------------------------------

_a, _b, _c, _d, _X, _Y = sp.symbols("a b c d X Y")
_MONOMIALS = [_X**3, _X**2 * _Y, _X * _Y**2, _Y**3]


def _build_sym3():
    # The induced action substitutes X -> a X + c Y, Y -> b X + d Y into
    # each monomial; column j holds the coefficients of the image of
    # monomial j in the monomial basis.
    cols = []
    for mono in _MONOMIALS:
        image = sp.expand(mono.subs({_X: _a * _X + _c * _Y,
                                     _Y: _b * _X + _d * _Y},
                                    simultaneous=True))
        poly = sp.Poly(image, _X, _Y)
        cols.append([poly.coeff_monomial(m) for m in _MONOMIALS])
    matrix = sp.Matrix(cols).T
    return sp.lambdify((_a, _b, _c, _d), matrix, modules="numpy")


_SYM3 = _build_sym3()


def sym3_substitution(A):
    """4x4 matrix of the symmetric-cube action, by polynomial substitution."""
    A = np.asarray(A, dtype=float)
    return np.array(_SYM3(A[0, 0], A[0, 1], A[1, 0], A[1, 1]), dtype=float)


# ---------------------------------------------------------------------------
# Rational normal curve: closed forms and determinant identities.
# ---------------------------------------------------------------------------

_t = sp.symbols("theta")
_VER = sp.Matrix([sp.cos(_t) ** 3,
                  3 * sp.cos(_t) ** 2 * sp.sin(_t),
                  3 * sp.cos(_t) * sp.sin(_t) ** 2,
                  sp.sin(_t) ** 3])
_VER_FUNCS = [sp.lambdify(_t, _VER.diff(_t, k), modules="numpy")
              for k in range(3)]


def veronese_point(theta):
    """Weighted Veronese point (c^3, 3c^2 s, 3c s^2, s^3)."""
    return np.asarray(_VER_FUNCS[0](theta), dtype=float).ravel()


def veronese_jet(theta, order):
    """Derivative vectors of the Veronese curve up to ``order`` (rows)."""
    return np.stack([np.asarray(f(theta), dtype=float).ravel()
                     for f in _VER_FUNCS[:order + 1]])


def dual_veronese_covector(theta):
    """Covector of the osculating plane: annihilates S^3, S^2 T, S T^2."""
    s, c = math.sin(theta), math.cos(theta)
    return np.array([-s**3, s * s * c, -s * c * c, c**3])


def vandermonde_det(thetas):
    """det of four raw weighted Veronese rows: 9 * prod sin(t_j - t_i)."""
    thetas = np.asarray(thetas, dtype=float)
    prod = 1.0
    for i in range(4):
        for j in range(i + 1, 4):
            prod *= math.sin(thetas[j] - thetas[i])
    return 9.0 * prod


def dual_vandermonde_det(thetas):
    """det of four raw dual covector rows: prod sin(t_j - t_i), constant 1."""
    thetas = np.asarray(thetas, dtype=float)
    prod = 1.0
    for i in range(4):
        for j in range(i + 1, 4):
            prod *= math.sin(thetas[j] - thetas[i])
    return prod


def unit_rows_abs_det(rows):
    """|det| of the row-normalized stack (= product of singular values)."""
    rows = np.asarray(rows, dtype=float)
    rows = rows / np.linalg.norm(rows, axis=1, keepdims=True)
    return abs(np.linalg.det(rows))


# ---------------------------------------------------------------------------
# Cubic discriminant and root structure.
# ---------------------------------------------------------------------------

def cubic_discriminant(coeffs):
    """Discriminant of a x^3 + b x^2 + c x + d."""
    a, b, c, d = (float(x) for x in coeffs)
    return (18 * a * b * c * d - 4 * b**3 * d + b * b * c * c
            - 4 * a * c**3 - 27 * a * a * d * d)


def count_distinct_real_roots(coeffs):
    """Distinct real projective roots of the binary cubic (numpy roots)."""
    a, b, c, d = (float(x) for x in coeffs)
    scale = max(abs(a), abs(b), abs(c), abs(d))
    roots = np.roots([a, b, c, d]) if abs(a) > 1e-12 * scale else \
        np.roots([b, c, d])
    real = roots[np.abs(roots.imag) < 1e-7 * (1 + np.abs(roots))].real
    distinct = []
    for r in np.sort(real):
        if not distinct or abs(r - distinct[-1]) > 1e-6 * (1 + abs(r)):
            distinct.append(r)
    if abs(a) <= 1e-12 * scale:
        distinct.append(math.inf)  # the root [1 : 0]
    return len(distinct)


def cone_discriminant(coords):
    """beta^2 - 4 alpha gamma in leaf coordinates (alpha, beta, gamma, .)."""
    al, be, ga = float(coords[0]), float(coords[1]), float(coords[2])
    return be * be - 4 * al * ga


# ---------------------------------------------------------------------------
# Hyperbolic / spectral bookkeeping.
# ---------------------------------------------------------------------------

OCTAGON_TRACE = 2.0 + math.sqrt(2.0)


def translation_length_from_trace(tr):
    return 2.0 * math.acosh(abs(float(tr)) / 2.0)


def spectrum_from_length(ell):
    """The symmetric-cube moduli {e^{3l/2}, e^{l/2}, e^{-l/2}, e^{-3l/2}}."""
    ell = float(ell)
    return np.exp(np.array([1.5 * ell, 0.5 * ell, -0.5 * ell, -1.5 * ell]))


def eig_by_modulus(M):
    """Eigenvalues sorted by decreasing modulus (LAPACK route)."""
    vals = np.linalg.eigvals(np.asarray(M, dtype=float))
    return vals[np.argsort(-np.abs(vals))]


# ---------------------------------------------------------------------------
# Projective micro-oracles.
# ---------------------------------------------------------------------------

def pluecker_from_points(p, q):
    """2x2-minor Pluecker coordinates (p01, p02, p03, p12, p13, p23)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return np.array([p[0] * q[1] - p[1] * q[0],
                     p[0] * q[2] - p[2] * q[0],
                     p[0] * q[3] - p[3] * q[0],
                     p[1] * q[2] - p[2] * q[1],
                     p[1] * q[3] - p[3] * q[1],
                     p[2] * q[3] - p[3] * q[2]])


def dual_pluecker(p):
    """The duality involution on Pluecker coordinates."""
    p01, p02, p03, p12, p13, p23 = (float(x) for x in p)
    return np.array([p23, -p13, p12, p03, -p02, p01])


def pluecker_residual(p):
    p01, p02, p03, p12, p13, p23 = (float(x) for x in p)
    return abs(p01 * p23 - p02 * p13 + p03 * p12)


def plane_through(points):
    """Null-space covector of up to three stacked points (SVD route)."""
    stack = np.asarray(points, dtype=float).reshape(-1, 4)
    _, _, vt = np.linalg.svd(stack)
    return vt[-1]


def chordal_gap(u, v):
    """min-over-sign Euclidean gap of unit representatives."""
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    return min(np.linalg.norm(u - v), np.linalg.norm(u + v))


def cross_ratio_affine(a, b, c, d):
    """[(a-c)(b-d)] / [(a-d)(b-c)] on affine parameters."""
    return ((a - c) * (b - d)) / ((a - d) * (b - c))


# ---------------------------------------------------------------------------
# Group-theoretic oracles.
# ---------------------------------------------------------------------------

def relator_product(gens):
    """[a1,b1][a2,b2] as an explicit matrix product (generator-scale norms)."""
    a1, b1, a2, b2 = (np.asarray(g, dtype=float) for g in gens)
    comm = (a1 @ b1 @ np.linalg.inv(a1) @ np.linalg.inv(b1)
            @ a2 @ b2 @ np.linalg.inv(a2) @ np.linalg.inv(b2))
    return comm


def brute_force_cyclically_reduced(max_len):
    """All cyclically reduced words by exhaustive tuple enumeration.

    Letters are 0..7 with inverse = letter ^ 1.
    """
    words = []
    for length in range(1, max_len + 1):
        for w in itertools.product(range(8), repeat=length):
            if any(w[i] ^ 1 == w[i + 1] for i in range(length - 1)):
                continue
            if length > 1 and w[-1] ^ 1 == w[0]:
                continue
            words.append(w)
    return words


def invariant_antisym_nullspace(gens):
    """Solve g^T W g = W over antisymmetric W for the given 4x4 images.

    Returns (dimension, list of 4x4 basis matrices), via an independent
    6-dimensional coordinate ansatz and SVD null space.
    """
    basis = []
    for i in range(4):
        for j in range(i + 1, 4):
            m = np.zeros((4, 4))
            m[i, j], m[j, i] = 1.0, -1.0
            basis.append(m)
    upper = np.triu_indices(4, k=1)
    rows = []
    for g in gens:
        g = np.asarray(g, dtype=float)
        for bmat in basis:
            # column of the constraint map W -> g^T W g - W
            rows.append((g.T @ bmat @ g - bmat)[upper])
    # rows[k] is the image of basis vector (k mod 6) for generator k // 6;
    # assemble the (6 * n_gens, 6) system whose columns are ansatz coords.
    system = np.concatenate(
        [np.stack(rows[6 * k:6 * k + 6], axis=1) for k in range(len(gens))])
    u, s, vt = np.linalg.svd(system)
    dim = int(np.sum(s < 1e-9 * s[0]))
    mats = []
    for k in range(dim):
        coeff = vt[-1 - k]
        mats.append(sum(c * b for c, b in zip(coeff, basis)))
    return dim, mats


# ---------------------------------------------------------------------------
# splitmix64 reference.
# ---------------------------------------------------------------------------

_MASK = (1 << 64) - 1


def splitmix64_sequence(seed, n):
    """Reference splitmix64 stream (Steele–Lea–Flood constants)."""
    state = seed & _MASK
    out = []
    for _ in range(n):
        state = (state + 0x9E3779B97F4A7C15) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        out.append(z ^ (z >> 31))
    return out


# ---------------------------------------------------------------------------
# Extended-precision spectral measurement.
# ---------------------------------------------------------------------------

def _dominant_direction(mats, steps=30):
    n = len(mats)
    x = np.broadcast_to(
        np.array([0.6386, 0.2677, 0.5113, 0.5039], dtype=np.longdouble),
        (n, 4)).copy()
    for _ in range(steps):
        x = np.einsum("nij,nj->ni", mats, x)
        x /= np.abs(x).max(axis=1, keepdims=True)
    return x


def _rayleigh(mats, x, y):
    return (np.einsum("ni,nij,nj->n", y, mats, x)
            / np.einsum("ni,ni->n", y, x))


def word_products_longdouble(gens, words):
    """Images of the words as longdouble products of the generator matrices.

    ``gens`` maps letter k to its matrix for k = 0..7 (inverse letters
    included); products accumulate in extended precision so the result is
    a strictly better evaluation of the same image matrix than a float64
    product chain.
    """
    gens = np.asarray(gens).astype(np.longdouble)
    dim = gens.shape[-1]
    out = np.empty((len(words), dim, dim), dtype=np.longdouble)
    by_len = {}
    for i, w in enumerate(words):
        by_len.setdefault(len(w), []).append(i)
    for length, idxs in by_len.items():
        idxs = np.asarray(idxs)
        letters = np.array([words[i] for i in idxs], dtype=int)
        prod = gens[letters[:, 0]]
        for j in range(1, length):
            prod = np.einsum("nij,njk->nik", prod, gens[letters[:, j]])
        out[idxs] = prod
    return out


def proximal_spectra(gens4, words):
    """Moduli-ordered eigenvalue quadruples of the word images.

    Evaluates each image in longdouble from the generator matrices and
    extracts the spectrum by conditioning-aware routes: the dominant pair
    of the image and of the inverse word's image (two-sided power
    iteration + Rayleigh quotients; the word list must be closed under
    inversion), and the middle pair from the two traces of the restriction
    to the invariant 2-plane annihilating both dominant left directions
    (their ratio gives the middle product without cancellation).

    Returns (lam, info): ``lam[k]`` holds the four eigenvalues of word k
    sorted by decreasing modulus; ``info`` carries measurement diagnostics
    (worst dominant residuals, minimum middle discriminant).
    """
    index = {tuple(w): i for i, w in enumerate(words)}
    inv_idx = np.array([index[tuple(l ^ 1 for l in reversed(w))]
                        for w in words])
    m = word_products_longdouble(gens4, words)
    m_inv = m[inv_idx]
    mt = np.transpose(m, (0, 2, 1))
    mt_inv = np.transpose(m_inv, (0, 2, 1))

    x_top, y_top = _dominant_direction(m), _dominant_direction(mt)
    x_bot, y_bot = _dominant_direction(m_inv), _dominant_direction(mt_inv)
    lam_top = _rayleigh(m, x_top, y_top)
    lam_bot = 1.0 / _rayleigh(m_inv, x_bot, y_bot)

    def rel_residual(mats, x, lam):
        mx = np.einsum("nij,nj->ni", mats, x)
        num = np.linalg.norm((mx - lam[:, None] * x).astype(float), axis=1)
        return num / np.linalg.norm(mx.astype(float), axis=1)

    res_top = rel_residual(m, x_top, lam_top)
    res_bot = rel_residual(m_inv, x_bot, 1.0 / lam_bot)

    # Orthonormal basis of the annihilator of both dominant left vectors.
    u1 = y_top
    dots = np.einsum("ni,ni->n", u1, y_bot) / np.einsum("ni,ni->n", u1, u1)
    u2 = y_bot - dots[:, None] * u1
    basis = np.broadcast_to(np.eye(4, dtype=np.longdouble),
                            (len(m), 4, 4)).copy()
    for u in (u1, u2):
        uu = np.einsum("ni,ni->n", u, u)
        proj = np.einsum("nki,ni->nk", basis, u) / uu[:, None]
        basis = basis - proj[:, :, None] * u[:, None, :]
    norms = np.linalg.norm(basis.astype(float), axis=2)
    pick = np.argsort(-norms, axis=1)[:, :2]
    q1 = np.take_along_axis(basis, pick[:, 0][:, None, None], axis=1)[:, 0]
    q2 = np.take_along_axis(basis, pick[:, 1][:, None, None], axis=1)[:, 0]
    q2 = q2 - (np.einsum("ni,ni->n", q1, q2)
               / np.einsum("ni,ni->n", q1, q1))[:, None] * q1

    def restricted_trace(mats):
        return (np.einsum("ni,nij,nj->n", q1, mats, q1)
                / np.einsum("ni,ni->n", q1, q1)
                + np.einsum("ni,nij,nj->n", q2, mats, q2)
                / np.einsum("ni,ni->n", q2, q2))

    tr_mid = restricted_trace(m)            # lam0 + lamm
    tr_mid_inv = restricted_trace(m_inv)    # 1/lam0 + 1/lamm
    prod_mid = tr_mid / tr_mid_inv          # lam0 * lamm
    disc = tr_mid * tr_mid - 4 * prod_mid
    lam0 = (tr_mid + np.sign(tr_mid) * np.sqrt(np.maximum(disc, 0))) / 2
    lamm = prod_mid / lam0

    lam = np.stack([lam_top, lam0, lamm, lam_bot], axis=1).astype(float)
    lam = np.take_along_axis(lam, np.argsort(-np.abs(lam), axis=1), axis=1)
    info = {
        "max_dominant_residual": float(max(res_top.max(), res_bot.max())),
        "min_middle_discriminant": float(disc.astype(float).min()),
    }
    return lam, info


def exact_eigenvalues(M, digits=60):
    """Eigenvalues of a float matrix in exact rational arithmetic.

    Faddeev–LeVerrier characteristic polynomial over Fractions, then
    mpmath polyroots at the requested precision.  Slow; for spot checks.
    """
    import mpmath as mp

    M = [[Fraction(float(x)) for x in row] for row in np.asarray(M)]
    size = len(M)
    ident = [[Fraction(int(i == j)) for j in range(size)] for i in range(size)]

    def matmul(A, B):
        return [[sum(A[i][k] * B[k][j] for k in range(size))
                 for j in range(size)] for i in range(size)]

    coeffs = [Fraction(1)]
    work = [row[:] for row in ident]
    for k in range(1, size + 1):
        work = matmul(M, work)
        ck = -sum(work[i][i] for i in range(size)) / k
        coeffs.append(ck)
        for i in range(size):
            work[i][i] += ck
    with mp.workdps(digits):
        poly = [mp.mpf(c.numerator) / mp.mpf(c.denominator) for c in coeffs]
        roots = mp.polyroots(poly, maxsteps=200, extraprec=120)
        return sorted((complex(r) for r in roots), key=lambda z: -abs(z))
