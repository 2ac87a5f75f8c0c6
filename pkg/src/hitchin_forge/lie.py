"""Irreducible representation SL2 -> SL_d, Jordan/Cartan projections and the
calibrated Finsler functional alpha_0.

Matrices are plain numpy arrays.  Most functions accept a single (d, d)
matrix; the ``*_batch`` helpers work on stacks of shape (K, d, d).
"""
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb, sqrt

import numpy as np

from .errors import EigenFailure

RENORM_EVERY = 8


@lru_cache(maxsize=None)
def _tau_tables(d):
    # coefficient of X^{n-j} Y^j in (aX + cY)^{n-k} (bX + eY)^k is a polynomial
    # in (a, b, c, e); store it as a dense tensor of exponents -> coefficient
    n = d - 1
    # poly[k][j] is a dict {(ia, ib, ic, ie): coeff}
    table = np.zeros((d, d, n + 1, n + 1), dtype=float)
    # table[j, k, p, q]: coefficient of a^p c^(n-k-p) b^q e^(k-q), contributing to X^{n-j}Y^j
    for k in range(d):
        for p in range(n - k + 1):
            for q in range(k + 1):
                j = (n - k - p) + (k - q)  # total Y power
                coef = comb(n - k, p) * comb(k, q)
                table[j, k, p, q] += coef * sqrt(comb(n, k) / comb(n, j))
    return table


def irreducible_rep(d, M):
    """Image of M (shape (2, 2) or (K, 2, 2)) under the d-dimensional
    irreducible representation, in the weighted monomial basis
    e_k = sqrt(C(d-1, k)) X^{d-1-k} Y^k."""
    M = np.asarray(M, dtype=float)
    single = M.ndim == 2
    Ms = M[None] if single else M
    if d == 2:
        out = Ms.copy()
        return out[0] if single else out
    n = d - 1
    a, b, c, e = Ms[:, 0, 0], Ms[:, 0, 1], Ms[:, 1, 0], Ms[:, 1, 1]
    pw = np.arange(n + 1)
    A = a[:, None] ** pw
    B = b[:, None] ** pw
    C = c[:, None] ** pw
    E = e[:, None] ** pw
    T = _tau_tables(d)
    out = np.zeros((len(Ms), d, d))
    for k in range(d):
        for p in range(n - k + 1):
            for q in range(k + 1):
                col = T[:, k, p, q]
                if not col.any():
                    continue
                mono = A[:, p] * C[:, n - k - p] * B[:, q] * E[:, k - q]
                out[:, :, k] += mono[:, None] * col[None, :]
    return out[0] if single else out


@dataclass(frozen=True)
class Alpha0:
    weights: tuple
    c: float

    @property
    def d(self):
        return len(self.weights)

    def raw(self, v):
        return float(np.dot(self.weights, v))

    def __call__(self, v):
        """Calibrated linear functional (no sorting)."""
        return self.c * float(np.dot(self.weights, v))


def calibrate_alpha0(d, weights=None):
    if d < 2:
        raise ValueError("d must be at least 2")
    if weights is None:
        weights = tuple(float(d - 1 - 2 * i) for i in range(d))
    w = np.asarray(weights, dtype=float)
    if len(w) != d or np.any(np.diff(w) >= 0) or not np.allclose(w, -w[::-1]):
        raise ValueError("weights must be strictly decreasing and antisymmetric")
    # lambda(tau_d(diag(e^{t/2}, e^{-t/2}))) = t * ((d-1)/2 - i)
    h = np.array([(d - 1) / 2 - i for i in range(d)])
    return Alpha0(tuple(w.tolist()), 1.0 / float(w @ h))


def shear_direction(d):
    """Jordan direction of tau_d(diag(e^{1/2}, e^{-1/2})), Finsler-normalized."""
    a = calibrate_alpha0(d)
    u = np.array([(d - 1) / 2 - i for i in range(d)])
    return u / finsler_norm(u, a)


def finsler_norm(v, a):
    v = np.sort(np.asarray(v, dtype=float))[::-1]
    return a.c * float(np.dot(a.weights, v))


def _check_finite(M):
    if not np.all(np.isfinite(M)):
        raise EigenFailure("non-finite matrix entries")


def jordan_projection(M, log_scale=0.0):
    """Descending logs of eigenvalue moduli, projected to zero sum."""
    M = np.asarray(M, dtype=float)
    _check_finite(M)
    try:
        ev = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from None
    with np.errstate(divide="ignore"):
        lam = np.sort(np.log(np.abs(ev)))[::-1] + log_scale
    if not np.all(np.isfinite(lam)):
        raise EigenFailure("singular matrix")
    return lam - lam.mean()


def cartan_projection(M, log_scale=0.0):
    M = np.asarray(M, dtype=float)
    _check_finite(M)
    try:
        s = np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from None
    with np.errstate(divide="ignore"):
        k = np.log(s) + log_scale
    if not np.all(np.isfinite(k)):
        raise EigenFailure("singular matrix")
    return k - k.mean()


def finsler_length(M, a, log_scale=0.0):
    return a.c * float(np.dot(a.weights, jordan_projection(M, log_scale)))


def loxodromy_gaps(M):
    return -np.diff(jordan_projection(M))


def exterior_power(M, k):
    M = np.asarray(M, dtype=float)
    d = M.shape[0]
    if not 1 <= k <= d - 1:
        raise ValueError("need 1 <= k <= d-1")
    idx = list(combinations(range(d), k))
    out = np.empty((len(idx), len(idx)))
    for i, rows in enumerate(idx):
        sub = M[list(rows)]
        for j, cols in enumerate(idx):
            out[i, j] = np.linalg.det(sub[:, list(cols)])
    return out


# batched helpers used by the census

def evaluate_words(letter_mats, W):
    """Products of letter matrices along the rows of the integer array W.

    Returns (M, log_scale): the product is exp(log_scale) * M, with the
    renormalization by the max-abs entry applied every RENORM_EVERY factors.
    Letter -1 is treated as padding (identity) so ragged words can share a
    batch.
    """
    L = np.asarray(letter_mats)
    W = np.asarray(W)
    K, n = W.shape
    d = L.shape[-1]
    M = np.broadcast_to(np.eye(d), (K, d, d)).copy()
    log_scale = np.zeros(K)
    Lp = np.concatenate([L, np.eye(d)[None]], 0)
    for j in range(n):
        M = M @ Lp[W[:, j]]
        if (j + 1) % RENORM_EVERY == 0:
            s = np.abs(M).max(axis=(1, 2))
            M /= s[:, None, None]
            log_scale += np.log(s)
    return M, log_scale


def inverse_words(W):
    """Letter arrays for the inverse words (padding stays at the end)."""
    W = np.asarray(W)
    pad = W < 0
    out = np.where(pad, -1, W ^ 1)
    # reverse the non-padded prefix of each row
    lens = (~pad).sum(1)
    n = W.shape[1]
    j = np.arange(n)[None, :]
    src = np.where(j < lens[:, None], lens[:, None] - 1 - j, j)
    return np.take_along_axis(out, src, 1)


def _log_moduli_desc(M):
    try:
        ev = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from None
    with np.errstate(divide="ignore"):
        return np.sort(np.log(np.abs(ev)), axis=-1)[..., ::-1]


def jordan_batch(letter_mats, W):
    """Jordan projections of the words in W, accurate for long products.

    The upper half of the spectrum comes from the word itself and the lower
    half from the inverse word evaluated as a product (the small eigenvalues
    of a long product are otherwise lost to rounding).
    """
    L = np.asarray(letter_mats)
    d = L.shape[-1]
    M, s1 = evaluate_words(L, W)
    Mi, s2 = evaluate_words(L, inverse_words(W))
    top = _log_moduli_desc(M) + s1[:, None]
    bot = _log_moduli_desc(Mi) + s2[:, None]
    lam = np.empty((len(W), d))
    h = d // 2
    lam[:, :h] = top[:, :h]
    lam[:, d - h:] = -bot[:, :h][:, ::-1]
    if d % 2:
        lam[:, h] = -(lam[:, :h].sum(1) + lam[:, d - h:].sum(1))
    bad = ~np.isfinite(lam).all(1)
    if bad.any():
        raise EigenFailure("eigenvalue computation failed", word=int(np.argmax(bad)))
    return lam


def finsler_batch(letter_mats, W, a):
    return a.c * (jordan_batch(letter_mats, W) @ np.asarray(a.weights))


def displacement_batch(M, a):
    """Calibrated alpha_0 of the Cartan projection: the Finsler displacement
    of the basepoint under each matrix of the stack."""
    d = M.shape[-1]
    if d == 2:
        return np.arccosh(np.maximum((M ** 2).sum((1, 2)) / 2, 1.0))
    s = np.linalg.svd(M, compute_uv=False)
    k = np.log(s)
    k -= k.mean(1, keepdims=True)
    return a.c * (k @ np.asarray(a.weights))
