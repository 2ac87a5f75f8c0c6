"""Independent reference computations used by the tests.

Nothing here calls the library's word reduction, fingerprinting or
representation code; only the SL2 gluing is shared.
"""
import itertools
import math

import numpy as np
from scipy.optimize import minimize
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree


def tau3(M):
    """Symmetric-square representation SL2 -> SL3 written out by hand."""
    (a, b), (c, d) = M
    return np.array([[a * a, a * b, b * b],
                     [2 * a * c, a * d + b * c, 2 * b * d],
                     [c * c, c * d, d * d]])


def freely_reduced_words(nletters, max_len):
    for n in range(1, max_len + 1):
        for w in itertools.product(range(nletters), repeat=n):
            if all(w[i + 1] != w[i] ^ 1 for i in range(n - 1)):
                yield w


def product(mats, w):
    M = np.eye(mats[0].shape[0])
    for l in w:
        M = M @ mats[l]
    return M


def _centralizing(M, z):
    """exp of z in the eigenbasis of M: commutes with M."""
    _, P = np.linalg.eig(M)
    P = P.real
    return P @ np.diag(np.exp(z)) @ np.linalg.inv(P)


def balance(gens2):
    """Conjugate SL2 matrices by an upper-triangular element minimizing the
    sum of their squared Frobenius norms."""
    def conj(par):
        x, y = par[0], math.exp(par[1])
        g = np.array([[math.sqrt(y), x / math.sqrt(y)], [0.0, 1 / math.sqrt(y)]])
        gi = np.linalg.inv(g)
        return [gi @ G @ g for G in gens2]
    res = minimize(lambda p: sum(float((M ** 2).sum()) for M in conj(p)), [0.0, 0.0],
                   method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12})
    return conj(res.x)


def bent_letters(gens2, seed, scale=0.5):
    """tau3 of the SL2 generators, then b_i -> b_i E and a_i -> a_i F with E
    centralizing a_i and F centralizing the new b_i.  Each move fixes
    a_i b_i a_i^-1 b_i^-1, so the relator still holds, and the result has no
    inversion symmetry."""
    rng = np.random.default_rng(seed)
    G = [tau3(g) for g in balance(gens2)]
    for i in (0, 2):
        for target, fixed in ((i + 1, i), (i, i + 1)):
            z = rng.normal(size=3)
            z = scale * (z - z.mean())
            G[target] = G[target] @ _centralizing(G[fixed], z)
    out = []
    for g in G:
        out += [g, np.linalg.inv(g)]
    return out


def cluster(vectors, tol):
    """Connected components of the graph joining rows within tol (max norm)."""
    V = np.asarray(vectors)
    pairs = cKDTree(V).query_pairs(tol, p=np.inf, output_type="ndarray")
    g = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(len(V), len(V)))
    n, labels = connected_components(g, directed=False)
    return labels, n


def trace_pair(letters, w):
    """asinh of tr(w) and tr(w^-1): for SL3 these fix the characteristic
    polynomial, and traces stay accurate where eigenvalues of non-normal
    products do not."""
    inv = [l ^ 1 for l in reversed(w)]
    return np.arcsinh([np.trace(product(letters, w)), np.trace(product(letters, inv))])


def conjugacy_oracle(gens2, max_len, seeds=(101, 202), tol=1e-8):
    """Map each freely reduced genus-2 word of length <= max_len to an oracle
    class id; two words share an id iff their spectra agree under two
    independently bent SL3 representations."""
    reps = [bent_letters(gens2, s) for s in seeds]
    words = list(freely_reduced_words(8, max_len))
    fps = np.array([np.concatenate([trace_pair(L, w) for L in reps]) for w in words])
    labels, n = cluster(fps, tol)
    return words, fps, labels, n, reps


def torus_z(x, y, kappa):
    """Larger root z of x^2 + y^2 + z^2 - xyz - 2 = kappa."""
    b, c = x * y, x * x + y * y - 2 - kappa
    return (b + math.sqrt(b * b - 4 * c)) / 2
