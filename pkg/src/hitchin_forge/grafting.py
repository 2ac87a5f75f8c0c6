"""Hitchin grafting along the separating curve: adapted frames, partial
conjugation of the second factor, cylinder heights and grafting rays."""
from dataclasses import dataclass

import numpy as np

from .errors import ComplexSpectrum, NotLoxodromic
from .group import GENUS2_SPLITTING
from .lie import calibrate_alpha0, finsler_norm, irreducible_rep, jordan_batch, shear_direction

MIN_GAP = 1e-6


def hitchin_base(rep2, d):
    """Generators of tau_d composed with a Fuchsian representation."""
    return tuple(irreducible_rep(d, G) for G in rep2.gens)


def evaluate(gens, w):
    d = gens[0].shape[0]
    M = np.eye(d)
    for l in w:
        G = gens[l >> 1]
        M = M @ (np.linalg.inv(G) if l & 1 else G)
    return M


@dataclass(frozen=True)
class GraftDatum:
    z: tuple
    kernel: bool = False

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        if abs(z.sum()) > 1e-9:
            raise ValueError("grafting parameter must sum to zero")
        if self.kernel:
            a = calibrate_alpha0(len(z))
            if abs(a(z)) > 1e-9:
                raise ValueError("grafting parameter is not in the kernel of alpha_0")


def adapt_frame(gens, c=GENUS2_SPLITTING.peripheral):
    """Real eigenframe of rho(c), columns in descending modulus order, first
    nonzero entry of each column positive, determinant 1."""
    M = evaluate(gens, c)
    w, v = np.linalg.eig(M)
    if np.abs(w.imag).max() > 1e-9 * max(1.0, np.abs(w).max()):
        raise ComplexSpectrum("boundary holonomy has non-real eigenvalues")
    order = np.argsort(-np.abs(w))
    lam = np.log(np.abs(w[order]))
    if np.min(-np.diff(lam)) <= MIN_GAP:
        raise NotLoxodromic("boundary holonomy is not loxodromic")
    P = v[:, order].real.copy()
    for j in range(P.shape[1]):
        k = np.nonzero(np.abs(P[:, j]) > 1e-14)[0][0]
        if P[k, j] < 0:
            P[:, j] *= -1
    det = np.linalg.det(P)
    if det < 0:
        P[:, -1] *= -1
    return P / abs(det) ** (1.0 / P.shape[0])


@dataclass(frozen=True)
class GraftedRep:
    base: tuple
    frame: np.ndarray
    datum: GraftDatum
    splitting: object = GENUS2_SPLITTING

    @property
    def alpha(self):
        P = self.frame
        return P @ np.diag(np.exp(np.asarray(self.datum.z, dtype=float))) @ np.linalg.inv(P)

    @property
    def gens(self):
        a = self.alpha
        ai = np.linalg.inv(a)
        return tuple(G if f == 0 else a @ G @ ai
                     for G, f in zip(self.base, self.splitting.factor))

    def letters(self):
        """Letter matrices (generator, inverse, ...) conjugated into the
        adapted frame, where the grafting conjugator is the diagonal exp(z).

        The result is conjugate to the representation, so lengths agree,
        and diagonal scalings are undone by the balancing step of the
        eigenvalue solver, which keeps large heights well conditioned.
        """
        P = self.frame
        Pi = np.linalg.inv(P)
        e = np.exp(np.asarray(self.datum.z, dtype=float))
        S = e[:, None] / e[None, :]
        out = []
        for G, f in zip(self.base, self.splitting.factor):
            for M in (G, np.linalg.inv(G)):
                X = Pi @ M @ P
                out.append(X if f == 0 else X * S)
        return np.array(out)


def make_grafted(base, z, kernel=False, splitting=GENUS2_SPLITTING, frame=None):
    base = tuple(np.asarray(G, dtype=float) for G in base)
    if frame is None:
        frame = adapt_frame(base, splitting.peripheral)
    return GraftedRep(base, frame, GraftDatum(tuple(float(x) for x in z), kernel), splitting)


def graft_evaluate(g, w):
    return evaluate(g.gens, w)


def cylinder_height(z, a=None):
    """min_t F(t u + z).

    The objective is convex and piecewise linear in t, with kinks where two
    coordinates of t u + z cross; the minimum is attained at one of them.
    """
    z = np.asarray(z, dtype=float)
    d = len(z)
    if a is None:
        a = calibrate_alpha0(d)
    u = shear_direction(d)
    ts = [0.0]
    for i in range(d):
        for j in range(i + 1, d):
            if u[i] != u[j]:
                ts.append((z[j] - z[i]) / (u[i] - u[j]))
    return min(finsler_norm(t * u + z, a) for t in ts)


def kernel_direction(d, sign=1.0):
    """A unit-height direction in ker alpha_0 orthogonal to the shear
    direction (for d = 3 this is (1, -2, 1) / 1.5)."""
    a = calibrate_alpha0(d)
    w = np.asarray(a.weights)
    u = shear_direction(d)
    # project a fixed generic vector onto {sum = 0, alpha_0 = 0, <., u> = 0}
    B = np.stack([np.ones(d), w, u])
    seed = np.array([1.0, -2.0] + [1.0] * (d - 2))
    U, S, _ = np.linalg.svd(B.T, full_matrices=False)
    Q = U[:, S > 1e-10]
    v = seed - Q @ (Q.T @ seed)
    if np.linalg.norm(v) < 1e-12:
        raise ValueError(f"no kernel direction for d = {d}")
    v *= sign
    return v / cylinder_height(v, a)


def grafting_ray(base, z_dir, t, kernel=None, splitting=GENUS2_SPLITTING, frame=None):
    """Grafted representation with datum t * z_dir / height(z_dir)."""
    z_dir = np.asarray(z_dir, dtype=float)
    h = cylinder_height(z_dir)
    if h < 1e-12:
        raise ValueError("direction has zero cylinder height")
    if kernel is None:
        kernel = abs(calibrate_alpha0(len(z_dir))(z_dir)) <= 1e-9
    return make_grafted(base, t * z_dir / h, kernel, splitting, frame)


def cartan_basis(d):
    """Orthonormal basis (rows) of the traceless diagonal directions."""
    E = np.eye(d)[:, :-1] - np.eye(d)[:, 1:]
    Q, _ = np.linalg.qr(E)
    return Q.T


def jordan_derivatives(base, z, W, step=1e-4, splitting=GENUS2_SPLITTING, frame=None):
    """Central differences of gamma -> lambda(rho_z(gamma)) in z.

    W is an array of evaluation words (padded with -1).  Returns
    (first, second): per row, the operator norm of the finite-difference
    Jacobian on the traceless directions, and the largest norm of the pure
    second differences along an orthonormal basis of them.
    """
    base = tuple(np.asarray(G, dtype=float) for G in base)
    if frame is None:
        frame = adapt_frame(base, splitting.peripheral)
    z = np.asarray(z, dtype=float)
    lam = lambda v: jordan_batch(make_grafted(base, v, splitting=splitting, frame=frame).letters(), W)
    lam0 = lam(z)
    cols, second = [], np.zeros(len(W))
    for e in cartan_basis(len(z)):
        lp, lm = lam(z + step * e), lam(z - step * e)
        cols.append((lp - lm) / (2 * step))
        second = np.maximum(second, np.linalg.norm(lp - 2 * lam0 + lm, axis=1) / step ** 2)
    J = np.stack(cols, 2)
    first = np.linalg.norm(J, ord=2, axis=(1, 2))
    return first, second


def derivative_constant(norms, iota):
    """Smallest C with norms <= C * iota over the rows with iota >= 1."""
    norms, iota = np.asarray(norms, dtype=float), np.asarray(iota)
    sel = iota >= 1
    if not sel.any():
        raise ValueError("no crossing rows")
    return float((norms[sel] / iota[sel]).max())
