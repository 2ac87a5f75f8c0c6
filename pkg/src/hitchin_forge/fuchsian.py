"""SL2(R) holonomies: one-holed tori from trace coordinates, genus-2 gluing
with a twist, and a few hyperbolic-trigonometry helpers."""
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import (BoundaryMismatch, CuspedOrDegenerate, DiscretenessSuspect,
                     NonHyperbolicGenerator, Reducible)
from .group import GENUS2, cyclic_candidates, grow

TOL = 1e-9


def _inv2(M):
    return np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]])


def comm(A, B):
    return A @ B @ _inv2(A) @ _inv2(B)


def boundary_trace(x, y, z):
    return x * x + y * y + z * z - x * y * z - 2


@dataclass(frozen=True)
class TorusParams:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if abs(self.x) <= 2 or abs(self.y) <= 2:
            raise NonHyperbolicGenerator(f"|x| and |y| must exceed 2, got {self.x}, {self.y}")
        if boundary_trace(self.x, self.y, self.z) >= -2:
            raise CuspedOrDegenerate(
                f"boundary trace {boundary_trace(self.x, self.y, self.z):.6g} is not below -2")

    @property
    def kappa(self):
        return boundary_trace(self.x, self.y, self.z)

    @property
    def boundary_length(self):
        return 2 * math.acosh(-self.kappa / 2)


def as_params(p):
    return p if isinstance(p, TorusParams) else TorusParams(*map(float, p))


def _sl2_pair(x, y, z):
    """(A, B) in SL2(R) with tr A = x, tr B = y, tr AB = z and A diagonal."""
    a = (x + math.copysign(math.sqrt(x * x - 4), x)) / 2
    A = np.array([[a, 0.0], [0.0, 1 / a]])
    p = (z - y / a) / (a - 1 / a)
    s = y - p
    B = np.array([[p, 1.0], [p * s - 1, s]])
    # common eigenvector of diagonal A and B exists iff B is triangular
    if abs(p * s - 1) <= 1e-12:
        raise Reducible("construction gives a common eigenvector")
    return A, B


def one_holed_torus_rep(t):
    """(A, B, length) with tr A = x, tr B = y, tr AB = z."""
    t = as_params(t)
    A, B = _sl2_pair(t.x, t.y, t.z)
    return A, B, t.boundary_length


def pants_rep(a, b, c):
    """Generators (A, B) of a pair of pants with boundary lengths a, b, c:
    the boundaries are A, B and AB, with traces 2cosh(a/2), 2cosh(b/2)
    and -2cosh(c/2)."""
    for v in (a, b, c):
        if not v > 0:
            raise CuspedOrDegenerate(f"boundary lengths must be positive, got {a}, {b}, {c}")
    return _sl2_pair(2 * math.cosh(a / 2), 2 * math.cosh(b / 2), -2 * math.cosh(c / 2))


def frame2(C):
    """Eigenvector frame of a hyperbolic 2x2 matrix: descending modulus,
    positive first entries, determinant 1."""
    w, v = np.linalg.eig(C)
    v = v[:, np.argsort(-np.abs(w))].real
    for j in range(2):
        if v[0, j] < 0:
            v[:, j] *= -1
    if np.linalg.det(v) < 0:
        v[:, 1] *= -1
    return v / math.sqrt(np.linalg.det(v))


def twist_matrix(C, t):
    """Translation by t along the axis of C."""
    P = frame2(C)
    return P @ np.diag([math.exp(t / 2), math.exp(-t / 2)]) @ _inv2(P)


@dataclass(frozen=True)
class SurfaceRep2:
    gens: tuple  # images of a1, b1, a2, b2
    boundary_length: float
    twist: float
    p1: TorusParams = None
    p2: TorusParams = None

    def letters(self):
        out = []
        for G in self.gens:
            out += [G, _inv2(G)]
        return np.array(out)


def glue_genus2(p1, p2, twist=0.0, probe=True):
    p1, p2 = as_params(p1), as_params(p2)
    A1, B1, l1 = one_holed_torus_rep(p1)
    A2, B2, l2 = one_holed_torus_rep(p2)
    if abs(l1 - l2) > TOL:
        raise BoundaryMismatch(f"boundary lengths {l1:.12g} and {l2:.12g} differ")
    C1, C2 = comm(A1, B1), comm(A2, B2)
    # map the frame of [A2,B2] onto the frame of [A1,B1]^-1
    g = frame2(_inv2(C1)) @ _inv2(frame2(C2))
    g = twist_matrix(C1, twist) @ g
    gi = _inv2(g)
    rep = SurfaceRep2((A1, B1, g @ A2 @ gi, g @ B2 @ gi), l1, float(twist), p1, p2)
    if probe:
        _discreteness_probe(rep)
    return rep


def retwist(rep, dt):
    """Post-compose the Gamma_2 images with a further twist dt."""
    A1, B1, A2, B2 = rep.gens
    T = twist_matrix(comm(A1, B1), dt)
    Ti = _inv2(T)
    return SurfaceRep2((A1, B1, T @ A2 @ Ti, T @ B2 @ Ti), rep.boundary_length,
                       rep.twist + dt, rep.p1, rep.p2)


def sl2_translation_length(M):
    tr = abs(float(M[0, 0] + M[1, 1]))
    return 2 * math.acosh(tr / 2) if tr > 2 else 0.0


def collar_width(length):
    if length <= 0:
        raise ValueError("length must be positive")
    return math.asinh(1 / math.sinh(length / 2))


def _short_lengths(rep, max_word_len):
    L = rep.letters()
    for W, M in grow(GENUS2, max_word_len, step=_product_step(L)):
        ok = cyclic_candidates(W, GENUS2)
        if ok.any():
            tr = np.abs(M[ok, 0, 0] + M[ok, 1, 1])
            yield W[ok], 2 * np.arccosh(np.maximum(tr / 2, 1.0))


def _product_step(L):
    def step(M, let):
        new = L[let] if M is None else M @ L[let]
        return new, np.ones(len(new), dtype=bool)
    return step


def systole_probe(rep, max_word_len=4):
    """Shortest translation length over cyclically reduced words up to the
    given length; an upper bound for the systole."""
    if max_word_len < 2:
        raise ValueError("max_word_len must be at least 2")
    return float(min(ls.min() for _, ls in _short_lengths(rep, max_word_len)))


def _discreteness_probe(rep, max_word_len=6, eps=1e-3):
    for W, ls in _short_lengths(rep, max_word_len):
        bad = ls < eps
        if bad.any():
            # the relator and its rotations are the expected trivial elements
            from .group import canonicalize_conjugacy
            for row in W[bad]:
                if canonicalize_conjugacy(tuple(int(x) for x in row)):
                    warnings.warn(f"short element found by probe: {row.tolist()}",
                                  DiscretenessSuspect, stacklevel=3)
                    return


def center_letters(L):
    """Conjugate the letter matrices (a stack of 2x2) by the upper-half-plane
    point minimizing the largest generator displacement."""
    L = np.asarray(L)

    def conj(par):
        x, y = par[0], math.exp(par[1])
        g = np.array([[math.sqrt(y), x / math.sqrt(y)], [0.0, 1 / math.sqrt(y)]])
        gi = np.array([[g[1, 1], -g[0, 1]], [0.0, g[0, 0]]])
        return gi @ L @ g

    def cost(par):
        N = conj(par)[::2]
        return float(np.arccosh(np.maximum((N ** 2).sum((1, 2)) / 2, 1.0)).max())

    res = minimize(cost, [0.0, 0.0], method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
    return conj(res.x)
