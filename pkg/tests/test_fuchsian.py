import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from oracles import product, torus_z
from hitchin_forge.errors import (BoundaryMismatch, CuspedOrDegenerate, DiscretenessSuspect,
                                  NonHyperbolicGenerator)
from hitchin_forge.fuchsian import (TorusParams, boundary_trace, center_letters, collar_width,
                                    comm, glue_genus2, one_holed_torus_rep, pants_rep, retwist,
                                    sl2_translation_length, systole_probe)
from hitchin_forge.group import GENUS2


def tr(M):
    return float(M[0, 0] + M[1, 1])


@given(st.floats(3.0, 8.0), st.floats(3.0, 8.0), st.floats(-1.0, 1.0))
def test_torus_traces(x, y, e):
    # x^2 + y^2 + z^2 - xyz < 0 near z = xy/2 once x, y >= 3: a hyperbolic boundary
    z = x * y / 2 + e
    A, B, length = one_holed_torus_rep((x, y, z))
    assert abs(tr(A) - x) < 1e-9 * x
    assert abs(tr(B) - y) < 1e-9 * y
    assert abs(tr(A @ B) - z) < 1e-8 * z
    assert abs(np.linalg.det(A) - 1) < 1e-9 and abs(np.linalg.det(B) - 1) < 1e-8
    kappa = boundary_trace(x, y, z)
    assert abs(tr(comm(A, B)) - kappa) < 1e-7 * abs(kappa)
    assert abs(length - 2 * math.acosh(-kappa / 2)) < 1e-12


def test_torus_parameter_validation():
    with pytest.raises(NonHyperbolicGenerator):
        TorusParams(1.5, 4.0, 4.0)
    with pytest.raises(CuspedOrDegenerate):
        TorusParams(3.0, 3.0, 3.0)  # boundary trace -2: a cusp
    assert TorusParams(4, 4, 4).kappa == -18


def test_glue_satisfies_relator(surface):
    L = list(surface.letters())
    R = product(L, GENUS2.relator)
    assert np.abs(R - np.eye(2)).max() < 1e-9
    assert abs(surface.boundary_length - 2 * math.acosh(9)) < 1e-12


def test_glue_rejects_boundary_mismatch():
    with pytest.raises(BoundaryMismatch):
        glue_genus2((4, 4, 4), (4, 4, 5))


# boundary trace -18 is reachable once x, y >= 4
@given(st.floats(4.0, 7.0), st.floats(4.0, 7.0), st.floats(-2.0, 2.0))
def test_glue_with_matching_boundaries(x, y, twist):
    p2 = (x, y, torus_z(x, y, -18.0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DiscretenessSuspect)
        rep = glue_genus2((4, 4, 4), p2, twist, probe=False)
    assert np.abs(product(list(rep.letters()), GENUS2.relator) - np.eye(2)).max() < 1e-7


def test_retwist_fixes_curve_and_first_factor(surface):
    r = retwist(surface, 0.8)
    assert all(np.allclose(a, b) for a, b in zip(r.gens[:2], surface.gens[:2]))
    c = comm(*surface.gens[:2])
    assert abs(sl2_translation_length(comm(*r.gens[:2])) - sl2_translation_length(c)) < 1e-9
    assert np.abs(product(list(r.letters()), GENUS2.relator) - np.eye(2)).max() < 1e-9
    # a curve crossing the splitting changes length
    w = [0, 4]
    assert abs(sl2_translation_length(product(list(r.letters()), w))
               - sl2_translation_length(product(list(surface.letters()), w))) > 1e-3


def test_retwist_composes(surface):
    a = retwist(retwist(surface, 0.3), 0.4)
    b = retwist(surface, 0.7)
    for g, h in zip(a.gens, b.gens):
        assert np.allclose(g, h, atol=1e-9)


@pytest.mark.parametrize("a,b,c", [(4, 4, 4), (4, 4, 8), (1.0, 2.0, 3.0)])
def test_pants_boundary_lengths(a, b, c):
    A, B = pants_rep(a, b, c)
    assert abs(sl2_translation_length(A) - a) < 1e-9
    assert abs(sl2_translation_length(B) - b) < 1e-9
    assert abs(sl2_translation_length(A @ B) - c) < 1e-8


def test_pants_rejects_degenerate():
    with pytest.raises(CuspedOrDegenerate):
        pants_rep(4, 0, 4)


def test_collar_width():
    assert abs(collar_width(2 * math.asinh(1)) - math.asinh(1)) < 1e-12
    with pytest.raises(ValueError):
        collar_width(0)


def test_systole_probe_bounds_generator_lengths(surface):
    s = systole_probe(surface, 3)
    gens = min(sl2_translation_length(G) for G in surface.gens)
    assert 0 < s <= gens + 1e-12


def test_center_letters_preserves_traces_and_shrinks(surface):
    L = surface.letters()
    C = center_letters(L)
    assert np.allclose([tr(M) for M in C], [tr(M) for M in L])
    size = lambda S: max(float((M ** 2).sum()) for M in S[::2])
    assert size(C) <= size(L) + 1e-9


@given(st.floats(-5, 5))
def test_translation_length_of_diagonal(t):
    assume(abs(t) > 1e-3)
    M = np.diag([math.exp(t / 2), math.exp(-t / 2)])
    assert abs(sl2_translation_length(M) - abs(t)) < 1e-9
