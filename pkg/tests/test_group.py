import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import freely_reduced_words
from hitchin_forge.errors import ResourceCapExceeded
from hitchin_forge.group import (GENUS2, GENUS2_SPLITTING, amalgam_form, canonicalize_conjugacy,
                                 cyclic_reduce, enumerate_classes, format_word, free_group,
                                 free_reduce, intersection_batch, intersection_number, inverse,
                                 min_rotation, min_rotation_batch, parse_word, projected_count)

letters = st.integers(0, 7)
words = st.lists(letters, max_size=12).map(tuple)


def rotations(w):
    return [w[i:] + w[:i] for i in range(len(w))]


# -- parsing -------------------------------------------------------------------

def test_parse_known_words():
    assert parse_word("a1 b1 A1 B1") == (0, 2, 1, 3)
    assert parse_word("a2^-1 b2⁻¹") == (5, 7)
    assert parse_word("a1·b1") == (0, 2)
    assert parse_word("") == ()


def test_parse_rejects_unknown_generator():
    with pytest.raises(ValueError):
        parse_word("c3")


@given(words)
def test_format_parse_round_trip(w):
    assert parse_word(format_word(w)) == w


# -- reductions ------------------------------------------------------------------

@given(words)
def test_inverse_is_involution(w):
    assert inverse(inverse(w)) == w


@given(words)
def test_free_reduce_idempotent_and_reduced(w):
    r = free_reduce(w)
    assert free_reduce(r) == r
    assert all(r[i + 1] != r[i] ^ 1 for i in range(len(r) - 1))


@given(words)
def test_word_times_inverse_reduces_to_identity(w):
    assert free_reduce(w + inverse(w)) == ()


@given(words)
def test_cyclic_reduce_is_cyclically_reduced(w):
    r = cyclic_reduce(w)
    if len(r) > 1:
        assert r[0] != r[-1] ^ 1


def test_relator_is_trivial():
    for r in rotations(GENUS2.relator) + rotations(inverse(GENUS2.relator)):
        assert canonicalize_conjugacy(r) == ()


@given(words)
def test_canonical_form_invariant_under_rotation(w):
    c = canonicalize_conjugacy(w)
    assert canonicalize_conjugacy(c) == c
    r = cyclic_reduce(w)
    for rot in rotations(r):
        assert canonicalize_conjugacy(rot) == c


@given(words, letters)
def test_canonical_form_invariant_under_letter_conjugation(w, l):
    assert canonicalize_conjugacy((l,) + w + (l ^ 1,)) == canonicalize_conjugacy(w)


@given(words)
def test_canonical_form_absorbs_inserted_relator(w):
    assert canonicalize_conjugacy(w + GENUS2.relator) == canonicalize_conjugacy(w)


def test_min_rotation_batch_matches_scalar():
    rng = np.random.default_rng(3)
    W = rng.integers(0, 8, size=(200, 6)).astype(np.int8)
    got = min_rotation_batch(W)
    for row, g in zip(W, got):
        assert tuple(g) == min_rotation(tuple(int(x) for x in row))


# -- enumeration -------------------------------------------------------------------

def _free_necklaces(nletters, max_len):
    """Brute-force conjugacy classes of a free group: min rotations of
    cyclically reduced words."""
    out = set()
    for w in freely_reduced_words(nletters, max_len):
        if len(w) == 1 or w[0] != w[-1] ^ 1:
            out.add(min(w[i:] + w[:i] for i in range(len(w))))
    return out


def test_free_group_enumeration_matches_brute_force():
    F2 = free_group()
    got = enumerate_classes(F2, 5)
    assert set(got) == _free_necklaces(4, 5)
    assert len(got) == len(set(got))


def test_cyclically_reduced_counts_free_group():
    # number of cyclically reduced words of length n in F_2: 3^n + 1 + (1 + (-1)^n)
    F2 = free_group()
    for n in range(1, 6):
        count = sum(1 for w in itertools.product(range(4), repeat=n)
                    if all(w[(i + 1) % n] != w[i] ^ 1 for i in range(n)))
        assert count == 3 ** n + 1 + (1 + (-1) ** n)
    # necklace count at length 2: the 12 cyclically reduced words fold to 8 classes
    assert sum(1 for w in enumerate_classes(F2, 2) if len(w) == 2) == 8


def test_genus2_enumeration_is_sorted_and_canonical():
    ws = enumerate_classes(GENUS2, 3)
    assert ws == sorted(ws, key=lambda w: (len(w), w))
    assert ws[:8] == [(l,) for l in range(8)]
    for w in ws:
        assert w == min_rotation(w) and cyclic_reduce(w) == w


def test_enumeration_respects_cap():
    with pytest.raises(ResourceCapExceeded):
        enumerate_classes(GENUS2, 6, cap=1000)
    assert projected_count(GENUS2, 2) == 8 + 56


def test_enumeration_rejects_nonpositive_length():
    with pytest.raises(ValueError):
        enumerate_classes(GENUS2, 0)


# -- intersection with the splitting curve ------------------------------------------

@pytest.mark.parametrize("text,iota", [
    ("a1", 0), ("b2", 0), ("a1 b1", 0), ("a1 a2", 2), ("a1 a2 b1 b2", 4),
    ("a1 b1 A1 B1", 0), ("b2 a2 B2 A2", 0), ("a1 b1 A1 B1 a2", 0),
])
def test_intersection_known_values(text, iota):
    assert intersection_number(parse_word(text)) == iota


def test_peripheral_forms_agree():
    s = GENUS2_SPLITTING
    # c written in either factor is the same group element
    assert canonicalize_conjugacy(s.peripheral + inverse(s.peripheral_other)) == ()


@given(words)
def test_intersection_even_and_conjugation_invariant(w):
    i = intersection_number(w)
    assert i % 2 == 0
    r = cyclic_reduce(w)
    for rot in rotations(r):
        assert intersection_number(rot) == i
    assert intersection_number(inverse(w)) == i


@given(words)
def test_amalgam_form_is_conjugate(w):
    i, form = amalgam_form(w)
    assert canonicalize_conjugacy(form) == canonicalize_conjugacy(w)
    assert intersection_number(form) == i


def test_intersection_batch_matches_scalar():
    ws = [w for w in enumerate_classes(GENUS2, 5) if len(w) == 5]
    W = np.array(ws)
    got, forms = intersection_batch(W)
    for k, w in enumerate(ws):
        assert got[k] == intersection_number(w)
