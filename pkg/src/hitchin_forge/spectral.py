"""Spectral fingerprints of conjugacy classes.

A fingerprint is the pair (lambda_1, -lambda_d) of a word under each of two
fixed auxiliary SL3 representations.  They are built by bending tau_3 of a
fixed, centred genus-2 surface along the four generators with seeded Cartan
parameters, which breaks the symmetries (inversion, hyperelliptic reversal)
that make Fuchsian traces useless for telling classes apart.  A third
representation of the same kind checks each merge.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .lie import evaluate_words, inverse_words, irreducible_rep

FP_DECIMALS = 6
_QUANT = 10.0 ** -FP_DECIMALS
_BASE = ((3.3, 4.1, 4.7), (4.7, 3.3, 4.1), 0.7)
SEEDS = (11, 12, 13)


def _eigframe(M):
    w, v = np.linalg.eig(M)
    return v[:, np.argsort(-np.abs(w))].real


@lru_cache(maxsize=None)
def aux_letters(seed):
    from .fuchsian import center_letters, glue_genus2
    base = center_letters(glue_genus2(*_BASE, probe=False).letters())[::2]
    rng = np.random.default_rng(seed)
    g = [irreducible_rep(3, G) for G in base]
    # b1 bent by the centralizer of a1, then a1 by the centralizer of the new b1, ...
    for axis, moved in ((0, 1), (1, 0), (2, 3), (3, 2)):
        z = rng.normal(0.0, 0.3, 3)
        z -= z.mean()
        P = _eigframe(g[axis])
        g[moved] = g[moved] @ (P @ np.diag(np.exp(z)) @ np.linalg.inv(P))
    out = []
    for G in g:
        out += [G, np.linalg.inv(G)]
    return np.array(out)


def _top_log(L, W):
    M, s = evaluate_words(L, W)
    return np.log(np.abs(np.linalg.eigvals(M)).max(1)) + s


def raw_fingerprints(W, seeds=SEEDS[:2]):
    """Unrounded fingerprint vectors (K, 2*len(seeds)) for the words in W."""
    W = np.asarray(W)
    Wi = inverse_words(W)
    cols = []
    for seed in seeds:
        L = aux_letters(seed)
        cols += [_top_log(L, W), _top_log(L, Wi)]
    return np.stack(cols, 1)


def fingerprint_string(v):
    return ";".join(f"{x:.{FP_DECIMALS}f}" for x in v)


@dataclass
class MergeResult:
    words: list          # representative per class
    fingerprints: np.ndarray
    merged: int          # rows folded into an existing class
    collisions: int      # merges the check representation disagrees with


def merge_by_fingerprint(blocks, check=True):
    """Fold same-class words given as blocks of canonical words (each block
    a 2-d array of equal-length words, possibly repeated across blocks).

    Keys are fingerprints quantized at FP_DECIMALS; values lying within
    1e-8 of a cell boundary also probe the neighbouring cell, so rounding
    noise cannot split a class.  The shortest, then lexicographically
    smallest word represents its class.
    """
    by_len = {}
    for B in blocks:
        if len(B):
            by_len.setdefault(B.shape[1], []).append(np.asarray(B))
    words, fps = [], []
    for n in sorted(by_len):
        B = np.unique(np.concatenate(by_len[n]), axis=0)
        words.extend(tuple(int(x) for x in row) for row in B)
        fps.append(raw_fingerprints(B))
    if not words:
        return MergeResult([], np.zeros((0, 4)), 0, 0)
    F = np.concatenate(fps)
    q = F / _QUANT
    key = np.floor(q + 0.5).astype(np.int64)
    frac = q + 0.5 - key  # in [0, 1)
    near = (frac < 1e-8 / _QUANT) | (frac > 1 - 1e-8 / _QUANT)
    owner = {}
    parent = np.arange(len(words))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    keys = [tuple(k) for k in key.tolist()]
    for i, k in enumerate(keys):
        j = owner.setdefault(k, i)
        if j != i:
            parent[find(i)] = find(j)
    for i in np.nonzero(near.any(1))[0]:
        base = key[i].copy()
        alts = [base]
        for c in np.nonzero(near[i])[0]:
            shift = -1 if frac[i, c] < 0.5 else 1
            new = []
            for a in alts:
                b = a.copy()
                b[c] += shift
                new.append(b)
            alts += new
        for a in alts[1:]:
            j = owner.get(tuple(a.tolist()))
            if j is not None:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(len(words))])
    # words come in (length, lex) order, so the smallest index is the representative
    groups = {}
    for i, r in enumerate(roots):
        groups.setdefault(r, []).append(i)
    reps = sorted(min(g) for g in groups.values())
    merged = len(words) - len(reps)
    collisions = 0
    if check and merged:
        multi = [g for g in groups.values() if len(g) > 1]
        idx = [i for g in multi for i in g]
        Wc = _pad([words[i] for i in idx])
        chk = raw_fingerprints(Wc, seeds=SEEDS[2:])
        pos = 0
        for g in multi:
            block = chk[pos:pos + len(g)]
            pos += len(g)
            if np.abs(block - block[0]).max() > 1e-5:
                collisions += 1
    return MergeResult([words[i] for i in reps], F[reps], merged, collisions)


def _pad(words):
    n = max(len(w) for w in words)
    W = -np.ones((len(words), n), dtype=np.int64)
    for i, w in enumerate(words):
        W[i, :len(w)] = w
    return W
