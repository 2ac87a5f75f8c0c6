"""Words in surface and free groups, conjugacy representatives, enumeration
and intersection numbers with the separating curve.

Letters are small integers: generator ``g`` is ``2*g`` and its inverse is
``2*g + 1``, so inversion of a letter is ``l ^ 1``.  A word is a tuple of
letters.  For the genus-2 group the generators are a1, b1, a2, b2 and an
inverse prints in upper case (``A1`` is a1^-1).
"""
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceCapExceeded

DEFAULT_CAP = 10 ** 7


@dataclass(frozen=True)
class Presentation:
    gens: tuple
    relator: tuple = None

    @property
    def rank(self):
        return len(self.gens)

    @property
    def nletters(self):
        return 2 * len(self.gens)


GENUS2 = Presentation(("a1", "b1", "a2", "b2"), (0, 2, 1, 3, 4, 6, 5, 7))


def free_group(gens=("a", "b")):
    return Presentation(tuple(gens))


@dataclass(frozen=True)
class Splitting:
    """Amalgam splitting: factor index (0 or 1) of each generator and the
    peripheral curve, which lies in the first factor."""
    factor: tuple = (0, 0, 1, 1)
    peripheral: tuple = (0, 2, 1, 3)
    kind: str = "amalgam"  # "hnn" is reserved, not implemented
    # peripheral word written in the second factor (equal in the group)
    peripheral_other: tuple = field(default=(6, 4, 7, 5))


GENUS2_SPLITTING = Splitting()


# -- parsing and printing -----------------------------------------------------

_TOKEN = re.compile(r"([A-Za-z]\d*)(\^-1|⁻¹)?")


def parse_word(text, p=GENUS2):
    if isinstance(text, (tuple, list)):
        return tuple(text)
    names = {g: i for i, g in enumerate(p.gens)}
    out = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        if text[pos] in " ·*.,":
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse word at {text[pos:]!r}")
        tok, inv = m.group(1), m.group(2)
        if tok in names:
            letter = 2 * names[tok]
        elif tok.lower() in names and tok != tok.lower():
            letter = 2 * names[tok.lower()] + 1
        else:
            raise ValueError(f"unknown generator {tok!r}")
        out.append(letter ^ 1 if inv else letter)
        pos = m.end()
    return tuple(out)


def format_word(w, p=GENUS2):
    return "".join(p.gens[l >> 1].upper() if l & 1 else p.gens[l >> 1] for l in w)


# -- reductions ---------------------------------------------------------------

def inverse(w):
    return tuple(l ^ 1 for l in reversed(w))


def free_reduce(w):
    out = []
    for l in w:
        if out and out[-1] == l ^ 1:
            out.pop()
        else:
            out.append(l)
    return tuple(out)


def cyclic_reduce(w):
    w = free_reduce(w)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == w[j - 1] ^ 1:
        i += 1
        j -= 1
    return w[i:j]


def relator_cycles(p):
    if p.relator is None:
        return []
    r = tuple(p.relator)
    ri = inverse(r)
    return [r[i:] + r[:i] for i in range(len(r))] + [ri[i:] + ri[:i] for i in range(len(ri))]


def _dehn_rules(p):
    """Map long relator subwords (more than half) to their shorter complement."""
    rules = {}
    for r in relator_cycles(p):
        n = len(r)
        for k in range(n // 2 + 1, n + 1):
            rules[r[:k]] = inverse(r[k:])
    return rules


_RULES = {}


def _rules(p):
    if p not in _RULES:
        _RULES[p] = _dehn_rules(p)
    return _RULES[p]


def dehn_reduce_cyclic(w, p):
    """Cyclically reduce and remove long relator pieces, wrapping around."""
    w = cyclic_reduce(w)
    rules = _rules(p)
    if not rules:
        return w
    n = len(p.relator)
    changed = True
    while changed and w:
        changed = False
        m = len(w)
        for k in range(min(n, m), n // 2, -1):
            for i in range(m):
                piece = tuple(w[(i + j) % m] for j in range(k))
                if piece in rules:
                    rest = tuple(w[(i + k + j) % m] for j in range(m - k))
                    w = cyclic_reduce(rules[piece] + rest)
                    changed = True
                    break
            if changed:
                break
    return w


def min_rotation(w):
    if not w:
        return w
    return min(w[i:] + w[:i] for i in range(len(w)))


def canonicalize_conjugacy(w, p=GENUS2):
    w = parse_word(w, p) if isinstance(w, str) else tuple(w)
    if p.relator is not None:
        w = dehn_reduce_cyclic(w, p)
    else:
        w = cyclic_reduce(w)
    return min_rotation(w)


# -- vectorized enumeration ----------------------------------------------------

def forbidden_table(p):
    """Boolean lookup over base-(2r) codes of windows of length n//2 + 1
    that are subwords of a cyclic relator; None for free groups."""
    if p.relator is None:
        return None, 0
    base = p.nletters
    m = len(p.relator) // 2 + 1
    table = np.zeros(base ** m, dtype=bool)
    for r in relator_cycles(p):
        code = 0
        for l in r[:m]:
            code = code * base + l
        table[code] = True
    return table, m


def _codes(W, start, m, base):
    code = np.zeros(len(W), dtype=np.int64)
    for j in range(m):
        code = code * base + W[:, start + j].astype(np.int64)
    return code


def cyclic_window_ok(W, p):
    """Rows of W (cyclically reduced words) with no forbidden window, wrapping."""
    table, m = forbidden_table(p)
    K, n = W.shape
    if table is None or n < m or K == 0:
        return np.ones(K, dtype=bool)
    ww = np.concatenate([W, W[:, :m - 1]], 1)
    ok = np.ones(K, dtype=bool)
    for i in range(n):
        ok &= ~table[_codes(ww, i, m, p.nletters)]
    return ok


def grow(p, max_len, step=None, state=None, cap=DEFAULT_CAP, chunk=300_000):
    """Breadth-first growth of freely reduced words avoiding forbidden windows.

    ``step(state_rows, letters) -> (new_state, keep_mask)`` prunes prefixes
    (e.g. by displacement).  Yields (W, state) for each length 1..max_len
    where W holds every surviving word of that length.
    """
    nlet = p.nletters
    table, m = forbidden_table(p)
    W = np.arange(nlet, dtype=np.int8).reshape(-1, 1)
    if step is not None:
        state, keep = step(None, np.arange(nlet))
        W, state = W[keep], state[keep]
    total = len(W)
    for n in range(1, max_len + 1):
        yield W, state
        if n == max_len or len(W) == 0:
            return
        Ws, Ss = [], []
        for s in range(0, len(W), chunk):
            Wk = W[s:s + chunk]
            k = len(Wk)
            let = np.tile(np.arange(nlet, dtype=np.int8), k)
            idx = np.repeat(np.arange(k), nlet)
            good = let != (Wk[idx, -1] ^ 1)
            if table is not None and n >= m - 1:
                code = _codes(Wk[idx], n - (m - 1), m - 1, nlet) * nlet + let
                good &= ~table[code]
            idx, let = idx[good], let[good]
            if step is not None:
                ns, keep = step(state[s:s + chunk][idx], let)
                idx, let = idx[keep], let[keep]
                Ss.append(ns[keep])
            Ws.append(np.concatenate([Wk[idx], let[:, None]], 1))
        W = np.concatenate(Ws) if Ws else np.zeros((0, n + 1), np.int8)
        state = np.concatenate(Ss) if Ss else None
        total += len(W)
        if total > cap:
            raise ResourceCapExceeded(f"more than {cap} candidate words")


def cyclic_candidates(W, p):
    """Filter a block of same-length words to cyclically reduced words with
    no forbidden window across the wrap point."""
    if len(W) == 0:
        return np.ones(0, dtype=bool)
    ok = W[:, -1] != (W[:, 0] ^ 1)
    if W.shape[1] == 1:
        return ok
    ok[ok] = cyclic_window_ok(W[ok], p)
    return ok


def min_rotation_batch(W):
    K, n = W.shape
    if K == 0 or n <= 1:
        return W.copy()
    rot = np.stack([np.roll(W, -i, 1) for i in range(n)], 1)
    alive = np.ones((K, n), dtype=bool)
    for j in range(n):
        v = np.where(alive, rot[:, :, j], 127)
        alive &= v == v.min(1, keepdims=True)
    return rot[np.arange(K), alive.argmax(1)]


def projected_count(p, max_len):
    nlet = p.nletters
    return sum(nlet * (nlet - 1) ** (n - 1) for n in range(1, max_len + 1))


def enumerate_classes(p=GENUS2, max_word_len=4, min_word_len=1, cap=DEFAULT_CAP, merge=True):
    """Canonical representatives of the nontrivial conjugacy classes having a
    cyclically reduced representative of length in [min_word_len, max_word_len].

    Oriented classes; sorted by (length, letters).  For a one-relator
    presentation, residual duplicates left by Dehn reduction are merged by
    spectral fingerprint (see ``spectral``).
    """
    if max_word_len < 1:
        raise ValueError("max_word_len must be positive")
    if projected_count(p, max_word_len) > cap:
        raise ResourceCapExceeded(
            f"projected {projected_count(p, max_word_len)} candidates exceeds cap {cap}")
    blocks = []
    for W, _ in grow(p, max_word_len, cap=cap):
        if W.shape[1] < min_word_len:
            continue
        W = W[cyclic_candidates(W, p)]
        if len(W):
            blocks.append(np.unique(min_rotation_batch(W), axis=0))
    if p.relator is not None and merge and blocks:
        from .spectral import merge_by_fingerprint
        words = merge_by_fingerprint(blocks).words
    else:
        words = [tuple(int(x) for x in row) for B in blocks for row in B]
    return sorted(words, key=lambda w: (len(w), w))


# -- intersection with the splitting curve ----------------------------------

def _peripheral_power(syl, per):
    """Return k if the freely reduced syllable equals per^k, else None."""
    n = len(per)
    if len(syl) % n:
        return None
    k = len(syl) // n
    if syl == per * k:
        return k
    if syl == inverse(per) * k:
        return -k
    return None


def intersection_number(w, s=GENUS2_SPLITTING):
    """Bass-Serre translation length of the cyclic word w in the tree of the
    splitting: the number of cyclic syllables once no syllable lies in the
    edge group."""
    return amalgam_form(w, s)[0]


def amalgam_form(w, s=GENUS2_SPLITTING):
    """(iota, word): the intersection number and a conjugate of w in which
    no syllable lies in the edge group (a single-factor word when iota = 0)."""
    w = cyclic_reduce(tuple(w))
    if not w:
        return 0, w
    fac = s.factor
    per = (tuple(s.peripheral), tuple(s.peripheral_other))
    # rotate so that a syllable starts at index 0
    m = len(w)
    start = next((i for i in range(m) if fac[w[i] >> 1] != fac[w[i - 1] >> 1]), None)
    if start is None:
        return 0, w
    w = w[start:] + w[:start]
    syls = []
    for l in w:
        f = fac[l >> 1]
        if syls and syls[-1][0] == f:
            syls[-1][1].append(l)
        else:
            syls.append([f, [l]])
    syls = [(f, free_reduce(x)) for f, x in syls]
    changed = True
    while changed and len(syls) > 1:
        changed = False
        for i, (f, x) in enumerate(syls):
            k = _peripheral_power(x, per[f])
            if x and k is None:
                continue
            # move the edge-group element into the neighbouring syllable
            j = (i + 1) % len(syls)
            g, y = syls[j]
            moved = per[g] * k if k and k > 0 else inverse(per[g]) * (-k if k else 0)
            syls[j] = (g, free_reduce(moved + y))
            del syls[i]
            # merge cyclic neighbours of equal factor
            merged = []
            for f2, x2 in syls:
                if merged and merged[-1][0] == f2:
                    merged[-1] = (f2, free_reduce(merged[-1][1] + x2))
                else:
                    merged.append((f2, x2))
            if len(merged) > 1 and merged[0][0] == merged[-1][0]:
                merged[0] = (merged[0][0], free_reduce(merged[-1][1] + merged[0][1]))
                merged.pop()
            syls = merged
            changed = True
            break
    word = cyclic_reduce(tuple(l for _, x in syls for l in x))
    if len(syls) <= 1:
        return 0, word
    return len(syls), word


def intersection_batch(W, s=GENUS2_SPLITTING):
    """Intersection numbers for a block of cyclically reduced words, plus a
    dict {row: amalgam-reduced word} for the rows whose syllables had to be
    rearranged.

    Fast path: count cyclic factor changes; only words containing a full
    peripheral window are recomputed exactly.
    """
    W = np.asarray(W)
    fac = np.asarray(s.factor)[W >> 1]
    changes = (fac != np.roll(fac, 1, axis=1)).sum(1)
    out = changes.copy()
    forms = {}
    # a syllable in the edge group contains a full copy of a peripheral word
    # (or its inverse); only words with such a cyclic window are rechecked
    pats = [tuple(s.peripheral), inverse(s.peripheral),
            tuple(s.peripheral_other), inverse(s.peripheral_other)]
    k = len(pats[0])
    n = W.shape[1]
    if n < k:
        return out, forms
    ww = np.concatenate([W, W[:, :k - 1]], 1).astype(np.int64)
    pcodes = set()
    for pat in pats:
        c = 0
        for l in pat:
            c = c * 8 + l
        pcodes.add(c)
    hit = np.zeros(len(W), dtype=bool)
    for i in range(n):
        hit |= np.isin(_codes(ww, i, k, 8), list(pcodes))
    for i in np.nonzero(hit & (changes > 0))[0]:
        row = tuple(int(x) for x in W[i])
        out[i], form = amalgam_form(row, s)
        if form != row:
            forms[int(i)] = form
    return out, forms
