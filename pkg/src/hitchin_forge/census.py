"""Census of closed-geodesic conjugacy classes.

Enumeration grows freely reduced, Dehn-reduced words breadth first under the
centred Fuchsian representation and prunes any prefix whose basepoint
displacement exceeds ``radius + slack``; words that close up to a class of
hyperbolic length at most ``radius`` are kept.  Every class is then
evaluated under each labelled representation.
"""
import csv
import gzip
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from . import __version__
from .errors import EigenFailure, FormatVersionMismatch
from .fuchsian import center_letters
from .group import (DEFAULT_CAP, GENUS2, GENUS2_SPLITTING, cyclic_candidates,
                    format_word, free_group, grow, intersection_batch, min_rotation_batch,
                    parse_word)
from .lie import calibrate_alpha0, displacement_batch, finsler_batch, irreducible_rep
from .spectral import fingerprint_string, merge_by_fingerprint

MAGIC = "hitchin-census,v1"
FUCHSIAN = "fuchsian"
DEFAULT_SLACK = 2.0


@dataclass(frozen=True)
class CensusRow:
    word: tuple
    wlen: int
    l_hyp: float
    l_F: dict
    iota: int
    fingerprint: str


@dataclass
class Census:
    words: list
    l_hyp: np.ndarray
    lengths: dict             # label -> array aligned with words
    iota: np.ndarray
    fingerprints: list
    r_star: float
    radii: dict = field(default_factory=dict)
    config_hash: str = ""
    d: int = 3
    stats: dict = field(default_factory=dict)
    r_sub: float = None       # completeness radius of the non-crossing classes
    forms: dict = None        # row -> amalgam-reduced word used for evaluation

    def __post_init__(self):
        self._sorted = {}
        if self.r_sub is None:
            self.r_sub = self.r_star
        if self.forms is None:
            self.forms = amalgam_forms(self.words)

    def eval_array(self):
        return _pad([self.forms.get(i, w) for i, w in enumerate(self.words)])

    def __len__(self):
        return len(self.words)

    @property
    def labels(self):
        return list(self.lengths)

    @property
    def wlen(self):
        return np.array([len(w) for w in self.words], dtype=int)

    @property
    def rows(self):
        return [CensusRow(w, len(w), float(self.l_hyp[i]),
                          {k: float(v[i]) for k, v in self.lengths.items()},
                          int(self.iota[i]), self.fingerprints[i])
                for i, w in enumerate(self.words)]

    def radius(self, label):
        return self.radii.get(label, self.r_star)

    def sorted_lengths(self, label):
        if label not in self._sorted:
            self._sorted[label] = np.sort(self.lengths[label])
        return self._sorted[label]

    def count(self, label, R):
        """N(R): number of classes with length at most R under the label."""
        return np.searchsorted(self.sorted_lengths(label), R, side="right")

    def with_labels(self, reps, alpha=None):
        """New census with extra label columns evaluated on the same rows."""
        alpha = alpha or calibrate_alpha0(self.d)
        W = self.eval_array()
        lengths = dict(self.lengths)
        for label, letters in reps.items():
            lengths[label] = _evaluate(letters, W, alpha)
        radii = dict(self.radii)
        radii.update(label_radii(self.l_hyp, self.iota, {k: lengths[k] for k in reps},
                                 self.r_star, self.r_sub))
        return Census(self.words, self.l_hyp, lengths, self.iota, self.fingerprints,
                      self.r_star, radii, self.config_hash, self.d, dict(self.stats),
                      self.r_sub, self.forms)


def _pad(words):
    n = max((len(w) for w in words), default=1)
    W = -np.ones((len(words), n), dtype=np.int64)
    for i, w in enumerate(words):
        W[i, :len(w)] = w
    return W


def _evaluate(letters, W, alpha, block=200_000):
    out = np.empty(len(W))
    for s in range(0, len(W), block):
        try:
            out[s:s + block] = finsler_batch(letters, W[s:s + block], alpha)
        except EigenFailure as exc:
            bad = s + (exc.word or 0)
            raise EigenFailure("eigenvalue computation failed",
                               word=format_word([int(x) for x in W[bad] if x >= 0])) from None
    return out


def letters_of(gens):
    out = []
    for G in gens:
        G = np.asarray(G, dtype=float)
        out += [G, np.linalg.inv(G)]
    return np.array(out)


def label_radii(l_hyp, iota, lengths, r_star, r_sub=None):
    """Completeness radius per label.

    Crossing classes are complete up to Fuchsian length r_star and
    non-crossing ones up to r_sub.  With D_+ and D_0 the smallest observed
    excess (label length minus Fuchsian length) over crossing and
    non-crossing rows, any class with label length at most
    min(r_star + D_+, r_sub + D_0) is in the census.
    """
    r_sub = r_star if r_sub is None else r_sub
    out = {}
    cross = iota > 0
    for label, ls in lengths.items():
        diff = ls - l_hyp
        d_plus = float(diff[cross].min()) if cross.any() else 0.0
        d_zero = float(diff[~cross].min()) if (~cross).any() else 0.0
        out[label] = min(r_star + d_plus, r_sub + d_zero)
    return out


def amalgam_forms(words):
    """Rows whose evaluation word differs from the display word."""
    forms = {}
    if not words:
        return forms
    wlen = np.array([len(w) for w in words])
    W = _pad(words)
    for n in np.unique(wlen):
        if n == 0:
            continue
        sel = np.nonzero(wlen == n)[0]
        _, f = intersection_batch(W[sel][:, :n], GENUS2_SPLITTING)
        forms.update({int(sel[i]): w for i, w in f.items()})
    return forms


def lp_radius(wlen, l_hyp, max_word_len):
    """max over (c, b) of c * max_word_len - b subject to c |w| - b <= l for all rows."""
    wl = np.asarray(wlen, dtype=float)
    ls = np.asarray(l_hyp, dtype=float)
    if len(wl) == 0:
        return 0.0
    res = linprog(c=[-max_word_len, 1.0], A_ub=np.stack([wl, -np.ones_like(wl)], 1),
                  b_ub=ls, bounds=[(0, None), (None, None)], method="highs")
    if res.status != 0:
        return float("inf")
    c, b = res.x
    return float(c * max_word_len - b)


def _displacement_step(L, R, alpha):
    def step(M, let):
        new = L[let] if M is None else M @ L[let]
        return new, displacement_batch(new, alpha) <= R
    return step


def enumerate_geodesic_words(letters, radius, max_word_len, p=GENUS2,
                             slack=DEFAULT_SLACK, cap=DEFAULT_CAP):
    """Blocks of canonical (lex-min rotation) words of classes with length
    at most ``radius`` under the SL2 letters, grouped by word length."""
    L = np.asarray(letters)
    alpha = calibrate_alpha0(L.shape[-1])
    blocks, nodes = [], 0
    for W, M in grow(p, max_word_len, step=_displacement_step(L, radius + slack, alpha), cap=cap):
        nodes += len(W)
        ok = cyclic_candidates(W, p)
        if not ok.any():
            continue
        tr = np.abs(M[ok, 0, 0] + M[ok, 1, 1])
        ell = 2 * np.arccosh(np.maximum(tr / 2, 1.0))
        Wk = W[ok][ell <= radius]
        if len(Wk):
            blocks.append(np.unique(min_rotation_batch(Wk), axis=0))
    return blocks, nodes


def _factor_blocks(L2, factor, radius, max_word_len, slack, cap):
    """Classes of one free factor (genus-2 letters 4*factor .. 4*factor+3)."""
    F2 = free_group(("a", "b"))
    off = 4 * factor
    L = center_letters(L2[off:off + 4])
    blocks, nodes = enumerate_geodesic_words(L, radius, max_word_len, F2, slack, cap)
    return [np.unique(min_rotation_batch((B + off).astype(np.int8)), axis=0) for B in blocks], nodes


def build_census(surface, reps=None, max_word_len=40, radius=12.0, d=3,
                 slack=DEFAULT_SLACK, cap=DEFAULT_CAP, config_hash="", subsurface_radius=None):
    """Census of genus-2 classes with Fuchsian length at most ``radius`` and
    word length at most ``max_word_len``.

    ``surface`` is the base SurfaceRep2; ``reps`` maps extra labels to
    letter stacks (generator, inverse, ...) of d x d matrices.  The label
    "fuchsian" is tau_d of the base.  With ``subsurface_radius`` the classes
    carried by either factor (iota = 0) are completed up to that larger
    Fuchsian length, which is what heavily grafted labels need.
    """
    L2 = center_letters(surface.letters())
    blocks, nodes = enumerate_geodesic_words(L2, radius, max_word_len, GENUS2, slack, cap)
    r_sub = radius
    if subsurface_radius is not None and subsurface_radius > radius:
        r_sub = float(subsurface_radius)
        for f in (0, 1):
            fb, fn = _factor_blocks(L2, f, r_sub, max_word_len, slack, cap)
            blocks += fb
            nodes += fn
    merged = merge_by_fingerprint(blocks)
    words = merged.words
    wlen = np.array([len(w) for w in words])
    iota = np.zeros(len(words), dtype=int)
    W = _pad(words)
    forms = {}
    for n in np.unique(wlen):
        sel = np.nonzero(wlen == n)[0]
        iota[sel], f = intersection_batch(W[sel][:, :n], GENUS2_SPLITTING)
        forms.update({int(sel[i]): w for i, w in f.items()})
    E = _pad([forms.get(i, w) for i, w in enumerate(words)])
    l_hyp = _evaluate(L2, E, calibrate_alpha0(2))
    order = np.lexsort((np.arange(len(words)), wlen, np.round(l_hyp, 9)))
    inv_order = np.empty_like(order)
    inv_order[order] = np.arange(len(order))
    words = [words[i] for i in order]
    forms = {int(inv_order[i]): w for i, w in forms.items()}
    E, l_hyp, wlen, iota = E[order], l_hyp[order], wlen[order], iota[order]
    fps = [fingerprint_string(v) for v in merged.fingerprints[order]]
    r_star = min(radius, lp_radius(wlen, l_hyp, max_word_len))
    alpha = calibrate_alpha0(d)
    lengths = {FUCHSIAN: _evaluate(irreducible_rep(d, surface.letters()), E, alpha)}
    stats = {"nodes": nodes, "merged": merged.merged, "collisions": merged.collisions,
             "radius": radius, "slack": slack, "max_word_len": max_word_len}
    c = Census(words, l_hyp, lengths, iota, fps, r_star, {FUCHSIAN: r_star},
               config_hash, d, stats, max(r_sub, r_star) if r_sub > radius else r_star, forms)
    if reps:
        c = c.with_labels(reps, alpha)
    return c


# -- subgroup length spectra -----------------------------------------------------

@dataclass
class LengthSpectrum:
    """Sorted class lengths of a free subgroup with its completeness radius."""
    lengths: np.ndarray
    r_star: float
    words: list = None   # aligned with lengths when requested

    def count(self, R):
        return np.searchsorted(self.lengths, R, side="right")


def subgroup_spectrum(A, B, radius, slack=DEFAULT_SLACK, max_word_len=60, cap=DEFAULT_CAP,
                      words=False):
    """Hyperbolic lengths of the conjugacy classes of the free group <A, B>
    (two SL2 matrices) up to ``radius``, sorted.  With ``words`` the class
    representatives (letters a=0, A=1, b=2, B=3) come along."""
    F2 = free_group(("a", "b"))
    L = center_letters(letters_of([A, B]))
    blocks, _ = enumerate_geodesic_words(L, radius, max_word_len, F2, slack, cap)
    if not blocks:
        return LengthSpectrum(np.zeros(0), radius, [] if words else None)
    ls = np.concatenate([_evaluate(L, B_, calibrate_alpha0(2)) for B_ in blocks])
    order = np.argsort(ls, kind="stable")
    ws = None
    if words:
        flat = [tuple(int(x) for x in row if x >= 0) for B_ in blocks for row in B_]
        ws = [flat[i] for i in order]
    return LengthSpectrum(ls[order], radius, ws)


# -- persistence -------------------------------------------------------------------

def _open(path, mode):
    path = str(path)
    if path.endswith(".gz"):
        return gzip.open(path, mode + "t", encoding="utf-8", newline="")
    return open(path, mode, encoding="utf-8", newline="")


def dumps_census(c):
    buf = io.StringIO()
    _write(c, buf)
    return buf.getvalue()


def _write(c, fh):
    fh.write(MAGIC + "\n")
    fh.write(f"# version={__version__}\n")
    fh.write(f"# config_hash={c.config_hash}\n")
    fh.write(f"# d={c.d}\n")
    fh.write(f"# r_star={c.r_star!r}\n")
    fh.write(f"# r_sub={c.r_sub!r}\n")
    for label in c.labels:
        fh.write(f"# radius:{label}={c.radius(label)!r}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["word", "wlen", "l_hyp"] + [f"l_F:{k}" for k in c.labels] + ["iota", "fingerprint"])
    cols = [c.lengths[k] for k in c.labels]
    for i, word in enumerate(c.words):
        w.writerow([format_word(word), len(word), repr(float(c.l_hyp[i]))]
                   + [repr(float(col[i])) for col in cols]
                   + [int(c.iota[i]), c.fingerprints[i]])


def save_census(c, path):
    with _open(path, "w") as fh:
        _write(c, fh)


class ProvenanceMismatch(FormatVersionMismatch):
    pass


def load_census(path, expected_hash=None, strict=False):
    with _open(path, "r") as fh:
        first = fh.readline().rstrip("\r\n")
        if first != MAGIC:
            raise FormatVersionMismatch(f"expected header {MAGIC!r}, found {first!r}")
        meta, radii = {}, {}
        line = fh.readline()
        while line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            if key.startswith("radius:"):
                radii[key[len("radius:"):]] = float(val)
            else:
                meta[key] = val
            line = fh.readline()
        rest = line + fh.read()
    if strict and expected_hash is not None and meta.get("config_hash") != expected_hash:
        raise ProvenanceMismatch(
            f"census config hash {meta.get('config_hash')!r} differs from {expected_hash!r}")
    reader = csv.reader(io.StringIO(rest))
    header = next(reader)
    labels = [h[len("l_F:"):] for h in header if h.startswith("l_F:")]
    words, l_hyp, iota, fps = [], [], [], []
    cols = {k: [] for k in labels}
    for row in reader:
        words.append(parse_word(row[0]))
        l_hyp.append(float(row[2]))
        for j, k in enumerate(labels):
            cols[k].append(float(row[3 + j]))
        iota.append(int(row[3 + len(labels)]))
        fps.append(row[4 + len(labels)])
    return Census(words, np.array(l_hyp), {k: np.array(v) for k, v in cols.items()},
                  np.array(iota, dtype=int), fps, float(meta.get("r_star", "nan")), radii,
                  meta.get("config_hash", ""), int(meta.get("d", 3)), {},
                  float(meta["r_sub"]) if "r_sub" in meta else None)
