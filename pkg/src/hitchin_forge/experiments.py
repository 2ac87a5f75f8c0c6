"""Experiment drivers shared by the command line and the acceptance tests.

Each driver takes an effective configuration (see ``config``) and returns
plain rows; formatting and output live in ``cli``.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import config as cfgmod
from .census import FUCHSIAN, build_census, letters_of, subgroup_spectrum
from .errors import ConfigError, InsufficientData
from .fuchsian import glue_genus2, pants_rep, retwist
from .group import GENUS2_SPLITTING, canonicalize_conjugacy, min_rotation
from .grafting import (adapt_frame, cylinder_height, evaluate, grafting_ray, hitchin_base,
                       kernel_direction, make_grafted)
from .lie import (calibrate_alpha0, exterior_power, irreducible_rep, jordan_batch,
                  jordan_projection, shear_direction)
from .thermo import (PathSample, boundary_mass, entropy_derivative_residual,
                     entropy_estimate, intersection_I, normalized_J, pressure_profile)


def ray_label(t):
    return f"ray:{float(t):g}"


@dataclass
class Setup:
    cfg: dict
    hash: str
    surface: object
    base: tuple
    direction: np.ndarray
    frame: np.ndarray = field(repr=False, default=None)

    def ray(self, t):
        return grafting_ray(self.base, self.direction, t, frame=self.frame)

    def ray_reps(self, ts):
        return {ray_label(t): self.ray(t).letters() for t in ts}


def setup(cfg):
    d = cfg["d"]
    surface = glue_genus2(cfg["p1"], cfg["p2"], cfg["twist"])
    base = hitchin_base(surface, d)
    g = cfg["graft"]
    if g.get("direction") is not None:
        z = np.asarray(g["direction"], dtype=float)
        if len(z) != d:
            raise ConfigError(f"graft direction must have {d} entries")
        if g.get("kernel"):
            a = calibrate_alpha0(d)
            if abs(a(z)) > 1e-9:
                raise ConfigError("graft direction is not in the kernel of alpha_0")
        z = z * g.get("sign", 1)
    else:
        z = kernel_direction(d, g.get("sign", 1))
    frame = adapt_frame(base, GENUS2_SPLITTING.peripheral)
    return Setup(cfg, cfgmod.config_hash(cfg), surface, base, z, frame)


def census(s, reps=None, radius=None, max_word_len=None, subsurface_radius=-1.0):
    c = s.cfg["census"]
    return build_census(
        s.surface, reps,
        max_word_len=c["max_word_len"] if max_word_len is None else max_word_len,
        radius=c["radius"] if radius is None else radius,
        d=s.cfg["d"], slack=c["slack"], cap=c["cap"], config_hash=s.hash,
        subsurface_radius=c["subsurface_radius"] if subsurface_radius == -1.0 else subsurface_radius)


# -- entropy ---------------------------------------------------------------------

def factor_spectra(s, radius):
    """Length spectra of the two one-holed-torus subgroups."""
    g = s.surface.gens
    c = s.cfg["census"]
    return (subgroup_spectrum(g[0], g[1], radius, c["slack"], cap=c["cap"]),
            subgroup_spectrum(g[2], g[3], radius, c["slack"], cap=c["cap"]))


def entropy_rows(s, c=None):
    """(label, R0, R1, delta, stderr, rows) for the Fuchsian label, every
    ray node and the two factor subgroups."""
    if c is None:
        c = census(s, s.ray_reps(s.cfg["ray"]["grid"]))
    rows = []
    for label in c.labels:
        f = entropy_estimate(c, label)
        rows.append((label, *f.window, f.delta, f.stderr, f.rows))
    r_sub = max(c.r_sub, c.r_star)
    for name, spec in zip(("gamma1", "gamma2"), factor_spectra(s, r_sub)):
        f = entropy_estimate(spec)
        rows.append((name, *f.window, f.delta, f.stderr, f.rows))
    return c, rows


# -- grafting sweep ----------------------------------------------------------------

GRAFT_COLUMNS = ("t", "height", "delta", "stderr", "I", "J", "boundary_mass")


def graft_sweep(s, c=None):
    ts = [float(t) for t in s.cfg["ray"]["grid"]]
    if c is None:
        c = census(s, s.ray_reps(ts))
    rows = []
    for t in ts:
        label = ray_label(t)
        f = entropy_estimate(c, label)
        height = cylinder_height(s.ray(t).datum.z)
        rows.append((t, height, f.delta, f.stderr, intersection_I(c, FUCHSIAN, label),
                     normalized_J(c, FUCHSIAN, label), boundary_mass(c, label)))
    return c, rows


# -- paths along the ray -----------------------------------------------------------

PRESSURE_COLUMNS = ("t", "speed", "cumulative", "upper_bound")


def ray_path(s, t_max=None, h=None, c=None):
    """Census with ray labels on the grid -2h, ..., t_max + 2h (the outer
    nodes only feed the finite differences) and the matching PathSample."""
    r = s.cfg["ray"]
    h = r["h"] if h is None else h
    t_max = r["t_max"] if t_max is None else t_max
    n = int(round(t_max / h))
    if abs(n * h - t_max) > 1e-9:
        raise ConfigError("ray.t_max must be a multiple of ray.h")
    grid = tuple(float(round(k * h, 12)) for k in range(-2, n + 3))
    reps = s.ray_reps(grid)
    c = census(s, reps) if c is None else c.with_labels(reps)
    return c, PathSample(grid, tuple(ray_label(t) for t in grid), h)


def pressure_rows(s, c=None, path=None):
    if path is None:
        c, path = ray_path(s, c=c)
    prof = pressure_profile(c, path, 0.0, s.cfg["ray"]["t_max"])
    rows = list(zip(prof.t.tolist(), prof.speed.tolist(), prof.cumulative.tolist(),
                    prof.upper_bound.tolist()))
    return c, rows


# -- pants -------------------------------------------------------------------------

PANTS_COLUMNS = ("a", "b", "c", "delta", "stderr", "K_lower", "K_hat", "K_bound_ok",
                 "delta_K_lower", "quarter_log2")


def _peripheral(word):
    """Free-group word (letters a=0, A=1, b=2, B=3) conjugate to a power of a
    boundary curve a, b or ab."""
    w = min_rotation(tuple(word))
    n = len(w)
    for unit in ((0,), (1,), (2,), (3,), (0, 2), (3, 1)):
        k = len(unit)
        if n % k == 0 and min_rotation(unit * (n // k)) == w:
            return True
    return False


def pants_rows(cfg):
    p = cfg["pants"]
    rows = []
    for cc in p["c"]:
        a, b, cc = float(p["a"]), float(p["b"]), float(cc)
        A, B = pants_rep(a, b, cc)
        spec = subgroup_spectrum(A, B, p["radius"], cfg["census"]["slack"],
                                 cap=cfg["census"]["cap"], words=True)
        f = entropy_estimate(spec)
        inner = [l for w, l in zip(spec.words, spec.lengths) if not _peripheral(w)]
        K_hat = float(min(inner)) if inner else math.inf
        K_lower = max(a, b, cc)
        # exact on the census: every interior class up to the radius is at least K_lower long
        ok = all(l >= K_lower - 1e-9 for l in inner)
        rows.append((a, b, cc, f.delta, f.stderr, K_lower, K_hat, int(ok),
                     f.delta * K_lower, 0.25 * math.log(2)))
    return rows


# -- invariant suite -----------------------------------------------------------------

@dataclass
class Check:
    name: str
    ok: bool
    detail: str


def _check(name, fn):
    try:
        ok, detail = fn()
    except InsufficientData as exc:
        ok, detail = False, f"insufficient data: {exc}"
    return Check(name, bool(ok), detail)


def _inversion_pairs(c):
    """Fraction of rows whose inverse class has a row with equal lengths and iota."""
    order = np.argsort(c.l_hyp, kind="stable")
    lh = c.l_hyp[order]
    fp = np.array([[float(x) for x in f.split(";")] for f in c.fingerprints])
    inv = fp.copy()
    inv[:, 0::2], inv[:, 1::2] = fp[:, 1::2], fp[:, 0::2]
    labels = c.labels
    L = np.stack([c.lengths[k] for k in labels], 1)
    missing = 0
    for i in range(len(c)):
        lo = np.searchsorted(lh, c.l_hyp[i] - 1e-7)
        hi = np.searchsorted(lh, c.l_hyp[i] + 1e-7, side="right")
        cand = order[lo:hi]
        good = ((np.abs(fp[cand] - inv[i]).max(1) <= 2e-6)
                & (np.abs(L[cand] - L[i]).max(1) <= 1e-6)
                & (c.iota[cand] == c.iota[i]))
        if not good.any():
            missing += 1
    return missing


def check_suite(s, c=None):
    """Invariant checks on the configured surface; returns a list of Check."""
    d = s.cfg["d"]
    rng = np.random.default_rng(s.cfg["seed"])
    ts = [float(t) for t in s.cfg["ray"]["grid"]]
    if c is None:
        c = census(s, s.ray_reps(ts))
    alpha = calibrate_alpha0(d)
    E = c.eval_array()
    out = []

    def calibration():
        err = float(np.abs(c.lengths[FUCHSIAN] - c.l_hyp).max())
        return err <= 1e-6, f"max |l_F - l_hyp| = {err:.2e}"
    out.append(_check("calibration", calibration))

    def exterior():
        idx = np.sort(rng.choice(len(c), size=min(1000, len(c)), replace=False))
        W = E[idx]
        worst = 0.0
        for label, letters in (("fuchsian", letters_of(s.base)), ("graft", s.ray(ts[-1]).letters())):
            lam = jordan_batch(letters, W)
            for k in range(2, d):
                Lk = np.array([exterior_power(M, k) for M in letters])
                top = jordan_batch(Lk, W)[:, 0]
                worst = max(worst, float(np.abs(top - lam[:, :k].sum(1)).max()))
        return worst <= 1e-9, f"max residual {worst:.2e} over {len(idx)} rows and two labels"
    out.append(_check("exterior power identity", exterior))

    def inversion():
        miss = _inversion_pairs(c)
        return miss == 0, f"{miss} rows without an inverse partner"
    out.append(_check("inversion symmetry", inversion))

    def unique():
        n = len(set(c.fingerprints))
        return n == len(c), f"{len(c) - n} duplicate fingerprints, {c.stats.get('collisions', 0)} collisions"
    out.append(_check("distinct fingerprints", unique))

    def counting():
        Rs = np.linspace(0, c.r_star, 200)
        N = c.count(FUCHSIAN, Rs)
        direct = np.array([(c.lengths[FUCHSIAN] <= R).sum() for R in Rs])
        return bool(np.all(np.diff(N) >= 0) and np.array_equal(N, direct)), f"{len(c)} rows, R* = {c.r_star:.4f}"
    out.append(_check("monotone counting", counting))

    def factor_fixed():
        w1 = np.array([all(l < 4 for l in w) for w in c.words]) & (c.iota == 0)
        worst = max(float(np.abs(c.lengths[ray_label(t)][w1] - c.lengths[FUCHSIAN][w1]).max())
                    for t in ts)
        return worst <= 1e-8, f"max change on first-factor rows {worst:.2e}"
    out.append(_check("grafting fixes the first factor", factor_fixed))

    def curve_fixed():
        per = list(GENUS2_SPLITTING.peripheral)
        L0 = alpha(jordan_projection(evaluate(s.base, per)))
        worst = max(abs(alpha(jordan_projection(evaluate(s.ray(t).gens, per))) - L0) for t in ts)
        return worst <= 1e-8, f"max change of the grafting curve length {worst:.2e}"
    out.append(_check("grafting curve length fixed", curve_fixed))

    def frame():
        P = s.frame
        D = np.linalg.solve(P, evaluate(s.base, GENUS2_SPLITTING.peripheral)) @ P
        off = float(np.abs(D - np.diag(np.diag(D))).max())
        mods = np.abs(np.diag(D))
        g = make_grafted(s.base, s.direction, frame=P)
        a = g.alpha
        C = evaluate(s.base, GENUS2_SPLITTING.peripheral)
        comm = float(np.abs(a @ C - C @ a).max() / np.abs(C).max())
        ok = off <= 1e-8 * np.abs(D).max() and np.all(np.diff(mods) < 0) and comm <= 1e-8
        return ok, f"off-diagonal {off:.2e}, commutator {comm:.2e}"
    out.append(_check("adapted frame", frame))

    def heights():
        errs = [abs(cylinder_height(s.ray(t).datum.z) - t) for t in ts]
        z = np.zeros(d)
        z[0], z[1], z[2] = 1, -2, 1
        h3 = cylinder_height(z) if d == 3 else 1.5
        ok = max(errs) <= 1e-8 and abs(h3 - 1.5) <= 1e-12
        return ok, f"max |height(t z) - t| = {max(errs):.2e}"
    out.append(_check("cylinder heights along the ray", heights))

    def twist_graft():
        u = shear_direction(d)
        worst = 0.0
        for sv in (0.1, 0.5, 1.0):
            g = make_grafted(s.base, sv * u, frame=s.frame)
            tw = retwist(s.surface, sv)
            L = {"graft": g.letters(), "twist": np.array([irreducible_rep(d, M) for M in tw.letters()])}
            cc = c.with_labels(L)
            worst = max(worst, float(np.abs(cc.lengths["graft"] - cc.lengths["twist"]).max()))
        return worst <= 1e-6, f"max length difference {worst:.2e}"
    out.append(_check("twist-graft consistency", twist_graft))

    def intersection_trivia():
        lab = ray_label(ts[-1])
        i0 = intersection_I(c, lab, lab)
        j0 = normalized_J(c, FUCHSIAN, lab)
        scaled = type(c)(c.words, c.l_hyp, {k: 2.5 * v for k, v in c.lengths.items()}, c.iota,
                         c.fingerprints, 2.5 * c.r_star, {k: 2.5 * c.radius(k) for k in c.labels},
                         c.config_hash, c.d, c.stats, 2.5 * c.r_sub, c.forms)
        j1 = normalized_J(scaled, FUCHSIAN, lab)
        return abs(i0 - 1) <= 1e-15 and abs(j0 - j1) <= 1e-12, f"I(rho, rho) = {i0!r}, |dJ| = {abs(j0 - j1):.1e}"
    out.append(_check("intersection normalization", intersection_trivia))

    def entropy_range():
        ds = {k: entropy_estimate(c, k).delta for k in c.labels}
        lo, hi = min(ds.values()), max(ds.values())
        return lo >= 0.1 and hi <= 1.1, f"entropy fits in [{lo:.3f}, {hi:.3f}]"
    out.append(_check("entropy range", entropy_range))

    def entropy_order():
        ds = {t: entropy_estimate(c, ray_label(t)) for t in ts}
        worst = 0.0
        for t1 in ts:
            for t2 in ts:
                if t2 > t1 >= 2:
                    worst = max(worst, ds[t2].delta - ds[t1].delta)
        floor = -math.inf
        g1, g2 = factor_spectra(s, max(f.window[1] for f in ds.values()))
        for t in ts:
            m = max(entropy_estimate(g1, window=ds[t].window).delta,
                    entropy_estimate(g2, window=ds[t].window).delta)
            floor = max(floor, m - 0.1 - ds[t].delta)
        return worst <= 0.05 and floor <= 0, f"largest rise {worst:.3f}, largest shortfall {floor:.3f}"
    out.append(_check("entropy ordering along the ray", entropy_order))

    def mass_identity():
        worst = 0.0
        for t in ts:
            lab = ray_label(t)
            ls = c.lengths[lab]
            sel = (ls <= c.radius(lab)) & (ls > 0)
            h = cylinder_height(s.ray(t).datum.z)
            rhs = float(np.mean(c.iota[sel] * h / ls[sel]))
            worst = max(worst, abs(h * boundary_mass(c, lab) - rhs))
        return worst <= 1e-12, f"max deviation {worst:.1e}"
    out.append(_check("flat-mass proxy identity", mass_identity))

    def relator():
        L = s.surface.letters()
        rel = [0, 2, 1, 3, 4, 6, 5, 7]
        worst = 0.0
        for w in c.words:
            if len(w) > 6:
                continue
            M = np.eye(2)
            for l in w:
                M = M @ L[l]
            R = M.copy()
            for l in rel:
                R = R @ L[l]
            worst = max(worst, abs(abs(np.trace(R)) - abs(np.trace(M))))
        return worst <= 1e-6, f"max trace change {worst:.1e}"
    out.append(_check("relator respected", relator))

    def canonical():
        bad = 0
        for w in c.words[:2000]:
            cw = canonicalize_conjugacy(w)
            rot = w[1:] + w[:1]
            if canonicalize_conjugacy(cw) != cw or canonicalize_conjugacy(rot) != cw:
                bad += 1
        return bad == 0, f"{bad} failures over {min(2000, len(c))} rows"
    out.append(_check("canonical form idempotent", canonical))
    return c, out
