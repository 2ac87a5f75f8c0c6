"""Census estimators: entropy, intersection forms I and J, finite-difference
derivatives along paths, pressure speeds and lengths, boundary mass.

Every limit R -> infinity is truncated at a completeness radius R* and
entropy is fitted on the window [R*/2, R*].
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import linregress

from .census import FUCHSIAN, Census
from .errors import GridMismatch, InsufficientData

MIN_ROWS = 50
FIT_POINTS = 20


@dataclass(frozen=True)
class EntropyFit:
    delta: float
    stderr: float
    window: tuple
    samples: int
    rows: int


def entropy_from_lengths(lengths, r_star, window=None, min_rows=MIN_ROWS, points=FIT_POINTS):
    """Slope of log N(R) on the window (default [r_star/2, r_star])."""
    ls = np.sort(np.asarray(lengths, dtype=float))
    r0, r1 = window if window is not None else (r_star / 2, r_star)
    if r1 > r_star + 1e-12:
        raise InsufficientData(f"window end {r1} exceeds completeness radius {r_star}")
    n = int(np.searchsorted(ls, r1, side="right"))
    if n < min_rows:
        raise InsufficientData(f"{n} rows with length <= {r1}, need {min_rows}")
    Rs = np.linspace(r0, r1, points)
    N = np.searchsorted(ls, Rs, side="right")
    if N[0] == 0:
        raise InsufficientData(f"no rows with length <= {r0}")
    fit = linregress(Rs, np.log(N))
    return EntropyFit(float(fit.slope), float(fit.stderr), (float(r0), float(r1)), points, n)


def entropy_estimate(c, label=FUCHSIAN, window=None, min_rows=MIN_ROWS):
    """Entropy fit for a census label or for a LengthSpectrum (label ignored)."""
    if isinstance(c, Census):
        return entropy_from_lengths(c.sorted_lengths(label), c.radius(label), window, min_rows)
    return entropy_from_lengths(c.lengths, c.r_star, window, min_rows)


def intersection_I(c, from_label, to_label, R=None):
    """Mean of l_to / l_from over classes with l_from <= R (default the
    completeness radius of from_label)."""
    R = c.radius(from_label) if R is None else R
    lf = c.lengths[from_label]
    sel = (lf <= R) & (lf > 0)
    if not sel.any():
        raise InsufficientData(f"no rows with {from_label} length <= {R}")
    ratios = c.lengths[to_label][sel] / lf[sel]
    return math.fsum(ratios.tolist()) / int(sel.sum())


def normalized_J(c, from_label, to_label, R=None, window=None):
    """(h(to) / h(from)) * I(from, to)."""
    if from_label == to_label:
        return 1.0
    R = c.radius(from_label) if R is None else R
    if window is None:
        r = min(c.radius(from_label), c.radius(to_label))
        window = (r / 2, r)
    d_from = entropy_estimate(c, from_label, window).delta
    d_to = entropy_estimate(c, to_label, window).delta
    return d_to / d_from * intersection_I(c, from_label, to_label, R)


@dataclass(frozen=True)
class PathSample:
    """Labelled nodes of a one-parameter path on a uniform grid of spacing h."""
    grid: tuple
    labels: tuple
    h: float

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if len(g) != len(self.labels):
            raise GridMismatch("grid and labels differ in length")
        if len(g) > 1:
            step = np.diff(g)
            if np.any(step <= 0):
                raise GridMismatch("grid must be strictly increasing")
            if np.abs(step - self.h).max() > 1e-9:
                raise GridMismatch(f"grid spacing does not match h = {self.h}")

    def label(self, t):
        g = np.asarray(self.grid)
        i = int(np.argmin(np.abs(g - t)))
        if abs(g[i] - t) > 1e-9:
            raise GridMismatch(f"no path node at t = {t}")
        return self.labels[i]

    def has(self, t):
        return bool(np.any(np.abs(np.asarray(self.grid) - t) <= 1e-9))


def path_radius(c, path):
    """Common completeness radius of all path nodes."""
    return min(c.radius(l) for l in path.labels)


def _local_radius(c, path, t, reach):
    """Smallest completeness radius over the nodes t + k h, |k| <= reach,
    present on the path."""
    h = path.h
    return min(c.radius(path.label(t + k * h)) for k in range(-reach, reach + 1)
               if path.has(t + k * h))


def _window(c, path, t, reach=1):
    r = _local_radius(c, path, t, reach)
    return (r / 2, r)


def _I_at(c, path, t, s, R):
    if s == 0:
        return 1.0
    return intersection_I(c, path.label(t), path.label(t + s), R)


def _second(f, path, t):
    """Central second difference of s -> f(s) at 0 with f(0) = 1; Richardson
    extrapolation when nodes at +-2h exist."""
    h = path.h
    d1 = (f(h) - 2.0 + f(-h)) / h ** 2
    if path.has(t + 2 * h) and path.has(t - 2 * h):
        d2 = (f(2 * h) - 2.0 + f(-2 * h)) / (2 * h) ** 2
        return (4 * d1 - d2) / 3
    return d1


def dI_path(c, path, t, order=1):
    """d/ds or d^2/ds^2 of I(rho_t, rho_{t+s}) at s = 0."""
    h = path.h
    for s in (-h, h):
        if not path.has(t + s):
            raise GridMismatch(f"path needs nodes at t +- h around {t}")
    R = c.radius(path.label(t))
    f = lambda s: _I_at(c, path, t, s, R)
    if order == 1:
        return (f(h) - f(-h)) / (2 * h)
    if order == 2:
        return _second(f, path, t)
    raise ValueError("order must be 1 or 2")


def path_entropy(c, path, t, window=None):
    return entropy_estimate(c, path.label(t), window or _window(c, path, t, 0))


@dataclass(frozen=True)
class EntropyDerivativeCheck:
    residual: float
    d_delta: float      # central difference of the entropy fits
    delta_dI: float     # delta(t) * dI/ds


def entropy_derivative_residual(c, path, t):
    h = path.h
    win = _window(c, path, t)
    dp = path_entropy(c, path, t + h, win).delta
    dm = path_entropy(c, path, t - h, win).delta
    d0 = path_entropy(c, path, t, win).delta
    dd = (dp - dm) / (2 * h)
    term = d0 * dI_path(c, path, t, 1)
    return EntropyDerivativeCheck(abs(dd + term), dd, term)


def pressure_form(c, path, t):
    """Second difference of s -> J(rho_t, rho_{t+s}) at s = 0 (may be
    slightly negative from noise)."""
    R = c.radius(path.label(t))
    win = _window(c, path, t, 2)
    d0 = entropy_estimate(c, path.label(t), win).delta

    def J(s):
        if s == 0:
            return 1.0
        ds = entropy_estimate(c, path.label(t + s), win).delta
        return ds / d0 * _I_at(c, path, t, s, R)

    for s in (-path.h, path.h):
        if not path.has(t + s):
            raise GridMismatch(f"path needs nodes at t +- h around {t}")
    return _second(J, path, t)


def pressure_speed(c, path, t):
    return math.sqrt(max(0.0, pressure_form(c, path, t)))


@dataclass(frozen=True)
class PressureProfile:
    t: np.ndarray
    speed: np.ndarray
    cumulative: np.ndarray
    upper_bound: np.ndarray   # the bound for the interval [t[0], t[i]]

    @property
    def length(self):
        return float(self.cumulative[-1])


def _trapezoid_cumulative(t, y):
    out = np.zeros(len(t))
    if len(t) > 1:
        out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


def pressure_profile(c, path, a, b):
    """Speeds, cumulative pressure length and the intersection-form upper
    bound along the nodes of [a, b]."""
    g = np.asarray(path.grid)
    ts = g[(g >= a - 1e-9) & (g <= b + 1e-9)]
    if len(ts) < 3:
        raise GridMismatch("pressure length needs at least three nodes")
    speed = np.array([pressure_speed(c, path, t) for t in ts])
    d1 = np.array([dI_path(c, path, t, 1) for t in ts])
    d2 = np.array([dI_path(c, path, t, 2) for t in ts])
    cum = _trapezoid_cumulative(ts, speed)
    int2 = _trapezoid_cumulative(ts, d2)
    inner = -d1 + d1[0] + int2
    ub = np.sqrt(ts - ts[0]) * np.sqrt(np.maximum(inner, 0.0))
    return PressureProfile(ts, speed, cum, ub)


def pressure_length(c, path, a=None, b=None):
    """(length, upper_bound) over [a, b] (default: all nodes with neighbours)."""
    g = np.asarray(path.grid)
    a = g[1] if a is None else a
    b = g[-2] if b is None else b
    prof = pressure_profile(c, path, a, b)
    return prof.length, float(prof.upper_bound[-1])


def boundary_mass(c, label, R=None):
    """Mean of iota / l over classes with label length at most R."""
    R = c.radius(label) if R is None else R
    ls = c.lengths[label]
    sel = (ls <= R) & (ls > 0)
    if not sel.any():
        raise InsufficientData(f"no rows with {label} length <= {R}")
    return math.fsum((c.iota[sel] / ls[sel]).tolist()) / int(sel.sum())


def log_linear_slope(xs, ys):
    return float(linregress(np.asarray(xs, float), np.log(np.asarray(ys, float))).slope)
