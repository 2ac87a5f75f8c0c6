import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hitchin_forge.census import FUCHSIAN, Census
from hitchin_forge.errors import GridMismatch, InsufficientData
from hitchin_forge.thermo import (PathSample, boundary_mass, dI_path, entropy_derivative_residual,
                                  entropy_estimate, entropy_from_lengths, intersection_I,
                                  log_linear_slope, normalized_J, pressure_form, pressure_length,
                                  pressure_profile)


def exponential_lengths(delta, R):
    """Lengths with N(L) = floor(e^(delta L)) exactly."""
    n = int(math.exp(delta * R))
    return np.log(np.arange(1, n + 1)) / delta


@pytest.mark.parametrize("delta", [0.5, 1.0, 2.0])
def test_entropy_of_exponential_counts(delta):
    f = entropy_from_lengths(exponential_lengths(delta, 12 / delta), 12 / delta)
    assert abs(f.delta - delta) < 0.01 * delta
    assert f.window == (6 / delta, 12 / delta)


def test_entropy_needs_data():
    ls = exponential_lengths(1.0, 3.0)
    with pytest.raises(InsufficientData):
        entropy_from_lengths(ls, 3.0)
    with pytest.raises(InsufficientData):
        entropy_from_lengths(exponential_lengths(1.0, 10.0), 8.0, window=(4.0, 9.0))


def synthetic(scales, n_R=12.0):
    """Census whose label k has lengths scales[k] * base and radius scaled alike."""
    base = exponential_lengths(1.0, n_R)
    labels = {k: s * base for k, s in scales.items()}
    n = len(base)
    iota = np.where(np.arange(n) % 3 == 0, 2, 0)
    return Census([()] * n, base, labels, iota, [str(i) for i in range(n)], n_R,
                  {k: s * n_R for k, s in scales.items()}, forms={})


def test_intersection_of_scaled_label():
    c = synthetic({FUCHSIAN: 1.0, "x": 2.5})
    assert intersection_I(c, FUCHSIAN, FUCHSIAN) == 1.0
    assert abs(intersection_I(c, FUCHSIAN, "x") - 2.5) < 1e-12
    # J is invariant under rescaling lengths
    assert abs(normalized_J(c, FUCHSIAN, "x") - 1.0) < 0.02
    assert normalized_J(c, "x", "x") == 1.0


def test_boundary_mass_definition():
    c = synthetic({FUCHSIAN: 1.0})
    ls = c.lengths[FUCHSIAN]
    sel = (ls <= c.r_star) & (ls > 0)
    assert abs(boundary_mass(c, FUCHSIAN) - np.mean(c.iota[sel] / ls[sel])) < 1e-15


@given(st.floats(0.1, 3.0), st.floats(-2.0, 2.0))
def test_log_linear_slope(rate, offset):
    xs = np.array([0.0, 1.0, 2.0, 4.0, 6.0])
    assert abs(log_linear_slope(xs, np.exp(offset - rate * xs)) + rate) < 1e-9


def scaling_path(h=0.25, n=9):
    grid = tuple(round(k * h, 12) for k in range(-2, n))
    labels = tuple(f"s{t:g}" for t in grid)
    c = synthetic({lab: 1.0 + 0.3 * (t + 0.5) for lab, t in zip(labels, grid)}, 10.0)
    return c, PathSample(grid, labels, h)


def test_constant_path_has_zero_speed():
    grid = tuple(round(k * 0.5, 12) for k in range(-2, 7))
    labels = tuple(f"c{t:g}" for t in grid)
    c = synthetic({lab: 1.0 for lab in labels}, 10.0)
    path = PathSample(grid, labels, 0.5)
    for t in (0.0, 1.0, 2.0):
        assert abs(dI_path(c, path, t)) < 1e-15
        assert abs(pressure_form(c, path, t)) < 1e-12
        assert entropy_derivative_residual(c, path, t).residual < 1e-12
    length, ub = pressure_length(c, path, 0.0, 2.0)
    assert length == 0.0 and ub == 0.0


def test_scaling_path_is_pressure_degenerate():
    """Rescaling all lengths moves entropy and I but not J: zero pressure
    speed, and delta' = -delta dI/ds holds up to finite differences.

    Integer counts near the window start (about 50 rows) leave O(1/50)
    noise in the entropy fits, which the second difference amplifies."""
    c, path = scaling_path()
    for t in (0.0, 0.5, 1.0):
        assert abs(pressure_form(c, path, t)) < 0.05
        e = entropy_derivative_residual(c, path, t)
        assert e.residual <= 0.05 * abs(e.d_delta) + 2e-3
        s = 1.0 + 0.3 * (t + 0.5)
        assert abs(dI_path(c, path, t) - 0.3 / s) < 1e-9


def test_pressure_profile_shape():
    c, path = scaling_path()
    prof = pressure_profile(c, path, 0.0, 1.0)
    assert np.allclose(prof.t, [0.0, 0.25, 0.5, 0.75, 1.0])
    assert np.all(np.diff(prof.cumulative) >= 0)
    assert np.all(prof.upper_bound >= 0)
    assert prof.length == prof.cumulative[-1]


def test_path_sample_validation():
    with pytest.raises(GridMismatch):
        PathSample((0.0, 0.5, 1.5), ("a", "b", "c"), 0.5)
    with pytest.raises(GridMismatch):
        PathSample((0.0, 0.5), ("a",), 0.5)
    p = PathSample((0.0, 0.5, 1.0), ("a", "b", "c"), 0.5)
    assert p.label(0.5) == "b" and p.has(1.0) and not p.has(0.25)
    with pytest.raises(GridMismatch):
        p.label(0.25)
    c = synthetic({"a": 1.0, "b": 1.0, "c": 1.0}, 10.0)
    with pytest.raises(GridMismatch):
        dI_path(c, p, 0.0)


def test_entropy_on_real_census(small_census):
    f = entropy_estimate(small_census, FUCHSIAN)
    assert 0.5 < f.delta < 1.1 and f.stderr < 0.05
    assert f.window == (small_census.r_star / 2, small_census.r_star)
    # grafting lowers the entropy
    assert entropy_estimate(small_census, "ray:4").delta < f.delta
