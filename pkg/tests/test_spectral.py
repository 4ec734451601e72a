import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flamefront.errors import GridMismatchError
from flamefront.spectral import (
    GridSpec,
    SpectralField,
    antiderivative,
    cos_forward,
    cos_inverse,
    derivative,
    dl_operator,
    grid_mean,
    h1_norm,
    product,
    remove_mean,
    sin_forward,
    sin_inverse,
    transform,
)

GRID = GridSpec(64)
coeff_lists = st.lists(st.floats(-1, 1, allow_nan=False), min_size=1, max_size=20)


def test_grid_defaults():
    g = GridSpec(64)
    assert g.n_points == 128
    assert g.cutoff == 42
    assert g.x[0] == 0.0 and g.x[-1] == math.pi
    assert g.dx == pytest.approx(math.pi / 127)


@pytest.mark.parametrize("n_modes,n_points", [(64, 100), (1, None)])
def test_grid_rejects_bad_sizes(n_modes, n_points):
    with pytest.raises(ValueError):
        GridSpec(n_modes, n_points)


@pytest.mark.parametrize("k", [0, 1, 5, 41, 63])
def test_cosine_roundtrip_single_mode(k):
    x = GRID.x
    a = cos_forward(np.cos(k * x), GRID.n_modes)
    expected = np.zeros(GRID.n_modes)
    expected[k] = 1.0
    assert np.max(np.abs(a - expected)) < 1e-13
    assert np.max(np.abs(cos_inverse(a, GRID.n_points) - np.cos(k * x))) < 1e-13


@pytest.mark.parametrize("k", [1, 7, 63])
def test_sine_roundtrip_single_mode(k):
    x = GRID.x
    b = sin_forward(np.sin(k * x), GRID.n_modes)
    assert b[0] == 0.0
    assert abs(b[k] - 1.0) < 1e-13
    assert np.max(np.abs(sin_inverse(b, GRID.n_points) - np.sin(k * x))) < 1e-13


@pytest.mark.parametrize("k", [1, 2, 10, 20, 40])
def test_derivatives_of_sampled_cosines(k):
    # built from samples: roundoff grows like k^order
    f = SpectralField.from_function(GRID, lambda x: np.cos(k * x))
    x = GRID.x
    assert np.max(np.abs(derivative(f, 1).values + k * np.sin(k * x))) < 1e-12 * k
    assert np.max(np.abs(derivative(f, 2).values + k * k * np.cos(k * x))) < 1e-12 * k * k
    assert np.max(np.abs(dl_operator(f).values - k * np.cos(k * x))) < 1e-12 * k


def test_derivative_parity_swap():
    f = SpectralField.from_function(GRID, np.cos)
    assert derivative(f, 1).parity == "odd"
    assert derivative(derivative(f, 1), 1).parity == "even"
    assert derivative(f, 2).parity == "even"
    with pytest.raises(ValueError):
        derivative(f, 3)


def test_dealias_zeroes_upper_third():
    f = SpectralField.from_coeffs(GRID, np.ones(GRID.n_modes), dealias=True)
    assert np.all(f.coeffs[GRID.cutoff:] == 0)
    assert np.all(f.coeffs[:GRID.cutoff] == 1)


def test_fields_are_read_only():
    f = SpectralField.from_function(GRID, np.cos)
    with pytest.raises(ValueError):
        f.values[0] = 2.0


def test_grid_mismatch():
    f = SpectralField.from_function(GRID, np.cos)
    g = SpectralField.from_function(GridSpec(32), np.cos)
    with pytest.raises(GridMismatchError):
        f + g
    with pytest.raises(GridMismatchError):
        product(f, g)
    with pytest.raises(GridMismatchError):
        SpectralField.from_values(GRID, np.zeros(5))


def test_transform_directions():
    x = GRID.x
    f = transform(GRID, np.cos(3 * x), "to-spectral")
    assert abs(f.coeffs[3] - 1) < 1e-13
    h = transform(GRID, f.coeffs, "to-physical")
    assert np.allclose(h.values, np.cos(3 * x), atol=1e-13)
    with pytest.raises(ValueError):
        transform(GRID, f.coeffs, "sideways")


def test_mean_and_remove_mean():
    f = SpectralField.from_function(GRID, lambda x: 2.0 + np.cos(x))
    assert f.mean() == pytest.approx(2.0, abs=1e-14)
    assert remove_mean(f).mean() == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValueError):
        remove_mean(derivative(f, 1))


def test_grid_mean_matches_integral():
    # mean of cos^2 over [0, pi] is 1/2
    assert grid_mean(np.cos(GRID.x) ** 2) == pytest.approx(0.5, abs=1e-14)


def test_antiderivative_even_and_odd():
    x = GRID.x
    f = SpectralField.from_function(GRID, lambda x: 1.0 + np.cos(2 * x))
    assert np.allclose(antiderivative(f), x + np.sin(2 * x) / 2, atol=1e-13)
    u = SpectralField.from_function(GRID, lambda x: np.sin(3 * x), "odd")
    assert np.allclose(antiderivative(u), (1 - np.cos(3 * x)) / 3, atol=1e-13)


def test_product_parity():
    f = SpectralField.from_function(GRID, np.sin, "odd")
    g = SpectralField.from_function(GRID, np.cos)
    fg = product(f, g)
    assert fg.parity == "odd"
    assert abs(fg.coeffs[2] - 0.5) < 1e-13
    assert product(f, f).parity == "even"


def test_h1_norm_of_single_modes():
    # int cos^2 + k^2 sin^2 over [0, pi] = pi (1 + k^2) / 2
    f = SpectralField.from_function(GRID, lambda x: np.cos(4 * x))
    assert h1_norm(f) == pytest.approx(math.sqrt(math.pi * 17 / 2), rel=1e-13)
    c = SpectralField.from_coeffs(GRID, [3.0])
    assert h1_norm(c) == pytest.approx(3.0 * math.sqrt(math.pi), rel=1e-14)


@given(coeff_lists, coeff_lists, st.floats(-3, 3))
@settings(max_examples=50, deadline=None)
def test_linearity_of_derivative(a, b, s):
    f = SpectralField.from_coeffs(GRID, a)
    g = SpectralField.from_coeffs(GRID, b)
    lhs = derivative(f + s * g, 2).coeffs
    rhs = derivative(f, 2).coeffs + s * derivative(g, 2).coeffs
    assert np.allclose(lhs, rhs, atol=1e-10)


@given(coeff_lists)
@settings(max_examples=50, deadline=None)
def test_h1_norm_matches_quadrature(a):
    f = SpectralField.from_coeffs(GridSpec(32, 256), a)
    df = derivative(f, 1)
    quad = math.pi * grid_mean(f.values ** 2 + df.values ** 2)
    assert h1_norm(f) ** 2 == pytest.approx(quad, rel=1e-10, abs=1e-12)


@given(coeff_lists)
@settings(max_examples=50, deadline=None)
def test_values_coeffs_roundtrip(a):
    f = SpectralField.from_coeffs(GRID, a, "odd")
    g = SpectralField.from_values(GRID, f.values, "odd")
    assert np.allclose(f.coeffs, g.coeffs, atol=1e-13)
