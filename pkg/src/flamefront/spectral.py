"""Cosine/sine-mode fields on the channel [0, pi] with Neumann walls.

A field is stored through its even (cosine) or odd (sine) periodic
extension to [-pi, pi].  Front profiles phi live in the cosine space;
their slopes u = phi_x live in the sine space and vanish at the walls.
All transforms are DCT-I / DST-I on the uniform grid x_i = i*pi/(M-1),
endpoints included.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.fft import dct, dst

from .errors import GridMismatchError

Parity = Literal["even", "odd"]


@dataclass(frozen=True)
class GridSpec:
    """Discretization of [0, pi].

    ``n_points`` defaults to ``2 * n_modes`` so that the product of two
    retained fields is represented without aliasing on the grid itself.
    """

    n_modes: int = 256
    n_points: int | None = None
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self):
        if self.n_modes < 2:
            raise ValueError("n_modes must be at least 2")
        if self.n_points is None:
            object.__setattr__(self, "n_points", 2 * self.n_modes)
        if self.n_points < 2 * self.n_modes:
            raise ValueError(
                f"n_points={self.n_points} < 2*n_modes={2 * self.n_modes}: transforms would alias")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ValueError("dealias_fraction must lie in (0, 1]")

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, np.pi, self.n_points)

    @property
    def dx(self) -> float:
        return np.pi / (self.n_points - 1)

    @property
    def cutoff(self) -> int:
        """Modes k >= cutoff are zeroed by dealiasing."""
        return int(np.floor(self.dealias_fraction * self.n_modes + 1e-12))

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(self.n_modes, dtype=float)


# ---------------------------------------------------------------------------
# raw array transforms (coefficient index k = 0 .. n_modes-1)
# ---------------------------------------------------------------------------

def cos_forward(values: np.ndarray, n_modes: int) -> np.ndarray:
    """Samples on the M-point grid -> cosine coefficients a_k, k < n_modes."""
    m = values.shape[-1]
    y = dct(values, type=1, axis=-1) / (m - 1)
    y[..., 0] *= 0.5
    y[..., -1] *= 0.5
    return y[..., :n_modes]


def cos_inverse(coeffs: np.ndarray, n_points: int) -> np.ndarray:
    """Cosine coefficients -> samples sum_k a_k cos(k x_i)."""
    c = np.zeros(coeffs.shape[:-1] + (n_points,))
    n = min(coeffs.shape[-1], n_points)
    c[..., :n] = coeffs[..., :n]
    c[..., 0] *= 2.0
    c[..., -1] *= 2.0
    return 0.5 * dct(c, type=1, axis=-1)


def sin_forward(values: np.ndarray, n_modes: int) -> np.ndarray:
    """Samples (zero at both walls) -> sine coefficients b_k; b_0 = 0."""
    m = values.shape[-1]
    y = dst(values[..., 1:-1], type=1, axis=-1) / (m - 1)
    out = np.zeros(values.shape[:-1] + (n_modes,))
    n = min(n_modes - 1, m - 2)
    out[..., 1:n + 1] = y[..., :n]
    return out


def sin_inverse(coeffs: np.ndarray, n_points: int) -> np.ndarray:
    """Sine coefficients (index k, b_0 ignored) -> samples sum_k b_k sin(k x_i)."""
    c = np.zeros(coeffs.shape[:-1] + (n_points - 2,))
    n = min(coeffs.shape[-1] - 1, n_points - 2)
    c[..., :n] = coeffs[..., 1:n + 1]
    out = np.zeros(coeffs.shape[:-1] + (n_points,))
    out[..., 1:-1] = 0.5 * dst(c, type=1, axis=-1)
    return out


def _forward(values, n_modes, parity):
    return cos_forward(values, n_modes) if parity == "even" else sin_forward(values, n_modes)


def _inverse(coeffs, n_points, parity):
    return cos_inverse(coeffs, n_points) if parity == "even" else sin_inverse(coeffs, n_points)


def grid_mean(values: np.ndarray) -> float:
    """Mean over [0, pi] of a sampled even-extendable function (trapezoid rule).

    For fields whose even extension is smooth this is spectrally accurate.
    """
    v = np.asarray(values, dtype=float)
    return float((v[1:-1].sum() + 0.5 * (v[0] + v[-1])) / (v.size - 1))


# ---------------------------------------------------------------------------
# SpectralField
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralField:
    """A real field on [0, pi] held as mode coefficients plus physical samples.

    ``parity="even"`` means sum a_k cos(kx); ``parity="odd"`` means
    sum b_k sin(kx) with coeffs[0] = 0.  Arrays are read-only.
    """

    grid: GridSpec
    coeffs: np.ndarray
    values: np.ndarray = field(repr=False)
    parity: Parity = "even"

    def __post_init__(self):
        if self.parity not in ("even", "odd"):
            raise ValueError(f"unknown parity {self.parity!r}")
        coeffs = np.array(self.coeffs, dtype=float)
        values = np.array(self.values, dtype=float)
        if coeffs.shape != (self.grid.n_modes,):
            raise GridMismatchError(f"expected {self.grid.n_modes} coefficients, got {coeffs.shape}")
        if values.shape != (self.grid.n_points,):
            raise GridMismatchError(f"expected {self.grid.n_points} samples, got {values.shape}")
        coeffs.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_coeffs(cls, grid: GridSpec, coeffs, parity: Parity = "even",
                    dealias: bool = False) -> "SpectralField":
        c = np.zeros(grid.n_modes)
        src = np.asarray(coeffs, dtype=float)
        c[:min(src.size, grid.n_modes)] = src[:grid.n_modes]
        if parity == "odd":
            c[0] = 0.0
        if dealias:
            c[grid.cutoff:] = 0.0
        return cls(grid, c, _inverse(c, grid.n_points, parity), parity)

    @classmethod
    def from_values(cls, grid: GridSpec, values, parity: Parity = "even",
                    dealias: bool = False) -> "SpectralField":
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.n_points,):
            raise GridMismatchError(f"expected {grid.n_points} samples, got {values.shape}")
        return cls.from_coeffs(grid, _forward(values, grid.n_modes, parity), parity, dealias)

    @classmethod
    def from_function(cls, grid: GridSpec, func, parity: Parity = "even",
                      dealias: bool = False) -> "SpectralField":
        return cls.from_values(grid, func(grid.x), parity, dealias)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def mean(self) -> float:
        """Spatial average over [0, pi]."""
        if self.parity == "even":
            return float(self.coeffs[0])
        return grid_mean(self.values)

    def __add__(self, other):
        _check_same(self, other)
        return SpectralField.from_coeffs(self.grid, self.coeffs + other.coeffs, self.parity)

    def __sub__(self, other):
        _check_same(self, other)
        return SpectralField.from_coeffs(self.grid, self.coeffs - other.coeffs, self.parity)

    def __mul__(self, scalar):
        return SpectralField.from_coeffs(self.grid, float(scalar) * self.coeffs, self.parity)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


def _check_same(a: SpectralField, b: SpectralField):
    if a.grid != b.grid:
        raise GridMismatchError("fields live on different grids")
    if a.parity != b.parity:
        raise ValueError("fields have different parity")


def transform(grid: GridSpec, data, direction: str = "to-spectral",
              parity: Parity = "even", dealias: bool = True) -> SpectralField:
    """Build a field from physical samples ("to-spectral") or coefficients ("to-physical")."""
    if direction == "to-spectral":
        return SpectralField.from_values(grid, data, parity, dealias)
    if direction == "to-physical":
        data = np.asarray(data, dtype=float)
        if data.shape != (grid.n_modes,):
            raise GridMismatchError(f"expected {grid.n_modes} coefficients, got {data.shape}")
        return SpectralField.from_coeffs(grid, data, parity, dealias)
    raise ValueError(f"direction must be 'to-spectral' or 'to-physical', not {direction!r}")


def derivative(f: SpectralField, order: int = 1) -> SpectralField:
    """Exact mode-wise derivative; odd orders swap cosine and sine spaces."""
    k = f.grid.wavenumbers
    if order == 1:
        if f.parity == "even":
            return SpectralField.from_coeffs(f.grid, -k * f.coeffs, "odd")
        return SpectralField.from_coeffs(f.grid, k * f.coeffs, "even")
    if order == 2:
        return SpectralField.from_coeffs(f.grid, -k * k * f.coeffs, f.parity)
    raise ValueError("order must be 1 or 2")


def dl_operator(f: SpectralField) -> SpectralField:
    """Multiplication of mode k by |k| (mode 0 annihilated)."""
    return SpectralField.from_coeffs(f.grid, f.grid.wavenumbers * f.coeffs, f.parity)


def remove_mean(f: SpectralField) -> SpectralField:
    if f.parity != "even":
        raise ValueError("remove_mean applies to cosine (even) fields")
    c = f.coeffs.copy()
    c[0] = 0.0
    return SpectralField.from_coeffs(f.grid, c, "even")


def antiderivative(f: SpectralField) -> np.ndarray:
    """Samples of F(x) = int_0^x f, with F(0) = 0.

    For cosine input the mean mode contributes the ramp a_0 * x; for sine
    input the primitive is again a cosine series.
    """
    k = f.grid.wavenumbers
    c = np.zeros_like(f.coeffs)
    if f.parity == "even":
        c[1:] = f.coeffs[1:] / k[1:]
        return f.coeffs[0] * f.grid.x + sin_inverse(c, f.grid.n_points)
    c[1:] = -f.coeffs[1:] / k[1:]
    c[0] = -c[1:].sum()
    return cos_inverse(c, f.grid.n_points)


def product(f: SpectralField, g: SpectralField, dealias: bool = True) -> SpectralField:
    """Pointwise product on the grid, truncated by the 2/3 rule."""
    if f.grid != g.grid:
        raise GridMismatchError("fields live on different grids")
    parity = "even" if f.parity == g.parity else "odd"
    return SpectralField.from_values(f.grid, f.values * g.values, parity, dealias)


def h1_norm(f: SpectralField) -> float:
    """(int_0^pi f^2 + f'^2 dx)^(1/2), evaluated by Parseval."""
    k = f.grid.wavenumbers
    a = f.coeffs
    total = 0.5 * np.pi * np.sum(a[1:] ** 2 * (1.0 + k[1:] ** 2))
    if f.parity == "even":
        total += np.pi * a[0] ** 2
    return float(np.sqrt(total))
