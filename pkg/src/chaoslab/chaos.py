"""Renormalized complex exponentials of Gaussian fields on grids.

The Wick exponential of a field realization gamma with truncation
variance V(x) is exp(i beta gamma(x) + (beta^2/2) V(x)); the variance
counter-term makes its expectation one at every scale, and its modulus
exp((beta^2/2) V(x)) is deterministic.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import GridMismatchError
from .fields import FieldSample, GridSpec

__all__ = [
    "ChaosParams",
    "TestFunction",
    "ChaosGrid",
    "renormalized_exponential",
    "chaos_integral",
    "sobolev_norm",
    "chaos_to_csv",
]


@dataclass(frozen=True)
class ChaosParams:
    beta: float
    dimension: int = 1

    def __post_init__(self):
        if not 0.0 < self.beta < np.sqrt(self.dimension):
            raise ValueError(
                f"beta must lie strictly in (0, sqrt(d)) = (0, {np.sqrt(self.dimension):g}); got {self.beta}"
            )


@dataclass
class TestFunction:
    """Grid-aligned samples of a bounded test function with a support mask."""

    grid: GridSpec
    values: np.ndarray
    support: np.ndarray = field(default=None)

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != self.grid.shape:
            raise GridMismatchError("test function values do not match the grid shape")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("test function must be bounded")
        if self.support is None:
            self.support = self.values != 0

    @classmethod
    def constant(cls, grid: GridSpec, value: float = 1.0) -> "TestFunction":
        return cls(grid, np.full(grid.shape, value))

    @classmethod
    def from_callable(cls, grid: GridSpec, fn: Callable) -> "TestFunction":
        coords = grid.coords()
        if grid.dimension == 1:
            vals = np.asarray(fn(coords[:, 0]))
        else:
            vals = np.asarray(fn(coords[..., 0], coords[..., 1]))
        return cls(grid, vals)

    @classmethod
    def bump(cls, grid: GridSpec, center: float, radius: float) -> "TestFunction":
        """Smooth bump supported in B(center, radius), 1-D grids."""
        from .seeds import bump as _bump

        if grid.dimension != 1:
            raise ValueError("bump test functions are provided for 1-D grids")
        x = grid.axis()
        return cls(grid, _bump((x - center) / (2.0 * radius)) * np.e)


@dataclass
class ChaosGrid:
    """Values of :e^{i beta Gamma}: on a grid, tied to the source sample."""

    grid: GridSpec
    values: np.ndarray
    beta: float
    variance: np.ndarray
    source: FieldSample = field(default=None, repr=False)


def renormalized_exponential(sample: FieldSample, params: ChaosParams) -> ChaosGrid:
    """exp(i beta gamma(x) + (beta^2/2) Var(x)) on the sample's grid."""
    beta = params.beta
    values = np.exp(1j * beta * sample.values + 0.5 * beta * beta * sample.variance)
    return ChaosGrid(sample.grid, values, beta, sample.variance, source=sample)


def chaos_integral(chaos: ChaosGrid, f: TestFunction) -> complex:
    """Periodic trapezoid quadrature of f times the chaos over the grid."""
    if f.grid != chaos.grid:
        raise GridMismatchError("test function and chaos live on different grids")
    h = chaos.grid.spacing
    return complex(np.sum(f.values * chaos.values) * h**chaos.grid.dimension)


def sobolev_norm(chaos: ChaosGrid, f: TestFunction, s: float) -> float:
    """Negative-index Sobolev norm of f * chaos on the periodic grid.

    With Fourier coefficients c_k of the product (orthonormal circle
    convention) the norm is (sum_k (1 + |2 pi k / extent|^2)^s |c_k|^2)^{1/2};
    at s = 0 this is the grid L^2 norm (Plancherel).
    """
    if s > 0:
        raise ValueError("sobolev_norm is defined for regularity index s <= 0")
    if f.grid != chaos.grid:
        raise GridMismatchError("test function and chaos live on different grids")
    g = chaos.grid
    prod = f.values * chaos.values
    coeff = np.fft.fftn(prod) * (np.sqrt(g.extent**g.dimension) / g.n_points)
    k = np.fft.fftfreq(g.points_per_axis, d=1.0 / g.points_per_axis)
    xi = 2.0 * np.pi * k / g.extent
    if g.dimension == 1:
        w = (1.0 + xi**2) ** s
    else:
        w = (1.0 + xi[:, None] ** 2 + xi[None, :] ** 2) ** s
    return float(np.sqrt(np.sum(w * np.abs(coeff) ** 2)))


def chaos_to_csv(chaos: ChaosGrid, path) -> None:
    """CSV export: (grid index, Re, Im) per point."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        flat = chaos.values.reshape(-1)
        writer.writerow(["index", "re", "im"])
        for i, v in enumerate(flat):
            writer.writerow([i, repr(float(v.real)), repr(float(v.imag))])
