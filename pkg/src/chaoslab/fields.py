"""Synthesis of log-correlated Gaussian fields with exact covariance oracles.

Three synthesis paths, each carrying the covariance of what was actually
synthesised (not of the idealised limit object):

* the standard circle field, by a truncated random Fourier series whose
  coefficient 1/sqrt(k) per mode pair reproduces the covariance
  log 1/(2 |sin pi (t-s)|) in the infinite-mode limit;
* almost star-scale invariant fields, by layered spectral synthesis on a
  padded periodic grid (the independent layers collapse into a single
  circulant spectrum, which is what gets sampled);
* arbitrary dense covariance matrices, by symmetric eigenfactorisation.

All samplers are pure given an explicit numpy Generator.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import SingularEvaluationError
from .quadrature import (
    gauss_legendre,
    layered_cov_fast,
    layered_cov_quad,
    log_line_average,
    tail_cov_fast,
)
from .seeds import SeedCovariance, seed_covariance_default

__all__ = [
    "GridSpec",
    "FieldSample",
    "CircleModeSet",
    "LayeredNoiseParams",
    "CovarianceOracle",
    "circle_cov",
    "circle_truncated_cov",
    "circle_truncated_variance",
    "circle_oracle",
    "circle_truncated_oracle",
    "star_oracle",
    "stationary_oracle",
    "dense_oracle",
    "sample_circle_field",
    "sample_circle_fields",
    "synthesize_circle",
    "StarSynthesis",
    "sample_star_field",
    "cov_Y_delta",
    "cov_tail_bounds_check",
    "DenseFactor",
    "sample_dense",
    "mollify",
    "save_field",
    "load_field",
    "field_to_csv",
    "seed_covariance_default",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid: d axes of points_per_axis points over [0, extent)."""

    dimension: int
    points_per_axis: int
    extent: float

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        m = self.points_per_axis
        if m < 2 or (m & (m - 1)) != 0:
            raise ValueError("points_per_axis must be a power of two >= 2")
        if not self.extent > 0.0:
            raise ValueError("extent must be positive")

    @property
    def spacing(self) -> float:
        return self.extent / self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dimension

    @property
    def n_points(self) -> int:
        return self.points_per_axis**self.dimension

    def axis(self) -> np.ndarray:
        return np.arange(self.points_per_axis) * self.spacing

    def coords(self) -> np.ndarray:
        """Grid coordinates, shape (m, 1) for d=1 and (m, m, 2) for d=2."""
        ax = self.axis()
        if self.dimension == 1:
            return ax[:, None]
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        return np.stack([X, Y], axis=-1)

    def wrapped_distance_grid(self) -> np.ndarray:
        """Periodic distance from the origin to every grid point."""
        ax = self.axis()
        w = np.minimum(ax, self.extent - ax)
        if self.dimension == 1:
            return w
        return np.hypot(w[:, None], w[None, :])


@dataclass
class FieldSample:
    """One real field realization plus the exact covariance of its synthesis.

    variance holds the truncation variance at every grid point (constant
    for the stationary methods).  cov_row is the periodic covariance row
    of the synthesis on its grid (stationary methods); cov_matrix the
    dense covariance (dense-factor method).  These back the variance
    updates under mollification and the chaos normalisation downstream.
    """

    grid: GridSpec | None
    values: np.ndarray
    method: str
    variance: np.ndarray
    cov_row: np.ndarray | None = None
    cov_matrix: np.ndarray | None = None

    STATIONARY_METHODS = ("circle-series", "layered-star")

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    @property
    def constant_variance(self) -> float | None:
        if self.method in self.STATIONARY_METHODS:
            return float(self.variance.flat[0])
        return None

    def truncation_variance(self, x=None):
        """Variance function; constant in x for stationary methods."""
        c = self.constant_variance
        if c is not None:
            return c
        if x is None:
            return self.variance
        raise ValueError("pointwise variance lookup only for stationary methods")


@dataclass(frozen=True)
class CircleModeSet:
    """i.i.d. standard normal cosine/sine coefficients for n_modes harmonics."""

    n_modes: int
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        if len(self.a) != self.n_modes or len(self.b) != self.n_modes:
            raise ValueError("coefficient arrays must have length n_modes")

    @classmethod
    def draw(cls, n_modes: int, rng: np.random.Generator) -> "CircleModeSet":
        if n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        return cls(n_modes, rng.standard_normal(n_modes), rng.standard_normal(n_modes))


@dataclass(frozen=True)
class LayeredNoiseParams:
    """Scale parameter, cutoff and u-resolution for layered star synthesis."""

    alpha: float
    delta: float
    layers_per_unit_u: int = 16

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise ValueError("alpha must be positive")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError("delta must lie in (0, 1]")
        if self.layers_per_unit_u < 8:
            raise ValueError("layers_per_unit_u must be >= 8")

    @property
    def u_max(self) -> float:
        return float(np.log(1.0 / self.delta))

    def layer_grid(self) -> tuple[np.ndarray, np.ndarray]:
        """Midpoint u-values and weights (1 - e^{-alpha u}) du per layer."""
        if self.u_max == 0.0:
            return np.zeros(0), np.zeros(0)
        n = max(1, int(np.ceil(self.u_max * self.layers_per_unit_u)))
        du = self.u_max / n
        u = (np.arange(n) + 0.5) * du
        return u, (1.0 - np.exp(-self.alpha * u)) * du


# ---------------------------------------------------------------------------
# circle covariances


def circle_cov(t, s=0.0):
    """log 1/(2 |sin(pi (t-s))|), the standard circle field covariance."""
    u = np.asarray(t, dtype=float) - np.asarray(s, dtype=float)
    sins = 2.0 * np.abs(np.sin(np.pi * u))
    if np.any(sins == 0.0):
        raise SingularEvaluationError("circle covariance is singular at coincident points")
    out = -np.log(sins)
    return float(out) if out.ndim == 0 else out


def circle_truncated_variance(n: int) -> float:
    """Variance of the n-mode circle series: the harmonic sum H_n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(np.sum(1.0 / np.arange(1, n + 1)))


def circle_truncated_cov(n: int, t, s=0.0):
    """Covariance of the n-mode circle series: sum_{k<=n} cos(2 pi k (t-s))/k."""
    if n < 1:
        raise ValueError("n must be >= 1")
    u = np.asarray(t, dtype=float) - np.asarray(s, dtype=float)
    k = np.arange(1, n + 1)
    out = np.cos(2.0 * np.pi * np.multiply.outer(u, k)) @ (1.0 / k)
    return float(out) if out.ndim == 0 else out


def _circle_row(n_modes: int, m: int) -> np.ndarray:
    """Truncated covariance at all grid separations j/m, via mode folding."""
    k = np.arange(1, n_modes + 1)
    c_freq = np.bincount(k % m, weights=1.0 / k, minlength=m)
    return np.fft.ifft(c_freq).real * m


# ---------------------------------------------------------------------------
# covariance oracles


@dataclass
class CovarianceOracle:
    """Analytic covariance evaluator with grid-discretisation helpers.

    kind is one of circle-exact, circle-truncated(n), star-Ydelta,
    star-tail, stationary, dense-matrix.  For stationary kinds eval_radial
    maps separation to covariance; eval(x, y) handles points.  domain
    describes where random scan configurations live ("circle" or a box
    (lo, hi) per axis); distance() is the metric the nearest-neighbour
    bounds use (chordal on the circle, Euclidean otherwise).
    """

    kind: str
    dimension: int
    domain: object
    eval_radial: Callable | None = None
    log_coeff: float = 0.0  # coefficient of log(1/r) at the diagonal
    matrix: np.ndarray | None = field(default=None, repr=False)
    coords: np.ndarray | None = field(default=None, repr=False)
    row_fn: Callable | None = field(default=None, repr=False)  # fast grid-row override

    def distance(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.domain == "circle":
            return 2.0 * np.abs(np.sin(np.pi * (x - y)))
        if x.ndim > y.ndim:
            y = np.broadcast_to(y, x.shape)
        d = x - y
        return np.abs(d) if d.ndim <= 1 or d.shape[-1] != self.dimension else np.linalg.norm(d, axis=-1)

    def eval(self, x, y):
        if self.matrix is not None:
            raise ValueError("dense-matrix oracle evaluates by index, use .matrix")
        r = self.distance(x, y)
        if self.log_coeff != 0.0 and np.any(r == 0.0):
            raise SingularEvaluationError(f"{self.kind} oracle is singular at coincident points")
        return self.eval_radial(r)

    def sample_points(self, count: int, rng: np.random.Generator) -> np.ndarray:
        if self.domain == "circle":
            return rng.random(count)
        lo, hi = self.domain
        if self.dimension == 1:
            return lo + (hi - lo) * rng.random(count)
        return lo + (hi - lo) * rng.random((count, self.dimension))

    def gram_matrix(self, grid: GridSpec) -> np.ndarray:
        """Dense covariance matrix on a grid, diagonal by log-cell average.

        For log-singular kinds the diagonal entry carries the closed-form
        cell average of the log factor, (integral_0^h log u du)/h, plus
        the smooth remainder at half a cell.
        """
        if self.matrix is not None:
            return self.matrix
        if grid.dimension != 1:
            raise ValueError("dense gram matrices are built for 1-D grids")
        row = self.gram_row(grid)
        idx = np.abs(np.subtract.outer(np.arange(grid.points_per_axis), np.arange(grid.points_per_axis)))
        return row[np.minimum(idx, grid.points_per_axis - idx)]

    def gram_row(self, grid: GridSpec) -> np.ndarray:
        if self.matrix is not None:
            raise ValueError("dense-matrix oracle has no stationary row")
        if self.row_fn is not None:
            return self.row_fn(grid)
        m = grid.points_per_axis
        h = grid.spacing
        if self.domain == "circle" and grid.extent != 1.0:
            raise ValueError("circle oracles require extent 1.0")
        t = grid.axis()
        row = np.empty(m)
        row[1:] = self.eval(t[1:], 0.0)
        if self.log_coeff != 0.0:
            # smooth remainder C(r) - log_coeff*log(1/r) frozen at half a cell
            smooth_mid = self.eval(0.5 * h, 0.0) - self.log_coeff * np.log(1.0 / (0.5 * h))
            row[0] = self.log_coeff * log_line_average(h) + smooth_mid
        else:
            row[0] = self.eval_radial(0.0)
        return row


def circle_oracle() -> CovarianceOracle:
    def radial(r):
        return -np.log(np.asarray(r, dtype=float))

    return CovarianceOracle("circle-exact", 1, "circle", radial, log_coeff=1.0)


def circle_truncated_oracle(n: int) -> CovarianceOracle:
    def radial(r):
        # chordal distance back to parameter separation
        u = np.arcsin(np.minimum(np.asarray(r, dtype=float) / 2.0, 1.0)) / np.pi
        return circle_truncated_cov(n, u)

    def row(grid: GridSpec):
        if grid.dimension != 1 or grid.extent != 1.0:
            raise ValueError("circle oracles require a 1-D grid with extent 1.0")
        return _circle_row(n, grid.points_per_axis)

    return CovarianceOracle(f"circle-truncated({n})", 1, "circle", radial, row_fn=row)


def star_oracle(
    params: LayeredNoiseParams,
    seed: SeedCovariance,
    domain=(0.0, 2.0),
    tail: bool = False,
) -> CovarianceOracle:
    """Continuum covariance of Y_delta (or of its tail field)."""
    if tail:
        radial = lambda r: tail_cov_fast(r, params.delta, params.alpha, seed)
        kind = "star-tail"
    else:
        radial = lambda r: layered_cov_fast(r, params.delta, params.alpha, seed)
        kind = "star-Ydelta"
    return CovarianceOracle(kind, seed.dimension, domain, radial)


def stationary_oracle(radial, dimension: int = 1, domain=(0.0, 1.0), kind: str = "stationary") -> CovarianceOracle:
    return CovarianceOracle(kind, dimension, domain, radial)


def dense_oracle(matrix: np.ndarray, coords: np.ndarray | None = None) -> CovarianceOracle:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("dense oracle needs a square matrix")
    if not np.allclose(matrix, matrix.T, atol=1e-12 * max(1.0, np.abs(matrix).max())):
        raise ValueError("dense oracle matrix must be symmetric")
    return CovarianceOracle("dense-matrix", 1, None, None, matrix=matrix, coords=coords)


# ---------------------------------------------------------------------------
# circle synthesis


def synthesize_circle(modes: CircleModeSet, grid: GridSpec) -> FieldSample:
    """Evaluate the truncated circle series on the grid by FFT summation."""
    if grid.dimension != 1 or grid.extent != 1.0:
        raise ValueError("circle synthesis needs a 1-D grid with extent 1.0")
    m = grid.points_per_axis
    n = modes.n_modes
    coef = np.arange(1, n + 1) ** -0.5
    z = (modes.a - 1j * modes.b) * coef
    values = _fold_modes(z[None, :], m)[0]
    var = circle_truncated_variance(n)
    return FieldSample(
        grid=grid,
        values=values,
        method="circle-series",
        variance=np.full(m, var),
        cov_row=_circle_row(n, m),
    )


def _fold_modes(z: np.ndarray, m: int) -> np.ndarray:
    """Re sum_k z_k e^{2 pi i k j/m} for a batch of mode vectors z."""
    count, n = z.shape
    spec = np.zeros((count, m), dtype=complex)
    if n < m:
        spec[:, 1 : n + 1] = z
    else:
        np.add.at(spec.T, np.arange(1, n + 1) % m, z.T)
    return np.fft.ifft(spec, axis=1).real * m


def sample_circle_field(n_modes: int, grid: GridSpec, rng: np.random.Generator) -> FieldSample:
    """Draw one realization of the n-mode circle field."""
    return synthesize_circle(CircleModeSet.draw(n_modes, rng), grid)


def sample_circle_fields(n_modes: int, grid: GridSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Batch of circle-field value arrays, shape (count, m).

    Same law as count independent sample_circle_field draws; used by the
    Monte Carlo estimators where per-sample FieldSample wrappers would
    dominate the cost.
    """
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    if grid.dimension != 1 or grid.extent != 1.0:
        raise ValueError("circle synthesis needs a 1-D grid with extent 1.0")
    coef = np.arange(1, n_modes + 1) ** -0.5
    a = rng.standard_normal((count, n_modes))
    b = rng.standard_normal((count, n_modes))
    return _fold_modes((a - 1j * b) * coef, grid.points_per_axis)


# ---------------------------------------------------------------------------
# layered star-scale synthesis


class StarSynthesis:
    """Layered spectral sampler for the delta-truncated almost star field.

    Each u-layer is a stationary field with covariance
    w_l k(e^{u_l} (x-y)); independent Gaussian layers add, so their
    circulant spectra are summed once and a single inverse FFT draws the
    whole field.  The grid must pad the region of interest by at least
    the seed support (1 length unit) so periodisation cannot fold
    covariance back into the interior.
    """

    def __init__(self, grid: GridSpec, params: LayeredNoiseParams, seed: SeedCovariance):
        if seed.dimension != grid.dimension:
            raise ValueError("seed and grid dimension differ")
        if grid.extent < 2.0:
            raise ValueError(
                "insufficient padding: extent must be >= 2 so the interior "
                "[1, extent-1] is padded by the unit seed support"
            )
        self.grid = grid
        self.params = params
        self.seed = seed
        u, w = params.layer_grid()
        self._u, self._w = u, w
        dist = grid.wrapped_distance_grid()
        row = np.zeros(grid.shape)
        for ul, wl in zip(u, w):
            row += wl * seed.profile(np.exp(ul) * dist)
        self.cov_row = row
        lam = np.fft.fftn(row).real
        lam_min = lam.min()
        if lam_min < -1e-8 * max(lam.max(), 1.0):
            raise ValueError("layered spectrum materially negative; grid too coarse")
        self._sqrt_lam = np.sqrt(np.clip(lam, 0.0, None))
        self.variance = float(np.sum(w))  # = row at 0 since profile(0) = 1

    def discrete_cov(self, r) -> np.ndarray:
        """Layer-discretised covariance at arbitrary separations."""
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for ul, wl in zip(self._u, self._w):
            out = out + wl * self.seed.profile(np.exp(ul) * r)
        return out

    def sample_batch(self, count: int, rng: np.random.Generator) -> np.ndarray:
        shape = (count,) + self.grid.shape
        zeta = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        axes = tuple(range(1, self.grid.dimension + 1))
        vals = np.fft.ifftn(self._sqrt_lam[None] * zeta, axes=axes).real
        return vals * np.sqrt(self.grid.n_points)

    def sample(self, rng: np.random.Generator) -> FieldSample:
        values = self.sample_batch(1, rng)[0]
        return FieldSample(
            grid=self.grid,
            values=values,
            method="layered-star",
            variance=np.full(self.grid.shape, self.variance),
            cov_row=self.cov_row,
        )


def sample_star_field(
    grid: GridSpec,
    params: LayeredNoiseParams,
    seed: SeedCovariance,
    rng: np.random.Generator,
) -> FieldSample:
    """Draw one realization of the layered almost star-scale field."""
    return StarSynthesis(grid, params, seed).sample(rng)


def cov_Y_delta(x, y, params: LayeredNoiseParams, seed: SeedCovariance) -> float:
    """Continuum covariance of Y_delta at points x, y (adaptive, tol 1e-8)."""
    r = float(np.linalg.norm(np.atleast_1d(np.asarray(x, float) - np.asarray(y, float))))
    return layered_cov_quad(r, params.delta, params.alpha, seed)


def cov_tail_bounds_check(x, y, delta: float, alpha: float, seed: SeedCovariance) -> dict:
    """Tail covariance at one pair with its margin against the tail bounds.

    Returns the tail covariance T, the ratio bound delta/|x-y|, the upper
    margin delta/|x-y| - T (nonnegative for every pair), and whether the
    pair sits in the exact-zero regime |x-y| >= delta.
    """
    r = float(np.linalg.norm(np.atleast_1d(np.asarray(x, float) - np.asarray(y, float))))
    if r == 0.0:
        raise SingularEvaluationError("tail covariance diverges at coincident points")
    if r >= delta:
        tail = 0.0
    else:
        tail = float(tail_cov_fast(r, delta, alpha, seed))
    ratio = delta / r
    return {
        "tail_cov": tail,
        "ratio_bound": ratio,
        "upper_margin": ratio - tail,
        "zero_regime": r >= delta,
    }


# ---------------------------------------------------------------------------
# dense factor synthesis


class DenseFactor:
    """Symmetric square root of a covariance matrix via eigendecomposition.

    Eigenvalues in [-1e-8 ||M||, 0) are clipped to zero (discretised PSD
    kernels routinely produce them); a smallest eigenvalue below
    -1e-6 ||M|| rejects the matrix as materially non-PSD.
    """

    def __init__(self, matrix: np.ndarray, coords: np.ndarray | None = None, grid: GridSpec | None = None):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("covariance matrix must be square")
        if not np.allclose(matrix, matrix.T, atol=1e-12 * max(1.0, np.abs(matrix).max())):
            raise ValueError("covariance matrix must be symmetric")
        lam, vec = np.linalg.eigh(matrix)
        norm = max(np.abs(lam).max(), np.finfo(float).tiny)
        if lam.min() < -1e-6 * norm:
            raise ValueError(f"matrix materially non-PSD: min eigenvalue {lam.min():.3e} vs norm {norm:.3e}")
        lam = np.clip(lam, 0.0, None)
        self.factor = vec * np.sqrt(lam)
        self.matrix = matrix
        self.coords = coords
        self.grid = grid

    def sample_batch(self, count: int, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal((count, self.matrix.shape[0]))
        return z @ self.factor.T

    def sample(self, rng: np.random.Generator) -> FieldSample:
        values = self.sample_batch(1, rng)[0]
        return FieldSample(
            grid=self.grid,
            values=values,
            method="dense-factor",
            variance=np.diag(self.matrix).copy(),
            cov_matrix=self.matrix,
        )


def sample_dense(cov_matrix: np.ndarray, rng: np.random.Generator, grid: GridSpec | None = None) -> FieldSample:
    """Draw one realization with the given dense covariance matrix."""
    return DenseFactor(cov_matrix, grid=grid).sample(rng)


# ---------------------------------------------------------------------------
# mollification


def _mollifier_weights(grid: GridSpec, delta: float) -> np.ndarray:
    """Discrete unit-mass bump of support B(0, delta) on the periodic grid."""
    from .seeds import bump

    dist = grid.wrapped_distance_grid()
    w = bump(dist / (2.0 * delta))  # bump support B(0, 1/2) -> B(0, delta)
    total = w.sum()
    if total <= 0.0:
        raise ValueError("mollifier support resolves no grid point")
    return w / total


def mollify(sample: FieldSample, delta: float) -> FieldSample:
    """Periodic convolution with a smooth unit-mass bump supported in B(0, delta).

    The truncation variance is updated through the exact quadratic form of
    the synthesis covariance under the discrete kernel, so the mollified
    sample again carries exact metadata.
    """
    if sample.grid is None:
        raise ValueError("mollify requires a grid-backed sample")
    h = sample.grid.spacing
    if delta < h:
        raise ValueError(f"mollification scale {delta} below grid resolution {h}")
    w = _mollifier_weights(sample.grid, delta)
    axes = tuple(range(sample.grid.dimension))
    w_hat = np.fft.fftn(w, axes=axes)
    values = np.fft.ifftn(np.fft.fftn(sample.values, axes=axes) * w_hat, axes=axes).real

    if sample.cov_row is not None:
        lam = np.fft.fftn(sample.cov_row, axes=axes)
        row_new = np.fft.ifftn(lam * np.abs(w_hat) ** 2, axes=axes).real
        variance = np.full(sample.grid.shape, row_new.flat[0])
        return FieldSample(sample.grid, values, sample.method, variance, cov_row=row_new)
    if sample.cov_matrix is not None:
        Wm = _circulant_apply(w_hat, sample.cov_matrix, axes)
        M_new = _circulant_apply(w_hat, Wm.T, axes)
        M_new = 0.5 * (M_new + M_new.T)
        return FieldSample(
            sample.grid, values, sample.method, np.diag(M_new).copy(), cov_matrix=M_new
        )
    raise ValueError("sample carries no covariance metadata to update")


def _circulant_apply(w_hat: np.ndarray, matrix: np.ndarray, axes) -> np.ndarray:
    # apply the smoothing circulant along the first index of a 1-D-grid matrix
    return np.fft.ifft(np.fft.fft(matrix, axis=0) * w_hat[:, None], axis=0).real


# ---------------------------------------------------------------------------
# serialization

_HEADER = struct.Struct("<II d 16s")


def save_field(sample: FieldSample, path) -> None:
    """Binary layout: (dimension, points-per-axis, extent, method) header
    plus row-major little-endian float64 values."""
    if sample.grid is not None:
        dim, m, extent = sample.grid.dimension, sample.grid.points_per_axis, sample.grid.extent
    else:
        dim, m, extent = 1, len(sample.values), float(len(sample.values))
    header = _HEADER.pack(dim, m, extent, sample.method.encode("ascii")[:16].ljust(16, b"\0"))
    body = np.ascontiguousarray(sample.values, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(body)


def load_field(path) -> FieldSample:
    """Inverse of save_field.  Covariance metadata is not part of the
    exchange format; the loaded sample carries values and shape only
    (variance is filled with NaN to make accidental reuse loud)."""
    with open(path, "rb") as fh:
        dim, m, extent, method = _HEADER.unpack(fh.read(_HEADER.size))
        values = np.frombuffer(fh.read(), dtype="<f8").reshape((m,) * dim).copy()
    method = method.rstrip(b"\0").decode("ascii")
    try:
        grid = GridSpec(dim, m, extent)
    except ValueError:
        grid = None
    return FieldSample(grid, values, method, np.full(values.shape, np.nan))


def field_to_csv(sample: FieldSample, path) -> None:
    """CSV export: one row of index coordinates plus the value."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if sample.values.ndim == 1:
            writer.writerow(["i", "value"])
            for i, v in enumerate(sample.values):
                writer.writerow([i, repr(float(v))])
        else:
            writer.writerow(["i", "j", "value"])
            for i, rowv in enumerate(sample.values):
                for j, v in enumerate(rowv):
                    writer.writerow([i, j, repr(float(v))])
