"""Quadrature helpers shared by the synthesis, moment and operator code.

Two recurring difficulties live here:

* u-integrals of layered (star-scale) covariances, done either with a
  fixed Gauss-Legendre rule vectorised over many radii (fast path for
  scans) or with adaptive quadrature (oracle path, 1e-8 tolerance);
* integrals against log- or power-singular kernels on uniform grids,
  where cells touching the diagonal are replaced by closed-form
  cell averages built from the primitives of log u and u^-q.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import integrate

from .seeds import SeedCovariance

__all__ = [
    "gauss_legendre",
    "layered_cov_fast",
    "layered_cov_quad",
    "tail_cov_fast",
    "tail_cov_rescaled",
    "log_line_average",
    "tri_cell_average_log",
    "tri_cell_average_pow",
]


@lru_cache(maxsize=32)
def gauss_legendre(n: int):
    """Cached Gauss-Legendre nodes and weights on [-1, 1]."""
    return np.polynomial.legendre.leggauss(n)


def _u_integral(r, u_max, weight_fn, seed: SeedCovariance, n_nodes: int):
    """integral_0^{umax(r)} k(e^u r) weight(u) du, vectorised over r.

    The integration range is truncated per radius at u = log(1/r) where
    the seed support ends, so the integrand is smooth on the whole range
    and a fixed rule converges spectrally.
    """
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r).astype(float)
    out = np.zeros_like(r)
    cut = np.where(r > 0.0, np.minimum(u_max, np.log(1.0 / np.maximum(r, 1e-300))), u_max)
    pos = cut > 0.0
    if np.any(pos):
        nodes, weights = gauss_legendre(n_nodes)
        half = 0.5 * cut[pos]
        u = half[:, None] * (nodes[None, :] + 1.0)  # (n_r, n_nodes)
        vals = seed.profile(np.exp(u) * r[pos, None]) * weight_fn(u)
        out[pos] = half * (vals @ weights)
    return out[0] if scalar else out


def layered_cov_fast(r, delta: float, alpha: float, seed: SeedCovariance, n_nodes: int = 128):
    """Covariance of the delta-truncated almost star-scale field at radius r.

    integral_0^{log(1/delta)} k(e^u r)(1 - e^{-alpha u}) du.  At r = 0 the
    closed form log(1/delta) - (1 - delta^alpha)/alpha is returned exactly.
    """
    u_max = np.log(1.0 / delta)
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    out = _u_integral(r_arr, u_max, lambda u: 1.0 - np.exp(-alpha * u), seed, n_nodes)
    at_zero = r_arr == 0.0
    if np.any(at_zero):
        out = np.where(at_zero, u_max - (1.0 - delta**alpha) / alpha, out)
    return float(out[0]) if np.ndim(r) == 0 else out


def layered_cov_quad(r: float, delta: float, alpha: float, seed: SeedCovariance) -> float:
    """Adaptive-quadrature twin of layered_cov_fast (absolute tol 1e-8)."""
    u_max = np.log(1.0 / delta)
    if r == 0.0:
        return float(u_max - (1.0 - delta**alpha) / alpha)
    cut = min(u_max, np.log(1.0 / r)) if r < 1.0 else 0.0
    if cut <= 0.0:
        return 0.0
    val, _ = integrate.quad(
        lambda u: float(seed.profile(np.exp(u) * r)) * (1.0 - np.exp(-alpha * u)),
        0.0,
        cut,
        epsabs=1e-10,
        limit=200,
    )
    return float(val)


def tail_cov_fast(r, delta: float, alpha: float, seed: SeedCovariance, n_nodes: int = 128):
    """Covariance of the tail field Y - Y_delta at radius r.

    integral_{log(1/delta)}^{inf} k(e^u r)(1 - e^{-alpha u}) du; identically
    zero for r >= delta because the seed support ends at e^u r = 1.
    """
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r_arr = np.atleast_1d(r).astype(float)
    if np.any(r_arr <= 0.0):
        raise ValueError("tail covariance requires r > 0 (infinite variance at r = 0)")
    u0 = np.log(1.0 / delta)
    out = np.zeros_like(r_arr)
    cut = np.log(1.0 / np.maximum(r_arr, 1e-300)) - u0
    pos = cut > 0.0
    if np.any(pos):
        nodes, weights = gauss_legendre(n_nodes)
        half = 0.5 * cut[pos]
        u = u0 + half[:, None] * (nodes[None, :] + 1.0)
        vals = seed.profile(np.exp(u) * r_arr[pos, None]) * (1.0 - np.exp(-alpha * u))
        out[pos] = half * (vals @ weights)
    return float(out[0]) if scalar else out


def tail_cov_rescaled(r, delta: float, alpha: float, seed: SeedCovariance, n_nodes: int = 128):
    """Covariance of x -> (Y - Y_delta)(delta x) at rescaled radius r.

    Equals integral_0^{log(1/r)} k(e^u r)(1 - delta^alpha e^{-alpha u}) du,
    zero for r >= 1.
    """
    if np.any(np.asarray(r) <= 0.0):
        raise ValueError("rescaled tail covariance requires r > 0")
    da = delta**alpha
    return _u_integral(r, np.inf, lambda u: 1.0 - da * np.exp(-alpha * u), seed, n_nodes)


def log_line_average(h: float) -> float:
    """Average of log(1/u) over one cell [0, h]: 1 - log h."""
    return 1.0 - np.log(h)


def _tri_weight_integral(primitive_1, primitive_2, c: float, h: float) -> float:
    """integral (h - |w - c|) f(w) dw over [max(c-h,0), c+h].

    primitive_1/primitive_2 are antiderivatives of f and of w f(w); both
    must vanish at 0 so the singular endpoint can be used directly.
    """
    lo = max(c - h, 0.0)

    def seg(a, b, slope, intercept):
        # integral (slope*w + intercept) f(w) over [a, b]
        if b <= a:
            return 0.0
        return slope * (primitive_2(b) - primitive_2(a)) + intercept * (
            primitive_1(b) - primitive_1(a)
        )

    # weight h - |w - c| = (h - c) + w on [lo, c], (h + c) - w on [c, c+h]
    return seg(lo, c, 1.0, h - c) + seg(c, c + h, -1.0, h + c)


def tri_cell_average_log(c: float, h: float) -> float:
    """Cell-pair average of log(1/w) for cells whose centres differ by c.

    (1/h^2) integral (h - |w - c|) log(1/w) dw, the exact value the
    midpoint rule should carry for the log factor on near-diagonal cells.
    """
    p1 = lambda w: w * np.log(w) - w if w > 0 else 0.0
    p2 = lambda w: 0.5 * w * w * np.log(w) - 0.25 * w * w if w > 0 else 0.0
    return -_tri_weight_integral(p1, p2, c, h) / (h * h)


def tri_cell_average_pow(c: float, h: float, q: float) -> float:
    """Cell-pair average of w^{-q} (0 <= q < 1) at centre offset c."""
    if not 0.0 <= q < 1.0:
        raise ValueError("power-cell average needs 0 <= q < 1")
    p1 = lambda w: w ** (1.0 - q) / (1.0 - q) if w > 0 else 0.0
    p2 = lambda w: w ** (2.0 - q) / (2.0 - q) if w > 0 else 0.0
    return _tri_weight_integral(p1, p2, c, h) / (h * h)
