"""Closed-form, quadrature and Monte Carlo machinery for chaos moments.

The N-point moment of imaginary chaos against a covariance C is governed
by the interaction energy

    E(C; x; y) = - sum_{j<k} C(x_j, x_k) - sum_{j<k} C(y_j, y_k)
                 + sum_{j,k} C(x_j, y_k),

through E[prod mu(x_j) prod conj(mu(y_k))] = exp(beta^2 E).  The circle
total mass admits the log-gamma closed forms of the moment formula
Gamma(1 - p gamma^2/2) / Gamma(1 - gamma^2/2)^p, which the Monte Carlo
estimators are checked against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, special
from scipy.interpolate import CubicSpline

from .chaos import TestFunction
from .errors import PoleError, SingularEvaluationError
from .fields import CovarianceOracle, GridSpec, sample_circle_fields
from .rng import chain_stream, split_chain_sizes

__all__ = [
    "EnergyConfig",
    "MomentResult",
    "CircleSpec",
    "energy",
    "energy_brute",
    "fb_moment",
    "second_moment_quadrature",
    "moment_quadrature_bruteforce",
    "mu_sample_chain",
    "mc_moment",
    "mc_negative_moment",
    "batch_mean_error",
]

N_ERROR_BATCHES = 100  # batch-means std errors, robust to heavy tails


@dataclass(frozen=True)
class EnergyConfig:
    """Point configuration (x_1..x_N; y_1..y_M) for the interaction energy."""

    x_points: np.ndarray
    y_points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x_points", np.atleast_1d(np.asarray(self.x_points, dtype=float)))
        object.__setattr__(self, "y_points", np.atleast_1d(np.asarray(self.y_points, dtype=float)))
        if len(self.x_points) + len(self.y_points) < 2:
            raise ValueError("need at least two points in total")


@dataclass(frozen=True)
class MomentResult:
    value: complex
    std_error: float
    n_samples: int


@dataclass(frozen=True)
class CircleSpec:
    """Circle-field synthesis resolution for the Monte Carlo estimators."""

    n_modes: int
    grid_points: int

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        m = self.grid_points
        if m < 2 or (m & (m - 1)) != 0:
            raise ValueError("grid_points must be a power of two >= 2")

    @property
    def grid(self) -> GridSpec:
        return GridSpec(1, self.grid_points, 1.0)

    @property
    def variance(self) -> float:
        return float(np.sum(1.0 / np.arange(1, self.n_modes + 1)))


# ---------------------------------------------------------------------------
# interaction energy


def _pair_sum(oracle: CovarianceOracle, pts: np.ndarray) -> float:
    n = len(pts)
    if n < 2:
        return 0.0
    total = 0.0
    for j in range(n - 1):
        total += float(np.sum(oracle.eval(pts[j], pts[j + 1 :])))
    return total


def energy(oracle: CovarianceOracle, cfg: EnergyConfig) -> float:
    """Interaction energy of the configuration under the oracle."""
    if oracle.matrix is not None:
        raise ValueError("energy works with analytic oracles, not dense matrices")
    x, y = cfg.x_points, cfg.y_points
    cross = 0.0
    if len(x) and len(y):
        cross = float(np.sum(oracle.eval(x[:, None] if x.ndim == 1 else x[:, None, :], y[None])))
    return -_pair_sum(oracle, x) - _pair_sum(oracle, y) + cross


def energy_brute(oracle: CovarianceOracle, cfg: EnergyConfig) -> float:
    """Triple-loop twin of energy, kept independent for cross-checks."""
    x, y = cfg.x_points, cfg.y_points
    total = 0.0
    for j in range(len(x)):
        for k in range(j + 1, len(x)):
            total -= float(oracle.eval(x[j], x[k]))
    for j in range(len(y)):
        for k in range(j + 1, len(y)):
            total -= float(oracle.eval(y[j], y[k]))
    for j in range(len(x)):
        for k in range(len(y)):
            total += float(oracle.eval(x[j], y[k]))
    return total


# ---------------------------------------------------------------------------
# closed forms


def _near_nonpositive_integer(z: complex, tol: float = 1e-9) -> bool:
    zr = np.round(z.real)
    return zr <= 0.0 and abs(z.real - zr) < tol and abs(z.imag) < tol


def fb_moment(gamma_sq: complex, p: float) -> complex:
    """Moment formula Gamma(1 - p gamma^2/2) / Gamma(1 - gamma^2/2)^p.

    gamma_sq is the squared field coefficient; pass gamma_sq = -beta^2 to
    evaluate the analytic continuation at imaginary gamma = i beta.
    Arguments within 1e-9 of a gamma pole are rejected.
    """
    gamma_sq = complex(gamma_sq)
    num_arg = 1.0 - p * gamma_sq / 2.0
    den_arg = 1.0 - gamma_sq / 2.0
    if _near_nonpositive_integer(num_arg):
        raise PoleError(f"numerator gamma pole at argument {num_arg}")
    if _near_nonpositive_integer(den_arg):
        raise PoleError(f"denominator gamma pole at argument {den_arg}")
    out = np.exp(special.loggamma(num_arg) - p * special.loggamma(den_arg))
    return complex(out)


def circle_mass_moment_quad(beta: float, sign: str) -> float:
    """Direct 1-D quadrature of the circle total-mass second moments.

    sign "-": integral_0^1 (2 sin pi u)^{beta^2} du  (= E[mu(1)^2])
    sign "+": integral_0^1 (2 sin pi u)^{-beta^2} du (= E[|mu(1)|^2])
    """
    q = beta * beta if sign == "-" else -beta * beta
    val, _ = integrate.quad(
        lambda u: (2.0 * np.sin(np.pi * u)) ** q, 0.0, 1.0, points=[0.0, 1.0], limit=200
    )
    return float(val)


# ---------------------------------------------------------------------------
# second-moment quadrature


def second_moment_quadrature(beta: float, f, oracle: CovarianceOracle, sign: str) -> float:
    """Double integral of f(x) f(y) exp(sigma beta^2 C(x, y)).

    sign "+" gives E[mu(f) conj(mu(f))], sign "-" gives E[mu(f)^2].  On the
    exact circle kernel the double integral reduces by stationarity to a
    1-D adaptive quadrature against the periodic self-correlation of f
    (accurate through the integrable diagonal singularity); smooth
    stationary oracles go through their circulant grid row; dense
    matrices through a direct double sum.
    """
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    sigma = 1.0 if sign == "+" else -1.0
    d = oracle.dimension
    if beta * beta >= d:
        raise ValueError(f"beta^2 = {beta*beta:g} must be < d = {d} for an integrable singularity")

    if oracle.kind == "circle-exact":
        if np.isscalar(f) or isinstance(f, (int, float)):
            corr = None
            const = float(f)
        else:
            m = f.grid.points_per_axis
            fv = np.asarray(f.values, dtype=float)
            w = np.fft.ifft(np.abs(np.fft.fft(fv)) ** 2).real / m  # (f star f)(j/m)
            u_tab = np.arange(m + 1) / m
            corr = CubicSpline(u_tab, np.append(w, w[0]), bc_type="periodic")
            const = None

        def integrand(u):
            k = (2.0 * np.sin(np.pi * u)) ** (sigma * beta * beta)
            return k if const is not None else k * corr(u)

        val, _ = integrate.quad(integrand, 0.0, 1.0, points=[0.0, 1.0], limit=200)
        scale = const * const if const is not None else 1.0
        return float(scale * val)

    if oracle.matrix is not None:
        fv = np.asarray(f.values if isinstance(f, TestFunction) else f, dtype=float)
        h = 1.0 if oracle.coords is None else float(oracle.coords[1] - oracle.coords[0])
        G = np.exp(sigma * beta * beta * oracle.matrix)
        return float(h * h * fv @ G @ fv)

    # smooth stationary oracle on a grid: circulant contraction
    if isinstance(f, TestFunction):
        grid, fv = f.grid, np.asarray(f.values, dtype=float)
    else:
        raise ValueError("grid test function required for stationary-oracle quadrature")
    row = oracle.gram_row(grid)
    w = np.fft.ifft(np.abs(np.fft.fft(fv)) ** 2).real  # sum_i f_i f_{i+d}
    h = grid.spacing
    return float(h * h * np.sum(np.exp(sigma * beta * beta * row) * w))


def moment_quadrature_bruteforce(
    beta: float, a: int, b: int, oracle: CovarianceOracle, grid: GridSpec
) -> complex:
    """Brute-force grid quadrature of E[mu(1)^a conj(mu(1))^b], a + b <= 4.

    Contracts exp(beta^2 E) over all grid tuples using the oracle's gram
    matrix (log-cell corrected diagonal), for f identically one.
    """
    n = a + b
    if n < 1 or n > 4:
        raise ValueError("brute-force quadrature supports 1 <= a+b <= 4")
    C = oracle.gram_matrix(grid)
    h = grid.spacing
    b2 = beta * beta
    G = np.exp(b2 * C)  # cross factors
    B = np.exp(-b2 * C)  # like-sign factors
    if (a, b) in ((1, 0), (0, 1)):
        return complex(h * grid.points_per_axis)
    if (a, b) in ((2, 0), (0, 2)):
        return complex(h * h * B.sum())
    if (a, b) == (1, 1):
        return complex(h * h * G.sum())
    if (a, b) in ((2, 1), (1, 2)):
        # sum_{x1 x2 y} B_{x1x2} G_{x1y} G_{x2y}
        return complex(h**3 * np.einsum("xz,xy,zy->", B, G, G))
    if (a, b) == (3, 0) or (a, b) == (0, 3):
        return complex(h**3 * np.einsum("xy,yz,xz->", B, B, B))
    if (a, b) == (2, 2):
        total = 0.0
        for i in range(grid.points_per_axis):
            V = G * G[i]  # V[x2, y] = G[x1=i, y] G[x2, y]
            diag = np.einsum("xy,yz,xz->x", V, B, V)
            total += float(B[i] @ diag)
        return complex(h**4 * total)
    if (a, b) in ((3, 1), (1, 3)):
        # sum B_{x1x2} B_{x1x3} B_{x2x3} G_{x1y} G_{x2y} G_{x3y}
        total = 0.0
        for i in range(grid.points_per_axis):
            U = B[i][:, None] * G  # U[x2, y] = B_{x1x2} G_{x2y}
            inner = np.einsum("zy,zx,xy->y", U, B, U)
            total += float(G[i] @ inner)
        return complex(h**4 * total)
    if (a, b) in ((4, 0), (0, 4)):
        total = 0.0
        for i in range(grid.points_per_axis):
            w = B[i]
            total += float(np.einsum("z,x,v,zx,zv,xv->", w, w, w, B, B, B, optimize=True))
        return complex(h**4 * total)
    raise ValueError(f"unsupported moment pair {(a, b)}")


# ---------------------------------------------------------------------------
# Monte Carlo estimators


def mu_sample_chain(
    beta: float,
    f,
    spec: CircleSpec,
    count: int,
    master_seed: int,
    chain_index: int,
    batch_size: int = 1024,
) -> np.ndarray:
    """Complex samples of mu(f) for one reproducible chain.

    The chain stream is a pure function of (master_seed, chain_index), so
    estimates reduce identically however chains are scheduled.
    """
    rng = chain_stream(master_seed, chain_index)
    grid = spec.grid
    h = grid.spacing
    var = spec.variance
    fv = None if f is None else np.asarray(f.values, dtype=float)
    out = np.empty(count, dtype=complex)
    done = 0
    while done < count:
        c = min(batch_size, count - done)
        vals = sample_circle_fields(spec.n_modes, grid, c, rng)
        chaos = np.exp(1j * beta * vals + 0.5 * beta * beta * var)
        if fv is not None:
            chaos = chaos * fv[None, :]
        out[done : done + c] = chaos.sum(axis=1) * h
        done += c
    return out


def batch_mean_error(samples: np.ndarray, n_batches: int = N_ERROR_BATCHES) -> float:
    """Batch-means standard error of the mean (complex-aware)."""
    n = len(samples)
    nb = min(n_batches, n)
    usable = (n // nb) * nb
    means = samples[:usable].reshape(nb, -1).mean(axis=1)
    spread = np.var(means.real) + np.var(means.imag)
    return float(np.sqrt(spread / nb))


def _collect_chain_samples(beta, f, spec, n_samples, master_seed, chains) -> np.ndarray:
    parts = [
        mu_sample_chain(beta, f, spec, size, master_seed, idx)
        for idx, size in enumerate(split_chain_sizes(n_samples, chains))
        if size
    ]
    return np.concatenate(parts)


def mc_moment(
    beta: float,
    f,
    spec: CircleSpec,
    p: tuple[int, int],
    n_samples: int,
    master_seed: int,
    chains: int = 1,
) -> MomentResult:
    """Monte Carlo estimate of E[mu(f)^a conj(mu(f))^b] with batch-means error."""
    a, b = p
    if a < 0 or b < 0 or a + b > 6:
        raise ValueError("moment orders must be nonnegative with a + b <= 6")
    mu = _collect_chain_samples(beta, f, spec, n_samples, master_seed, chains)
    vals = mu**a * np.conj(mu) ** b
    return MomentResult(complex(vals.mean()), batch_mean_error(vals), n_samples)


def mc_negative_moment(
    beta: float,
    n_samples: int,
    master_seed: int,
    spec: CircleSpec,
    chains: int = 1,
) -> MomentResult:
    """Monte Carlo estimate of E[|mu(1)|^{-1}] for the circle total mass."""
    if not 0.0 < beta < 1.0:
        raise ValueError("negative-moment estimator runs on the circle, beta in (0, 1)")
    mu = _collect_chain_samples(beta, None, spec, n_samples, master_seed, chains)
    mags = np.abs(mu)
    if np.any(mags == 0.0):
        raise SingularEvaluationError("sampled chaos mass exactly zero")
    inv = 1.0 / mags
    return MomentResult(complex(inv.mean()), batch_mean_error(inv), n_samples)
