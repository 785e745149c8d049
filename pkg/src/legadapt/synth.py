"""Synthetic ground truths, noise models, samplers, and oracle risk.

Truth models are specified in coefficient space: magnitudes telescope an
analytic residual function rho(N) (the tail energy beyond index N), so
integrated squared errors can be computed exactly via Parseval with no
truncation bias.  Two families are provided:

* polynomial-log decay: rho(N) = C (N+1)^(-2 beta) (log(N+2))^alpha,
  residual-halving ratio rho(2N)/rho(N) -> 2^(-2 beta);
* geometric decay: rho(N) = alpha * beta^N, ratio -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._backend import coeff_sums, eval_series, sq_sums
from .estimators import DensitySample, RegressionSample, design_grid
from .legendre import gauss_legendre_rule

__all__ = [
    "InvalidDensityError",
    "EnvelopeError",
    "SyntheticModel",
    "NoiseModel",
    "OracleRisk",
    "make_truth",
    "make_density_truth",
    "simulate_regression",
    "simulate_density",
    "oracle_risk",
    "quadrature_coeffs",
]

_DENSITY_GRID = 10_000
_DENSITY_FLOOR = 0.01
_ENVELOPE_SLACK = 1e-3
_MIN_ACCEPT_RATE = 0.01


class InvalidDensityError(ValueError):
    """The requested truth is not a valid density on [-1, 1]."""


class EnvelopeError(RuntimeError):
    """Rejection-sampling envelope accepts too rarely to be usable."""


@dataclass(frozen=True)
class SyntheticModel:
    """Coefficient-space ground truth with an analytic residual tail."""

    label: str
    coeffs: np.ndarray  # c_0 .. c_J
    residual_fn: Callable[[np.ndarray], np.ndarray]  # N -> tail energy
    decay_ratio: float  # limit of rho(2N)/rho(N)

    @property
    def j_max(self) -> int:
        return self.coeffs.shape[0] - 1

    def residual(self, n_trunc) -> float | np.ndarray:
        """Tail energy sum_{j > n_trunc} c_j^2, from the analytic form."""
        arr = np.asarray(n_trunc)
        out = np.asarray(self.residual_fn(arr), dtype=np.float64)
        return float(out) if arr.ndim == 0 else out

    def values(self, xs: np.ndarray) -> np.ndarray:
        """Evaluate the (truncated) truth at the given abscissas."""
        return eval_series(
            np.ascontiguousarray(self.coeffs),
            np.ascontiguousarray(xs, dtype=np.float64),
        )


def _coeffs_from_residual(rho, j_max: int, c0: float) -> np.ndarray:
    """Telescope magnitudes c_k^2 = rho(k-1) - rho(k) with deterministic
    endpoint-balancing signs.

    The residual fixes only magnitudes.  Signs are chosen greedily so the
    partial sums of c_k L_k at both endpoints stay near zero: any sign
    rule correlated with (-1)^k makes every term add coherently at an
    endpoint (L_k(+-1) = (+-1)^k sqrt(k+0.5)), producing a boundary spike
    whose design-grid alias swamps the tail-block statistics at moderate
    sample sizes.  Balancing keeps the non-constant part of f(+-1) at the
    scale of the last magnitude, and the choice is reproducible.
    """
    grid = np.arange(j_max + 1, dtype=np.float64)
    rho_vals = rho(grid)
    if np.any(np.diff(rho_vals) > 0):
        raise ValueError("residual function must be non-increasing")
    mags2 = rho_vals[:-1] - rho_vals[1:]
    mags = np.sqrt(mags2)
    norms = np.sqrt(np.arange(1, j_max + 1) + 0.5)
    coeffs = np.empty(j_max + 1)
    coeffs[0] = c0
    # Even k moves f(1)+f(-1), odd k moves f(1)-f(-1); balance each
    # parity class separately.
    even_sum = 0.0
    odd_sum = 0.0
    for k in range(1, j_max + 1):
        a = mags[k - 1] * norms[k - 1]
        if k % 2 == 0:
            s = -1.0 if even_sum > 0 else 1.0
            even_sum += s * a
        else:
            s = -1.0 if odd_sum > 0 else 1.0
            odd_sum += s * a
        coeffs[k] = s * mags[k - 1]
    return coeffs


def make_truth(
    kind: str,
    j_max: int,
    *,
    scale: float = 1.0,
    alpha: float = 0.0,
    beta: float = 1.0,
    problem: str = "R",
) -> SyntheticModel:
    """Build a synthetic truth of the polynomial-log ("W") or geometric
    ("Z") residual family, truncated at index j_max.

    For the regression problem the polynomial family requires beta > 1/2;
    slower decay is rejected.  Regression truths are mean-zero (c_0 = 0):
    on the asymmetric design grid a constant offset aliases into every
    odd-index coefficient at relative scale k/n, which would contaminate
    the tail-block statistics for nothing (the constant plays no role in
    truncation selection).  Density truths get c_0 = 1/sqrt(2) via
    make_density_truth.
    """
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    if problem not in ("R", "D"):
        raise ValueError("problem must be 'R' or 'D'")
    if kind == "W":
        if scale <= 0 or beta <= 0:
            raise ValueError("polynomial family needs scale > 0 and beta > 0")
        if problem == "R" and beta <= 0.5:
            raise ValueError(
                "problem R requires residual decay beta > 1/2; "
                f"got beta = {beta}"
            )

        def rho(n):
            n = np.asarray(n, dtype=np.float64)
            return scale * (n + 1.0) ** (-2.0 * beta) * np.log(n + 2.0) ** alpha

        gamma = 2.0 ** (-2.0 * beta)
        label = f"W(scale={scale},alpha={alpha},beta={beta})"
    elif kind == "Z":
        if scale <= 0 or not 0.0 < beta < 1.0:
            raise ValueError("geometric family needs scale > 0 and 0 < beta < 1")

        def rho(n):
            n = np.asarray(n, dtype=np.float64)
            return scale * beta**n

        gamma = 0.0
        label = f"Z(scale={scale},beta={beta})"
    else:
        raise ValueError(f"unknown truth kind {kind!r}; expected 'W' or 'Z'")
    c0 = 0.0 if problem == "R" else math.sqrt(0.5)
    return SyntheticModel(
        label=label,
        coeffs=_coeffs_from_residual(rho, j_max, c0),
        residual_fn=rho,
        decay_ratio=gamma,
    )


def make_density_truth(kind: str, j_max: int, **kwargs) -> SyntheticModel:
    """Like make_truth, but shrunk into a valid density.

    The constant coefficient is pinned to 1/sqrt(2) (unit integral); the
    non-constant coefficients are scaled by the largest factor that keeps
    the grid minimum of the density at or above 0.01, and the residual is
    rescaled accordingly.
    """
    kwargs.setdefault("problem", "D")
    base = make_truth(kind, j_max, **kwargs)
    grid = np.linspace(-1.0, 1.0, _DENSITY_GRID)
    wiggle = base.values(grid) - 0.5  # non-constant part
    low = float(wiggle.min())
    shrink = 1.0 if 0.5 + low >= _DENSITY_FLOOR else (0.5 - _DENSITY_FLOOR) / (-low)
    coeffs = base.coeffs.copy()
    coeffs[1:] *= shrink
    base_rho = base.residual_fn
    s2 = shrink * shrink

    def rho(n):
        return s2 * np.asarray(base_rho(n), dtype=np.float64)

    return SyntheticModel(
        label=f"density[{base.label},shrink={shrink!r}]",
        coeffs=coeffs,
        residual_fn=rho,
        decay_ratio=base.decay_ratio,
    )


@dataclass(frozen=True)
class NoiseModel:
    """Centered i.i.d. measurement noise with a sub-Weibull tail bound.

    The declared (q, q_scale) satisfy P(|xi| > x) <= exp(-(x / q_scale)^q)
    for every x > 0:

    * gaussian: q = 2, q_scale = sigma * sqrt(2);
    * laplace:  q = 1, q_scale = sigma / sqrt(2) (equality);
    * bounded (uniform): q = 2, q_scale = sigma * sqrt(3) (the support edge).
    """

    kind: str
    sigma: float

    def __post_init__(self):
        if self.kind not in ("gaussian", "laplace", "bounded"):
            raise ValueError("kind must be gaussian, laplace or bounded")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")

    @property
    def q(self) -> float:
        return {"gaussian": 2.0, "laplace": 1.0, "bounded": 2.0}[self.kind]

    @property
    def q_scale(self) -> float:
        if self.kind == "gaussian":
            return self.sigma * math.sqrt(2.0)
        if self.kind == "laplace":
            return self.sigma / math.sqrt(2.0)
        return self.sigma * math.sqrt(3.0)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.sigma == 0.0:
            return np.zeros(n)
        if self.kind == "gaussian":
            return rng.normal(0.0, self.sigma, size=n)
        if self.kind == "laplace":
            return rng.laplace(0.0, self.sigma / math.sqrt(2.0), size=n)
        edge = self.sigma * math.sqrt(3.0)
        return rng.uniform(-edge, edge, size=n)


def _rng_from_seed(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, tuple):
        seed = list(seed)
    return np.random.default_rng(seed)


def simulate_regression(
    truth: SyntheticModel, noise: NoiseModel, n: int, seed
) -> RegressionSample:
    """y_i = f(x_i) + xi_i on the implicit design grid, deterministic per seed."""
    rng = _rng_from_seed(seed)
    fx = truth.values(design_grid(n))
    return RegressionSample(y=fx + noise.sample(rng, n))


def simulate_density(truth: SyntheticModel, n: int, seed) -> DensitySample:
    """n i.i.d. draws from the truth density by rejection sampling.

    The proposal is uniform on [-1, 1] with envelope max-grid-density
    times (1 + 1e-3).  Raises InvalidDensityError if the truth dips below
    zero on the check grid, EnvelopeError if acceptance falls under 1%.
    """
    grid = np.linspace(-1.0, 1.0, _DENSITY_GRID)
    f_grid = truth.values(grid)
    if float(f_grid.min()) < 0.0:
        raise InvalidDensityError(
            f"truth is negative on the check grid (min {f_grid.min()!r})"
        )
    c0 = float(truth.coeffs[0])
    if abs(c0 - math.sqrt(0.5)) > 1e-9:
        raise InvalidDensityError(
            f"constant coefficient {c0!r} does not normalize the density"
        )
    bound = float(f_grid.max()) * (1.0 + _ENVELOPE_SLACK)
    rng = _rng_from_seed(seed)
    out = np.empty(n)
    filled = 0
    drawn = 0
    coeffs = np.ascontiguousarray(truth.coeffs)
    while filled < n:
        batch = max(2 * (n - filled), 1024)
        xs = rng.uniform(-1.0, 1.0, size=batch)
        us = rng.uniform(0.0, 1.0, size=batch)
        keep = xs[us * bound <= eval_series(coeffs, xs)]
        take = min(keep.shape[0], n - filled)
        out[filled : filled + take] = keep[:take]
        filled += take
        drawn += batch
        if drawn >= 10 * _DENSITY_GRID and filled / drawn < _MIN_ACCEPT_RATE:
            raise EnvelopeError(
                f"acceptance rate {filled / drawn!r} below {_MIN_ACCEPT_RATE}"
            )
    return DensitySample(xi=out)


@dataclass(frozen=True)
class OracleRisk:
    """Truth-dependent risk curves over the scan range N = 1..floor(n/3).

    expected_energy[N-1] is the exact expectation of the tail-energy scan
    statistic at block size N; projection_risk[N-1] is the idealized risk
    (residual plus noise level times N/n) of the fixed-truncation fit.
    """

    n: int
    expected_energy: np.ndarray
    projection_risk: np.ndarray
    n_oracle: int
    min_expected_energy: float
    min_projection_risk: float
    noise_var: float


def _largest_argmin(values: np.ndarray) -> int:
    return int(np.flatnonzero(values == values.min())[-1]) + 1


def oracle_risk(
    truth: SyntheticModel, n: int, sigma2: float, problem: str = "R"
) -> OracleRisk:
    """Risk curves for a known truth at sample size n.

    Problem R uses design-averaged coefficients and the exact design
    noise variance (2/n)^2 sigma^2 sum_i L_k(x_i)^2 per coefficient, so
    expected_energy equals E of the scan statistic exactly.  Problem D
    uses the analytic residual blocks with the unit noise convention.
    """
    if n < 16:
        raise ValueError("need n >= 16")
    n_max = n // 3
    k_max = 2 * n_max
    n_grid = np.arange(1, n_max + 1)
    if problem == "R":
        xs = design_grid(n)
        fx = truth.values(xs)
        ckn = coeff_sums(xs, np.ascontiguousarray(fx * (2.0 / n)), k_max)
        var_k = (4.0 * sigma2 / (n * n)) * sq_sums(xs, k_max)
        second_moment = ckn**2 + var_k
        csum = np.concatenate(([0.0], np.cumsum(second_moment)))
        # csum[j] = sum_{k < j}; block N+1..2N matches the scan statistic
        expected = csum[2 * n_grid + 1] - csum[n_grid + 1]
        proj = truth.residual(n_grid) + 2.0 * sigma2 * n_grid / n
    elif problem == "D":
        rho_1 = truth.residual(n_grid)
        rho_2 = truth.residual(2 * n_grid)
        expected = (rho_1 - rho_2) + sigma2 * n_grid / n
        proj = rho_1 + sigma2 * n_grid / n
    else:
        raise ValueError("problem must be 'R' or 'D'")
    return OracleRisk(
        n=n,
        expected_energy=expected,
        projection_risk=proj,
        n_oracle=_largest_argmin(expected),
        min_expected_energy=float(expected.min()),
        min_projection_risk=float(proj.min()),
        noise_var=sigma2,
    )


def quadrature_coeffs(f, j_max: int, order: int | None = None) -> np.ndarray:
    """Coefficients c_j = integral of f * L_j by Gauss-Legendre quadrature.

    f must accept an ndarray of abscissas.  The default order j_max + 50
    is exact for polynomial f of degree up to 2*order - 1 - j_max.
    """
    if order is None:
        order = j_max + 50
    if order < j_max + 50:
        raise ValueError("quadrature order must be at least j_max + 50")
    rule = gauss_legendre_rule(order)
    w = rule.weights * np.asarray(f(rule.nodes), dtype=np.float64)
    return coeff_sums(rule.nodes, np.ascontiguousarray(w), j_max)
