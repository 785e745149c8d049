"""Empirical Fourier-Legendre coefficients, the tail-energy scan used to
pick the truncation level, and the projection / adaptive series fits.

Conventions:

* regression observations live on the implicit design grid
  x_i = -1 + 2i/n, i = 1..n;
* regression coefficients are scaled 2/n so that, noiselessly, they are
  Riemann approximations of c_j = integral of f * L_j over [-1, 1];
* the scan statistic at block size N sums the squared coefficients with
  indices N+1..2N, and the selected truncation is the largest N attaining
  the minimum over N = 1..floor(n/3).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._backend import coeff_sums, eval_series

__all__ = [
    "RegressionSample",
    "DensitySample",
    "CoeffTable",
    "TailScan",
    "AdaptiveFit",
    "design_grid",
    "regression_coeffs",
    "density_coeffs",
    "tail_energy_scan",
    "fit_projection",
    "fit_adaptive",
    "evaluate",
    "estimate_noise_variance",
    "ise_parseval",
]

MIN_SAMPLE = 16


def design_grid(n: int) -> np.ndarray:
    """The implicit regression design x_i = -1 + 2i/n, i = 1..n."""
    return np.arange(1, n + 1) * (2.0 / n) - 1.0


@dataclass(frozen=True)
class RegressionSample:
    """Observations y_i = f(x_i) + noise on the implicit design grid."""

    y: np.ndarray

    def __post_init__(self):
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        object.__setattr__(self, "y", y)
        if y.ndim != 1 or y.shape[0] < MIN_SAMPLE:
            raise ValueError(f"need a 1-d sample with n >= {MIN_SAMPLE}")
        if not np.all(np.isfinite(y)):
            raise ValueError("observations must be finite")

    @property
    def n(self) -> int:
        return self.y.shape[0]


@dataclass(frozen=True)
class DensitySample:
    """i.i.d. draws on [-1, 1] whose common density is to be estimated."""

    xi: np.ndarray

    def __post_init__(self):
        xi = np.ascontiguousarray(self.xi, dtype=np.float64)
        object.__setattr__(self, "xi", xi)
        if xi.ndim != 1 or xi.shape[0] < MIN_SAMPLE:
            raise ValueError(f"need a 1-d sample with n >= {MIN_SAMPLE}")
        if not np.all(np.isfinite(xi)):
            raise ValueError("draws must be finite")
        if np.any(xi < -1.0) or np.any(xi > 1.0):
            raise ValueError("draws must lie in [-1, 1]")

    @property
    def n(self) -> int:
        return self.xi.shape[0]


@dataclass(frozen=True)
class CoeffTable:
    """Empirical coefficients c_hat_0..c_hat_{j_max} with provenance."""

    problem: str  # "R" or "D"
    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.problem not in ("R", "D"):
            raise ValueError("problem must be 'R' or 'D'")
        c = np.ascontiguousarray(self.coeffs, dtype=np.float64)
        object.__setattr__(self, "coeffs", c)
        if c.ndim != 1 or c.shape[0] == 0:
            raise ValueError("coeffs must be a non-empty 1-d array")
        if self.j_max > 2 * (self.n // 3):
            raise ValueError("j_max must not exceed 2 * floor(n / 3)")

    @property
    def j_max(self) -> int:
        return self.coeffs.shape[0] - 1


@dataclass(frozen=True)
class TailScan:
    """Tail block energies t(N), N = 1..floor(n/3), and the selection."""

    n: int
    energies: np.ndarray  # energies[N - 1] = t(N)
    n_selected: int
    min_energy: float

    def energy_at(self, n_trunc: int) -> float:
        """t(N) for 1 <= N <= floor(n/3)."""
        if not 1 <= n_trunc <= self.energies.shape[0]:
            raise ValueError(f"block size {n_trunc} outside scan range")
        return float(self.energies[n_trunc - 1])


@dataclass(frozen=True)
class AdaptiveFit:
    """A truncated series fit; evaluating it sums coeffs[j] * L_j(x)."""

    problem: str
    n: int
    n_selected: int
    coeffs: np.ndarray
    sigma2_hat: float | None = None

    def __post_init__(self):
        c = np.ascontiguousarray(self.coeffs, dtype=np.float64)
        object.__setattr__(self, "coeffs", c)
        if c.shape[0] != self.n_selected + 1:
            raise ValueError("coefficient slice must cover 0..n_selected")


def _max_j(n: int) -> int:
    return 2 * (n // 3)


def regression_coeffs(sample: RegressionSample, j_max: int) -> CoeffTable:
    """c_hat_j = (2/n) sum_i y_i L_j(x_i) on the implicit design grid."""
    n = sample.n
    if not 0 <= j_max <= _max_j(n):
        raise ValueError(f"j_max must be in [0, {_max_j(n)}] for n = {n}")
    w = sample.y * (2.0 / n)
    coeffs = coeff_sums(design_grid(n), w, j_max)
    return CoeffTable(problem="R", n=n, coeffs=coeffs)


def density_coeffs(sample: DensitySample, j_max: int) -> CoeffTable:
    """c_hat_j = (1/n) sum_i L_j(xi_i); unbiased for E L_j(xi)."""
    n = sample.n
    if not 0 <= j_max <= _max_j(n):
        raise ValueError(f"j_max must be in [0, {_max_j(n)}] for n = {n}")
    w = np.full(n, 1.0 / n)
    coeffs = coeff_sums(sample.xi, w, j_max)
    return CoeffTable(problem="D", n=n, coeffs=coeffs)


def tail_energy_scan(coeffs: CoeffTable) -> TailScan:
    """Scan t(N) = sum_{k=N+1}^{2N} c_hat_k^2 over N = 1..floor(n/3).

    The selected truncation is the largest N attaining the minimum, so a
    scan that is identically zero (finite-dimensional data) falls through
    to floor(n/3).
    """
    n_max = coeffs.n // 3
    if n_max < 1:
        raise ValueError("sample too small for a scan")
    if coeffs.j_max < 2 * n_max:
        raise ValueError(
            f"scan needs coefficients up to index {2 * n_max}, "
            f"table has j_max = {coeffs.j_max}"
        )
    csum = np.concatenate(([0.0], np.cumsum(coeffs.coeffs**2)))
    n_grid = np.arange(1, n_max + 1)
    # csum[j] = sum_{k < j}, so the block N+1..2N is csum[2N+1] - csum[N+1]
    energies = csum[2 * n_grid + 1] - csum[n_grid + 1]
    min_energy = float(energies.min())
    n_selected = int(np.flatnonzero(energies == min_energy)[-1]) + 1
    return TailScan(
        n=coeffs.n,
        energies=energies,
        n_selected=n_selected,
        min_energy=min_energy,
    )


def fit_projection(coeffs: CoeffTable, n_trunc: int) -> AdaptiveFit:
    """Projection fit with fixed truncation: sum_{j<=n_trunc} c_hat_j L_j."""
    if not 0 <= n_trunc <= coeffs.j_max:
        raise ValueError(f"truncation {n_trunc} outside [0, {coeffs.j_max}]")
    return AdaptiveFit(
        problem=coeffs.problem,
        n=coeffs.n,
        n_selected=n_trunc,
        coeffs=coeffs.coeffs[: n_trunc + 1].copy(),
    )


def fit_adaptive(
    sample: RegressionSample | DensitySample,
) -> tuple[AdaptiveFit, TailScan]:
    """Estimate coefficients, scan, and fit at the selected truncation."""
    if isinstance(sample, RegressionSample):
        table = regression_coeffs(sample, _max_j(sample.n))
    elif isinstance(sample, DensitySample):
        table = density_coeffs(sample, _max_j(sample.n))
    else:
        raise TypeError("sample must be a RegressionSample or DensitySample")
    scan = tail_energy_scan(table)
    fit = fit_projection(table, scan.n_selected)
    if table.problem == "R" and sample.n >= 17:
        fit = AdaptiveFit(
            problem=fit.problem,
            n=fit.n,
            n_selected=fit.n_selected,
            coeffs=fit.coeffs,
            sigma2_hat=estimate_noise_variance(sample),
        )
    return fit, scan


def evaluate(fit: AdaptiveFit, x) -> float | np.ndarray:
    """Evaluate the fitted series at x (scalar or array in [-1, 1])."""
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if np.any(xs < -1.0) or np.any(xs > 1.0):
        raise ValueError("evaluation points must lie in [-1, 1]")
    vals = eval_series(np.ascontiguousarray(fit.coeffs), np.ascontiguousarray(xs))
    return float(vals[0]) if np.isscalar(x) or np.ndim(x) == 0 else vals


def estimate_noise_variance(sample: RegressionSample) -> float:
    """First-difference noise variance estimate for regression data.

    sigma2_hat = (1 / (2 (n-1))) sum_{i>=2} (y_i - y_{i-1})^2; the smooth
    part of the signal contributes only O(1/n^2).
    """
    if sample.n < 17:
        raise ValueError("need n >= 17")
    d = np.diff(sample.y)
    return float(np.dot(d, d) / (2.0 * d.shape[0]))


def ise_parseval(
    fit: AdaptiveFit,
    truth_coeffs: np.ndarray,
    analytic_tail: float = 0.0,
) -> float:
    """Integrated squared error of the fit against a coefficient truth.

    Computed in coefficient space: sum over fitted indices of the squared
    coefficient error, plus the truth's energy above the truncation, plus
    the supplied analytic residual beyond the truth's last index.
    """
    truth = np.asarray(truth_coeffs, dtype=np.float64)
    if truth.ndim != 1 or truth.shape[0] <= fit.n_selected:
        raise ValueError("truth must supply coefficients up to the truncation")
    if analytic_tail < 0:
        raise ValueError("analytic tail must be >= 0")
    head = truth[: fit.n_selected + 1] - fit.coeffs
    tail = truth[fit.n_selected + 1 :]
    return float(head @ head + tail @ tail + analytic_tail)
