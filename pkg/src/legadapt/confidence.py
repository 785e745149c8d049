"""Adaptive confidence intervals for the integrated squared error.

The interval is built from three pilot blocks of the tail-energy scan at
sizes M, 2M, 4M.  Differencing the blocks cancels the per-coefficient
noise floor exactly, leaving a plug-in estimate of the residual decay
ratio; the interval radius is min-energy / (1 - decay ratio).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .estimators import TailScan

__all__ = [
    "DegenerateIntervalError",
    "ConfidenceReport",
    "TailBound",
    "pilot_block_size",
    "raw_block_size",
    "decay_ratio",
    "confidence_radius",
    "noise_tail_exponent",
    "refined_confidence_radius",
]

# Decay-ratio estimates outside this open interval are reported as
# degenerate rather than clamped: a clamped value would fabricate an
# interval the asymptotics do not support.
GAMMA_MIN = 0.001
GAMMA_MAX = 0.95

# Relative floor (in units of the pilot-block scale) below which the
# denominator of the decay-ratio estimate is treated as zero.
_DENOM_FLOOR = 1e-13


class DegenerateIntervalError(ArithmeticError):
    """The pilot blocks do not support an interval; carries the reason."""

    def __init__(self, reason: str, value: float | None = None):
        super().__init__(reason)
        self.reason = reason
        self.value = value


@dataclass(frozen=True)
class ConfidenceReport:
    """Pilot-block statistics and the resulting interval radius."""

    n: int
    m: int
    block_clamped: bool
    tau_m: float
    tau_2m: float
    tau_4m: float
    min_energy: float
    gamma_hat: float | None = None
    radius: float | None = None
    degenerate: bool = False
    reason: str | None = None
    delta: float | None = None
    u_delta: float | None = None


def raw_block_size(n: int) -> int:
    """floor(exp(sqrt(log n))), before clamping to the scan range."""
    if n < 16:
        raise ValueError("need n >= 16")
    return int(math.floor(math.exp(math.sqrt(math.log(n)))))


def pilot_block_size(n: int) -> int:
    """Pilot block size M, clamped so that 4M fits inside the scan range."""
    cap = (n // 3) // 4
    if cap < 1:
        raise ValueError(f"no valid pilot block size for n = {n}")
    return max(1, min(raw_block_size(n), cap))


def decay_ratio(scan: TailScan, m: int) -> float:
    """Plug-in estimate of the residual decay ratio from blocks M, 2M, 4M.

    (t(4M) - 2 t(2M)) / (t(2M) - 2 t(M)); the noise-floor terms cancel
    exactly.  Raises DegenerateIntervalError when the denominator is at
    machine scale or the estimate falls outside (0.001, 0.95).
    """
    if m < 1 or 4 * m > scan.energies.shape[0]:
        raise ValueError(f"pilot block {m} does not fit the scan range")
    t_m = scan.energy_at(m)
    t_2m = scan.energy_at(2 * m)
    t_4m = scan.energy_at(4 * m)
    scale = t_m + t_2m + t_4m
    denom = t_2m - 2.0 * t_m
    if abs(denom) <= _DENOM_FLOOR * scale:
        raise DegenerateIntervalError("pilot-block denominator at machine scale")
    gamma = (t_4m - 2.0 * t_2m) / denom
    if not GAMMA_MIN < gamma < GAMMA_MAX:
        raise DegenerateIntervalError(
            f"decay-ratio estimate {gamma!r} outside "
            f"({GAMMA_MIN}, {GAMMA_MAX})",
            value=gamma,
        )
    return gamma


def confidence_radius(scan: TailScan, m: int | None = None) -> ConfidenceReport:
    """Interval radius min-energy * (t(2M) - 2t(M)) / (3t(2M) - 2t(M) - t(4M)).

    Algebraically identical to min-energy / (1 - decay ratio); both forms
    are computed and cross-checked.  Degenerate pilot statistics yield a
    report with the reason instead of a radius.
    """
    if m is None:
        m = pilot_block_size(scan.n)
    clamped = m != raw_block_size(scan.n)
    t_m = scan.energy_at(m)
    t_2m = scan.energy_at(2 * m)
    t_4m = scan.energy_at(4 * m)
    base = dict(
        n=scan.n,
        m=m,
        block_clamped=clamped,
        tau_m=t_m,
        tau_2m=t_2m,
        tau_4m=t_4m,
        min_energy=scan.min_energy,
    )
    try:
        gamma = decay_ratio(scan, m)
    except DegenerateIntervalError as exc:
        return ConfidenceReport(
            **base, gamma_hat=exc.value, degenerate=True, reason=exc.reason
        )
    ratio_form = scan.min_energy * (t_2m - 2.0 * t_m) / (3.0 * t_2m - 2.0 * t_m - t_4m)
    radius = scan.min_energy / (1.0 - gamma)
    if radius <= 0 or not math.isfinite(radius):
        return ConfidenceReport(
            **base,
            gamma_hat=gamma,
            degenerate=True,
            reason=f"non-positive interval radius {radius!r}",
        )
    if abs(ratio_form - radius) > 1e-10 * abs(radius):
        raise AssertionError(
            "closed-form radius disagrees with min-energy / (1 - gamma): "
            f"{ratio_form!r} vs {radius!r}"
        )
    return ConfidenceReport(**base, gamma_hat=gamma, radius=radius)


def noise_tail_exponent(q) -> float:
    """Exponent r governing interval-tail decay.

    For the regression problem with sub-Weibull noise exponent q:
    r = 2q/(q+4) on 0 < q < 2 and r = q/(q+1) for q >= 2 (the branches
    agree at q = 2).  The density problem ("D") has r = 1.
    """
    if isinstance(q, str):
        if q.upper() == "D":
            return 1.0
        raise ValueError("tag must be 'D' or a positive exponent")
    q = float(q)
    if q <= 0:
        raise ValueError("tail exponent q must be positive")
    if q < 2:
        return 2.0 * q / (q + 4.0)
    return q / (q + 1.0)


@dataclass(frozen=True)
class TailBound:
    """Configured tail model: exponent r plus the (non-constructive)
    scale constant for the refined interval."""

    r: float
    c_tail: float = 1.0
    q: float | None = None
    q_scale: float | None = None

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError("r must be positive")
        if self.c_tail <= 0:
            raise ValueError("c_tail must be positive")

    @classmethod
    def for_noise(cls, q, c_tail: float = 1.0, q_scale: float | None = None):
        return cls(r=noise_tail_exponent(q), c_tail=c_tail,
                   q=None if isinstance(q, str) else float(q), q_scale=q_scale)

    def u_delta(self, delta: float) -> float:
        """u solving 2 exp(-c_tail * u^(r/2)) = delta."""
        if not 0 < delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        return (math.log(2.0 / delta) / self.c_tail) ** (2.0 / self.r)


def refined_confidence_radius(
    report: ConfidenceReport,
    tail: TailBound,
    delta: float,
    include_base: bool = True,
) -> float:
    """Radius with reliability about 1 - delta.

    min-energy / (1 - gamma) + min-energy * u(delta), where u solves
    2 exp(-c_tail u^(r/2)) = delta.  With include_base=False only the
    u(delta) term is kept (the cruder interval without the decay-ratio
    correction; it does not need a non-degenerate report).
    """
    u = tail.u_delta(delta)
    if not include_base:
        return report.min_energy * u
    if report.degenerate or report.radius is None:
        raise DegenerateIntervalError(report.reason or "degenerate report")
    return report.radius + report.min_energy * u
