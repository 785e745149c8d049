"""Monte Carlo campaigns: simulate, fit, score against the oracle, and
aggregate into a summary with optional threshold checks.

Campaign configs are TOML files (see configs/w_beta1.acceptance for the
bundled acceptance campaign).  Trials use counter-style RNG streams
derived from (seed base, arm, n, trial index), so results are
independent of execution order and safe to parallelize; the thread count
is capped by the LEGADAPT_THREADS environment variable (0 or unset means
automatic).
"""

from __future__ import annotations

import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .confidence import confidence_radius, pilot_block_size
from .estimators import fit_adaptive, ise_parseval
from .synth import (
    NoiseModel,
    SyntheticModel,
    make_density_truth,
    make_truth,
    oracle_risk,
)
from .synth import simulate_density, simulate_regression

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

__all__ = [
    "ConfigError",
    "CampaignConfig",
    "TrialReport",
    "ArmResult",
    "CampaignResult",
    "load_campaign_config",
    "run_campaign",
    "summary_doc",
    "trial_rows",
    "TRIAL_COLUMNS",
    "calibrate_tail_scale",
]


class ConfigError(ValueError):
    """A campaign config is malformed; the message names the bad key."""


_TRUTH_KEYS = {"kind", "scale", "alpha", "beta", "series_len", "problem"}
_NOISE_KEYS = {"kind", "sigma"}
_ARM_KEYS = {"n_grid", "trials", "seed_base"}
_CHECK_KEYS = {
    "ise_shrink_min",
    "ise_shrink_max",
    "select_dev_max",
    "select_dev_non_increasing",
    "energy_dev_max",
    "energy_dev_non_increasing",
    "gamma_median_min",
    "gamma_median_max",
    "ratio_p95_max",
    "ratio_p95_non_increasing",
    "coverage_min",
    "coverage_slack",
}
_TRUTH_KINDS = ("W", "Z")
_NOISE_KINDS = ("gaussian", "laplace", "bounded")


@dataclass(frozen=True)
class CampaignConfig:
    problem: str
    truth_kind: str
    truth_scale: float
    truth_alpha: float
    truth_beta: float
    series_len: int
    noise_kind: str
    noise_sigma: float
    n_grid: tuple[int, ...]
    trials: int
    seed_base: int
    coverage_n_grid: tuple[int, ...] = ()
    coverage_trials: int = 0
    coverage_seed_base: int = 0
    checks: dict = field(default_factory=dict)


def _require(table: dict, section: str, allowed: set) -> None:
    for key in table:
        if key not in allowed:
            raise ConfigError(
                f"unknown key {key!r} in [{section}]; "
                f"allowed: {', '.join(sorted(allowed))}"
            )


def _parse_config(raw: dict) -> CampaignConfig:
    allowed_sections = {"truth", "noise", "campaign", "coverage", "checks"}
    _require(raw, "top level", allowed_sections)
    truth = raw.get("truth")
    camp = raw.get("campaign")
    if truth is None or camp is None:
        raise ConfigError("config requires [truth] and [campaign] sections")
    _require(truth, "truth", _TRUTH_KEYS)
    _require(camp, "campaign", _ARM_KEYS)
    kind = truth.get("kind")
    if kind not in _TRUTH_KINDS:
        raise ConfigError(
            f"unknown truth kind {kind!r}; allowed: {', '.join(_TRUTH_KINDS)}"
        )
    problem = truth.get("problem", "R")
    if problem not in ("R", "D"):
        raise ConfigError(f"unknown problem {problem!r}; allowed: R, D")
    noise = raw.get("noise", {})
    _require(noise, "noise", _NOISE_KEYS)
    noise_kind = noise.get("kind", "gaussian")
    if noise_kind not in _NOISE_KINDS:
        raise ConfigError(
            f"unknown noise kind {noise_kind!r}; "
            f"allowed: {', '.join(_NOISE_KINDS)}"
        )
    if problem == "R" and "sigma" not in noise:
        raise ConfigError("[noise] sigma is required for problem R")
    cov = raw.get("coverage", {})
    _require(cov, "coverage", _ARM_KEYS)
    checks = raw.get("checks", {})
    _require(checks, "checks", _CHECK_KEYS)
    try:
        cfg = CampaignConfig(
            problem=problem,
            truth_kind=kind,
            truth_scale=float(truth.get("scale", 1.0)),
            truth_alpha=float(truth.get("alpha", 0.0)),
            truth_beta=float(truth.get("beta", 1.0)),
            series_len=int(truth.get("series_len", 600)),
            noise_kind=noise_kind,
            noise_sigma=float(noise.get("sigma", 0.0)),
            n_grid=tuple(int(n) for n in camp["n_grid"]),
            trials=int(camp["trials"]),
            seed_base=int(camp.get("seed_base", 0)),
            coverage_n_grid=tuple(int(n) for n in cov.get("n_grid", ())),
            coverage_trials=int(cov.get("trials", 0)),
            coverage_seed_base=int(cov.get("seed_base", 1)),
            checks=dict(checks),
        )
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    if any(n < 16 for n in cfg.n_grid) or not cfg.n_grid:
        raise ConfigError("[campaign] n_grid must list sample sizes >= 16")
    if cfg.trials < 1:
        raise ConfigError("[campaign] trials must be >= 1")
    return cfg


def load_campaign_config(path) -> CampaignConfig:
    try:
        with open(path, "rb") as fh:
            raw = _toml.load(fh)
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc
    return _parse_config(raw)


@dataclass(frozen=True)
class TrialReport:
    arm: str
    n: int
    trial: int
    n_selected: int | None = None
    n_oracle: int | None = None
    min_energy: float | None = None
    expected_min: float | None = None
    ise: float | None = None
    ise_ratio: float | None = None
    gamma_hat: float | None = None
    ci_radius: float | None = None
    covered: bool | None = None
    covered_oracle: bool | None = None
    degenerate: bool = False
    error: str | None = None


TRIAL_COLUMNS = [
    "arm",
    "n",
    "trial",
    "n_selected",
    "n_oracle",
    "min_energy",
    "expected_min",
    "ise",
    "ise_ratio",
    "gamma_hat",
    "ci_radius",
    "covered",
    "covered_oracle",
    "degenerate",
    "error",
]


def trial_rows(trials) -> list:
    return [[getattr(t, c) for c in TRIAL_COLUMNS] for t in trials]


@dataclass(frozen=True)
class ArmResult:
    arm: str
    trials: list
    per_n: dict  # n -> stats dict


@dataclass(frozen=True)
class CampaignResult:
    config: CampaignConfig
    main: ArmResult
    coverage: ArmResult | None
    checks: list  # (name, passed, detail) tuples; empty when not evaluated


def _worker_count() -> int:
    raw = os.environ.get("LEGADAPT_THREADS", "0").strip() or "0"
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    if cap <= 0:
        cap = min(os.cpu_count() or 1, 8)
    return cap


def _build_truth(cfg: CampaignConfig) -> SyntheticModel:
    maker = make_density_truth if cfg.problem == "D" else make_truth
    return maker(
        cfg.truth_kind,
        cfg.series_len,
        scale=cfg.truth_scale,
        alpha=cfg.truth_alpha,
        beta=cfg.truth_beta,
        problem=cfg.problem,
    )


def _run_trial(arm, truth, noise, cfg, oracle, n, m, tail, t) -> TrialReport:
    base = cfg.seed_base if arm == "main" else cfg.coverage_seed_base
    seed = (base, n, t)
    try:
        if cfg.problem == "R":
            sample = simulate_regression(truth, noise, n, seed)
        else:
            sample = simulate_density(truth, n, seed)
        fit, scan = fit_adaptive(sample)
        ise = ise_parseval(fit, truth.coeffs, analytic_tail=tail)
        rep = confidence_radius(scan, m)
        gamma_bound = truth.decay_ratio
        oracle_radius = oracle.min_expected_energy / (1.0 - gamma_bound)
        return TrialReport(
            arm=arm,
            n=n,
            trial=t,
            n_selected=fit.n_selected,
            n_oracle=oracle.n_oracle,
            min_energy=scan.min_energy,
            expected_min=oracle.min_expected_energy,
            ise=ise,
            ise_ratio=ise / oracle.min_expected_energy,
            gamma_hat=rep.gamma_hat,
            ci_radius=rep.radius,
            covered=None if rep.degenerate else bool(ise <= rep.radius),
            covered_oracle=bool(ise <= oracle_radius),
            degenerate=rep.degenerate,
        )
    except Exception as exc:  # never abort the campaign on one trial
        return TrialReport(arm=arm, n=n, trial=t, error=f"{type(exc).__name__}: {exc}")


def _median(values) -> float | None:
    vals = [v for v in values if v is not None]
    return float(np.median(vals)) if vals else None


def _arm_stats(trials, n: int) -> dict:
    here = [t for t in trials if t.n == n]
    ok = [t for t in here if t.error is None]
    gammas = [t.gamma_hat for t in ok if not t.degenerate and t.gamma_hat is not None]
    covers = [t.covered for t in ok if t.covered is not None]
    stats = {
        "trials": len(here),
        "failures": len(here) - len(ok),
        "n_oracle": ok[0].n_oracle if ok else 0,
        "expected_min": ok[0].expected_min if ok else 0.0,
        "median_ise": _median([t.ise for t in ok]),
        "median_select_dev": _median(
            [abs(t.n_selected / t.n_oracle - 1.0) for t in ok]
        ),
        "median_energy_dev": _median(
            [abs(t.min_energy / t.expected_min - 1.0) for t in ok]
        ),
        "degenerate_rate": (
            float(np.mean([t.degenerate for t in ok])) if ok else None
        ),
        "median_gamma": _median(gammas),
        "interval_count": len(covers),
        "coverage": float(np.mean(covers)) if covers else None,
        "oracle_coverage": (
            float(np.mean([t.covered_oracle for t in ok])) if ok else None
        ),
        "p95_ise_ratio": (
            float(np.quantile([t.ise_ratio for t in ok], 0.95)) if ok else None
        ),
    }
    return stats


def _run_arm(arm, cfg, truth, noise, n_grid, trials) -> ArmResult:
    reports = []
    workers = _worker_count()
    for n in n_grid:
        oracle = oracle_risk(
            truth, n, 1.0 if cfg.problem == "D" else cfg.noise_sigma**2, cfg.problem
        )
        m = pilot_block_size(n)
        tail = truth.residual(truth.j_max)
        args = [(arm, truth, noise, cfg, oracle, n, m, tail, t) for t in range(trials)]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                reports.extend(pool.map(lambda a: _run_trial(*a), args))
        else:
            reports.extend(_run_trial(*a) for a in args)
    per_n = {n: _arm_stats(reports, n) for n in n_grid}
    return ArmResult(arm=arm, trials=reports, per_n=per_n)


def _non_increasing(values, slack: float = 0.0) -> bool:
    vals = [v for v in values if v is not None]
    return all(b <= a + slack for a, b in zip(vals, vals[1:]))


def _evaluate_checks(cfg: CampaignConfig, main: ArmResult, cov: ArmResult | None):
    checks = []
    c = cfg.checks

    def add(name, passed, detail):
        checks.append((name, bool(passed), detail))

    ns = sorted(main.per_n)
    med_ise = [main.per_n[n]["median_ise"] for n in ns]
    if "ise_shrink_min" in c or "ise_shrink_max" in c:
        lo = c.get("ise_shrink_min", 0.0)
        hi = c.get("ise_shrink_max", math.inf)
        factors = [
            med_ise[i] / med_ise[i + 1]
            for i in range(len(ns) - 1)
            if med_ise[i] is not None and med_ise[i + 1] is not None
        ]
        add(
            "ise_shrink",
            all(lo <= f <= hi for f in factors),
            f"factors={[round(f, 3) for f in factors]} bounds=[{lo}, {hi}]",
        )
    sel = [main.per_n[n]["median_select_dev"] for n in ns]
    if "select_dev_max" in c:
        add(
            "select_dev_final",
            sel[-1] is not None and sel[-1] <= c["select_dev_max"],
            f"median |N/N0-1| at n={ns[-1]}: {sel[-1]} <= {c['select_dev_max']}",
        )
    if c.get("select_dev_non_increasing"):
        add("select_dev_non_increasing", _non_increasing(sel), f"values={sel}")
    dev = [main.per_n[n]["median_energy_dev"] for n in ns]
    if "energy_dev_max" in c:
        add(
            "energy_dev_final",
            dev[-1] is not None and dev[-1] <= c["energy_dev_max"],
            f"median |min-energy/expected-1| at n={ns[-1]}: {dev[-1]} <= {c['energy_dev_max']}",
        )
    if c.get("energy_dev_non_increasing"):
        add("energy_dev_non_increasing", _non_increasing(dev), f"values={dev}")
    if "gamma_median_min" in c or "gamma_median_max" in c:
        g = main.per_n[ns[-1]]["median_gamma"]
        lo = c.get("gamma_median_min", 0.0)
        hi = c.get("gamma_median_max", 1.0)
        add(
            "gamma_median",
            g is not None and lo <= g <= hi,
            f"median decay ratio at n={ns[-1]}: {g} in [{lo}, {hi}]",
        )
    p95 = [main.per_n[n]["p95_ise_ratio"] for n in ns]
    if "ratio_p95_max" in c:
        add(
            "ratio_p95",
            all(v is not None and v <= c["ratio_p95_max"] for v in p95),
            f"p95 ISE ratios={p95} <= {c['ratio_p95_max']}",
        )
    if c.get("ratio_p95_non_increasing"):
        add("ratio_p95_non_increasing", _non_increasing(p95), f"values={p95}")
    if cov is not None and ("coverage_min" in c or "coverage_slack" in c):
        cns = sorted(cov.per_n)
        cvals = [cov.per_n[n]["coverage"] for n in cns]
        if "coverage_min" in c:
            add(
                "coverage_final",
                cvals[-1] is not None and cvals[-1] >= c["coverage_min"],
                f"coverage at n={cns[-1]}: {cvals[-1]} >= {c['coverage_min']}",
            )
        if "coverage_slack" in c and len(cvals) >= 2:
            ok = (
                cvals[0] is not None
                and cvals[-1] is not None
                and cvals[-1] >= cvals[0] - c["coverage_slack"]
            )
            add(
                "coverage_non_decreasing",
                ok,
                f"coverage {cvals[0]} -> {cvals[-1]} (slack {c['coverage_slack']})",
            )
    return checks


def run_campaign(cfg: CampaignConfig, with_checks: bool = False) -> CampaignResult:
    """Run the main arm (and the coverage arm when configured)."""
    truth = _build_truth(cfg)
    noise = NoiseModel(kind=cfg.noise_kind, sigma=cfg.noise_sigma)
    main = _run_arm("main", cfg, truth, noise, cfg.n_grid, cfg.trials)
    cov = None
    if cfg.coverage_trials > 0 and cfg.coverage_n_grid:
        cov = _run_arm(
            "coverage", cfg, truth, noise, cfg.coverage_n_grid, cfg.coverage_trials
        )
    checks = _evaluate_checks(cfg, main, cov) if with_checks else []
    return CampaignResult(config=cfg, main=main, coverage=cov, checks=checks)


def _per_n_doc(arm: ArmResult) -> dict:
    doc = {}
    for n in sorted(arm.per_n):
        stats = arm.per_n[n]
        doc[str(n)] = {k: v for k, v in stats.items() if v is not None}
    return doc


def summary_doc(result: CampaignResult) -> dict:
    """Campaign summary as a nested dict ready for the canonical writer."""
    cfg = result.config
    doc = {
        "campaign": {
            "problem": cfg.problem,
            "truth_kind": cfg.truth_kind,
            "truth_scale": cfg.truth_scale,
            "truth_alpha": cfg.truth_alpha,
            "truth_beta": cfg.truth_beta,
            "series_len": cfg.series_len,
            "noise_kind": cfg.noise_kind,
            "noise_sigma": cfg.noise_sigma,
            "n_grid": list(cfg.n_grid),
            "trials": cfg.trials,
            "seed_base": cfg.seed_base,
        },
        "per_n": _per_n_doc(result.main),
    }
    ns = sorted(result.main.per_n)
    med = [result.main.per_n[n]["median_ise"] for n in ns]
    if all(v is not None for v in med) and len(med) >= 2:
        doc["cross"] = {
            "ise_shrink_factors": [med[i] / med[i + 1] for i in range(len(med) - 1)],
        }
    if result.coverage is not None:
        doc["coverage_arm"] = {
            "n_grid": list(cfg.coverage_n_grid),
            "trials": cfg.coverage_trials,
            "seed_base": cfg.coverage_seed_base,
            "per_n": _per_n_doc(result.coverage),
        }
    if result.checks:
        doc["checks"] = {
            name: {"passed": passed, "detail": detail}
            for name, passed, detail in result.checks
        }
    return doc


def calibrate_tail_scale(excess, r: float, delta: float) -> float:
    """Fit the tail constant so the refined interval at this delta matches
    the empirical (1 - delta) quantile of the interval excess.

    excess holds per-trial values of ISE / min-energy - 1 / (1 - decay
    ratio); solving 2 exp(-c u^(r/2)) = delta at u equal to the empirical
    quantile gives c.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    vals = np.asarray([v for v in excess if np.isfinite(v)], dtype=np.float64)
    if vals.size == 0:
        raise ValueError("no finite excess values to calibrate on")
    u = float(np.quantile(vals, 1.0 - delta, method="higher"))
    u = max(u, 1e-12)
    return math.log(2.0 / delta) / u ** (r / 2.0)
