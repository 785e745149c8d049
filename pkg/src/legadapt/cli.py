"""Command-line surface: fit data files, run truncation scans, and launch
simulation campaigns.

Exit status contract: 0 success, 1 usage or config error, 2 data error,
3 acceptance-check failure.  All emitted files are deterministic for
identical flags and seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys

import numpy as np

from . import __version__
from ._backend import BACKEND
from .campaign import (
    TRIAL_COLUMNS,
    ConfigError,
    load_campaign_config,
    run_campaign,
    summary_doc,
    trial_rows,
)
from .confidence import confidence_radius, pilot_block_size
from .estimators import (
    DensitySample,
    RegressionSample,
    design_grid,
    evaluate,
    fit_adaptive,
)
from .legendre import gauss_legendre_rule
from .report import dumps_report, write_csv

__all__ = ["main", "UsageError", "DataError"]

_DESIGN_TOL = 1e-9
_INTEGRAL_TOL = 1e-10


class UsageError(Exception):
    """Bad invocation or config; maps to exit status 1."""


class DataError(Exception):
    """Bad input data; maps to exit status 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_columns(path: str, max_cols: int) -> tuple[np.ndarray, list[int]]:
    """Parse a delimited numeric text file; returns (rows, line numbers)."""
    rows: list[list[float]] = []
    lines: list[int] = []
    width = None
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            parts = [p for p in text.replace(",", " ").split() if p]
            if width is None:
                width = len(parts)
                if width == 0 or width > max_cols:
                    raise DataError(
                        f"{path}:{lineno}: expected 1..{max_cols} numeric "
                        f"columns, found {len(parts)}"
                    )
            elif len(parts) != width:
                raise DataError(
                    f"{path}:{lineno}: inconsistent column count "
                    f"({len(parts)} vs {width})"
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric row: {text!r}")
            if not all(math.isfinite(v) for v in rows[-1]):
                raise DataError(f"{path}:{lineno}: non-finite value")
            lines.append(lineno)
    if not rows:
        raise DataError(f"{path}: no numeric rows")
    return np.asarray(rows, dtype=np.float64), lines


def _load_regression(path: str) -> RegressionSample:
    data, _ = _read_columns(path, max_cols=2)
    n = data.shape[0]
    if n < 16:
        raise UsageError(f"{path}: need at least 16 observations, found {n}")
    if data.shape[1] == 1:
        y = data[:, 0]
    else:
        grid = design_grid(n)
        dev = np.abs(data[:, 0] - grid)
        if dev.max() > _DESIGN_TOL:
            i = int(dev.argmax())
            raise DataError(
                f"{path}: x column does not match the implicit design grid "
                f"-1 + 2i/n (row {i + 1}: {data[i, 0]!r}, expected "
                f"{grid[i]!r}); arbitrary designs are not supported"
            )
        y = data[:, 1]
    return RegressionSample(y=y)


def _load_density(path: str, rescale) -> tuple[DensitySample, tuple]:
    data, lines = _read_columns(path, max_cols=1)
    xi = data[:, 0]
    if xi.shape[0] < 16:
        raise UsageError(f"{path}: need at least 16 draws, found {xi.shape[0]}")
    lo, hi = (-1.0, 1.0) if rescale is None else (rescale[0], rescale[1])
    if hi <= lo:
        raise UsageError("--rescale bounds must satisfy MIN < MAX")
    bad = [lines[i] for i in np.flatnonzero((xi < lo) | (xi > hi))[:20]]
    if bad:
        hint = "" if rescale is not None else " (use --rescale MIN MAX)"
        raise DataError(
            f"{path}: values outside [{lo!r}, {hi!r}] on lines "
            f"{', '.join(map(str, bad))}{hint}"
        )
    if rescale is not None:
        xi = 2.0 * (xi - lo) / (hi - lo) - 1.0
        xi = np.clip(xi, -1.0, 1.0)
    return DensitySample(xi=xi), (lo, hi)


def _confidence_doc(scan) -> dict:
    rep = confidence_radius(scan, pilot_block_size(scan.n))
    doc = {
        "m": rep.m,
        "block_clamped": rep.block_clamped,
        "tau_m": rep.tau_m,
        "tau_2m": rep.tau_2m,
        "tau_4m": rep.tau_4m,
        "degenerate": rep.degenerate,
    }
    if rep.gamma_hat is not None:
        doc["gamma_hat"] = rep.gamma_hat
    if rep.degenerate:
        doc["reason"] = rep.reason
    if rep.radius is not None:
        doc["ci_radius"] = rep.radius
    return doc


def _tool_doc(command: str, args) -> dict:
    doc = {
        "name": "legadapt",
        "version": __version__,
        "backend": BACKEND,
        "command": command,
        "input": getattr(args, "input", ""),
        "out_dir": args.out,
        "grid_points": getattr(args, "grid", 0),
    }
    if getattr(args, "rescale", None) is not None:
        doc["rescale"] = list(args.rescale)
    if getattr(args, "seed", None) is not None:
        doc["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        doc["trials"] = args.trials
    return doc


def _write_fit_outputs(args, fit, scan, extra: dict | None = None) -> str:
    out = args.out
    os.makedirs(out, exist_ok=True)
    xs = np.linspace(-1.0, 1.0, args.grid)
    fs = evaluate(fit, xs)
    doc = {
        "fit": {
            "problem": fit.problem,
            "n": fit.n,
            "n_selected": fit.n_selected,
            "min_energy": scan.min_energy,
        },
        "confidence": _confidence_doc(scan),
        "coefficients": {"values": list(fit.coeffs)},
        "grid": {"x": list(xs), "f": list(fs)},
        "tool": _tool_doc(args.command, args),
    }
    if fit.sigma2_hat is not None:
        doc["fit"]["sigma2_hat"] = fit.sigma2_hat
    if extra:
        doc.update(extra)
    report_path = os.path.join(out, "report.toml")
    with open(report_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_report(doc))
    write_csv(os.path.join(out, "curve.csv"), ["x", "f_hat"], zip(xs, fs))
    write_csv(
        os.path.join(out, "scan.csv"),
        ["n_trunc", "tail_energy"],
        zip(range(1, scan.energies.shape[0] + 1), scan.energies),
    )
    return report_path


def _cmd_fit_reg(args) -> int:
    sample = _load_regression(args.input)
    fit, scan = fit_adaptive(sample)
    path = _write_fit_outputs(args, fit, scan)
    print(f"fit-reg: n={fit.n} n_selected={fit.n_selected} "
          f"min_energy={scan.min_energy!r}")
    print(f"wrote {path}")
    return 0


def _cmd_fit_den(args) -> int:
    sample, bounds = _load_density(args.input, args.rescale)
    fit, scan = fit_adaptive(sample)
    order = max(600, fit.n_selected // 2 + 2)
    rule = gauss_legendre_rule(order)
    integral = rule.integrate(evaluate(fit, rule.nodes))
    if abs(integral - 1.0) > _INTEGRAL_TOL:
        raise DataError(
            f"fitted density integrates to {integral!r}, not 1; "
            "input may be degenerate"
        )
    extra = {"density": {"integral": integral}}
    if args.rescale is not None:
        extra["density"]["rescale_low"] = bounds[0]
        extra["density"]["rescale_high"] = bounds[1]
    path = _write_fit_outputs(args, fit, scan, extra)
    print(f"fit-den: n={fit.n} n_selected={fit.n_selected} "
          f"integral={integral!r}")
    print(f"wrote {path}")
    return 0


def _cmd_scan(args) -> int:
    if args.problem == "reg":
        sample = _load_regression(args.input)
    else:
        sample, _ = _load_density(args.input, args.rescale)
    _, scan = fit_adaptive(sample)
    os.makedirs(args.out, exist_ok=True)
    scan_path = os.path.join(args.out, "scan.csv")
    write_csv(
        scan_path,
        ["n_trunc", "tail_energy"],
        zip(range(1, scan.energies.shape[0] + 1), scan.energies),
    )
    doc = {
        "scan": {
            "problem": "R" if args.problem == "reg" else "D",
            "n": scan.n,
            "n_selected": scan.n_selected,
            "min_energy": scan.min_energy,
        },
        "confidence": _confidence_doc(scan),
        "tool": _tool_doc("scan", args),
    }
    report_path = os.path.join(args.out, "report.toml")
    with open(report_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_report(doc))
    print(f"scan: n={scan.n} n_selected={scan.n_selected} "
          f"min_energy={scan.min_energy!r}")
    print(f"wrote {scan_path}")
    return 0


def _resolve_config(path: str) -> str:
    if os.path.exists(path):
        return path
    if os.path.sep not in path:
        bundled = os.path.join(os.path.dirname(__file__), "configs", path)
        if os.path.exists(bundled):
            return bundled
    raise UsageError(f"config file not found: {path}")


def _cmd_simulate(args) -> int:
    cfg = load_campaign_config(_resolve_config(args.config))
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed_base=args.seed,
                                  coverage_seed_base=args.seed + 1)
    if args.trials is not None:
        if args.trials < 1:
            raise UsageError("--trials must be >= 1")
        cfg = dataclasses.replace(cfg, trials=args.trials)
    result = run_campaign(cfg, with_checks=args.check)
    os.makedirs(args.out, exist_ok=True)
    all_trials = list(result.main.trials)
    if result.coverage is not None:
        all_trials.extend(result.coverage.trials)
    write_csv(os.path.join(args.out, "trials.csv"), TRIAL_COLUMNS,
              trial_rows(all_trials))
    doc = summary_doc(result)
    doc["tool"] = _tool_doc("simulate", args)
    summary_path = os.path.join(args.out, "summary.toml")
    with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_report(doc))
    print(f"simulate: {len(all_trials)} trials over n_grid={list(cfg.n_grid)}"
          f"{' + coverage arm' if result.coverage is not None else ''}")
    print(f"wrote {summary_path}")
    if args.check:
        failed = [name for name, passed, _ in result.checks if not passed]
        for name, passed, detail in result.checks:
            print(f"check {name}: {'pass' if passed else 'FAIL'} ({detail})")
        if failed:
            print(f"{len(failed)} of {len(result.checks)} checks failed")
            return 3
        print(f"all {len(result.checks)} checks passed")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="legadapt",
                     description="Adaptive series regression and density "
                                 "estimation with data-driven truncation")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, rescale=False):
        p.add_argument("--out", default=".", metavar="DIR",
                       help="output directory (default: current)")
        p.add_argument("--grid", type=int, default=101, metavar="K",
                       help="evaluation grid size (default 101)")
        if rescale:
            p.add_argument("--rescale", nargs=2, type=float,
                           metavar=("MIN", "MAX"),
                           help="affinely map [MIN, MAX] onto [-1, 1]")

    p = sub.add_parser("fit-reg", help="fit regression data on the implicit "
                                       "design grid")
    p.add_argument("input")
    common(p)
    p.set_defaults(func=_cmd_fit_reg)

    p = sub.add_parser("fit-den", help="fit a density from draws in [-1, 1]")
    p.add_argument("input")
    common(p, rescale=True)
    p.set_defaults(func=_cmd_fit_den)

    p = sub.add_parser("scan", help="emit the truncation scan table")
    p.add_argument("input")
    p.add_argument("--problem", choices=("reg", "den"), required=True)
    common(p, rescale=True)
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("simulate", help="run a simulation campaign from a "
                                        "config file")
    p.add_argument("config")
    p.add_argument("--out", default=".", metavar="DIR")
    p.add_argument("--seed", type=int, default=None, metavar="U64",
                   help="override the config seed base")
    p.add_argument("--trials", type=int, default=None,
                   help="override the per-n trial count of the main arm")
    p.add_argument("--check", action="store_true",
                   help="evaluate acceptance thresholds; exit 3 on failure")
    p.set_defaults(func=_cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
