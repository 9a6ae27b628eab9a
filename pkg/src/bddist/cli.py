"""Command-line entry point: estimate, simulate, and bias-oracle subcommands.

Configuration precedence is built-in defaults, then values from an optional
--config JSON file (keys mirror the flag names with underscores), then
explicitly supplied flags.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import bandwidth as bw
from .covariance import build_surface
from .data import Sample
from .errors import (
    BandwidthSelectionError,
    BddistError,
    DataParseError,
    DataSchemaError,
    InsufficientDataError,
    InvalidBandwidthError,
    InvalidInputError,
    SingularGramError,
)
from .formatting import format_number, write_csv
from .geometry import load_boundary, make_grid
from .inference import pointwise_ci, uniform_band
from .kernels import FAMILIES
from .locpoly import PointFit, fit_point
from .oracle import fixed_h_bias
from .simulation import DgpSpec, default_dgp, run_monte_carlo

DEFAULTS = {
    "boundary": None,
    "data": None,
    "grid_size": 21,
    "p": 1,
    "kernel": "triangular",
    "alpha": 0.05,
    "bw_rule": "rot",
    "c0": 1.0,
    "h": None,
    "bw_exponent": 0.25,
    "band_draws": 10000,
    "seed": 0,
    "out": None,
    "precision": "human",
    "dump_cov": None,
    "n": 5000,
    "reps": 100,
    "dgp": None,
    "s_grid": "0.01:1.0:40",
}


@dataclass
class RunConfig:
    command: str
    values: dict

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError:
            raise AttributeError(name) from None


def read_dataset(path):
    """Read a CSV with columns y, x1, x2 (extra columns ignored).

    Returns (y, x) arrays; the treatment indicator is never read from the
    file, it is derived later from the boundary's assignment rule.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [c.strip() for c in next(reader)]
        except StopIteration:
            raise InvalidInputError(f"{path}: empty file") from None
        cols = {}
        for name in ("y", "x1", "x2"):
            if name not in header:
                raise DataSchemaError(name)
            cols[name] = header.index(name)
        ys, x1s, x2s = [], [], []
        for rownum, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                vals = [float(row[cols[name]]) for name in ("y", "x1", "x2")]
            except (ValueError, IndexError) as exc:
                raise DataParseError(rownum, str(exc)) from None
            if not all(math.isfinite(v) for v in vals):
                raise DataParseError(rownum, "non-finite value")
            ys.append(vals[0])
            x1s.append(vals[1])
            x2s.append(vals[2])
    if not ys:
        raise InvalidInputError(f"{path}: no data rows")
    return np.asarray(ys), np.column_stack([np.asarray(x1s), np.asarray(x2s)])


def _bandwidth_rule(cfg):
    name = cfg.bw_rule
    if name == "fixed":
        if cfg.h is None:
            raise InvalidInputError("--bw-rule fixed requires --h")
        return bw.Fixed(float(cfg.h))
    if name == "rot":
        return bw.RuleOfThumb(c0=float(cfg.c0), exponent=float(cfg.bw_exponent))
    if name == "mse":
        return bw.MsePilot()
    if name == "kink":
        return bw.KinkAdaptive(c0=float(cfg.c0), exponent=float(cfg.bw_exponent))
    raise InvalidInputError(f"unknown bandwidth rule {name!r}")


_ERROR_CODES = {
    InsufficientDataError: "insufficient-data",
    SingularGramError: "singular-gram",
    BandwidthSelectionError: "bandwidth-selection-failed",
    InvalidBandwidthError: "invalid-bandwidth",
}


def _error_code(err) -> str:
    for cls, code in _ERROR_CODES.items():
        if isinstance(err, cls):
            return code
    return "error"


def run_estimate(cfg: RunConfig) -> int:
    """Per-point estimates, pointwise CIs, and the uniform band, as CSV.

    Points whose fit fails are emitted with an error code; the exit status
    is 2 when any point failed and 0 otherwise.
    """
    if cfg.boundary is None or cfg.data is None:
        raise InvalidInputError("estimate requires --boundary and --data")
    polyline, rule = load_boundary(cfg.boundary)
    y, x = read_dataset(cfg.data)
    sample = Sample.from_data(y, x, rule)
    grid = make_grid(polyline, int(cfg.grid_size))
    p, kernel, alpha = int(cfg.p), cfg.kernel, float(cfg.alpha)
    rule_obj = _bandwidth_rule(cfg)

    hs = np.full(grid.count, np.nan)
    errors: dict[int, str] = {}
    if isinstance(rule_obj, (bw.Fixed, bw.RuleOfThumb)):
        hs[:] = bw.resolve_bandwidths(rule_obj, sample, polyline, rule, grid, kernel, p)
    else:
        rot_h = bw.rot_bandwidth(sample, polyline, float(cfg.c0), float(cfg.bw_exponent))
        for k, pt in enumerate(grid.points):
            try:
                h_mse = bw.mse_pilot_bandwidth(sample, pt, rule, kernel, p)
                if isinstance(rule_obj, bw.KinkAdaptive):
                    h_mse = bw.kink_adaptive_bandwidth(pt, polyline, h_mse, rot_h)
                hs[k] = h_mse
            except BddistError as err:
                errors[k] = _error_code(err)

    fits: dict[int, PointFit] = {}
    for k, pt in enumerate(grid.points):
        if k in errors:
            continue
        try:
            fits[k] = fit_point(sample, pt, rule, kernel, hs[k], p)
        except BddistError as err:
            errors[k] = _error_code(err)

    band = None
    if fits:
        keys = sorted(fits)
        surface = build_surface([fits[k] for k in keys], len(sample),
                                grid=grid if len(keys) == grid.count else None)
        band = uniform_band([fits[k] for k in keys], surface, alpha,
                            int(cfg.band_draws), int(cfg.seed))
        band_by_key = dict(zip(keys, band.intervals))
        if cfg.dump_cov:
            write_csv(cfg.dump_cov,
                      [f"x{j + 1}" for j in range(len(keys))],
                      [[format_number(v, cfg.precision) for v in row]
                       for row in surface.xi])
    else:
        band_by_key = {}

    header = ["point_id", "b1", "b2", "h", "n_eff_0", "n_eff_1", "theta_hat",
              "se", "ci_lower", "ci_upper", "band_lower", "band_upper", "error"]
    rows = []
    prec = cfg.precision
    for k in range(grid.count):
        b1, b2 = grid.points[k]
        if k in errors:
            rows.append([str(k + 1), format_number(b1, prec), format_number(b2, prec),
                         "", "", "", "", "", "", "", "", "", errors[k]])
            continue
        fit = fits[k]
        ci = pointwise_ci(fit, alpha)
        bi = band_by_key[k]
        rows.append([
            str(k + 1),
            format_number(b1, prec), format_number(b2, prec),
            format_number(fit.h, prec),
            str(fit.fit0.n_eff), str(fit.fit1.n_eff),
            format_number(fit.theta_hat, prec), format_number(fit.se, prec),
            format_number(ci.lower, prec), format_number(ci.upper, prec),
            format_number(bi.lower, prec), format_number(bi.upper, prec),
            "",
        ])
    write_csv(cfg.out if cfg.out else sys.stdout, header, rows)
    return 2 if errors else 0


def _load_dgp(cfg) -> DgpSpec:
    spec = default_dgp()
    overrides = {}
    if cfg.dgp:
        with open(cfg.dgp) as fh:
            overrides.update(json.load(fh))
    if cfg.boundary is not None:
        polyline, rule = load_boundary(cfg.boundary)
        overrides["boundary"] = polyline
        overrides["assignment"] = rule
    if not overrides:
        return spec
    fields = dict(
        beta0=spec.beta0, beta1=spec.beta1, sigma0=spec.sigma0, sigma1=spec.sigma1,
        beta_params=spec.beta_params, score_scale=spec.score_scale,
        score_shift=spec.score_shift, boundary=spec.boundary,
        assignment=spec.assignment,
    )
    unknown = set(overrides) - set(fields)
    if unknown:
        raise InvalidInputError(f"unknown DGP override keys: {sorted(unknown)}")
    fields.update(overrides)
    for key in ("beta0", "beta1", "beta_params"):
        fields[key] = tuple(fields[key])
    return DgpSpec(**fields)


def run_simulate(cfg: RunConfig) -> int:
    """Monte Carlo coverage study written as a report CSV."""
    spec = _load_dgp(cfg)
    grid = make_grid(spec.boundary, int(cfg.grid_size))
    report = run_monte_carlo(
        spec, int(cfg.n), int(cfg.reps), grid=grid, p=int(cfg.p), kernel=cfg.kernel,
        bw_rule=_bandwidth_rule(cfg), alpha=float(cfg.alpha),
        band_draws=int(cfg.band_draws), seed=int(cfg.seed),
    )
    report.to_csv(cfg.out if cfg.out else sys.stdout, cfg.precision)
    if report.invalid:
        print(f"warning: {report.n_failed}/{report.reps_requested} replications "
              "failed; report flagged invalid", file=sys.stderr)
    return 0


def _parse_s_grid(text: str) -> np.ndarray:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InvalidInputError("--s-grid expects start:stop:count or a comma list")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        return np.linspace(start, stop, count)
    return np.asarray([float(v) for v in text.split(",")])


def run_bias_oracle(cfg: RunConfig) -> int:
    """Exact fixed-h bias values on a grid of kink distances, as CSV."""
    h = float(cfg.h) if cfg.h is not None else 1.0
    s_values = _parse_s_grid(cfg.s_grid)
    rows = [[format_number(s, cfg.precision),
             format_number(fixed_h_bias(cfg.kernel, int(cfg.p), h, float(s)),
                           cfg.precision)]
            for s in s_values]
    write_csv(cfg.out if cfg.out else sys.stdout, ["s", "bias"], rows)
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_common(sp):
    sp.add_argument("--config", help="JSON file mirroring the flags; flags win")
    sp.add_argument("--boundary", help="boundary spec JSON file")
    sp.add_argument("--grid-size", type=int, dest="grid_size")
    sp.add_argument("--p", type=int)
    sp.add_argument("--kernel", choices=FAMILIES)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--bw-rule", choices=("fixed", "rot", "mse", "kink"), dest="bw_rule")
    sp.add_argument("--c0", type=float)
    sp.add_argument("--h", type=float)
    sp.add_argument("--bw-exponent", type=float, dest="bw_exponent")
    sp.add_argument("--band-draws", type=int, dest="band_draws")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    sp.add_argument("--precision", choices=("human", "full"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bddist",
        description="Distance-based estimation and inference for boundary "
                    "discontinuity designs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="effect curve with CIs and a uniform band")
    _add_common(est)
    est.add_argument("--data", help="CSV with columns y, x1, x2")
    est.add_argument("--dump-cov", dest="dump_cov", help="write the covariance matrix CSV")

    sim = sub.add_parser("simulate", help="Monte Carlo coverage study")
    _add_common(sim)
    sim.add_argument("--n", type=int)
    sim.add_argument("--reps", type=int)
    sim.add_argument("--dgp", help="JSON overriding DGP fields")

    orc = sub.add_parser("bias-oracle", help="exact fixed-h bias on a grid")
    _add_common(orc)
    orc.add_argument("--s-grid", dest="s_grid",
                     help="start:stop:count or comma-separated values")
    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    values = dict(DEFAULTS)
    supplied = {k: v for k, v in vars(args).items()
                if k not in ("command", "config") and v is not None}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            file_values = json.load(fh)
        unknown = set(file_values) - set(DEFAULTS)
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        values.update(file_values)
    values.update(supplied)
    if not 0.0 < float(values["alpha"]) < 1.0:
        raise InvalidInputError(f"alpha must be in (0, 1), got {values['alpha']}")
    if int(values["grid_size"]) < 1:
        raise InvalidInputError("grid-size must be >= 1")
    return RunConfig(args.command, values)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        if args.command == "estimate":
            return run_estimate(cfg)
        if args.command == "simulate":
            return run_simulate(cfg)
        return run_bias_oracle(cfg)
    except BddistError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
