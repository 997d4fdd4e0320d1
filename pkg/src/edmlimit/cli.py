"""Command-line driver: ``edmlimit <command> [options]``.

Every command writes one table (CSV with ``#`` metadata lines, or JSON) that
starts with the tool version, the resolved configuration and the seed.
Exit status is 0 on success, 2 for configuration errors and 3 for numerical
failures; errors are reported as one line on stderr.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import __version__
from .approximation import approx_error
from .errors import NumericalError, TailNotLogRegularError
from .families import EdmModel, edm_log_density, get_family, sample_log, user_family
from .levy import estimate_ell
from .levy_spec import load_levy_spec
from .limits import (
    DEFAULT_U_GRID,
    KS_T_GRID,
    ks_convergence,
    log_density_u,
    log_density_u_printed,
    lt_limit_curve,
)

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

COMMAND_T_GRIDS = {
    "limit-table": (0.1, 0.01, 0.001),
    "ks": KS_T_GRID,
    "estimate-ell": (1.0,),
    "sample": (1.0,),
    "density": (1.0, 0.5, 0.1),
    "approx-error": (0.5, 0.1, 0.05, 0.01),
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    family: str
    theta0: float
    ell_scale: float
    t_grid: tuple
    u_grid: tuple
    samples: int
    seed: int
    format: str
    out: Optional[str]
    levy_spec: Optional[str]

    def echo(self):
        return {
            "command": self.command,
            "family": self.family,
            "theta0": self.theta0,
            "ell_scale": self.ell_scale,
            "t_grid": list(self.t_grid),
            "u_grid": list(self.u_grid),
            "samples": self.samples,
            "seed": self.seed,
            "format": self.format,
            "levy_spec": self.levy_spec,
        }


def _grid(text, name):
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"{name} must be a comma-separated list of numbers") from None
    if not values:
        raise ConfigError(f"{name} is empty")
    if any(not (v > 0 and math.isfinite(v)) for v in values):
        raise ConfigError(f"{name} entries must be positive and finite")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError(f"{name} must be sorted ascending without repeats")
    return values


def make_config(args):
    family = args.family
    spec = args.levy_spec
    if family.startswith("user:"):
        spec = spec or family.split(":", 1)[1]
        family = "user"
    if family == "user" and not spec:
        raise ConfigError("family 'user' needs --levy-spec FILE (or --family user:FILE)")
    if family not in ("gamma", "harmonic", "bessel", "user"):
        raise ConfigError(f"unknown family {args.family!r}")
    if not (args.theta0 >= 0 and math.isfinite(args.theta0)):
        raise ConfigError("--theta0 must be a finite number >= 0")
    if not (args.ell_scale > 0 and math.isfinite(args.ell_scale)):
        raise ConfigError("--ell-scale must be positive")
    if args.samples < 1:
        raise ConfigError("--samples must be at least 1")
    if args.t_grid is None:
        t_grid = tuple(sorted(COMMAND_T_GRIDS[args.command]))
    else:
        t_grid = _grid(args.t_grid, "--t-grid")
    u_grid = DEFAULT_U_GRID if args.u_grid is None else _grid(args.u_grid, "--u-grid")
    if args.command == "sample" and len(t_grid) != 1:
        raise ConfigError("sample takes a single t in --t-grid")
    return RunConfig(
        args.command, family, float(args.theta0), float(args.ell_scale), t_grid, tuple(u_grid),
        int(args.samples), int(args.seed), args.format, args.out, spec,
    )


def build_family(config):
    if config.family == "user":
        nu, cumulant, name = load_levy_spec(config.levy_spec)
        fam = user_family(nu, cumulant=cumulant, name=name)
    else:
        fam = get_family(config.family)
    return fam.scaled(config.ell_scale)


# ---------------------------------------------------------------------------
# Commands; each returns (columns, rows)
# ---------------------------------------------------------------------------

def cmd_limit_table(config, family):
    curve = lt_limit_curve(family, config.theta0, config.u_grid, config.t_grid)
    cols = ["family", "theta0", "t", "u", "value", "target", "abs_error", "extrapolated_flag"]
    rows = [
        [family.name, config.theta0, t, u, v, tgt, abs(v - tgt), int(flag)]
        for t, u, v, tgt, flag in curve.rows()
    ]
    return cols, rows


def cmd_ks(config, family):
    reports = ks_convergence(family, config.theta0, config.t_grid, config.samples, config.seed)
    cols = ["family", "theta0", "t", "n", "seed", "ks"]
    return cols, [[family.name, config.theta0, r.t, r.n, config.seed, r.ks] for r in reports]


def cmd_estimate_ell(config, family):
    fit = estimate_ell(family.tail)
    known = family.levy.known_index
    cols = ["family", "ell", "residual", "window_lo", "window_hi", "known_index"]
    row = [family.name, fit.ell, fit.residual, fit.fit_window[0], fit.fit_window[1],
           math.nan if known is None else known]
    return cols, [row]


def cmd_sample(config, family):
    t = config.t_grid[0]
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    logs = sample_log(EdmModel(family, config.theta0, t), config.samples, rng)
    cols = ["t", "value", "log_value"]
    return cols, [[t, math.exp(v), v] for v in logs.tolist()]


def cmd_density(config, family):
    """``edm_density`` on the u-grid points (as x), then the density of
    ``U = Y^{-t}`` with the alternative closed form alongside (Bessel only)."""
    cols = ["kind", "family", "theta0", "t", "point", "density", "log_density", "printed_formula"]
    rows = []
    points = np.array(config.u_grid)
    for t in config.t_grid:
        lg = edm_log_density(EdmModel(family, config.theta0, t), points)
        rows += [["edm_density", family.name, config.theta0, t, p, math.exp(v), v, math.nan]
                 for p, v in zip(points.tolist(), lg.tolist())]
    if family.name.split("*")[0] == "bessel" and config.theta0 == 0:
        for t in config.t_grid:
            lg = log_density_u(t, points, family.scale)
            pr = log_density_u_printed(t, points, family.scale)
            rows += [["density_u", family.name, config.theta0, t, p, math.exp(v), v, math.exp(w)]
                     for p, v, w in zip(points.tolist(), lg.tolist(), pr.tolist())]
    return cols, rows


def cmd_approx_error(config, family):
    cols = ["family", "theta0", "t", "method", "n", "log_y", "y", "exact", "approx", "abs_error",
            "sup_cdf_error"]
    rows = []
    for t in config.t_grid:
        rep = approx_error(family, config.theta0, t, config.samples, seed=config.seed, u_grid=config.u_grid)
        for ly, ex, ap in zip(rep.log_grid, rep.exact, rep.approx):
            rows.append([family.name, config.theta0, t, rep.method, rep.n, ly, math.exp(ly), ex, ap,
                         abs(ex - ap), rep.sup_cdf_error])
    return cols, rows


COMMANDS = {
    "limit-table": cmd_limit_table,
    "ks": cmd_ks,
    "estimate-ell": cmd_estimate_ell,
    "sample": cmd_sample,
    "density": cmd_density,
    "approx-error": cmd_approx_error,
}


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def format_value(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else format(v, ".17g")
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    return v


def render(config, columns, rows):
    meta = {"tool": "edmlimit", "version": __version__, "config": config.echo(), "seed": config.seed}
    if config.format == "json":
        doc = dict(meta, columns=columns, rows=[[_json_value(v) for v in r] for r in rows])
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# edmlimit {__version__}\n")
    buf.write(f"# config: {json.dumps(config.echo(), sort_keys=True)}\n")
    buf.write(f"# seed: {config.seed}\n")
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(format_value(v) for v in r) + "\n")
    return buf.getvalue()


def build_parser():
    parser = argparse.ArgumentParser(prog="edmlimit", description="Small-dispersion Pareto limit diagnostics.")
    parser.add_argument("--version", action="version", version=f"edmlimit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--family", default="gamma", help="gamma | harmonic | bessel | user:FILE")
        p.add_argument("--theta0", type=float, default=0.0)
        p.add_argument("--ell-scale", type=float, default=1.0, help="use c * nu as Levy measure")
        p.add_argument("--t-grid", default=None, help="comma-separated, ascending")
        p.add_argument("--u-grid", default=None, help="comma-separated, ascending")
        p.add_argument("--samples", type=int, default=100_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        p.add_argument("--levy-spec", default=None, help="levy-spec file for --family user")
    return parser


def _fail(code, exc):
    msg = " ".join(str(exc).split()) or type(exc).__name__
    print(f"edmlimit: error: {type(exc).__name__}: {msg}", file=sys.stderr)
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = make_config(args)
        family = build_family(config)
        columns, rows = COMMANDS[config.command](config, family)
    except (NumericalError, TailNotLogRegularError, OverflowError) as exc:
        return _fail(EXIT_NUMERICAL, exc)
    except (ValueError, NotImplementedError, OSError) as exc:
        return _fail(EXIT_CONFIG, exc)
    text = render(config, columns, rows)
    if config.out:
        try:
            with open(config.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            return _fail(EXIT_CONFIG, exc)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
