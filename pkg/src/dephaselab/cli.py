"""Command-line front end.

Subcommands ``evolve``, ``initial``, ``velocity``, ``extrema``, ``classify``
and ``oracle`` read a JSON configuration (``--config``) or a figure preset
(``--figure N``) and write CSV or JSON to ``--out`` (default stdout).

Exit codes: 0 success, 2 configuration error, 3 numerical divergence,
4 oracle disagreement beyond tolerance.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings

import numpy as np

from . import __version__
from .config import RunConfig, parse_number, parse_scheme
from .dynamics import compute_trajectory, continuous_coherence, format_csv, resolve_threads
from .errors import (
    ConfigError,
    DivergenceError,
    OracleDisagreement,
    SingularityError,
    TruncationWarning,
    UnsupportedSpectrumError,
)
from .oracle import FockOracleConfig, compare_with_analytic, search_velocity_extrema
from .presets import FIGURE_COMMANDS, figure_config
from .scheme import (
    classify,
    coherence_magnitude,
    initial_coherence,
    velocity_ratio_grid,
)
from .shorttime import transition_scan, velocity_extrema
from .spectral import ThermalContext, moment

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_ORACLE = 0, 2, 3, 4
COMMANDS = ("evolve", "initial", "velocity", "extrema", "classify", "oracle")


# --- helpers ---------------------------------------------------------------------

def _emit(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _finite(val):
    """JSON has no infinities; encode them as strings."""
    if isinstance(val, float) and not math.isfinite(val):
        return str(val)
    return val


def _parse_grid(text):
    if text is None:
        return None
    try:
        grid = tuple(int(g) for g in text.split(","))
    except ValueError:
        raise ConfigError(f"--grid expects N[,N[,N]], got {text!r}") from None
    if not 1 <= len(grid) <= 3 or min(grid) < 1:
        raise ConfigError(f"--grid expects one to three positive integers, got {text!r}")
    return grid


def load_config(args):
    """Configuration from ``--config`` or ``--figure``; exactly one is required."""
    if (args.config is None) == (args.figure is None):
        raise ConfigError("give exactly one of --config and --figure")
    if args.figure is not None:
        try:
            raw = figure_config(args.figure)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
        if FIGURE_COMMANDS[raw["figure"]] != args.command:
            raise ConfigError(f"figure {raw['figure']} is a '{FIGURE_COMMANDS[raw['figure']]}' "
                              f"preset, not '{args.command}'")
        return RunConfig.from_dict(raw)
    return RunConfig.from_file(args.config)


def _tol(args, cfg, default):
    if args.tol is not None:
        return args.tol
    if "tol" in cfg.raw:
        return parse_number(cfg.raw["tol"], "tol")
    return default


def _curve_label(rec, index):
    return rec.get("label", str(index))


# --- evolve ----------------------------------------------------------------------

def cmd_evolve(cfg, args):
    """Trajectories of every curve, long format with a curve index column."""
    ctx = cfg.require_context()
    if args.grid is not None and len(args.grid) != 1:
        raise ConfigError("evolve takes a single --grid value (time points)")
    times = cfg.times(None if args.grid is None else args.grid[0])
    rtol = _tol(args, cfg, 1e-8)
    threads = resolve_threads(args.threads)
    header, blocks = None, []
    for i, (rec, s) in enumerate(zip(cfg.curve_records(), cfg.schemes())):
        traj = compute_trajectory(s, cfg.density, ctx, times, threads=threads, rtol=rtol)
        if np.all(traj.values == 0):
            print(f"warning: curve {_curve_label(rec, i)} has identically vanishing "
                  "coherence; zero_flag set", file=sys.stderr)
        rows = traj.rows(normalized=True)
        lead = np.column_stack([np.full(len(rows), float(i)),
                                np.full(len(rows), s.delta_zeta)])
        blocks.append(np.hstack([lead, rows]))
        header = ["curve", "delta_zeta"] + traj.header(normalized=True)
    return format_csv(header, np.vstack(blocks))


# --- sweeps ----------------------------------------------------------------------

def _cell_records(rec, axes):
    """Scheme record and ``omega0/T`` for every cell of the sweep grid."""
    names = list(axes)
    grids = np.meshgrid(*[axes[n] for n in names], indexing="ij") if names else []
    flat = [g.ravel() for g in grids]
    n = flat[0].size if flat else 1
    for k in range(n):
        cell = dict(rec)
        x_override = None
        for name, vals in zip(names, flat):
            val = float(vals[k])
            if name == "omega0_over_T":
                x_override = val
            elif name in ("sin_theta1", "sin_theta2"):
                key = "theta1" if name == "sin_theta1" else "theta2"
                cell[key] = math.asin(min(max(val, 0.0), 1.0))
            else:
                cell[name] = val
        yield [float(vals[k]) for vals in flat], cell, x_override


def _sweep(cfg, args, kind):
    ctx = cfg.require_context()
    axes = cfg.sweep_axes(args.grid)
    names = list(axes)
    value_name = "abs_rho0" if kind == "initial" else "V_over_eta"
    rows = []
    for i, rec in enumerate(cfg.curve_records()):
        rec = {k: v for k, v in rec.items() if k != "label"}
        cols, params = [], []
        for coords, cell, x_over in _cell_records(rec, axes):
            cctx = ctx if x_over is None else ThermalContext(ctx.temperature,
                                                              x_over * ctx.temperature)
            s = parse_scheme(cell, cctx)
            params.append((s.theta0, s.u, s.v, s.delta_zeta, cctx.x))
            cols.append(coords)
        th0, u, v, dz, x = (np.array(c) for c in zip(*params))
        if kind == "initial":
            vals = coherence_magnitude(th0, u, v, dz, x)
        else:
            vals = velocity_ratio_grid(th0, u, v, dz, x)
        for coords, val in zip(cols, vals):
            rows.append([float(i)] + coords + [float(val)])
    return format_csv(["curve"] + names + [value_name], rows)


def cmd_initial(cfg, args):
    return _sweep(cfg, args, "initial")


def cmd_velocity(cfg, args):
    return _sweep(cfg, args, "velocity")


# --- extrema ---------------------------------------------------------------------

def _theta0(cfg):
    if "theta0" in cfg.raw:
        return parse_number(cfg.raw["theta0"], "theta0")
    if "theta0" in cfg.scheme_record:
        return parse_number(cfg.scheme_record["theta0"], "theta0")
    raise ConfigError("extrema: theta0 is required")


def cmd_extrema(cfg, args):
    """Analytic extremal velocities against the refined grid search."""
    ctx = cfg.require_context()
    theta0 = _theta0(cfg)
    tol = _tol(args, cfg, 1e-4)
    grid = args.grid or tuple(np.atleast_1d(cfg.raw.get("grid", 64)).tolist())
    eta = moment(cfg.density, None, -1, True)
    ext = velocity_extrema(ctx, theta0, eta_m1_0=eta)
    hi, lo = search_velocity_extrema(ctx, theta0, grid=grid)
    discrepancy = max(abs(hi.best_value - ext.ratio), abs(lo.best_value + ext.ratio))
    eps = cfg.raw.get("scan_eps", [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
    scans = {}
    if not ext.zero_velocity:
        for branch, key in ((1, "plus_pi"), (-1, "minus_pi")):
            sc = transition_scan(ctx, theta0, eps_grid=eps, branch=branch, eta_m1_0=eta)
            scans[key] = {"delta_zeta": sc.delta_zeta, "V_over_eta": sc.ratio,
                          "scheme_axis": sc.scheme_axis}
    report = {
        "inputs": cfg.raw,
        "x": _finite(ctx.x),
        "theta0": theta0,
        "eta_m1_0": eta,
        "analytic": {"v_max": ext.v_max, "v_min": ext.v_min, "ratio": ext.ratio,
                     "phi": ext.phi, "zero_velocity": ext.zero_velocity,
                     "max_families": [f.value for f in ext.max_families],
                     "min_families": [f.value for f in ext.min_families]},
        "oracle": {"max": hi.to_dict(), "min": lo.to_dict()},
        "discrepancy_over_eta": discrepancy,
        "tolerance_over_eta": tol,
        "transition_scan": scans,
    }
    text = _json(report)
    if discrepancy > tol:
        raise OracleDisagreement(f"grid search and analytic extrema differ by "
                                 f"{discrepancy:.3e} eta_(-1,0) > {tol:.1e}", text)
    return text


# --- classify --------------------------------------------------------------------

def cmd_classify(cfg, args):
    ctx = cfg.require_context()
    tol = _tol(args, cfg, 1e-6)
    out = []
    for i, (rec, s) in enumerate(zip(cfg.curve_records(), cfg.schemes())):
        cls = classify(s, ctx, tol)
        rho0 = initial_coherence(s, ctx)
        vel = velocity_ratio_grid(s.theta0, s.u, s.v, s.delta_zeta, ctx.x)
        out.append({"label": _curve_label(rec, i), "tag": cls.tag.value, "tol": tol,
                    "scheme": s.as_dict(), "delta_zeta": s.delta_zeta,
                    "abs_rho0": abs(rho0), "V_over_eta": float(vel)})
    return _json({"inputs": cfg.raw, "x": _finite(ctx.x), "schemes": out})


# --- oracle ----------------------------------------------------------------------

def _fock_setup(cfg):
    rec = cfg.raw.get("fock")
    if not isinstance(rec, dict) or "modes" not in rec:
        raise ConfigError("oracle: fock record with modes is required")
    modes = tuple((parse_number(g, "g"), parse_number(w, "omega")) for g, w in rec["modes"])
    n_max = int(rec.get("n_max", 12))
    dim_cap = int(rec.get("dim_cap", 20000))
    max_n = int(rec.get("max_n", 64))
    return modes, n_max, dim_cap, max_n


def cmd_oracle(cfg, args):
    """Exact diagonalization against the closed-form coherence."""
    ctx = cfg.require_context()
    tol = _tol(args, cfg, 1e-6)
    modes, n_max, dim_cap, max_n = _fock_setup(cfg)
    times = cfg.times()
    reports, worst = [], 0.0
    for i, (rec, s) in enumerate(zip(cfg.curve_records(), cfg.schemes())):
        fock = FockOracleConfig(modes, n_max, ctx, s, dim_cap)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            comp = compare_with_analytic(fock, times, tol=1e-7, max_n=max_n)
        J = fock.spectral_density()
        cont = np.array([continuous_coherence(s, J, ctx, t) for t in comp.times])
        d = comp.to_dict()
        d["label"] = _curve_label(rec, i)
        d["continuous_max_deviation"] = float(np.max(np.abs(cont - comp.oracle)))
        d["abs_rho0_oracle"] = float(abs(comp.oracle[0])) if comp.times[0] == 0 else None
        reports.append(d)
        worst = max(worst, comp.max_deviation)
    text = _json({"inputs": cfg.raw, "tolerance": tol, "max_deviation": worst,
                  "schemes": reports})
    if worst > tol:
        raise OracleDisagreement(f"oracle and analytic coherence differ by {worst:.3e} "
                                 f"> {tol:.1e}", text)
    return text


HANDLERS = {"evolve": cmd_evolve, "initial": cmd_initial, "velocity": cmd_velocity,
            "extrema": cmd_extrema, "classify": cmd_classify, "oracle": cmd_oracle}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dephaselab",
        description="Coherence of a dephasing qubit after a nonselective preparation "
                    "measurement.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=(HANDLERS[name].__doc__ or name).splitlines()[0])
        p.add_argument("--config", metavar="PATH", help="JSON configuration file")
        p.add_argument("--figure", metavar="N", type=int, help="figure preset (1-7)")
        p.add_argument("--out", metavar="PATH", help="output file (default stdout)")
        p.add_argument("--tol", type=float, help="command tolerance")
        p.add_argument("--grid", metavar="N[,N[,N]]", help="grid or sweep resolution")
        p.add_argument("--threads", type=int, help="worker threads (or DEPHASELAB_THREADS)")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.grid = _parse_grid(args.grid)
        cfg = load_config(args)
        text = HANDLERS[args.command](cfg, args)
    except OracleDisagreement as exc:
        if len(exc.args) > 1:
            _emit(exc.args[1], args.out)
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_ORACLE
    except (DivergenceError, SingularityError, UnsupportedSpectrumError) as exc:
        print(f"error: numerical divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (ConfigError, ValueError, KeyError, TypeError) as exc:
        print(f"error: configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _emit(text, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
