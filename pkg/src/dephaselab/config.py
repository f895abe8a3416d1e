"""Structured run configuration shared by the command-line front end.

A configuration is a JSON object with the records

``spectral``
    ``{"type": "OhmicLike", "alpha", "omega_s", "amplitude", "omega_g",
    "omega_M"}``, ``{"type": "DiscreteModes", "modes": [[g2, omega], ...]}``
    (``g2`` is the delta weight of ``J``) or ``{"type": "Tabulated",
    "samples": [[omega, J], ...]}``.
``context``
    Ratio form ``{"omega0_over_T", "omega_s_over_T"}`` or absolute form
    ``{"temperature", "omega0", "unit"}``; exactly one of the two.
``scheme``
    Angles ``theta0 ... zeta2`` (or ``delta_zeta`` in place of the two
    azimuths), or ``q`` with one of ``theta1``/``theta2`` and a ``branch``
    flag, or ``family`` naming an extremal-velocity family.
``curves``
    Optional list of scheme overrides, one output curve each; a ``null``
    value removes the inherited key.
``time``
    ``{"t_max", "points"}`` or ``{"times": [...]}`` in units of ``1/omega_s``.
``sweep``
    Up to two axes ``{"name": {"range": [lo, hi], "points": n, "exclude":
    ["lo", "hi"]}}``.
``fock``
    ``{"modes": [[g, omega], ...], "n_max", "dim_cap", "times"}`` for the
    exact-diagonalization oracle (``g`` is the Hamiltonian coupling).

Numbers may be given as JSON numbers or as strings such as ``"pi/8"``,
``"9*pi/10"`` or ``"1/100"``.  The string ``"Q"`` for ``q`` selects the
critical ratio.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ConfigError, DegenerateSchemeError, DomainError
from .scheme import MeasurementScheme, SchemeTag, q_critical
from .shorttime import build_extremal_scheme
from .spectral import DiscreteModes, Gapped, OhmicLike, Tabulated, ThermalContext

SWEEP_AXES = ("theta0", "delta_zeta", "omega0_over_T", "theta1", "theta2",
              "sin_theta1", "sin_theta2")
SCHEME_KEYS = ("theta0", "zeta0", "theta1", "zeta1", "theta2", "zeta2", "delta_zeta",
               "q", "branch", "family", "label")

_PI_EXPR = re.compile(r"^\s*(-)?\s*(\d+(?:\.\d*)?)?\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


def parse_number(value, name="value"):
    """Float from a JSON number or a string like ``"pi/8"``, ``"3*pi/4"``, ``"1/100"``."""
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        text = value.strip()
        if text in ("inf", "+inf", "infinity"):
            return math.inf
        m = _PI_EXPR.match(text)
        if m:
            sign = -1.0 if m.group(1) else 1.0
            num = float(m.group(2)) if m.group(2) else 1.0
            den = float(m.group(3)) if m.group(3) else 1.0
            return sign * num * math.pi / den
        try:
            return float(Fraction(text))
        except (ValueError, ZeroDivisionError):
            pass
    raise ConfigError(f"{name}: cannot parse {value!r} as a number")


def _opt_number(rec, key, default=None):
    val = rec.get(key)
    return default if val is None else parse_number(val, key)


def _check_keys(rec, allowed, where):
    if not isinstance(rec, dict):
        raise ConfigError(f"{where} must be an object")
    extra = set(rec) - set(allowed)
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")


# --- records -------------------------------------------------------------------

def parse_density(rec):
    """Spectral density from its configuration record."""
    _check_keys(rec, ("type", "alpha", "omega_s", "amplitude", "omega_g", "omega_M",
                      "modes", "samples"), "spectral")
    kind = rec.get("type", "OhmicLike")
    try:
        if kind in ("OhmicLike", "Gapped"):
            base = OhmicLike(alpha=_opt_number(rec, "alpha", 0.5),
                             omega_s=_opt_number(rec, "omega_s", 1.0),
                             amplitude=_opt_number(rec, "amplitude"),
                             omega_M=_opt_number(rec, "omega_M", math.inf))
            gap = _opt_number(rec, "omega_g", 0.0)
            return Gapped(base, gap) if gap > 0 or kind == "Gapped" else base
        if kind == "DiscreteModes":
            modes = [[parse_number(a, "g2"), parse_number(b, "omega")]
                     for a, b in rec.get("modes", [])]
            if not modes:
                raise ConfigError("DiscreteModes needs a non-empty 'modes' list")
            return DiscreteModes.from_modes(modes, _opt_number(rec, "omega_s"))
        if kind == "Tabulated":
            samples = np.asarray(rec.get("samples", []), dtype=float)
            if samples.ndim != 2 or samples.shape[1] != 2:
                raise ConfigError("Tabulated needs 'samples' as [[omega, J], ...]")
            return Tabulated(samples[:, 0], samples[:, 1],
                             omega_s=_opt_number(rec, "omega_s", 1.0),
                             omega_g=_opt_number(rec, "omega_g"),
                             omega_M=_opt_number(rec, "omega_M"))
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"spectral: {exc}") from exc
    raise ConfigError(f"spectral: unknown type {kind!r}")


def parse_context(rec, omega_s=1.0):
    """Thermal context from ratio or absolute form (exactly one)."""
    _check_keys(rec, ("omega0_over_T", "omega_s_over_T", "temperature", "omega0", "unit"),
                "context")
    ratio = "omega0_over_T" in rec or "omega_s_over_T" in rec
    absolute = "temperature" in rec or "omega0" in rec
    if ratio == absolute:
        raise ConfigError("context: give exactly one of the ratio form "
                          "(omega0_over_T, omega_s_over_T) or the absolute form "
                          "(temperature, omega0)")
    try:
        if ratio:
            if "omega0_over_T" not in rec or "omega_s_over_T" not in rec:
                raise ConfigError("context: ratio form needs omega0_over_T and omega_s_over_T")
            return ThermalContext.from_ratios(parse_number(rec["omega0_over_T"], "omega0_over_T"),
                                              parse_number(rec["omega_s_over_T"], "omega_s_over_T"),
                                              omega_s)
        if "temperature" not in rec or "omega0" not in rec:
            raise ConfigError("context: absolute form needs temperature and omega0")
        return ThermalContext(parse_number(rec["temperature"], "temperature"),
                              parse_number(rec["omega0"], "omega0"))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"context: {exc}") from exc


def _branch(rec):
    b = rec.get("branch", "acute")
    if b not in ("acute", "obtuse"):
        raise ConfigError(f"scheme: branch must be 'acute' or 'obtuse', got {b!r}")
    return b == "obtuse"


def resolve_q(value, x, theta0):
    if isinstance(value, str) and value.strip() == "Q":
        return q_critical(x, theta0)
    return parse_number(value, "q")


def parse_scheme(rec, ctx):
    """Measurement scheme from its record; see the module docstring."""
    _check_keys(rec, SCHEME_KEYS, "scheme")
    try:
        theta0 = parse_number(rec["theta0"], "theta0")
    except KeyError:
        raise ConfigError("scheme: theta0 is required") from None
    zeta0 = _opt_number(rec, "zeta0", 0.0)
    try:
        if "family" in rec:
            try:
                family = SchemeTag(rec["family"])
            except ValueError:
                raise ConfigError(f"scheme: unknown family {rec['family']!r}") from None
            dz = _opt_number(rec, "delta_zeta")
            return build_extremal_scheme(family, ctx, theta0, dz, obtuse=_branch(rec),
                                         zeta0=zeta0)
        if "q" in rec:
            q = resolve_q(rec["q"], ctx.x, theta0)
            dz = _delta_zeta(rec)
            if ("theta1" in rec) == ("theta2" in rec):
                raise ConfigError("scheme: q needs exactly one of theta1, theta2")
            if "theta2" in rec:
                return MeasurementScheme.from_q(theta0, q, parse_number(rec["theta2"], "theta2"),
                                                dz, _branch(rec), zeta0)
            theta1 = parse_number(rec["theta1"], "theta1")
            s2 = math.sin(theta1) / q if q != 0 else math.inf
            if not 0.0 <= s2 <= 1.0 + 1e-15:
                raise ConfigError(f"scheme: sin(theta1)/q = {s2} outside [0, 1]")
            theta2 = math.asin(min(s2, 1.0))
            if _branch(rec):
                theta2 = math.pi - theta2
            return MeasurementScheme.from_delta_zeta(theta0, theta1, theta2, dz, zeta0)
        for key in ("theta1", "theta2"):
            if key not in rec:
                raise ConfigError(f"scheme: {key} is required")
        th1 = parse_number(rec["theta1"], "theta1")
        th2 = parse_number(rec["theta2"], "theta2")
        if "delta_zeta" in rec:
            return MeasurementScheme.from_delta_zeta(theta0, th1, th2, _delta_zeta(rec), zeta0)
        return MeasurementScheme(theta0, zeta0, th1, _opt_number(rec, "zeta1", 0.0),
                                 th2, _opt_number(rec, "zeta2", 0.0))
    except (DomainError, DegenerateSchemeError) as exc:
        raise ConfigError(f"scheme: {exc}") from exc


def _delta_zeta(rec):
    if "delta_zeta" in rec:
        if "zeta1" in rec or "zeta2" in rec:
            raise ConfigError("scheme: give delta_zeta or zeta1/zeta2, not both")
        return parse_number(rec["delta_zeta"], "delta_zeta")
    return _opt_number(rec, "zeta1", 0.0) - _opt_number(rec, "zeta2", 0.0)


def _snap_pi(values):
    """Replace values within 1e-12 of a multiple of pi/2 by that multiple."""
    k = np.round(values / (math.pi / 2.0))
    exact = k * (math.pi / 2.0)
    return np.where(np.abs(values - exact) < 1e-12, exact, values)


def parse_axis(name, rec, points=None):
    """Sample points of one sweep axis."""
    if name not in SWEEP_AXES:
        raise ConfigError(f"sweep: unknown axis {name!r}; choose from {SWEEP_AXES}")
    _check_keys(rec, ("range", "points", "exclude", "values"), f"sweep.{name}")
    if "values" in rec:
        vals = np.array([parse_number(v, name) for v in rec["values"]])
    else:
        try:
            lo, hi = (parse_number(v, name) for v in rec["range"])
        except (KeyError, ValueError, TypeError):
            raise ConfigError(f"sweep.{name}: range must be [lo, hi]") from None
        n = int(points if points is not None else rec.get("points", 101))
        exclude = set(rec.get("exclude", []))
        if not exclude <= {"lo", "hi"}:
            raise ConfigError(f"sweep.{name}: exclude takes 'lo' and/or 'hi'")
        if n < 1 or not hi >= lo:
            raise ConfigError(f"sweep.{name}: need points >= 1 and hi >= lo")
        total = n + len(exclude)
        vals = np.linspace(lo, hi, total) if total > 1 else np.array([lo])
        if "lo" in exclude:
            vals = vals[1:]
        if "hi" in exclude:
            vals = vals[:-1]
    if name in ("theta0", "delta_zeta", "theta1", "theta2"):
        vals = _snap_pi(vals)
    return vals


def parse_times(rec, omega_s, points=None):
    """Time grid (absolute units) from ``{"t_max", "points"}`` or ``{"times"}``.

    ``points`` overrides the number of samples of the ``t_max`` form.
    """
    _check_keys(rec, ("t_max", "points", "times"), "time")
    if "times" in rec:
        ts = np.array([parse_number(t, "times") for t in rec["times"]], dtype=float)
    elif "t_max" in rec:
        n = int(points if points is not None else rec.get("points", 601))
        ts = np.linspace(0.0, parse_number(rec["t_max"], "t_max"), n)
    else:
        raise ConfigError("time: give t_max (and points) or times")
    if ts.size == 0 or ts[0] != 0.0 or np.any(np.diff(ts) <= 0):
        raise ConfigError("time: grid must start at 0 and be strictly increasing")
    return ts / omega_s


@dataclass
class RunConfig:
    """Parsed configuration with the raw record kept for provenance."""

    raw: dict
    density: object = None
    context: object = None
    scheme_record: dict = field(default_factory=dict)
    curves: list = field(default_factory=lambda: [{}])

    @classmethod
    def from_dict(cls, raw):
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a JSON object")
        _check_keys(raw, ("figure", "command", "description", "spectral", "context", "scheme",
                          "curves", "time", "sweep", "fock", "grid", "tol", "theta0",
                          "value", "scan_eps"), "config")
        if "spectral" not in raw and isinstance(raw.get("fock"), dict):
            # the oracle environment defines the density (weights 4 |g|^2)
            modes = raw["fock"].get("modes") or []
            try:
                g = [parse_number(m[0], "g") for m in modes]
                w = [parse_number(m[1], "omega") for m in modes]
                density = DiscreteModes.from_couplings(np.array(g), np.array(w))
            except (ValueError, IndexError, TypeError) as exc:
                raise ConfigError(f"fock: {exc}") from exc
        else:
            density = parse_density(raw.get("spectral", {}))
        context = None
        if "context" in raw:
            context = parse_context(raw["context"], density.omega_s)
        curves = raw.get("curves") or [{}]
        if not isinstance(curves, list) or not all(isinstance(c, dict) for c in curves):
            raise ConfigError("curves must be a list of objects")
        return cls(raw, density, context, dict(raw.get("scheme", {})), curves)

    @classmethod
    def from_file(cls, path):
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw)

    def require_context(self):
        if self.context is None:
            raise ConfigError("config: context record is required")
        return self.context

    def curve_records(self):
        """Scheme record of every curve (base record updated by the overrides)."""
        out = []
        for cur in self.curves:
            rec = dict(self.scheme_record)
            # under q only one polar angle is free, so an override replaces the other
            if "q" in rec or "q" in cur:
                for key, other in (("theta1", "theta2"), ("theta2", "theta1")):
                    if key in cur and other not in cur:
                        rec.pop(other, None)
            rec.update(cur)
            # a null override removes the key inherited from the base record
            out.append({k: v for k, v in rec.items() if v is not None})
        return out

    def schemes(self):
        ctx = self.require_context()
        return [parse_scheme({k: v for k, v in rec.items() if k != "label"}, ctx)
                for rec in self.curve_records()]

    def times(self, points=None):
        if "time" not in self.raw:
            raise ConfigError("config: time record is required")
        return parse_times(self.raw["time"], self.density.omega_s, points)

    def sweep_axes(self, grid=None):
        rec = self.raw.get("sweep", {})
        if not isinstance(rec, dict) or len(rec) > 2:
            raise ConfigError("sweep: at most two axes")
        names = list(rec)
        if grid is not None and len(grid) not in (1, len(names)) and names:
            raise ConfigError("--grid needs one resolution or one per sweep axis")
        axes = {}
        for i, name in enumerate(names):
            pts = None if grid is None else (grid[0] if len(grid) == 1 else grid[i])
            axes[name] = parse_axis(name, rec[name], pts)
        return axes
