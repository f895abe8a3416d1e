"""Brute-force cross-checks of the closed-form results.

Three independent routes are provided:

* refined grid searches of the initial coherence and of the initial
  velocity over the scheme box ``(u, v, dzeta) in [0,1] x [0,1] x (-2pi, 2pi)``
  with ``u = sin(theta1)``, ``v = sin(theta2)``;
* finite-difference derivatives of sampled coherence magnitudes;
* exact diagonalization of the qubit coupled to a few bosonic modes in a
  truncated Fock space, preparing the state by the two measurement operators
  applied to the full thermal state and evolving it unitarily.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import linalg

from .dynamics import CoherenceTrajectory, coherence
from .errors import ConfigError, OracleDisagreement, TruncationWarning
from .scheme import (
    TWO_PI,
    MeasurementScheme,
    _x_of,
    coherence_magnitude,
    q_critical,
    velocity_ratio_grid,
)
from .spectral import DiscreteModes, ThermalContext

DEFAULT_EXCLUSION_TOL = 1e-6


# --- grid search ---------------------------------------------------------------

@dataclass
class GridSearchReport:
    """Outcome of a refined grid search over ``(u, v, dzeta)``.

    ``history`` holds one entry per round with the incumbent and the box that
    was sampled; ``best_value`` never decreases from round to round.
    """

    objective: str
    sense: str
    grid_shape: tuple
    best_point: tuple
    best_value: float
    history: list
    excluded: dict
    inputs: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        d["grid_shape"] = list(self.grid_shape)
        d["best_point"] = list(self.best_point)
        return d

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


_FULL_BOX = ((0.0, 1.0), (0.0, 1.0), (-TWO_PI, TWO_PI))


def _axis(lo, hi, n, open_ends):
    if open_ends:
        # cell centres keep the open ends of the azimuthal range out of the grid
        h = (hi - lo) / n
        return lo + h * (np.arange(n) + 0.5)
    return np.linspace(lo, hi, n)


def _excluded_mask(U, V, D, Q, tol):
    s0 = (U <= tol) & (V <= tol)
    near_pi = np.minimum(np.abs(D - math.pi), np.abs(D + math.pi)) <= tol
    s1 = near_pi & (np.abs(U - Q * V) <= tol)
    return s0 | s1


def _pick(values, mask, D, sense):
    """Index of the best admissible value; ties prefer the smallest ``|dzeta|``."""
    vals = np.where(mask, np.nan, values)
    if sense == "min":
        vals = -vals
    best = np.nanmax(vals)
    ties = np.flatnonzero(vals.ravel() >= best - 1e-15 * max(1.0, abs(best)))
    k = ties[np.argmin(np.abs(D.ravel()[ties]))]
    return np.unravel_index(k, values.shape), (best if sense == "max" else -best)


def _grid_search(objective, name, sense, grid, Q, tol, rounds, shrink, extra_dz, inputs):
    n_u, n_v, n_d = grid
    if min(grid) < 32:
        raise ConfigError("grid searches need at least 32 points per axis")
    box = _FULL_BOX
    best_val, best_pt, history = None, None, []
    for rnd in range(rounds + 1):
        us = _axis(*box[0], n_u, False)
        vs = _axis(*box[1], n_v, False)
        ds = _axis(*box[2], n_d, rnd == 0)
        extra = [d for d in extra_dz if box[2][0] < d < box[2][1]]
        if extra:
            ds = np.unique(np.concatenate([ds, extra]))
        U, V, D = np.meshgrid(us, vs, ds, indexing="ij")
        vals = objective(U, V, D)
        mask = _excluded_mask(U, V, D, Q, tol)
        idx, val = _pick(vals, mask, D, sense)
        pt = (float(U[idx]), float(V[idx]), float(D[idx]))
        better = best_val is None or (val > best_val if sense == "max" else val < best_val)
        if better:
            best_val, best_pt = float(val), pt
        history.append({"round": rnd, "box": [list(b) for b in box],
                        "best_point": list(best_pt), "best_value": best_val})
        # shrink the box around the incumbent
        widths = [(b[1] - b[0]) / shrink for b in box]
        new = []
        for (lo, hi), w, c in zip(_FULL_BOX, widths, best_pt):
            a, b = c - w / 2.0, c + w / 2.0
            if a < lo:
                a, b = lo, lo + w
            if b > hi:
                a, b = hi - w, hi
            new.append((a, b))
        # keep the azimuthal box inside the open interval
        lo, hi = new[2]
        eps = 1e-12
        new[2] = (max(lo, -TWO_PI + eps), min(hi, TWO_PI - eps))
        box = tuple(new)
    excluded = {"S0": "u = v = 0", "S1": "|u - Q v| <= tol and |dzeta -+ pi| <= tol",
                "tol": tol, "Q": Q}
    return GridSearchReport(name, sense, tuple(grid), best_pt, best_val, history,
                            excluded, inputs)


def _grid_tuple(grid):
    if isinstance(grid, int):
        return (grid, grid, grid)
    grid = tuple(int(g) for g in grid)
    if len(grid) == 1:
        return grid * 3
    if len(grid) != 3:
        raise ConfigError("grid must have one or three resolutions")
    return grid


def search_initial_coherence_max(ctx, theta0, grid=64, *, rounds=3, shrink=8,
                                 exclusion_tol=DEFAULT_EXCLUSION_TOL):
    """Refined grid search for the maximum of ``|rho01(0)|^2``.

    The global maximum is ``1/4`` at ``u = v = 1``, ``dzeta = 0``.
    """
    x = _x_of(ctx)
    grid = _grid_tuple(grid)
    Q = q_critical(x, theta0)

    def objective(U, V, D):
        return coherence_magnitude(theta0, U, V, D, x) ** 2

    inputs = {"x": x, "theta0": theta0, "rounds": rounds, "shrink": shrink}
    return _grid_search(objective, "initial_coherence_squared", "max", grid, Q,
                        exclusion_tol, rounds, shrink, (), inputs)


def search_velocity_extrema(ctx, theta0, J=None, grid=64, *, rounds=3, shrink=8,
                            exclusion_tol=DEFAULT_EXCLUSION_TOL):
    """Refined grid searches for the maximum and minimum of ``V / eta_{-1,0}``.

    Points within ``exclusion_tol`` of the singular set (``u = Q v`` at
    ``dzeta = +-pi``) are excluded; the azimuthal axis additionally samples
    both sides of ``+-pi`` just outside the exclusion band.

    Returns
    -------
    (GridSearchReport, GridSearchReport)
        Maximum and minimum reports.  ``J`` is only used to record
        ``eta_{-1,0}`` in the report inputs.
    """
    x = _x_of(ctx)
    grid = _grid_tuple(grid)
    Q = q_critical(x, theta0)

    def objective(U, V, D):
        return velocity_ratio_grid(theta0, U, V, D, x)

    side = 10.0 * exclusion_tol
    extra = [c + sgn * side for c in (math.pi, -math.pi) for sgn in (1, -1)]
    inputs = {"x": x, "theta0": theta0, "rounds": rounds, "shrink": shrink}
    if J is not None:
        from .spectral import moment
        inputs["eta_m1_0"] = moment(J, None, -1, True)
    hi = _grid_search(objective, "velocity_over_eta", "max", grid, Q, exclusion_tol,
                      rounds, shrink, extra, inputs)
    lo = _grid_search(objective, "velocity_over_eta", "min", grid, Q, exclusion_tol,
                      rounds, shrink, extra, inputs)
    return hi, lo


# --- finite differences --------------------------------------------------------

@dataclass(frozen=True)
class DerivativeEstimate:
    value: float
    method: str
    error_estimate: float
    note: str = ""


def finite_difference_velocity(sampler, t0, h):
    """Time derivative of a sampled magnitude by Richardson-extrapolated differences.

    Uses centered differences with steps ``h`` and ``h/2``.  If ``t0 - h < 0``
    it falls back to one-sided forward differences, whose leading error is
    of order ``h`` before extrapolation.

    Parameters
    ----------
    sampler : callable
        ``t -> |rho01(t)|``.
    t0, h : float
    """
    if not h > 0:
        raise ValueError("h must be positive")
    if t0 - h >= 0:
        d1 = (sampler(t0 + h) - sampler(t0 - h)) / (2.0 * h)
        d2 = (sampler(t0 + h / 2) - sampler(t0 - h / 2)) / h
        val = (4.0 * d2 - d1) / 3.0
        return DerivativeEstimate(val, "centered-richardson", abs(val - d2))
    f0 = sampler(t0)
    d1 = (sampler(t0 + h) - f0) / h
    d2 = (sampler(t0 + h / 2) - f0) / (h / 2)
    val = 2.0 * d2 - d1
    return DerivativeEstimate(val, "forward-richardson", abs(val - d2),
                              "t0 - h < 0: one-sided differences, O(h) before extrapolation")


# --- exact diagonalization ------------------------------------------------------

def bloch_ket(theta, zeta):
    """``exp(-i zeta/2) cos(theta/2)|1> + exp(i zeta/2) sin(theta/2)|0>`` as ``[<0|, <1|]``."""
    return np.array([np.exp(0.5j * zeta) * np.sin(theta / 2.0),
                     np.exp(-0.5j * zeta) * np.cos(theta / 2.0)])


@dataclass(frozen=True)
class FockOracleConfig:
    """Qubit plus a few bosonic modes truncated at ``n_max`` quanta each.

    ``modes`` holds ``(g, omega)`` pairs with the Hamiltonian coupling
    ``sigma_z (g b^+ + g^* b)``.
    """

    modes: tuple
    n_max: int
    ctx: ThermalContext
    scheme: MeasurementScheme
    dim_cap: int = 20000

    def __post_init__(self):
        modes = tuple((complex(g), float(w)) for g, w in self.modes)
        object.__setattr__(self, "modes", modes)
        if not modes:
            raise ConfigError("need at least one mode")
        if any(w <= 0 for _, w in modes):
            raise ConfigError("mode frequencies must be positive")
        if self.n_max < 1:
            raise ConfigError("n_max must be at least 1")
        if self.dimension > self.dim_cap:
            raise ConfigError(f"Hilbert dimension {self.dimension} exceeds cap {self.dim_cap}")
        if self.ctx.temperature <= 0:
            raise ConfigError("the thermal-state oracle needs T > 0")

    @property
    def dimension(self):
        return 2 * (self.n_max + 1) ** len(self.modes)

    def spectral_density(self):
        g = np.array([m[0] for m in self.modes])
        w = np.array([m[1] for m in self.modes])
        return DiscreteModes.from_couplings(g, w)

    def with_n_max(self, n_max):
        return FockOracleConfig(self.modes, n_max, self.ctx, self.scheme, self.dim_cap)


def _bath_operators(modes, n_max):
    nb = n_max + 1
    a = np.diag(np.sqrt(np.arange(1, nb, dtype=float)), 1)
    eye = np.eye(nb)

    def embed(op, k):
        out = np.array([[1.0]])
        for j in range(len(modes)):
            out = np.kron(out, op if j == k else eye)
        return out

    h_bath = sum(w * embed(a.T @ a, k) for k, (_, w) in enumerate(modes))
    coupling = sum(g * embed(a.T, k) + np.conj(g) * embed(a, k)
                   for k, (g, _) in enumerate(modes))
    return h_bath, coupling


def _truncation_check(cfg):
    T = cfg.ctx.temperature
    tails = []
    for g, w in cfg.modes:
        shift = abs(g / w) ** 2  # mean quanta added by the qubit-state displacement
        tail = math.exp(-(cfg.n_max + 1 - shift) * w / T) if cfg.n_max + 1 > shift else 1.0
        tails.append(tail)
    worst = max(tails)
    if worst >= 1e-8:
        warnings.warn(
            f"n_max = {cfg.n_max} leaves a thermal tail of {worst:.2e} "
            "(including displacement |g/omega|^2); increase n_max",
            TruncationWarning, stacklevel=3)
    return worst


def exact_diagonalization_coherence(cfg, times):
    """Coherence ``<0|rho_S(t)|1>`` from the truncated qubit-bath model.

    The Hamiltonian is block diagonal in the qubit basis, one block per
    ``sigma_z`` eigenvalue ``s``: ``H_s = s omega0/2 + s X + H_bath``.  The
    measured state ``sum_j O_j exp(-H/T) O_j^+ / Z`` is formed blockwise with
    ``O_1 = |n1><n0|``, ``O_2 = |n2><-n0|`` (times the bath identity) and
    evolved with the block eigendecompositions.

    Returns
    -------
    CoherenceTrajectory
        ``xi`` and ``upsilon`` are ``nan``; ``meta`` carries the diagnostics
        (trace error, minimum eigenvalue, population drift, Hermiticity
        error, thermal tail).
    """
    times = np.asarray(times, dtype=float)
    s = cfg.scheme
    T = cfg.ctx.temperature
    tail = _truncation_check(cfg)
    h_bath, X = _bath_operators(cfg.modes, cfg.n_max)
    half = 0.5 * cfg.ctx.omega0
    dim = h_bath.shape[0]
    eye = np.eye(dim)
    # index 0 <-> |0> (sigma_z = -1), index 1 <-> |1> (sigma_z = +1)
    blocks = [(-half) * eye - X + h_bath, half * eye + X + h_bath]
    eig = [linalg.eigh(hb) for hb in blocks]
    e_min = min(E.min() for E, _ in eig)
    gibbs = [(V * np.exp(-(E - e_min) / T)) @ V.conj().T for E, V in eig]
    Z = sum(np.trace(gb).real for gb in gibbs)

    n0 = bloch_ket(s.theta0, s.zeta0)
    m0 = bloch_ket(math.pi - s.theta0, s.zeta0 + math.pi)
    n1 = bloch_ket(s.theta1, s.zeta1)
    n2 = bloch_ket(s.theta2, s.zeta2)
    zero = np.zeros((dim, dim), dtype=complex)
    gibbs_blocks = [[gibbs[0], zero], [zero, gibbs[1]]]
    # (O M O^+)_{ik} = sum_{l,m} O_il M_lm conj(O_km), with O_il = a_i conj(b_l) * 1
    rho = [[zero.copy() for _ in range(2)] for _ in range(2)]
    for a_vec, b_vec in ((n1, n0), (n2, m0)):
        O = np.outer(a_vec, b_vec.conj())
        for i in range(2):
            for k in range(2):
                acc = zero.copy()
                for l in range(2):
                    for m in range(2):
                        coef = O[i, l] * np.conj(O[k, m])
                        if coef != 0:
                            acc += coef * gibbs_blocks[l][m]
                rho[i][k] += acc
    for i in range(2):
        for k in range(2):
            rho[i][k] /= Z

    full = np.block(rho)
    trace0 = np.trace(full).real
    herm0 = np.max(np.abs(full - full.conj().T))
    min_eig = float(linalg.eigvalsh(0.5 * (full + full.conj().T)).min())

    (E0, V0), (E1, V1) = eig
    # coherence(t) = Tr[exp(-iH_0 t) rho_01 exp(iH_1 t)]
    A = V0.conj().T @ rho[0][1] @ V1
    B = V1.conj().T @ V0
    W = A * B.T
    gap = E0[:, None] - E1[None, :]
    rho00 = V0.conj().T @ rho[0][0] @ V0
    rho11 = V1.conj().T @ rho[1][1] @ V1
    # Tr[V M V^+] = sum(M * (V^+ V)^T), which keeps the population check O(dim^2)
    G0 = (V0.conj().T @ V0).T
    G1 = (V1.conj().T @ V1).T
    p0_init = np.trace(rho[0][0]).real
    p1_init = np.trace(rho[1][1]).real

    values = np.empty(times.shape, dtype=complex)
    pops = np.empty((times.size, 2))
    red_herm, red_min = 0.0, math.inf
    for j, t in enumerate(times):
        values[j] = np.sum(W * np.exp(-1j * gap * t))
        # populations from the evolved diagonal blocks
        ph0 = np.exp(-1j * E0 * t)
        ph1 = np.exp(-1j * E1 * t)
        r00 = (ph0[:, None] * rho00) * ph0.conj()[None, :]
        r11 = (ph1[:, None] * rho11) * ph1.conj()[None, :]
        pops[j] = (np.sum(r00 * G0).real, np.sum(r11 * G1).real)
        red = np.array([[pops[j, 0], values[j]], [np.conj(values[j]), pops[j, 1]]])
        red_min = min(red_min, float(np.linalg.eigvalsh(red).min()))
        red_herm = max(red_herm, abs(red[0, 1] - np.conj(red[1, 0])))

    drift = float(np.max(np.abs(pops - [p0_init, p1_init]))) if times.size else 0.0
    meta = {
        "n_max": cfg.n_max,
        "dimension": cfg.dimension,
        "trace_error": abs(trace0 - 1.0),
        "hermiticity_error": float(herm0),
        "min_eigenvalue": min_eig,
        "reduced_min_eigenvalue": red_min,
        "population_drift": drift,
        "populations": [p0_init, p1_init],
        "thermal_tail": tail,
    }
    if meta["trace_error"] > 1e-10:
        raise OracleDisagreement(f"Tr rho_T(0) = {trace0}, expected 1")
    nan = np.full(times.shape, np.nan)
    return CoherenceTrajectory(times, values, nan, nan.copy(), s, cfg.spectral_density(),
                               cfg.ctx, 1.0, meta)


@dataclass
class OracleComparison:
    """Analytic versus exact-diagonalization coherence on a time grid."""

    times: np.ndarray
    analytic: np.ndarray
    oracle: np.ndarray
    max_deviation: float
    n_max_history: list
    diagnostics: dict

    def to_dict(self):
        return {
            "times": self.times.tolist(),
            "analytic_re": self.analytic.real.tolist(),
            "analytic_im": self.analytic.imag.tolist(),
            "oracle_re": self.oracle.real.tolist(),
            "oracle_im": self.oracle.imag.tolist(),
            "max_deviation": self.max_deviation,
            "n_max_history": self.n_max_history,
            "diagnostics": self.diagnostics,
        }


def converge_fock(cfg, times, *, tol=1e-7, max_n=64):
    """Increase ``n_max`` until doubling it changes the coherence by less than ``tol``.

    Returns the trajectory at the final cutoff and the list of
    ``(n_max, change)`` pairs.
    """
    history = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        prev = exact_diagonalization_coherence(cfg, times)
    n = cfg.n_max
    while True:
        n2 = 2 * n
        if n2 > max_n or cfg.with_n_max(n2).dimension > cfg.dim_cap:
            raise ConfigError(f"no n_max convergence to {tol} below the dimension cap")
        nxt = exact_diagonalization_coherence(cfg.with_n_max(n2), times)
        change = float(np.max(np.abs(nxt.values - prev.values)))
        history.append((n2, change))
        if change < tol:
            return nxt, history
        prev, n = nxt, n2


def compare_with_analytic(cfg, times, *, tol=1e-7, max_n=64):
    """Run the converged oracle and the closed-form coherence on the same modes."""
    traj, history = converge_fock(cfg, times, tol=tol, max_n=max_n)
    J = cfg.spectral_density()
    analytic = np.array([coherence(cfg.scheme, J, cfg.ctx, t) for t in traj.times])
    dev = float(np.max(np.abs(analytic - traj.values))) if len(analytic) else 0.0
    return OracleComparison(traj.times, analytic, traj.values, dev, history, traj.meta)
