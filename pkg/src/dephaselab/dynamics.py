"""Time-dependent dephasing integrals and coherence trajectories."""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .errors import DegenerateSchemeError, DivergenceError, UndefinedPhaseError
from .scheme import branch_amplitudes, n_constants
from .spectral import DEFAULT_TIME_RTOL, Kernel

TRAJECTORY_COLUMNS = ("t_omega_s", "re", "im", "abs", "phase", "xi", "upsilon")
# beyond omega_s t = 1 the kernel oscillates; the band above 1/t goes to the
# Fourier-weighted rule
_SPLIT = 1.0
# trapezoid spacing for tabulated densities, as a fraction of the period 1/t
_TAB_STEP = 0.05


def _dephasing_kernel(t):
    return Kernel(lambda w: 2.0 * np.sin(0.5 * w * t) ** 2 / (w * w), 0.0, 0.5 * t * t)


def _phase_kernel(t):
    return Kernel(lambda w: np.sin(w * t) / (w * w), -1.0, t)


_INVERSE_SQUARE = spectral.power_kernel(-2)


def _time_integral(J, temperature, t, kernel, weight, rtol):
    if J.discrete:
        return spectral.spectral_integral(J, kernel, temperature)
    if J.tabulated:
        return spectral.spectral_integral(J, kernel, temperature, max_step=_TAB_STEP / t)
    if t * J.omega_s <= _SPLIT:
        return spectral.integrate_band(J, kernel, temperature, breaks=(1.0 / t,), rtol=rtol)
    s_c = 1.0 / t
    low = spectral.integrate_band(J, kernel, temperature, 0.0, s_c, rtol=rtol)
    osc = spectral.integrate_band_oscillatory(
        J, _INVERSE_SQUARE, temperature, s_c, weight, t, rtol=rtol)
    if weight == "sin":
        return low + osc
    plain = spectral.integrate_band(J, _INVERSE_SQUARE, temperature, s_c, rtol=rtol)
    return low + plain - osc


def dephasing_factor(J, ctx, t, *, rtol=DEFAULT_TIME_RTOL):
    """Dephasing exponent ``Xi_T(t) = int J_T(w) (1 - cos wt) / w^2 dw``.

    The integrand is evaluated as ``2 sin^2(wt/2) / w^2`` to avoid
    cancellation at small ``wt``.
    """
    t = float(t)
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0.0:
        return 0.0
    return _time_integral(J, ctx.temperature, t, _dephasing_kernel(t), "cos", rtol)


def upsilon0(J, t, *, rtol=DEFAULT_TIME_RTOL):
    """Zero-temperature phase integral ``int J(w) sin(wt) / w^2 dw``."""
    t = float(t)
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0.0:
        return 0.0
    return _time_integral(J, 0.0, t, _phase_kernel(t), "sin", rtol)


def _radicand(c, y):
    # equals 1 + a2 sin 2y + a3 sin^2 y, written as a sum of squares
    return (np.cos(y) + c.a2 * np.sin(y)) ** 2 + (c.a1 * np.sin(y)) ** 2


def phase_shift(c, upsilon):
    """Phase ``chi = atan2(N1 sin y, N0 cos y + N2 sin y)`` at ``y = upsilon``.

    For an array of ``upsilon`` values along a trajectory the result is
    unwrapped so that it varies continuously.
    """
    if c.n0 == 0.0:
        raise DegenerateSchemeError("phase undefined for N0 = 0")
    y = np.asarray(upsilon, dtype=float)
    num = c.a1 * np.sin(y)
    den = np.cos(y) + c.a2 * np.sin(y)
    if np.any((num == 0.0) & (den == 0.0)):
        raise UndefinedPhaseError("both arctangent arguments vanish")
    chi = np.arctan2(num, den)
    if chi.ndim == 0:
        return float(chi)
    return np.unwrap(chi)


def _assemble(c, omega0, t, xi, ups):
    chi = np.arctan2(c.a1 * np.sin(ups), np.cos(ups) + c.a2 * np.sin(ups))
    return c.rho0 * np.exp(1j * (omega0 * t + chi) - xi) * np.sqrt(_radicand(c, ups))


def coherence(s, J, ctx, t, *, rtol=DEFAULT_TIME_RTOL):
    """Coherence ``rho01(t)`` of the measured-preparation qubit.

    ``rho01(0) exp{i[omega0 t + chi(t)] - Xi_T(t)} sqrt(1 + a2 sin 2y + a3 sin^2 y)``
    with ``y = upsilon0(t)``.  Schemes with vanishing initial coherence return
    0 without evaluating any integral.  On the full-decoherence schemes
    (``q = Q``, ``dzeta = +-pi``) this product form is ``0 * inf`` and its
    continuous extension, :func:`continuous_coherence`, is nonzero for
    ``t > 0``; exact diagonalization agrees with the latter.
    """
    c = n_constants(s, ctx)
    if c.n0 == 0.0:
        return 0j
    if t == 0:
        return c.rho0
    xi = dephasing_factor(J, ctx, t, rtol=rtol)
    ups = upsilon0(J, t, rtol=rtol)
    return complex(_assemble(c, ctx.omega0, t, xi, ups))


def continuous_coherence(s, J, ctx, t, *, rtol=DEFAULT_TIME_RTOL):
    """Coherence written as the sum of its two thermal branches.

    ``exp(i zeta1 + i omega0 t - Xi) (alpha e^{iy} + beta e^{-iy}) / (2 (1 + e))``
    with ``y = upsilon0(t)``.  It equals :func:`coherence` whenever the initial
    coherence is nonzero, and is its continuous extension otherwise: on the
    full-decoherence schemes ``alpha + beta = 0`` but each branch survives,
    so this value grows like ``sin(y)`` away from ``t = 0`` while
    :func:`coherence` returns 0.
    """
    alpha, beta, e = branch_amplitudes(s.theta0, s.u, s.v, s.delta_zeta, ctx.x)
    if t == 0:
        xi = y = 0.0
    else:
        xi = dephasing_factor(J, ctx, t, rtol=rtol)
        y = upsilon0(J, t, rtol=rtol)
    pref = np.exp(1j * (s.zeta1 + ctx.omega0 * t) - xi) / (2.0 * (1.0 + e))
    return complex(pref * (alpha * np.exp(1j * y) + beta * np.exp(-1j * y)))


def relative_magnitude_change(s, J, ctx, t, *, rtol=DEFAULT_TIME_RTOL):
    """``|rho01(t)| / |rho01(0)| - 1``, accurate also when the change is tiny."""
    c = n_constants(s, ctx)
    if c.n0 == 0.0:
        raise DegenerateSchemeError("coherence vanishes identically")
    if t == 0:
        return 0.0
    xi = dephasing_factor(J, ctx, t, rtol=rtol)
    y = upsilon0(J, t, rtol=rtol)
    inc = c.a2 * math.sin(2.0 * y) + c.a3 * math.sin(y) ** 2
    return math.expm1(-xi + 0.5 * math.log1p(inc))


def decoupled_coherence(rho0, J, ctx, t, *, rtol=DEFAULT_TIME_RTOL):
    """Baseline ``rho0 exp(-Xi_T(t))`` for a state uncorrelated with the bath."""
    return complex(rho0) * math.exp(-dephasing_factor(J, ctx, t, rtol=rtol))


def residual_exponent(J, ctx):
    """``int J_T(w) / w^2 dw``; raises :class:`DivergenceError` when infinite."""
    return spectral.spectral_integral(J, _INVERSE_SQUARE, ctx.temperature)


def asymptotic_magnitude(s, J, ctx):
    """Long-time limit ``|rho01(0)| exp(-int J_T / w^2)``; 0 if the integral diverges."""
    c = n_constants(s, ctx)
    mag = abs(c.rho0)
    if mag == 0.0:
        return 0.0
    try:
        return mag * math.exp(-residual_exponent(J, ctx))
    except DivergenceError:
        return 0.0


# --- trajectories ------------------------------------------------------------

def default_time_grid(omega_s, t_max, *, points_per_decade=400, t_min=None, n_linear=400):
    """Time grid starting at 0: log-spaced below ``1/omega_s``, linear above.

    Parameters
    ----------
    omega_s : float
    t_max : float
    points_per_decade : int
        Density of the logarithmic part, which resolves the linear regime.
    t_min : float, optional
        First nonzero time; defaults to ``1e-4 / omega_s``.
    n_linear : int
        Number of linear steps between ``1/omega_s`` and ``t_max``.
    """
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    t_star = 1.0 / omega_s
    t_min = 1e-4 * t_star if t_min is None else t_min
    t_min = min(t_min, t_max)
    top = min(t_star, t_max)
    decades = max(math.log10(top / t_min), 0.0)
    n_log = max(int(round(decades * points_per_decade)) + 1, 2)
    parts = [np.array([0.0]), np.geomspace(t_min, top, n_log)]
    if t_max > t_star:
        parts.append(np.linspace(t_star, t_max, n_linear + 1)[1:])
    return np.unique(np.concatenate(parts))


def resolve_threads(threads=None):
    """Thread count from the argument, then ``DEPHASELAB_THREADS``, else 1."""
    if threads is None:
        env = os.environ.get("DEPHASELAB_THREADS")
        threads = int(env) if env else 1
    return max(1, int(threads))


@dataclass
class CoherenceTrajectory:
    """Sampled ``rho01(t)`` together with the integrals that produced it."""

    times: np.ndarray
    values: np.ndarray
    xi: np.ndarray
    upsilon: np.ndarray
    scheme: object = None
    density: object = None
    context: object = None
    omega_s: float = 1.0
    meta: dict = field(default_factory=dict)

    @property
    def magnitude(self):
        return np.abs(self.values)

    @property
    def phase(self):
        """Unwrapped argument of ``rho01(t)``; 0 where the coherence vanishes."""
        ang = np.where(self.values == 0, 0.0, np.angle(self.values))
        return np.unwrap(ang)

    @property
    def normalized_magnitude(self):
        """``|rho01(t) / rho01(0)|``; 0 for identically vanishing coherence."""
        r0 = abs(self.values[0]) if self.times[0] == 0 else 0.0
        if r0 == 0.0:
            return np.zeros_like(self.times)
        return self.magnitude / r0

    def rows(self, normalized=False):
        cols = [self.times * self.omega_s, self.values.real, self.values.imag,
                self.magnitude, self.phase, self.xi, self.upsilon]
        if normalized:
            zero = float(np.all(self.values == 0))
            cols += [self.normalized_magnitude, np.full_like(self.times, zero)]
        return np.column_stack(cols)

    def header(self, normalized=False):
        cols = list(TRAJECTORY_COLUMNS)
        if normalized:
            cols += ["abs_ratio", "zero_flag"]
        return cols

    def to_csv(self, path=None, normalized=False):
        """Write CSV with full-precision values; returns the text if ``path`` is None."""
        text = format_csv(self.header(normalized), self.rows(normalized))
        if path is None:
            return text
        with open(path, "w", newline="") as fh:
            fh.write(text)
        return text


def format_csv(header, rows):
    """CSV text with 17 significant digits per value (round-trips exactly)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([f"{float(v):.16e}" for v in row])
    return buf.getvalue()


def read_csv(text):
    """Parse CSV text produced by :func:`format_csv`; returns ``(header, array)``."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    data = np.array([[float(v) for v in row] for row in reader], dtype=float)
    return header, data.reshape(-1, len(header))


def compute_trajectory(s, J, ctx, times=None, *, t_max=None, threads=None,
                       rtol=DEFAULT_TIME_RTOL):
    """Evaluate ``rho01`` on a time grid.

    Time points are independent and may be evaluated on several threads;
    the output order always follows ``times``.
    """
    if times is None:
        if t_max is None:
            raise ValueError("give either times or t_max")
        times = default_time_grid(J.omega_s, t_max)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(times < 0) or np.any(np.diff(times) <= 0):
        raise ValueError("times must be non-negative and strictly increasing")

    def integrals(t):
        return dephasing_factor(J, ctx, t, rtol=rtol), upsilon0(J, t, rtol=rtol)

    n_threads = resolve_threads(threads)
    if n_threads > 1:
        with ThreadPoolExecutor(n_threads) as pool:
            pairs = list(pool.map(integrals, times))
    else:
        pairs = [integrals(t) for t in times]
    xi = np.array([p[0] for p in pairs])
    ups = np.array([p[1] for p in pairs])
    c = n_constants(s, ctx)
    if c.n0 == 0.0:
        values = np.zeros(times.shape, dtype=complex)
    else:
        values = _assemble(c, ctx.omega0, times, xi, ups)
        values[times == 0] = c.rho0
    return CoherenceTrajectory(times, values, xi, ups, s, J, ctx, J.omega_s)
