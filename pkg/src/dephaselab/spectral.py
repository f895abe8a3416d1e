"""Spectral densities, thermal dressing and frequency integrals.

All quantities use units with hbar = k_B = 1, so temperatures are
frequencies.  Continuous densities are integrated with adaptive quadrature
after the substitution ``omega - omega_g = omega_s * exp(y)``, which turns
power-law endpoint behaviour at the gap into an exponentially decaying tail
in ``y``; discrete modes reduce to finite sums and tabulated densities to the
trapezoid rule on their own grid.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import (
    DivergenceError,
    OutOfRangeError,
    SingularityError,
    UnsupportedVariantError,
)

DEFAULT_MOMENT_RTOL = 1e-10
DEFAULT_TIME_RTOL = 1e-8
QUAD_LIMIT = 200
# exponential cutoffs are truncated at omega_g + TAIL_SPAN * omega_s (e^-200)
TAIL_SPAN = 200.0


@dataclass(frozen=True)
class ThermalContext:
    """Temperature ``T`` and qubit splitting ``omega0``.

    ``T = 0`` is admitted and selects the zero-temperature branch, in which
    ``coth(omega / 2T)`` is replaced by 1 and ``x = omega0 / T`` is infinite.
    """

    temperature: float
    omega0: float

    def __post_init__(self):
        if not self.temperature >= 0.0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if not (self.omega0 > 0.0 and math.isfinite(self.omega0)):
            raise ValueError(f"omega0 must be positive and finite, got {self.omega0}")

    @classmethod
    def from_ratios(cls, omega0_over_T, omega_s_over_T, omega_s=1.0):
        """Build a context from the dimensionless ratios used in figure captions."""
        if not (omega0_over_T > 0 and omega_s_over_T > 0):
            raise ValueError("ratios must be positive")
        T = omega_s / omega_s_over_T
        return cls(temperature=T, omega0=omega0_over_T * T)

    @property
    def x(self):
        """The ratio ``omega0 / T`` (``inf`` at zero temperature)."""
        if self.temperature == 0.0:
            return math.inf
        return self.omega0 / self.temperature

    def with_temperature(self, temperature):
        return ThermalContext(temperature, self.omega0)


def thermal_factor(omega, temperature):
    """``coth(omega / 2T)``, or 1 when ``T = 0``."""
    omega = np.asarray(omega, dtype=float)
    if temperature == 0.0:
        return np.ones_like(omega)
    with np.errstate(divide="ignore"):
        return 1.0 / np.tanh(omega / (2.0 * temperature))


# --- spectral density variants ----------------------------------------------

class SpectralDensity:
    """Common interface of the spectral-density variants.

    Subclasses expose ``omega_g`` (low-frequency gap), ``omega_M`` (upper
    cutoff, possibly ``inf``) and ``omega_s`` (scale frequency).
    """

    discrete = False
    tabulated = False

    def __call__(self, omega):
        return evaluate(self, omega)

    def _profile(self, s):
        """Density at distance ``s >= 0`` above the gap."""
        raise NotImplementedError

    @property
    def low_exponent(self):
        """Exponent of the power law ``J ~ (omega - omega_g)**p`` at the gap."""
        raise NotImplementedError


@dataclass(frozen=True)
class OhmicLike(SpectralDensity):
    """``J(omega) = A (omega/omega_s)**alpha exp(-omega/omega_s)``.

    ``alpha < 1``, ``= 1`` and ``> 1`` give the sub-ohmic, ohmic and
    super-ohmic classes.  The amplitude defaults to ``A = omega_s``.  An
    optional hard cutoff ``omega_M`` sets the density to zero above it.
    """

    alpha: float
    omega_s: float = 1.0
    amplitude: float | None = None
    omega_M: float = math.inf

    omega_g = 0.0

    def __post_init__(self):
        if self.amplitude is None:
            object.__setattr__(self, "amplitude", float(self.omega_s))
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.omega_s > 0:
            raise ValueError("omega_s must be positive")
        if not self.amplitude >= 0:
            raise ValueError("amplitude must be non-negative")
        if not self.omega_M > 0:
            raise ValueError("omega_M must be positive")

    def _profile(self, s):
        r = np.asarray(s, dtype=float) / self.omega_s
        return self.amplitude * r**self.alpha * np.exp(-r)

    @property
    def low_exponent(self):
        return self.alpha


@dataclass(frozen=True)
class Gapped(SpectralDensity):
    """A continuous density shifted upward by a low-frequency gap.

    ``J(omega) = base(omega - omega_g)`` for ``omega >= omega_g`` and zero
    below, so that ``J(omega_g + omega_s nu) = omega_s Omega(nu)`` with the
    scale function of the base density.
    """

    base: SpectralDensity
    omega_g: float

    def __post_init__(self):
        if self.base.discrete or self.base.tabulated or isinstance(self.base, Gapped):
            raise UnsupportedVariantError("Gapped wraps an ungapped continuous density")
        if not self.omega_g >= 0:
            raise ValueError("gap must be non-negative")

    @property
    def omega_s(self):
        return self.base.omega_s

    @property
    def omega_M(self):
        return self.omega_g + self.base.omega_M

    @property
    def low_exponent(self):
        return self.base.low_exponent

    def _profile(self, s):
        return self.base._profile(s)


@dataclass(frozen=True, eq=False)
class DiscreteModes(SpectralDensity):
    """Finite set of modes, ``J(omega) = sum_k w_k delta(omega - omega_k)``.

    ``weights`` are the delta-function weights of ``J``.  For the
    Hamiltonian coupling ``sigma_z (g b^+ + g^* b)`` the weight of a mode is
    ``4 |g|**2`` (see :func:`DiscreteModes.from_couplings`).
    """

    weights: np.ndarray
    frequencies: np.ndarray
    omega_s: float | None = None

    discrete = True
    omega_g = 0.0
    omega_M = math.inf

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        f = np.atleast_1d(np.asarray(self.frequencies, dtype=float))
        if w.shape != f.shape or w.ndim != 1 or w.size == 0:
            raise ValueError("weights and frequencies must be equal-length 1d sequences")
        if np.any(f <= 0):
            raise ValueError("mode frequencies must be positive")
        if np.any(w < 0):
            raise ValueError("mode weights must be non-negative")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "frequencies", f)
        if self.omega_s is None:
            object.__setattr__(self, "omega_s", float(f.max()))

    @classmethod
    def from_modes(cls, modes, omega_s=None):
        """From ``[(weight, omega), ...]`` pairs."""
        modes = np.asarray(modes, dtype=float).reshape(-1, 2)
        return cls(modes[:, 0], modes[:, 1], omega_s)

    @classmethod
    def from_couplings(cls, couplings, frequencies, omega_s=None):
        """From Hamiltonian couplings ``g_k`` (complex allowed)."""
        g = np.asarray(couplings)
        return cls(4.0 * np.abs(g) ** 2, frequencies, omega_s)

    def __repr__(self):
        pairs = ", ".join(f"({w:g}, {f:g})" for w, f in zip(self.weights, self.frequencies))
        return f"DiscreteModes([{pairs}])"


@dataclass(frozen=True, eq=False)
class Tabulated(SpectralDensity):
    """Density sampled on a strictly increasing frequency grid.

    Values between samples are linearly interpolated; nothing is
    extrapolated.  The support ``[omega_g, omega_M]`` defaults to the sampled
    range and outside it the density is zero.
    """

    omega: np.ndarray
    values: np.ndarray
    omega_s: float = 1.0
    omega_g: float | None = None
    omega_M: float | None = None

    tabulated = True

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        j = np.asarray(self.values, dtype=float)
        if w.ndim != 1 or w.shape != j.shape or w.size < 2:
            raise ValueError("need at least two (omega, J) samples")
        if np.any(np.diff(w) <= 0) or w[0] < 0:
            raise ValueError("sample frequencies must be non-negative and strictly increasing")
        if np.any(j < 0):
            raise ValueError("tabulated J must be non-negative")
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "values", j)
        if self.omega_g is None:
            object.__setattr__(self, "omega_g", float(w[0]))
        if self.omega_M is None:
            object.__setattr__(self, "omega_M", float(w[-1]))
        if not self.omega_g < self.omega_M:
            raise ValueError("empty support")

    def _profile(self, s):
        return evaluate(self, self.omega_g + np.asarray(s, dtype=float))

    @property
    def low_exponent(self):
        raise UnsupportedVariantError("tabulated densities have no analytic gap exponent")

    def __repr__(self):
        return (f"Tabulated(n={self.omega.size}, omega=[{self.omega[0]:g}, "
                f"{self.omega[-1]:g}], omega_g={self.omega_g:g})")


# --- pointwise operations ----------------------------------------------------

def _scalar_or_array(x, like):
    return float(x) if np.ndim(like) == 0 else x


def evaluate(J, omega):
    """Spectral density ``J(omega)``; zero outside ``[omega_g, omega_M]``.

    Raises
    ------
    UnsupportedVariantError
        For discrete modes, which have no pointwise value.
    OutOfRangeError
        For a tabulated density queried inside its support but outside the
        sampled frequencies.
    """
    if J.discrete:
        raise UnsupportedVariantError("discrete modes are delta functions; use integrals")
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("omega must be non-negative")
    inside = (w >= J.omega_g) & (w <= J.omega_M)
    if J.tabulated:
        probe = w[inside]
        if probe.size and (probe.min() < J.omega[0] or probe.max() > J.omega[-1]):
            raise OutOfRangeError(
                f"tabulated density sampled on [{J.omega[0]}, {J.omega[-1]}]")
        out = np.where(inside, np.interp(w, J.omega, J.values), 0.0)
    else:
        s = np.where(inside, w - J.omega_g, 0.0)
        out = np.where(inside, J._profile(s), 0.0)
    return _scalar_or_array(out, omega)


def _slope_at_gap(J):
    """``dJ/domega`` at ``omega_g`` where that is the leading behaviour."""
    if J.tabulated:
        return (J.values[1] - J.values[0]) / (J.omega[1] - J.omega[0])
    if J.low_exponent == 1.0:
        return float(J._profile(1e-300) / 1e-300)
    return 0.0 if J.low_exponent > 1.0 else math.inf


def effective_density(J, ctx, omega):
    """Thermally dressed density ``J_T(omega) = J(omega) coth(omega / 2T)``.

    At ``omega = 0`` the finite limit ``2 T J'(0)`` is returned when
    ``J(0) = 0``; a non-vanishing ``J(0)`` makes the dressed density singular.
    """
    w = np.asarray(omega, dtype=float)
    j = np.asarray(evaluate(J, w), dtype=float)
    T = ctx.temperature
    if T == 0.0:
        return _scalar_or_array(j, omega)
    zero = w == 0.0
    out = j * thermal_factor(np.where(zero, 1.0, w), T)
    if np.any(zero):
        if np.any(j[zero] > 0):
            raise SingularityError("J_T diverges at omega = 0 when J(0) > 0 and T > 0")
        limit = 2.0 * T * _slope_at_gap(J)
        if not math.isfinite(limit):
            raise SingularityError("J_T diverges at omega = 0 (J vanishes too slowly)")
        out = np.where(zero, limit, out)
    return _scalar_or_array(out, omega)


def scale_function(J, nu):
    """Dimensionless profile ``Omega(nu) = J(omega_g + omega_s nu) / omega_s``."""
    if J.discrete:
        raise UnsupportedVariantError("scale function undefined for discrete modes")
    nu = np.asarray(nu, dtype=float)
    out = np.asarray(evaluate(J, J.omega_g + J.omega_s * nu)) / J.omega_s
    return _scalar_or_array(out, nu)


# --- integration engine ------------------------------------------------------

@dataclass(frozen=True)
class Kernel:
    """Frequency weight ``K(omega)`` with leading behaviour ``c0 omega**power`` at 0."""

    func: Callable[[np.ndarray], np.ndarray]
    power: float
    c0: float = 1.0


def power_kernel(k):
    return Kernel(lambda w: w**k, float(k), 1.0)


def _check_gap_endpoint(J, kernel, temperature):
    """Raise when the integrand is not integrable at the gap edge."""
    if J.omega_g > 0.0:
        beta = J.low_exponent
    else:
        beta = J.low_exponent + kernel.power - (1.0 if temperature > 0 else 0.0)
    if beta <= -1.0:
        raise DivergenceError(
            f"integrand ~ (omega - omega_g)**{beta:g} is not integrable at omega_g",
            endpoint=J.omega_g,
        )


def _quad(f, a, b, rtol, limit, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(f, a, b, epsabs=0.0, epsrel=rtol, limit=limit, **kw)
        except integrate.IntegrationWarning:
            # fall back to the best estimate; the relative target is usually
            # unreachable only for pieces negligible against the total
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                val, _ = integrate.quad(f, a, b, epsabs=1e-300, epsrel=rtol,
                                        limit=4 * limit, **kw)
    return val


def _support_span(J):
    span = J.omega_M - J.omega_g
    return min(span, TAIL_SPAN * J.omega_s)


def integrate_band(J, kernel, temperature, s_lo=0.0, s_hi=None, *,
                   breaks=(), rtol=DEFAULT_MOMENT_RTOL, limit=QUAD_LIMIT):
    """``int J(w) coth(w/2T) K(w) dw`` for ``w - omega_g`` in ``[s_lo, s_hi]``.

    Continuous densities only.  The logarithmic substitution maps the gap
    edge to ``y = -inf``; additional breakpoints (given as distances above
    the gap) split the range in ``y``.
    """
    if s_hi is None:
        s_hi = _support_span(J)
    if s_hi <= s_lo:
        return 0.0
    if s_lo == 0.0:
        _check_gap_endpoint(J, kernel, temperature)
    sigma = J.omega_s
    g = J.omega_g
    T = temperature
    prof = J._profile
    func = kernel.func

    c0, power = kernel.c0, kernel.power

    def integrand(y):
        s = sigma * math.exp(y)
        if s == 0.0:
            return 0.0
        w = g + s
        with np.errstate(all="ignore"):
            kv = float(func(w))
        if not math.isfinite(kv):
            # w underflowed in the kernel; use its leading power law
            try:
                kv = c0 * w**power
            except OverflowError:
                return 0.0
        val = float(prof(s)) * kv * s
        if T > 0.0:
            val /= math.tanh(w / (2.0 * T))
        # integrability at the gap makes the weighted integrand vanish there
        return val if math.isfinite(val) else 0.0

    y_hi = math.log(s_hi / sigma)
    y_lo = -math.inf if s_lo == 0.0 else math.log(s_lo / sigma)
    cuts = {0.0}
    if T > 0.0 and 2.0 * T > g:
        cuts.add(math.log((2.0 * T - g) / sigma))
    cuts.update(math.log(b / sigma) for b in breaks if b > 0)
    cuts = sorted(c for c in cuts if y_lo < c < y_hi)
    edges = [y_lo, *cuts, y_hi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += _quad(integrand, a, b, rtol, limit)
    return total


def integrate_band_oscillatory(J, kernel, temperature, s_lo, weight, wvar, *,
                               rtol=DEFAULT_TIME_RTOL, limit=QUAD_LIMIT):
    """``int J coth K(w) weight(wvar w) dw`` over ``w - omega_g >= s_lo > 0``.

    ``weight`` is ``"cos"`` or ``"sin"``; the oscillation is handled by the
    QUADPACK Fourier-weighted rule so that the smooth factor alone is sampled.
    """
    g = J.omega_g
    a = g + s_lo
    b = g + _support_span(J)
    if b <= a:
        return 0.0
    T = temperature
    prof = J._profile
    func = kernel.func

    def smooth(w):
        val = float(prof(w - g)) * float(func(w))
        if T > 0.0:
            val /= math.tanh(w / (2.0 * T))
        return val

    return _quad(smooth, a, b, rtol, 10 * limit, weight=weight, wvar=wvar)


def _tabulated_integral(J, kernel, temperature, max_step=None):
    w = J.omega[(J.omega >= J.omega_g) & (J.omega <= J.omega_M)]
    w = np.unique(np.concatenate([[J.omega_g, J.omega_M], w]))
    if max_step is not None:
        n = np.maximum(1, np.ceil(np.diff(w) / max_step).astype(int))
        w = np.concatenate([np.linspace(a, b, k, endpoint=False)
                            for a, b, k in zip(w[:-1], w[1:], n)] + [w[-1:]])
    j = np.asarray(evaluate(J, w), dtype=float)
    T = temperature
    vals = np.empty_like(w)
    pos = w > 0
    vals[pos] = j[pos] * thermal_factor(w[pos], T) * kernel.func(w[pos])
    if not pos[0]:
        # leading behaviour at omega = 0 for linearly interpolated J
        tau = 1.0 if T > 0 else 0.0
        j0, j1 = j[0], (j[1] - j[0]) / (w[1] - w[0])
        if j0 > 0:
            expo, lead = kernel.power - tau, j0
        else:
            expo, lead = kernel.power - tau + 1.0, j1
        lead *= kernel.c0 * (2.0 * T) ** tau
        if lead == 0.0 or expo > 0:
            vals[0] = 0.0
        elif expo == 0:
            vals[0] = lead
        elif expo <= -1:
            raise DivergenceError("tabulated integrand not integrable at omega = 0", endpoint=0.0)
        else:
            raise SingularityError(
                "tabulated integrand is singular at omega = 0; start the grid above 0")
    return float(np.trapezoid(vals, w))


def spectral_integral(J, kernel, temperature=0.0, *, rtol=DEFAULT_MOMENT_RTOL,
                      limit=QUAD_LIMIT, breaks=(), max_step=None):
    """``int J(w) coth(w/2T) K(w) dw`` over the whole support, for any variant."""
    if J.discrete:
        w = J.frequencies
        return float(np.sum(J.weights * thermal_factor(w, temperature) * kernel.func(w)))
    if J.tabulated:
        return _tabulated_integral(J, kernel, temperature, max_step)
    return integrate_band(J, kernel, temperature, breaks=breaks, rtol=rtol, limit=limit)


# --- moments -----------------------------------------------------------------

def moment(J, ctx, k, zero_temperature=False, *, rtol=DEFAULT_MOMENT_RTOL, limit=QUAD_LIMIT):
    """Frequency moment ``eta_{k,T} = int omega**k J_T(omega) domega``.

    Parameters
    ----------
    J : SpectralDensity
    ctx : ThermalContext or None
        Ignored (and may be None) when ``zero_temperature`` is set.
    k : int
        Power of omega, ``-1 <= k <= 2``.  ``k = -2`` is also accepted and
        gives the integral that controls the long-time residual coherence.
    zero_temperature : bool
        Return ``eta_{k,0}`` (plain ``J`` instead of ``J_T``).

    Raises
    ------
    DivergenceError
        If the integral does not converge at the gap edge.
    """
    if int(k) != k or not -2 <= k <= 2:
        raise ValueError("moment order must be an integer in [-2, 2]")
    T = 0.0 if (zero_temperature or ctx is None) else ctx.temperature
    return spectral_integral(J, power_kernel(int(k)), T, rtol=rtol, limit=limit)


@dataclass(frozen=True)
class MomentTable:
    """Moments ``eta_k`` for ``k = -1..2`` at one temperature.

    Divergent moments are omitted; indexing a missing order raises
    :class:`DivergenceError`.
    """

    entries: dict = field(default_factory=dict)
    zero_temperature: bool = False
    temperature: float = 0.0

    def __getitem__(self, k):
        try:
            return self.entries[k]
        except KeyError:
            raise DivergenceError(f"moment eta_{k} diverges", endpoint=0.0) from None

    def __contains__(self, k):
        return k in self.entries


def moment_table(J, ctx, zero_temperature=False, *, rtol=DEFAULT_MOMENT_RTOL):
    entries = {}
    for k in (-1, 0, 1, 2):
        try:
            entries[k] = moment(J, ctx, k, zero_temperature, rtol=rtol)
        except DivergenceError:
            continue
    T = 0.0 if (zero_temperature or ctx is None) else ctx.temperature
    return MomentTable(entries, zero_temperature or T == 0.0, T)
