"""Short-time behaviour of the coherence magnitude and velocity extrema.

For ``t`` well below the time scales returned here,

    |rho01(t)| ~ |rho01(0)| + V t + W t^2,

with the initial velocity ``V = |rho01(0)| a2 eta_{-1,0}`` and curvature
``W = |rho01(0)| xi / 2``, ``xi = (a1^2 - 1) eta_{-1,0}^2 - eta_{0,T}``.
Over all schemes at fixed ``theta0`` and ``omega0/T`` the velocity ranges in
``[-V_M, V_M]``; the schemes realizing the extremes are built by
:func:`build_extremal_scheme`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import spectral
from .errors import (
    DegenerateSchemeError,
    DivergenceError,
    DomainError,
    UnsupportedSpectrumError,
)
from .scheme import (
    MeasurementScheme,
    SchemeTag,
    _x_of,
    arc_angle,
    critical_cosine,
    n_constants,
    psi_angle,
    q_critical,
)

EXTREMAL_FAMILIES = (SchemeTag.SMV_MaxVelocity, SchemeTag.SmV_MinVelocity,
                     SchemeTag.SMVprime, SchemeTag.SmVprime)


def _moment(J, ctx, k, zero_temperature):
    try:
        return spectral.moment(J, ctx, k, zero_temperature)
    except DivergenceError as exc:
        label = f"eta_{{{k},{'0' if zero_temperature else 'T'}}}"
        raise UnsupportedSpectrumError(f"{label} diverges for this spectral density") from exc


@dataclass(frozen=True)
class ShortTimeProfile:
    """Coefficients and validity scales of the short-time expansion.

    Attributes
    ----------
    velocity : float
        Linear coefficient ``V``.
    curvature : float
        Quadratic coefficient ``W``.
    xi : float
        ``(a1^2 - 1) eta_{-1,0}^2 - eta_{0,T}``; ``nan`` for schemes with
        identically vanishing coherence.
    curvature_sm : float
        Quadratic coefficient of the maximal-coherence schemes
        (``|rho01(0)| = 1/2``), ``-eta_{0,T}/4 - eta_{-1,0}^2 e/(1+e)^2``.
    t_s, t_l : float
        Scales below which the quadratic and the linear truncation hold.
    eta_m1_0, eta_0_T : float
        Moments used in the coefficients.
    rho0_mag, a1, a2 : float
    """

    velocity: float
    curvature: float
    xi: float
    curvature_sm: float
    t_s: float
    t_l: float
    eta_m1_0: float
    eta_0_T: float
    rho0_mag: float
    a1: float
    a2: float

    def quadratic_trend(self):
        """+1 if the quadratic term increases the magnitude, -1 if it decreases, 0 if flat.

        Equivalent to comparing ``a1^2`` with ``1 + eta_{0,T} / eta_{-1,0}^2``.
        """
        if not self.rho0_mag or not math.isfinite(self.xi):
            return 0
        return int(np.sign(self.xi))


def time_scales(J, ctx):
    """``t_s`` and its three candidate terms."""
    e_m1 = _moment(J, ctx, -1, True)
    e_1 = _moment(J, ctx, 1, True)
    e_0T = _moment(J, ctx, 0, False)
    e_2T = _moment(J, ctx, 2, False)
    terms = (1.0 / J.omega_s,
             math.sqrt(6.0 * e_m1 / e_1) if e_1 > 0 else math.inf,
             2.0 * math.sqrt(3.0 * e_0T / e_2T) if e_2T > 0 else math.inf)
    return min(terms), terms, (e_m1, e_0T)


def short_time_profile(s, J, ctx):
    """Short-time expansion coefficients and time scales of a scheme.

    Raises
    ------
    UnsupportedSpectrumError
        If a required moment diverges.
    """
    t_s, _, (eta, eta0T) = time_scales(J, ctx)
    c = n_constants(s, ctx)
    e = math.exp(-ctx.x)
    w_sm = -eta0T / 4.0 - eta * eta * e / (1.0 + e) ** 2
    if c.n0 == 0.0:
        return ShortTimeProfile(0.0, 0.0, math.nan, w_sm, t_s, t_s, eta, eta0T,
                                0.0, math.nan, math.nan)
    mag = abs(c.rho0)
    xi = (c.a1 * c.a1 - 1.0) * eta * eta - eta0T
    velocity = mag * c.a2 * eta
    t_l = t_s
    if c.a2 != 0.0 and xi != 0.0:
        t_l = min(t_l, 2.0 * eta * abs(c.a2 / xi))
    return ShortTimeProfile(velocity, 0.5 * mag * xi, xi, w_sm, t_s, t_l, eta, eta0T,
                            mag, c.a1, c.a2)


def expansion_eval(p, rho0_mag, t, order=1):
    """Truncated expansion ``|rho01(0)| + V t (+ W t^2)``."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    t = np.asarray(t, dtype=float)
    out = rho0_mag + p.velocity * t
    if order == 2:
        out = out + p.curvature * t * t
    return float(out) if out.ndim == 0 else out


def max_velocity_ratio(ctx_or_x, theta0):
    """``V_M / eta_{-1,0} = 2 e |cos theta0| / ((1+e)(1+e+|cos theta0|(1-e)))``."""
    x = _x_of(ctx_or_x)
    e = math.exp(-x)
    c = abs(math.cos(theta0))
    return 2.0 * e * c / ((1.0 + e) * (1.0 + e + c * (1.0 - e)))


def velocity_ratio(s, ctx_or_x):
    """Initial velocity of a scheme in units of ``eta_{-1,0}``, i.e. ``|rho01(0)| a2``."""
    c = n_constants(s, ctx_or_x)
    if c.n0 == 0.0:
        return 0.0
    return abs(c.rho0) * c.a2


@dataclass(frozen=True)
class VelocityExtrema:
    """Extreme initial velocities over all schemes at fixed ``theta0`` and ``omega0/T``.

    ``zero_velocity`` marks the degenerate ``theta0 = pi/2`` case, where every
    scheme has vanishing initial velocity.
    """

    v_max: float
    v_min: float
    ratio: float
    eta_m1_0: float
    phi: float
    theta0: float
    x: float
    max_families: tuple
    min_families: tuple
    zero_velocity: bool = False

    def psi(self, delta_zeta):
        return psi_angle(self.x, self.theta0, delta_zeta)


def velocity_extrema(ctx, theta0, J=None, *, eta_m1_0=None):
    """Maximum and minimum initial velocity, and the arc half-width ``phi``.

    Parameters
    ----------
    ctx : ThermalContext or float
        Context or ``omega0/T``.
    theta0 : float
    J : SpectralDensity, optional
        Supplies ``eta_{-1,0}``; omit it (or pass ``eta_m1_0``) to work in
        units of ``eta_{-1,0}``.
    """
    x = _x_of(ctx)
    if eta_m1_0 is None:
        eta_m1_0 = 1.0 if J is None else _moment(J, None, -1, True)
    ratio = max_velocity_ratio(x, theta0)
    zero = ratio == 0.0
    fam_max = () if zero else (SchemeTag.SMV_MaxVelocity, SchemeTag.SMVprime)
    fam_min = () if zero else (SchemeTag.SmV_MinVelocity, SchemeTag.SmVprime)
    vm = ratio * eta_m1_0
    return VelocityExtrema(vm, -vm, ratio, eta_m1_0, arc_angle(x, theta0), theta0, x,
                           fam_max, fam_min, zero)


def _degenerate_theta0(theta0):
    return abs(math.cos(theta0)) < 1e-15


def _arc_target(family, acute, branch, phi):
    """Extremal azimuthal difference for the primed families."""
    centre = math.pi if branch > 0 else -math.pi
    maximal = family in (SchemeTag.SMV_MaxVelocity, SchemeTag.SMVprime)
    below = maximal == acute
    return centre - phi if below else centre + phi, below


def _in_arc(dz, phi, below):
    for centre in (math.pi, -math.pi):
        if below and centre - phi <= dz < centre:
            return True
        if not below and centre < dz <= centre + phi:
            return True
    return False


def build_extremal_scheme(family, ctx, theta0, delta_zeta=None, *, branch=1,
                          obtuse=False, zeta0=0.0):
    """Scheme realizing the maximal (``SMV``) or minimal (``SmV``) velocity.

    Parameters
    ----------
    family : SchemeTag
        One of ``SMV_MaxVelocity``, ``SmV_MinVelocity``, ``SMVprime``,
        ``SmVprime``.
    ctx : ThermalContext or float
    theta0 : float
        Must differ from ``pi/2``.
    delta_zeta : float, optional
        Position on the admissible arc; defaults to the arc end, which gives
        the primed family with both postmeasurement states on the equator.
    branch : {1, -1}
        Arc around ``+pi`` or ``-pi`` when ``delta_zeta`` is not given.
    obtuse : bool
        Use ``pi - psi`` instead of ``psi`` for the varying polar angle.

    Raises
    ------
    DegenerateSchemeError
        For ``theta0 = pi/2``.
    DomainError
        If ``delta_zeta`` lies outside the family's admissible arc.
    """
    if family not in EXTREMAL_FAMILIES:
        raise ValueError(f"{family} is not an extremal-velocity family")
    if _degenerate_theta0(theta0):
        raise DegenerateSchemeError("theta0 = pi/2: the initial velocity vanishes for every scheme")
    x = _x_of(ctx)
    acute = theta0 < math.pi / 2.0
    phi = arc_angle(x, theta0)
    if phi == 0.0:
        raise DomainError("empty admissible arc (Q = 1)")
    end, below = _arc_target(family, acute, branch, phi)
    half = math.pi / 2.0
    if family in (SchemeTag.SMVprime, SchemeTag.SmVprime):
        if delta_zeta is not None and not math.isclose(delta_zeta, end, abs_tol=1e-12) \
                and not math.isclose(delta_zeta, _arc_target(family, acute, -branch, phi)[0],
                                     abs_tol=1e-12):
            raise DomainError(f"{family.value} requires delta_zeta = +-pi -+ phi")
        dz = end if delta_zeta is None else delta_zeta
        return MeasurementScheme.from_delta_zeta(theta0, half, half, dz, zeta0)
    dz = end if delta_zeta is None else float(delta_zeta)
    if not _in_arc(dz, phi, below):
        raise DomainError(f"delta_zeta = {dz} outside the admissible arc of {family.value}")
    psi = psi_angle(x, theta0, dz)
    vary = math.pi - psi if obtuse else psi
    if acute:
        return MeasurementScheme.from_delta_zeta(theta0, half, vary, dz, zeta0)
    return MeasurementScheme.from_delta_zeta(theta0, vary, half, dz, zeta0)


def extremal_initial_coherence(ctx, theta0, delta_zeta):
    """``|rho01(0)|`` of the extremal-velocity schemes at azimuthal difference ``delta_zeta``.

    ``(1 + e - (1 - e)|cos theta0|) |tan dzeta| / (4 (1 + e))``.

    Raises
    ------
    DomainError
        Outside the admissible arcs (where ``tan`` may be singular).
    """
    x = _x_of(ctx)
    phi = arc_angle(x, theta0)
    tol = 1e-12
    if not (_in_arc(delta_zeta, phi + tol, True) or _in_arc(delta_zeta, phi + tol, False)
            or any(math.isclose(delta_zeta, c, abs_tol=tol) for c in (math.pi, -math.pi))):
        raise DomainError(f"delta_zeta = {delta_zeta} outside the extremal arcs")
    e = math.exp(-x)
    c = abs(math.cos(theta0))
    return (1.0 + e - (1.0 - e) * c) * abs(math.tan(delta_zeta)) / (4.0 * (1.0 + e))


def max_extremal_initial_coherence(ctx, theta0):
    """Largest value of :func:`extremal_initial_coherence` over the arcs.

    ``sqrt((1 - e)|cos theta0| / (4 (1 + e)))``, reached at the arc ends.
    """
    x = _x_of(ctx)
    e = math.exp(-x)
    c = abs(math.cos(theta0))
    return math.sqrt((1.0 - e) * c / (4.0 * (1.0 + e)))


@dataclass(frozen=True)
class TransitionScan:
    """Initial velocity across ``dzeta = +-pi`` at ``q = Q``."""

    delta_zeta: np.ndarray
    velocity: np.ndarray
    eta_m1_0: float
    scheme_axis: str

    @property
    def ratio(self):
        return self.velocity / self.eta_m1_0


def critical_scheme(ctx, theta0, delta_zeta, zeta0=0.0):
    """Scheme with ``q = Q`` and one postmeasurement state on the equator.

    For ``Q <= 1`` this is ``theta2 = pi/2``, ``sin theta1 = Q``; for ``Q > 1``
    the roles swap (``theta1 = pi/2``, ``sin theta2 = 1/Q``) since
    ``sin theta1 <= 1``.
    """
    Q = q_critical(ctx, theta0)
    half = math.pi / 2.0
    if Q <= 1.0:
        return MeasurementScheme.from_delta_zeta(theta0, math.asin(Q), half, delta_zeta, zeta0)
    return MeasurementScheme.from_delta_zeta(theta0, half, math.asin(1.0 / Q), delta_zeta, zeta0)


def transition_scan(ctx, theta0, J=None, eps_grid=(1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6),
                    *, branch=1, eta_m1_0=None):
    """Velocity on ``dzeta = +-pi -+ eps`` and at ``+-pi`` itself, with ``q = Q``.

    The exact point is a full-decoherence scheme with zero velocity, while
    the one-sided limits are ``+-V_M``.
    """
    if eta_m1_0 is None:
        eta_m1_0 = 1.0 if J is None else _moment(J, None, -1, True)
    centre = math.pi if branch > 0 else -math.pi
    eps = np.sort(np.asarray(eps_grid, dtype=float))
    dzs = np.concatenate([centre - eps[::-1], [centre], centre + eps])
    ratios = np.array([velocity_ratio(critical_scheme(ctx, theta0, dz), ctx) for dz in dzs])
    axis = "theta2" if q_critical(ctx, theta0) <= 1.0 else "theta1"
    return TransitionScan(dzs, ratios * eta_m1_0, eta_m1_0, axis)
