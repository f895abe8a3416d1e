"""Nonselective preparation-measurement schemes and their coefficients.

A scheme is fixed by three unit vectors on the Bloch sphere: ``n0`` defines
the measured observable, ``n1`` and ``n2`` the two postmeasurement states.
Only ``theta0``, ``sin(theta1)``, ``sin(theta2)`` and the azimuthal
difference ``zeta1 - zeta2`` enter any result.

Internally everything is expressed through the two branch amplitudes

    alpha = p u + r z v,      beta = e (r u + p z v),

with ``p = sin^2(theta0/2)``, ``r = cos^2(theta0/2)``, ``u = sin(theta1)``,
``v = sin(theta2)``, ``z = exp(-i dzeta)`` and ``e = exp(-omega0/T)``.  The
initial coherence is ``exp(i zeta1) (alpha + beta) / (2 (1 + e))`` and the
N-constants are ``N0 = |alpha + beta|^2 / e``, ``N1 + i N2 = (alpha + beta)
conj(alpha - beta) / e``.  This form never overflows at low temperature and
avoids the cancellation between large exponentials in the expanded
polynomials.
"""
from __future__ import annotations

import enum
import math
import sys
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSchemeError, DomainError

TWO_PI = 2.0 * math.pi
_EPS = np.finfo(float).eps
# |alpha + beta| below this multiple of eps times the summed term magnitudes
# is treated as an exact cancellation
_NULL_FACTOR = 16.0


def _polar_sine(theta):
    # exact zero on the poles, where math.sin(pi) would leave 1.2e-16
    return 0.0 if theta in (0.0, math.pi) else math.sin(theta)


@dataclass(frozen=True)
class MeasurementScheme:
    """Polar and azimuthal angles (radians) of ``n0``, ``n1``, ``n2``.

    Polar angles lie in ``[0, pi]``, azimuthal angles in ``[0, 2 pi)``.
    ``zeta0`` is carried along for completeness; no observable depends on it.
    """

    theta0: float
    zeta0: float
    theta1: float
    zeta1: float
    theta2: float
    zeta2: float

    def __post_init__(self):
        for name in ("theta0", "theta1", "theta2"):
            val = getattr(self, name)
            if not 0.0 <= val <= math.pi:
                raise DomainError(f"{name} = {val} outside [0, pi]")
        for name in ("zeta0", "zeta1", "zeta2"):
            val = getattr(self, name)
            if not 0.0 <= val < TWO_PI:
                raise DomainError(f"{name} = {val} outside [0, 2 pi)")

    @classmethod
    def from_delta_zeta(cls, theta0, theta1, theta2, delta_zeta, zeta0=0.0):
        """Scheme with the given azimuthal difference ``zeta1 - zeta2``.

        Nonnegative differences are placed on ``zeta1`` and negative ones on
        ``zeta2`` so that both azimuths stay in ``[0, 2 pi)``.
        """
        dz = float(delta_zeta)
        if not -TWO_PI < dz < TWO_PI:
            raise DomainError(f"delta_zeta = {dz} outside (-2 pi, 2 pi)")
        if dz >= 0.0:
            return cls(theta0, zeta0, theta1, dz, theta2, 0.0)
        return cls(theta0, zeta0, theta1, 0.0, theta2, -dz)

    @classmethod
    def from_q(cls, theta0, q, theta2, delta_zeta, obtuse=False, zeta0=0.0):
        """Scheme with ``sin(theta1) = q sin(theta2)``.

        ``obtuse`` selects ``theta1 = pi - arcsin(...)`` instead of the acute
        branch.  Only sines enter the formulas, so both branches give the same
        coherence.
        """
        s1 = q * math.sin(theta2)
        if not 0.0 <= s1 <= 1.0 + 1e-15:
            raise DomainError(f"q sin(theta2) = {s1} outside [0, 1]")
        theta1 = math.asin(min(s1, 1.0))
        if obtuse:
            theta1 = math.pi - theta1
        return cls.from_delta_zeta(theta0, theta1, theta2, delta_zeta, zeta0)

    @property
    def delta_zeta(self):
        return self.zeta1 - self.zeta2

    @property
    def u(self):
        return _polar_sine(self.theta1)

    @property
    def v(self):
        return _polar_sine(self.theta2)

    @property
    def q(self):
        """``sin(theta1) / sin(theta2)``; ``inf`` when ``theta2`` is 0 or pi."""
        v = self.v
        if self.theta2 in (0.0, math.pi) or v == 0.0:
            return math.inf if self.u != 0.0 else math.nan
        return self.u / v

    def with_delta_zeta(self, delta_zeta):
        return MeasurementScheme.from_delta_zeta(
            self.theta0, self.theta1, self.theta2, delta_zeta, self.zeta0)

    def as_dict(self):
        return {k: getattr(self, k) for k in
                ("theta0", "zeta0", "theta1", "zeta1", "theta2", "zeta2")}


@dataclass(frozen=True)
class SchemeCoefficients:
    """N-constants, their ratios and the initial coherence of a scheme.

    ``n0`` and ``n1`` grow like ``exp(omega0/T)`` and are ``inf`` at ``T = 0``;
    the ratios ``a1``, ``a2``, ``a3`` stay finite.  For schemes whose initial
    coherence vanishes identically the ratios are ``nan``.
    """

    n0: float
    n1: float
    n2: float
    a1: float
    a2: float
    a3: float
    rho0: complex
    a0: float

    @property
    def degenerate(self):
        return self.n0 == 0.0

    def radicand(self, y):
        """``1 + a2 sin(2y) + a3 sin(y)^2``."""
        return 1.0 + self.a2 * np.sin(2.0 * y) + self.a3 * np.sin(y) ** 2


def _x_of(ctx_or_x):
    if hasattr(ctx_or_x, "x"):
        return float(ctx_or_x.x)
    x = float(ctx_or_x)
    if not x > 0:
        raise DomainError("omega0/T must be positive")
    return x


def _boltzmann(x):
    return np.exp(-np.asarray(x, dtype=float))


def branch_amplitudes(theta0, u, v, delta_zeta, x):
    """Vectorized ``(alpha, beta, e)``; see the module docstring."""
    theta0 = np.asarray(theta0, dtype=float)
    p = np.sin(theta0 / 2.0) ** 2
    r = np.cos(theta0 / 2.0) ** 2
    e = _boltzmann(x)
    z = np.exp(-1j * np.asarray(delta_zeta, dtype=float))
    alpha = p * u + r * z * v
    beta = e * (r * u + p * z * v)
    return alpha, beta, e


def _term_scale(theta0, u, v, x):
    """Sum of the magnitudes of the terms adding up to ``alpha + beta``."""
    p = np.sin(np.asarray(theta0, dtype=float) / 2.0) ** 2
    r = 1.0 - p
    e = _boltzmann(x)
    return np.abs(u) * (p + e * r) + np.abs(v) * (r + e * p)


def _is_null(total, scale):
    return np.abs(total) <= _NULL_FACTOR * _EPS * scale


def coherence_magnitude(theta0, u, v, delta_zeta, x):
    """Vectorized ``|rho01(0)|``."""
    alpha, beta, e = branch_amplitudes(theta0, u, v, delta_zeta, x)
    total = alpha + beta
    null = _is_null(total, _term_scale(theta0, u, v, x))
    return np.where(null, 0.0, np.abs(total)) / (2.0 * (1.0 + e))


def velocity_ratio_grid(theta0, u, v, delta_zeta, x):
    """Vectorized initial velocity over ``eta_{-1,0}``, i.e. ``|rho01(0)| a2``.

    Equals ``e cos(theta0) sin(dzeta) u v / ((1 + e) |alpha + beta|)`` and is
    set to 0 where the initial coherence vanishes identically.
    """
    alpha, beta, e = branch_amplitudes(theta0, u, v, delta_zeta, x)
    total = np.abs(alpha + beta)
    null = _is_null(total, _term_scale(theta0, u, v, x))
    num = e * np.cos(theta0) * np.sin(delta_zeta) * u * v
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / ((1.0 + e) * np.where(null, 1.0, total))
    return np.where(null, 0.0, out)


def q_critical(ctx_or_x, theta0):
    """Critical ratio ``Q`` at which ``q = Q`` with ``dzeta = +-pi`` cancels the coherence.

    Accepts a :class:`ThermalContext` or the ratio ``x = omega0/T``
    (``math.inf`` for zero temperature).  Returns ``inf`` when the
    denominator vanishes (``theta0 = 0`` at ``T = 0``).
    """
    x = _x_of(ctx_or_x)
    e = math.exp(-x)
    c = math.cos(theta0)
    num = 1.0 + e + (1.0 - e) * c
    den = 1.0 + e - (1.0 - e) * c
    if den <= 0.0:
        return math.inf
    return num / den


def n_constants(s, ctx_or_x):
    """N-constants, a-coefficients, ``A0`` and the initial coherence.

    Returns
    -------
    SchemeCoefficients
    """
    x = _x_of(ctx_or_x)
    alpha, beta, e = branch_amplitudes(s.theta0, s.u, s.v, s.delta_zeta, x)
    alpha, beta, e = complex(alpha), complex(beta), float(e)
    total = alpha + beta
    null = bool(_is_null(total, _term_scale(s.theta0, s.u, s.v, x)))
    ex = math.exp(x) if x < 700 else math.inf
    # an N0 below the smallest normal float is treated as vanishing
    null = null or abs(total) ** 2 * ex < sys.float_info.min
    if null:
        total = 0.0j
    diff = alpha - beta
    n0 = abs(total) ** 2 * ex if not null else 0.0
    n1 = (total * diff.conjugate()).real * ex if not null else 0.0
    n2 = 2.0 * math.cos(s.theta0) * math.sin(s.delta_zeta) * s.u * s.v
    p = math.sin(s.theta0 / 2.0) ** 2
    r = math.cos(s.theta0 / 2.0) ** 2
    amp = (p + e * r)
    a0 = amp * amp * ex if amp else 0.0
    rho0 = complex(np.exp(1j * s.zeta1)) * total / (2.0 * (1.0 + e))
    if null:
        a1 = a2 = a3 = math.nan
    else:
        # ratios from normalized amplitudes, safe for tiny |alpha + beta|
        m = abs(total)
        tn, dn = total / m, diff / m
        a1 = (tn * dn.conjugate()).real
        a2 = (2.0 * e * math.cos(s.theta0) * math.sin(s.delta_zeta) * s.u / m) * (s.v / m)
        # 1 + a3 = |alpha - beta|^2 / |alpha + beta|^2, exactly
        a3 = abs(dn) ** 2 - 1.0
    return SchemeCoefficients(n0, n1, n2, a1, a2, a3, rho0, a0)


def initial_coherence(s, ctx_or_x):
    """Postmeasurement coherence ``rho01(0)`` (complex); ``|rho01(0)| <= 1/2``."""
    return n_constants(s, ctx_or_x).rho0


def a_coefficients(c):
    """``(a1, a2, a3)`` of a :class:`SchemeCoefficients`.

    Raises
    ------
    DegenerateSchemeError
        If ``N0 = 0``: the coherence then vanishes at all times.
    """
    if c.n0 == 0.0:
        raise DegenerateSchemeError("N0 = 0: coherence vanishes identically")
    return c.a1, c.a2, c.a3


def low_temperature_coherence(s):
    """``|rho01(0)|`` in the limit ``T << omega0``."""
    p = math.sin(s.theta0 / 2.0) ** 2
    r = math.cos(s.theta0 / 2.0) ** 2
    u, v = s.u, s.v
    val = p * p * u * u + r * r * v * v + 0.5 * math.sin(s.theta0) ** 2 * u * v * math.cos(s.delta_zeta)
    return 0.5 * math.sqrt(max(val, 0.0))


def high_temperature_coherence(s):
    """``|rho01(0)|`` in the limit ``T >> omega0``."""
    u, v = s.u, s.v
    val = u * u + v * v + 2.0 * u * v * math.cos(s.delta_zeta)
    return 0.25 * math.sqrt(max(val, 0.0))


def critical_cosine(ctx_or_x, theta0):
    """``min(Q, 1/Q)``, the cosine of the arc half-width ``phi``."""
    x = _x_of(ctx_or_x)
    e = math.exp(-x)
    c = abs(math.cos(theta0))
    return (1.0 + e - c * (1.0 - e)) / (1.0 + e + c * (1.0 - e))


def arc_angle(ctx_or_x, theta0):
    """Half-width ``phi`` of the azimuthal arcs realizing the velocity extrema."""
    return math.acos(min(1.0, critical_cosine(ctx_or_x, theta0)))


def psi_angle(ctx_or_x, theta0, delta_zeta):
    """Polar angle ``psi`` of the varying postmeasurement state on the extremal arcs.

    Raises
    ------
    DomainError
        If ``|cos(dzeta)|`` is too small for ``sin(psi) <= 1``.
    """
    ratio = critical_cosine(ctx_or_x, theta0)
    cz = abs(math.cos(delta_zeta))
    # absolute slack: rounding of dzeta near the arc end shifts cos by ~eps
    if cz == 0.0 or ratio - cz > 1e-14:
        raise DomainError(f"no psi for delta_zeta = {delta_zeta}: |cos| below {ratio}")
    return math.asin(min(1.0, ratio / cz))


# --- classification ----------------------------------------------------------

class SchemeTag(enum.Enum):
    S0_FullDecoherence = "S0"
    SM_MaxCoherence = "SM"
    SMprime_LowT = "SM'"
    Sd_Decreasing = "Sd"
    Si_Increasing = "Si"
    SMV_MaxVelocity = "SMV"
    SmV_MinVelocity = "SmV"
    SMVprime = "SMV'"
    SmVprime = "SmV'"
    ZeroInitialCoherence = "Zero"
    Generic = "Generic"


@dataclass(frozen=True)
class SchemeClass:
    tag: SchemeTag
    tol: float


def _near(a, b, tol):
    return abs(a - b) <= tol


def _near_any(a, targets, tol):
    return any(_near(a, t, tol) for t in targets)


def _arc_membership(dz, phi, closed_below, tol):
    """Membership of ``dz`` in ``[+-pi - phi, +-pi[`` (or the mirrored arc).

    ``closed_below`` selects the arcs ending at ``+-pi`` from below; otherwise
    the arcs ``]+-pi, +-pi + phi]``.  The open end is excluded by a strict
    inequality beyond the tolerance.
    """
    for centre in (math.pi, -math.pi):
        if closed_below:
            if centre - phi - tol <= dz < centre - tol:
                return True
        elif centre + tol < dz <= centre + phi + tol:
            return True
    return False


def classify(s, ctx_or_x, tol=1e-6):
    """Assign a scheme to its special family.

    Families overlap; the first match in the order
    ``S0 > SM > SMV'/SmV' > SMV/SmV > SM' > Sd/Si > Zero > Generic`` wins.
    Angles are compared with absolute tolerance ``tol`` and ``q`` with
    ``|q - Q| <= tol``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    x = _x_of(ctx_or_x)
    half = math.pi / 2.0
    th0, th1, th2, dz = s.theta0, s.theta1, s.theta2, s.delta_zeta
    poles = (0.0, math.pi)
    on_pole1 = _near_any(th1, poles, tol)
    on_pole2 = _near_any(th2, poles, tol)
    mk = lambda tag: SchemeClass(tag, tol)

    if on_pole1 and on_pole2:
        return mk(SchemeTag.S0_FullDecoherence)
    if not on_pole2 and _near_any(dz, (math.pi, -math.pi), tol):
        Q = q_critical(x, th0)
        if math.isfinite(Q) and abs(s.q - Q) <= tol:
            return mk(SchemeTag.S0_FullDecoherence)
    both_half = _near(th1, half, tol) and _near(th2, half, tol)
    if both_half and _near_any(dz, (0.0, TWO_PI, -TWO_PI), tol):
        return mk(SchemeTag.SM_MaxCoherence)

    acute = th0 < half - tol
    obtuse = th0 > half + tol
    if acute or obtuse:
        phi = arc_angle(x, th0)
        if both_half and phi > tol:
            minus = [c - phi for c in (math.pi, -math.pi)]
            plus = [c + phi for c in (math.pi, -math.pi)]
            if _near_any(dz, minus, tol):
                return mk(SchemeTag.SMVprime if acute else SchemeTag.SmVprime)
            if _near_any(dz, plus, tol):
                return mk(SchemeTag.SmVprime if acute else SchemeTag.SMVprime)
        for below in (True, False):
            if phi <= tol or not _arc_membership(dz, phi, below, tol):
                continue
            try:
                psi = psi_angle(x, th0, dz)
            except DomainError:
                continue
            # SMV: below-arcs with the varying state on n2 for acute theta0,
            # above-arcs with the varying state on n1 for obtuse theta0
            if acute:
                fits = _near(th1, half, tol) and _near_any(th2, (psi, math.pi - psi), tol)
                tag = SchemeTag.SMV_MaxVelocity if below else SchemeTag.SmV_MinVelocity
            else:
                fits = _near(th2, half, tol) and _near_any(th1, (psi, math.pi - psi), tol)
                tag = SchemeTag.SmV_MinVelocity if below else SchemeTag.SMV_MaxVelocity
            if fits:
                return mk(tag)

    if _near_any(th0, poles, tol):
        if both_half:
            return mk(SchemeTag.SMprime_LowT)
        if _near(th0, 0.0, tol) and _near(th2, half, tol):
            return mk(SchemeTag.SMprime_LowT)
        if _near(th0, math.pi, tol) and _near(th1, half, tol):
            return mk(SchemeTag.SMprime_LowT)

    sin_dz = math.sin(dz)
    if (acute or obtuse) and not (on_pole1 or on_pole2) and abs(sin_dz) > tol:
        sign = math.cos(th0) * sin_dz
        return mk(SchemeTag.Sd_Decreasing if sign < 0 else SchemeTag.Si_Increasing)

    if abs(initial_coherence(s, x)) <= tol:
        return mk(SchemeTag.ZeroInitialCoherence)
    return mk(SchemeTag.Generic)
