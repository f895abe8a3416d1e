import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dephaselab.dynamics import (
    asymptotic_magnitude,
    coherence,
    compute_trajectory,
    continuous_coherence,
    decoupled_coherence,
    default_time_grid,
    dephasing_factor,
    format_csv,
    phase_shift,
    read_csv,
    relative_magnitude_change,
    resolve_threads,
    upsilon0,
)
from dephaselab.errors import DegenerateSchemeError, UndefinedPhaseError
from dephaselab.scheme import MeasurementScheme, SchemeCoefficients, initial_coherence, n_constants, q_critical
from dephaselab.spectral import DiscreteModes, Gapped, OhmicLike, ThermalContext, moment
from literal import literal_n, literal_rho0

PI = math.pi
HALF = OhmicLike(0.5)
GENERIC = MeasurementScheme.from_delta_zeta(0.7, 1.1, 2.0, 0.9)


def half_ohmic_xi0(t):
    """Zero-temperature dephasing factor of OhmicLike(1/2), omega_s = 1, in closed form."""
    return 2 * math.sqrt(PI) * ((1 + 1j * t) ** 0.5).real - 2 * math.sqrt(PI)


def half_ohmic_upsilon(t):
    return -2 * math.sqrt(PI) * ((1 - 1j * t) ** 0.5).imag


def discrete_integrals(weights, freqs, T, t):
    xi = sum(w / math.tanh(f / (2 * T)) * (1 - math.cos(f * t)) / f**2 for w, f in zip(weights, freqs))
    ups = sum(w * math.sin(f * t) / f**2 for w, f in zip(weights, freqs))
    return xi, ups


class TestDephasingFactor:
    def test_zero_time(self):
        assert dephasing_factor(HALF, ThermalContext(1.0, 1.0), 0.0) == 0.0

    def test_single_mode_zero_temperature(self):
        J = DiscreteModes([0.36], [1.7])
        for t in (0.1, 1.0, 7.3):
            expect = 0.36 * (1 - math.cos(1.7 * t)) / 1.7**2
            assert dephasing_factor(J, ThermalContext(0.0, 1.0), t) == pytest.approx(expect, rel=1e-14)

    @pytest.mark.parametrize("t", [1e-4, 0.1, 1.0, 5.0, 40.0, 300.0])
    def test_half_ohmic_closed_form(self, t):
        got = dephasing_factor(HALF, ThermalContext(0.0, 1.0), t)
        assert got == pytest.approx(half_ohmic_xi0(t), rel=1e-8)

    def test_half_ohmic_unit_time_vs_mpmath(self):
        mpmath.mp.dps = 25
        f = lambda w: mpmath.sqrt(w) * mpmath.exp(-w) * (1 - mpmath.cos(w)) / w**2
        ref = float(mpmath.quad(f, [0, 1, 10, mpmath.inf]))
        assert dephasing_factor(HALF, ThermalContext(0.0, 1.0), 1.0) == pytest.approx(ref, rel=1e-8)

    @pytest.mark.parametrize("t", [0.3, 2.0, 12.0])
    def test_thermal_vs_mpmath(self, t):
        J, T = OhmicLike(1.5), 0.8
        mpmath.mp.dps = 25
        f = lambda w: (w**1.5 * mpmath.exp(-w) * mpmath.coth(w / (2 * T))
                       * 2 * mpmath.sin(w * t / 2) ** 2 / w**2)
        ref = float(mpmath.quad(f, mpmath.linspace(0, 60, 200) + [mpmath.inf]))
        assert dephasing_factor(J, ThermalContext(T, 1.0), t) == pytest.approx(ref, rel=1e-8)

    def test_negative_time(self):
        with pytest.raises(ValueError):
            dephasing_factor(HALF, ThermalContext(1.0, 1.0), -1.0)

    @settings(max_examples=20, deadline=None)
    @given(t=st.floats(1e-3, 50.0))
    def test_nonnegative(self, t):
        assert dephasing_factor(OhmicLike(1.0), ThermalContext(0.5, 1.0), t) >= 0.0


class TestUpsilon:
    def test_zero_time(self):
        assert upsilon0(HALF, 0.0) == 0.0

    def test_single_mode(self):
        J = DiscreteModes([0.36], [1.7])
        for t in (0.1, 1.0, 7.3):
            assert upsilon0(J, t) == pytest.approx(0.36 * math.sin(1.7 * t) / 1.7**2, rel=1e-14)

    @pytest.mark.parametrize("t", [1e-4, 0.5, 3.0, 25.0, 200.0])
    def test_half_ohmic_closed_form(self, t):
        assert upsilon0(HALF, t) == pytest.approx(half_ohmic_upsilon(t), rel=1e-8)

    def test_initial_slope(self):
        h = 1e-6
        slope = upsilon0(HALF, h) / h
        assert slope == pytest.approx(moment(HALF, None, -1, True), rel=1e-4)


class TestPhaseShift:
    coeffs = n_constants(GENERIC, 0.8)

    def test_zero(self):
        assert phase_shift(self.coeffs, 0.0) == 0.0

    def test_n1_zero(self):
        c = SchemeCoefficients(1.0, 0.0, 0.3, 0.0, 0.3, -0.91, 0.5 + 0j, 1.0)
        assert phase_shift(c, 0.4) == 0.0

    def test_tangent_identity(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            n0 = rng.uniform(0.1, 3)
            n1, n2 = rng.uniform(-3, 3, 2)
            c = SchemeCoefficients(n0, n1, n2, n1 / n0, n2 / n0, (n1**2 + n2**2) / n0**2 - 1, 0.5 + 0j, 1.0)
            y = rng.uniform(-3, 3)
            chi = phase_shift(c, y)
            if abs(math.cos(chi)) > 1e-6:
                rhs = n1 * math.sin(y) / (n0 * math.cos(y) + n2 * math.sin(y))
                assert math.tan(chi) == pytest.approx(rhs, rel=1e-10, abs=1e-12)

    def test_unwrapped_along_trajectory(self):
        c = SchemeCoefficients(1.0, 2.0, 0.0, 2.0, 0.0, 3.0, 0.5 + 0j, 1.0)
        chi = phase_shift(c, np.linspace(0, 20, 2001))
        assert chi[0] == 0.0
        assert np.max(np.abs(np.diff(chi))) < 0.1

    def test_undefined_phase(self):
        # pick y where cos(y) + a2 sin(y) rounds to exactly zero
        for y in np.linspace(0.1, 1.5, 200):
            a2 = -math.cos(y) / math.sin(y)
            if math.cos(y) + a2 * math.sin(y) == 0.0:
                break
        c = SchemeCoefficients(1.0, 0.0, a2, 0.0, a2, a2 * a2 - 1, 0.5 + 0j, 1.0)
        with pytest.raises(UndefinedPhaseError):
            phase_shift(c, y)

    def test_degenerate(self):
        c = SchemeCoefficients(0.0, 0.0, 0.0, math.nan, math.nan, math.nan, 0j, 1.0)
        with pytest.raises(DegenerateSchemeError):
            phase_shift(c, 0.1)


def literal_coherence(s, weights, freqs, ctx, t):
    """Product form assembled from literal N constants and exact mode sums."""
    x = ctx.x
    n0, n1, n2, _ = literal_n(s.theta0, s.theta1, s.theta2, s.delta_zeta, x)
    a2, a3 = n2 / n0, (n1**2 + n2**2) / n0**2 - 1
    xi, y = discrete_integrals(weights, freqs, ctx.temperature, t)
    chi = math.atan2(n1 * math.sin(y), n0 * math.cos(y) + n2 * math.sin(y))
    rho0 = literal_rho0(s.theta0, s.zeta1, s.theta1, s.theta2, s.delta_zeta, x)
    rad = 1 + a2 * math.sin(2 * y) + a3 * math.sin(y) ** 2
    return rho0 * cmath.exp(1j * (ctx.omega0 * t + chi) - xi) * math.sqrt(rad)


class TestCoherence:
    def test_initial_value(self):
        ctx = ThermalContext(1.0, 0.5)
        assert coherence(GENERIC, HALF, ctx, 0.0) == initial_coherence(GENERIC, ctx)

    @pytest.mark.parametrize("scheme", [
        GENERIC,
        MeasurementScheme.from_delta_zeta(2.4, 0.3, 1.3, -2.2),
        MeasurementScheme.from_delta_zeta(0.2, PI / 2, PI / 2, 0.0),
    ])
    def test_literal_product_form_two_modes(self, scheme):
        w, f = [0.36, 0.16], [1.0, 1.7]
        J = DiscreteModes(w, f)
        ctx = ThermalContext(0.5, 1.0)
        for t in (0.1, 0.7, 3.0, 11.0):
            assert abs(coherence(scheme, J, ctx, t) - literal_coherence(scheme, w, f, ctx, t)) < 1e-12

    def test_critical_scheme_returns_zero(self):
        ctx = ThermalContext.from_ratios(0.01, 0.1)
        Q = q_critical(ctx, PI / 8)
        assert Q > 1
        s = MeasurementScheme.from_delta_zeta(PI / 8, PI / 2, math.asin(1 / Q), PI)
        for t in (0.0, 0.01, 0.5, 3.0):
            assert coherence(s, HALF, ctx, t) == 0

    def test_continuous_form_agrees_on_generic(self):
        ctx = ThermalContext(2.0, 1.0)
        rng = np.random.default_rng(9)
        for _ in range(20):
            th = rng.uniform(0, PI, 3)
            s = MeasurementScheme.from_delta_zeta(*th, rng.uniform(-6, 6))
            t = rng.uniform(0.01, 5)
            a = coherence(s, HALF, ctx, t)
            b = continuous_coherence(s, HALF, ctx, t)
            assert abs(a - b) <= 1e-13

    @settings(max_examples=30, deadline=None)
    @given(th0=st.floats(0, PI), th1=st.floats(0, PI), th2=st.floats(0, PI),
           dz=st.floats(-6.2, 6.2), t=st.floats(1e-3, 10.0))
    def test_envelope(self, th0, th1, th2, dz, t):
        s = MeasurementScheme.from_delta_zeta(th0, th1, th2, dz)
        ctx = ThermalContext(0.7, 1.0)
        c = n_constants(s, ctx)
        val = abs(coherence(s, HALF, ctx, t))
        if c.n0 == 0.0:
            assert val == 0.0
            return
        env = abs(c.rho0) * math.exp(-dephasing_factor(HALF, ctx, t)) * math.sqrt(1 + abs(c.a2) + abs(c.a3))
        assert val <= env * (1 + 1e-12)
        assert val <= 0.5 + 1e-12

    def test_enhancement_over_decoupled(self):
        # dzeta = pi leaves N2 at rounding level; opposite-sign branches give a1^2 > 1
        s = MeasurementScheme.from_delta_zeta(0.3, 0.4, 1.4, PI)
        ctx = ThermalContext(0.5, 1.0)
        c = n_constants(s, ctx)
        assert abs(c.a2) < 1e-15 and c.a1**2 > 1
        for t in np.linspace(0.05, 8, 12):
            base = decoupled_coherence(c.rho0, HALF, ctx, t)
            assert abs(coherence(s, HALF, ctx, t)) >= abs(base) * (1 - 1e-14)

    def test_relative_change_matches(self):
        ctx = ThermalContext(2.0, 1.0)
        for t in (1e-3, 0.2, 2.0):
            rel = relative_magnitude_change(GENERIC, HALF, ctx, t)
            direct = abs(coherence(GENERIC, HALF, ctx, t)) / abs(initial_coherence(GENERIC, ctx)) - 1
            assert rel == pytest.approx(direct, rel=1e-9, abs=1e-15)


class TestDecoupled:
    def test_initial(self):
        assert decoupled_coherence(0.3 + 0.1j, HALF, ThermalContext(1.0, 1.0), 0.0) == 0.3 + 0.1j

    def test_ratio_is_radicand_root(self):
        ctx = ThermalContext(1.2, 0.6)
        rng = np.random.default_rng(4)
        for _ in range(10):
            th = rng.uniform(0.05, PI - 0.05, 3)
            s = MeasurementScheme.from_delta_zeta(*th, rng.uniform(-6, 6))
            c = n_constants(s, ctx)
            t = rng.uniform(0.1, 4)
            y = upsilon0(HALF, t)
            ratio = abs(coherence(s, HALF, ctx, t)) / abs(decoupled_coherence(c.rho0, HALF, ctx, t))
            assert ratio == pytest.approx(math.sqrt(c.radicand(y)), rel=1e-12)

    def test_ungapped_decays_fully(self):
        ctx = ThermalContext(1.0, 1.0)
        assert abs(decoupled_coherence(0.5, HALF, ctx, 2000.0)) < 1e-10


class TestAsymptotic:
    def test_gapped_residual_positive(self):
        J = Gapped(OhmicLike(0.5), omega_g=0.5)
        assert asymptotic_magnitude(GENERIC, J, ThermalContext(1.0, 1.0)) > 0

    def test_ungapped_zero(self):
        assert asymptotic_magnitude(GENERIC, HALF, ThermalContext(1.0, 1.0)) == 0.0

    def test_zero_initial(self):
        s = MeasurementScheme.from_delta_zeta(0.4, 0.0, 0.0, 0.0)
        J = Gapped(OhmicLike(0.5), omega_g=0.5)
        assert asymptotic_magnitude(s, J, ThermalContext(1.0, 1.0)) == 0.0

    def test_long_time_approach(self):
        J = Gapped(OhmicLike(1.0), omega_g=1.0)
        ctx = ThermalContext(0.5, 1.0)
        target = asymptotic_magnitude(GENERIC, J, ctx)
        d50 = abs(abs(coherence(GENERIC, J, ctx, 50.0)) - target)
        d100 = abs(abs(coherence(GENERIC, J, ctx, 100.0)) - target)
        assert d100 < d50 < 5e-3


class TestTrajectory:
    ctx = ThermalContext(1.0, 0.5)

    def test_values_and_bounds(self):
        tr = compute_trajectory(GENERIC, HALF, self.ctx, t_max=3.0)
        assert tr.times[0] == 0.0
        assert tr.values[0] == initial_coherence(GENERIC, self.ctx)
        assert np.all(tr.magnitude <= 0.5 + 1e-12)

    def test_idempotent_sampling(self):
        times = np.array([0.0, 0.01, 0.3, 1.7])
        tr = compute_trajectory(GENERIC, HALF, self.ctx, times)
        for t, v in zip(times, tr.values):
            assert v == pytest.approx(coherence(GENERIC, HALF, self.ctx, t), abs=1e-15)

    def test_threads_deterministic(self):
        times = np.linspace(0, 2, 9)
        a = compute_trajectory(GENERIC, HALF, self.ctx, times, threads=1)
        b = compute_trajectory(GENERIC, HALF, self.ctx, times, threads=4)
        np.testing.assert_array_equal(a.values, b.values)

    def test_csv_round_trip(self):
        tr = compute_trajectory(GENERIC, HALF, self.ctx, np.linspace(0, 1, 5))
        text = tr.to_csv()
        header, data = read_csv(text)
        assert header == ["t_omega_s", "re", "im", "abs", "phase", "xi", "upsilon"]
        np.testing.assert_array_equal(data, tr.rows())
        assert format_csv(header, data) == text

    def test_rejects_bad_times(self):
        with pytest.raises(ValueError):
            compute_trajectory(GENERIC, HALF, self.ctx, [0.0, 0.5, 0.4])
        with pytest.raises(ValueError):
            compute_trajectory(GENERIC, HALF, self.ctx)

    def test_default_grid(self):
        g = default_time_grid(1.0, 5.0)
        assert g[0] == 0.0 and g[-1] == pytest.approx(5.0)
        assert np.all(np.diff(g) > 0)
        assert np.sum((g > 0) & (g <= 1.0)) >= 4 * 400

    def test_resolve_threads(self, monkeypatch):
        monkeypatch.setenv("DEPHASELAB_THREADS", "3")
        assert resolve_threads() == 3
        assert resolve_threads(2) == 2
        monkeypatch.delenv("DEPHASELAB_THREADS")
        assert resolve_threads() == 1
