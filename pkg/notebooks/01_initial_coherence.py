# %% [markdown]
# # Initial coherence after a nonselective measurement
#
# The qubit starts in thermal equilibrium, is measured along `n1` and `n2`
# (nonselectively), and is then left to dephase. This walkthrough evaluates
# the coherence right after the measurement and tags the special schemes.

# %%
import math

import numpy as np

from dephaselab.scheme import (
    MeasurementScheme,
    classify,
    initial_coherence,
    q_critical,
)
from dephaselab.spectral import ThermalContext

ctx = ThermalContext.from_ratios(omega0_over_T=0.5, omega_s_over_T=1.0)
print("x = omega0/T =", ctx.x)

# %% [markdown]
# Orthogonal measurement directions on the equator give the largest value, 1/2.

# %%
sm = MeasurementScheme.from_delta_zeta(1.0, math.pi / 2, math.pi / 2, 0.0)
print("|rho01(0)| =", abs(initial_coherence(sm, ctx)), classify(sm, ctx).tag)

# %% [markdown]
# At the critical ratio `q = Q` and an azimuthal difference of pi the two
# branches cancel and the initial coherence vanishes.

# %%
theta0 = math.pi / 8
q = q_critical(ctx, theta0)
# theta1 = pi/2 fixes theta2 through sin(theta1) = q sin(theta2)
s0 = MeasurementScheme.from_delta_zeta(theta0, math.pi / 2, math.asin(1 / q), math.pi)
print("Q =", q, "|rho01(0)| =", abs(initial_coherence(s0, ctx)), classify(s0, ctx).tag)

# %% [markdown]
# A coarse sweep over the azimuthal difference for equatorial measurements.

# %%
for dz in np.linspace(0.0, math.pi, 7):
    s = MeasurementScheme.from_delta_zeta(theta0, math.pi / 2, math.pi / 2, dz)
    print(f"delta_zeta = {dz:5.3f}  |rho01(0)| = {abs(initial_coherence(s, ctx)):.6f}")
