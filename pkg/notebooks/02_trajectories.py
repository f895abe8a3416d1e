# %% [markdown]
# # Coherence trajectories near the vanishing scheme
#
# Schemes with `q = Q` and an azimuthal difference close to pi start with a
# small coherence. Their magnitude relative to the initial value can grow
# before the bath washes it out.

# %%
import math

import numpy as np

from dephaselab.dynamics import compute_trajectory
from dephaselab.scheme import MeasurementScheme, initial_coherence, q_critical
from dephaselab.spectral import OhmicLike, ThermalContext

J = OhmicLike(alpha=0.5, omega_s=1.0)
ctx = ThermalContext.from_ratios(omega0_over_T=0.01, omega_s_over_T=0.1)
theta0 = math.pi / 8
q = q_critical(ctx, theta0)
theta2 = math.asin(1 / q)  # sin(theta1) = q sin(theta2) with theta1 = pi/2
times = np.linspace(0.0, 0.6, 61)

# %%
for dz in (3.09, 3.11, 3.12, 3.20):
    s = MeasurementScheme.from_delta_zeta(theta0, math.pi / 2, theta2, dz)
    traj = compute_trajectory(s, J, ctx, times)
    rel = traj.magnitude / abs(initial_coherence(s, ctx))
    print(f"delta_zeta = {dz:4.2f}  max |rho/rho0| = {rel.max():7.3f}"
          f"  at omega_s t = {times[rel.argmax()]:.2f}  final = {rel[-1]:.3f}")

# %% [markdown]
# The same curves come out of the command-line tool with
# `dephaselab evolve --figure 1 --out fig1.csv`.
