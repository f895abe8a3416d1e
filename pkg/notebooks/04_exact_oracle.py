# %% [markdown]
# # Exact diagonalization against the closed form
#
# A few bath modes truncated in Fock space give an independent evaluation of
# the coherence. For generic schemes both agree to round-off. For the scheme
# whose initial coherence vanishes, the closed-form `coherence` returns 0 for
# all times, while the exact model (and `continuous_coherence`) keeps a
# nonzero coherence at t > 0.

# %%
import math

import numpy as np

from dephaselab.dynamics import coherence, continuous_coherence
from dephaselab.oracle import FockOracleConfig, compare_with_analytic, converge_fock
from dephaselab.scheme import MeasurementScheme
from dephaselab.shorttime import critical_scheme
from dephaselab.spectral import ThermalContext

ctx = ThermalContext(temperature=0.5, omega0=0.5)
modes = ((0.3, 1.0),)
times = np.linspace(0.0, 6.0, 13)

# %%
generic = MeasurementScheme.from_delta_zeta(0.7, 1.1, 2.0, 0.9)
cmp = compare_with_analytic(FockOracleConfig(modes, 12, ctx, generic), times, tol=1e-10)
print("generic scheme, max deviation:", cmp.max_deviation)

# %%
s0 = critical_scheme(ctx, 0.7, math.pi)
cfg = FockOracleConfig(modes, 12, ctx, s0)
traj, _ = converge_fock(cfg, times, tol=1e-10)
J = cfg.spectral_density()
for t, v in zip(times[::3], traj.values[::3]):
    print(f"t = {t:3.1f}  exact = {abs(v):.3e}"
          f"  continuous = {abs(continuous_coherence(s0, J, ctx, t)):.3e}"
          f"  coherence() = {abs(coherence(s0, J, ctx, t)):.1e}")
