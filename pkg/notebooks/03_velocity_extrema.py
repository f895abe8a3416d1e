# %% [markdown]
# # Extreme initial velocities
#
# The initial rate of change of |rho01| is bounded over all schemes. The
# bounds are reached by specific measurement families, which can be built
# explicitly and checked against a brute-force grid search.

# %%
import math

from dephaselab.oracle import search_velocity_extrema
from dephaselab.scheme import SchemeTag
from dephaselab.shorttime import build_extremal_scheme, velocity_extrema, velocity_ratio
from dephaselab.spectral import ThermalContext

ctx = ThermalContext.from_ratios(omega0_over_T=2.0, omega_s_over_T=1.0)
theta0 = 0.9
ext = velocity_extrema(ctx, theta0)
print("V_max/eta =", ext.v_max, "V_min/eta =", ext.v_min, "phi =", ext.phi)

# %%
for family in (SchemeTag.SMV_MaxVelocity, SchemeTag.SmV_MinVelocity):
    s = build_extremal_scheme(family, ctx, theta0)
    print(family.value, "->", velocity_ratio(s, ctx))

# %%
hi, lo = search_velocity_extrema(ctx, theta0, grid=48)
print("grid search:", hi.best_value, lo.best_value)
