"""
## Which walk lives under a square well?

V = v0 at the wall, 0 elsewhere.  For v0 < -ln 2 the interface is bound and
the matching walk has a constant push toward the wall, q/p = e^{-v0} - 1.
"""
import math

import numpy as np

from walkline import continued_fraction_invert, kernel_from_sos, perron_ground_state
from walkline.presets import square_well_model
from walkline.sos_to_rw import ground_state_a, recursion_residual, square_well_analysis

v0 = -1.0
m = square_well_model(v0, 2000)
g = perron_ground_state(m)
a, rho = square_well_analysis(v0).second_ansatz
print(f"rho: solver {g.rho:.15f}, closed form {rho:.15f}")

k = kernel_from_sos(m, g)
x = np.arange(1, 8)
print("q/p near the wall:", k.P[x, x - 1] / k.P[x, x + 1], " e-1 =", math.e - 1)

## The ground-state coupling solves the nested fraction ...
a_gs = ground_state_a(m, g)
print("recursion residual:", recursion_residual(m.V, a_gs, g.log_rho).max())

## ... but iterating the fraction forward does not stay on it:
## the decaying solution is repelling, each step multiplies errors by 1/a^2.
a_cf = continued_fraction_invert(m.V, g.log_rho).a
for X in (10, 20, 30, 40, 50):
    print(X, a_gs[X], a_cf[X])
print("growth per step 1/a^2 =", 1 / a**2)

## Too deep a well with rho = 1 has no walk at all
try:
    continued_fraction_invert(square_well_model(-2.0, 20).V, 0.0)
except Exception as exc:
    print(type(exc).__name__, exc)
