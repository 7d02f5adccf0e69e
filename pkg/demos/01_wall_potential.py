"""
## Wall potentials from a drifting walk

A +-1 walk whose coupling is phi(x) = delta/(2x) is pulled toward the wall
when delta > 0.  Its SOS twin has a binding site at X = 0 and a potential
tail delta(2+delta)/(8 X^2).
"""
import numpy as np

from walkline import power_tail_phi, sos_from_phi
from walkline.phase import fit_tail

deltas = [1.2, 0.5, -0.2, -1.2]
M = 2000

print("X  " + "  ".join(f"delta={d:>5}" for d in deltas))
models = {d: sos_from_phi(power_tail_phi(d, 0.0, M)) for d in deltas}
for X in range(11):
    print(f"{X:<3}" + "  ".join(f"{models[d].V[X]:>11.6f}" for d in deltas))

# V(0) = -(ln 2 + delta) exactly
print(np.allclose([models[d].V[0] for d in deltas], [-(np.log(2) + d) for d in deltas]))

## Far from the wall the potential is 1/X^2 with a known amplitude
for d in deltas:
    fit = fit_tail(models[d])
    print(f"delta={d:5}: plateau {fit.plateau:.6f} vs {d * (2 + d) / 8:.6f}, roots {np.round(fit.roots, 6)}")
# delta and -2-delta share the amplitude; the root above -1 is reported first

## A 1/x^2 correction to phi moves V at order 1/X^3 only
m = sos_from_phi(power_tail_phi(1.2, 7.0, M))
print("gamma=7 fitted delta:", round(fit_tail(m).delta, 6))
