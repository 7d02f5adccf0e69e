"""
## Same bridges, two descriptions

Conditioned to return to 0 after N steps, the walk and its SOS translation
put identical probabilities on every path.  Here we list all length-8
bridges, compare both laws, then draw exact samples.
"""
import numpy as np

from walkline import bridge
from walkline import kernel_from_phi, power_tail_phi, sos_from_phi

phi = power_tail_phi(0.5, 0.0, 8)
k = kernel_from_phi(phi)
m = sos_from_phi(phi)

paths = bridge.enumerate_paths(8, (-1, 1), 8)
p_rw = np.exp(bridge.bridge_log_probs(k, paths))
p_sos = np.exp(bridge.bridge_log_probs(m, paths))
print(len(paths), "bridges, max |P_RW - P_SOS| =", np.abs(p_rw - p_sos).max())
for x, p in zip(paths[:5], p_rw[:5]):
    print(x, round(p, 6))

## The 2^-N of the walk is carried by W, so even the totals agree
print(bridge.partition_function(k, 8), bridge.partition_function(m, 8))

## Exact sampling by backward messages
draws = bridge.sample_bridges(k, 8, 200_000, seed=42)
index = {tuple(x): i for i, x in enumerate(paths)}
freq = np.bincount([index[tuple(d)] for d in draws], minlength=len(paths)) / len(draws)
print("TV(empirical, exact) =", 0.5 * np.abs(freq - p_rw).sum())
