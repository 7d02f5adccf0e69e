"""
## Wetting phase diagram of the double step

The closed-form boundary 4 e^{v1} = 2 + e^{-v0} against the exact growth of
the mean midpoint height from N = 400 to N = 1600.  Ratio ~2 means the
line wanders off (complete wetting), ratio ~1 means it stays pinned.
"""
import numpy as np

from walkline.phase import boundary_distance, make_grid, phase_scan

grid = make_grid("double-step", v0=np.linspace(-2, 0, 5), v1=np.linspace(-1, 1, 5))
rows = phase_scan(grid, M=2000, N_list=(400, 1600), jobs=2)

print(f"{'v0':>6} {'v1':>6} {'closed form':>18} {'numeric':>18} {'ratio':>7} {'dist':>6}")
for r in rows:
    p = r.preset.params
    print(f"{p['v0']:6.2f} {p['v1']:6.2f} {r.closed_form.value:>18} {r.numeric.value:>18} "
          f"{r.growth_ratio:7.3f} {boundary_distance(r.preset):6.3f}")

## Power tails: delta = 1 separates the regimes
for d in (0.0, 0.5, 2.0, 3.0):
    row = phase_scan(make_grid("power-tail", delta=[d]))[0]
    print(f"delta={d}: {row.numeric.value} (ratio {row.growth_ratio:.3f})")
