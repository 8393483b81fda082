"""Closing near-returns of the cat map into periodic orbits.

A sampled point that comes back within 0.05 of itself after k steps is
replaced by the exact periodic point of period k nearby. The distance
between the two orbits shrinks exponentially away from the endpoints,
which is what the printed profile shows.
"""
import numpy as np

from cocyclelab import TorusMap
from cocyclelab.bases import _near_returns, calibrate_closing, close_orbit, closing_envelope, shadowing_profile
from cocyclelab.periodic import count_periodic

cat = TorusMap([[2, 1], [1, 1]])
params = calibrate_closing(cat, samples=50, seed=0, delta=0.05, linear_bound=True)
print(f"calibrated D={params.D:.4f} gamma={params.gamma:.4f} delta0={params.delta0:.4f}")

x, k = _near_returns(cat, 1, 4, 0.05, 2000)[0]
orbit = close_orbit(cat, x, k)
d0 = cat.distance(x, cat.step(x, k))
prof = shadowing_profile(cat, x, orbit.point, k)
env = closing_envelope(params, d0, k)
print(f"\nreturn after k={k} steps at distance {d0:.4f}; periodic point {orbit.label()}")
for i in np.unique(np.linspace(0, k, 9).astype(int)):
    print(f"  i={i:4d}  dist={prof[i]:.3e}  envelope={env[i]:.3e}")

print("\nperiodic points per period:", [count_periodic(cat, k) for k in range(1, 9)])
