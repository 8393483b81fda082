"""Joint spectral radius of two unipotent matrices.

A = [[1,1],[0,1]] and B = [[1,0],[1,1]] each have spectral radius 1, yet the
product AB has spectral radius phi^2, so the joint spectral radius is the
golden ratio. Branch and bound certifies it within 1e-3; random pairs show
the gap between the norm and spectral bounds closing with depth.
"""
import numpy as np

from cocyclelab.spectral import berger_wang_gap, branch_and_bound, exhaustive_bounds

A = np.array([[1.0, 1.0], [0.0, 1.0]])
B = np.array([[1.0, 0.0], [1.0, 1.0]])
phi = (1 + 5 ** 0.5) / 2

bb = branch_and_bound([A, B], target_gap=1e-3)
print(f"branch and bound: [{bb.lower:.6f}, {bb.upper:.6f}] witness {bb.witness_word}, phi = {phi:.6f}")
ex = exhaustive_bounds([A, B], 8, norm="l1")
print(f"exhaustive, l1 norm, depth 8: [{ex.lower:.6f}, {ex.upper:.6f}]")

rng = np.random.default_rng(0)
ops = [rng.uniform(-1, 1, (2, 2)) for _ in range(2)]
print("\ndepth  gap (random pair)")
for d, g in berger_wang_gap(ops, [1, 2, 4, 8, 12]):
    print(f"{int(d):5d}  {g:.6f}")
