"""Exponents of a random product of two diagonal matrices.

Products of diag(2, 1/2) and diag(1/2, 2) are diag(2^S, 2^-S) with S a
simple random walk, so ln||A^n_x|| / n = |S_n| ln 2 / n decays like n^{-1/2}.
The script prints the Monte Carlo estimates at growing horizons and the
Karlsson-Margulis good times along one orbit.
"""
import numpy as np

from cocyclelab import LocallyConstantCocycle, ShiftSpace
from cocyclelab.exponents import estimate_exponents, km_good_times, subadditive_sequence
from cocyclelab.measures import Bernoulli, sample_point

base = ShiftSpace.full(2)
gen = LocallyConstantCocycle.from_list([np.diag([2.0, 0.5]), np.diag([0.5, 2.0])])
mu = Bernoulli((0.5, 0.5), seed=1)

print(f"{'n':>8} {'lambda_hat':>12} {'chi_hat':>12} {'stderr':>10}")
for n in (100, 1_000, 10_000, 100_000):
    lam, chi = estimate_exponents(gen, base, mu, n, 16)
    print(f"{n:>8} {lam.value:>12.5f} {chi.value:>12.5f} {lam.stderr:>10.5f}")

# good times: a_n(x) - a_{n-i}(f^i x) >= (lambda - eps) i for every i in [L, n]
x = sample_point(mu, base)
seq = subadditive_sequence(gen, base, x, 2000, "a")
good = km_good_times(seq, 0.0, 0.1, 10)
print(f"\n{good.size} good times in [10, 2000]; first few: {good[:10].tolist()}")
