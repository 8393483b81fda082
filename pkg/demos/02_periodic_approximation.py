"""Approximating exponents by periodic orbits.

For each period k the script enumerates every periodic word of the full
2-shift, scores the norm rates of the product along it and reports the orbit
whose rates are closest to the sampled exponents. A random pair of 2x2
matrices makes the match nontrivial.
"""
import numpy as np

from cocyclelab import LocallyConstantCocycle, ShiftSpace
from cocyclelab.measures import Bernoulli
from cocyclelab.periodic import corollary_norm_rates, verify_main_theorem

rng = np.random.default_rng(3)
ops = [rng.standard_normal((2, 2)) + np.eye(2) for _ in range(2)]
base = ShiftSpace.full(2)
gen = LocallyConstantCocycle.from_list(ops)

for k_max in (2, 4, 8, 12):
    rep = verify_main_theorem(gen, base, Bernoulli((0.5, 0.5), 0), eps_target=0.05, k_max=k_max,
                              n=5000, replicas=16)
    w = rep.winner
    print(f"k_max={k_max:>2}  best word {w.label:<12} residual {rep.residual:.4f}  "
          f"success={rep.success}  orbits={len(rep.scores)}")
print(f"lambda_hat={rep.lambda_hat:.4f} chi_hat={rep.chi_hat:.4f}")

# sup over all orbits vs sup over periodic orbits
cor = corollary_norm_rates(gen, base, n_max=12, k_max=12)
print("\n n   s_n      t_n")
for n, (s, t) in enumerate(zip(cor.s_n, cor.t_k), start=1):
    print(f"{n:2d}  {s:.4f}   {t:.4f}")
