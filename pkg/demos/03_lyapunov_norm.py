"""The eps-Lyapunov norm along a typical orbit.

The truncated series norm makes one step of the cocycle expand by at most
e^{lambda+eps}. Here the contraction ratios are printed point by point,
together with the temperedness slopes of M_eps along the orbit.
"""
import numpy as np

from cocyclelab import LocallyConstantCocycle, ShiftSpace
from cocyclelab.exponents import estimate_exponents
from cocyclelab.lyapunov_norm import (LyapunovNormContext, check_contraction, lyap_vector_norm,
                                      temperedness_diagnostic)
from cocyclelab.measures import Bernoulli, sample_point

base = ShiftSpace.full(2)
gen = LocallyConstantCocycle.from_list([np.diag([2.0, 0.5]), np.diag([0.5, 2.0])])
mu = Bernoulli((0.5, 0.5), seed=5)
lam, chi = estimate_exponents(gen, base, mu, 10_000, 16)
ctx = LyapunovNormContext(lam.value, min(chi.value, lam.value), eps=0.1)

x = sample_point(mu, base)
for u in ([1.0, 0.0], [0.0, 1.0], [1.0, 1.0]):
    v = lyap_vector_norm(ctx, gen, base, x, u)
    print(f"||{u}||_x = {v.value:10.4f}  converged={v.converged}")

rep = check_contraction(ctx, gen, base, x, steps=10)
print("\nforward ratios :", np.round(rep.forward_ratio, 4))
print("backward ratios:", np.round(rep.backward_ratio, 4))
print(f"violations={rep.violations}  unconverged points={rep.unconverged}")

t = temperedness_diagnostic(ctx, gen, base, x, 500)
print(f"\nslopes of (1/n) ln M_eps: forward {t.forward_slope:.2e}, backward {t.backward_slope:.2e}")
print(f"K_rho (truncated) = {t.K_rho_truncated:.3e}")
