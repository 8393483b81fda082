"""Numerical experiments on linear cocycles over hyperbolic systems.

Growth rates of matrix products along orbits, their approximation by
periodic orbits, Lyapunov norms, and joint spectral radii.
"""
__version__ = "0.1.0"

from .bases import (ClosingParams, PeriodicOrbit, ShiftSpace, SymbolicWindow, TorusMap, TorusPoint,
                    calibrate_closing, close_orbit, closing_envelope, distance, find_return,
                    shadowing_profile, step)
from .cocycles import (ConstantCocycle, InverseCocycle, LocallyConstantCocycle, TorusSmoothCocycle,
                       distortion, evaluate, evaluate_inverse, log_inverse_norm, log_norm)
from .errors import *  # noqa: F401,F403
from .exponents import (ExponentEstimate, estimate_exponents, estimate_lower, estimate_upper,
                        gk_good_density, km_good_times, subadditive_sequence)
from .linalg import ScaledOperator, chain_product, op_norm, spectral_radius
from .lyapunov_norm import (LyapunovNormContext, check_contraction, lyap_op_norm, lyap_vector_norm,
                            shadow_growth_check, temperedness_diagnostic)
from .measures import Bernoulli, LebesgueTorus, Markov, sample_point
from .periodic import (PeriodicScore, corollary_norm_rates, enumerate_periodic, score_periodic,
                       verify_main_theorem)
from .spectral import RadiusBounds, berger_wang_gap, branch_and_bound, exhaustive_bounds
