"""Monte-Carlo exponent estimates and good-time detection for subadditive sequences."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cocycles import CocycleGenerator
from .linalg import chain_product, op_norms, prefix_products
from .measures import sample_point

THREADS_ENV = "COCYCLE_LAB_THREADS"
KINDS = ("a", "a_tilde", "b", "b_tilde")


def worker_count(threads: Optional[int] = None) -> int:
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    return max(1, int(threads))


def ordered_map(fn, items, threads=None):
    """``list(map(fn, items))``, possibly on a thread pool; order is preserved."""
    items = list(items)
    n = worker_count(threads)
    if n == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class ExponentEstimate:
    value: float
    horizon_n: int
    replicas: int
    stderr: float
    samples: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.replicas < 1 or not np.isfinite(self.stderr) or self.stderr < 0:
            raise ValueError("invalid exponent estimate")

    def as_dict(self):
        return {"value": self.value, "stderr": self.stderr, "n": self.horizon_n, "replicas": self.replicas}


def _estimate(values, n) -> ExponentEstimate:
    values = np.asarray(values, dtype=float)
    r = values.size
    stderr = float(values.std(ddof=1) / np.sqrt(r)) if r > 1 else 0.0
    return ExponentEstimate(float(values.mean()), n, r, stderr, values)


def replica_rates(gen: CocycleGenerator, base, sampler, n: int, replicas: int, threads=None):
    """Per-replica ``(a_n(x)/n, ã_n(x)/n)`` with ``x`` drawn from stream ``replica``."""
    if n < 1 or replicas < 1:
        raise ValueError("need n >= 1 and replicas >= 1")

    def one(r):
        x = sample_point(sampler, base, replica=r)
        a = chain_product(gen.matrices(base, x, 0, n)).log_norm(gen.norm)
        at = chain_product(gen.inverse_matrices(base, x, 0, n)[::-1]).log_norm(gen.norm)
        return a / n, at / n

    out = np.array(ordered_map(one, range(replicas), threads), dtype=float)
    return out[:, 0], out[:, 1]


def estimate_exponents(gen, base, sampler, n, replicas, threads=None):
    """Both estimates from the same sampled points: ``(lambda_hat, chi_hat)``."""
    a, at = replica_rates(gen, base, sampler, n, replicas, threads)
    return _estimate(a, n), _estimate(-at, n)


def estimate_upper(gen, base, sampler, n, replicas, threads=None) -> ExponentEstimate:
    """Mean of ``a_n(x)/n`` over sampled ``x``."""
    return estimate_exponents(gen, base, sampler, n, replicas, threads)[0]


def estimate_lower(gen, base, sampler, n, replicas, threads=None) -> ExponentEstimate:
    """Mean of ``-ã_n(x)/n`` over sampled ``x``."""
    return estimate_exponents(gen, base, sampler, n, replicas, threads)[1]


# --------------------------------------------------------------------------
# subadditive sequences


@dataclass
class SubadditiveSequence:
    """Values ``s_0 = 0, s_1, ..., s_N`` of one of ``a``, ``ã``, ``b``, ``b̃`` at ``x_ref``.

    ``steps[t]`` is the ``t``-th factor along the relevant direction and
    ``side`` tells whether new factors multiply on the left or the right, which
    is all the suffix sweep needs.
    """

    values: np.ndarray
    kind: str
    x_ref: object
    steps: np.ndarray = field(repr=False)
    side: str = field(repr=False)
    norm: str = field(default="l2", repr=False)

    def __post_init__(self):
        if self.values[0] != 0:
            raise ValueError("subadditive sequence must start at 0")

    @property
    def N(self) -> int:
        return self.values.size - 1


def subadditive_sequence(gen: CocycleGenerator, base, x, N: int, kind: str = "a") -> SubadditiveSequence:
    """Evaluate ``kind_n(x)`` for ``n = 0..N``.

    ``a_n = ln||A^n_x||``, ``ã_n = ln||(A^n_x)^{-1}||`` (over ``f``);
    ``b_n = a_n(f^{-n} x)``, ``b̃_n = ln||A^{-n}_x||`` (over ``f^{-1}``).
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if kind == "a":
        steps, side = gen.matrices(base, x, 0, N), "left"
    elif kind == "a_tilde":
        steps, side = gen.inverse_matrices(base, x, 0, N), "right"
    elif kind == "b":
        steps, side = gen.matrices(base, x, -N, 0)[::-1], "right"
    else:
        steps, side = gen.inverse_matrices(base, x, -N, 0)[::-1], "left"
    steps = np.ascontiguousarray(steps, dtype=float)
    if side == "left":
        prods, logs = prefix_products(steps)
    else:
        prods, logs = prefix_products(np.swapaxes(steps, 1, 2))
    values = logs + np.log(op_norms(prods, gen.norm if side == "left" or gen.norm == "l2"
                                    else {"l1": "linf", "linf": "l1"}[gen.norm]))
    values[0] = 0.0
    return SubadditiveSequence(values, kind, x, steps, side, gen.norm)


def suffix_sweep(seq: SubadditiveSequence, max_len: Optional[int] = None):
    """Yield ``(j, t)`` where ``t[i] = s_j(g^i x)`` for ``i = 0..N-j``.

    ``g`` is the base map the sequence lives over. One scale-tracked pass per
    length, vectorized over start points; memory stays O(N).
    """
    steps, N = seq.steps, seq.N
    max_len = N if max_len is None else min(max_len, N)
    d = steps.shape[-1]
    prods = np.broadcast_to(np.eye(d), (N + 1, d, d)).copy()
    logs = np.zeros(N + 1)
    for j in range(1, max_len + 1):
        m = N - j + 1
        fac = steps[j - 1:N]
        if seq.side == "left":
            prods = fac @ prods[:m]
        else:
            prods = prods[:m] @ fac
        logs = logs[:m]
        scale = np.abs(prods).max(axis=(1, 2))
        scale[scale == 0] = 1.0
        prods /= scale[:, None, None]
        logs = logs + np.log(scale)
        yield j, logs + np.log(op_norms(prods, seq.norm))


def km_good_times(seq: SubadditiveSequence, lambda_hat: float, eps: float, L: int) -> np.ndarray:
    """Times ``n`` in ``[L, N]`` with ``s_n(x) - s_{n-i}(g^i x) >= (lambda - eps) i``
    for every ``L <= i <= n``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if L < 1:
        raise ValueError("L must be >= 1")
    N, vals = seq.N, seq.values
    good = np.zeros(N + 1, dtype=bool)
    good[L:] = True
    n = np.arange(N + 1)
    # i = n, empty suffix
    good &= vals - (lambda_hat - eps) * n >= 0
    for j, t in suffix_sweep(seq, N - L):
        i = np.arange(L, N - j + 1)
        ok = vals[i + j] - t[i] >= (lambda_hat - eps) * i
        good[i[~ok] + j] = False
    return np.nonzero(good)[0]


def gk_good_density(seq: SubadditiveSequence, lambda_hat: float, eps_schedule, N: Optional[int] = None) -> float:
    """Fraction of ``n`` in ``[0, N-1]`` with ``s_n(x) - s_{n-i}(g^i x) >= (lambda - eps_i) i``
    for every ``1 <= i <= n``."""
    N = seq.N + 1 if N is None else int(N)
    if N < 1 or N - 1 > seq.N:
        raise ValueError("N must lie in [1, len(values)]")
    eps = np.asarray(eps_schedule, dtype=float)
    if eps.ndim == 0:
        eps = np.full(N, float(eps))
    if eps.size < N - 1 or (eps <= 0).any() or (np.diff(eps) > 0).any():
        raise ValueError("eps_schedule must be positive, non-increasing and cover i = 1..N-1")
    eps = np.concatenate([[0.0], eps])  # eps[i] for i >= 1
    top = N - 1
    vals = seq.values[:top + 1]
    good = np.ones(top + 1, dtype=bool)
    n = np.arange(top + 1)
    good[1:] &= vals[1:] >= (lambda_hat - eps[1:top + 1]) * n[1:]
    sub = SubadditiveSequence(vals, seq.kind, seq.x_ref, seq.steps[:top], seq.side, seq.norm)
    for j, t in suffix_sweep(sub):
        i = np.arange(1, top - j + 1)
        ok = vals[i + j] - t[i] >= (lambda_hat - eps[i]) * i
        good[i[~ok] + j] = False
    return float(good.sum() / N)
