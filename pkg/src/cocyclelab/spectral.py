"""Joint and generalized spectral radii of a finite set of operators.

Words are read in matrix order: the leftmost symbol is the leftmost factor,
so the word ``"01"`` stands for the product ``A_0 A_1``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from .errors import BudgetExceeded
from .linalg import as_operator, norm_kind, op_norms, spectral_radii

log = logging.getLogger(__name__)

PRODUCT_BUDGET = 2 ** 20
NODE_BUDGET = 2 ** 20


@dataclass
class RadiusBounds:
    lower: float
    upper: float
    depth_reached: int
    witness_word: str
    level_norm_rates: List[float] = field(default_factory=list, repr=False)
    level_radius_rates: List[float] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.lower > self.upper + 1e-9:
            raise ValueError(f"lower {self.lower} exceeds upper {self.upper}")

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    def as_dict(self):
        return {"lower": self.lower, "upper": self.upper, "depth": self.depth_reached,
                "witness": self.witness_word}


def _stack(ops) -> np.ndarray:
    mats = [as_operator(a) for a in ops]
    if not mats:
        raise ValueError("need at least one operator")
    if len({m.shape for m in mats}) != 1:
        raise ValueError("operators have different sizes")
    return np.stack(mats)


def _renormalize(P, logs):
    s = np.abs(P).max(axis=(1, 2))
    s[s == 0] = 1.0
    P /= s[:, None, None]
    return logs + np.log(s)


def _log_rates(P, logs, length, norm):
    with np.errstate(divide="ignore"):
        ln = (logs + np.log(op_norms(P, norm))) / length
        lr = (logs + np.log(spectral_radii(P))) / length
    return ln, lr


def _word(index: int, length: int, a: int) -> str:
    digits = []
    for _ in range(length):
        index, r = divmod(index, a)
        digits.append(str(r))
    return "".join(reversed(digits))


def exhaustive_bounds(ops: Sequence, depth: int, budget: int = PRODUCT_BUDGET, norm="l2") -> RadiusBounds:
    """Bounds from every product of length ``<= depth``.

    ``lower`` is the largest ``r(P)^{1/l}``, ``upper`` the smallest over ``l`` of
    ``max ||P||^{1/l}``. The per-length maxima are kept in ``level_norm_rates``
    and ``level_radius_rates``.
    """
    A = _stack(ops)
    norm = norm_kind(norm)
    a = A.shape[0]
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if a ** depth > budget:
        raise BudgetExceeded(f"{a}^{depth} products exceed budget {budget}")
    P = A.copy()
    logs = _renormalize(P, np.zeros(a))
    norm_rates, radius_rates = [], []
    lower, upper, witness = -np.inf, np.inf, ""
    for length in range(1, depth + 1):
        if length > 1:
            # children of word w are w0, w1, ... so the index stays lexicographic
            P = (P[:, None] @ A[None]).reshape(-1, *A.shape[1:])
            logs = _renormalize(P, np.repeat(logs, a))
        ln, lr = _log_rates(P, logs, length, norm)
        nr, rr = float(np.exp(ln.max())), float(np.exp(lr.max()))
        norm_rates.append(nr)
        radius_rates.append(rr)
        if rr > lower:
            lower, witness = rr, _word(int(np.argmax(lr)), length, a)
        upper = min(upper, nr)
    return RadiusBounds(lower, max(upper, lower), depth, witness, norm_rates, radius_rates)


def branch_and_bound(ops: Sequence, target_gap: float, max_depth: int = 30, norm="l2",
                     node_budget: int = NODE_BUDGET) -> RadiusBounds:
    """Gripenberg-style bounds on the joint spectral radius.

    Every surviving product carries ``mu = min_j ||prefix_j||^{1/j}``; a product
    is discarded once ``mu <= lower + target_gap/2``. At each depth the JSR is at
    most ``max(lower + target_gap/2, max mu over survivors)``. Products are
    explored in lexicographic order one length at a time, and the run stops at
    ``upper - lower <= target_gap``, at ``max_depth`` or when the surviving
    set would exceed ``node_budget``.
    """
    if not target_gap > 0:
        raise ValueError("target_gap must be positive")
    A = _stack(ops)
    norm = norm_kind(norm)
    a = A.shape[0]
    half = target_gap / 2
    P = A.copy()
    logs = _renormalize(P, np.zeros(a))
    words = np.arange(a, dtype=object)
    ln, lr = _log_rates(P, logs, 1, norm)
    mu = ln.copy()
    k = int(np.argmax(lr))
    lower, witness = float(lr[k]), str(k)
    upper = float(ln.max())
    depth = 1
    while True:
        keep = mu > lower + np.log1p(half / np.exp(lower)) if np.isfinite(lower) else np.ones(len(mu), bool)
        # upper bound valid for the current depth
        cand = np.exp(lower) + half if not keep.any() else max(np.exp(lower) + half, float(np.exp(mu[keep].max())))
        upper = min(upper, np.log(cand))
        if np.exp(upper) - np.exp(lower) <= target_gap or not keep.any() or depth >= max_depth:
            break
        n_next = int(keep.sum()) * a
        if n_next > node_budget:
            log.info("node budget reached at depth %d", depth)
            break
        P, logs, mu, words = P[keep], logs[keep], mu[keep], words[keep]
        depth += 1
        P = (P[:, None] @ A[None]).reshape(-1, *A.shape[1:])
        logs = _renormalize(P, np.repeat(logs, a))
        words = np.array([w * a + s for w in words for s in range(a)], dtype=object)
        ln, lr = _log_rates(P, logs, depth, norm)
        mu = np.minimum(np.repeat(mu, a), ln)
        j = int(np.argmax(lr))
        if lr[j] > lower:
            lower, witness = float(lr[j]), _word(int(words[j]), depth, a)
    lo, up = float(np.exp(lower)), float(np.exp(upper))
    return RadiusBounds(lo, max(up, lo), depth, witness)


def berger_wang_gap(ops: Sequence, depths, budget: int = PRODUCT_BUDGET, norm="l2") -> np.ndarray:
    """Rows ``(depth, upper - lower)`` of the exhaustive bounds at each requested depth."""
    depths = sorted({int(d) for d in depths})
    if not depths or depths[0] < 1:
        raise ValueError("depths must be positive")
    full = exhaustive_bounds(ops, depths[-1], budget, norm)
    nr = np.minimum.accumulate(full.level_norm_rates)
    rr = np.maximum.accumulate(full.level_radius_rates)
    return np.array([(d, max(nr[d - 1] - rr[d - 1], 0.0)) for d in depths])
