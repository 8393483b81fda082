"""Seeded samplers for invariant measures on the base systems.

Every draw is a pure function of ``(seed, replica)``: symbolic points are
lazily extended windows whose blocks come from independent
``SeedSequence`` streams keyed by direction and block index.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bases import BLOCK, SampledSource, ShiftSpace, SymbolicWindow, TorusMap, TorusPoint
from .errors import IncompatibleSampler

DYADIC_BITS = 52


def _rng(seed, *key):
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed) % 2**64, spawn_key=tuple(int(k) for k in key)))


@dataclass(frozen=True)
class Bernoulli:
    probabilities: tuple
    seed: int = 0
    kind: str = field(default="bernoulli", init=False)

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size < 1 or (p < 0).any() or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("Bernoulli probabilities must be non-negative and sum to 1")
        object.__setattr__(self, "probabilities", tuple(float(v) for v in p))


@dataclass(frozen=True)
class Markov:
    matrix: tuple
    stationary: tuple
    seed: int = 0
    kind: str = field(default="markov", init=False)

    def __post_init__(self):
        P = np.asarray(self.matrix, dtype=float)
        pi = np.asarray(self.stationary, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or pi.shape != (P.shape[0],):
            raise ValueError("Markov matrix must be square and match the stationary vector")
        if (P < 0).any() or np.abs(P.sum(axis=1) - 1.0).max() > 1e-12:
            raise ValueError("Markov matrix rows must be probability vectors")
        if (pi < 0).any() or abs(pi.sum() - 1.0) > 1e-12:
            raise ValueError("stationary vector must be a probability vector")
        if np.abs(pi @ P - pi).max() > 1e-10:
            raise ValueError("stationary vector does not satisfy pi P = pi")
        if not _irreducible(P > 0):
            raise ValueError("Markov chain is not irreducible")
        object.__setattr__(self, "matrix", tuple(tuple(float(v) for v in r) for r in P))
        object.__setattr__(self, "stationary", tuple(float(v) for v in pi))

    @classmethod
    def from_matrix(cls, matrix, seed=0) -> "Markov":
        """Chain with its stationary vector computed from the left Perron vector."""
        P = np.asarray(matrix, dtype=float)
        w, v = np.linalg.eig(P.T)
        pi = np.real(v[:, np.argmin(np.abs(w - 1.0))])
        pi = pi / pi.sum()
        # polish so that pi P = pi holds to rounding
        for _ in range(50):
            pi = pi @ P
        return cls(P.tolist(), (pi / pi.sum()).tolist(), seed)


@dataclass(frozen=True)
class LebesgueTorus:
    seed: int = 0
    kind: str = field(default="lebesgue_torus", init=False)


def _irreducible(adj) -> bool:
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    reach = np.eye(n, dtype=bool) | adj
    for _ in range(n):
        reach = reach | ((reach.astype(np.int64) @ reach.astype(np.int64)) > 0)
    return bool(reach.all())


def with_seed(sampler, seed):
    """Copy of ``sampler`` with a different seed."""
    if isinstance(sampler, Bernoulli):
        return Bernoulli(sampler.probabilities, seed)
    if isinstance(sampler, Markov):
        return Markov(sampler.matrix, sampler.stationary, seed)
    return LebesgueTorus(seed)


def check_compatible(sampler, base):
    if isinstance(sampler, LebesgueTorus):
        if not isinstance(base, TorusMap):
            raise IncompatibleSampler("lebesgue_torus needs a torus base")
        return
    if not isinstance(base, ShiftSpace):
        raise IncompatibleSampler(f"{sampler.kind} sampler needs a shift base")
    a = base.alphabet_size
    if isinstance(sampler, Bernoulli):
        p = np.asarray(sampler.probabilities)
        if p.size > a:
            raise IncompatibleSampler("Bernoulli alphabet larger than the shift alphabet")
        support = np.nonzero(p > 0)[0]
        if not base.transition[np.ix_(support, support)].all():
            raise IncompatibleSampler("Bernoulli support is not a full shift inside the SFT")
    else:
        P = np.asarray(sampler.matrix)
        if P.shape[0] != a:
            raise IncompatibleSampler("Markov state count differs from the alphabet size")
        if ((P > 0) & (base.transition == 0)).any():
            raise IncompatibleSampler("Markov support exceeds the transition support")


def default_sampler(base, seed=0):
    """Uniform Bernoulli on a full shift, the uniform-successor Markov chain
    on an SFT, Lebesgue measure on a torus."""
    if isinstance(base, TorusMap):
        return LebesgueTorus(seed)
    if base.is_full:
        a = base.alphabet_size
        return Bernoulli(tuple([1.0 / a] * a), seed)
    T = base.transition.astype(float)
    return Markov.from_matrix(T / T.sum(axis=1, keepdims=True), seed)


def _bernoulli_blocks(sampler, replica, alphabet):
    p = np.zeros(alphabet)
    p[:len(sampler.probabilities)] = sampler.probabilities

    def block(direction, b, prev):
        rng = _rng(sampler.seed, replica, 0 if direction > 0 else 1, b)
        return rng.choice(alphabet, size=BLOCK, p=p)

    return block


def _markov_blocks(sampler, replica):
    P = np.asarray(sampler.matrix)
    pi = np.asarray(sampler.stationary)
    # time reversal P*_{ij} = pi_j P_{ji} / pi_i generates the past
    with np.errstate(divide="ignore", invalid="ignore"):
        R = np.where(pi[:, None] > 0, (pi[None, :] * P.T) / pi[:, None], 0.0)
    cdf_f = np.cumsum(P, axis=1)
    cdf_b = np.cumsum(R, axis=1)
    cdf_f[:, -1] = cdf_b[:, -1] = 1.0

    def block(direction, b, prev):
        rng = _rng(sampler.seed, replica, 0 if direction > 0 else 1, b)
        u = rng.random(BLOCK + 1)
        cdf = cdf_f if direction > 0 else cdf_b
        out = np.empty(BLOCK, dtype=np.int64)
        if prev is None:
            s = int(np.searchsorted(np.cumsum(pi), u[-1], side="right"))
            s = min(s, pi.size - 1)
            out[0] = s
            start = 1
        else:
            s, start = prev, 0
        for i in range(start, BLOCK):
            s = int(np.searchsorted(cdf[s], u[i], side="right"))
            out[i] = s
        return out

    return block


def sample_point(sampler, base, replica: int = 0):
    """A ``mu``-distributed base point, deterministic in ``(seed, replica)``."""
    check_compatible(sampler, base)
    if isinstance(sampler, LebesgueTorus):
        rng = _rng(sampler.seed, replica)
        num = rng.integers(0, 2**DYADIC_BITS, size=base.dim)
        return TorusPoint.exact(num.tolist(), 2**DYADIC_BITS)
    if isinstance(sampler, Bernoulli):
        fn = _bernoulli_blocks(sampler, replica, base.alphabet_size)
    else:
        fn = _markov_blocks(sampler, replica)
    return SymbolicWindow(SampledSource(fn))
