"""Matrix cocycles ``A^n_x = A(f^{n-1} x) ... A(x)`` over a base system.

A generator knows how to produce the stack ``A(f^i x)`` (and the inverses) for
a range of ``i``; products are then formed by :func:`cocyclelab.linalg.chain_product`
with a running log scale, so ``n`` in the millions is fine.
"""
from __future__ import annotations

import math
from typing import Mapping, Optional

import numpy as np
from scipy.linalg import expm

from .bases import ShiftSpace, TorusMap
from .errors import MissingWord
from .linalg import (
    ScaledOperator,
    as_operator,
    chain_product,
    identity,
    invert,
    norm_kind,
    op_norm,
    op_norms,
)

SWEEP_SAMPLES = 10_000


class CocycleGenerator:
    """Common interface of the generator families.

    Subclasses set ``dim``, the Hölder data ``holder_alpha``/``holder_M`` and
    the uniform bounds ``lambda_prime >= sup ln||A(x)||`` and
    ``chi_prime <= -sup ln||A(x)^-1||`` in the ambient ``norm``.
    """

    kind = "abstract"
    dim: int
    norm: str = "l2"
    holder_alpha: float = 1.0
    holder_M: float = 1.0
    lambda_prime: float
    chi_prime: float

    def matrices(self, base, x, start: int, stop: int) -> np.ndarray:
        """Stack of ``A(f^i x)`` for ``start <= i < stop``."""
        raise NotImplementedError

    def inverse_matrices(self, base, x, start: int, stop: int) -> np.ndarray:
        """Stack of ``A(f^i x)^{-1}`` for ``start <= i < stop``."""
        raise NotImplementedError

    def scaled(self, c: float) -> "CocycleGenerator":
        raise NotImplementedError

    def _set_bounds(self, norms, inv_norms, lambda_prime, chi_prime):
        sup_a = float(np.log(np.max(norms)))
        sup_inv = float(np.log(np.max(inv_norms)))
        tol = 1e-12 * max(1.0, abs(sup_a), abs(sup_inv))
        if lambda_prime is None:
            lambda_prime = sup_a
        elif lambda_prime < sup_a - tol:
            raise ValueError(f"lambda_prime={lambda_prime} below sup ln||A(x)|| = {sup_a}")
        if chi_prime is None:
            chi_prime = -sup_inv
        elif chi_prime > -sup_inv + tol:
            raise ValueError(f"chi_prime={chi_prime} above -sup ln||A(x)^-1|| = {-sup_inv}")
        self.lambda_prime = float(lambda_prime)
        self.chi_prime = float(chi_prime)

    def _check_holder_data(self, alpha, M):
        if not (0 < alpha <= 1):
            raise ValueError("holder_alpha must lie in (0, 1]")
        if not M > 0:
            raise ValueError("holder_M must be positive")
        self.holder_alpha = float(alpha)
        self.holder_M = float(M)


class ConstantCocycle(CocycleGenerator):
    """``A(x) = A`` for every ``x``."""

    kind = "constant"

    def __init__(self, matrix, norm="l2", holder_alpha=1.0, holder_M=1.0,
                 lambda_prime=None, chi_prime=None):
        self.matrix = as_operator(matrix)
        self.inverse = invert(self.matrix)
        self.dim = self.matrix.shape[0]
        self.norm = norm_kind(norm)
        self._check_holder_data(holder_alpha, holder_M)
        self._set_bounds([op_norm(self.matrix, self.norm)], [op_norm(self.inverse, self.norm)],
                         lambda_prime, chi_prime)

    def matrices(self, base, x, start, stop):
        return np.broadcast_to(self.matrix, (max(stop - start, 0), self.dim, self.dim))

    def inverse_matrices(self, base, x, start, stop):
        return np.broadcast_to(self.inverse, (max(stop - start, 0), self.dim, self.dim))

    def scaled(self, c):
        return ConstantCocycle(c * self.matrix, self.norm, self.holder_alpha, self.holder_M * abs(c))

    def __repr__(self):
        return f"ConstantCocycle(dim={self.dim})"


def _word_key(word) -> tuple:
    if isinstance(word, str):
        return tuple(int(c) for c in word)
    if isinstance(word, (int, np.integer)):
        return (int(word),)
    return tuple(int(c) for c in word)


class LocallyConstantCocycle(CocycleGenerator):
    """``A(x)`` depends on the centered word ``x_{-m} ... x_m``.

    ``table`` maps words of length ``2m + 1`` (strings like ``"010"``, tuples,
    or single ints when ``m = 0``) to matrices.
    """

    kind = "locally_constant"

    def __init__(self, table: Mapping, memory: int = 0, alphabet_size: Optional[int] = None,
                 norm="l2", holder_alpha=1.0, holder_M=None, lambda_prime=None, chi_prime=None,
                 metric_base: float = math.e):
        if memory < 0:
            raise ValueError("memory must be non-negative")
        self.memory = int(memory)
        width = 2 * self.memory + 1
        entries = {}
        for word, mat in table.items():
            key = _word_key(word)
            if len(key) != width:
                raise ValueError(f"word {word!r} does not have length {width}")
            entries[key] = as_operator(mat)
        if not entries:
            raise ValueError("empty table")
        dims = {m.shape[0] for m in entries.values()}
        if len(dims) != 1:
            raise ValueError("table matrices have different sizes")
        self.dim = dims.pop()
        self.table = dict(sorted(entries.items()))
        top = max(max(k) for k in self.table)
        self.alphabet_size = int(alphabet_size) if alphabet_size is not None else top + 1
        if top >= self.alphabet_size:
            raise ValueError("table uses symbols outside the alphabet")
        self.norm = norm_kind(norm)
        a, n_words = self.alphabet_size, self.alphabet_size ** width
        self._mats = np.full((n_words, self.dim, self.dim), np.nan)
        self._inv = np.full((n_words, self.dim, self.dim), np.nan)
        self._present = np.zeros(n_words, dtype=bool)
        for key, mat in self.table.items():
            idx = 0
            for s in key:
                idx = idx * a + s
            self._mats[idx] = mat
            self._inv[idx] = invert(mat)
            self._present[idx] = True
        if holder_M is None:
            # words differ only when dist >= base^-m, so this M makes the
            # Hölder inequality hold for all pairs, not just close ones
            mats = list(self.table.values())
            spread = max((_metric(p, q, self.norm) for p in mats for q in mats), default=0.0)
            holder_M = max(spread, 1e-300) * metric_base ** self.memory
        self._check_holder_data(holder_alpha, holder_M)
        self._set_bounds(op_norms(self._mats[self._present], self.norm),
                         op_norms(self._inv[self._present], self.norm), lambda_prime, chi_prime)

    @classmethod
    def from_list(cls, ops, **kw) -> "LocallyConstantCocycle":
        """Memory-0 cocycle with ``A(x) = ops[x_0]``."""
        return cls({(i,): m for i, m in enumerate(ops)}, memory=0, **kw)

    def word_indices(self, base, x, start, stop) -> np.ndarray:
        m, a = self.memory, self.alphabet_size
        if isinstance(base, ShiftSpace) and base.alphabet_size > a:
            raise MissingWord(f"base alphabet {base.alphabet_size} exceeds table alphabet {a}")
        sym = x.symbols(start - m, stop + m)
        n = stop - start
        idx = np.zeros(n, dtype=np.int64)
        for j in range(2 * m + 1):
            idx = idx * a + sym[j:j + n]
        return idx

    def _lookup(self, store, base, x, start, stop):
        idx = self.word_indices(base, x, start, stop)
        missing = ~self._present[idx]
        if missing.any():
            bad = idx[np.argmax(missing)]
            raise MissingWord(f"no matrix for word index {bad}")
        return store[idx]

    def matrices(self, base, x, start, stop):
        return self._lookup(self._mats, base, x, start, stop)

    def inverse_matrices(self, base, x, start, stop):
        return self._lookup(self._inv, base, x, start, stop)

    def check_coverage(self, base: ShiftSpace):
        """Raise :class:`MissingWord` unless every allowed word has a matrix."""
        from .periodic import allowed_words

        for w in allowed_words(base, 2 * self.memory + 1):
            if tuple(int(s) for s in w) not in self.table:
                raise MissingWord(f"allowed word {''.join(map(str, w))} missing from table")

    def scaled(self, c):
        return LocallyConstantCocycle({k: c * v for k, v in self.table.items()}, self.memory,
                                      self.alphabet_size, self.norm, self.holder_alpha,
                                      self.holder_M * abs(c))

    def __repr__(self):
        return f"LocallyConstantCocycle(dim={self.dim}, memory={self.memory}, words={len(self.table)})"


def perturbation_generator(dim: int) -> np.ndarray:
    """Fixed skew-symmetric-plus-diagonal matrix ``G`` behind the smooth family."""
    g = np.triu(np.ones((dim, dim)), 1)
    g = g - g.T
    g += np.diag(np.linspace(1.0, -1.0, dim) if dim > 1 else [1.0])
    return g


class TorusSmoothCocycle(CocycleGenerator):
    """``A(x) = A0 exp(eta cos(2 pi <freq, x>) G)`` over a torus.

    Smooth in ``x``, hence Hölder with exponent 1. ``G`` mixes a rotation
    generator with a diagonal stretch, so ``eta`` tunes non-conformality.
    """

    kind = "torus_smooth"

    def __init__(self, base_matrix, eta: float, frequencies, norm="l2", holder_alpha=1.0,
                 holder_M=None, lambda_prime=None, chi_prime=None):
        self.base_matrix = as_operator(base_matrix)
        self.base_inverse = invert(self.base_matrix)
        self.dim = self.base_matrix.shape[0]
        self.eta = float(eta)
        self.frequencies = np.array(frequencies, dtype=float)
        if self.frequencies.ndim != 1 or self.frequencies.size < 1:
            raise ValueError("frequencies must be a non-empty vector")
        self.norm = norm_kind(norm)
        self.G = perturbation_generator(self.dim)
        g_norm = op_norm(self.G, self.norm)
        a_norm, ai_norm = op_norm(self.base_matrix, self.norm), op_norm(self.base_inverse, self.norm)
        if holder_M is None:
            lip = abs(self.eta) * g_norm * math.exp(abs(self.eta) * g_norm)
            holder_M = max((a_norm + ai_norm) * lip * 2 * math.pi * np.abs(self.frequencies).sum(), 1e-300)
        self._check_holder_data(holder_alpha, holder_M)
        # analytic bounds from |cos| <= 1 and ||exp(tG)|| <= exp(|t| ||G||)
        if lambda_prime is None:
            lambda_prime = math.log(a_norm) + abs(self.eta) * g_norm
        if chi_prime is None:
            chi_prime = -(math.log(ai_norm) + abs(self.eta) * g_norm)
        rng = np.random.default_rng(0)
        pts = rng.random((SWEEP_SAMPLES, self.frequencies.size))
        self._set_bounds(op_norms(self._gen(pts, +1), self.norm), op_norms(self._gen(pts, -1), self.norm),
                         lambda_prime, chi_prime)

    def _phase(self, coords):
        return np.cos(2 * np.pi * (np.asarray(coords) @ self.frequencies))

    def _gen(self, coords, sign):
        c = self._phase(coords)
        e = expm(sign * self.eta * c[:, None, None] * self.G[None])
        if sign > 0:
            return self.base_matrix[None] @ e
        return e @ self.base_inverse[None]

    def _coords(self, base, x, start, stop):
        if not isinstance(base, TorusMap):
            raise TypeError("torus_smooth cocycle needs a torus base")
        if base.dim != self.frequencies.size:
            raise ValueError("frequency vector length differs from torus dimension")
        return base.orbit_coords(x, start, stop)

    def _checked(self, mats, bound):
        if mats.shape[0]:
            if self.norm == "l2" and self.dim > 2:
                rough = np.sqrt((mats * mats).sum(axis=(1, 2)))
                if (np.log(rough) <= bound).all():
                    return mats
            if not (np.log(op_norms(mats, self.norm)) <= bound + 1e-12).all():
                raise AssertionError("generator value exceeds its declared uniform bound")
        return mats

    def matrices(self, base, x, start, stop):
        if stop <= start:
            return np.empty((0, self.dim, self.dim))
        return self._checked(self._gen(self._coords(base, x, start, stop), +1), self.lambda_prime)

    def inverse_matrices(self, base, x, start, stop):
        if stop <= start:
            return np.empty((0, self.dim, self.dim))
        return self._checked(self._gen(self._coords(base, x, start, stop), -1), -self.chi_prime)

    def scaled(self, c):
        return TorusSmoothCocycle(c * self.base_matrix, self.eta, self.frequencies, self.norm,
                                  self.holder_alpha, self.holder_M * abs(c))

    def __repr__(self):
        return f"TorusSmoothCocycle(dim={self.dim}, eta={self.eta})"


class TimeReversed:
    """The inverse map ``f^{-1}`` of a base system."""

    def __init__(self, base):
        self.forward = base
        self.expansion_rate = base.expansion_rate

    def step(self, x, n):
        return self.forward.step(x, -n)

    def distance(self, x, y):
        return self.forward.distance(x, y)


class InverseCocycle(CocycleGenerator):
    """Cocycle over ``f^{-1}`` generated by ``x -> A(f^{-1} x)^{-1}``.

    Its ``n``-step product at ``x`` is ``A^{-n}_x``, so its upper exponent is
    minus the lower exponent of the original cocycle.
    """

    kind = "inverse"

    def __init__(self, gen: CocycleGenerator):
        self.gen = gen
        self.dim, self.norm = gen.dim, gen.norm
        self.holder_alpha, self.holder_M = gen.holder_alpha, gen.holder_M
        self.lambda_prime, self.chi_prime = -gen.chi_prime, -gen.lambda_prime

    def matrices(self, base, x, start, stop):
        return self.gen.inverse_matrices(base.forward, x, -stop, -start)[::-1]

    def inverse_matrices(self, base, x, start, stop):
        return self.gen.matrices(base.forward, x, -stop, -start)[::-1]

    def scaled(self, c):
        return InverseCocycle(self.gen.scaled(1.0 / c))


# --------------------------------------------------------------------------


def generator_at(gen: CocycleGenerator, base, x) -> np.ndarray:
    """The generator value ``A(x)``."""
    return np.array(gen.matrices(base, x, 0, 1)[0])


def evaluate(gen: CocycleGenerator, base, x, n: int) -> ScaledOperator:
    """``A^n_x``; for ``n < 0`` this is ``(A^{|n|}_{f^n x})^{-1}``."""
    if n == 0:
        return identity(gen.dim)
    if n > 0:
        return chain_product(gen.matrices(base, x, 0, n))
    return chain_product(gen.inverse_matrices(base, x, n, 0)[::-1])


def evaluate_inverse(gen: CocycleGenerator, base, x, n: int) -> ScaledOperator:
    """``(A^n_x)^{-1}`` built from generator inverses, without inverting a product."""
    if n == 0:
        return identity(gen.dim)
    if n > 0:
        return chain_product(gen.inverse_matrices(base, x, 0, n)[::-1])
    return chain_product(gen.matrices(base, x, n, 0))


def log_norm(gen: CocycleGenerator, base, x, n: int) -> float:
    """``a_n(x) = ln ||A^n_x||``."""
    return evaluate(gen, base, x, n).log_norm(gen.norm)


def log_inverse_norm(gen: CocycleGenerator, base, x, n: int) -> float:
    """``ã_n(x) = ln ||(A^n_x)^{-1}||``."""
    return evaluate_inverse(gen, base, x, n).log_norm(gen.norm)


def distortion(gen: CocycleGenerator, base, x, n: int) -> float:
    """``ln Q(x, n)`` with ``Q(x, n) = ||A^n_x|| ||(A^n_x)^{-1}||``."""
    return log_norm(gen, base, x, n) + log_inverse_norm(gen, base, x, n)


def _metric(a, b, kind="l2") -> float:
    return op_norm(a - b, kind) + op_norm(np.linalg.inv(a) - np.linalg.inv(b), kind)


def group_distance(a, b, kind="l2") -> float:
    """The metric ``||A - B|| + ||A^{-1} - B^{-1}||`` on invertible matrices."""
    return _metric(as_operator(a), as_operator(b), kind)


def holder_ratios(gen: CocycleGenerator, base, pairs) -> np.ndarray:
    """``d(A(x), A(y)) / dist(x, y)^alpha`` for each pair with ``x != y``."""
    out = []
    for x, y in pairs:
        dxy = base.distance(x, y)
        if dxy == 0:
            continue
        d = group_distance(generator_at(gen, base, x), generator_at(gen, base, y), gen.norm)
        out.append(d / dxy ** gen.holder_alpha)
    return np.array(out)
