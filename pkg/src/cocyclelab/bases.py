"""Base homeomorphisms: subshifts of finite type and hyperbolic toral automorphisms.

Symbolic points are bi-infinite sequences viewed through :class:`SymbolicWindow`;
coordinates are produced on demand by a periodic word, a stored window or a
seeded sampler. Torus points carry exact rational coordinates whenever they are
available (sampled points are dyadic, periodic points have denominator
``|det(M^k - I)|``), so orbit segments used for closing and shadowing are exact
rather than float pseudo-orbits.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .linalg import op_norms
from .errors import (
    CalibrationFailed,
    ForbiddenWrap,
    IllConditionedClosing,
    NotFound,
    WindowExhausted,
)

DEFAULT_HORIZON = 256
BLOCK = 1024
MAX_INDEX = 10_000_000


@dataclass(frozen=True)
class ClosingParams:
    D: float
    gamma: float
    delta0: float

    def __post_init__(self):
        if not (self.D > 0 and self.gamma > 0 and self.delta0 > 0):
            raise ValueError("closing parameters must all be positive")


# --------------------------------------------------------------------------
# symbolic sequences


class PeriodicSource:
    """The bi-infinite repetition of a finite word."""

    def __init__(self, word):
        self.word = np.array(word, dtype=np.int64)
        if self.word.ndim != 1 or self.word.size == 0:
            raise ValueError("periodic word must be a non-empty 1-d sequence")

    def get(self, lo, hi):
        return self.word[np.arange(lo, hi) % self.word.size]


class SampledSource:
    """A sequence generated block-by-block from a deterministic rule.

    ``block_fn(direction, block, prev)`` returns the next ``BLOCK`` symbols in
    the given direction (+1 for indices 0, 1, ..., -1 for -1, -2, ...); ``prev``
    is the symbol adjacent to the new block, or ``None`` for the very first
    forward block. Blocks are generated in order, so the result does not depend
    on the order coordinates are requested in.
    """

    def __init__(self, block_fn: Callable, limit: int = MAX_INDEX):
        self.block_fn = block_fn
        self.limit = limit
        self._fwd = np.empty(0, dtype=np.int64)
        self._bwd = np.empty(0, dtype=np.int64)
        self._lock = threading.Lock()

    def _grow(self, lo, hi):
        if hi > self.limit or -lo > self.limit:
            raise WindowExhausted(
                f"coordinate range [{lo}, {hi}) beyond sampler limit {self.limit}")
        with self._lock:
            while self._fwd.size < max(hi, 1):
                prev = int(self._fwd[-1]) if self._fwd.size else None
                blk = np.asarray(self.block_fn(+1, self._fwd.size // BLOCK, prev), dtype=np.int64)
                self._fwd = np.concatenate([self._fwd, blk])
            while self._bwd.size < -lo:
                prev = int(self._bwd[-1]) if self._bwd.size else int(self._fwd[0])
                blk = np.asarray(self.block_fn(-1, self._bwd.size // BLOCK, prev), dtype=np.int64)
                self._bwd = np.concatenate([self._bwd, blk])

    def get(self, lo, hi):
        self._grow(lo, hi)
        idx = np.arange(lo, hi)
        out = np.empty(idx.size, dtype=np.int64)
        pos = idx >= 0
        out[pos] = self._fwd[idx[pos]]
        out[~pos] = self._bwd[-idx[~pos] - 1]
        return out


class StoredSource:
    """Explicit symbols on ``[lo, lo + len)`` with another source outside."""

    def __init__(self, symbols, lo, outer):
        self.symbols = np.array(symbols, dtype=np.int64)
        self.lo = int(lo)
        self.outer = outer

    def get(self, lo, hi):
        out = self.outer.get(lo, hi) if self.outer is not None else None
        s_lo, s_hi = self.lo, self.lo + self.symbols.size
        if out is None:
            if lo < s_lo or hi > s_hi:
                raise WindowExhausted(f"no extension beyond stored window [{s_lo}, {s_hi})")
            return self.symbols[lo - s_lo:hi - s_lo].copy()
        a, b = max(lo, s_lo), min(hi, s_hi)
        if a < b:
            out[a - lo:b - lo] = self.symbols[a - s_lo:b - s_lo]
        return out


class SymbolicWindow:
    """A point ``(x_n)_{n in Z}`` of a shift space.

    ``center_offset`` records how far the underlying sequence has been shifted,
    so stepping is O(1) and all iterates share one lazily extended source.
    """

    __slots__ = ("source", "center_offset")

    def __init__(self, source, center_offset: int = 0):
        self.source = source
        self.center_offset = int(center_offset)

    @classmethod
    def periodic(cls, word) -> "SymbolicWindow":
        if isinstance(word, str):
            word = [int(c) for c in word]
        return cls(PeriodicSource(word))

    @classmethod
    def from_symbols(cls, symbols, lo=0, extension=None) -> "SymbolicWindow":
        """Stored ``symbols`` at indices ``lo, lo+1, ...``; ``extension`` (a
        word, a source or ``None``) supplies coordinates outside."""
        if isinstance(symbols, str):
            symbols = [int(c) for c in symbols]
        if extension is not None and not hasattr(extension, "get"):
            extension = PeriodicSource([int(c) for c in extension] if isinstance(extension, str) else extension)
        return cls(StoredSource(symbols, lo, extension))

    @property
    def period(self) -> Optional[int]:
        if isinstance(self.source, PeriodicSource):
            return int(self.source.word.size)
        return None

    def symbols(self, lo: int, hi: int) -> np.ndarray:
        """Coordinates ``x_lo, ..., x_{hi-1}``."""
        return self.source.get(lo + self.center_offset, hi + self.center_offset)

    def shifted(self, n: int) -> "SymbolicWindow":
        return SymbolicWindow(self.source, self.center_offset + n)

    def word(self, lo: int, hi: int) -> str:
        return "".join(str(int(s)) for s in self.symbols(lo, hi))

    def __repr__(self):
        return f"SymbolicWindow({self.word(0, min(self.period or 8, 16))}..., offset={self.center_offset})"


class ShiftSpace:
    """Two-sided subshift of finite type with metric ``metric_base ** -N``."""

    kind = "sft"

    def __init__(self, transition, metric_base: float = math.e, horizon: int = DEFAULT_HORIZON,
                 closing: Optional[ClosingParams] = None):
        t = np.array(transition, dtype=np.int64)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] < 2:
            raise ValueError("transition must be a square matrix over at least 2 symbols")
        if not np.isin(t, (0, 1)).all():
            raise ValueError("transition matrix must be 0/1")
        if (t.sum(axis=1) == 0).any() or (t.sum(axis=0) == 0).any():
            raise ValueError("transition matrix has a dead symbol")
        if not metric_base > 1:
            raise ValueError("metric_base must exceed 1")
        self.transition = t
        self.metric_base = float(metric_base)
        self.horizon = int(horizon)
        self.closing = closing or ClosingParams(1.0, float(np.log(self.metric_base)), 1.0)

    @classmethod
    def full(cls, alphabet_size: int = 2, **kw) -> "ShiftSpace":
        return cls(np.ones((alphabet_size, alphabet_size), dtype=np.int64), **kw)

    @property
    def alphabet_size(self) -> int:
        return self.transition.shape[0]

    @property
    def is_full(self) -> bool:
        return bool(self.transition.all())

    @property
    def expansion_rate(self) -> float:
        return float(np.log(self.metric_base))

    def allowed(self, a: int, b: int) -> bool:
        return bool(self.transition[a, b])

    def check_window(self, x: SymbolicWindow, lo: int, hi: int):
        s = x.symbols(lo, hi)
        if ((s < 0) | (s >= self.alphabet_size)).any():
            raise ValueError("symbol outside the alphabet")
        if s.size > 1 and not self.transition[s[:-1], s[1:]].all():
            raise ValueError("window contains a forbidden transition")

    def step(self, x: SymbolicWindow, n: int) -> SymbolicWindow:
        return x.shifted(n)

    def distance(self, x: SymbolicWindow, y: SymbolicWindow) -> float:
        h = self.horizon
        diff = np.nonzero(x.symbols(-h, h + 1) != y.symbols(-h, h + 1))[0]
        if diff.size == 0:
            return 0.0
        radius = int(np.abs(diff - h).min())
        return float(self.metric_base ** (-radius))

    def __repr__(self):
        return f"ShiftSpace(alphabet={self.alphabet_size}, full={self.is_full}, base={self.metric_base:.6g})"


# --------------------------------------------------------------------------
# torus


def _int_matrix(m) -> list:
    return [[int(v) for v in row] for row in m]


def _int_matmul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    return [[sum(a[i][t] * b[t][j] for t in range(k)) for j in range(m)] for i in range(n)]


def _int_matvec(a, v):
    return [sum(a[i][t] * v[t] for t in range(len(v))) for i in range(len(a))]


def _int_det(m) -> int:
    """Determinant by fraction-free Bareiss elimination."""
    a = [list(r) for r in m]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _int_matpow(m, n, mod=None):
    d = len(m)
    result = [[int(i == j) for j in range(d)] for i in range(d)]
    base = [list(r) for r in m]
    while n:
        if n & 1:
            result = _int_matmul(base, result)
            if mod:
                result = [[v % mod for v in r] for r in result]
        n >>= 1
        if n:
            base = _int_matmul(base, base)
            if mod:
                base = [[v % mod for v in r] for r in base]
    return result


def _solve_fractions(a, rhs):
    """Exact Gaussian elimination over the rationals."""
    n = len(a)
    m = [[Fraction(v) for v in row] + [Fraction(r)] for row, r in zip(a, rhs)]
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            raise IllConditionedClosing("M^k - I is singular")
        m[c], m[piv] = m[piv], m[c]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c] / m[c][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [m[i][n] / m[i][i] for i in range(n)]


class TorusPoint:
    """A point of ``R^d / Z^d``.

    Exact points store integer numerators ``num`` over a common denominator
    ``q``; float points store only ``coords``.
    """

    __slots__ = ("coords", "num", "q")

    def __init__(self, coords, num=None, q=None):
        if num is not None:
            q = int(q)
            num = tuple(int(v) % q for v in num)
            coords = np.array([v / q for v in num], dtype=float)
        else:
            coords = np.mod(np.array(coords, dtype=float), 1.0)
            coords[coords >= 1.0] = 0.0
        self.coords = coords
        self.num = num
        self.q = q

    @classmethod
    def exact(cls, num, q) -> "TorusPoint":
        return cls(None, num=num, q=q)

    @classmethod
    def from_fractions(cls, fracs) -> "TorusPoint":
        fracs = [Fraction(f) % 1 for f in fracs]
        q = 1
        for f in fracs:
            q = q * f.denominator // math.gcd(q, f.denominator)
        return cls.exact([f.numerator * (q // f.denominator) for f in fracs], q)

    @property
    def is_exact(self) -> bool:
        return self.num is not None

    def fractions(self):
        if self.num is not None:
            return [Fraction(v, self.q) for v in self.num]
        return [Fraction(float(c)) for c in self.coords]

    def exactified(self) -> "TorusPoint":
        return self if self.is_exact else TorusPoint.from_fractions(self.fractions())

    @property
    def dim(self) -> int:
        return self.coords.size

    def __repr__(self):
        tag = f", q={self.q}" if self.is_exact and self.q < 10**6 else (", exact" if self.is_exact else "")
        return f"TorusPoint({np.array2string(self.coords, precision=6)}{tag})"


class TorusMap:
    """Hyperbolic automorphism ``x -> M x (mod 1)`` of the ``d``-torus."""

    kind = "torus"

    def __init__(self, matrix, closing: Optional[ClosingParams] = None):
        arr = np.array(matrix)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 2:
            raise ValueError("torus matrix must be square of size >= 2")
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise ValueError("torus matrix must be integer")
        self.int_matrix = _int_matrix(arr)
        det = _int_det(self.int_matrix)
        if abs(det) != 1:
            raise ValueError(f"torus matrix must have determinant +-1, got {det}")
        self.matrix = np.array(self.int_matrix, dtype=float)
        eig = np.linalg.eigvals(self.matrix)
        if np.min(np.abs(np.abs(eig) - 1.0)) <= 1e-9:
            raise ValueError("torus matrix is not hyperbolic")
        self.eigenvalues = eig
        d = len(self.int_matrix)
        # inverse of a unimodular integer matrix: adjugate times det
        inv = np.rint(np.linalg.inv(self.matrix)).astype(np.int64)
        self.int_inverse = _int_matrix(inv)
        if _int_matmul(self.int_matrix, self.int_inverse) != [[int(i == j) for j in range(d)] for i in range(d)]:
            raise ValueError("failed to invert torus matrix exactly")
        self.inverse = np.array(self.int_inverse, dtype=float)
        self.closing = closing

    @property
    def dim(self) -> int:
        return len(self.int_matrix)

    @property
    def expansion_rate(self) -> float:
        return float(np.min(np.abs(np.log(np.abs(self.eigenvalues)))))

    def power(self, n: int, mod=None):
        m = self.int_matrix if n >= 0 else self.int_inverse
        return _int_matpow(m, abs(n), mod)

    def step(self, x: TorusPoint, n: int) -> TorusPoint:
        if x.is_exact:
            return TorusPoint.exact(_int_matvec(self.power(n, x.q), list(x.num)), x.q)
        m = self.matrix if n >= 0 else self.inverse
        c = x.coords.copy()
        for _ in range(abs(n)):
            c = np.mod(m @ c, 1.0)
            c[c >= 1.0] = 0.0
        return TorusPoint(c)

    def orbit_coords(self, x: TorusPoint, start: int, stop: int) -> np.ndarray:
        """Float coordinates of ``f^i x`` for ``start <= i < stop``."""
        n = stop - start
        out = np.empty((max(n, 0), self.dim))
        if n <= 0:
            return out
        if x.is_exact:
            q = x.q
            v = _int_matvec(self.power(start, q), list(x.num))
            v = [t % q for t in v]
            bound = q * max(sum(abs(t) for t in r) for r in self.int_matrix)
            if bound < 2**62:
                m = np.array(self.int_matrix, dtype=np.int64)
                cur = np.array(v, dtype=np.int64)
                nums = np.empty((n, self.dim), dtype=np.int64)
                for i in range(n):
                    nums[i] = cur
                    cur = (m @ cur) % q
                return nums / q
            for i in range(n):
                out[i] = [t / q for t in v]
                v = [t % q for t in _int_matvec(self.int_matrix, v)]
            return out
        cur = self.step(x, start).coords
        for i in range(n):
            out[i] = cur
            cur = np.mod(self.matrix @ cur, 1.0)
            cur[cur >= 1.0] = 0.0
        return out

    def distance(self, x: TorusPoint, y: TorusPoint) -> float:
        if x.is_exact and y.is_exact:
            Q = x.q * y.q
            best = 0
            for a, b in zip(x.num, y.num):
                t = (a * y.q - b * x.q) % Q
                best = max(best, min(t, Q - t))
            return best / Q
        t = np.abs(x.coords - y.coords)
        return float(np.max(np.minimum(t, 1.0 - t)))

    def __repr__(self):
        return f"TorusMap({self.int_matrix})"


# --------------------------------------------------------------------------
# operations shared by both kinds of base


def step(base, x, n: int):
    """The iterate ``f^n(x)``."""
    return base.step(x, n)


def distance(base, x, y) -> float:
    return base.distance(x, y)


def _exact_if_torus(base, x):
    return x.exactified() if isinstance(base, TorusMap) else x


def return_window(n: int, eps_prime: float):
    """Integers strictly inside ``(n(1+eps'), n(1+2eps'))`` as ``(lo, hi)`` inclusive."""
    lo = math.floor(n * (1 + eps_prime) + 1e-9) + 1
    hi = math.ceil(n * (1 + 2 * eps_prime) - 1e-9) - 1
    return lo, hi


def find_return(base, x, n: int, eps_prime: float, delta: float) -> int:
    """Smallest ``k`` in ``(n(1+eps'), n(1+2eps'))`` with ``dist(x, f^k x) < delta``.

    Raises :class:`NotFound` when the window holds no such return; the caller
    should retry with a larger ``n``.
    """
    if n < 1 or eps_prime <= 0 or delta <= 0:
        raise ValueError("find_return needs n >= 1, eps_prime > 0, delta > 0")
    lo, hi = return_window(n, eps_prime)
    x = _exact_if_torus(base, x)
    if lo > hi:
        raise NotFound(f"empty return window for n={n}, eps'={eps_prime}")
    y = base.step(x, lo)
    for k in range(lo, hi + 1):
        if base.distance(x, y) < delta:
            return k
        y = base.step(y, 1)
    raise NotFound(f"no return within {delta} for k in [{lo}, {hi}]")


@dataclass(frozen=True)
class PeriodicOrbit:
    """A point ``p`` with ``f^k p = p`` for the declared ``period_k``."""

    point: object
    period_k: int
    residual: float = 0.0

    def label(self) -> str:
        p = self.point
        if isinstance(p, SymbolicWindow):
            return p.word(0, self.period_k)
        if p.is_exact:
            return " ".join(f"{v}/{p.q}" for v in p.num)
        return " ".join(repr(float(c)) for c in p.coords)


def close_orbit(base, x, k: int) -> PeriodicOrbit:
    """Periodic point of period ``k`` shadowing the near-return ``x ~ f^k x``."""
    if k < 1:
        raise ValueError("period must be positive")
    delta0 = base.closing.delta0 if base.closing is not None else 0.5
    d0 = base.distance(_exact_if_torus(base, x), base.step(_exact_if_torus(base, x), k))
    if d0 >= delta0:
        raise ValueError(f"dist(x, f^k x) = {d0:.3g} is not below delta0 = {delta0:.3g}")
    if isinstance(base, ShiftSpace):
        w = x.symbols(0, k)
        if not base.allowed(int(w[-1]), int(w[0])):
            raise ForbiddenWrap(f"wrap pair ({w[-1]}, {w[0]}) is forbidden")
        base.check_window(x, 0, k)
        return PeriodicOrbit(SymbolicWindow.periodic(w), k, 0.0)
    return _close_torus(base, x.exactified(), k)


def _close_torus(base: TorusMap, x: TorusPoint, k: int) -> PeriodicOrbit:
    fx = base.step(x, k)
    # wrapped exact difference f^k x - x in [-1/2, 1/2)
    delta = []
    for a, b in zip(fx.fractions(), x.fractions()):
        t = a - b
        delta.append(t - math.floor(t + Fraction(1, 2)))
    mk = base.power(k)
    b_mat = [[mk[i][j] - int(i == j) for j in range(base.dim)] for i in range(base.dim)]
    w = _solve_fractions(b_mat, [-t for t in delta])
    p = TorusPoint.from_fractions([a + b for a, b in zip(x.fractions(), w)])
    residual = base.distance(base.step(p, k), p)
    if residual > 1e-9:
        raise IllConditionedClosing(f"periodicity residual {residual:.3g}")
    return PeriodicOrbit(p, k, residual)


def shadowing_profile(base, x, p, k: int) -> np.ndarray:
    """``dist(f^i x, f^i p)`` for ``i = 0..k``."""
    if isinstance(p, PeriodicOrbit):
        p = p.point
    if isinstance(base, ShiftSpace):
        return np.array([base.distance(x.shifted(i), p.shifted(i)) for i in range(k + 1)])
    x, p = x.exactified(), p.exactified()
    out = np.empty(k + 1)
    for i in range(k + 1):
        out[i] = base.distance(x, p)
        x, p = base.step(x, 1), base.step(p, 1)
    return out


def closing_envelope(params: ClosingParams, d0: float, k: int) -> np.ndarray:
    i = np.arange(k + 1)
    return params.D * d0 * np.exp(-params.gamma * np.minimum(i, k - i))


def _near_returns(base, samples, seed, delta, k_max):
    from .measures import default_sampler, sample_point

    sampler = default_sampler(base, seed)
    pairs, r = [], 0
    while len(pairs) < samples:
        if r > 50 * samples:
            raise CalibrationFailed(f"found only {len(pairs)} near-returns below {delta}")
        x = sample_point(sampler, base, replica=r)
        r += 1
        xe = _exact_if_torus(base, x)
        y = base.step(xe, 1)
        for k in range(1, k_max + 1):
            if base.distance(xe, y) < delta:
                pairs.append((xe, k))
                break
            y = base.step(y, 1)
    return pairs


def linear_closing_constant(base: "TorusMap", gamma: Optional[float] = None, k_max: int = 200) -> float:
    """``sup_k max_i ||M^i (M^k - I)^{-1}||_inf e^{gamma min(i, k-i)}`` for ``k <= k_max``.

    Closing on a torus is linear, ``p - x = -(M^k - I)^{-1} (f^k x - x)``, so
    this bounds every shadowing profile in the sup metric. Powers are taken in the eigenbasis
    because ``M^k - I`` is too ill-conditioned to invert directly.
    """
    gamma = base.expansion_rate if gamma is None else gamma
    w, V = np.linalg.eig(base.matrix)
    if np.linalg.cond(V) > 1e8:
        k_max = min(k_max, 20)
        powers = [np.linalg.matrix_power(base.matrix, i) for i in range(k_max + 1)]
        ops_of = lambda k: np.stack(powers[:k + 1]) @ np.linalg.inv(powers[k] - np.eye(base.dim))
    else:
        Vi = np.linalg.inv(V)
        k_max = min(k_max, int(150 * math.log(10) / math.log(np.abs(w).max())))

        def ops_of(k):
            diag = w[None, :] ** np.arange(k + 1)[:, None] / (w ** k - 1)[None, :]
            return ((V[None] * diag[:, None, :]) @ Vi).real
    D = 0.0
    for k in range(1, k_max + 1):
        i = np.arange(k + 1)
        D = max(D, float((op_norms(ops_of(k), "linf") * np.exp(gamma * np.minimum(i, k - i))).max()))
    return D


def calibrate_closing(base, samples: int = 100, seed: int = 0, pairs: Optional[Sequence] = None,
                      delta: float = 0.05, k_max: int = 2000, linear_bound: bool = False) -> ClosingParams:
    """Fit the smallest envelope constant ``D`` at the expansion rate ``gamma``.

    Near-return pairs ``(x, k)`` are taken from ``pairs`` or found by scanning
    sampled orbits for ``dist(x, f^k x) < delta``. ``delta0`` becomes the largest
    return distance that closed successfully. With ``linear_bound`` a torus fit
    starts from :func:`linear_closing_constant`, which covers every pair.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    gamma = base.expansion_rate
    if pairs is None:
        pairs = _near_returns(base, samples, seed, delta, k_max)
    D, delta0 = 1.0, 0.0
    if linear_bound and isinstance(base, TorusMap):
        # sampled returns rarely have the short periods where the constant peaks
        D = linear_closing_constant(base, gamma) * (1 + 1e-9)
    for x, k in pairs:
        x = _exact_if_torus(base, x)
        d0 = base.distance(x, base.step(x, k))
        try:
            orbit = close_orbit(base, x, k)
        except (ForbiddenWrap, IllConditionedClosing, ValueError) as exc:
            raise CalibrationFailed(f"pair with k={k} failed to close: {exc}") from exc
        prof = shadowing_profile(base, x, orbit.point, k)
        if d0 == 0.0:
            if prof.max() > 0:
                raise CalibrationFailed("exact return shadowed by a distinct orbit")
            continue
        i = np.arange(k + 1)
        # log space: the envelope underflows for long returns
        pos = prof > 0
        log_need = np.log(prof[pos]) - math.log(d0) + gamma * np.minimum(i, k - i)[pos]
        need = float(np.exp(log_need.max())) if pos.any() else 0.0
        if not np.isfinite(need):
            raise CalibrationFailed("non-finite envelope ratio")
        D = max(D, need)
        delta0 = max(delta0, d0)
    return ClosingParams(D=D, gamma=gamma, delta0=delta0 if delta0 > 0 else max(delta, 1e-12))
