"""Periodic orbits, their exponent quantities, and checks of periodic approximation.

For a periodic point ``p = f^k p`` the measure on its orbit has upper exponent
``(1/k) ln r(A^k_p)`` and lower exponent ``-(1/k) ln r((A^k_p)^{-1})``. The
approximation result says that for every ``eps`` there are such ``p`` with

    |lambda - (1/k) ln||A^k_p||| < eps   and   |chi - (1/k) ln||(A^k_p)^{-1}||^{-1}| < eps.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, List, Optional

import numpy as np

from .bases import PeriodicOrbit, ShiftSpace, SymbolicWindow, TorusMap, TorusPoint, _int_det, find_return, close_orbit
from .cocycles import CocycleGenerator, ConstantCocycle, LocallyConstantCocycle
from .errors import BudgetExceeded, ForbiddenWrap, IllConditionedClosing, NotFound, WindowExhausted
from .exponents import estimate_exponents, km_good_times, ordered_map, subadditive_sequence
from .linalg import chain_product, op_norms
from .measures import default_sampler, sample_point

__all__ = [
    "PeriodicOrbit", "PeriodicScore", "allowed_words", "enumerate_periodic", "count_periodic",
    "score_periodic", "verify_main_theorem", "TheoremReport", "corollary_norm_rates", "CorollaryReport",
]

log = logging.getLogger(__name__)

SFT_BUDGET = 2 ** 24
TORUS_BUDGET = 2 ** 20
TIE_TOL = 1e-12


# --------------------------------------------------------------------------
# enumeration


def allowed_words(base: ShiftSpace, length: int) -> Iterator[tuple]:
    """All words of ``length`` whose consecutive pairs are allowed, in lexicographic order."""
    if length < 1:
        return
    T = base.transition
    a = base.alphabet_size
    word = [0] * length

    def rec(t):
        if t == length:
            yield tuple(word)
            return
        for s in range(a):
            if t == 0 or T[word[t - 1], s]:
                word[t] = s
                yield from rec(t + 1)

    yield from rec(0)


def _necklaces(base: ShiftSpace, k: int) -> List[tuple]:
    """Lexicographically minimal rotations of the cyclically allowed words of length ``k``.

    FKM prenecklace generation, pruned on forbidden transitions.
    """
    a, T = base.alphabet_size, base.transition
    w = [0] * (k + 1)
    out = []

    def rec(t, p):
        if t > k:
            if k % p == 0 and T[w[k], w[1]]:
                out.append(tuple(w[1:]))
            return
        for s in range(w[t - p], a):
            if t > 1 and not T[w[t - 1], s]:
                continue
            w[t] = s
            rec(t + 1, p if s == w[t - p] else t)

    rec(1, 1)
    return out


def _torus_solutions(base: TorusMap, k: int, budget: int) -> List[TorusPoint]:
    """All ``p`` in ``[0,1)^d`` with ``(M^k - I) p`` integral, as exact points."""
    d = base.dim
    mk = base.power(k)
    B = [[mk[i][j] - int(i == j) for j in range(d)] for i in range(d)]
    det = _int_det(B)
    q = abs(det)
    if q == 0:
        raise ValueError("M^k - I is singular")
    if q > budget:
        raise BudgetExceeded(f"{q} periodic points of period {k} exceed budget {budget}")
    # columns of B^{-1} = adj(B)/det generate the solution group B^{-1} Z^d / Z^d
    gens = []
    for j in range(d):
        col = []
        for i in range(d):
            minor = [[B[r][c] for c in range(d) if c != i] for r in range(d) if r != j]
            cof = (-1) ** (i + j) * (_int_det(minor) if minor else 1)
            col.append((cof * (1 if det > 0 else -1)) % q)
        gens.append(tuple(col))
    seen = {tuple([0] * d)}
    frontier = [tuple([0] * d)]
    while frontier:
        nxt = []
        for v in frontier:
            for g in gens:
                u = tuple((a + b) % q for a, b in zip(v, g))
                if u not in seen:
                    seen.add(u)
                    nxt.append(u)
        frontier = nxt
    if len(seen) != q:
        raise RuntimeError(f"lattice sweep found {len(seen)} of {q} residue classes")
    return [TorusPoint.exact(v, q) for v in sorted(seen)]


def enumerate_periodic(base, k: int, budget: Optional[int] = None) -> Iterator[PeriodicOrbit]:
    """Periodic orbits of declared period ``k`` in canonical order.

    Shift: one lexicographically minimal word per cyclic class. Torus: every
    solution of ``(M^k - I) p in Z^d``, sorted by numerator.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if isinstance(base, ShiftSpace):
        budget = SFT_BUDGET if budget is None else budget
        if base.alphabet_size ** k > budget:
            raise BudgetExceeded(f"alphabet^k = {base.alphabet_size}^{k} exceeds budget {budget}")
        for w in _necklaces(base, k):
            yield PeriodicOrbit(SymbolicWindow.periodic(w), k, 0.0)
        return
    if base.dim > 3:
        raise ValueError("torus enumeration supports dimension <= 3")
    budget = TORUS_BUDGET if budget is None else budget
    for p in _torus_solutions(base, k, budget):
        yield PeriodicOrbit(p, k, 0.0)


def count_periodic(base, k: int, budget: Optional[int] = None) -> int:
    """Number of words of length ``k`` covered by the enumeration (shift) or points (torus)."""
    if isinstance(base, ShiftSpace):
        total = 0
        for orb in enumerate_periodic(base, k, budget):
            w = orb.point.symbols(0, k)
            least = next(p for p in range(1, k + 1) if k % p == 0 and np.array_equal(np.roll(w, p), w))
            total += least
        return total
    return sum(1 for _ in enumerate_periodic(base, k, budget))


# --------------------------------------------------------------------------
# scores


@dataclass(frozen=True)
class PeriodicScore:
    """Rates of ``A^k_p`` along one periodic orbit; ``ln_Q = ln(||A^k_p|| ||(A^k_p)^{-1}||)``."""

    upper_rate: float
    lower_rate: float
    upper_exponent: float
    lower_exponent: float
    ln_Q: float
    k: int = 0
    label: str = ""

    def row(self):
        return [self.k, self.label, self.upper_rate, self.lower_rate, self.upper_exponent,
                self.lower_exponent, self.ln_Q]


SCORE_HEADER = ["k", "canonical_word_or_coords", "upper_rate", "lower_rate", "upper_exponent",
                "lower_exponent", "ln_Q"]


def score_periodic(gen: CocycleGenerator, base, p: PeriodicOrbit) -> PeriodicScore:
    k = p.period_k
    fwd = chain_product(gen.matrices(base, p.point, 0, k))
    inv = chain_product(gen.inverse_matrices(base, p.point, 0, k)[::-1])
    ln_f, ln_i = fwd.log_norm(gen.norm), inv.log_norm(gen.norm)
    return PeriodicScore(
        upper_rate=ln_f / k,
        lower_rate=-ln_i / k,
        upper_exponent=fwd.log_spectral_radius() / k,
        lower_exponent=-inv.log_spectral_radius() / k,
        ln_Q=ln_f + ln_i,
        k=k,
        label=p.label(),
    )


def _residual(s: PeriodicScore, lam, chi) -> float:
    return max(abs(lam - s.upper_rate), abs(chi - s.lower_rate))


# --------------------------------------------------------------------------
# approximation check


@dataclass
class TheoremReport:
    mode: str
    lambda_hat: float
    chi_hat: float
    stderr: float
    eps_target: float
    success: bool
    winner: Optional[PeriodicScore] = None
    residual: float = math.inf
    residual_upper: float = math.inf
    residual_lower: float = math.inf
    one_sided_upper: Optional[bool] = None
    one_sided_lower: Optional[bool] = None
    scores: List[PeriodicScore] = field(default_factory=list, repr=False)
    details: dict = field(default_factory=dict)

    def as_dict(self):
        w = self.winner
        return {
            "mode": self.mode,
            "lambda_hat": self.lambda_hat,
            "chi_hat": self.chi_hat,
            "stderr": self.stderr,
            "eps_target": self.eps_target,
            "success": self.success,
            "winner": None if w is None else dict(zip(SCORE_HEADER, w.row())),
            "residual": self.residual,
            "residual_upper": self.residual_upper,
            "residual_lower": self.residual_lower,
            "one_sided_upper": self.one_sided_upper,
            "one_sided_lower": self.one_sided_lower,
            "orbits_scored": len(self.scores),
            "details": self.details,
        }


def _finish(report: TheoremReport):
    w = report.winner
    if w is None:
        return report
    lam, chi = report.lambda_hat, report.chi_hat
    report.residual_upper = abs(lam - w.upper_rate)
    report.residual_lower = abs(chi - w.lower_rate)
    report.residual = max(report.residual_upper, report.residual_lower)
    report.success = bool(report.residual < report.eps_target + 2 * report.stderr)
    report.one_sided_upper = bool(w.upper_exponent < lam + report.eps_target)
    report.one_sided_lower = bool(w.lower_exponent > chi - report.eps_target)
    return report


def verify_main_theorem(gen: CocycleGenerator, base, sampler=None, eps_target: float = 0.05,
                        k_max: int = 16, N_min: int = 0, *, n: int = 10_000, replicas: int = 8,
                        estimates=None, mode: str = "exhaustive", budget: Optional[int] = None,
                        threads=None, constructive: Optional[dict] = None) -> TheoremReport:
    """Search for a periodic point whose norm rates match the sampled exponents.

    ``estimates`` may carry precomputed ``(lambda_hat, chi_hat)`` estimates;
    otherwise they are estimated from ``sampler`` at horizon ``n``.
    Exhaustive mode scores every orbit with ``N_min < k <= k_max`` and keeps
    the minimax residual; constructive mode follows the closing recipe from a
    sampled point (see :func:`_constructive`).
    """
    if not eps_target > 0:
        raise ValueError("eps_target must be positive")
    if k_max < 1 or N_min < 0:
        raise ValueError("need k_max >= 1 and N_min >= 0")
    sampler = default_sampler(base) if sampler is None else sampler
    if estimates is None:
        estimates = estimate_exponents(gen, base, sampler, n, replicas, threads)
    lam_e, chi_e = estimates
    lam, chi = lam_e.value, chi_e.value
    stderr = max(lam_e.stderr, chi_e.stderr)
    report = TheoremReport(mode, lam, chi, stderr, eps_target, False)
    if mode == "exhaustive":
        orbits = []
        for k in range(N_min + 1, k_max + 1):
            orbits.extend(enumerate_periodic(base, k, budget))
        log.info("scoring %d periodic orbits", len(orbits))
        scores = ordered_map(lambda p: score_periodic(gen, base, p), orbits, threads)
        report.scores = scores
        if scores:
            # enumeration order is (k, canonical order), so argmin breaks ties as required
            res = np.array([_residual(s, lam, chi) for s in scores])
            # residuals equal up to rounding count as ties
            report.winner = scores[int(np.argmax(res <= res.min() + TIE_TOL))]
        return _finish(report)
    if mode == "constructive":
        return _finish(_constructive(gen, base, sampler, report, k_max, N_min, constructive or {}))
    raise ValueError(f"unknown mode {mode!r}")


def _constructive(gen, base, sampler, report: TheoremReport, k_max, N_min, opts) -> TheoremReport:
    """Good time ``n`` for both ``a`` and ``ã`` at a sampled ``x``, a return ``k`` in
    ``(n(1+eps'), n(1+2eps'))`` with ``dist(x, f^k x) < delta/D``, then closing.

    ``eps' = 4 eps / (alpha gamma)``. The constants ``ell``, ``c`` and ``L`` of
    the smallness condition on ``delta`` are supplied by the caller; the value
    of that condition is reported, not enforced.
    """
    eps = report.eps_target
    lam, chi = report.lambda_hat, report.chi_hat
    alpha = gen.holder_alpha
    gamma = base.closing.gamma if base.closing is not None else base.expansion_rate
    D = base.closing.D if base.closing is not None else 1.0
    delta = float(opts.get("delta", base.closing.delta0 if base.closing is not None else 0.1))
    ell = float(opts.get("ell", 10.0))
    c = float(opts.get("c", 1.0))
    L = int(opts.get("L", 10))
    horizon = int(opts.get("horizon", 4 * k_max))
    points = int(opts.get("points", 8))
    eps_prime = 4 * eps / (alpha * gamma)
    chi_p = gen.chi_prime
    M = gen.holder_M
    cdelta = delta ** alpha * M * ell * math.exp(c * ell * delta ** alpha) * (
        math.exp(-lam + eps) / (1 - math.exp(-eps)) + L * math.exp(-chi_p + (lam - chi_p) * L))
    det = {"eps_prime": eps_prime, "delta": delta, "ell": ell, "c": c, "L": L,
           "C2_plus_C3": cdelta, "C2_plus_C3_below_half": bool(cdelta < 0.5), "stalled_at": None}
    report.details = det
    for r in range(points):
        x = sample_point(sampler, base, replica=r)
        try:
            a = subadditive_sequence(gen, base, x, horizon, "a")
            at = subadditive_sequence(gen, base, x, horizon, "a_tilde")
        except WindowExhausted as exc:
            det["stalled_at"] = f"sequence: {exc}"
            continue
        good = np.intersect1d(km_good_times(a, lam, eps, L), km_good_times(at, -chi, eps, L))
        good = good[good > max(L, N_min)]
        if good.size == 0:
            det["stalled_at"] = "good_times"
            continue
        for n in good:
            try:
                k = find_return(base, x, int(n), eps_prime, delta / D)
            except NotFound:
                det["stalled_at"] = "return"
                continue
            if k > k_max:
                det["stalled_at"] = "return_beyond_k_max"
                break
            try:
                orb = close_orbit(base, x, k)
            except (ForbiddenWrap, IllConditionedClosing, ValueError) as exc:
                det["stalled_at"] = f"closing: {exc}"
                continue
            s = score_periodic(gen, base, orb)
            report.scores.append(s)
            det.update(stalled_at=None, replica=r, n=int(n), k=int(k))
            report.winner = s
            return report
    return report


# --------------------------------------------------------------------------
# sup-over-orbit growth rates


@dataclass
class CorollaryReport:
    s_n: np.ndarray
    t_k: np.ndarray
    q_n: np.ndarray
    q_k: np.ndarray
    gap: float
    q_gap: float
    exact: bool

    def as_dict(self):
        return {"s_n": self.s_n.tolist(), "t_k": self.t_k.tolist(), "q_n": self.q_n.tolist(),
                "q_k": self.q_k.tolist(), "gap": self.gap, "q_gap": self.q_gap, "exact": self.exact}


def _word_rates(gen: LocallyConstantCocycle, base: ShiftSpace, n_max: int, budget: int):
    """Exact ``max_w (1/n) ln||A_w||`` and ``max_w (1/n) ln Q_w`` over allowed words.

    Each level keeps the products of every allowed word of length ``n + 2m``.
    """
    m, a = gen.memory, gen.alphabet_size
    width = 2 * m + 1
    T = base.transition
    words = np.array(list(allowed_words(base, width)), dtype=np.int64).reshape(-1, width)
    if words.size == 0:
        raise ValueError("no allowed words")
    idx = words @ (a ** np.arange(width - 1, -1, -1))
    if not gen._present[idx].all():
        raise BudgetExceeded("cocycle table does not cover the allowed words")
    P, Pi = gen._mats[idx].copy(), gen._inv[idx].copy()
    lp, li = np.zeros(len(idx)), np.zeros(len(idx))
    s, q = np.empty(n_max), np.empty(n_max)
    for n in range(1, n_max + 1):
        if n > 1:
            last = words[:, -1]
            parent, sym = np.nonzero(T[last])
            if parent.size > budget:
                raise BudgetExceeded(f"{parent.size} words of length {n + 2 * m} exceed budget {budget}")
            words = np.concatenate([words[parent], sym[:, None]], axis=1)
            idx = words[:, -width:] @ (a ** np.arange(width - 1, -1, -1))
            P = gen._mats[idx] @ P[parent]
            Pi = Pi[parent] @ gen._inv[idx]
            lp, li = lp[parent], li[parent]
            for X, l in ((P, lp), (Pi, li)):
                sc = np.abs(X).max(axis=(1, 2))
                sc[sc == 0] = 1.0
                X /= sc[:, None, None]
                l += np.log(sc)
        ln_f = lp + np.log(op_norms(P, gen.norm))
        ln_i = li + np.log(op_norms(Pi, gen.norm))
        s[n - 1] = ln_f.max() / n
        q[n - 1] = (ln_f + ln_i).max() / n
    return s, q


def _sampled_rates(gen, base, n_max, samples, seed, threads):
    sampler = default_sampler(base, seed)

    def one(r):
        x = sample_point(sampler, base, replica=r)
        from .linalg import prefix_products

        P, lp = prefix_products(gen.matrices(base, x, 0, n_max))
        I, li = prefix_products(np.swapaxes(gen.inverse_matrices(base, x, 0, n_max), 1, 2))
        dual = {"l1": "linf", "linf": "l1", "l2": "l2"}[gen.norm]
        return (lp + np.log(op_norms(P, gen.norm)))[1:], (li + np.log(op_norms(I, dual)))[1:]

    n = np.arange(1, n_max + 1)
    s = np.full(n_max, -np.inf)
    q = np.full(n_max, -np.inf)
    for f, i in ordered_map(one, range(samples), threads):
        s = np.maximum(s, f / n)
        q = np.maximum(q, (f + i) / n)
    return s, q


def corollary_norm_rates(gen: CocycleGenerator, base, n_max: int, k_max: int, *, samples: int = 10_000,
                         seed: int = 0, budget: Optional[int] = None, threads=None) -> CorollaryReport:
    """``s_n = sup_x (1/n) ln||A^n_x||`` against ``t_k = max_p (1/k) ln||A^k_p||``, and the
    same for ``ln Q``.

    The sup is exact for locally constant cocycles over a shift and for
    constant cocycles; otherwise it is a maximum over ``samples`` sampled points.
    """
    if n_max < 1 or k_max < 1:
        raise ValueError("need n_max >= 1 and k_max >= 1")
    exact = True
    if isinstance(gen, LocallyConstantCocycle) and isinstance(base, ShiftSpace):
        s, q = _word_rates(gen, base, n_max, SFT_BUDGET if budget is None else budget)
    elif isinstance(gen, ConstantCocycle):
        s, q = _sampled_rates(gen, base, n_max, 1, seed, threads)
    else:
        exact = False
        s, q = _sampled_rates(gen, base, n_max, samples, seed, threads)
    t, qk = np.empty(k_max), np.empty(k_max)
    for k in range(1, k_max + 1):
        sc = [score_periodic(gen, base, p) for p in enumerate_periodic(base, k, budget)]
        t[k - 1] = max(x.upper_rate for x in sc)
        qk[k - 1] = max(x.ln_Q for x in sc) / k
    return CorollaryReport(s, t, q, qk, float(abs(s[-1] - t.max())), float(abs(q[-1] - qk.max())), exact)
