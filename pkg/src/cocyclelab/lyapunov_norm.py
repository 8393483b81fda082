"""The epsilon-Lyapunov norm and empirical checks of its contraction and temperedness.

For a point ``x`` and ``u`` in the fiber,

    ||u||_{x,eps} = sum_{n>=0} ||A^n_x u|| e^{-(lam+eps) n} + sum_{n>=1} ||A^{-n}_x u|| e^{(chi-eps) n},

truncated at ``truncation_N`` terms in each direction. Every function here
works on truncated series; convergence is reported as a flag, never assumed.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .bases import PeriodicOrbit, shadowing_profile
from .cocycles import CocycleGenerator
from .errors import ProfileViolated
from .exponents import subadditive_sequence
from .linalg import op_norms, prefix_products, vector_norms

TAIL_TERMS = 10


@dataclass(frozen=True)
class LyapunovNormContext:
    lam: float
    chi: float
    eps: float
    truncation_N: int = 200
    tail_tol: float = 1e-6
    ell: float = 10.0
    rho: float = 0.1

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.chi > self.lam:
            raise ValueError("need chi <= lambda")
        if self.truncation_N < 1 or not self.tail_tol > 0 or not self.ell > 1 or not self.rho > 0:
            raise ValueError("invalid truncation_N, tail_tol, ell or rho")


class LyapunovNorm(NamedTuple):
    value: float
    converged: bool


class Fiber:
    """Precomputed ``A^n_x`` and ``A^{-n}_x`` for ``n <= truncation_N`` at one point."""

    def __init__(self, ctx: LyapunovNormContext, gen: CocycleGenerator, base, x):
        N = ctx.truncation_N
        self.ctx, self.norm = ctx, gen.norm
        fwd, fl = prefix_products(gen.matrices(base, x, 0, N))
        bwd, bl = prefix_products(gen.inverse_matrices(base, x, -N, 0)[::-1])
        n = np.arange(N + 1)
        self.mats = np.concatenate([fwd, bwd[1:]])
        self.log_w = np.concatenate([fl - (ctx.lam + ctx.eps) * n, bl[1:] + (ctx.chi - ctx.eps) * n[1:]])
        self.N = N

    def terms(self, U) -> np.ndarray:
        """Series terms, shape ``(2N + 1, m)`` for the ``m`` columns of ``U``."""
        U = np.asarray(U, dtype=float)
        V = np.einsum("nij,jm->nim", self.mats, U)
        with np.errstate(divide="ignore", over="ignore"):
            logs = np.log(vector_norms(V, self.norm, axis=1)) + self.log_w[:, None]
            return np.exp(logs)

    def norms(self, U):
        """``(values, converged)`` for each column of ``U``."""
        t = self.terms(U)
        total = t.sum(axis=0)
        N = self.N
        tail = np.concatenate([t[N - TAIL_TERMS + 1:N + 1], t[2 * N - TAIL_TERMS + 1:]])
        with np.errstate(invalid="ignore"):
            conv = np.isfinite(total) & (tail < self.ctx.tail_tol * total).all(axis=0)
        conv |= total == 0
        return total, conv


def lyap_vector_norm(ctx, gen, base, x, u) -> LyapunovNorm:
    """Truncated ``||u||_{x,eps}`` and its convergence flag."""
    vals, conv = Fiber(ctx, gen, base, x).norms(np.asarray(u, dtype=float)[:, None])
    return LyapunovNorm(float(vals[0]), bool(conv[0]))


def _search(A, fx: Fiber, fy: Fiber, seed=0, n_random=200, ascent_steps=50, grid=720):
    """Maximize ``||A u||_y / ||u||_x``; returns ``(ratio, u, converged)``."""
    A = np.asarray(A, dtype=float)
    d = A.shape[1]

    def ratio(U):
        num, c1 = fy.norms(A @ U)
        den, c2 = fx.norms(U)
        with np.errstate(invalid="ignore", divide="ignore"):
            r = num / den
        return np.where(np.isfinite(r), r, -np.inf), c1 & c2

    rng = np.random.default_rng(seed)
    U = rng.standard_normal((d, n_random))
    if d == 1:
        U = np.ones((1, 1))
    elif d == 2:
        th = np.pi * np.arange(grid) / grid
        U = np.concatenate([U, np.vstack([np.cos(th), np.sin(th)])], axis=1)
    U /= np.linalg.norm(U, axis=0)
    r, conv = ratio(U)
    k = int(np.argmax(r))
    best_u, best, ok = U[:, k], r[k], bool(conv[k])
    h = 0.1
    eye = np.eye(d)
    for _ in range(ascent_steps):
        cand = np.concatenate([best_u[:, None] + h * eye, best_u[:, None] - h * eye], axis=1)
        cand /= np.linalg.norm(cand, axis=0)
        rc, cc = ratio(cand)
        j = int(np.argmax(rc))
        if rc[j] > best:
            best_u, best, ok = cand[:, j], rc[j], bool(cc[j])
        else:
            h /= 2
    return float(best), best_u, ok and bool(conv.all())


def lyap_op_norm(ctx, gen, base, A, x, y, seed=0) -> float:
    """Sampled lower bound on ``||A||_{y <- x}`` between Lyapunov-normed fibers."""
    return _search(A, Fiber(ctx, gen, base, x), Fiber(ctx, gen, base, y), seed)[0]


@dataclass
class ContractionReport:
    forward_ratio: np.ndarray
    backward_ratio: np.ndarray
    converged: np.ndarray
    slack: float
    violations: int = 0
    max_excess: float = 0.0
    unconverged: int = 0
    unconverged_violations: int = 0

    def as_dict(self):
        d = asdict(self)
        for k in ("forward_ratio", "backward_ratio", "converged"):
            d[k] = np.asarray(d[k]).tolist()
        return d


def check_contraction(ctx, gen, base, x, steps: int, slack: Optional[float] = None) -> ContractionReport:
    """Check ``||A_z||_{fz<-z} <= e^{lam+eps}`` and ``||A_z^{-1}||_{f^{-1}z<-z} <= e^{-chi+eps}``
    at ``z = x, fx, ..., f^{steps-1} x``.

    Ratios are the sampled norms divided by their bounds; a violation is a
    ratio above ``1 + slack`` (default ``10 * tail_tol``). Only points where
    every series involved converged count as violations; the others cannot
    be told apart from truncation error and are tallied separately.
    """
    slack = 10 * ctx.tail_tol if slack is None else slack
    if steps <= 0:
        return ContractionReport(np.empty(0), np.empty(0), np.empty(0, dtype=bool), slack)
    fibers = {j: Fiber(ctx, gen, base, base.step(x, j)) for j in range(-1, steps + 1)}
    fwd, bwd, conv = np.empty(steps), np.empty(steps), np.empty(steps, dtype=bool)
    mats = gen.matrices(base, x, 0, steps)
    inv = gen.inverse_matrices(base, x, -1, steps - 1)
    for j in range(steps):
        rf, _, cf = _search(mats[j], fibers[j], fibers[j + 1], seed=j)
        rb, _, cb = _search(inv[j], fibers[j], fibers[j - 1], seed=j)
        fwd[j] = rf / np.exp(ctx.lam + ctx.eps)
        bwd[j] = rb / np.exp(-ctx.chi + ctx.eps)
        conv[j] = cf and cb
    excess = np.maximum(fwd, bwd) - 1.0
    bad = excess > slack
    worst = excess[conv].max() if conv.any() else 0.0
    return ContractionReport(fwd, bwd, conv, slack, int((bad & conv).sum()), float(max(worst, 0.0)),
                             int((~conv).sum()), int((bad & ~conv).sum()))


# --------------------------------------------------------------------------
# temperedness


def _max_weighted(gen, base, x, lo, hi, T, rates):
    """For starts ``n`` in ``[lo, hi]``: ``max_{0<=j<=T} (ln||A^j_{f^n x}|| - r j)`` for each
    forward rate ``r`` and ``max_j (ln||A^{-j}_{f^n x}|| + r' j)`` for backward rates."""
    starts = hi - lo + 1
    d = gen.dim
    fwd_rates, bwd_rates = rates
    fwd = gen.matrices(base, x, lo, hi + T)
    bwd = gen.inverse_matrices(base, x, lo - T, hi)
    out_f = np.zeros((len(fwd_rates), starts))
    out_b = np.zeros((len(bwd_rates), starts))
    P = np.broadcast_to(np.eye(d), (starts, d, d)).copy()
    Q = P.copy()
    lp, lq = np.zeros(starts), np.zeros(starts)
    for j in range(1, T + 1):
        P = fwd[j - 1:j - 1 + starts] @ P
        # A^{-j}_y = A(f^{-j} y)^{-1} A^{-(j-1)}_y; bwd index of f^{n-j} x is n - j - (lo - T)
        Q = bwd[T - j:T - j + starts] @ Q
        for M, l in ((P, lp), (Q, lq)):
            s = np.abs(M).max(axis=(1, 2))
            s[s == 0] = 1.0
            M /= s[:, None, None]
            l += np.log(s)
        a = lp + np.log(op_norms(P, gen.norm))
        b = lq + np.log(op_norms(Q, gen.norm))
        for k, r in enumerate(fwd_rates):
            np.maximum(out_f[k], a - r * j, out=out_f[k])
        for k, r in enumerate(bwd_rates):
            np.maximum(out_b[k], b + r * j, out=out_b[k])
    return out_f, out_b


def m_tilde_profile(ctx, gen, base, x, lo, hi):
    """``ln M_eps``, ``ln M'_eps`` and ``M~_eps`` at ``f^n x`` for ``n = lo..hi``.

    ``M~_eps = (M_{eps/2} + M'_{eps/2}) / (1 - e^{-eps/2})`` dominates the
    Lyapunov norm: ``||u||_{x,eps} <= M~_eps(x) ||u||`` on the truncated range.
    """
    lam, chi, eps = ctx.lam, ctx.chi, ctx.eps
    f, b = _max_weighted(gen, base, x, lo, hi, ctx.truncation_N,
                         ((lam + eps, lam + eps / 2), (chi - eps, chi - eps / 2)))
    m_tilde = (np.exp(f[1]) + np.exp(b[1])) / (1 - np.exp(-eps / 2))
    return f[0], b[0], m_tilde


def _ls_slope(t, y):
    t = np.asarray(t, dtype=float)
    return float(np.polyfit(t, y, 1)[0]) if t.size > 1 else 0.0


@dataclass
class TemperednessReport:
    M_eps_values: np.ndarray
    M_eps_prime_values: np.ndarray
    M_tilde_values: np.ndarray
    K_rho_truncated: float
    forward_slope: float
    backward_slope: float
    forward_log_growth: float = 0.0
    backward_log_growth: float = 0.0
    times: np.ndarray = field(repr=False, default=None)

    def as_dict(self):
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, np.ndarray):
                d[k] = v.tolist()
        return d


def k_rho(ctx, m_tilde, center, N):
    """``sum_{|n|<=N} M~(f^{center+n} x) e^{-rho |n|}`` from a profile indexed from its start."""
    n = np.arange(-N, N + 1)
    return float((m_tilde[center + n] * np.exp(-ctx.rho * np.abs(n))).sum())


def temperedness_diagnostic(ctx, gen, base, x, N: int) -> TemperednessReport:
    """``M_eps``, ``M'_eps`` along ``f^n x`` for ``|n| <= N`` and the truncated ``K_rho(x)``.

    ``forward_slope`` is the least-squares slope of ``(1/n) ln M_eps(f^n x)``
    against ``n`` over ``N/2 <= n <= N``; ``backward_slope`` the same over
    ``-N <= n <= -N/2`` against ``|n|``. Both tend to 0 for tempered
    functions but are damped by the ``1/n``, so the undamped slopes of
    ``ln M~_eps`` are reported too as ``*_log_growth``.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    lm, lmp, mt = m_tilde_profile(ctx, gen, base, x, -N, N)
    times = np.arange(-N, N + 1)
    half = max(N // 2, 1)
    fw = slice(N + half, 2 * N + 1)
    bw = slice(0, N - half + 1)
    tf, tb = times[fw], -times[bw]
    return TemperednessReport(
        np.exp(lm), np.exp(lmp), mt,
        k_rho(ctx, mt, N, N),
        _ls_slope(tf, lm[fw] / tf),
        _ls_slope(tb, lm[bw] / tb),
        _ls_slope(tf, np.log(mt[fw])),
        _ls_slope(tb, np.log(mt[bw])),
        times,
    )


def k_rho_drift(ctx, gen, base, x, N: int, shifts) -> np.ndarray:
    """Ratios ``K_rho(f^s x) / K_rho(x)`` for each shift ``s``, all truncated at ``N``."""
    shifts = np.asarray(list(shifts), dtype=int)
    r = int(np.abs(shifts).max()) if shifts.size else 0
    _, _, mt = m_tilde_profile(ctx, gen, base, x, -N - r, N + r)
    k0 = k_rho(ctx, mt, N + r, N)
    return np.array([k_rho(ctx, mt, N + r + s, N) / k0 for s in shifts])


# --------------------------------------------------------------------------
# growth along shadowing orbits


@dataclass
class ShadowGrowthReport:
    c_forward: float
    c_inverse: float
    violations: int
    excess_forward: np.ndarray = field(repr=False)
    excess_inverse: np.ndarray = field(repr=False)

    def as_dict(self):
        d = asdict(self)
        d["excess_forward"] = self.excess_forward.tolist()
        d["excess_inverse"] = self.excess_inverse.tolist()
        return d


def _fit_c(excess, scale):
    worst = float(np.max(excess)) if excess.size else 0.0
    if worst <= 0:
        return 0.0
    return worst / scale if scale > 0 else np.inf


def shadow_growth_check(ctx, gen, base, x, p, m: int, ell: float, delta: float,
                        gamma: Optional[float] = None) -> ShadowGrowthReport:
    """Fit the constant ``c`` in

        ln||A^n_p||      <= ln ell + c ell delta^alpha + n (lam + eps)
        ln||(A^n_p)^-1|| <= ln ell + eps min(n, m-n) + c ell delta^alpha + n (-chi + eps)

    for ``n = 1..m``, after checking ``dist(f^i x, f^i p) <= delta e^{-gamma min(i, m-i)}``.
    """
    gamma = base.expansion_rate if gamma is None else gamma
    if isinstance(p, PeriodicOrbit):
        p = p.point
    prof = shadowing_profile(base, x, p, m)
    i = np.arange(m + 1)
    env = delta * np.exp(-gamma * np.minimum(i, m - i))
    if (prof > env * (1 + 1e-9) + 1e-15).any():
        raise ProfileViolated(f"profile exceeds delta envelope at i={int(np.argmax(prof - env))}")
    n = np.arange(1, m + 1)
    a = subadditive_sequence(gen, base, p, m, "a").values[1:]
    at = subadditive_sequence(gen, base, p, m, "a_tilde").values[1:]
    ex_f = a - np.log(ell) - n * (ctx.lam + ctx.eps)
    ex_i = at - np.log(ell) - ctx.eps * np.minimum(n, m - n) - n * (-ctx.chi + ctx.eps)
    scale = ell * delta ** gen.holder_alpha
    c_f, c_i = _fit_c(ex_f, scale), _fit_c(ex_i, scale)
    viol = 0
    for ex, c in ((ex_f, c_f), (ex_i, c_i)):
        bound = c * scale if np.isfinite(c) else 0.0
        viol += int((ex > bound + 1e-12).sum())
    return ShadowGrowthReport(c_f, c_i, viol, ex_f, ex_i)
