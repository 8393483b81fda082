"""Independent reference computations used by the tests.

Everything here is deliberately naive: plain loops, no shared code paths
with the package beyond generator lookups.
"""
import itertools
import math

import numpy as np


def _lnorm(P, kind):
    if kind == "l2" and P.shape == (2, 2):
        # closed form: largest singular value of a 2x2 matrix
        fro = (P * P).sum()
        det = P[0, 0] * P[1, 1] - P[0, 1] * P[1, 0]
        return math.sqrt((fro + math.sqrt(max(fro * fro - 4 * det * det, 0.0))) / 2)
    if kind == "l2":
        return np.linalg.norm(P, 2)
    if kind == "l1":
        return np.abs(P).sum(axis=0).max()
    return np.abs(P).sum(axis=1).max()


def suffix_table(gen, base, x, N, kind="a"):
    """``T[i, j] = s_j(g^i x)`` for ``i + j <= N`` built start by start."""
    T = np.full((N + 1, N + 1), np.nan)
    if kind == "a":
        fac = gen.matrices(base, x, 0, N)                       # A(f^t x)
        right = False
    elif kind == "a_tilde":
        fac = gen.inverse_matrices(base, x, 0, N)
        right = True
    elif kind == "b":
        fac = gen.matrices(base, x, -N, 0)[::-1]                # A(f^{-t-1} x)
        right = True
    else:
        fac = gen.inverse_matrices(base, x, -N, 0)[::-1]
        right = False
    for i in range(N + 1):
        P = np.eye(gen.dim)
        logscale = 0.0
        T[i, 0] = 0.0
        for j in range(1, N - i + 1):
            m = fac[i + j - 1]
            P = P @ m if right else m @ P
            s = np.abs(P).max()
            P = P / s
            logscale += math.log(s)
            T[i, j] = logscale + math.log(_lnorm(P, gen.norm))
    return T


def km_bruteforce(T, lam, eps, L):
    N = T.shape[0] - 1
    good = []
    for n in range(L, N + 1):
        if all(T[0, n] - T[i, n - i] >= (lam - eps) * i for i in range(L, n + 1)):
            good.append(n)
    return np.array(good, dtype=int)


def gk_bruteforce(T, lam, eps, N):
    count = 0
    for n in range(N):
        if all(T[0, n] - T[i, n - i] >= (lam - eps[i - 1]) * i for i in range(1, n + 1)):
            count += 1
    return count / N


def all_products(ops, length):
    """``(word, product)`` for every word, leftmost symbol = leftmost factor."""
    for w in itertools.product(range(len(ops)), repeat=length):
        P = np.eye(ops[0].shape[0])
        for s in w:
            P = P @ ops[s]
        yield "".join(map(str, w)), P


def jsr_bounds_bruteforce(ops, depth):
    lower, upper = 0.0, math.inf
    for l in range(1, depth + 1):
        nr, rr = 0.0, 0.0
        for _, P in all_products(ops, l):
            nr = max(nr, np.linalg.norm(P, 2) ** (1 / l))
            rr = max(rr, np.max(np.abs(np.linalg.eigvals(P))) ** (1 / l))
        lower, upper = max(lower, rr), min(upper, nr)
    return lower, upper


def cyclic_classes(alphabet, k, allowed=None):
    """Canonical words by brute force: minimal rotation of every cyclically allowed word."""
    out = set()
    for w in itertools.product(range(alphabet), repeat=k):
        if allowed is not None and not all(allowed[w[i]][w[(i + 1) % k]] for i in range(k)):
            continue
        out.add(min(w[r:] + w[:r] for r in range(k)))
    return sorted(out)
