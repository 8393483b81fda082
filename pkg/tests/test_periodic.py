import math

import numpy as np
import pytest

from cocyclelab.bases import PeriodicOrbit, ShiftSpace, TorusMap
from cocyclelab.cocycles import ConstantCocycle, LocallyConstantCocycle
from cocyclelab.errors import BudgetExceeded
from cocyclelab.exponents import ExponentEstimate
from cocyclelab.measures import Bernoulli
from cocyclelab.periodic import (allowed_words, corollary_norm_rates, count_periodic, enumerate_periodic,
                                 score_periodic, verify_main_theorem)

from conftest import B0, B1, CAT, GOLDEN_A, GOLDEN_B, PHI
from oracles import all_products, cyclic_classes

GOLDEN_MEAN = [[1, 1], [1, 0]]


def labels(base, k):
    return [o.label() for o in enumerate_periodic(base, k)]


def test_full_shift_small(shift2):
    assert labels(shift2, 1) == ["0", "1"]
    assert labels(shift2, 3) == ["000", "001", "011", "111"]


@pytest.mark.parametrize("T", [np.ones((2, 2), int), GOLDEN_MEAN, np.ones((3, 3), int),
                               [[0, 1, 1], [1, 0, 1], [1, 1, 1]]])
def test_necklaces_match_bruteforce(T):
    base = ShiftSpace(T)
    a = base.alphabet_size
    for k in range(1, 8):
        got = [tuple(o.point.symbols(0, k)) for o in enumerate_periodic(base, k)]
        assert got == cyclic_classes(a, k, np.asarray(T))


def test_enumeration_completeness(shift2):
    for k in range(1, 13):
        assert count_periodic(shift2, k) == 2 ** k


def test_sft_counts_match_trace():
    base = ShiftSpace(GOLDEN_MEAN)
    T = np.array(GOLDEN_MEAN)
    for k in range(1, 13):
        assert count_periodic(base, k) == np.trace(np.linalg.matrix_power(T, k))


def test_allowed_words():
    words = list(allowed_words(ShiftSpace(GOLDEN_MEAN), 3))
    assert words == [(0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 0, 1)]


def test_budget(shift2):
    with pytest.raises(BudgetExceeded):
        list(enumerate_periodic(shift2, 10, budget=100))
    with pytest.raises(ValueError):
        list(enumerate_periodic(shift2, 0))


def test_cat_fixed_point(cat):
    orbits = list(enumerate_periodic(cat, 1))
    assert len(orbits) == 1
    assert orbits[0].point.num == (0, 0)


@pytest.mark.parametrize("M", [CAT, [[1, 1], [1, 2]], [[2, 1, 0], [1, 1, 1], [0, 1, 1]]])
def test_torus_counts_and_exact_periodicity(M):
    base = TorusMap(M)
    for k in range(1, 6):
        B = np.linalg.matrix_power(np.array(M, dtype=np.int64), k) - np.eye(len(M), dtype=np.int64)
        expected = abs(round(np.linalg.det(B.astype(float))))
        orbits = list(enumerate_periodic(base, k))
        assert len(orbits) == expected
        assert len({o.point.num for o in orbits}) == expected
        for o in orbits[:50]:
            q = base.step(o.point, k)
            assert (q.num, q.q) == (o.point.num, o.point.q)


def test_score_examples(shift2, diag_pair):
    c = ConstantCocycle(3 * np.eye(2))
    for o in enumerate_periodic(shift2, 4):
        s = score_periodic(c, shift2, o)
        for v in (s.upper_rate, s.lower_rate, s.upper_exponent, s.lower_exponent):
            assert v == pytest.approx(math.log(3), abs=1e-12)
        assert s.ln_Q == pytest.approx(0, abs=1e-12)
    p01 = next(o for o in enumerate_periodic(shift2, 2) if o.label() == "01")
    s = score_periodic(diag_pair, shift2, p01)
    assert s.upper_rate == pytest.approx(0, abs=1e-12) and s.upper_exponent == pytest.approx(0, abs=1e-12)
    s0 = score_periodic(diag_pair, shift2, next(enumerate_periodic(shift2, 1)))
    assert s0.upper_rate == pytest.approx(math.log(2), abs=1e-12)


def _random_gen(seed, a=2, d=3):
    rng = np.random.default_rng(seed)
    return LocallyConstantCocycle.from_list([rng.standard_normal((d, d)) + np.eye(d) for _ in range(a)])


def test_score_invariants_and_oracle(shift2):
    g = _random_gen(0)
    for k in range(1, 7):
        for o in enumerate_periodic(shift2, k):
            s = score_periodic(g, shift2, o)
            assert s.upper_exponent <= s.upper_rate + 1e-9
            assert s.lower_exponent >= s.lower_rate - 1e-9
            P = np.eye(3)
            for sym in o.point.symbols(0, k):
                P = g.table[(int(sym),)] @ P
            assert s.upper_rate == pytest.approx(math.log(np.linalg.norm(P, 2)) / k, abs=1e-9)
            assert s.upper_exponent == pytest.approx(math.log(max(abs(np.linalg.eigvals(P)))) / k, abs=1e-9)
            assert s.ln_Q == pytest.approx(math.log(np.linalg.cond(P)), abs=1e-7)


def test_repetition_invariance(shift2):
    g = _random_gen(1)
    for k in range(1, 6):
        for o in enumerate_periodic(shift2, k):
            s1 = score_periodic(g, shift2, o)
            s2 = score_periodic(g, shift2, PeriodicOrbit(o.point, 2 * k))
            assert s2.upper_exponent == pytest.approx(s1.upper_exponent, abs=1e-9)
            assert s2.lower_exponent == pytest.approx(s1.lower_exponent, abs=1e-9)
            assert s2.upper_rate <= s1.upper_rate + 1e-12


def _fixed(lam, chi, se=0.0):
    return ExponentEstimate(lam, 1, 1, se), ExponentEstimate(chi, 1, 1, se)


def test_theorem_constant(shift2):
    c = ConstantCocycle(2 * np.eye(2))
    for N_min in (0, 3):
        rep = verify_main_theorem(c, shift2, Bernoulli((0.5, 0.5)), 0.05, 6, N_min, n=100, replicas=1)
        assert rep.residual == pytest.approx(0, abs=1e-12)
        assert rep.winner.k == N_min + 1 and rep.success
        assert rep.one_sided_upper and rep.one_sided_lower


def test_theorem_diag_pair(shift2, diag_pair):
    rep = verify_main_theorem(diag_pair, shift2, eps_target=0.05, k_max=8, estimates=_fixed(0.0, 0.0))
    assert rep.winner.label == "01" and rep.residual == pytest.approx(0, abs=1e-12)
    assert len(rep.scores) == sum(1 for k in range(1, 9) for _ in enumerate_periodic(shift2, k))


def test_theorem_honest_failure(shift2, diag_pair):
    rep = verify_main_theorem(diag_pair, shift2, eps_target=1e-3, k_max=6, estimates=_fixed(0.3, -0.3))
    assert not rep.success
    assert len(rep.scores) > 0 and rep.as_dict()["orbits_scored"] == len(rep.scores)


def test_theorem_one_sided_when_successful(shift2):
    g = _random_gen(2, d=2)
    rep = verify_main_theorem(g, shift2, Bernoulli((0.5, 0.5), 3), 0.1, 10, n=2000, replicas=8)
    if rep.success:
        assert rep.one_sided_upper and rep.one_sided_lower


def test_theorem_validation(shift2, diag_pair):
    with pytest.raises(ValueError):
        verify_main_theorem(diag_pair, shift2, eps_target=0.0, estimates=_fixed(0, 0))
    with pytest.raises(ValueError):
        verify_main_theorem(diag_pair, shift2, mode="bogus", estimates=_fixed(0, 0))


def test_theorem_cat_map(cat):
    c = ConstantCocycle(np.array(CAT, dtype=float))
    rep = verify_main_theorem(c, cat, eps_target=0.01, k_max=5, n=500, replicas=2)
    assert rep.winner.k == 1 and rep.success
    for s in rep.scores:
        assert s.upper_exponent == pytest.approx(2 * math.log(PHI), abs=1e-9)


def test_constructive(shift2, diag_pair):
    opts = {"delta": 0.05, "horizon": 400}
    c = ConstantCocycle(2 * np.eye(2))
    rep = verify_main_theorem(c, shift2, Bernoulli((0.5, 0.5), 1), 0.1, 2000, mode="constructive",
                              estimates=_fixed(math.log(2), math.log(2)), constructive=opts)
    assert rep.success and rep.details["stalled_at"] is None
    rep = verify_main_theorem(diag_pair, shift2, Bernoulli((0.5, 0.5), 1), 0.1, 2000, mode="constructive",
                              estimates=_fixed(0.0, 0.0), constructive=opts)
    d = rep.details
    assert d["eps_prime"] == pytest.approx(0.4)
    if d["stalled_at"] is None:
        assert d["n"] * (1 + d["eps_prime"]) < d["k"] < d["n"] * (1 + 2 * d["eps_prime"])
        assert rep.winner.k == d["k"]
    rep = verify_main_theorem(diag_pair, shift2, Bernoulli((0.5, 0.5), 1), 0.1, 5, mode="constructive",
                              estimates=_fixed(0.0, 0.0), constructive=opts)
    assert rep.winner is None and not rep.success and rep.details["stalled_at"] is not None


def test_corollary_constant(shift2):
    r = corollary_norm_rates(ConstantCocycle(2 * np.eye(2)), shift2, 6, 6)
    np.testing.assert_allclose(r.s_n, math.log(2), atol=1e-12)
    np.testing.assert_allclose(r.t_k, math.log(2), atol=1e-12)
    assert r.gap == pytest.approx(0, abs=1e-12)


def test_corollary_unipotent(shift2):
    u = LocallyConstantCocycle.from_list([GOLDEN_A, GOLDEN_A])
    r = corollary_norm_rates(u, shift2, 14, 10)
    expected = [math.log(np.linalg.norm(np.linalg.matrix_power(GOLDEN_A, n), 2)) / n for n in range(1, 15)]
    np.testing.assert_allclose(r.s_n, expected, atol=1e-12)
    # one matrix: every word of length k gives the same product
    np.testing.assert_allclose(r.t_k, r.s_n[:10], atol=1e-12)
    assert np.all(np.diff(r.s_n) < 0) and r.s_n[-1] < 0.3


def test_corollary_golden(shift2, golden_gen):
    r = corollary_norm_rates(golden_gen, shift2, 12, 10)
    assert r.exact
    assert (r.s_n >= math.log(PHI) - 1e-9).all()
    assert abs(r.s_n[-1] - math.log(PHI)) < 0.1
    assert abs(r.t_k.max() - math.log(PHI)) < 0.1


def test_corollary_matches_bruteforce(shift2):
    g = _random_gen(4, a=2, d=2)
    ops = [g.table[(0,)], g.table[(1,)]]
    r = corollary_norm_rates(g, shift2, 8, 4)
    for n in range(1, 9):
        best = max(math.log(np.linalg.norm(P, 2)) for _, P in all_products(ops, n)) / n
        qbest = max(math.log(np.linalg.cond(P)) for _, P in all_products(ops, n)) / n
        assert r.s_n[n - 1] == pytest.approx(best, abs=1e-9)
        assert r.q_n[n - 1] == pytest.approx(qbest, abs=1e-7)


def test_corollary_torus_sampled(cat):
    from cocyclelab.cocycles import TorusSmoothCocycle
    g = TorusSmoothCocycle(np.array(CAT, dtype=float), 0.1, [1, 0])
    r = corollary_norm_rates(g, cat, 4, 3, samples=200)
    assert not r.exact and np.isfinite(r.s_n).all()
