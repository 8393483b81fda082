import math

import numpy as np
import pytest

from cocyclelab.cocycles import LocallyConstantCocycle
from cocyclelab.errors import BudgetExceeded
from cocyclelab.periodic import corollary_norm_rates
from cocyclelab.spectral import RadiusBounds, berger_wang_gap, branch_and_bound, exhaustive_bounds

from conftest import B0, B1, GOLDEN_A, GOLDEN_B, PHI
from oracles import jsr_bounds_bruteforce


def random_pair(rng, d=2):
    while True:
        ops = [rng.uniform(-1, 1, (d, d)) for _ in range(2)]
        if min(abs(np.linalg.det(a)) for a in ops) > 1e-3:
            return ops


def test_scalar():
    b = exhaustive_bounds([3 * np.eye(2)], 5)
    assert b.lower == pytest.approx(3) and b.upper == pytest.approx(3)
    bb = branch_and_bound([3 * np.eye(2)], 1e-3)
    assert bb.depth_reached == 1 and bb.gap == pytest.approx(0, abs=1e-12)
    np.testing.assert_allclose(berger_wang_gap([3 * np.eye(2)], [1, 4])[:, 1], 0, atol=1e-12)


def test_diag_pair():
    b = exhaustive_bounds([B0, B1], 4)
    assert b.lower == pytest.approx(2) and b.upper == pytest.approx(2)
    assert b.witness_word == "0"


def test_golden_exhaustive():
    b = exhaustive_bounds([GOLDEN_A, GOLDEN_B], 8)
    assert b.lower >= PHI - 1e-9
    assert b.witness_word == "01"
    ab = GOLDEN_A @ GOLDEN_B
    assert max(abs(np.linalg.eigvals(ab))) == pytest.approx(PHI ** 2)


def test_golden_branch_and_bound():
    b = branch_and_bound([GOLDEN_A, GOLDEN_B], 1e-3, 30)
    assert PHI - 1e-3 <= b.lower <= PHI + 1e-9
    assert b.upper <= PHI + 1e-3
    assert "01" in b.witness_word and b.depth_reached <= 30


def test_matches_bruteforce():
    rng = np.random.default_rng(0)
    for _ in range(5):
        ops = random_pair(rng)
        b = exhaustive_bounds(ops, 6)
        lo, up = jsr_bounds_bruteforce(ops, 6)
        assert b.lower == pytest.approx(lo, rel=1e-10)
        assert b.upper == pytest.approx(up, rel=1e-10)


def test_scaling_equivariance():
    rng = np.random.default_rng(1)
    ops = random_pair(rng)
    for c in (0.3, 2.0, 7.5):
        b1, b2 = exhaustive_bounds(ops, 6), exhaustive_bounds([c * a for a in ops], 6)
        assert b2.lower == pytest.approx(c * b1.lower, abs=1e-10 * c)
        assert b2.upper == pytest.approx(c * b1.upper, abs=1e-10 * c)


def test_monotone_in_depth():
    rng = np.random.default_rng(2)
    for _ in range(5):
        ops = random_pair(rng)
        bs = [exhaustive_bounds(ops, d) for d in range(1, 9)]
        for a, b in zip(bs, bs[1:]):
            assert b.lower >= a.lower and b.upper <= a.upper


def test_branch_and_bound_brackets_exhaustive():
    rng = np.random.default_rng(3)
    for _ in range(10):
        ops = random_pair(rng)
        bb = branch_and_bound(ops, 0.05, 12)
        ex = exhaustive_bounds(ops, bb.depth_reached)
        assert bb.lower - 1e-12 <= ex.lower <= bb.upper + 1e-12
        assert bb.lower <= ex.upper + 1e-12


def test_budget_and_validation():
    with pytest.raises(BudgetExceeded):
        exhaustive_bounds([B0, B1], 30)
    with pytest.raises(ValueError):
        branch_and_bound([B0, B1], 0.0)
    with pytest.raises(ValueError):
        exhaustive_bounds([], 3)
    with pytest.raises(ValueError):
        RadiusBounds(2.0, 1.0, 1, "0")


def test_berger_wang_golden():
    g = berger_wang_gap([GOLDEN_A, GOLDEN_B], [2, 16])
    # the period-2 word already attains the norm bound in this norm
    assert g[1, 1] <= g[0, 1]
    assert g[1, 1] == pytest.approx(0, abs=1e-9)


def test_berger_wang_random():
    rng = np.random.default_rng(4)
    shrunk = 0
    for _ in range(20):
        g = berger_wang_gap(random_pair(rng), [2, 12])
        shrunk += g[1, 1] < g[0, 1]
    assert shrunk >= 18


def test_cross_module_identity(shift2):
    rng = np.random.default_rng(5)
    ops = random_pair(rng)
    gen = LocallyConstantCocycle.from_list(ops)
    rates = corollary_norm_rates(gen, shift2, 8, 2)
    ex = exhaustive_bounds(ops, 8)
    np.testing.assert_allclose(np.exp(rates.s_n), ex.level_norm_rates, rtol=1e-9)


def test_as_dict():
    d = exhaustive_bounds([GOLDEN_A, GOLDEN_B], 4).as_dict()
    assert set(d) == {"lower", "upper", "depth", "witness"}
