import math

import numpy as np
import pytest

from cocyclelab.bases import ShiftSpace, SymbolicWindow, TorusMap, TorusPoint, distance, step
from cocyclelab.cocycles import (ConstantCocycle, InverseCocycle, LocallyConstantCocycle, TimeReversed,
                                 TorusSmoothCocycle, distortion, evaluate, evaluate_inverse, generator_at,
                                 group_distance, holder_ratios, log_inverse_norm, log_norm)
from cocyclelab.errors import MissingWord, SingularOperator
from cocyclelab.linalg import op_norm
from cocyclelab.measures import Bernoulli, LebesgueTorus, sample_point

from conftest import B0, B1, CAT

GOLDEN_RATE = math.log((3 + math.sqrt(5)) / 2)


def test_generator_examples(shift2, cat):
    c = ConstantCocycle(2 * np.eye(2))
    np.testing.assert_array_equal(generator_at(c, shift2, SymbolicWindow.periodic("0")), 2 * np.eye(2))
    g = LocallyConstantCocycle.from_list([B0, B1])
    np.testing.assert_array_equal(generator_at(g, shift2, SymbolicWindow.periodic("10")), B1)
    t = TorusSmoothCocycle(np.array(CAT, float), 0.0, [1, 0])
    np.testing.assert_allclose(generator_at(t, cat, TorusPoint([0.3, 0.7])), CAT)


def test_evaluate_examples(shift2, diag_pair):
    c = ConstantCocycle(np.diag([2, 0.5]))
    x = SymbolicWindow.periodic("0")
    np.testing.assert_array_equal(evaluate(c, shift2, x, 0).dense(), np.eye(2))
    np.testing.assert_allclose(evaluate(c, shift2, x, 5).dense(), np.diag([32, 1 / 32]))
    a, b = np.array([[1.0, 2], [0, 1]]), np.array([[1.0, 0], [3, 1]])
    g = LocallyConstantCocycle.from_list([a, b])
    w = SymbolicWindow.periodic("011")
    np.testing.assert_allclose(evaluate(g, shift2, w, 3).dense(), b @ b @ a)


def test_negative_evaluate(shift2):
    rng = np.random.default_rng(0)
    ops = [rng.standard_normal((2, 2)) + 2 * np.eye(2) for _ in range(2)]
    g = LocallyConstantCocycle.from_list(ops)
    x = sample_point(Bernoulli((0.5, 0.5), 1), shift2)
    for n in (1, 4, 9):
        fwd = evaluate(g, shift2, step(shift2, x, -n), n).dense()
        np.testing.assert_allclose(evaluate(g, shift2, x, -n).dense(), np.linalg.inv(fwd), rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(evaluate_inverse(g, shift2, x, n).dense(),
                                   np.linalg.inv(evaluate(g, shift2, x, n).dense()), rtol=1e-9, atol=1e-12)


def test_log_norm_examples(shift2, cat):
    c = ConstantCocycle(2 * np.eye(2))
    x = SymbolicWindow.periodic("0")
    assert log_norm(c, shift2, x, 10) == pytest.approx(10 * math.log(2))
    assert log_norm(c, shift2, x, 0) == 0.0
    m = ConstantCocycle(np.array(CAT, float))
    assert abs(log_norm(m, cat, TorusPoint([0.1, 0.2]), 100) / 100 - GOLDEN_RATE) < 0.01
    big = log_norm(ConstantCocycle(np.diag([3.0, 1.0])), shift2, x, 1_000_000)
    assert big == pytest.approx(1_000_000 * math.log(3), rel=1e-12)


def test_distortion_examples(shift2):
    x = SymbolicWindow.periodic("0")
    assert distortion(ConstantCocycle(2 * np.eye(2)), shift2, x, 7) == pytest.approx(0.0, abs=1e-12)
    assert distortion(ConstantCocycle(np.diag([2, 0.5])), shift2, x, 5) == pytest.approx(10 * math.log(2))


def test_distortion_negative_time(shift2, cat):
    rng = np.random.default_rng(3)
    ops = [rng.standard_normal((3, 3)) + 2 * np.eye(3) for _ in range(2)]
    g = LocallyConstantCocycle.from_list(ops)
    t = TorusSmoothCocycle(np.array(CAT, float), 0.3, [1, 1])
    for r in range(20):
        x = sample_point(Bernoulli((0.5, 0.5), 2), shift2, r)
        n = 1 + r % 7
        assert distortion(g, shift2, x, -n) == pytest.approx(distortion(g, shift2, step(shift2, x, -n), n), rel=1e-9)
        y = sample_point(LebesgueTorus(2), cat, r)
        assert distortion(t, cat, y, -n) == pytest.approx(distortion(t, cat, step(cat, y, -n), n), rel=1e-9)


def test_validation(shift2):
    with pytest.raises(SingularOperator):
        ConstantCocycle([[1, 1], [1, 1]])
    with pytest.raises(ValueError):
        LocallyConstantCocycle({"0": B0, "01": B1})
    with pytest.raises(ValueError):
        ConstantCocycle(np.eye(2), holder_alpha=1.5)
    with pytest.raises(ValueError):
        ConstantCocycle(2 * np.eye(2), lambda_prime=0.1)
    g = LocallyConstantCocycle({"0": B0}, alphabet_size=2)
    with pytest.raises(MissingWord):
        g.check_coverage(shift2)
    with pytest.raises(MissingWord):
        evaluate(g, shift2, SymbolicWindow.periodic("01"), 2)


def test_memory_one_table():
    sft = ShiftSpace([[1, 1], [1, 0]])
    table = {w: (i + 2) * np.eye(2) for i, w in enumerate(["000", "001", "010", "100", "101"])}
    g = LocallyConstantCocycle(table, memory=1)
    g.check_coverage(sft)
    x = SymbolicWindow.periodic("001")
    # A(f^i x) looks at x_{i-1} x_i x_{i+1}: words 100, 001, 010
    np.testing.assert_allclose(g.matrices(sft, x, 0, 3)[:, 0, 0], [5, 3, 4])


def test_uniform_bounds_runtime(cat):
    t = TorusSmoothCocycle(np.array(CAT, float), 0.4, [1, 2])
    for r in range(20):
        x = sample_point(LebesgueTorus(1), cat, r)
        mats = t.matrices(cat, x, -10, 10)
        inv = t.inverse_matrices(cat, x, -10, 10)
        assert max(math.log(op_norm(m)) for m in mats) <= t.lambda_prime + 1e-12
        assert max(math.log(op_norm(m)) for m in inv) <= -t.chi_prime + 1e-12
        np.testing.assert_allclose(mats @ inv, np.broadcast_to(np.eye(2), mats.shape), atol=1e-10)


def test_holder(shift2, cat):
    g = LocallyConstantCocycle({"000": B0, "001": B1, "010": B0, "011": B1,
                                "100": B1, "101": B0, "110": B1, "111": B0}, memory=1)
    sampler = Bernoulli((0.5, 0.5), 5)
    pairs = []
    for r in range(100):
        x = sample_point(sampler, shift2, 2 * r)
        y = sample_point(sampler, shift2, 2 * r + 1)
        pairs.append((x, y))
    assert (holder_ratios(g, shift2, pairs) <= g.holder_M * (1 + 1e-12)).all()
    t = TorusSmoothCocycle(np.array(CAT, float), 0.3, [1, 1])
    rng = np.random.default_rng(0)
    tp = []
    for _ in range(200):
        c = rng.random(2)
        tp.append((TorusPoint(c), TorusPoint(c + rng.uniform(-1e-3, 1e-3, 2))))
    assert (holder_ratios(t, cat, tp) <= t.holder_M * (1 + 1e-12)).all()


def test_group_distance():
    assert group_distance(np.eye(2), np.eye(2)) == 0
    assert group_distance(B0, B1) == pytest.approx(2 * 1.5)


def test_inverse_cocycle_over_reversed(shift2, diag_pair):
    inv = InverseCocycle(diag_pair)
    rev = TimeReversed(shift2)
    x = sample_point(Bernoulli((0.5, 0.5), 3), shift2)
    for n in (1, 5, 12):
        np.testing.assert_allclose(evaluate(inv, rev, x, n).dense(), evaluate(diag_pair, shift2, x, -n).dense())


def test_scaled(shift2, diag_pair):
    x = sample_point(Bernoulli((0.5, 0.5), 3), shift2)
    s = diag_pair.scaled(3.0)
    assert log_norm(s, shift2, x, 20) == pytest.approx(log_norm(diag_pair, shift2, x, 20) + 20 * math.log(3))
    assert log_inverse_norm(s, shift2, x, 20) == pytest.approx(log_inverse_norm(diag_pair, shift2, x, 20) - 20 * math.log(3))
