import numpy as np
import pytest

from cocyclelab.bases import ShiftSpace, TorusMap
from cocyclelab.errors import IncompatibleSampler
from cocyclelab.measures import Bernoulli, LebesgueTorus, Markov, default_sampler, sample_point, with_seed

from conftest import CAT


def test_bernoulli_degenerate(shift2):
    x = sample_point(Bernoulli((1.0, 0.0)), shift2)
    assert (x.symbols(-3000, 3000) == 0).all()


def test_lebesgue_reproducible(cat):
    a = sample_point(LebesgueTorus(42), cat, 3)
    b = sample_point(LebesgueTorus(42), cat, 3)
    c = sample_point(LebesgueTorus(43), cat, 3)
    assert a.num == b.num and a.num != c.num


def test_markov_uniform_frequency(shift2):
    m = Markov([[0.5, 0.5], [0.5, 0.5]], [0.5, 0.5], seed=1)
    s = sample_point(m, shift2).symbols(0, 100_000)
    assert abs(s.mean() - 0.5) < 3 * 0.5 / np.sqrt(s.size)


def test_markov_transition_frequencies():
    sft = ShiftSpace([[1, 1], [1, 0]])
    m = Markov.from_matrix([[0.3, 0.7], [1.0, 0.0]], seed=2)
    s = sample_point(m, sft).symbols(-50_000, 50_000)
    sft.check_window(sample_point(m, sft), -50_000, 50_000)
    pi = np.asarray(m.stationary)
    assert abs(s.mean() - pi[1]) < 0.01
    after0 = s[1:][s[:-1] == 0]
    assert abs(after0.mean() - 0.7) < 0.01


def test_sampler_validation(shift2, cat):
    with pytest.raises(ValueError):
        Bernoulli((0.5, 0.6))
    with pytest.raises(ValueError):
        Markov([[0.5, 0.5], [0.5, 0.5]], [0.9, 0.1])
    with pytest.raises(ValueError):
        Markov([[1.0, 0.0], [0.0, 1.0]], [0.5, 0.5])  # reducible
    with pytest.raises(IncompatibleSampler):
        sample_point(LebesgueTorus(), shift2)
    with pytest.raises(IncompatibleSampler):
        sample_point(Bernoulli((0.5, 0.5)), cat)
    with pytest.raises(IncompatibleSampler):
        sample_point(Bernoulli((0.5, 0.5)), ShiftSpace([[1, 1], [1, 0]]))
    with pytest.raises(IncompatibleSampler):
        sample_point(Markov([[0.5, 0.5], [0.5, 0.5]], [0.5, 0.5]), ShiftSpace([[1, 1], [1, 0]]))


def test_order_independence(shift2):
    s = Bernoulli((0.3, 0.7), seed=9)
    a = sample_point(s, shift2, 4)
    b = sample_point(s, shift2, 4)
    tail = a.symbols(5000, 5100)
    head = a.symbols(-2000, 10)
    np.testing.assert_array_equal(b.symbols(-2000, 10), head)
    np.testing.assert_array_equal(b.symbols(5000, 5100), tail)


def test_default_and_with_seed(shift2, cat):
    assert isinstance(default_sampler(cat), LebesgueTorus)
    assert default_sampler(shift2).probabilities == (0.5, 0.5)
    m = default_sampler(ShiftSpace([[1, 1], [1, 0]]))
    assert isinstance(m, Markov)
    assert with_seed(m, 5).seed == 5 and with_seed(m, 5).matrix == m.matrix
