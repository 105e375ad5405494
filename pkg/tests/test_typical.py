import math

import numpy as np
import pytest

from shallowcode.channel import bsc, noiseless, random_symmetric
from shallowcode.errors import LengthMismatch, TooLarge
from shallowcode.rng import Stream
from shallowcode.typical import (
    TypicalParams,
    all_vectors,
    count_typical,
    enumerate_typical,
    is_typical,
    mass_outside_typical,
)


def test_noiseless_examples():
    p = TypicalParams(noiseless(2), 4, 0.3)
    y = np.zeros(4, dtype=np.int64)
    assert is_typical(p, y, [0, 0, 0, 0])
    assert is_typical(p, y, [0, 0, 0, 1])
    ball = enumerate_typical(p, y)
    assert len(ball) == 5
    assert all(row.sum() <= 1 for row in ball)


def test_bsc_zero_word_atypical():
    p = TypicalParams(bsc(0.25), 16, 0.05)
    assert not is_typical(p, np.zeros(16, int), np.zeros(16, int))
    assert count_typical(p) == math.comb(16, 4) == 1820


def test_length_mismatch():
    with pytest.raises(LengthMismatch):
        is_typical(TypicalParams(bsc(0.1), 4, 0.1), [0, 0, 0], [0, 0, 0, 0])


def test_eps_one_everything():
    p = TypicalParams(random_symmetric(3, Stream(1)), 5, 1.0)
    assert count_typical(p) == 3**5
    assert len(enumerate_typical(p, np.zeros(5, int))) == 3**5


def test_enumeration_cap():
    with pytest.raises(TooLarge):
        enumerate_typical(TypicalParams(bsc(0.1), 23, 0.1), np.zeros(23, int))


def test_count_matches_enumeration():
    s = Stream(31)
    for i in range(50):
        q = 2 + i % 2
        n = 3 + s.integers(8)
        ch = random_symmetric(q, s, zeros=int(i % 3 == 0))
        p = TypicalParams(ch, n, 0.05 + 0.3 * s.random())
        y = s.integers(q, n)
        assert count_typical(p) == len(enumerate_typical(p, y))


def test_size_independent_of_y():
    ch = random_symmetric(3, Stream(4))
    p = TypicalParams(ch, 6, 0.2)
    sizes = {len(enumerate_typical(p, y)) for y in all_vectors(3, 6)[::37]}
    assert len(sizes) == 1


def test_monotone_in_eps():
    ch = random_symmetric(3, Stream(9))
    y = Stream(2).integers(3, 6)
    small = {tuple(r) for r in enumerate_typical(TypicalParams(ch, 6, 0.1), y)}
    big = {tuple(r) for r in enumerate_typical(TypicalParams(ch, 6, 0.3), y)}
    assert small <= big


def test_normalized_log_bracket():
    h = -(0.25 * math.log2(0.25) + 0.75 * math.log2(0.75))
    val = math.log2(count_typical(TypicalParams(bsc(0.25), 48, 0.02))) / 48
    assert h - 0.25 <= val <= h + 0.25


def test_mass_noiseless_zero():
    est = mass_outside_typical(TypicalParams(noiseless(3), 10, 0.1), 500, Stream(1))
    assert est.estimate == 0.0
    assert mass_outside_typical(TypicalParams(noiseless(2), 10, 0.1), exact=True).estimate == 0.0


def test_mass_decreases_mc():
    a = mass_outside_typical(TypicalParams(bsc(0.2), 100, 0.1), 20000, Stream(5))
    b = mass_outside_typical(TypicalParams(bsc(0.2), 400, 0.1), 20000, Stream(6))
    assert b.estimate + 3 * math.hypot(a.stderr, b.stderr) < a.estimate


def test_exact_matches_mc():
    p = TypicalParams(bsc(0.25), 12, 0.1)
    ex = mass_outside_typical(p, exact=True).estimate
    mc = mass_outside_typical(p, 20000, Stream(7))
    assert abs(ex - mc.estimate) <= 3 * max(mc.stderr, 1e-12)


def test_chernoff_comparator():
    p = TypicalParams(bsc(0.2), 200, 0.1)
    # 2q * exp(-eps^2 * 0.2 * n / 2) with the smaller posterior 0.2
    assert mass_outside_typical(p, 10, Stream(1)).chernoff == pytest.approx(4 * math.exp(-0.01 * 0.2 * 100))
