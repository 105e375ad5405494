import math

import pytest
from hypothesis import given, settings, strategies as st

from shallowcode.ackermann import MAX_INPUT_BITS, ackermann, alpha, ceil_log2, lam, star
from shallowcode.errors import BadDepth, BeyondCap, DomainError


def test_lambda_examples():
    assert lam(1, 16) == 4
    assert lam(2, 8) == 3
    # 65 -> 7 -> 3 -> 2 -> 1 under ceil(log2)
    assert lam(4, 65) == 4


def test_lambda_bad_depth():
    with pytest.raises(BadDepth):
        lam(0, 5)


def test_star_at_one():
    assert star(lambda v: v // 2, 1) == 0
    assert lam(3, 1) == 0


def test_alpha_examples():
    assert alpha(64) == 2
    assert alpha(65) == 4


def test_alpha_small_range():
    for n in range(2, 65):
        assert alpha(n) == 2


def test_alpha_even_and_monotone():
    prev = 2
    for n in list(range(1, 3000)) + [2**100, 2**65536]:
        a = alpha(n)
        assert a % 2 == 0 and a >= 2
        assert a >= prev
        prev = a


def test_ackermann_examples():
    assert ackermann(0, 5, 10**6) == 10
    assert ackermann(1, 4, 10**6) == 16
    assert ackermann(2, 4, 10**6) == 65536


@pytest.mark.parametrize("i", range(8))
def test_ackermann_at_two(i):
    assert ackermann(i, 2, 100) == 4


def test_ackermann_cap():
    with pytest.raises(BeyondCap):
        ackermann(2, 5, 10**6)
    with pytest.raises(BeyondCap):
        ackermann(3, 4, 10**6)


def test_tower_schedule():
    tower = ackermann(2, 5, 1 << 70000)
    assert tower == 2**65536
    assert lam(6, tower) <= 6
    assert alpha(tower) <= 6


def test_input_cap():
    with pytest.raises(DomainError):
        lam(2, 1 << MAX_INPUT_BITS)


def test_ceil_log2():
    for n in range(1, 2000):
        assert ceil_log2(n) == math.ceil(math.log2(n))


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 10**6), st.integers(1, 8))
def test_lambda_monotone_in_n(n, d):
    assert lam(d, n) <= lam(d, n + 1)


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 10**6), st.integers(1, 6))
def test_lambda_decreasing_in_d(n, d):
    assert lam(d + 2, n) <= lam(d, n)


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 10**9))
def test_star_shift(n):
    f = ceil_log2
    if f(n) >= 2:
        assert star(f, f(n)) == star(f, n) - 1
