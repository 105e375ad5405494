"""Slowly growing functions: lambda_d, the star operator, alpha(n) and A(i, j).

All arithmetic is exact on python integers.
"""

from __future__ import annotations

from math import isqrt
from typing import Callable

from .errors import BadDepth, BeyondCap, DomainError

MAX_INPUT_BITS = 10**6


def ceil_log2(n: int) -> int:
    if n < 1:
        raise DomainError("log of a nonpositive integer")
    return (n - 1).bit_length()


def star(f: Callable[[int], int], n: int, limit: int | None = None) -> int:
    """min{i : f^(i)(n) <= 1}; stops counting at ``limit + 1`` when given."""
    i = 0
    while n > 1:
        if limit is not None and i > limit:
            return i
        n = f(n)
        i += 1
    return i


def _check(n: int) -> None:
    if n < 1:
        raise DomainError("n must be a positive integer")
    if n.bit_length() > MAX_INPUT_BITS:
        raise DomainError("input exceeds the 10**6-bit cap")


def lam(d: int, n: int, limit: int | None = None) -> int:
    """lambda_d(n); with ``limit`` the result is exact when <= limit, else > limit."""
    if d < 1:
        raise BadDepth(f"depth {d} < 1")
    _check(n)
    if d == 1:
        return isqrt(n)
    if d == 2:
        return ceil_log2(n)
    # inner calls are never truncated; only the iteration count of this level is
    return star(lambda v: lam(d - 2, v), n, limit)


# ``lambda`` is a keyword, hence the short name
lambda_ = lam


def alpha(n: int) -> int:
    """Smallest even d with lambda_d(n) <= 6."""
    _check(n)
    d = 2
    while lam(d, n, limit=6) > 6:
        d += 2
    return d


def ackermann(i: int, j: int, cap: int) -> int:
    """A(i, j) with A(0, j) = 2j, A(i, 1) = 2, A(i, j) = A(i-1, A(i, j-1)).

    Raises BeyondCap as soon as any intermediate value exceeds ``cap``.
    Evaluation is iterative; the pending outer indices live on an explicit stack.
    """
    if i < 0 or j < 1:
        raise DomainError("need i >= 0 and j >= 1")
    if cap < 2:
        raise DomainError("cap must be at least 2")
    memo: dict[tuple[int, int], int] = {}
    # stack entries are (i, j); the value of the top frame is resolved first
    stack = [(i, j)]
    result = None
    while stack:
        a, b = stack[-1]
        if (a, b) in memo:
            result = memo[(a, b)]
            stack.pop()
            continue
        if a == 0:
            value = 2 * b
        elif b == 1:
            value = 2
        elif a == 1:
            # A(1, b) = 2**b by unrolling; avoids b doubling steps
            if b > cap.bit_length():
                raise BeyondCap(f"A(1, {b}) exceeds cap")
            value = 1 << b
        else:
            inner = memo.get((a, b - 1))
            if inner is None:
                stack.append((a, b - 1))
                continue
            outer = memo.get((a - 1, inner))
            if outer is None:
                stack.append((a - 1, inner))
                continue
            value = outer
        if value > cap:
            raise BeyondCap(f"A({a}, {b}) exceeds cap")
        memo[(a, b)] = value
        stack.pop()
        result = value
    return memo.get((i, j), result)
