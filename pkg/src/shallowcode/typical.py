"""Typical sets of transmitted vectors for a received word.

``x`` is typical for ``y`` when the vector ``z_i = sigma[y_i][x_i]`` has, for
every symbol c of nonzero posterior, an empirical frequency within ``eps`` of
``p(X = c | Y = 0)``.  Symbols of zero posterior are unconstrained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import limits
from .channel import ChannelSpec, transmit
from .errors import LengthMismatch, TooLarge


@dataclass(frozen=True)
class TypicalParams:
    channel: ChannelSpec
    n: int
    eps: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0 < self.eps <= 1:
            raise ValueError("eps must lie in (0, 1]")


def admissible_counts(params: TypicalParams) -> list[np.ndarray | None]:
    """Per symbol: allowed occurrence counts (None when unconstrained).

    The test ``|i/n - p_c| <= eps`` is the same float expression used for
    membership, so counting and enumeration can never disagree.
    """
    n = params.n
    i = np.arange(n + 1)
    out = []
    for c in range(params.channel.q):
        if params.channel.zero_posterior[c]:
            out.append(None)
        else:
            out.append(np.flatnonzero(np.abs(i / n - params.channel.posterior0[c]) <= params.eps))
    return out


def _typical_mask(params: TypicalParams, z: np.ndarray) -> np.ndarray:
    """Row-wise membership of the transformed vectors ``z`` in Typical(0, eps)."""
    n = params.n
    ok = np.ones(z.shape[0], dtype=bool)
    for c, p_c in enumerate(params.channel.posterior0):
        if params.channel.zero_posterior[c]:
            continue
        cnt = (z == c).sum(axis=1)
        ok &= np.abs(cnt / n - p_c) <= params.eps
    return ok


def transform(params: TypicalParams, y, x) -> np.ndarray:
    """z_i = sigma[y_i][x_i]; broadcasts over leading axes of ``x``."""
    return params.channel.sigma[np.asarray(y), np.asarray(x)]


def is_typical(params: TypicalParams, y, x) -> bool:
    y = np.asarray(y)
    x = np.asarray(x)
    if y.shape != (params.n,) or x.shape != (params.n,):
        raise LengthMismatch("y and x must both have length n")
    return bool(_typical_mask(params, transform(params, y, x)[None, :])[0])


def all_vectors(q: int, n: int) -> np.ndarray:
    """Every vector of F_q^n in lexicographic order, shape (q**n, n)."""
    grids = np.indices((q,) * n, dtype=np.int8 if q < 128 else np.int32)
    return grids.reshape(n, -1).T


def enumerate_typical(params: TypicalParams, y) -> np.ndarray:
    """Rows are exactly the members of Typical(y, eps), lexicographic order."""
    q, n = params.channel.q, params.n
    if q**n > limits.get("enumerate_typical"):
        raise TooLarge(f"q^n = {q**n} exceeds the enumeration cap")
    y = np.asarray(y)
    if y.shape != (n,):
        raise LengthMismatch("y must have length n")
    xs = all_vectors(q, n)
    mask = _typical_mask(params, transform(params, y[None, :], xs))
    return xs[mask].astype(np.int64)


def count_typical(params: TypicalParams) -> int:
    """Exact |Typical(y, eps)| (independent of y) as a sum of multinomials."""
    q, n = params.channel.q, params.n
    if n > limits.get("count_typical_n") or q > limits.get("count_typical_q"):
        raise TooLarge("count_typical supports n <= 64 and q <= 8")
    allowed = admissible_counts(params)
    free = sum(a is None for a in allowed)
    # ways[s] = number of length-s words over the constrained symbols seen so far
    ways = {0: 1}
    for a in allowed:
        if a is None:
            continue
        nxt: dict[int, int] = {}
        for s, w in ways.items():
            for i in a.tolist():
                if s + i <= n:
                    nxt[s + i] = nxt.get(s + i, 0) + w * math.comb(s + i, i)
        ways = nxt
    total = 0
    for s, w in ways.items():
        rest = n - s
        if free == 0 and rest:
            continue
        total += w * math.comb(n, s) * free**rest
    return total


@dataclass(frozen=True)
class MassEstimate:
    estimate: float
    stderr: float
    trials: int
    chernoff: float
    exact: bool


def chernoff_comparator(params: TypicalParams) -> float:
    """2q * min over positive posteriors of exp(-eps^2 p_c n / 2)."""
    pos = params.channel.posterior0[~params.channel.zero_posterior]
    return float(2 * params.channel.q * np.exp(-(params.eps**2) * pos.min() * params.n / 2))


def mass_outside_exact(params: TypicalParams) -> float:
    """Sum over z of p(z | 0) * [0 not in Typical(z, eps)], by enumeration."""
    q, n = params.channel.q, params.n
    if q**n > limits.get("exact_outputs"):
        raise TooLarge(f"q^n = {q**n} exceeds the exact-enumeration cap")
    zs = all_vectors(q, n)
    probs = np.prod(params.channel.row[zs], axis=1)
    outside = ~_typical_mask(params, params.channel.sigma[zs, 0])
    return float(probs[outside].sum())


def mass_outside_typical(params: TypicalParams, trials: int = 0, stream=None, exact: bool = False) -> MassEstimate:
    """Probability that the sent all-zero word is atypical for its own reception."""
    comparator = chernoff_comparator(params)
    if exact:
        return MassEstimate(mass_outside_exact(params), 0.0, 0, comparator, True)
    if trials <= 0:
        raise ValueError("Monte Carlo estimate needs trials > 0")
    z = transmit(params.channel, np.zeros((trials, params.n), dtype=np.int64), stream)
    outside = ~_typical_mask(params, params.channel.sigma[z, 0])
    est = float(outside.mean())
    se = math.sqrt(max(est * (1 - est), 0.0) / trials)
    return MassEstimate(est, se, trials, comparator, False)
