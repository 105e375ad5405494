"""Symmetric discrete memoryless channels.

A channel is a q x q matrix ``transition[x, y] = p(y | x)``.  Besides the
capacity, validation derives the posterior ``p(X = c | Y = 0)`` under uniform
input and a family of permutations ``sigma[y]`` with
``p(y | x) == p(0 | sigma[y][x])`` for every x, y.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, NotStochastic, NotSymmetric

TOL = 1e-9
ZERO_POSTERIOR = 1e-12


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    q: int
    transition: np.ndarray
    capacity_bits: float
    posterior0: np.ndarray
    sigma: np.ndarray  # sigma[y, x]
    zero_posterior: np.ndarray = field(repr=False, default=None)
    exact: tuple | None = field(repr=False, default=None)

    @property
    def row(self) -> np.ndarray:
        return self.transition[0]

    def digest(self) -> str:
        """Stable short text identifying the matrix (for experiment metadata)."""
        return ";".join(",".join(f"{v:.12g}" for v in r) for r in self.transition)

    def to_json(self) -> dict:
        out = {"q": self.q, "matrix": self.transition.tolist()}
        if self.exact is not None:
            out["exact"] = [[[f.numerator, f.denominator] for f in r] for r in self.exact]
        return out


def entropy_bits(probs) -> float:
    """Base-2 entropy of a probability vector with 0 log 0 = 0."""
    p = np.asarray(probs, dtype=np.float64)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def entropy_q(x: float, q: int) -> float:
    """q-ary entropy H_q(x)."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"H_q argument {x} outside [0, 1]")
    lq = np.log(q)
    out = x * np.log(q - 1) / lq if q > 2 else 0.0
    if x > 0:
        out -= x * np.log(x) / lq
    if x < 1:
        out -= (1 - x) * np.log(1 - x) / lq
    return float(out)


def _classes(values: np.ndarray) -> np.ndarray:
    """Representative value per tolerance class of ``values`` (sorted)."""
    reps = []
    for v in np.sort(values):
        if not reps or v - reps[-1] > TOL:
            reps.append(v)
    return np.array(reps)


def _perfect_matching(adj: list[set[int]], q: int) -> dict[int, int]:
    """Kuhn's augmenting paths; returns y -> x.  ``adj[x]`` is a set of y."""
    match_y: dict[int, int] = {}

    def augment(x: int, seen: set[int]) -> bool:
        for y in sorted(adj[x]):
            if y in seen:
                continue
            seen.add(y)
            if y not in match_y or augment(match_y[y], seen):
                match_y[y] = x
                return True
        return False

    for x in range(q):
        if not augment(x, set()):
            raise NotSymmetric("no perfect matching in a probability class")
    return match_y


def _latin_sigma(t: np.ndarray) -> np.ndarray:
    """sigma[y, x] with p(y|x) = p(0|sigma[y,x]) and sigma[., x] a bijection too.

    Each probability class forms a regular bipartite graph between inputs and
    outputs; peeling perfect matchings (Koenig) colours it, and each matching
    is labelled by the input it pairs with output 0, so sigma[0] is the identity.
    """
    q = t.shape[0]
    reps = _classes(t[0])
    cls = np.abs(t[:, :, None] - reps[None, None, :]).argmin(axis=2)
    sigma = -np.ones((q, q), dtype=np.int64)
    for v in range(len(reps)):
        adj = [set(np.flatnonzero(cls[x] == v).tolist()) for x in range(q)]
        while any(adj):
            match = _perfect_matching(adj, q)
            label = match[0]
            for y, x in match.items():
                sigma[y, x] = label
                adj[x].discard(y)
    return sigma


def validate_symmetric(q: int, matrix, exact=None) -> ChannelSpec:
    t = np.array(matrix, dtype=np.float64)
    if t.shape != (q, q):
        raise NotStochastic(f"matrix shape {t.shape} is not {q}x{q}")
    if (t < -TOL).any() or (t > 1 + TOL).any():
        raise NotStochastic("entries must lie in [0, 1]")
    for x in range(q):
        if abs(t[x].sum() - 1.0) > TOL:
            raise NotStochastic(f"row {x} sums to {t[x].sum()}", witness={"row": x})
    base = np.sort(t[0])
    for x in range(q):
        if np.abs(np.sort(t[x]) - base).max() > TOL:
            raise NotSymmetric(f"row {x} is not a permutation of row 0", witness={"row": x})
    col0 = np.sort(t[:, 0])
    for y in range(q):
        if np.abs(np.sort(t[:, y]) - col0).max() > TOL:
            raise NotSymmetric(f"column {y} is not a permutation of column 0", witness={"column": y})
    if np.abs(col0 - base).max() > TOL:
        raise NotSymmetric("row 0 and column 0 hold different multisets", witness={"column": 0})
    t.setflags(write=False)
    sigma = _latin_sigma(t)
    sigma.setflags(write=False)
    for y in range(q):
        if np.abs(t[:, y] - t[sigma[y], 0]).max() > TOL:
            raise NotSymmetric(f"no permutation for output {y}", witness={"column": y})
    col = t[:, 0]
    posterior = col / col.sum()
    posterior.setflags(write=False)
    if exact is not None:
        zero = np.array([exact[x][0] == 0 for x in range(q)])
    else:
        zero = posterior <= ZERO_POSTERIOR
    zero.setflags(write=False)
    cap = float(np.log2(q) - entropy_bits(t[0]))
    return ChannelSpec(q, t, cap, posterior, sigma, zero, exact)


def capacity(spec: ChannelSpec) -> float:
    """log2 q - H_2(row 0), bits per symbol."""
    return float(np.log2(spec.q) - entropy_bits(spec.row))


def mutual_information_uniform(spec: ChannelSpec) -> float:
    """I(X; Y) for uniform X, computed from the joint distribution."""
    joint = spec.transition / spec.q
    py = joint.sum(axis=0)
    px = np.full(spec.q, 1.0 / spec.q)
    mask = joint > 0
    ratio = joint[mask] / (px[:, None] * py[None, :])[mask]
    return float((joint[mask] * np.log2(ratio)).sum())


def transmit(spec: ChannelSpec, x, stream) -> np.ndarray:
    """Independent per-symbol channel use by inverse CDF on uniform draws."""
    x = np.asarray(x, dtype=np.int64)
    u = stream.random(x.size).reshape(x.shape)
    cdf = np.cumsum(spec.transition, axis=1)
    y = (u[..., None] >= cdf[x]).sum(axis=-1)
    return np.minimum(y, spec.q - 1)


# --- constructors -------------------------------------------------------------

def bsc(p: float) -> ChannelSpec:
    return validate_symmetric(2, [[1 - p, p], [p, 1 - p]])


def noiseless(q: int) -> ChannelSpec:
    return validate_symmetric(q, np.eye(q))


def from_row(row, latin=None) -> ChannelSpec:
    """Channel with p(y|x) = row[latin[x][y]]; default latin square (y - x) mod q."""
    row = np.asarray(row, dtype=np.float64)
    q = row.size
    if latin is None:
        latin = (np.arange(q)[None, :] - np.arange(q)[:, None]) % q
    return validate_symmetric(q, row[np.asarray(latin)])


def random_symmetric(q: int, stream, zeros: int = 0) -> ChannelSpec:
    """A random symmetric channel: random row, random Latin-square arrangement."""
    w = stream.random(q) + 1e-3
    if zeros:
        w[stream.sample_distinct(q, min(zeros, q - 1))] = 0.0
    row = w / w.sum()
    base = (np.arange(q)[None, :] + np.arange(q)[:, None]) % q
    rperm = np.argsort(stream.random(q))
    cperm = np.argsort(stream.random(q))
    sym = np.argsort(stream.random(q))
    latin = sym[base[rperm][:, cperm]]
    return from_row(row, latin)


def load_channel(path) -> ChannelSpec:
    with open(path) as fh:
        obj = json.load(fh)
    return channel_from_json(obj)


def channel_from_json(obj: dict) -> ChannelSpec:
    q = int(obj["q"])
    if "exact" in obj and obj["exact"] is not None:
        exact = tuple(tuple(Fraction(int(n), int(d)) for n, d in r) for r in obj["exact"])
        for r in exact:
            if sum(r) != 1:
                raise NotStochastic("exact row does not sum to 1")
        return validate_symmetric(q, [[float(f) for f in r] for r in exact], exact=exact)
    return validate_symmetric(q, obj["matrix"])
