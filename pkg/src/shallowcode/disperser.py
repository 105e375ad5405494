"""Bipartite disperser graphs: sampling, verification, Las Vegas search, purging."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import limits
from .errors import BadDegree, Exhausted, TooLarge, TooSmall

SAMPLED_SUBSETS = 10_000


@dataclass(frozen=True)
class BipartiteGraph:
    n_left: int
    n_right: int
    adj: tuple  # adj[u] = sorted tuple of right neighbours
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.adj) != self.n_left:
            raise ValueError("adjacency length differs from n_left")
        for nb in self.adj:
            if list(nb) != sorted(set(nb)) or (nb and (nb[0] < 0 or nb[-1] >= self.n_right)):
                raise ValueError("neighbour lists must be sorted, distinct and in range")

    @property
    def n_edges(self) -> int:
        return sum(len(nb) for nb in self.adj)

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, nb in enumerate(self.adj) for v in nb]

    def right_degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_right, dtype=np.int64)
        for nb in self.adj:
            deg[list(nb)] += 1
        return deg

    def neighbourhood(self, subset) -> set[int]:
        out: set[int] = set()
        for u in subset:
            out.update(self.adj[u])
        return out

    def to_json(self) -> dict:
        return {"n_left": self.n_left, "n_right": self.n_right, "adj": [list(nb) for nb in self.adj]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    @classmethod
    def from_json(cls, obj: dict) -> "BipartiteGraph":
        return cls(int(obj["n_left"]), int(obj["n_right"]), tuple(tuple(int(v) for v in nb) for nb in obj["adj"]))


@dataclass(frozen=True)
class DisperserVerdict:
    ok: bool
    witness: tuple | None = None
    exhaustive: bool = True
    checked: int = 0

    def __bool__(self) -> bool:
        return self.ok


def subset_size(n_left: int, gamma: float) -> int:
    return max(1, math.ceil(gamma * n_left - 1e-9))


def required_cover(n_right: int, eps: float) -> float:
    return (1 - eps) * n_right - 1e-9


def sample_left_regular(n: int, m: int, d: int, stream) -> BipartiteGraph:
    """Each left vertex picks ``d`` distinct right vertices uniformly (Floyd)."""
    if not 1 <= d <= m:
        raise BadDegree(f"degree {d} outside [1, {m}]")
    adj = tuple(tuple(stream.sample_distinct(m, d)) for _ in range(n))
    return BipartiteGraph(n, m, adj)


def _masks(g: BipartiteGraph) -> list[int]:
    return [sum(1 << v for v in nb) for nb in g.adj]


def verify_disperser(g: BipartiteGraph, gamma: float, eps: float) -> DisperserVerdict:
    """Exhaustive check over all left subsets of size ceil(gamma * n_left).

    Neighbourhoods only grow under supersets, so the minimal size suffices.
    """
    s = subset_size(g.n_left, gamma)
    if s > g.n_left:
        return DisperserVerdict(True, None, True, 0)
    total = math.comb(g.n_left, s)
    if total > limits.get("disperser_subsets"):
        raise TooLarge(f"{total} subsets exceed the exhaustive cap")
    need = required_cover(g.n_right, eps)
    masks = _masks(g)
    checked = 0
    for combo in combinations(range(g.n_left), s):
        acc = 0
        for u in combo:
            acc |= masks[u]
        checked += 1
        if acc.bit_count() < need:
            return DisperserVerdict(False, combo, True, checked)
    return DisperserVerdict(True, None, True, checked)


def adjacency_matrix(g: BipartiteGraph) -> np.ndarray:
    a = np.zeros((g.n_left, g.n_right), dtype=bool)
    for u, nb in enumerate(g.adj):
        a[u, list(nb)] = True
    return a


def verify_disperser_sampled(g: BipartiteGraph, gamma: float, eps: float, stream, samples: int = SAMPLED_SUBSETS) -> DisperserVerdict:
    """Random minimal subsets; a pass is evidence, not proof."""
    s = subset_size(g.n_left, gamma)
    if s > g.n_left:
        return DisperserVerdict(True, None, False, 0)
    need = required_cover(g.n_right, eps)
    adj = adjacency_matrix(g)
    batch = max(1, min(samples, (1 << 22) // max(1, g.n_left)))
    done = 0
    while done < samples:
        b = min(batch, samples - done)
        # the s smallest of n_left uniform keys form a uniform s-subset
        keys = stream.random(b * g.n_left).reshape(b, g.n_left)
        subsets = np.sort(np.argpartition(keys, s - 1, axis=1)[:, :s], axis=1)
        cover = np.zeros((b, g.n_right), dtype=bool)
        for col in range(s):
            cover |= adj[subsets[:, col]]
        bad = np.flatnonzero(cover.sum(axis=1) < need)
        if bad.size:
            return DisperserVerdict(False, tuple(subsets[bad[0]].tolist()), False, done + int(bad[0]) + 1)
        done += b
    return DisperserVerdict(True, None, False, samples)


def find_disperser(n: int, m: int, d: int, gamma: float, eps: float, stream, max_tries: int = 200) -> BipartiteGraph:
    """Sample and verify until a graph passes.

    Verification is exhaustive when the subset count is within the cap,
    otherwise sampled; ``meta["verified"]`` records which.
    """
    s = subset_size(n, gamma)
    exhaustive = s > n or math.comb(n, s) <= limits.get("disperser_subsets")
    for attempt in range(1, max_tries + 1):
        g = sample_left_regular(n, m, d, stream)
        if exhaustive:
            verdict = verify_disperser(g, gamma, eps)
        else:
            verdict = verify_disperser_sampled(g, gamma, eps, stream)
        if verdict.ok:
            meta = {"tries": attempt, "verified": exhaustive, "gamma": gamma, "eps": eps, "degree": d}
            return BipartiteGraph(g.n_left, g.n_right, g.adj, meta)
    raise Exhausted(f"no ({gamma}, {eps})-disperser found in {max_tries} tries", tries=max_tries)


def purge_right_half(g: BipartiteGraph) -> BipartiteGraph:
    """Drop the ceil(m/2) right vertices of highest degree and reindex the rest."""
    if g.n_right < 2:
        raise TooSmall("need at least two right vertices")
    deg = g.right_degrees()
    # highest degree first, lower index first among ties
    order = sorted(range(g.n_right), key=lambda v: (-deg[v], v))
    removed = set(order[: (g.n_right + 1) // 2])
    kept = [v for v in range(g.n_right) if v not in removed]
    index = {v: i for i, v in enumerate(kept)}
    adj = tuple(tuple(index[v] for v in nb if v in index) for nb in g.adj)
    return BipartiteGraph(g.n_left, len(kept), adj, dict(g.meta, purged=True))
