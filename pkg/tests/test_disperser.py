import numpy as np
import pytest

from shallowcode.disperser import (
    BipartiteGraph,
    find_disperser,
    purge_right_half,
    sample_left_regular,
    subset_size,
    verify_disperser,
    verify_disperser_sampled,
)
from shallowcode.errors import BadDegree, Exhausted, TooLarge, TooSmall
from shallowcode.rng import Stream

# smallest degree with >90% Las Vegas success in 100 tries for (12, 6, 1/2, 1/2)
FIXTURE_DEGREE = 2


def complete(n, m):
    return BipartiteGraph(n, m, tuple(tuple(range(m)) for _ in range(n)))


def test_complete_passes():
    assert verify_disperser(complete(6, 4), 0.2, 0.0)


def test_edgeless_fails():
    g = BipartiteGraph(5, 3, tuple(() for _ in range(5)))
    v = verify_disperser(g, 0.4, 0.5)
    assert not v and len(v.witness) == 2


def test_small_example():
    g = BipartiteGraph(4, 2, ((0,), (0,), (1,), (1,)))
    v = verify_disperser(g, 0.5, 0.5)
    assert v and v.checked == 6


def test_full_degree_is_complete():
    g = sample_left_regular(5, 4, 4, Stream(1))
    assert g.adj == complete(5, 4).adj


def test_left_degrees_and_right_mean():
    g = sample_left_regular(1000, 500, 4, Stream(2))
    assert all(len(nb) == 4 for nb in g.adj)
    assert abs(g.right_degrees().mean() - 8) <= 0.8


def test_bad_degree():
    with pytest.raises(BadDegree):
        sample_left_regular(4, 3, 4, Stream(1))


def test_exhaustive_cap():
    with pytest.raises(TooLarge):
        verify_disperser(complete(60, 2), 0.5, 0.5)


def test_find_trivial_and_exhausted():
    g = find_disperser(8, 3, 3, 0.25, 0.0, Stream(1))
    assert g.meta["tries"] == 1 and g.meta["verified"]
    with pytest.raises(Exhausted):
        find_disperser(8, 3, 1, 0.25, 0.0, Stream(1), max_tries=0)


def test_calibrated_fixture():
    g = find_disperser(12, 6, FIXTURE_DEGREE, 0.5, 0.5, Stream(2024), max_tries=100)
    assert verify_disperser(g, 0.5, 0.5)


def test_purge_star():
    g = BipartiteGraph(3, 2, ((0,), (0,), (0, 1)))
    p = purge_right_half(g)
    assert p.n_right == 1 and p.adj == ((), (), (0,))


def test_purge_regular_and_small():
    g = BipartiteGraph(4, 5, tuple(tuple(range(5)) for _ in range(4)))
    assert purge_right_half(g).n_right == 2
    with pytest.raises(TooSmall):
        purge_right_half(BipartiteGraph(1, 1, ((0,),)))


def test_purge_markov_bound():
    g = sample_left_regular(100, 50, 3, Stream(5))
    p = purge_right_half(g)
    assert p.right_degrees().max() <= 2 * g.n_edges / g.n_right
    assert p.right_degrees().max() <= g.right_degrees().max()
    assert max(len(nb) for nb in p.adj) <= 3


def test_monotone_supersets():
    g = find_disperser(12, 6, FIXTURE_DEGREE, 0.5, 0.5, Stream(3))
    s = Stream(4)
    need = 0.5 * 6
    for _ in range(1000):
        base = s.sample_distinct(12, subset_size(12, 0.5))
        extra = s.sample_distinct(12, s.integers(13))
        assert len(g.neighbourhood(set(base) | set(extra))) >= need


def test_sampled_never_passes_where_exhaustive_fails():
    s = Stream(8)
    for _ in range(50):
        n = 4 + s.integers(13)
        m = 2 + s.integers(8)
        g = sample_left_regular(n, m, 1 + s.integers(min(m, 3)), s)
        gamma, eps = 0.3, 0.3
        ex = verify_disperser(g, gamma, eps)
        sm = verify_disperser_sampled(g, gamma, eps, s)
        if sm.ok:
            assert ex.ok
        if not sm.ok:
            assert len(g.neighbourhood(sm.witness)) < 0.7 * m


def test_determinism():
    a = sample_left_regular(30, 10, 3, Stream(11)).dumps()
    assert a == sample_left_regular(30, 10, 3, Stream(11)).dumps()
    assert BipartiteGraph.from_json(__import__("json").loads(a)).dumps() == a
