import itertools
import math

import numpy as np
import pytest

from shallowcode.channel import bsc, from_row, noiseless, transmit
from shallowcode.circuit import LinearCircuit
from shallowcode.codec import (
    CSV_COLUMNS,
    FAIL,
    CodeInstance,
    SyndromeDecoder,
    build_capacity_code,
    csv_row,
    decode_typical,
    default_eps,
    error_terms_exact,
    failure_prob_exact,
    failure_prob_mc,
    index_message,
    message_index,
    predicted_exponent,
    restriction_uniformity_check,
    write_csv,
)
from shallowcode.disperser import BipartiteGraph, sample_left_regular
from shallowcode.errors import DomainError, PreconditionFailed, RateAboveCapacity, TooSmall
from shallowcode.galois import make_field
from shallowcode.rng import Stream

F2 = make_field(2)
BSC = bsc(0.11)


def instance(gen, field=F2):
    gen = np.asarray(gen, dtype=np.int64)
    enc = LinearCircuit.from_matrix(field, gen)
    return CodeInstance(field, gen.shape[0], gen.shape[1], enc, gen.copy())


@pytest.fixture(scope="module")
def code32():
    return build_capacity_code(BSC, 0.25, 32, seed=7)


def test_build_shape(code32):
    assert code32.k == 8 and code32.n == 32
    assert code32.encoder.depth() == code32.meta["mother_depth"]
    assert code32.meta["depth"] == code32.encoder.depth()
    assert code32.meta["capacity"] == pytest.approx(0.5000835, abs=1e-6)


def test_encode_zero_and_matrix(code32):
    assert not code32.encode(np.zeros(8, dtype=np.int64)).any()
    s = Stream(3)
    for _ in range(20):
        m = s.integers(2, 8)
        assert np.array_equal(code32.encode(m), code32.encoder(m))
        assert np.array_equal(code32.encode(m), F2.matmul(m[None, :], code32.gen)[0])


def test_json_roundtrip(code32):
    back = CodeInstance.from_json(code32.to_json())
    assert np.array_equal(back.gen, code32.gen) and back.meta == code32.meta


def test_rate_above_capacity():
    with pytest.raises(RateAboveCapacity):
        build_capacity_code(BSC, 0.9, 32)
    with pytest.raises(TooSmall):
        build_capacity_code(BSC, 0.01, 16)


def test_noiseless_decoding(code32):
    ch = noiseless(2)
    s = Stream(4)
    for _ in range(10):
        m = tuple(int(v) for v in s.integers(2, 8))
        res = decode_typical(code32, ch, 0.5 / 32, code32.encode(np.array(m)))
        assert res.outcome == m and res.candidates_found == 1


def test_zero_candidates_fail():
    inst = instance([[1, 1, 1]])
    res = decode_typical(inst, noiseless(2), 0.1, np.array([1, 0, 0]))
    assert res.outcome is FAIL and res.candidates_found == 0 and res.failed
    with pytest.raises(DomainError):
        decode_typical(inst, noiseless(2), 0.1, np.array([1, 0]))


def test_repetition_exact_failure():
    # with eps = 1/4 the typical decoder is majority vote on three symbols
    inst = instance([[1, 1, 1]])
    p = 0.1
    expect = 3 * p**2 * (1 - p) + p**3
    assert failure_prob_exact(inst, bsc(p), 0.25, (0,)) == pytest.approx(expect, abs=1e-12)
    assert failure_prob_exact(inst, bsc(p), 0.25, (1,)) == pytest.approx(expect, abs=1e-12)


def test_useless_channel():
    inst = instance([[1, 1, 1]])
    ch = from_row([0.5, 0.5])
    for eps in (0.1, 0.25, 0.5, 1.0):
        assert failure_prob_exact(inst, ch, eps, (0,)) >= 0.5


def test_error_terms_bracket():
    s = Stream(9)
    for _ in range(10):
        gen = s.integers(2, 24).reshape(3, 8)
        gen[0, 0] = 1
        inst = instance(gen)
        for eps in (0.1, 0.2, 0.3):
            m = tuple(int(v) for v in s.integers(2, 3))
            fail = failure_prob_exact(inst, BSC, eps, m)
            e1, e2 = error_terms_exact(inst, BSC, eps, m)
            assert max(e1, e2) - 1e-12 <= fail <= e1 + e2 + 1e-12


def test_message_index_roundtrip():
    for q, k in ((2, 5), (3, 3)):
        for i in range(q**k):
            assert message_index(index_message(i, q, k), q) == i
    assert message_index((1, 0, 0), 2) == 4


def test_uniformity_examples():
    g = BipartiteGraph(2, 2, ((0, 1), (1,)))
    assert restriction_uniformity_check(g, [1, 0], 2)
    assert restriction_uniformity_check(g, [1, 1], 3)
    with pytest.raises(PreconditionFailed):
        restriction_uniformity_check(g, [0, 0], 2)


def test_uniformity_random():
    s = Stream(10)
    for _ in range(50):
        q = (2, 3, 4)[s.integers(3)]
        n = 2 + s.integers(3)
        m = 2 + s.integers(3)
        g = sample_left_regular(n, m, 1 + s.integers(2), s)
        if q ** g.n_edges > 2**16:
            continue
        x = s.integers(q, n)
        if not x.any():
            x[0] = 1
        assert restriction_uniformity_check(g, x, q)


def test_predicted_exponent():
    assert predicted_exponent(BSC, 0.25, 0.01) == pytest.approx(-0.2401, abs=1e-3)
    assert predicted_exponent(noiseless(2), 0.5, 0.0) == pytest.approx(-0.5)


def test_default_eps():
    assert default_eps(BSC, 4) == 0.25
    assert default_eps(BSC, 100) == pytest.approx(0.055)


def test_mc_noiseless(code32):
    est = failure_prob_mc(code32, noiseless(2), 0.5 / 32, 3, 50, Stream(1))
    assert est.max_estimate == 0 and est.per_message[0].message == (0,) * 8


def test_mc_messages_agree(code32):
    est = failure_prob_mc(code32, BSC, default_eps(BSC, 32), 4, 400, Stream(2))
    ests = est.per_message
    for a, b in itertools.combinations(ests, 2):
        assert abs(a.estimate - b.estimate) <= 3 * math.hypot(a.stderr, b.stderr) + 1e-12


def test_mc_thread_invariance(code32):
    a = failure_prob_mc(code32, BSC, 0.1, 3, 100, Stream(5), threads=1)
    b = failure_prob_mc(code32, BSC, 0.1, 3, 100, Stream(5), threads=3)
    assert a == b


def test_syndrome_matches_enumeration():
    s = Stream(12)
    gen = s.integers(2, 288).reshape(12, 24)
    inst = instance(gen)
    eps = default_eps(BSC, 24)
    syn = SyndromeDecoder(inst, BSC, eps)
    for t in range(100):
        m = s.integers(2, 12)
        x = inst.encode(m)
        y = transmit(BSC, x, s.substream(t))
        res = decode_typical(inst, BSC, eps, y)
        assert syn.count(y) == res.candidates_found
        assert syn.decode_error(y, x) == (res.outcome == tuple(int(v) for v in m))


def test_csv(code32):
    est = failure_prob_mc(code32, BSC, 0.1, 1, 10, Stream(1))
    text = write_csv([csv_row(code32, 0.1, 0.05, est.per_message[0], 10)])
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    row = dict(zip(CSV_COLUMNS, lines[1].split(",")))
    assert row["n"] == "32" and row["k"] == "8" and row["trials"] == "10"
    assert write_csv([]) == ",".join(CSV_COLUMNS) + "\n"
