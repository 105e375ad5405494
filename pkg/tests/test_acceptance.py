"""Acceptance criteria 1-12, one PASS/FAIL line each.

Each check records its verdict and wall time, prints one line, and then asserts
it.  Lines are repeated in the pytest terminal summary.  Run alone with
``pytest -s tests/test_acceptance.py``.
"""

import itertools
import json
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE, random_circuit
from shallowcode import ackermann as ack
from shallowcode.channel import bsc, capacity, mutual_information_uniform, random_symmetric
from shallowcode.circuit import collapse_final_layer, serial_compose, to_generator_matrix
from shallowcode.cli import main as cli_main
from shallowcode.codec import build_capacity_code, failure_prob_mc, restriction_uniformity_check
from shallowcode.disperser import find_disperser, sample_left_regular, verify_disperser, verify_disperser_sampled
from shallowcode.errors import ShallowCodeError
from shallowcode.gadgets import (
    GadgetConfig,
    PgcSpec,
    RangeDetectorSpec,
    ball_volume,
    build_condenser,
    build_depth2_band,
    build_good_code,
    build_output_amplifier,
    compose_pgcs,
    count_weight_range,
    entropy_volume_bound,
    repetition_pgc,
    verify_range_detector,
)
from shallowcode.galois import make_field
from shallowcode.rng import Stream
from shallowcode.typical import TypicalParams, all_vectors, count_typical, enumerate_typical, mass_outside_typical

DISPERSER_FIXTURE = (12, 6, 2, 0.5, 0.5)  # n, m, d, gamma, eps


def record(num, ok, budget, started, detail=""):
    elapsed = time.time() - started
    ok = bool(ok) and elapsed < budget
    line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {elapsed:7.2f}s (< {budget:g}s)  {detail}"
    ACCEPTANCE[num] = (ok, line)
    print(line)
    return ok


def test_c01_field_axioms():
    t = time.time()
    ok = True
    for q in (2, 3, 4, 5, 7, 8, 9):
        f = make_field(q)
        a, b, c = (v.ravel() for v in np.meshgrid(np.arange(q), np.arange(q), np.arange(q), indexing="ij"))
        ok &= np.array_equal(f.vadd(a, b), f.vadd(b, a)) and np.array_equal(f.vmul(a, b), f.vmul(b, a))
        ok &= np.array_equal(f.vadd(f.vadd(a, b), c), f.vadd(a, f.vadd(b, c)))
        ok &= np.array_equal(f.vmul(f.vmul(a, b), c), f.vmul(a, f.vmul(b, c)))
        ok &= np.array_equal(f.vmul(a, f.vadd(b, c)), f.vadd(f.vmul(a, b), f.vmul(a, c)))
        e = np.arange(q)
        ok &= np.array_equal(f.vadd(e, 0), e) and np.array_equal(f.vmul(e, 1), e)
        ok &= not f.vadd(e, f.vneg(e)).any()
        ok &= all(f.mul(x, f.inv(x)) == 1 for x in range(1, q))
    assert record(1, ok, 5, t, "q in {2,3,4,5,7,8,9}")


def test_c02_circuit_matrix():
    t = time.time()
    s = Stream(2)
    ok = True
    for i in range(100):
        f = make_field(2 + i % 2)
        k = 1 + s.integers(10)
        depth = 1 + s.integers(4)
        c = random_circuit(f, k, depth, s)
        xs = all_vectors(f.q, k).astype(np.int64)
        want = f.matmul(xs, to_generator_matrix(c))
        ok &= np.array_equal(c.evaluate_batch(xs), want)
        if depth >= 2:
            ok &= np.array_equal(collapse_final_layer(c).evaluate_batch(xs), want)
        tail = random_circuit(f, c.n_outputs, 1 + s.integers(2), s)
        ok &= np.array_equal(serial_compose(c, tail).evaluate_batch(xs), tail.evaluate_batch(want))
    assert record(2, ok, 30, t, "100 circuits")


def test_c03_capacity_identity():
    t = time.time()
    s = Stream(3)
    worst = 0.0
    for i in range(100):
        ch = random_symmetric(2 + i % 4, s, zeros=i % 2)
        worst = max(worst, abs(capacity(ch) - mutual_information_uniform(ch)))
    assert record(3, worst <= 1e-9, 5, t, f"max gap {worst:.2e}")


def test_c04_typical_count():
    t = time.time()
    s = Stream(4)
    ok = True
    for i in range(50):
        q = 2 + i % 2
        n = 1 + s.integers(10 if q == 2 else 8)
        ch = random_symmetric(q, s, zeros=(i // 2) % 2)
        params = TypicalParams(ch, n, 0.05 + 0.3 * s.random())
        y = s.integers(q, n)
        ok &= count_typical(params) == len(enumerate_typical(params, y))
    assert record(4, ok, 60, t, "50 channels")


def test_c05_mass_outside():
    t = time.time()
    ch = bsc(0.2)
    exact = [mass_outside_typical(TypicalParams(ch, n, 0.1), exact=True).estimate for n in (8, 12, 16, 20)]
    mono = all(b <= a for a, b in zip(exact, exact[1:]))
    mc = mass_outside_typical(TypicalParams(ch, 200, 0.1), 20000, Stream(5))
    direction = mc.estimate <= mc.chernoff + 3 * mc.stderr
    detail = f"exact {[round(v, 4) for v in exact]} monotone={mono}; n=200 {mc.estimate:.4f} vs {mc.chernoff:.4f}"
    assert record(5, mono and direction, 60, t, detail)


def test_c06_disperser():
    t = time.time()
    s = Stream(6)
    agree = True
    for _ in range(50):
        n = 4 + s.integers(13)
        m = 2 + s.integers(8)
        g = sample_left_regular(n, m, 1 + s.integers(min(m, 3)), s)
        if verify_disperser_sampled(g, 0.3, 0.3, s, samples=10**4).ok:
            agree &= verify_disperser(g, 0.3, 0.3).ok
    n, m, d, gamma, eps = DISPERSER_FIXTURE
    try:
        g = find_disperser(n, m, d, gamma, eps, Stream(2024), max_tries=100)
        found = f"fixture in {g.meta['tries']} tries"
    except ShallowCodeError as exc:
        g, found = None, f"fixture: {exc}"
    assert record(6, agree and g is not None, 60, t, found)


def test_c07_uniformity():
    t = time.time()
    s = Stream(7)
    ok, done = True, 0
    while done < 50:
        q = 2 + s.integers(2)
        n, m = 2 + s.integers(4), 2 + s.integers(4)
        g = sample_left_regular(n, m, 1 + s.integers(min(m, 3)), s)
        if g.n_edges > 12:
            continue
        x = s.integers(q, n)
        if not x.any():
            continue
        ok &= restriction_uniformity_check(g, x, q)
        done += 1
    assert record(7, ok, 60, t, "50 instances")


def test_c08_gadgets():
    t = time.time()
    f2 = make_field(2)
    parts = {}
    rep_ok = True
    for q in (2, 3):
        f = make_field(q)
        for n in range(1, 17):
            if count_weight_range(n, math.ceil(n / 8), n, q) > 10**7:
                continue  # q = 3 above n = 14 is past the exhaustive cap
            spec = RangeDetectorSpec(n, 32 * n, math.ceil(n / 8), n, 4 * n)
            rep_ok &= verify_range_detector(repetition_pgc(f, n), spec).ok
    parts["repetition"] = rep_ok

    def attempt(name, build):
        try:
            parts[name] = build().verified == "exhaustive"
        except ShallowCodeError as exc:
            parts[name] = False
            print(f"  {name}: {type(exc).__name__}: {exc}")

    attempt("output_amplifier", lambda: build_output_amplifier(f2, 8, 24, Stream(81), max_tries=200))
    # c0 lowered to r so the shape is admissible; see the notes on this fixture
    attempt("condenser", lambda: build_condenser(f2, 64, 4, 2, Stream(82), 200, c0=4))

    def two_band():
        lo = build_depth2_band(f2, 8, 1, 2, Stream(5), 200, GadgetConfig()).circuit
        hi = build_depth2_band(f2, 8, 2, 4, Stream(6), 200, GadgetConfig()).circuit
        return compose_pgcs([(lo, PgcSpec(8, 1, 2)), (hi, PgcSpec(8, 2, 4))], Stream(7), 200)

    attempt("compose", two_band)

    def good():
        rep = build_good_code(f2, 8, 2, stream=Stream(88))
        gen = to_generator_matrix(rep.circuit)
        xs = all_vectors(2, 8)[1:].astype(np.int64)
        assert np.count_nonzero(f2.matmul(xs, gen), axis=1).min() >= 32
        return rep

    attempt("good_code", good)
    detail = " ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in parts.items())
    assert record(8, all(parts.values()), 120, t, detail)


def test_c09_volume_bound():
    t = time.time()
    ok = True
    for q in (2, 3, 4):
        for gamma in np.linspace(0.05, 1 - 1 / q, 10):
            for n in range(1, 41):
                ok &= ball_volume(n, math.floor(gamma * n + 1e-9), q) <= entropy_volume_bound(n, gamma, q) * (1 + 1e-12)
    assert record(9, ok, 5, t, "n <= 40, q in {2,3,4}")


def test_c10_end_to_end():
    t = time.time()
    ch = bsc(0.11)
    res = {}
    for n, rate in ((16, 0.25), (32, 0.25), (48, 0.25), (48, 0.75)):
        inst = build_capacity_code(ch, rate, n, gamma=0.05, seed=n, allow_above_capacity=True)
        est = failure_prob_mc(inst, ch, 0.05, 4, 2000, Stream(1000 + n))
        res[(n, rate)] = est
    lo, hi = res[(16, 0.25)], res[(48, 0.25)]
    trend = hi.max_estimate + 3 * math.hypot(lo.max_stderr, hi.max_stderr) <= lo.max_estimate
    converse = res[(48, 0.75)].max_estimate >= 0.5
    detail = " ".join(f"n={n},r={r}:{e.max_estimate:.4f}" for (n, r), e in res.items())
    assert record(10, trend and converse, 600, t, detail)


def test_c11_ackermann():
    t = time.time()
    cap = 1 << 64
    ok = ack.ackermann(0, 5, cap) == 10 and ack.ackermann(1, 4, cap) == 16
    ok &= ack.ackermann(2, 4, cap) == 65536
    ok &= ack.lam(2, 8) == 3 and ack.lam(4, 65) == 4
    ok &= ack.alpha(64) == 2 and ack.alpha(65) == 4
    alphas = [ack.alpha(n) for n in range(1, 5000)]
    ok &= all(a % 2 == 0 for a in alphas) and all(b >= a for a, b in zip(alphas, alphas[1:]))
    tower = ack.ackermann(2, 5, 1 << 70000)
    ok &= tower == 1 << 65536 and ack.lam(6, tower) <= 6
    assert record(11, ok, 30, t, "unit values, alpha parity and monotonicity, tower schedule")


def test_c12_determinism(tmp_path, capsys):
    t = time.time()
    chan = tmp_path / "bsc.json"
    chan.write_text(json.dumps({"q": 2, "matrix": [[0.89, 0.11], [0.11, 0.89]]}))
    runs = []
    for rep in range(2):
        d = tmp_path / str(rep)
        d.mkdir()
        cmds = [
            ["build", "--channel", chan, "--rate", 0.25, "--n", 16, "--seed", 5, "--out", d / "code.json", "--report", d / "report.json"],
            ["simulate", "--code", d / "code.json", "--channel", chan, "--trials", 100, "--messages", 2, "--seed", 9, "--out", d / "sim.csv"],
            ["disperser", "--left", 40, "--right", 20, "--degree", 3, "--seed", 4, "--out", d / "graph.json"],
            ["--threads", 2, "simulate", "--code", d / "code.json", "--channel", chan, "--trials", 100, "--messages", 2, "--seed", 9, "--out", d / "sim2.csv"],
        ]
        for cmd in cmds:
            assert cli_main([str(a) for a in cmd]) == 0
        capsys.readouterr()
        runs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    same = runs[0] == runs[1] and runs[0]["sim.csv"] == runs[0]["sim2.csv"]
    assert record(12, same, 60, t, f"{len(runs[0])} files compared")
