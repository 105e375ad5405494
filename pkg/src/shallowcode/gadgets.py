"""Range detectors, partial good codes and the depth-bounded good-code builder.

Every gadget is a Las Vegas construction: sample the random wiring and
coefficients, check the weight guarantee, resample on failure.  A check is
``exhaustive`` when every input of the promised weight range was evaluated and
``sampled`` otherwise (random inputs plus a collision search for low-weight
kernel vectors, which can only refute).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from itertools import combinations, islice, product
from typing import Callable

import numpy as np

from . import limits
from .ackermann import ackermann, lam
from .channel import entropy_q
from .circuit import LinearCircuit, collapse_final_layer, serial_compose, stack, to_generator_matrix
from .disperser import find_disperser, purge_right_half
from .errors import (
    ArityMismatch,
    BadShape,
    BeyondCap,
    DepthBudgetTooSmall,
    DomainError,
    Exhausted,
    PreconditionFailed,
    RangesDontAbut,
    TooLarge,
)
from .galois import FieldSpec

SAMPLED_INPUTS = 10_000
COLLISION_BUDGET = 100_000


@dataclass(frozen=True)
class RangeDetectorSpec:
    m_in: int
    n_out: int
    ell: int
    k: int
    r: int
    s: int | None = None

    def __post_init__(self):
        if self.s is None:
            object.__setattr__(self, "s", self.n_out)
        if not (1 <= self.ell <= self.k <= self.m_in and 0 <= self.r <= self.s <= self.n_out):
            raise DomainError(f"inconsistent range detector parameters {self}")

    @classmethod
    def parse(cls, text: str) -> "RangeDetectorSpec":
        vals = [int(v) for v in text.split(",")]
        return cls(*vals)


@dataclass(frozen=True)
class PgcSpec:
    n: int
    r: int
    s: int
    expansion: int = 32
    out_weight_min: int | None = None

    def __post_init__(self):
        if not 1 <= self.r <= self.s <= self.n or self.expansion < 2:
            raise DomainError(f"inconsistent PGC parameters {self}")
        if self.out_weight_min is None:
            object.__setattr__(self, "out_weight_min", math.ceil(self.expansion * self.n / 8))

    @property
    def n_out(self) -> int:
        return self.expansion * self.n

    def detector(self) -> RangeDetectorSpec:
        return RangeDetectorSpec(self.n, self.n_out, self.r, self.s, self.out_weight_min, self.n_out)


@dataclass
class GadgetConfig:
    """Construction constants; named ones follow the standard construction, the rest are calibrated."""

    expansion: int = 32
    disperser_gamma: float = 1 / 8
    condenser_fan_out: int = 6
    c0: float = 16
    n_small: int = 10
    max_tries: int = 200
    output_fan_in: int = 12
    amp_fan_in: int = 8
    rate_amp_degree: int = 2
    c_mid: float = 4.0
    c_fan: float = 1.0


@dataclass(frozen=True)
class Verdict:
    ok: bool
    status: str  # exhaustive | sampled | failed
    witness: tuple | None = None
    checked: int = 0

    def __bool__(self) -> bool:
        return self.ok


@dataclass
class BuildReport:
    circuit: LinearCircuit
    spec: dict
    verified: str
    tries: int
    wire_count: int
    depth: int
    seed: int
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "spec": self.spec,
            "verified": self.verified,
            "tries": self.tries,
            "wire_count": self.wire_count,
            "depth": self.depth,
            "seed": self.seed,
            "details": self.details,
        }


def _report(circuit: LinearCircuit, spec, verified: str, tries: int, seed: int, **details) -> BuildReport:
    spec_d = asdict(spec) if hasattr(spec, "__dataclass_fields__") else dict(spec)
    return BuildReport(circuit, spec_d, verified, tries, circuit.wire_count(), circuit.depth(), seed, details)


def _merge_status(*statuses: str) -> str:
    if "failed" in statuses:
        return "failed"
    if "sampled" in statuses:
        return "sampled"
    return "exhaustive"


# --- weight-range inputs -------------------------------------------------------

def count_weight_range(n: int, lo: int, hi: int, q: int) -> int:
    return sum(math.comb(n, w) * (q - 1) ** w for w in range(max(lo, 0), min(hi, n) + 1))


def iter_weight_range(n: int, lo: int, hi: int, q: int, batch: int = 1 << 15):
    """Every vector with weight in [lo, hi], in batches of rows."""
    for w in range(max(lo, 0), min(hi, n) + 1):
        if w == 0:
            yield np.zeros((1, n), dtype=np.int64)
            continue
        values = np.array(list(product(range(1, q), repeat=w)), dtype=np.int64)
        per = max(1, batch // len(values))
        combos = combinations(range(n), w)
        while True:
            chunk = np.array(list(islice(combos, per)), dtype=np.int64)
            if chunk.size == 0:
                break
            rows = np.zeros((len(chunk) * len(values), n), dtype=np.int64)
            sup = np.repeat(chunk, len(values), axis=0)
            vals = np.tile(values, (len(chunk), 1))
            np.put_along_axis(rows, sup, vals, axis=1)
            yield rows


def sample_weight_range(n: int, lo: int, hi: int, q: int, count: int, stream) -> np.ndarray:
    """Random inputs: weight uniform on [lo, hi], support and values uniform."""
    w = lo + stream.integers(hi - lo + 1, count)
    ranks = np.argsort(np.argsort(stream.random(count * n).reshape(count, n), axis=1), axis=1)
    vals = stream.integers(q - 1, count * n).reshape(count, n) + 1
    return np.where(ranks < w[:, None], vals, 0)


class _WeightOracle:
    """Output weights of x @ gen; over F_2 the rows of gen are bit-packed and XORed."""

    def __init__(self, field: FieldSpec, gen: np.ndarray):
        self.field = field
        self.gen = gen
        self.packed = None
        if field.q == 2:
            n_out = gen.shape[1]
            pad = (-n_out) % 64
            bits = np.pad(gen.astype(np.uint8), ((0, 0), (0, pad)))
            self.packed = np.packbits(bits, axis=1, bitorder="little").view(np.uint64)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.packed is None:
            return np.count_nonzero(self.field.matmul(x, self.gen), axis=1)
        nz = x != 0
        w = nz.sum(axis=1)
        out = np.zeros(len(x), dtype=np.int64)
        for wv in np.unique(w).tolist():
            if wv == 0:
                continue
            rows = np.flatnonzero(w == wv)
            sup = np.nonzero(nz[rows])[1].reshape(len(rows), wv)
            img = self.packed[sup[:, 0]].copy()
            for c in range(1, wv):
                img ^= self.packed[sup[:, c]]
            out[rows] = np.bitwise_count(img).sum(axis=1)
        return out


def _check_rows(oracle: _WeightOracle, x, spec) -> int | None:
    w = oracle(x)
    bad = np.flatnonzero((w < spec.r) | (w > spec.s))
    return int(bad[0]) if bad.size else None


def verify_range_detector(c: LinearCircuit, spec: RangeDetectorSpec) -> Verdict:
    """Exhaustive check that every input of weight in [ell, k] maps into [r, s]."""
    if c.n_inputs != spec.m_in or c.n_outputs != spec.n_out:
        raise ArityMismatch(f"circuit is {c.n_inputs}->{c.n_outputs}, spec is {spec.m_in}->{spec.n_out}")
    total = count_weight_range(spec.m_in, spec.ell, spec.k, c.field.q)
    if total > limits.get("detector_inputs"):
        raise TooLarge(f"{total} inputs exceed the exhaustive cap")
    oracle = _WeightOracle(c.field, to_generator_matrix(c))
    checked = 0
    for rows in iter_weight_range(spec.m_in, spec.ell, spec.k, c.field.q):
        bad = _check_rows(oracle, rows, spec)
        if bad is not None:
            return Verdict(False, "failed", tuple(rows[bad].tolist()), checked + bad + 1)
        checked += len(rows)
    return Verdict(True, "exhaustive", None, checked)


def _collision_witness(field: FieldSpec, gen: np.ndarray, spec: RangeDetectorSpec, stream) -> tuple | None:
    """Find x of weight in [ell, k] with x @ gen == 0 from two equal images.

    Images of all vectors with weight <= h are hashed; two equal images give a
    kernel vector of weight <= 2h.  Only useful for refuting r >= 1.
    """
    n, q = spec.m_in, field.q
    if spec.r < 1:
        return None
    h = 0
    while h < spec.k and count_weight_range(n, 0, h + 1, q) <= COLLISION_BUDGET:
        h += 1
    if 2 * h < spec.ell or h == 0:
        return None
    xs = np.concatenate(list(iter_weight_range(n, 0, h, q)))
    imgs = field.matmul(xs, gen)
    key_vec = stream.integers(1 << 20, gen.shape[1]).astype(np.int64)
    keys = (imgs * key_vec[None, :]).sum(axis=1) % ((1 << 61) - 1)
    order = np.argsort(keys, kind="stable")
    ks = keys[order]
    dup = np.flatnonzero(ks[1:] == ks[:-1])
    for i in dup:
        a, b = order[i], order[i + 1]
        if not np.array_equal(imgs[a], imgs[b]):
            continue
        diff = field.vsub(xs[a], xs[b])
        w = int(np.count_nonzero(diff))
        if spec.ell <= w <= spec.k:
            return tuple(diff.tolist())
    return None


def check_detector(c: LinearCircuit, spec: RangeDetectorSpec, stream, samples: int = SAMPLED_INPUTS) -> Verdict:
    """Exhaustive verification when feasible, otherwise sampled plus collision search."""
    total = count_weight_range(spec.m_in, spec.ell, spec.k, c.field.q)
    if total <= limits.get("detector_inputs"):
        return verify_range_detector(c, spec)
    if c.n_inputs != spec.m_in or c.n_outputs != spec.n_out:
        raise ArityMismatch("circuit shape differs from the detector shape")
    gen = to_generator_matrix(c)
    oracle = _WeightOracle(c.field, gen)
    for start in range(0, samples, 1000):
        rows = sample_weight_range(spec.m_in, spec.ell, spec.k, c.field.q, min(1000, samples - start), stream)
        bad = _check_rows(oracle, rows, spec)
        if bad is not None:
            return Verdict(False, "failed", tuple(rows[bad].tolist()), start + bad + 1)
    wit = _collision_witness(c.field, gen, spec, stream)
    if wit is not None:
        return Verdict(False, "failed", wit, samples)
    return Verdict(True, "sampled", None, samples)


# --- random layers --------------------------------------------------------------

def _random_wiring(field: FieldSpec, n_src: int, n_gates: int, fan_in: int, stream, nonzero: bool = False):
    """Each gate reads ``fan_in`` distinct sources; returns (gate_idx, src_pos, coeff)."""
    fan_in = min(fan_in, n_src)
    gi = np.repeat(np.arange(n_gates), fan_in)
    src = np.concatenate([stream.sample_distinct(n_src, fan_in) for _ in range(n_gates)]) if n_gates else np.zeros(0, int)
    if nonzero:
        coeff = stream.integers(field.q - 1, gi.size) + 1
    else:
        coeff = stream.integers(field.q, gi.size)
    return gi, np.asarray(src, dtype=np.int64), coeff


def _depth1(field: FieldSpec, n_in: int, n_out: int, gi, src, coeff) -> LinearCircuit:
    base = LinearCircuit(field, n_in, [], validate=False)
    return base.append_layer(n_out, gi, src, coeff)


def repetition_pgc(field: FieldSpec, n: int, times: int = 32) -> LinearCircuit:
    """Output ``j`` copies input ``j mod n``: every input weight w gives ``times * w``."""
    out = times * n
    return _depth1(field, n, out, np.arange(out), np.arange(out) % n, np.ones(out, dtype=np.int64))


# --- gadgets --------------------------------------------------------------------

def build_output_amplifier(field: FieldSpec, n: int, m: int, stream, max_tries: int = 200, fan_in: int = 12) -> BuildReport:
    """(n, m, n/8, n, m/8)-range detector of depth 1 with output fan-in <= ``fan_in``."""
    if m < 3 * n:
        raise BadShape(f"output amplifier needs m >= 3n (got n={n}, m={m})")
    seed = stream.seed
    spec = RangeDetectorSpec(n, m, max(1, math.ceil(n / 8)), n, math.ceil(m / 8), m)
    for attempt in range(1, max_tries + 1):
        c = _depth1(field, n, m, *_random_wiring(field, n, m, fan_in, stream))
        verdict = check_detector(c, spec, stream)
        if verdict.ok:
            return _report(c, spec, verdict.status, attempt, seed, fan_in=fan_in)
    raise Exhausted(f"output amplifier ({n}->{m}) not found in {max_tries} tries", stage="output_amplifier")


def sample_output_amplifier(field: FieldSpec, n: int, m: int, stream, fan_in: int = 12) -> LinearCircuit:
    if m < 3 * n:
        raise BadShape(f"output amplifier needs m >= 3n (got n={n}, m={m})")
    return _depth1(field, n, m, *_random_wiring(field, n, m, fan_in, stream))


def _condenser_layer(field: FieldSpec, n: int, n_out: int, fan_out: int, stream) -> LinearCircuit:
    fan_out = min(fan_out, n_out)
    src = np.repeat(np.arange(n), fan_out)
    gi = np.concatenate([stream.sample_distinct(n_out, fan_out) for _ in range(n)])
    coeff = stream.integers(field.q - 1, src.size) + 1
    return _depth1(field, n, n_out, gi, src, coeff)


def build_condenser(field: FieldSpec, n: int, r: float, s: float, stream, max_tries: int = 200,
                    fan_out: int = 6, c0: float = 16, upper: int | None = None) -> BuildReport:
    """(n, n/r, s, n/r^1.5, s, n/r)-range detector: depth 1, constant fan-out per input.

    ``upper`` narrows the verified input range below n / r^1.5.
    """
    if not c0 <= r <= n:
        raise BadShape(f"condenser needs c0 <= r <= n (c0={c0}, r={r}, n={n})")
    top = math.floor(n / r**1.5 + 1e-9)
    if not 1 <= s <= top:
        raise BadShape(f"condenser needs 1 <= s <= n/r^1.5 = {n / r**1.5:.4g}")
    n_out = math.floor(n / r + 1e-9)
    lo = math.ceil(s - 1e-9)
    hi = top if upper is None else min(top, upper)
    spec = RangeDetectorSpec(n, n_out, lo, hi, lo, n_out)
    seed = stream.seed
    for attempt in range(1, max_tries + 1):
        c = _condenser_layer(field, n, n_out, fan_out, stream)
        verdict = check_detector(c, spec, stream)
        if verdict.ok:
            return _report(c, spec, verdict.status, attempt, seed, fan_out=fan_out)
    raise Exhausted(f"condenser (n={n}, r={r}, s={s}) not found in {max_tries} tries", stage="condenser")


def build_rate_amplifier(base: LinearCircuit, lo: int, hi: int, rho: float, c_target: float, delta: float,
                         stream, max_tries: int = 200, degree: int = 2) -> BuildReport:
    """Append a random-coefficient disperser layer lifting relative distance to ``delta``.

    ``base`` must map every input of weight in [lo, hi] to relative weight >= rho.
    The new layer has floor(c_target * n) outputs; right degrees are bounded by
    purging the heavier half of a graph sampled on twice as many outputs.
    """
    field = base.field
    n, big = base.n_inputs, base.n_outputs
    seed = stream.seed
    pre = RangeDetectorSpec(n, big, lo, hi, math.ceil(rho * big - 1e-9), big)
    pre_verdict = check_detector(base, pre, stream)
    if not pre_verdict.ok:
        raise PreconditionFailed("base circuit misses the stated relative weight", witness=pre_verdict.witness)
    n_out = math.floor(c_target * n + 1e-9)
    if n_out < 1:
        raise BadShape("rate amplifier needs at least one output")
    eps = max(0.0, 1.0 - min(1.0, 2 * delta))
    graph = purge_right_half(find_disperser(big, 2 * n_out, min(degree, 2 * n_out), rho, eps, stream, max_tries))
    edges = np.array(graph.edges(), dtype=np.int64).reshape(-1, 2)
    out_nodes = base.output_nodes()
    spec = RangeDetectorSpec(n, n_out, lo, hi, math.ceil(delta * n_out - 1e-9), n_out)
    for attempt in range(1, max_tries + 1):
        alpha = stream.integers(field.q, len(edges))
        c = base.append_layer(n_out, edges[:, 1], out_nodes[edges[:, 0]], alpha)
        verdict = check_detector(c, spec, stream)
        if verdict.ok:
            return _report(
                c, spec, _merge_status(pre_verdict.status, verdict.status), attempt, seed,
                disperser_tries=graph.meta.get("tries"), disperser_verified=graph.meta.get("verified"),
                max_right_degree=int(graph.right_degrees().max()) if graph.n_right else 0,
                gv_condition=bool(1 / c_target < 1 - entropy_q(min(delta, 1 - 1 / field.q), field.q)),
            )
    raise Exhausted(f"rate amplifier not found in {max_tries} tries", stage="rate_amplifier")


def _check_abut(specs: list[PgcSpec]) -> None:
    if not specs:
        raise RangesDontAbut("no parts given")
    for a, b in zip(specs, specs[1:]):
        if not (a.r < b.r and b.r in (a.s, a.s + 1)):
            raise RangesDontAbut(f"ranges [{a.r},{a.s}] and [{b.r},{b.s}] do not abut")


def compose_pgcs(parts, stream, max_tries: int = 200, amp_fan_in: int = 8, collapse_parts: bool = False) -> BuildReport:
    """Combine (n, r_i, r_{i+1})-PGCs into one (n, r_1, r_{t+1})-PGC.

    The parts run side by side; a new layer forms y_j = sum_i a_ji C_i(x)_j with
    uniform a, and a bounded fan-in random layer restores output weight; that
    last layer is collapsed into the combination layer (depth max + 1).  With
    ``collapse_parts`` the combination is collapsed into the parts' output layers
    too (depth max), the bounded output fan-in variant.
    """
    parts = list(parts)
    specs = [p[1] for p in parts]
    _check_abut(specs)
    circuits = [p[0] for p in parts]
    field, n, big = circuits[0].field, specs[0].n, specs[0].n_out
    for c, s in zip(circuits, specs):
        if c.field != field or s.n != n or c.n_inputs != n or c.n_outputs != big:
            raise ArityMismatch("parts must share field, input length and output length")
    seed = stream.seed
    target = PgcSpec(n, specs[0].r, specs[-1].s, specs[0].expansion, specs[0].out_weight_min)
    merged, outs = stack(circuits)
    t = len(circuits)
    comb_gi = np.repeat(np.arange(big), t)
    comb_src = np.stack(outs, axis=1).reshape(-1)
    comb_base = merged.n_nodes
    for attempt in range(1, max_tries + 1):
        alpha = stream.integers(field.q, big * t)
        c1 = merged.append_layer(big, comb_gi, comb_src, alpha)
        gi, pos, coeff = _random_wiring(field, big, big, amp_fan_in, stream)
        c2 = c1.append_layer(big, gi, comb_base + pos, coeff)
        c3 = collapse_final_layer(c2)
        if collapse_parts:
            c3 = collapse_final_layer(c3)
        verdict = check_detector(c3, target.detector(), stream)
        if verdict.ok:
            return _report(c3, target, verdict.status, attempt, seed, parts=t, collapse_parts=collapse_parts,
                           part_wires=[c.wire_count() for c in circuits])
    raise Exhausted(f"composition of {t} PGCs not found in {max_tries} tries", stage="compose")


def reduce_pgc(field: FieldSpec, n: int, r: float, s: int, t: int,
               inner: Callable[[int, int, object], BuildReport], stream,
               max_tries: int = 200, config: GadgetConfig | None = None) -> BuildReport:
    """(n, s, t)-PGC as condenser -> inner (n/r, s, n/r)-PGC -> output amplifier.

    ``inner(n_small, s, stream)`` must return a BuildReport for the condensed size.
    Depth is depth(inner) + 2.
    """
    cfg = config or GadgetConfig()
    if not cfg.c0 <= r <= n:
        raise BadShape(f"reduction needs c0 <= r <= n (c0={cfg.c0}, r={r}, n={n})")
    if not 1 <= s <= t <= n / r**1.5 + 1e-9:
        raise BadShape(f"reduction needs 1 <= s <= t <= n/r^1.5 (s={s}, t={t})")
    seed = stream.seed
    n_small = math.floor(n / r + 1e-9)
    target = PgcSpec(n, s, t, cfg.expansion)
    try:
        inner_rep = inner(n_small, s, stream)
    except Exhausted as exc:
        raise Exhausted(f"inner stage exhausted: {exc}", stage="inner") from exc
    inner_c = inner_rep.circuit
    if inner_c.n_inputs != n_small:
        raise ArityMismatch("inner PGC has the wrong input length")
    statuses = []
    for attempt in range(1, max_tries + 1):
        try:
            cond = build_condenser(field, n, r, s, stream, max_tries, cfg.condenser_fan_out, cfg.c0, upper=t)
        except Exhausted as exc:
            raise Exhausted(f"condenser stage exhausted: {exc}", stage="condenser") from exc
        amp = sample_output_amplifier(field, inner_c.n_outputs, cfg.expansion * n, stream, cfg.output_fan_in)
        chain = serial_compose(serial_compose(cond.circuit, inner_c), amp)
        verdict = check_detector(chain, target.detector(), stream)
        statuses.append(verdict.status)
        if verdict.ok:
            return _report(chain, target, _merge_status(verdict.status, inner_rep.verified), attempt, seed,
                           stages={"condenser": cond.verified, "inner": inner_rep.verified},
                           inner_depth=inner_c.depth(), condensed=n_small)
    raise Exhausted(f"reduction chain not verified in {max_tries} tries", stage="chain")


def _halving_bands(n: int, lo: int, hi: int) -> list[tuple[int, int, float]]:
    """Weight bands [n/k_i, n/k_{i+1}] with k_1 = n/lo and k halving, clipped to hi."""
    bands = []
    k = n / lo
    start = lo
    while start < hi or not bands:
        k_next = k / 2
        end = min(hi, max(start + 1, math.ceil(n / k_next - 1e-9))) if k_next > 1 else hi
        end = max(end, start)
        bands.append((start, end, k))
        if end >= hi:
            break
        start, k = end, k_next
    return bands


def _depth2_stage(field, n, band_lo, band_hi, k_i, log_r, cfg, stream, max_tries):
    """One (n, band_lo, band_hi)-PGC: random middle layer then output amplifier."""
    big = cfg.expansion * n
    n_mid = max(1, math.ceil(cfg.c_mid * (n / k_i) * max(1.0, log_r)))
    n_mid = min(n_mid, big // 3)
    reads = max(1, math.ceil(cfg.c_fan * k_i))
    spec = PgcSpec(n, band_lo, band_hi, cfg.expansion)
    for attempt in range(1, max_tries + 1):
        # sources drawn with repetition; duplicates merge in the layer
        gi = np.repeat(np.arange(n_mid), reads)
        src = stream.integers(n, gi.size)
        coeff = stream.integers(field.q, gi.size)
        mid = _depth1(field, n, n_mid, gi, src, coeff)
        amp = sample_output_amplifier(field, n_mid, big, stream, cfg.output_fan_in)
        c = serial_compose(mid, amp)
        verdict = check_detector(c, spec.detector(), stream)
        if verdict.ok:
            return c, spec, verdict.status, attempt
    raise Exhausted(f"depth-2 stage [{band_lo},{band_hi}] not found in {max_tries} tries", stage="depth2_stage")


def build_depth2_band(field: FieldSpec, n: int, lo: int, hi: int, stream, max_tries: int = 200,
                      config: GadgetConfig | None = None) -> BuildReport:
    """Depth-2 (n, lo, hi)-PGC from halving-schedule stages, composed with collapse."""
    cfg = config or GadgetConfig()
    seed = stream.seed
    r = n / lo
    log_r = math.log2(r) if r > 1 else 1.0
    stages, statuses, tries = [], [], 0
    for band_lo, band_hi, k_i in _halving_bands(n, lo, hi):
        c, spec, status, att = _depth2_stage(field, n, band_lo, band_hi, k_i, log_r, cfg, stream, max_tries)
        stages.append((c, spec))
        statuses.append(status)
        tries += att
    if len(stages) == 1:
        c, spec = stages[0]
        return _report(c, PgcSpec(n, lo, hi, cfg.expansion), statuses[0], tries, seed,
                       bands=[[s.r, s.s] for _, s in stages], stage_status=statuses)
    rep = compose_pgcs(stages, stream, max_tries, cfg.amp_fan_in, collapse_parts=True)
    rep.tries += tries
    rep.seed = seed
    rep.details.update(bands=[[s.r, s.s] for _, s in stages], stage_status=statuses)
    return rep


def build_depth2_pgc(field: FieldSpec, n: int, r: float, stream, max_tries: int = 200,
                     config: GadgetConfig | None = None) -> BuildReport:
    """(n, n/r, n)-PGC of depth 2."""
    if not 2 <= r <= n:
        raise BadShape(f"depth-2 PGC needs 2 <= r <= n (r={r}, n={n})")
    return build_depth2_band(field, n, max(1, math.ceil(n / r - 1e-9)), n, stream, max_tries, config)


# --- good codes -----------------------------------------------------------------

def build_direct_good_code(field: FieldSpec, n: int, stream, max_tries: int = 200, expansion: int = 32) -> BuildReport:
    """Uniform random n x (expansion n) generator, accepted once every nonzero input has weight >= expansion*n/8."""
    spec = PgcSpec(n, 1, n, expansion)
    seed = stream.seed
    for attempt in range(1, max_tries + 1):
        gen = stream.integers(field.q, n * spec.n_out).reshape(n, spec.n_out)
        c = LinearCircuit.from_matrix(field, gen)
        verdict = check_detector(c, spec.detector(), stream)
        if verdict.ok:
            return _report(c, spec, verdict.status, attempt, seed, mode="direct")
    raise Exhausted(f"direct good code (n={n}) not found in {max_tries} tries", stage="direct")


def ackermann_thresholds(n: int, d: int, c0: float) -> list[float]:
    """Increasing r-values c0 = r_1 < r_2 < ... splitting weights below n/c0.

    Depth 4 follows k_{i+1} = 2^sqrt(k_i); depth 2k >= 6 follows
    r_{j+1} = A(k-1, r_j).  The list ends with the first value >= n.
    """
    out = [float(c0)]
    while out[-1] < n:
        cur = out[-1]
        if d == 4:
            nxt = 2.0 ** math.sqrt(cur)
        else:
            try:
                nxt = float(ackermann(d // 2 - 1, max(1, math.ceil(cur)), cap=max(2, 2 * n)))
            except BeyondCap:
                nxt = float(2 * n)
        if nxt <= cur:
            nxt = 2 * cur
        out.append(nxt)
    return out


def _pgc_for_range(field, n, lo, hi, d, cfg, stream, max_tries, log):
    """(n, lo, hi)-PGC with depth <= d following the recursion schedule."""
    if d < 4 or n / lo <= cfg.c0:
        rep = build_depth2_band(field, n, lo, hi, stream, max_tries, cfg)
        log.append({"n": n, "band": [lo, hi], "method": "depth2", "depth": rep.depth, "verified": rep.verified})
        return rep
    top_lo = max(lo, math.ceil(n / cfg.c0 - 1e-9))
    bands = []
    if top_lo < hi:
        bands.append((top_lo, hi))
    cuts = ackermann_thresholds(n, d, cfg.c0)
    for r_cur, r_next in zip(cuts, cuts[1:]):
        b_hi = min(hi, math.ceil(n / r_cur - 1e-9))
        b_lo = max(lo, math.ceil(n / r_next - 1e-9), 1)
        if b_lo >= b_hi:
            continue
        bands.append((b_lo, b_hi))
        if b_lo <= lo:
            break
    bands.sort()
    # abutting, strictly increasing starts
    fixed = []
    for b_lo, b_hi in bands:
        if fixed and b_lo > fixed[-1][1] + 1:
            b_lo = fixed[-1][1]
        if not fixed or b_lo > fixed[-1][0]:
            fixed.append((b_lo, b_hi))
    if fixed[0][0] > lo:
        fixed[0] = (lo, fixed[0][1])
    parts = []
    for b_lo, b_hi in fixed:
        parts.append((_band(field, n, b_lo, b_hi, d, cfg, stream, max_tries, log), PgcSpec(n, b_lo, b_hi, cfg.expansion)))
    if len(parts) == 1:
        return parts[0][0]
    rep = compose_pgcs([(p.circuit, s) for p, s in parts], stream, max_tries, cfg.amp_fan_in, collapse_parts=True)
    rep.verified = _merge_status(rep.verified, *[p.verified for p, _ in parts])
    return rep


def _band(field, n, lo, hi, d, cfg, stream, max_tries, log):
    """A single band: reduction with an inner PGC of depth d - 2, else depth 2."""
    r = (n / hi) ** (2 / 3)
    n_small = math.floor(n / r + 1e-9) if r > 0 else 0
    if d >= 4 and r >= cfg.c0 and n_small >= hi and lo <= n / r**1.5 + 1e-9:
        def inner(m, s, st):
            return _pgc_for_range(field, m, s, m, d - 2, cfg, st, max_tries, log)
        try:
            rep = reduce_pgc(field, n, r, lo, hi, inner, stream, max_tries, cfg)
            log.append({"n": n, "band": [lo, hi], "method": "reduction", "r": r, "depth": rep.depth,
                        "verified": rep.verified})
            return rep
        except Exhausted as exc:
            log.append({"n": n, "band": [lo, hi], "method": "reduction_exhausted", "stage": exc.extra.get("stage")})
    rep = build_depth2_band(field, n, lo, hi, stream, max_tries, cfg)
    log.append({"n": n, "band": [lo, hi], "method": "depth2", "depth": rep.depth, "verified": rep.verified})
    return rep


def build_good_code(field: FieldSpec, n: int, d: int, config: GadgetConfig | None = None, stream=None,
                    force_recursive: bool = False) -> BuildReport:
    """Linear map F_q^n -> F_q^{32n} with every nonzero input of weight >= 4n, depth <= d."""
    cfg = config or GadgetConfig()
    if d < 2:
        raise DepthBudgetTooSmall(f"depth budget {d} < 2")
    d_even = d - (d % 2)
    seed = stream.seed
    if n <= cfg.n_small and not force_recursive:
        rep = build_direct_good_code(field, n, stream, cfg.max_tries, cfg.expansion)
        rep.details.update(depth_budget=d)
        return rep
    log: list[dict] = []
    if n == 1:
        rep = build_direct_good_code(field, n, stream, cfg.max_tries, cfg.expansion)
    else:
        rep = _pgc_for_range(field, n, 1, n, d_even, cfg, stream, cfg.max_tries, log)
    rep.seed = seed
    rep.spec = asdict(PgcSpec(n, 1, n, cfg.expansion))
    rep.details.update(mode="recursive", depth_budget=d, bands=log, lambda_d=lam(d_even, n))
    if rep.depth > d:
        raise AssertionError("construction exceeded its depth budget")
    return rep


# --- volume bound -----------------------------------------------------------------

def ball_volume(n: int, radius: int, q: int) -> int:
    """Exact number of vectors of F_q^n with weight <= radius."""
    if not 0 <= radius <= n:
        raise DomainError("radius must lie in [0, n]")
    return sum(math.comb(n, i) * (q - 1) ** i for i in range(radius + 1))


def entropy_volume_bound(n: int, gamma: float, q: int) -> float:
    """q^(H_q(gamma) n), the entropy bound on the radius-gamma*n ball."""
    if not 0 <= gamma <= 1 - 1 / q + 1e-12:
        raise DomainError("gamma must lie in [0, 1 - 1/q]")
    return float(q ** (entropy_q(min(gamma, 1 - 1 / q), q) * n))
