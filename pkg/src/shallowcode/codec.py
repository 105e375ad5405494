"""Capacity-approaching codes: mother good code followed by a random-coefficient disperser layer.

The encoder is x -> D_{H,a}(C_base(x)) where C_base is a good code F_q^k -> F_q^{32k}
and output j of D_{H,a} is sum over edges (i, j) of H of a(i, j) * C_base(x)_i.
Decoding outputs the unique codeword typical for the received word.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import limits
from .channel import ChannelSpec, capacity, entropy_bits, transmit
from .circuit import LinearCircuit, collapse_final_layer, to_generator_matrix
from .disperser import BipartiteGraph, find_disperser
from .errors import DomainError, Exhausted, PreconditionFailed, RateAboveCapacity, TooLarge, TooSmall
from .gadgets import GadgetConfig, build_direct_good_code, build_good_code
from .galois import FieldSpec, make_field
from .rng import Stream
from .typical import TypicalParams, _typical_mask, all_vectors

CSV_COLUMNS = ["seed", "n", "k", "q", "rate", "eps", "gamma", "trials", "failures",
               "estimate", "stderr", "wires", "depth", "verified"]

FAIL = None


@dataclass
class CodecConfig:
    depth: int = 4
    gamma_left: float | None = None  # defaults to weight target / (R k) = 1/8
    disperser_degree: int | None = None  # None: smallest power of two that verifies
    disperser_tries: int = 20
    gadgets: GadgetConfig = field(default_factory=GadgetConfig)


@dataclass
class CodeInstance:
    field: FieldSpec
    k: int
    n: int
    encoder: LinearCircuit
    gen: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.gen.setflags(write=False)
        self._codewords = None

    def encode(self, m) -> np.ndarray:
        m = np.asarray(m, dtype=np.int64)
        return self.field.matmul(m.reshape(-1, self.k), self.gen).reshape(m.shape[:-1] + (self.n,))

    def codewords(self) -> np.ndarray:
        """All q^k codewords, row i is the encoding of message index i (base q, first symbol most significant)."""
        if self._codewords is None:
            q = self.field.q
            if q**self.k > limits.get("decode_messages"):
                raise TooLarge(f"q^k = {q**self.k} exceeds the decoder cap")
            self._codewords = self.field.matmul(all_vectors(q, self.k).astype(np.int64), self.gen)
        return self._codewords

    def to_json(self) -> dict:
        return {"circuit": self.encoder.to_json(), "k": self.k, "n": self.n, "meta": self.meta}

    @classmethod
    def from_json(cls, obj: dict) -> "CodeInstance":
        enc = LinearCircuit.from_json(obj["circuit"])
        return cls(enc.field, int(obj["k"]), int(obj["n"]), enc, to_generator_matrix(enc), dict(obj.get("meta", {})))


@dataclass(frozen=True)
class DecodeResult:
    outcome: tuple | None  # the message, or None for FAIL
    candidates_found: int

    @property
    def failed(self) -> bool:
        return self.outcome is None


def message_index(m, q: int) -> int:
    out = 0
    for v in m:
        out = out * q + int(v)
    return out


def index_message(i: int, q: int, k: int) -> tuple:
    out = []
    for _ in range(k):
        out.append(i % q)
        i //= q
    return tuple(reversed(out))


def default_eps(channel: ChannelSpec, n: int) -> float:
    row = channel.row
    p_min = float(row[row > 0].min())
    return max(1.0 / n, p_min / 2)


def _auto_disperser(n_left, n_right, gamma_left, gamma, stream, degree, tries):
    if degree is not None:
        return find_disperser(n_left, n_right, min(degree, n_right), gamma_left, gamma, stream, tries)
    d = 2
    while True:
        try:
            return find_disperser(n_left, n_right, min(d, n_right), gamma_left, gamma, stream, tries)
        except Exhausted:
            if d >= n_right:
                raise
            d *= 2


def build_capacity_code(channel: ChannelSpec, rate: float, n: int, gamma: float = 0.05, seed: int = 0,
                        config: CodecConfig | None = None, allow_above_capacity: bool = False) -> CodeInstance:
    """Encoder D_{H,a}(C_base(x)) with the D layer collapsed into the mother code's last layer.

    ``allow_above_capacity`` lifts the rate guard so converse-side behaviour can be measured.
    """
    cfg = config or CodecConfig()
    cap = capacity(channel)
    if rate >= cap and not allow_above_capacity:
        raise RateAboveCapacity(f"rate {rate} >= capacity {cap:.6g}")
    fld = make_field(channel.q)
    k = math.floor(rate * n / math.log2(channel.q) + 1e-9)
    if k < 1:
        raise TooSmall(f"rate {rate} at n={n} gives k = {k}")
    stream = Stream(seed)
    gcfg = cfg.gadgets
    mode = "direct" if k <= gcfg.n_small else "recursive"
    try:
        mother = build_good_code(fld, k, cfg.depth, gcfg, stream.substream(0))
    except Exhausted:
        mode = "direct_fallback"
        mother = build_direct_good_code(fld, k, stream.substream(3), gcfg.max_tries, gcfg.expansion)
    big = mother.circuit.n_outputs
    gamma_left = cfg.gamma_left or math.ceil(gcfg.expansion * k / 8) / big
    graph = _auto_disperser(big, n, gamma_left, gamma, stream.substream(1), cfg.disperser_degree, cfg.disperser_tries)
    edges = np.array(graph.edges(), dtype=np.int64).reshape(-1, 2)
    alpha = stream.substream(2).integers(fld.q, len(edges))
    out_nodes = mother.circuit.output_nodes()
    with_d = mother.circuit.append_layer(n, edges[:, 1], out_nodes[edges[:, 0]], alpha)
    encoder = collapse_final_layer(with_d)
    gen = to_generator_matrix(encoder)
    meta = {
        "seed": seed,
        "channel": channel.digest(),
        "rate": rate,
        "rate_bits": k * math.log2(fld.q) / n,
        "capacity": cap,
        "gamma": gamma,
        "gamma_left": gamma_left,
        "mother_mode": mode,
        "mother_verified": mother.verified,
        "mother_depth": mother.depth,
        "mother_wires": mother.wire_count,
        "disperser_degree": graph.meta.get("degree"),
        "disperser_tries": graph.meta.get("tries"),
        "disperser_verified": graph.meta.get("verified"),
        "wires": encoder.wire_count(),
        "depth": encoder.depth(),
        "above_capacity": rate >= cap,
    }
    return CodeInstance(fld, k, n, encoder, gen, meta)


# --- decoding ----------------------------------------------------------------

def _candidate_mask(inst: CodeInstance, params: TypicalParams, y) -> np.ndarray:
    cw = inst.codewords()
    z = params.channel.sigma[np.asarray(y)[None, :], cw]
    return _typical_mask(params, z)


def decode_typical(inst: CodeInstance, channel: ChannelSpec, eps: float, y) -> DecodeResult:
    """Unique message whose codeword is in Typical(y, eps), else FAIL."""
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (inst.n,):
        raise DomainError("received word has the wrong length")
    params = TypicalParams(channel, inst.n, eps)
    hits = np.flatnonzero(_candidate_mask(inst, params, y))
    if hits.size == 1:
        return DecodeResult(index_message(int(hits[0]), inst.field.q, inst.k), 1)
    return DecodeResult(FAIL, int(hits.size))


def _gf2_nullspace_rows(gen: np.ndarray) -> tuple[np.ndarray, int]:
    """Parity checks P (rows) with P c = 0 for every codeword c, and the rank of ``gen``."""
    a = gen.copy() % 2
    k, n = a.shape
    pivots = []
    row = 0
    for col in range(n):
        sel = np.flatnonzero(a[row:, col]) if row < k else []
        if len(sel) == 0:
            continue
        piv = row + sel[0]
        a[[row, piv]] = a[[piv, row]]
        others = np.flatnonzero(a[:, col])
        others = others[others != row]
        a[others] ^= a[row]
        pivots.append(col)
        row += 1
        if row == k:
            break
    rank = row
    free = [c for c in range(n) if c not in set(pivots)]
    checks = np.zeros((len(free), n), dtype=np.int64)
    for t, f in enumerate(free):
        checks[t, f] = 1
        for r_i, p in enumerate(pivots):
            checks[t, p] = a[r_i, f]
    return checks, rank


class SyndromeDecoder:
    """Exact typical-set decoding for binary codes by meet-in-the-middle over error halves.

    For q = 2 with z = x xor y, the typical codewords are c = y + e with e in the
    coset of the code and wt(e) in the admissible window.  Counting such e splits
    into the two halves of e by (partial syndrome, weight) tables.
    """

    def __init__(self, inst: CodeInstance, channel: ChannelSpec, eps: float):
        if inst.field.q != 2 or not np.array_equal(channel.sigma[1], [1, 0]):
            raise PreconditionFailed("syndrome decoding needs a binary channel with z = x xor y")
        self.inst = inst
        params = TypicalParams(channel, inst.n, eps)
        n = inst.n
        prof = (np.arange(n)[None, :] < np.arange(n + 1)[:, None]).astype(np.int64)
        self.window = _typical_mask(params, prof)
        checks, rank = _gf2_nullspace_rows(inst.gen)
        self.rank = rank
        self.multiplicity = 2 ** (inst.k - rank)
        r = checks.shape[0]
        if r > 22 or n > 48:
            raise TooLarge(f"syndrome tables for n={n}, {r} checks are too large")
        self.checks = checks
        col_bits = (checks * (1 << np.arange(r))[:, None]).sum(axis=0).astype(np.int64)
        self.col_bits = col_bits
        h = n // 2
        self.h = h
        s1, w1 = self._half_table(col_bits[:h])
        s2, w2 = self._half_table(col_bits[h:])
        size = 1 << r
        self.t1 = np.bincount(s1 * (h + 1) + w1, minlength=size * (h + 1)).reshape(size, h + 1).astype(np.float64)
        h2 = n - h
        self.t2 = np.bincount(s2 * (h2 + 1) + w2, minlength=size * (h2 + 1)).reshape(size, h2 + 1).astype(np.float64)
        mask = (np.arange(h + 1)[:, None] + np.arange(h2 + 1)[None, :])
        self.t1m = self.t1 @ self.window[mask].astype(np.float64)
        self.size = size

    @staticmethod
    def _half_table(cols):
        syn = np.zeros(1, dtype=np.int64)
        wt = np.zeros(1, dtype=np.int64)
        for c in cols:
            syn = np.concatenate([syn, syn ^ c])
            wt = np.concatenate([wt, wt + 1])
        return syn, wt

    def syndrome(self, v) -> int:
        v = np.asarray(v, dtype=np.int64)
        return int(np.bitwise_xor.reduce(self.col_bits[v != 0], initial=0))

    def count(self, y) -> int:
        """Number of messages whose codeword is typical for ``y``."""
        s = self.syndrome(y)
        idx = np.arange(self.size) ^ s
        total = float((self.t1m * self.t2[idx]).sum())
        return int(round(total)) * self.multiplicity

    def decode_error(self, y, sent_codeword) -> bool:
        """True when decoding ``y`` recovers the sent message."""
        e_w = int(np.count_nonzero(np.asarray(y) != np.asarray(sent_codeword)))
        return self.count(y) == 1 and bool(self.window[e_w])


def _decoder_kind(inst: CodeInstance, channel: ChannelSpec) -> str:
    if inst.field.q**inst.k <= limits.get("decode_messages"):
        return "enumerate"
    if inst.field.q == 2 and np.array_equal(channel.sigma[1], [1, 0]):
        return "syndrome"
    raise TooLarge(f"q^k = {inst.field.q**inst.k} exceeds the decoder cap")


def failure_prob_exact(inst: CodeInstance, channel: ChannelSpec, eps: float, m) -> float:
    """sum_y p(y | Enc(m)) [Dec(y) != m] over all q^n received words."""
    q, n = inst.field.q, inst.n
    if q**n > limits.get("exact_outputs"):
        raise TooLarge(f"q^n = {q**n} exceeds the exact-enumeration cap")
    m = tuple(int(v) for v in m)
    x = inst.encode(np.array(m))
    ys = all_vectors(q, n).astype(np.int64)
    probs = np.prod(channel.transition[x[None, :], ys], axis=1)
    total = 0.0
    for y, p in zip(ys, probs):
        if p == 0:
            continue
        if decode_typical(inst, channel, eps, y).outcome != m:
            total += float(p)
    return total


def error_terms_exact(inst: CodeInstance, channel: ChannelSpec, eps: float, m) -> tuple[float, float]:
    """(P[Enc(m) not typical], P[some other codeword typical]) by enumeration of outputs."""
    q, n = inst.field.q, inst.n
    if q**n > limits.get("exact_outputs"):
        raise TooLarge(f"q^n = {q**n} exceeds the exact-enumeration cap")
    params = TypicalParams(channel, n, eps)
    idx = message_index(m, q)
    x = inst.encode(np.array(m))
    ys = all_vectors(q, n).astype(np.int64)
    probs = np.prod(channel.transition[x[None, :], ys], axis=1)
    e1 = e2 = 0.0
    for y, p in zip(ys, probs):
        mask = _candidate_mask(inst, params, y)
        if not mask[idx]:
            e1 += float(p)
        mask[idx] = False
        if mask.any():
            e2 += float(p)
    return e1, e2


@dataclass(frozen=True)
class MessageEstimate:
    message: tuple
    trials: int
    failures: int
    estimate: float
    stderr: float


@dataclass(frozen=True)
class FailureEstimate:
    per_message: tuple
    max_estimate: float
    max_stderr: float
    worst: tuple
    decoder: str


def _mc_one(inst, channel, eps, m, trials, stream, decoder, syn):
    x = inst.encode(np.array(m))
    params = TypicalParams(channel, inst.n, eps)
    idx = message_index(m, inst.field.q)
    failures = 0
    for t in range(trials):
        y = transmit(channel, x, stream.substream(t))
        if decoder == "enumerate":
            mask = _candidate_mask(inst, params, y)
            ok = bool(mask[idx]) and int(mask.sum()) == 1
        else:
            ok = syn.decode_error(y, x)
        failures += not ok
    est = failures / trials if trials else 0.0
    se = math.sqrt(est * (1 - est) / trials) if trials else 0.0
    return MessageEstimate(m, trials, failures, est, se)


def failure_prob_mc(inst: CodeInstance, channel: ChannelSpec, eps: float, message_sample_size: int,
                    trials: int, stream, threads: int = 1) -> FailureEstimate:
    """Monte Carlo failure rate for the zero message plus random messages; trial t uses substream t."""
    decoder = _decoder_kind(inst, channel)
    syn = SyndromeDecoder(inst, channel, eps) if decoder == "syndrome" else None
    q, k = inst.field.q, inst.k
    msgs = [tuple([0] * k)]
    pick = stream.substream(0)
    while len(msgs) < max(1, message_sample_size):
        cand = tuple(int(v) for v in pick.integers(q, k))
        if cand not in msgs or q**k <= len(msgs):
            msgs.append(cand)
    jobs = [(m, stream.substream(i + 1)) for i, m in enumerate(msgs)]
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(threads) as ex:
            res = list(ex.map(lambda j: _mc_one(inst, channel, eps, j[0], trials, j[1], decoder, syn), jobs))
    else:
        res = [_mc_one(inst, channel, eps, m, trials, s, decoder, syn) for m, s in jobs]
    worst = max(res, key=lambda r: r.estimate)
    return FailureEstimate(tuple(res), worst.estimate, worst.stderr, worst.message, decoder)


def restriction_uniformity_check(graph: BipartiteGraph, x, q: int) -> bool:
    """Over all coefficient assignments, D_{H,a}(x) restricted to N(supp x) is exactly uniform."""
    fld = make_field(q)
    x = np.asarray(x, dtype=np.int64)
    if x.shape != (graph.n_left,):
        raise DomainError("x must have one entry per left vertex")
    supp = np.flatnonzero(x)
    if supp.size == 0:
        raise PreconditionFailed("x must be nonzero")
    edges = np.array(graph.edges(), dtype=np.int64).reshape(-1, 2)
    n_e = len(edges)
    if q**n_e > limits.get("uniformity_assignments"):
        raise TooLarge(f"q^|E| = {q**n_e} exceeds the enumeration cap")
    s_nodes = sorted(graph.neighbourhood(supp.tolist()))
    pos = {v: i for i, v in enumerate(s_nodes)}
    n_s = len(s_nodes)
    counts = np.zeros(q**n_s, dtype=np.int64)
    weights = q ** np.arange(n_s - 1, -1, -1, dtype=np.int64)
    xs = x[edges[:, 0]]
    cols = np.array([pos.get(int(v), -1) for v in edges[:, 1]], dtype=np.int64)
    for start in range(0, q**n_e, 1 << 16):
        stop = min(q**n_e, start + (1 << 16))
        idx = np.arange(start, stop, dtype=np.int64)
        alpha = (idx[:, None] // q ** np.arange(n_e - 1, -1, -1, dtype=np.int64)[None, :]) % q
        terms = fld.vmul(alpha, xs[None, :])
        vals = np.zeros((len(idx), n_s), dtype=np.int64)
        for e in range(n_e):
            if cols[e] >= 0:
                vals[:, cols[e]] = fld.vadd(vals[:, cols[e]], terms[:, e])
        counts += np.bincount(vals @ weights, minlength=q**n_s)
    return bool((counts == counts[0]).all())


def predicted_exponent(channel: ChannelSpec, rate: float, gamma: float, eps: float | None = None) -> float:
    """r - (1 - gamma) log2 q + H_2(row); the vanishing term in eps is dropped."""
    return float(rate - (1 - gamma) * math.log2(channel.q) + entropy_bits(channel.row))


def fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def csv_row(inst: CodeInstance, eps: float, gamma: float, est: MessageEstimate | None, trials: int) -> list[str]:
    meta = inst.meta
    failures = est.failures if est else 0
    return [fmt(v) for v in (
        meta.get("seed", 0), inst.n, inst.k, inst.field.q, float(meta.get("rate", inst.k / inst.n)), float(eps),
        float(gamma), trials, failures, float(est.estimate if est else 0.0), float(est.stderr if est else 0.0),
        inst.encoder.wire_count(), inst.encoder.depth(), meta.get("mother_verified", "unknown"),
    )]


def write_csv(rows, header: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r)
    return buf.getvalue()
