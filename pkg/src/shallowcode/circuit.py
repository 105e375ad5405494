"""Layered circuits of unbounded fan-in weighted addition gates over F_q.

Nodes are numbered globally: inputs ``0..n_inputs-1`` first, then the gates of
layer 0, layer 1, ...  Each layer stores its wires in CSR form (``indptr``,
``src``, ``coeff``), so a gate is the slice ``indptr[g]:indptr[g+1]``.

Gates are kept canonical: one wire per source, coefficients nonzero.  A gate
whose wires all cancel has no wires and outputs the constant 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import limits
from .errors import (
    ArityMismatch,
    DepthTooSmall,
    FieldMismatch,
    InputLengthMismatch,
    InvalidCircuit,
    LengthMismatch,
    TooManyInputs,
)
from .galois import FieldSpec, field_from_json

_CHUNK = 1 << 22


@dataclass(frozen=True, eq=False)
class Layer:
    indptr: np.ndarray
    src: np.ndarray
    coeff: np.ndarray

    @property
    def n_gates(self) -> int:
        return len(self.indptr) - 1

    @property
    def n_wires(self) -> int:
        return int(self.indptr[-1])

    def fan_in(self) -> np.ndarray:
        return np.diff(self.indptr)


@dataclass(frozen=True)
class Gate:
    """Read-only view of one gate: ``wires`` is a tuple of (ref, coeff)."""

    wires: tuple

    @property
    def fan_in(self) -> int:
        return len(self.wires)


def _segment_sum(field: FieldSpec, vals: np.ndarray, indptr: np.ndarray) -> np.ndarray:
    """Field sums of consecutive column segments of ``vals`` (shape B x E)."""
    # a zero pad column keeps every start index valid for reduceat
    vals = np.concatenate([vals, np.zeros(vals.shape[:-1] + (1,), dtype=np.int64)], axis=-1)
    starts = indptr[:-1]
    empty = indptr[1:] == indptr[:-1]
    if field.m == 1:
        out = np.add.reduceat(vals, starts, axis=-1) % field.p
    elif field.p == 2:
        out = np.bitwise_xor.reduceat(vals, starts, axis=-1)
    else:
        d = field.vdigits(vals)
        out = field.vfrom_digits(np.add.reduceat(d, starts, axis=-2) % field.p)
    out[..., empty] = 0
    return out


def build_layer(field: FieldSpec, n_gates: int, gate_idx, src, coeff) -> Layer:
    """Canonical layer from an unordered wire list; duplicate sources merge."""
    gate_idx = np.asarray(gate_idx, dtype=np.int64)
    src = np.asarray(src, dtype=np.int64)
    coeff = np.asarray(coeff, dtype=np.int64)
    keep = coeff != 0
    gate_idx, src, coeff = gate_idx[keep], src[keep], coeff[keep]
    if gate_idx.size:
        order = np.lexsort((src, gate_idx))
        gate_idx, src, coeff = gate_idx[order], src[order], coeff[order]
        new = np.ones(gate_idx.size, dtype=bool)
        new[1:] = (gate_idx[1:] != gate_idx[:-1]) | (src[1:] != src[:-1])
        if not new.all():
            starts = np.flatnonzero(new)
            bounds = np.append(starts, gate_idx.size)
            coeff = _segment_sum(field, coeff[None, :], bounds)[0]
            gate_idx, src = gate_idx[starts], src[starts]
            keep = coeff != 0
            gate_idx, src, coeff = gate_idx[keep], src[keep], coeff[keep]
    counts = np.bincount(gate_idx, minlength=n_gates) if gate_idx.size else np.zeros(n_gates, dtype=np.int64)
    indptr = np.zeros(n_gates + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    for arr in (indptr, src, coeff):
        arr.setflags(write=False)
    return Layer(indptr, src, coeff)


class LinearCircuit:
    """An immutable layered linear circuit; outputs are the final layer's gates."""

    def __init__(self, field: FieldSpec, n_inputs: int, layers, validate: bool = True):
        self.field = field
        self.n_inputs = int(n_inputs)
        self.layers = tuple(layers)
        offsets = [self.n_inputs]
        for layer in self.layers:
            offsets.append(offsets[-1] + layer.n_gates)
        self.offsets = tuple(offsets)
        if validate:
            self._validate()

    def _validate(self):
        if self.n_inputs < 1 and not self.layers:
            raise InvalidCircuit("circuit needs inputs")
        for idx, layer in enumerate(self.layers):
            if layer.n_gates < 1:
                raise InvalidCircuit(f"layer {idx} is empty")
            if layer.src.size:
                if layer.src.min() < 0 or layer.src.max() >= self.offsets[idx]:
                    raise InvalidCircuit(f"layer {idx} reads a node that is not strictly earlier")
                if layer.coeff.min() <= 0 or layer.coeff.max() >= self.field.q:
                    raise InvalidCircuit(f"layer {idx} has a zero or out-of-range coefficient")

    # --- metrics -----------------------------------------------------------

    @property
    def n_outputs(self) -> int:
        return self.layers[-1].n_gates if self.layers else self.n_inputs

    @property
    def n_nodes(self) -> int:
        return self.offsets[-1]

    def wire_count(self) -> int:
        return sum(layer.n_wires for layer in self.layers)

    def depth(self) -> int:
        return len(self.layers)

    def output_nodes(self) -> np.ndarray:
        return np.arange(self.offsets[-2], self.offsets[-1])

    def max_output_fan_in(self) -> int:
        fan = self.layers[-1].fan_in()
        return int(fan.max()) if fan.size else 0

    def longest_path(self) -> int:
        """Longest input-to-output path, counted in gates."""
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for idx, layer in enumerate(self.layers):
            lo, hi = self.offsets[idx], self.offsets[idx + 1]
            if layer.src.size:
                d = _segment_max(depth[layer.src], layer.indptr)
                depth[lo:hi] = d + 1
            else:
                depth[lo:hi] = 1
        return int(depth[self.offsets[-2]:].max()) if self.layers else 0

    # --- refs ----------------------------------------------------------------

    def node_ref(self, node: int) -> tuple:
        if node < self.n_inputs:
            return ("in", int(node))
        for idx in range(len(self.layers)):
            if node < self.offsets[idx + 1]:
                return ("gate", idx, int(node - self.offsets[idx]))
        raise IndexError(node)

    def ref_node(self, ref) -> int:
        if ref[0] == "in":
            return int(ref[1])
        return self.offsets[ref[1]] + int(ref[2])

    def gate(self, layer: int, index: int) -> Gate:
        lay = self.layers[layer]
        lo, hi = lay.indptr[index], lay.indptr[index + 1]
        return Gate(tuple((self.node_ref(s), int(c)) for s, c in zip(lay.src[lo:hi], lay.coeff[lo:hi])))

    # --- construction ----------------------------------------------------------

    @classmethod
    def from_gates(cls, field: FieldSpec, n_inputs: int, layers) -> "LinearCircuit":
        """Build from nested python lists: ``layers[l][g] = [(ref, coeff), ...]``.

        ``ref`` is ``("in", i)`` or ``("gate", layer, index)``.
        """
        offsets = [n_inputs]
        for gates in layers:
            offsets.append(offsets[-1] + len(gates))
        built = []
        for idx, gates in enumerate(layers):
            gi, src, cf = [], [], []
            for g, wires in enumerate(gates):
                for ref, c in wires:
                    if not 0 <= int(c) < field.q:
                        raise InvalidCircuit(f"coefficient {c} is not a field element")
                    node = int(ref[1]) if ref[0] == "in" else offsets[ref[1]] + int(ref[2])
                    if ref[0] == "gate" and not 0 <= int(ref[2]) < len(layers[ref[1]]):
                        raise InvalidCircuit(f"bad gate reference {ref}")
                    gi.append(g)
                    src.append(node)
                    cf.append(int(c))
            built.append(build_layer(field, len(gates), gi, src, cf))
        return cls(field, n_inputs, built)

    @classmethod
    def from_matrix(cls, field: FieldSpec, gen) -> "LinearCircuit":
        """Depth-1 circuit computing ``x -> x @ gen`` for a k x n matrix."""
        gen = np.asarray(gen, dtype=np.int64)
        rows, cols = np.nonzero(gen.T)
        layer = build_layer(field, gen.shape[1], rows, cols, gen.T[rows, cols])
        return cls(field, gen.shape[0], [layer])

    @classmethod
    def identity(cls, field: FieldSpec, n: int) -> "LinearCircuit":
        return cls.from_matrix(field, np.eye(n, dtype=np.int64))

    def append_layer(self, n_gates: int, gate_idx, src_nodes, coeff) -> "LinearCircuit":
        layer = build_layer(self.field, n_gates, gate_idx, src_nodes, coeff)
        return LinearCircuit(self.field, self.n_inputs, self.layers + (layer,))

    # --- evaluation --------------------------------------------------------

    def evaluate_all(self, x: np.ndarray) -> np.ndarray:
        """Values of every node for a batch ``x`` of shape (B, n_inputs)."""
        x = np.asarray(x, dtype=np.int64)
        vals = np.zeros((x.shape[0], self.n_nodes), dtype=np.int64)
        vals[:, : self.n_inputs] = x
        for idx, layer in enumerate(self.layers):
            lo, hi = self.offsets[idx], self.offsets[idx + 1]
            contrib = self.field.vmul(layer.coeff[None, :], vals[:, layer.src])
            vals[:, lo:hi] = _segment_sum(self.field, contrib, layer.indptr)
        return vals

    def evaluate_batch(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.int64))
        if x.shape[1] != self.n_inputs:
            raise InputLengthMismatch(f"expected {self.n_inputs} inputs, got {x.shape[1]}")
        step = max(1, _CHUNK // max(1, self.wire_count() + self.n_nodes))
        outs = []
        for start in range(0, x.shape[0], step):
            vals = self.evaluate_all(x[start:start + step])
            outs.append(vals[:, self.offsets[-2]:] if self.layers else vals)
        return np.concatenate(outs, axis=0) if outs else np.zeros((0, self.n_outputs), dtype=np.int64)

    def __call__(self, x) -> np.ndarray:
        return evaluate(self, x)

    # --- serialisation -------------------------------------------------------

    def to_json(self) -> dict:
        layers = []
        for idx, layer in enumerate(self.layers):
            gates = []
            for g in range(layer.n_gates):
                lo, hi = layer.indptr[g], layer.indptr[g + 1]
                wires = []
                for s, c in zip(layer.src[lo:hi].tolist(), layer.coeff[lo:hi].tolist()):
                    ref = self.node_ref(s)
                    if ref[0] == "in":
                        wires.append(["in", ref[1], 0, c])
                    else:
                        wires.append(["gate", ref[1], ref[2], c])
                gates.append({"wires": wires})
            layers.append(gates)
        return {"field": self.field.to_json(), "n_inputs": self.n_inputs, "layers": layers}

    @classmethod
    def from_json(cls, obj: dict) -> "LinearCircuit":
        field = field_from_json(obj["field"])
        layers = []
        for gates in obj["layers"]:
            layers.append([
                [((w[0], w[1]) if w[0] == "in" else (w[0], w[1], w[2]), w[3]) for w in gate["wires"]]
                for gate in gates
            ])
        return cls.from_gates(field, int(obj["n_inputs"]), layers)


def _segment_max(vals: np.ndarray, indptr: np.ndarray) -> np.ndarray:
    vals = np.append(vals, 0)
    out = np.maximum.reduceat(vals, indptr[:-1])
    out[indptr[1:] == indptr[:-1]] = 0
    return out


# --- module-level operations ------------------------------------------------

def evaluate(c: LinearCircuit, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    if x.ndim != 1 or x.shape[0] != c.n_inputs:
        raise InputLengthMismatch(f"expected {c.n_inputs} inputs, got shape {x.shape}")
    return c.evaluate_batch(x[None, :])[0]


def wire_count(c: LinearCircuit) -> int:
    return c.wire_count()


def depth(c: LinearCircuit) -> int:
    return c.depth()


def to_generator_matrix(c: LinearCircuit) -> np.ndarray:
    """k x n matrix G with ``evaluate(c, x) == x @ G`` over F_q."""
    if c.n_inputs > limits.get("generator_inputs"):
        raise TooManyInputs(f"{c.n_inputs} inputs exceeds the generator-matrix cap")
    return c.evaluate_batch(np.eye(c.n_inputs, dtype=np.int64))


def serial_compose(c1: LinearCircuit, c2: LinearCircuit) -> LinearCircuit:
    """Circuit computing ``c2(c1(x))`` with depth ``depth(c1) + depth(c2)``."""
    if c1.field != c2.field:
        raise FieldMismatch("circuits are over different fields")
    if c1.n_outputs != c2.n_inputs:
        raise ArityMismatch(f"{c1.n_outputs} outputs feed {c2.n_inputs} inputs")
    if not c1.layers:
        return c2
    out_base = c1.offsets[-2]
    shift = c1.n_nodes - c2.n_inputs
    layers = list(c1.layers)
    for layer in c2.layers:
        src = np.where(layer.src < c2.n_inputs, layer.src + out_base, layer.src + shift)
        src.setflags(write=False)
        layers.append(Layer(layer.indptr, src, layer.coeff))
    return LinearCircuit(c1.field, c1.n_inputs, layers)


def collapse_final_layer(c: LinearCircuit) -> LinearCircuit:
    """Merge the last layer into the one before it; the function is unchanged."""
    if c.depth() < 2:
        raise DepthTooSmall("collapse needs depth >= 2")
    last, prev = c.layers[-1], c.layers[-2]
    prev_lo = c.offsets[-3]
    gate_of_wire = np.repeat(np.arange(last.n_gates), last.fan_in())
    into_prev = last.src >= prev_lo
    # wires that bypass the penultimate layer stay as they are
    keep_g, keep_s, keep_c = gate_of_wire[~into_prev], last.src[~into_prev], last.coeff[~into_prev]
    g, s, cf = gate_of_wire[into_prev], last.src[into_prev] - prev_lo, last.coeff[into_prev]
    lens = prev.indptr[s + 1] - prev.indptr[s]
    total = int(lens.sum())
    if total:
        starts = np.repeat(prev.indptr[s], lens)
        within = np.arange(total) - np.repeat(np.cumsum(lens) - lens, lens)
        pos = starts + within
        exp_g = np.repeat(g, lens)
        exp_s = prev.src[pos]
        exp_c = c.field.vmul(np.repeat(cf, lens), prev.coeff[pos])
    else:
        exp_g = exp_s = exp_c = np.zeros(0, dtype=np.int64)
    layer = build_layer(
        c.field,
        last.n_gates,
        np.concatenate([keep_g, exp_g]),
        np.concatenate([keep_s, exp_s]),
        np.concatenate([keep_c, exp_c]),
    )
    return LinearCircuit(c.field, c.n_inputs, c.layers[:-2] + (layer,))


def stack(parts: list[LinearCircuit]) -> tuple[LinearCircuit, list[np.ndarray]]:
    """Lay circuits on shared inputs side by side.

    Returns the merged circuit (its last layer is not meaningful as an output
    layer on its own) and, per part, the global node ids of that part's outputs.
    """
    field, n_in = parts[0].field, parts[0].n_inputs
    for part in parts:
        if part.field != field:
            raise FieldMismatch("parts are over different fields")
        if part.n_inputs != n_in:
            raise ArityMismatch("parts have different input counts")
    depth_max = max(p.depth() for p in parts)
    # new offset of (part, layer)
    layer_sizes = [sum(p.layers[l].n_gates for p in parts if l < p.depth()) for l in range(depth_max)]
    layer_base = np.concatenate([[n_in], n_in + np.cumsum(layer_sizes)])
    part_shift = []  # per part, per layer: new global id of that part's first gate in the layer
    running = [0] * depth_max
    for p in parts:
        shifts = []
        for l in range(p.depth()):
            shifts.append(int(layer_base[l]) + running[l])
            running[l] += p.layers[l].n_gates
        part_shift.append(shifts)

    def remap(p: LinearCircuit, shifts: list[int], nodes: np.ndarray) -> np.ndarray:
        out = nodes.copy()
        for l in range(p.depth()):
            mask = (nodes >= p.offsets[l]) & (nodes < p.offsets[l + 1])
            out[mask] = nodes[mask] - p.offsets[l] + shifts[l]
        return out

    layers = []
    for l in range(depth_max):
        indptrs, srcs, coeffs = [], [], []
        base = 0
        for p, shifts in zip(parts, part_shift):
            if l >= p.depth():
                continue
            lay = p.layers[l]
            indptrs.append(lay.indptr[1:] + base if indptrs else lay.indptr + base)
            base += lay.n_wires
            srcs.append(remap(p, shifts, lay.src))
            coeffs.append(lay.coeff)
        indptr = np.concatenate(indptrs)
        src = np.concatenate(srcs)
        coeff = np.concatenate(coeffs)
        for arr in (indptr, src, coeff):
            arr.setflags(write=False)
        layers.append(Layer(indptr, src, coeff))
    merged = LinearCircuit(field, n_in, layers)
    outs = [remap(p, s, p.output_nodes()) for p, s in zip(parts, part_shift)]
    return merged, outs


def hamming_weight(v) -> int:
    return int(np.count_nonzero(np.asarray(v)))


def hamming_distance(u, v) -> int:
    u, v = np.asarray(u), np.asarray(v)
    if u.shape != v.shape:
        raise LengthMismatch(f"lengths {u.shape} and {v.shape} differ")
    return int(np.count_nonzero(u != v))
