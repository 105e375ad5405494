import numpy as np
import pytest

from shallowcode.circuit import LinearCircuit
from shallowcode.rng import Stream


def random_circuit(field, k, depth, stream, width=None, max_fan_in=4):
    """Layered circuit with random widths and coefficients.

    Each gate reads distinct sources and its first wire comes from the previous
    layer with a nonzero coefficient, so every layer is live.
    """
    c = LinearCircuit(field, k, [], validate=False)
    for layer in range(depth):
        n_gates = width or 1 + stream.integers(5)
        prev_lo = c.offsets[-2] if c.layers else 0
        n_nodes = c.n_nodes
        gi, src, cf = [], [], []
        for g in range(n_gates):
            first = prev_lo + stream.integers(n_nodes - prev_lo)
            others = [v for v in stream.sample_distinct(n_nodes, min(n_nodes, stream.integers(max_fan_in))) if v != first]
            gi += [g] * (1 + len(others))
            src += [first] + others
            cf += [1 + stream.integers(field.q - 1)] + [int(v) for v in stream.integers(field.q, len(others))]
        c = c.append_layer(n_gates, gi, src, cf)
    return c


@pytest.fixture
def stream():
    return Stream(12345)


# criterion number -> (passed, summary line), filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[num][1])
