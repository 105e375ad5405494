"""Brute-force size caps.

Defaults can be overridden with ``SHALLOWCODE_LIMITS``, a comma separated list
of ``name=value`` pairs, e.g. ``SHALLOWCODE_LIMITS="decode_messages=33554432"``.
Values accept python integer literals and ``2**k`` powers.
"""

from __future__ import annotations

import os

DEFAULTS = {
    "field_order": 2**16,
    "table_order": 2**12,
    "generator_inputs": 2**12,
    "enumerate_typical": 2**22,
    "count_typical_n": 64,
    "count_typical_q": 8,
    "exact_outputs": 2**20,
    "disperser_subsets": 10**7,
    "detector_inputs": 10**7,
    "decode_messages": 2**24,
    "uniformity_assignments": 2**24,
    "syndrome_patterns": 2**22,
}


def _parse_value(text: str) -> int:
    text = text.strip()
    if "**" in text:
        base, exp = text.split("**", 1)
        return int(base) ** int(exp)
    return int(text)


def get(name: str) -> int:
    """Current cap for ``name`` (environment override first)."""
    raw = os.environ.get("SHALLOWCODE_LIMITS", "")
    for item in raw.split(","):
        if "=" not in item:
            continue
        key, value = item.split("=", 1)
        if key.strip() == name:
            return _parse_value(value)
    return DEFAULTS[name]
