"""Deterministic keyed random streams.

Every stochastic operation in the package draws from a counter-based
Philox generator whose key is derived from a base seed plus a stream
label. Independent pieces of work (grid cells, clients, epochs) therefore
get independent, reproducible streams regardless of execution order or
worker count.
"""

from __future__ import annotations

import numpy as np

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def _canonical(part) -> str:
    # floats rendered at 17 significant digits so hashing round-trips
    if isinstance(part, float):
        return format(part, ".17g")
    return str(part)


def fnv1a64(*parts) -> int:
    """64-bit FNV-1a hash of the canonical string forms of ``parts``.

    Parts are separated by a 0x1F byte so ("ab", "c") and ("a", "bc")
    hash differently.
    """
    h = _FNV_OFFSET
    for part in parts:
        data = _canonical(part).encode("utf-8") + b"\x1f"
        for byte in data:
            h ^= byte
            h = (h * _FNV_PRIME) & _MASK64
    return h


def stream(seed: int, *labels) -> np.random.Generator:
    """Generator for the independent stream identified by (seed, labels)."""
    return np.random.Generator(np.random.Philox(key=fnv1a64(seed, *labels)))
