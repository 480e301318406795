"""Counter-based random streams derived from one master seed.

A stream is addressed by ``(master seed, label, index)``. The label is
hashed with CRC-32 and, together with the index, forms the spawn key of a
``SeedSequence`` that seeds a Philox generator. Streams for different
indices never depend on how many other streams were drawn, so adding
trials leaves existing trials untouched.
"""
from __future__ import annotations

import zlib

import numpy as np


def label_id(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


def stream(seed: int, label: str, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(label_id(label), int(index)))
    return np.random.Generator(np.random.Philox(ss))
