"""Deterministic child random streams.

A child stream is keyed by ``(master_seed, label, *indices)``: the label is
hashed with CRC-32 and the tuple is fed to :class:`numpy.random.SeedSequence`.
Work split across threads draws from per-item children, so results do not
depend on how many workers run.
"""
from __future__ import annotations

import zlib

import numpy as np


def child_seed_sequence(master_seed: int, label: str, *indices: int) -> np.random.SeedSequence:
    if master_seed < 0:
        raise ValueError("seed must be non-negative")
    key = [int(master_seed), zlib.crc32(label.encode("utf-8"))] + [int(i) for i in indices]
    return np.random.SeedSequence(key)


def child_rng(master_seed: int, label: str, *indices: int) -> np.random.Generator:
    return np.random.default_rng(child_seed_sequence(master_seed, label, *indices))


def child_seed(master_seed: int, label: str, *indices: int) -> int:
    """A plain 63-bit integer seed for APIs that take an ``int``."""
    words = child_seed_sequence(master_seed, label, *indices).generate_state(2, np.uint32)
    return int((int(words[0]) << 31) ^ int(words[1]))
