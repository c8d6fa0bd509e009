"""Labelled seed derivation so every randomised step has its own stream."""
from __future__ import annotations

import zlib

import numpy as np


def _label_word(label) -> int:
    if isinstance(label, (int, np.integer)) and label >= 0:
        return int(label)
    return zlib.crc32(str(label).encode("utf-8"))


def derive_seed(master: int, *labels) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master), *(_label_word(x) for x in labels)])


def derive_rng(master: int, *labels) -> np.random.Generator:
    """Independent generator for ``(master, *labels)``; stable across runs and platforms."""
    return np.random.default_rng(derive_seed(master, *labels))


def child_int(rng: np.random.Generator) -> int:
    """Draw a fresh integer seed from ``rng`` for handing to a sub-component."""
    return int(rng.integers(0, 2**63 - 1))
