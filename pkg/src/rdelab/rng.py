"""Counter-based random streams.

Every stochastic routine in the package derives its generator from a master
seed plus a structured key (generation number, sample index, node path, ...)
through `substream`.  Streams for distinct keys are independent Philox
counters, so results never depend on evaluation order or worker count.
"""

from __future__ import annotations

import hashlib

import numpy as np

_U63 = (1 << 63) - 1


def _as_entropy(part) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part) & _U63
    if isinstance(part, str):
        digest = hashlib.sha256(part.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "little") & _U63
    raise TypeError(f"stream key parts must be int or str, got {type(part)!r}")


def seed_sequence(*key) -> np.random.SeedSequence:
    return np.random.SeedSequence([_as_entropy(p) for p in key])


def substream(*key) -> np.random.Generator:
    """Independent generator for a structured key, e.g. (seed, gen, 'noise')."""
    return np.random.Generator(np.random.Philox(seed_sequence(*key)))


def spawn_streams(base: np.random.SeedSequence, n: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.Philox(s)) for s in base.spawn(n)]
