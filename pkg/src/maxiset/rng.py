"""Counter-based standard normal draws.

The draw for flat coefficient position ``i`` in replication ``r`` under seed
``s`` is a pure function of ``(s, r, i)``: Philox4x64 keyed by ``(s, r)`` is
advanced to counter block ``i // 4`` and word ``i % 4`` is mapped through the
inverse normal CDF.  Any slice of positions can therefore be generated on
its own, in any order, on any worker, and agree with a full draw.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.special import ndtri

from .errors import ConfigError

_MASK64 = (1 << 64) - 1
_WORDS = 4


def parse_seed(text: str | int | None) -> int:
    """Decimal or ``0x`` hex seed; falls back to ``$MAXISET_SEED`` then 0."""
    if text is None:
        text = os.environ.get("MAXISET_SEED", "0")
    if isinstance(text, int):
        return text & _MASK64
    try:
        return int(str(text).strip(), 0) & _MASK64
    except ValueError:
        raise ConfigError(f"seed {text!r} is neither decimal nor 0x-hex") from None


def standard_normals(seed: int, replication: int, start: int, count: int) -> np.ndarray:
    if count <= 0:
        return np.zeros(0)
    gen = np.random.Philox(key=[seed & _MASK64, replication & _MASK64])
    block, offset = divmod(start, _WORDS)
    if block:
        gen.advance(block)
    nblocks = -(-(offset + count) // _WORDS)
    raw = gen.random_raw(nblocks * _WORDS)[offset: offset + count]
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u)
