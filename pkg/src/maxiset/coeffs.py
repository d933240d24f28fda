"""Periodic wavelet coefficient containers.

Coefficients live in one flat array of length ``2**j_max``: slot 0 holds
``alpha00`` and level ``j`` occupies ``[2**j, 2**(j+1))``, so ``beta[j, k]``
sits at flat position ``2**j + k``.  This is the natural output layout of a
pyramid transform and lets every level be a cheap view.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import LevelOutOfRangeError, ShapeError

MAX_DEPTH = 24


def flat_index(j: int, k: int) -> int:
    """Position of ``beta_jk`` in the flat layout; ``alpha00`` sits at 0."""
    if j < 0 or not 0 <= k < (1 << j):
        raise LevelOutOfRangeError(f"invalid wavelet index ({j}, {k})")
    return (1 << j) + k


def level_of(flat: int) -> tuple[int, int]:
    """Inverse of :func:`flat_index` for ``flat >= 1``."""
    j = int(flat).bit_length() - 1
    return j, int(flat) - (1 << j)


class IndexSet(frozenset):
    """A set of ``(j, k)`` wavelet positions with ``0 <= k < 2**j``."""

    def __new__(cls, pairs: Iterable[tuple[int, int]] = ()):
        items = []
        for j, k in pairs:
            j, k = int(j), int(k)
            if j < 0 or not 0 <= k < (1 << j):
                raise ShapeError(f"invalid wavelet index ({j}, {k})")
            items.append((j, k))
        return super().__new__(cls, items)

    @classmethod
    def from_flat(cls, flat: Iterable[int]) -> "IndexSet":
        return cls(level_of(f) for f in flat)

    def to_flat(self) -> np.ndarray:
        return np.array(sorted(flat_index(j, k) for j, k in self), dtype=np.int64)

    def max_level(self) -> int:
        return max((j for j, _ in self), default=-1)


@dataclass(frozen=True, eq=False)
class WaveletCoeffs:
    """Coefficients ``(alpha00, beta_jk)`` of a periodic signal, levels ``j < j_max``."""

    flat: np.ndarray

    def __post_init__(self):
        arr = np.array(self.flat, dtype=np.float64)
        size = arr.shape[0] if arr.ndim == 1 else -1
        if size < 1 or size & (size - 1):
            raise ShapeError(f"flat coefficient array must have length 2**j_max, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ShapeError("coefficients must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "flat", arr)

    @classmethod
    def from_levels(cls, alpha00: float, levels: Sequence[Sequence[float]]) -> "WaveletCoeffs":
        parts = [np.array([alpha00], dtype=np.float64)]
        for j, lev in enumerate(levels):
            lev = np.asarray(lev, dtype=np.float64)
            if lev.shape != (1 << j,):
                raise ShapeError(f"level {j} must hold {1 << j} values, got {lev.shape}")
            parts.append(lev)
        return cls(np.concatenate(parts))

    @classmethod
    def zeros(cls, j_max: int) -> "WaveletCoeffs":
        return cls(np.zeros(1 << j_max))

    @property
    def j_max(self) -> int:
        return self.flat.shape[0].bit_length() - 1

    @property
    def alpha00(self) -> float:
        return float(self.flat[0])

    def level(self, j: int) -> np.ndarray:
        if not 0 <= j < self.j_max:
            raise LevelOutOfRangeError(f"level {j} outside [0, {self.j_max})")
        return self.flat[1 << j: 2 << j]

    @property
    def levels(self) -> list[np.ndarray]:
        return [self.level(j) for j in range(self.j_max)]

    @property
    def betas(self) -> np.ndarray:
        """All psi coefficients, levels concatenated in (j, k) order."""
        return self.flat[1:]

    def truncate(self, depth: int) -> "WaveletCoeffs":
        """Keep levels ``j < depth``."""
        if not 0 <= depth <= self.j_max:
            raise LevelOutOfRangeError(f"depth {depth} outside [0, {self.j_max}]")
        return WaveletCoeffs(self.flat[: 1 << depth])

    def __eq__(self, other):
        if not isinstance(other, WaveletCoeffs):
            return NotImplemented
        return np.array_equal(self.flat, other.flat)

    def __hash__(self):
        return hash(self.flat.tobytes())

    def __mul__(self, c: float) -> "WaveletCoeffs":
        return WaveletCoeffs(self.flat * c)

    __rmul__ = __mul__

    def __add__(self, other: "WaveletCoeffs") -> "WaveletCoeffs":
        if self.j_max != other.j_max:
            raise ShapeError("depth mismatch")
        return WaveletCoeffs(self.flat + other.flat)

    def __sub__(self, other: "WaveletCoeffs") -> "WaveletCoeffs":
        if self.j_max != other.j_max:
            raise ShapeError("depth mismatch")
        return WaveletCoeffs(self.flat - other.flat)

    def to_dict(self) -> dict:
        return {"alpha00": self.alpha00, "levels": [lev.tolist() for lev in self.levels]}

    @classmethod
    def from_dict(cls, d: dict) -> "WaveletCoeffs":
        try:
            return cls.from_levels(float(d["alpha00"]), d["levels"])
        except (KeyError, TypeError) as exc:
            raise ShapeError(f"malformed coefficient object: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "WaveletCoeffs":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ShapeError(f"malformed coefficient JSON: {exc}") from exc


def l2_norm_sq(c: WaveletCoeffs) -> float:
    return float(np.dot(c.flat, c.flat))


def _sorted_desc(a: np.ndarray) -> np.ndarray:
    # stable sort on -|a| keeps (j, k) order among ties
    mags = np.abs(a)
    return mags[np.argsort(-mags, kind="stable")]


def rearrange_global(c: WaveletCoeffs) -> np.ndarray:
    """Non-increasing rearrangement of ``|beta_jk|`` over all levels (alpha00 excluded)."""
    return _sorted_desc(c.betas)


def rearrange_level(c: WaveletCoeffs, j: int) -> np.ndarray:
    return _sorted_desc(c.level(j))


def level_energies(c: WaveletCoeffs) -> np.ndarray:
    """``sum_k beta_jk**2`` for each level."""
    return np.array([np.dot(lev, lev) for lev in c.levels])


def tail_energy(c: WaveletCoeffs, J: int) -> float:
    """``sum_{J <= j < j_max} sum_k beta_jk**2``."""
    if not 0 <= J <= c.j_max:
        raise LevelOutOfRangeError(f"J={J} outside [0, {c.j_max}]")
    tail = c.flat[1 << J:]
    return float(np.dot(tail, tail))


def tail_energies(c: WaveletCoeffs) -> np.ndarray:
    """``tail_energy(c, J)`` for ``J = 0, ..., j_max`` in one pass."""
    e = level_energies(c)
    out = np.zeros(c.j_max + 1)
    out[:-1] = np.cumsum(e[::-1])[::-1]
    return out
