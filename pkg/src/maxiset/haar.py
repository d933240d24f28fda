"""Periodic Haar analysis and synthesis on dyadic grids.

Samples ``x_0, ..., x_{2^J - 1}`` are read as the piecewise-constant function
equal to ``x_i`` on ``[i 2^-J, (i+1) 2^-J)``.  The coefficients returned are
the exact inner products of that function with ``phi_00`` and ``psi_jk``, so
``alpha00`` is the sample mean and Parseval reads
``alpha00**2 + sum beta**2 == mean(x**2)``.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .coeffs import WaveletCoeffs
from .errors import ShapeError

_SQRT2 = np.sqrt(2.0)


def _check_samples(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size < 1 or x.size & (x.size - 1):
        raise ShapeError(f"sample count must be a power of two, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ShapeError("samples must be finite")
    return x


def analyze(x) -> WaveletCoeffs:
    x = _check_samples(x)
    J = x.size.bit_length() - 1
    out = np.empty(x.size)
    # scaling coefficients <s, phi_Jk> at the finest level
    approx = x * 2.0 ** (-J / 2)
    for j in range(J - 1, -1, -1):
        even, odd = approx[0::2], approx[1::2]
        out[1 << j: 2 << j] = (even - odd) / _SQRT2
        approx = (even + odd) / _SQRT2
    out[0] = approx[0]
    return WaveletCoeffs(out)


def synthesize(c: WaveletCoeffs) -> np.ndarray:
    """Samples of the partial sum up to level ``j_max - 1`` at ``k 2^-j_max``."""
    flat = c.flat
    approx = flat[:1].copy()
    for j in range(c.j_max):
        detail = flat[1 << j: 2 << j]
        nxt = np.empty(2 << j)
        nxt[0::2] = (approx + detail) / _SQRT2
        nxt[1::2] = (approx - detail) / _SQRT2
        approx = nxt
    return approx * 2.0 ** (c.j_max / 2)


def read_samples_csv(path: str | Path) -> np.ndarray:
    """First column of a CSV file; a non-numeric first row is treated as a header."""
    values = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or not row[0].strip():
                continue
            try:
                values.append(float(row[0]))
            except ValueError:
                if i == 0:
                    continue
                raise ShapeError(f"{path}: non-numeric sample on row {i + 1}") from None
    return _check_samples(values)
