"""Witness signals with known space memberships."""

from __future__ import annotations

import math

import numpy as np

from .coeffs import MAX_DEPTH, WaveletCoeffs
from .errors import ConfigError, ShapeError


def _check_depth(j_max: int):
    if not 1 <= j_max <= MAX_DEPTH:
        raise ShapeError(f"j_max must lie in [1, {MAX_DEPTH}], got {j_max}")


def s0(j_max: int) -> WaveletCoeffs:
    """``beta_{j,0} = 2^{-sqrt(j)}``, every other coefficient zero."""
    _check_depth(j_max)
    flat = np.zeros(1 << j_max)
    j = np.arange(j_max)
    flat[1 << j] = 2.0 ** -np.sqrt(j)
    return WaveletCoeffs(flat)


def s1_count(alpha: float, j: int) -> int:
    """``#{k >= 0 : k < 2^{j/(1+2 alpha)}}``, capped at the level width."""
    x = 2.0 ** (j / (1 + 2 * alpha))
    if abs(x - round(x)) < 1e-9 * x:
        x = float(round(x))
    return min(math.ceil(x), 1 << j)


def s1(alpha: float, j_max: int) -> WaveletCoeffs:
    """``beta_jk = 2^{-j/2}`` for ``k < 2^{j/(1+2 alpha)}``, zero otherwise."""
    _check_depth(j_max)
    flat = np.zeros(1 << j_max)
    for j in range(j_max):
        flat[1 << j: (1 << j) + s1_count(alpha, j)] = 2.0 ** (-j / 2)
    return WaveletCoeffs(flat)


def besov_extremal(alpha: float, j_max: int) -> WaveletCoeffs:
    """Dense signal ``beta_jk = 2^{-j(alpha + 1/2)}``: level energy exactly ``2^{-2 j alpha}``."""
    _check_depth(j_max)
    flat = np.zeros(1 << j_max)
    for j in range(j_max):
        flat[1 << j: 2 << j] = 2.0 ** (-j * (alpha + 0.5))
    return WaveletCoeffs(flat)


def zero(j_max: int) -> WaveletCoeffs:
    _check_depth(j_max)
    return WaveletCoeffs.zeros(j_max)


def by_name(spec: str, j_max: int) -> WaveletCoeffs:
    """Build a signal from ``name`` or ``name:alpha`` (``s0``, ``s1:0.5``, ``besov_extremal:0.5``, ``zero``)."""
    name, _, arg = spec.partition(":")
    try:
        if name == "s0":
            return s0(j_max)
        if name == "zero":
            return zero(j_max)
        if name == "s1":
            return s1(float(arg or 0.5), j_max)
        if name == "besov_extremal":
            return besov_extremal(float(arg or 0.5), j_max)
    except ValueError as exc:
        raise ConfigError(f"bad signal parameter in {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown signal {name!r}; expected s0, s1[:alpha], besov_extremal[:alpha] or zero")
