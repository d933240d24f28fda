"""Gaussian white noise model in the coefficient domain.

With an orthonormal basis, observing ``dY = s dt + n^{-1/2} dW`` is the same
as observing every coefficient plus an independent ``N(0, 1/n)`` error.  This
module produces such observations and the two noise diagnostics used by the
theory: the Kraft-type sum ``sum_m exp(-(sqrt(lambda_n) - 1)^2 D_m / 2)`` and
the probability of the event ``A_n`` that the projected noise is uniformly
controlled over all pairs of models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .coeffs import WaveletCoeffs
from .errors import ConfigError, PenaltyTooSmallError, TooLargeCollectionError
from .model_collections import (
    CollectionSpec,
    PenaltyRule,
    _distinct_J,
    _hybrid_levels,
    budget,
    enumerate_models,
    lambda_n,
)
from .rng import standard_normals

PAIR_LIMIT = 10**4


@dataclass(frozen=True)
class Observation:
    coeffs: WaveletCoeffs
    n: int
    seed: int
    replication: int = 0


def observe(s: WaveletCoeffs, n: int, seed: int, replication: int = 0) -> Observation:
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    z = standard_normals(seed, replication, 0, s.flat.size)
    return Observation(WaveletCoeffs(s.flat + z / math.sqrt(n)), n, seed, replication)


def _kraft_c(lam: float) -> float:
    if not lam > 1:
        raise PenaltyTooSmallError(f"lambda_n = {lam:.6g} must exceed 1")
    return (math.sqrt(lam) - 1.0) ** 2 / 2.0


def _log_comb(a: int, b: int) -> float:
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def kraft_sum(coll: CollectionSpec, n: int, pen: PenaltyRule, lam: float | None = None) -> float:
    """``sum_{m in M_n} exp(-(sqrt(lambda_n) - 1)^2 D_m / 2)``, exactly.

    Full collection: closed form ``e^-c (1 + e^-c)^K`` with ``K`` the number of
    candidate ``psi`` indices.  Hybrid collections: sum over ``J`` of
    (number of models with parameter ``J``) x ``exp(-c D)``, evaluated in log
    space.  ``D_m`` is the actual model dimension.
    """
    lam = lambda_n(pen, n) if lam is None else lam
    c = _kraft_c(lam)
    coll = coll.resolve(n, pen)
    if coll.variant == "sieve":
        return float(sum(math.exp(-c * (1 << N)) for N in range(coll.j0 + 1)))
    if coll.variant == "full":
        K = (1 << coll.j0) - 1
        return math.exp(-c + K * math.log1p(math.exp(-c)))
    L = _hybrid_levels(coll)
    total = 0.0
    for J in _distinct_J(coll):
        counts = [budget(J, j, coll.theta) for j in range(J, L)]
        log_mult = sum(_log_comb(1 << j, b) for j, b in zip(range(J, L), counts))
        dim = (1 << min(J, L)) + sum(counts)
        total += math.exp(log_mult - c * dim)
    return total


def lambda_for_kraft(coll: CollectionSpec, n: int, pen: PenaltyRule, target: float) -> float:
    """Penalty level ``lambda > 1`` at which :func:`kraft_sum` equals ``target``."""
    if not target > 0:
        raise ConfigError(f"Kraft target must be positive, got {target}")
    f = lambda lam: kraft_sum(coll, n, pen, lam) - target  # noqa: E731
    hi = 4.0
    while f(hi) > 0:
        hi *= 2
        if hi > 1e6:
            raise ConfigError(f"no penalty level reaches Kraft sum {target}")
    return float(brentq(f, 1.0 + 1e-9, hi, xtol=1e-12))


def kraft_sum_bruteforce(coll: CollectionSpec, n: int, pen: PenaltyRule, lam: float | None = None) -> float:
    lam = lambda_n(pen, n) if lam is None else lam
    c = _kraft_c(lam)
    coll = coll.resolve(n, pen)
    return float(sum(math.exp(-c * m.size) for m in enumerate_models(coll, pen)))


def _noise_sup(z: np.ndarray, coll: CollectionSpec) -> float:
    """``sup_{m, m'} ||W_{m+m'}||^2 / (D_m + D_m')`` for one noise draw.

    ``z`` holds the noise on flat positions ``[0, 2**depth)``.  The pair sup
    reduces to a sup over unions because the ratio only improves when the
    same union is reached with smaller total dimension.
    """
    z2 = z * z
    a2 = z2[0]
    if coll.variant == "sieve":
        S = np.cumsum(z2)[[(1 << N) - 1 for N in range(coll.j0 + 1)]]
        dims = 2.0 ** np.arange(coll.j0 + 1)
        return float(np.max(S / (dims + 1)))
    if coll.variant == "full":
        top = np.concatenate([[0.0], np.cumsum(np.sort(z2[1:])[::-1])])
        k = np.arange(top.size)
        return float(np.max((a2 + top) / (2.0 + k)))
    L = _hybrid_levels(coll)
    cums = [np.concatenate([[0.0], np.cumsum(np.sort(z2[1 << j: 2 << j])[::-1])]) for j in range(L)]
    Js = list(_distinct_J(coll))
    counts = {J: [(1 << j) if j < J else budget(J, j, coll.theta) for j in range(L)] for J in Js}
    dims = {J: 1 + sum(counts[J]) for J in Js}
    best = 0.0
    for a in Js:
        for b in Js:
            if b < a:
                continue
            energy = a2 + sum(cums[j][min(1 << j, counts[a][j] + counts[b][j])] for j in range(L))
            best = max(best, energy / (dims[a] + dims[b]))
    return best


def noise_sup_bruteforce(z: np.ndarray, coll: CollectionSpec, pen: PenaltyRule | None = None) -> float:
    """Same statistic by explicit enumeration of all model pairs (oracle)."""
    models = list(enumerate_models(coll, pen))
    if len(models) ** 2 > PAIR_LIMIT:
        raise TooLargeCollectionError(f"{len(models) ** 2} model pairs exceed {PAIR_LIMIT}")
    z2 = z * z
    best = 0.0
    for m in models:
        for mp in models:
            union = np.union1d(m.support, mp.support)
            best = max(best, (z2[0] + z2[union].sum()) / (m.size + mp.size))
    return float(best)


@dataclass(frozen=True)
class ProbabilityEstimate:
    estimate: float
    stderr: float
    reps: int


def estimate_An_prob(
    coll: CollectionSpec,
    n: int,
    pen: PenaltyRule,
    reps: int,
    seed: int,
    lam: float | None = None,
) -> ProbabilityEstimate:
    """Monte Carlo estimate of ``P{A_n}`` with its binomial standard error.

    ``lam`` overrides ``lambda_n(pen, n)``; it is what the event compares
    against, so degenerate values such as 0 are allowed here.
    """
    lam = lambda_n(pen, n) if lam is None else float(lam)
    coll = coll.resolve(n, pen)
    depth = coll.depth
    hits = 0
    for r in range(reps):
        z = standard_normals(seed, r, 0, 1 << depth)
        if _noise_sup(z, coll) <= lam:
            hits += 1
    p = hits / reps
    return ProbabilityEstimate(p, math.sqrt(p * (1 - p) / reps), reps)
