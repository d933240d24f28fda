"""Approximation-space functionals.

Each space is described by a supremum over an unbounded index (a level, a
budget, a noise level).  From finite data only a truncated supremum can be
computed, so every functional also has a ``*_series`` form returning the
quantity inside the supremum per index; :func:`report` turns such a series
into a bounded/diverging verdict.

Nonlinear approximation functionals use squared norms throughout:
``sup_M M^{2 alpha} inf_{D_m <= M} ||s_m - s||^2``, the square of the
``sup_M M^alpha inf ||s_m - s||`` form, so finiteness is unaffected.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .coeffs import WaveletCoeffs, rearrange_global, tail_energies
from .errors import DegenerateRateError, DomainError, InsufficientDepthError
from .model_collections import (
    CollectionSpec,
    PenaltyRule,
    budget,
    dim_DJ,
    j0_of,
    lambda_n,
    risk_decomposition,
    select_model,
)

GROWTH_FACTOR = 2.0
BOUNDED_FACTOR = 1.25


# -- verdicts -----------------------------------------------------------------


@dataclass(frozen=True)
class FunctionalReport:
    value: float
    index: list
    series: list
    growth_ratio: float
    verdict: str

    def to_dict(self) -> dict:
        return asdict(self)


def growth_ratio(series) -> float:
    """Last value over the value at the start of the top half of the range."""
    series = np.asarray(series, dtype=float)
    ref = series[len(series) // 2]
    last = series[-1]
    if ref == 0:
        return math.inf if last > 0 else 1.0
    return float(last / ref)


def verdict(ratio: float, growth: float = GROWTH_FACTOR, bounded: float = BOUNDED_FACTOR) -> str:
    if ratio >= growth:
        return "diverging"
    if ratio <= bounded:
        return "bounded"
    return "inconclusive"


def report(index, series, growth: float = GROWTH_FACTOR, bounded: float = BOUNDED_FACTOR) -> FunctionalReport:
    series = [float(v) for v in series]
    r = growth_ratio(series)
    return FunctionalReport(max(series), list(index), series, r, verdict(r, growth, bounded))


# -- deterministic risk proxy -------------------------------------------------


def Q_functional(s: WaveletCoeffs, coll: CollectionSpec, pen: PenaltyRule, n: int) -> float:
    """``inf_m ||s_m - s||^2 + lambda_n D_m / n`` over the collection at noise level ``n``."""
    m = select_model(s, coll, pen, n=n)
    bias, dim = risk_decomposition(s, m)
    return bias + lambda_n(pen, n) * dim / n


def rate_rho(pen: PenaltyRule, n: int, alpha: float) -> float:
    """``(lambda_n / n)^{alpha / (1 + 2 alpha)}``."""
    lam = lambda_n(pen, n)
    if lam >= n:
        raise DegenerateRateError(f"lambda_n = {lam:.6g} >= n = {n}")
    return (lam / n) ** (alpha / (1 + 2 * alpha))


# -- Besov-type functionals ---------------------------------------------------


def besov_series(s: WaveletCoeffs, alpha: float, p: float) -> np.ndarray:
    """``2^{j p (alpha + 1/2 - 1/p)} sum_k |beta_jk|^p`` for ``j < j_max``."""
    if not p >= 1 or math.isinf(p):
        raise DomainError(f"p must lie in [1, inf), got {p}")
    j = np.arange(s.j_max)
    sums = np.array([np.sum(np.abs(lev) ** p) for lev in s.levels])
    return 2.0 ** (j * p * (alpha + 0.5 - 1.0 / p)) * sums


def besov_functional(s: WaveletCoeffs, alpha: float, p: float) -> float:
    return float(np.max(besov_series(s, alpha, p)))


def besov2_tail_series(s: WaveletCoeffs, alpha: float) -> np.ndarray:
    """``2^{2 J alpha / (1 + 2 alpha)} sum_{j >= J} sum_k beta_jk^2`` for ``J = 0..j_max``."""
    J = np.arange(s.j_max + 1)
    return 2.0 ** (2 * J * alpha / (1 + 2 * alpha)) * tail_energies(s)


def besov2_tail_functional(s: WaveletCoeffs, alpha: float) -> float:
    return float(np.max(besov2_tail_series(s, alpha)))


def weak_besov_functionals(s: WaveletCoeffs, q: float) -> tuple[float, float, float]:
    """The three equivalent weak-Besov quantities for ``0 < q < 2``.

    ``rearr = sup_n n^{1/q} |beta|_(n)``,
    ``below = sup_u u^{q-2} sum beta^2 1{|beta| <= u}``,
    ``count = sup_u u^q #{|beta| > u}``.

    Both suprema over ``u`` are attained, or approached from the left, at
    coefficient magnitudes, so they are evaluated there exactly.
    """
    if not 0 < q < 2:
        raise DomainError(f"q must lie in (0, 2), got {q}")
    mags = rearrange_global(s)
    mags = mags[mags > 0]
    if mags.size == 0:
        return 0.0, 0.0, 0.0
    ranks = np.arange(1, mags.size + 1)
    rearr = float(np.max(ranks ** (1.0 / q) * mags))

    # count: just below v, #{|beta| > u} = #{|beta| >= v}; with ties take the last rank
    last = np.r_[mags[1:] != mags[:-1], True]
    count = float(np.max(mags[last] ** q * ranks[last]))

    asc = mags[::-1]
    first = np.r_[True, asc[1:] != asc[:-1]]
    cum = np.cumsum(asc ** 2)
    # at u = v include every coefficient equal to v
    last_asc = np.r_[asc[1:] != asc[:-1], True]
    upto = cum[last_asc]
    below = float(np.max(asc[first] ** (q - 2) * upto))
    return rearr, below, count


def weak_besov_series(s: WaveletCoeffs, q: float, which: str = "count") -> np.ndarray:
    """The chosen weak-Besov functional on ``s`` truncated at depth ``d = 1..j_max``."""
    pos = {"rearr": 0, "below": 1, "count": 2}[which]
    return np.array([weak_besov_functionals(s.truncate(d), q)[pos] for d in range(1, s.j_max + 1)])


def _level_tails(s: WaveletCoeffs) -> list[np.ndarray]:
    # tails[j][b] = energy of level j left after keeping its b largest coefficients
    out = []
    for lev in s.levels:
        sq = np.sort(lev * lev)
        out.append(np.concatenate([np.cumsum(sq)[::-1], [0.0]]))
    return out


def _hybrid_energies(tails: list[np.ndarray], J_values, theta: float) -> np.ndarray:
    L = len(tails)
    out = []
    for J in J_values:
        total = 0.0
        for j in range(J, L):
            b = budget(J, j, theta)
            if b < 1 << j:
                total += tails[j][b]
        out.append(total)
    return np.array(out)


def hybrid_tail_energy(s: WaveletCoeffs, J: int, theta: float) -> float:
    """Squared bias of the best hybrid model with parameter ``J`` (levels ``< j_max``)."""
    return float(_hybrid_energies(_level_tails(s), [J], theta)[0])


def hybrid_A_series(s: WaveletCoeffs, alpha: float, theta: float) -> np.ndarray:
    """``2^{2 J alpha} E_J`` for ``J = 0..j_max - 1``."""
    if not theta > 2 or not alpha > 0:
        raise DomainError(f"need theta > 2 and alpha > 0, got theta={theta}, alpha={alpha}")
    J = np.arange(s.j_max)
    return 2.0 ** (2 * J * alpha) * _hybrid_energies(_level_tails(s), J, theta)


def hybrid_A_functional(s: WaveletCoeffs, alpha: float, theta: float) -> float:
    return float(np.max(hybrid_A_series(s, alpha, theta)))


# -- nonlinear and linear approximation ---------------------------------------


def best_bias_full(s: WaveletCoeffs, M_max: int) -> np.ndarray:
    """``sum_{i > M} |beta|_(i)^2`` for ``M = 1..M_max``: best bias keeping ``M`` psi terms."""
    sq = rearrange_global(s) ** 2
    tails = np.concatenate([np.cumsum(sq[::-1])[::-1], [0.0]])
    M = np.arange(1, M_max + 1)
    return tails[np.minimum(M, sq.size)]


def best_bias_sieve(s: WaveletCoeffs, M_max: int) -> np.ndarray:
    """``min_{2^N <= M} tail_energy(N)`` for ``M = 1..M_max``."""
    tails = tail_energies(s)
    M = np.arange(1, M_max + 1)
    N = np.minimum(np.floor(np.log2(M)).astype(int), s.j_max)
    return tails[N]


def best_bias_hybrid(s: WaveletCoeffs, theta: float, M_max: int) -> np.ndarray:
    """``min_{D_J <= M} E_J`` for ``M = 1..M_max``; NaN where no hybrid model fits."""
    J = np.arange(s.j_max + 1)
    dims = np.array([dim_DJ(int(j), theta, s.j_max) for j in J])
    biases = np.append(_hybrid_energies(_level_tails(s), J[:-1], theta), 0.0)
    order = np.argsort(dims, kind="stable")
    dims, best = dims[order], np.minimum.accumulate(biases[order])
    # number of J with D_J <= M
    k = np.searchsorted(dims, np.arange(1, M_max + 1), side="right")
    out = np.full(M_max, np.nan)
    ok = k > 0
    out[ok] = best[k[ok] - 1]
    return out


def nonlinear_A_series(s: WaveletCoeffs, coll: CollectionSpec, alpha: float, M_max: int):
    """``(M, M^{2 alpha} inf_{D_m <= M} ||s_m - s||^2)`` over the budgets where some model fits.

    For the full collection the budget counts ``psi`` terms, matching the
    closed form ``M^{2 alpha} sum_{i > M} |beta|_(i)^2``.
    """
    if M_max < 1:
        raise DomainError("M_max must be >= 1")
    if coll.variant == "full":
        bias = best_bias_full(s, M_max)
    elif coll.variant == "sieve":
        bias = best_bias_sieve(s, M_max)
    else:
        bias = best_bias_hybrid(s, coll.theta, M_max)
    M = np.arange(1, M_max + 1)
    ok = ~np.isnan(bias)
    return M[ok], M[ok] ** (2.0 * alpha) * bias[ok]


def nonlinear_A_functional(s: WaveletCoeffs, coll: CollectionSpec, alpha: float, M_max: int) -> float:
    _, vals = nonlinear_A_series(s, coll, alpha, M_max)
    return float(np.max(vals)) if vals.size else 0.0


def linear_L_series(s: WaveletCoeffs, pen: PenaltyRule, alpha: float, n_grid) -> np.ndarray:
    """``(lambda_n / n)^{-alpha/(1+2 alpha)} ||P_{V_n} s - s||`` over the grid."""
    tails = tail_energies(s)
    out = []
    for n in n_grid:
        j0 = j0_of(n, pen)
        if j0 >= s.j_max:
            raise InsufficientDepthError(f"j0({n}) = {j0} >= j_max = {s.j_max}")
        out.append(rate_rho(pen, n, alpha) ** -1 * math.sqrt(tails[j0]))
    return np.array(out)


def linear_L_functional(s: WaveletCoeffs, pen: PenaltyRule, alpha: float, n_grid) -> float:
    return float(np.max(linear_L_series(s, pen, alpha, n_grid)))


# -- constants ------------------------------------------------------------------


def penalty_constants(delta: float, p: float, alpha0: float) -> tuple[float, float]:
    """``g(delta, alpha0)`` and the minimal penalty level ``Upsilon(delta, p, alpha0)``."""
    if not (0 < delta <= 0.5 and 0 < p < 1 and alpha0 > 0):
        raise DomainError(f"need 0 < delta <= 1/2, 0 < p < 1, alpha0 > 0; got {delta}, {p}, {alpha0}")
    g = (1 - delta) ** (2 * alpha0 / (2 * alpha0 + 1)) - 1 + delta
    upsilon = 8.0 / (p * g) * (16.0 / g + 1.0)
    return g, upsilon
