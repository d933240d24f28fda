"""Wavelet model collections, penalties and penalized model selection.

Every model contains ``phi_00``; a model is described by which ``psi_jk`` it
adds.  Four collection variants are supported:

``sieve``         nested models ``{j < N}`` for ``N = 0, ..., j0``
``full``          every subset of ``{(j, k): j < j0}``
``hybrid``        Massart's collection: levels ``j < J`` complete, then
                  ``floor(2^J (j - J + 1)^-theta)`` indices per level ``j >= J``,
                  levels cut at ``j_trunc``
``hybrid_trunc``  the hybrid collection restricted to ``j < j0``, optionally
                  charged the dimension of the unrestricted model

The selection criterion is ``-sum_{i in m} beta_hat_i**2 + lambda_n D_m / n``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from .coeffs import IndexSet, WaveletCoeffs, level_of
from .errors import (
    ConfigError,
    DegeneratePenaltyError,
    NoiseTooLargeError,
    ShapeError,
    TooLargeCollectionError,
)

BRUTE_FORCE_LIMIT = 10**6
VARIANTS = ("sieve", "full", "hybrid", "hybrid_trunc")


@dataclass(frozen=True)
class PenaltyRule:
    """``lambda_n = lambda0`` (``constant``) or ``lambda0 * log(n)`` (``logn``)."""

    kind: str = "logn"
    lambda0: float = 16.0
    over_penalize: bool = False

    def __post_init__(self):
        if self.kind not in ("constant", "logn"):
            raise ConfigError(f"unknown penalty kind {self.kind!r} (expected 'constant' or 'logn')")
        if not self.lambda0 > 0:
            raise ConfigError(f"lambda0 must be positive, got {self.lambda0}")


def lambda_n(pen: PenaltyRule, n: int) -> float:
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if pen.kind == "constant":
        return float(pen.lambda0)
    lam = pen.lambda0 * math.log(n)
    if lam <= 0:
        raise DegeneratePenaltyError(f"lambda_n = lambda0 log n vanishes at n={n}")
    return lam


def j0_from_ratio(ratio: float) -> int:
    """The integer ``j`` with ``2**j <= ratio < 2**(j+1)``."""
    if not ratio >= 1:
        raise NoiseTooLargeError(f"n / lambda_n = {ratio:.6g} < 1: no admissible resolution level")
    j = int(math.floor(math.log2(ratio)))
    # log2 can be off by one ulp near powers of two
    while 2.0 ** (j + 1) <= ratio:
        j += 1
    while 2.0 ** j > ratio:
        j -= 1
    return j


def j0_of(n: int, pen: PenaltyRule) -> int:
    return j0_from_ratio(n / lambda_n(pen, n))


def budget(J: int, j: int, theta: float) -> int:
    """``min(floor(2^J (j - J + 1)^-theta), 2^j)`` for ``j >= J``."""
    base = j - J + 1
    if float(theta).is_integer():
        b = (1 << J) // base ** int(theta)
    else:
        b = math.floor(2.0 ** J / base ** theta)
    return min(b, 1 << j)


def dim_DJ(J: int, theta: float, j_trunc: int | None) -> int:
    """Common dimension of the hybrid models with parameter ``J``.

    ``j_trunc=None`` gives the untruncated value; the budgets vanish once
    ``(j - J + 1)**theta > 2**J`` so the sum is finite.
    """
    if theta <= 2:
        raise ConfigError(f"theta must exceed 2, got {theta}")
    if j_trunc is not None and J > j_trunc:
        raise ShapeError(f"J={J} exceeds j_trunc={j_trunc}")
    total = 1 << J
    j = J
    while j_trunc is None or j < j_trunc:
        b = budget(J, j, theta)
        if b == 0:
            break
        total += b
        j += 1
    return total


@dataclass(frozen=True)
class CollectionSpec:
    """A model collection.  ``j0=None`` means "use ``j0(n)`` at selection time"."""

    variant: str
    j0: int | None = None
    theta: float | None = None
    j_trunc: int | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown collection {self.variant!r}; expected one of {VARIANTS}")
        if self.variant in ("hybrid", "hybrid_trunc"):
            if self.theta is None or not self.theta > 2:
                raise ConfigError(f"hybrid collections need theta > 2, got {self.theta}")
        if self.variant == "hybrid" and self.j_trunc is None:
            raise ConfigError("hybrid collection needs j_trunc")
        for name in ("j0", "j_trunc"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.j0 is not None and self.j_trunc is not None and self.j0 > self.j_trunc:
            raise ConfigError(f"j0={self.j0} exceeds j_trunc={self.j_trunc}")

    @classmethod
    def sieve(cls, j0: int | None = None) -> "CollectionSpec":
        return cls("sieve", j0=j0)

    @classmethod
    def full(cls, j0: int | None = None) -> "CollectionSpec":
        return cls("full", j0=j0)

    @classmethod
    def hybrid(cls, theta: float, j_trunc: int) -> "CollectionSpec":
        return cls("hybrid", theta=theta, j_trunc=j_trunc)

    @classmethod
    def hybrid_trunc(cls, theta: float, j0: int | None = None, j_trunc: int | None = None) -> "CollectionSpec":
        return cls("hybrid_trunc", j0=j0, theta=theta, j_trunc=j_trunc)

    @property
    def uses_j0(self) -> bool:
        return self.variant != "hybrid"

    def resolve(self, n: int, pen: PenaltyRule) -> "CollectionSpec":
        """Fill in ``j0 = j0(n)`` when it was left open."""
        if not self.uses_j0 or self.j0 is not None:
            return self
        j0 = j0_of(n, pen)
        if self.j_trunc is not None and j0 > self.j_trunc:
            raise ShapeError(f"j0(n)={j0} exceeds j_trunc={self.j_trunc}")
        return replace(self, j0=j0)

    @property
    def depth(self) -> int:
        """Number of levels the selector reads."""
        if self.variant == "hybrid":
            return self.j_trunc
        if self.j0 is None:
            raise ShapeError("collection j0 unresolved; call resolve(n, pen)")
        return self.j0

    def J_range(self) -> range:
        return range(self.depth + 1)

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """One model.

    ``support`` lists the flat positions (``2**j + k``) of the ``psi_jk`` in the
    model; ``phi_00`` is always included and not listed.  ``dim`` is the
    dimension charged by the penalty, which exceeds ``1 + len(support)`` only
    for over-penalized truncated hybrid models.
    """

    variant: str
    dim: int
    N: int | None = None
    J: int | None = None
    support: np.ndarray | None = None

    def __post_init__(self):
        if self.variant == "sieve":
            object.__setattr__(self, "support", np.arange(1, 1 << self.N, dtype=np.int64))
        else:
            sup = np.unique(np.asarray(self.support if self.support is not None else [], dtype=np.int64))
            if sup.size and sup[0] < 1:
                raise ShapeError("support positions must be >= 1")
            object.__setattr__(self, "support", sup)
        self.support.setflags(write=False)

    @classmethod
    def sieve(cls, N: int) -> "ModelSpec":
        return cls("sieve", dim=1 << N, N=N)

    @classmethod
    def subset(cls, idx) -> "ModelSpec":
        flat = idx.to_flat() if isinstance(idx, IndexSet) else np.asarray(sorted(idx), dtype=np.int64)
        return cls("subset", dim=1 + len(flat), support=flat)

    @property
    def size(self) -> int:
        """Actual dimension ``1 + |I_m|``."""
        return 1 + int(self.support.size)

    def max_level(self) -> int:
        return int(self.support[-1]).bit_length() - 1 if self.support.size else -1

    def index_set(self) -> IndexSet:
        return IndexSet.from_flat(self.support.tolist())

    @property
    def per_level_sets(self) -> dict[int, IndexSet]:
        out: dict[int, list] = {}
        for f in self.support.tolist():
            j, k = level_of(f)
            out.setdefault(j, []).append((j, k))
        return {j: IndexSet(v) for j, v in out.items()}

    def mask(self, depth: int) -> np.ndarray:
        if self.max_level() >= depth:
            raise ShapeError(f"model reaches level {self.max_level()} but coefficients stop below {depth}")
        m = np.zeros(1 << depth, dtype=bool)
        m[0] = True
        m[self.support] = True
        return m

    def key(self) -> tuple:
        return (self.variant, self.dim, self.N, self.J, tuple(self.support.tolist()))

    def __eq__(self, other):
        if not isinstance(other, ModelSpec):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        extra = f"N={self.N}" if self.variant == "sieve" else f"J={self.J}, |I|={self.support.size}"
        return f"ModelSpec({self.variant}, dim={self.dim}, {extra})"

    def to_dict(self) -> dict:
        d = {"variant": self.variant, "dim": self.dim}
        if self.variant == "sieve":
            d["N"] = self.N
            return d
        if self.J is not None:
            d["J"] = self.J
        d["indices"] = [list(level_of(f)) for f in self.support.tolist()]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        try:
            variant = d["variant"]
            if variant == "sieve":
                return cls.sieve(int(d["N"]))
            idx = IndexSet(tuple(p) for p in d.get("indices", []))
            return cls(variant, dim=int(d["dim"]), J=d.get("J"), support=idx.to_flat())
        except (KeyError, TypeError, ValueError) as exc:
            raise ShapeError(f"malformed model object: {exc}") from exc


def _coeffs_of(obs) -> WaveletCoeffs:
    return obs.coeffs if hasattr(obs, "coeffs") else obs


def _check_depth(c: WaveletCoeffs, coll: CollectionSpec):
    if coll.depth > c.j_max:
        raise ShapeError(f"collection reads {coll.depth} levels but coefficients stop at j_max={c.j_max}")


def _hybrid_levels(coll: CollectionSpec) -> int:
    return coll.j_trunc if coll.variant == "hybrid" else coll.j0


def _hybrid_charge(coll: CollectionSpec, J: int, set_dim: int, pen: PenaltyRule) -> int:
    if coll.variant == "hybrid_trunc" and pen.over_penalize:
        return dim_DJ(J, coll.theta, coll.j_trunc)
    return set_dim


def _select_sieve(c, coll, t2):
    energies = np.concatenate([[c.flat[0] ** 2], [np.dot(lev, lev) for lev in c.levels[: coll.j0]]])
    crit = -np.cumsum(energies) + t2 * (2.0 ** np.arange(coll.j0 + 1))
    N = int(np.argmin(crit))  # first minimum: smallest dimension
    return ModelSpec.sieve(N), float(crit[N])


def _select_full(c, coll, t2):
    b = c.flat[1: 1 << coll.j0]
    keep = np.nonzero(np.abs(b) > math.sqrt(t2))[0] + 1
    m = ModelSpec.subset(keep)
    crit = -(c.flat[0] ** 2 + float(np.dot(c.flat[keep], c.flat[keep]))) + t2 * m.dim
    return m, crit


def _select_hybrid(c, coll, t2, pen):
    L = _hybrid_levels(coll)
    orders, cums = [], []
    for j in range(L):
        lev = c.level(j)
        order = np.argsort(-np.abs(lev), kind="stable")
        orders.append(order)
        cums.append(np.concatenate([[0.0], np.cumsum(lev[order] ** 2)]))
    a2 = c.flat[0] ** 2
    best = None
    for J in coll.J_range():
        counts = [1 << j if j < J else budget(J, j, coll.theta) for j in range(L)]
        captured = a2 + sum(cums[j][counts[j]] for j in range(L))
        set_dim = 1 + sum(counts)
        dim = _hybrid_charge(coll, J, set_dim, pen)
        crit = -captured + t2 * dim
        cand = (crit, dim, J)
        if best is None or cand < best[0]:
            best = (cand, counts)
    (crit, dim, J), counts = best
    support = [(1 << j) + orders[j][: counts[j]] for j in range(L)]
    support = np.concatenate(support) if support else np.zeros(0, dtype=np.int64)
    return ModelSpec("hybrid", dim=dim, J=J, support=support), crit


def select_with_criterion(obs, coll: CollectionSpec, pen: PenaltyRule, n: int | None = None):
    """Like :func:`select_model` but also returns the minimal criterion value."""
    c = _coeffs_of(obs)
    n = n if n is not None else obs.n
    coll = coll.resolve(n, pen)
    _check_depth(c, coll)
    t2 = lambda_n(pen, n) / n
    if coll.variant == "sieve":
        return _select_sieve(c, coll, t2)
    if coll.variant == "full":
        return _select_full(c, coll, t2)
    return _select_hybrid(c, coll, t2, pen)


def select_model(obs, coll: CollectionSpec, pen: PenaltyRule, n: int | None = None) -> ModelSpec:
    """Penalized least-squares model choice.

    ``obs`` is an :class:`~maxiset.gwn.Observation` or, for deterministic use,
    plain :class:`WaveletCoeffs` together with an explicit ``n``.
    Ties go to the smallest dimension, then the smallest ``N``/``J``, then the
    lexicographically first index set.
    """
    return select_with_criterion(obs, coll, pen, n)[0]


def count_models(coll: CollectionSpec) -> int:
    """Number of distinct models (exact integer)."""
    if coll.variant == "sieve":
        return coll.j0 + 1
    if coll.variant == "full":
        return 2 ** ((1 << coll.j0) - 1)
    total = 0
    for J in _distinct_J(coll):
        total += math.prod(math.comb(1 << j, budget(J, j, coll.theta)) for j in range(J, _hybrid_levels(coll)))
    return total


def _distinct_J(coll: CollectionSpec) -> range:
    # J = L and J = L - 1 give the same index set once levels stop at L
    L = _hybrid_levels(coll)
    return range(max(L, 1))


def enumerate_models(coll: CollectionSpec, pen: PenaltyRule | None = None) -> Iterator[ModelSpec]:
    """Every model of a resolved collection, explicitly.  Guarded by ``BRUTE_FORCE_LIMIT``."""
    pen = pen or PenaltyRule()
    total = count_models(coll)
    if total > BRUTE_FORCE_LIMIT:
        raise TooLargeCollectionError(f"{total} models exceed the enumeration limit {BRUTE_FORCE_LIMIT}")
    if coll.variant == "sieve":
        for N in range(coll.j0 + 1):
            yield ModelSpec.sieve(N)
    elif coll.variant == "full":
        K = (1 << coll.j0) - 1
        for r in range(K + 1):
            for combo in itertools.combinations(range(1, K + 1), r):
                yield ModelSpec.subset(combo)
    else:
        L = _hybrid_levels(coll)
        for J in _distinct_J(coll):
            full_part = list(range(1, 1 << min(J, L)))
            choices = [
                [tuple((1 << j) + k for k in combo)
                 for combo in itertools.combinations(range(1 << j), budget(J, j, coll.theta))]
                for j in range(J, L)
            ]
            for pick in itertools.product(*choices):
                support = full_part + [f for part in pick for f in part]
                dim = _hybrid_charge(coll, J, 1 + len(support), pen)
                yield ModelSpec("hybrid", dim=dim, J=J, support=support)


def brute_force_select(obs, coll: CollectionSpec, pen: PenaltyRule, n: int | None = None) -> ModelSpec:
    """Exhaustive argmin of the penalized criterion; oracle for :func:`select_model`."""
    c = _coeffs_of(obs)
    n = n if n is not None else obs.n
    coll = coll.resolve(n, pen)
    _check_depth(c, coll)
    t2 = lambda_n(pen, n) / n
    vals = c.flat.tolist()
    best_key, best = None, None
    for m in enumerate_models(coll, pen):
        energy = vals[0] ** 2 + sum(vals[f] ** 2 for f in m.support.tolist())
        crit = -energy + t2 * m.dim
        key = (crit, m.dim, m.N if m.N is not None else (m.J or 0), tuple(m.support.tolist()))
        if best_key is None or key < best_key:
            best_key, best = key, m
    return best


def project(c: WaveletCoeffs, m: ModelSpec) -> WaveletCoeffs:
    """Zero every coefficient outside ``m``; ``alpha00`` is always kept."""
    return WaveletCoeffs(np.where(m.mask(c.j_max), c.flat, 0.0))


def risk_decomposition(s: WaveletCoeffs, m: ModelSpec) -> tuple[float, int]:
    """``(||s_m - s||^2, D_m)``."""
    out = s.flat[~m.mask(s.j_max)]
    return float(np.dot(out, out)), m.dim


def criterion(obs, m: ModelSpec, pen: PenaltyRule, n: int | None = None) -> float:
    """``gamma_n(s_hat_m) + pen_n(m)`` for an explicit model."""
    c = _coeffs_of(obs)
    n = n if n is not None else obs.n
    kept = c.flat[m.mask(c.j_max)]
    return -float(np.dot(kept, kept)) + lambda_n(pen, n) / n * m.dim

