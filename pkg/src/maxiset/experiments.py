"""Monte Carlo risk curves, rate fits, and the verdict reports built on them."""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import linregress

from . import signals
from .coeffs import MAX_DEPTH, WaveletCoeffs, l2_norm_sq, tail_energy
from .errors import ConfigError, GridError, InsufficientDepthError
from .gwn import kraft_sum, observe
from .model_collections import CollectionSpec, PenaltyRule, lambda_n, project, select_model
from .spaces import (
    FunctionalReport,
    Q_functional,
    besov2_tail_series,
    hybrid_A_series,
    nonlinear_A_series,
    rate_rho,
    report,
    weak_besov_series,
)

DEFAULT_GRID = [2**k for k in range(8, 17)]
DEFAULT_REPS = 100
DEFAULT_JMAX = 18
BAND_FACTOR = 4.0
GROWTH_FACTOR = 2.0
TAIL_PAD = 6


@dataclass(frozen=True)
class RateReport:
    series: list  # [(n, value)]
    slope: float
    stderr: float
    r_squared: float
    lambdas: list = field(default_factory=list)
    value_stderr: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def fit_rate(ns, values, lambdas) -> tuple[float, float, float]:
    """Least-squares slope of ``log value`` against ``log(lambda_n / n)``."""
    x = np.log(np.asarray(lambdas, float) / np.asarray(ns, float))
    y = np.asarray(values, float)
    if len(x) < 2 or np.any(y <= 0):
        return math.nan, math.nan, math.nan
    if np.allclose(y, y[0], rtol=0, atol=0):
        return 0.0, 0.0, 1.0
    r = linregress(x, np.log(y))
    return float(r.slope), float(r.stderr), float(r.rvalue**2)


def _check_grid(n_grid) -> list[int]:
    ns = [int(n) for n in n_grid]
    if not ns or any(n < 2 for n in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
        raise GridError(f"grid must be strictly increasing integers >= 2, got {ns}")
    return ns


# -- Monte Carlo risk ----------------------------------------------------------


def _risk_one(s: WaveletCoeffs, coll: CollectionSpec, pen: PenaltyRule, n: int, seed: int, rep: int, tail: float) -> float:
    obs = observe(s, n, seed, rep)
    m = select_model(obs, coll, pen)
    return l2_norm_sq(project(obs.coeffs, m) - s) + tail


def _risk_chunk(args) -> list[float]:
    s, coll, pen, n, seed, reps, tail = args
    return [_risk_one(s, coll, pen, n, seed, r, tail) for r in reps]


def _default_jobs() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def mc_risk(
    s: WaveletCoeffs,
    coll: CollectionSpec,
    pen: PenaltyRule,
    n: int,
    reps: int,
    seed: int,
    jobs: int = 1,
) -> tuple[float, float]:
    """Mean and standard error of ``||s_hat - s||^2`` over ``reps`` replications.

    The estimator only reads the levels its collection uses, so noise is drawn
    on those and the unobserved tail of ``s`` enters as plain bias.  With the
    counter-based generator this equals drawing noise everywhere.
    """
    if reps < 2:
        raise ConfigError(f"reps must be >= 2, got {reps}")
    coll = coll.resolve(n, pen)
    depth = coll.depth
    if depth > s.j_max:
        raise InsufficientDepthError(f"collection at n={n} reads {depth} levels, signal has {s.j_max}")
    head = s.truncate(depth)
    tail = tail_energy(s, depth)
    if jobs is None or jobs < 1:
        jobs = _default_jobs()
    if jobs == 1:
        vals = [_risk_one(head, coll, pen, n, seed, r, tail) for r in range(reps)]
    else:
        chunks = [range(r, reps, jobs) for r in range(jobs)]
        with ProcessPoolExecutor(jobs) as ex:
            parts = list(ex.map(_risk_chunk, [(head, coll, pen, n, seed, c, tail) for c in chunks]))
        vals = [0.0] * reps
        for c, part in zip(chunks, parts):
            for r, v in zip(c, part):
                vals[r] = v
    arr = np.array(vals)
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(reps))


def q_curve(s: WaveletCoeffs, coll: CollectionSpec, pen: PenaltyRule, n_grid) -> RateReport:
    ns = _check_grid(n_grid)
    lams = [lambda_n(pen, n) for n in ns]
    vals = [Q_functional(s, coll, pen, n) for n in ns]
    slope, err, r2 = fit_rate(ns, vals, lams)
    return RateReport(list(zip(ns, vals)), slope, err, r2, lams, [0.0] * len(ns))


def risk_curve(
    s: WaveletCoeffs,
    coll: CollectionSpec,
    pen: PenaltyRule,
    n_grid,
    reps: int,
    seed: int,
    jobs: int = 1,
) -> RateReport:
    ns = _check_grid(n_grid)
    lams = [lambda_n(pen, n) for n in ns]
    stats = [mc_risk(s, coll, pen, n, reps, seed, jobs) for n in ns]
    vals = [m for m, _ in stats]
    slope, err, r2 = fit_rate(ns, vals, lams)
    return RateReport(list(zip(ns, vals)), slope, err, r2, lams, [e for _, e in stats])


# -- verdicts over the n-grid ------------------------------------------------------


def classify(series, band: float = BAND_FACTOR, growth: float = GROWTH_FACTOR) -> dict:
    """Bounded / diverging call on the top half of a normalized series.

    Diverging when the top half grows by at least ``growth`` from its first to
    its last point; bounded when its max/min ratio stays within ``band`` or
    when it never rises above its first point.
    """
    top = np.asarray(series, float)[len(series) // 2:]
    g = float(top[-1] / top[0]) if top[0] > 0 else math.inf
    spread = float(top.max() / top.min()) if top.min() > 0 else math.inf
    if g >= growth:
        label = "diverging"
    elif spread <= band or top.max() <= top[0]:
        label = "bounded"
    else:
        label = "inconclusive"
    return {"label": label, "growth": g, "spread": spread}


@dataclass(frozen=True)
class EquivalenceRecord:
    alpha: float
    n: list
    q_normalized: list
    risk_normalized: list
    q_class: dict
    risk_class: dict
    verdict: str

    def to_dict(self) -> dict:
        return asdict(self)


def normalized(ns, values, pen: PenaltyRule, alpha: float) -> list[float]:
    """``rho_{n,alpha}^{-2} value``."""
    return [v / rate_rho(pen, n, alpha) ** 2 for n, v in zip(ns, values)]


def equivalence_check(
    s: WaveletCoeffs,
    coll: CollectionSpec,
    pen: PenaltyRule,
    n_grid,
    alpha: float,
    reps: int,
    seed: int,
    jobs: int = 1,
    band: float = BAND_FACTOR,
    growth: float = GROWTH_FACTOR,
) -> EquivalenceRecord:
    """Do the normalized risk and the normalized ``Q`` tell the same story?"""
    ns = _check_grid(n_grid)
    q = normalized(ns, [v for _, v in q_curve(s, coll, pen, ns).series], pen, alpha)
    r = normalized(ns, [v for _, v in risk_curve(s, coll, pen, ns, reps, seed, jobs).series], pen, alpha)
    qc, rc = classify(q, band, growth), classify(r, band, growth)
    ok = qc["label"] == rc["label"] and qc["label"] != "inconclusive"
    return EquivalenceRecord(alpha, ns, q, r, qc, rc, "consistent" if ok else "violation")


@dataclass(frozen=True)
class OracleReport:
    n: list
    risk: list
    bound: list
    ratios: list
    max_ratio: float

    def to_dict(self) -> dict:
        return asdict(self)


def oracle_check(
    s: WaveletCoeffs,
    coll: CollectionSpec,
    pen: PenaltyRule,
    n_grid,
    reps: int,
    seed: int,
    jobs: int = 1,
) -> OracleReport:
    """Empirical constant in ``E||s_hat - s||^2 <= C [Q(s, n) + (1 + Sigma_n) / n]``."""
    ns = _check_grid(n_grid)
    risks, bounds = [], []
    for n in ns:
        mean, _ = mc_risk(s, coll, pen, n, reps, seed, jobs)
        risks.append(mean)
        bounds.append(Q_functional(s, coll, pen, n) + (1 + kraft_sum(coll, n, pen)) / n)
    ratios = [r / b for r, b in zip(risks, bounds)]
    return OracleReport(ns, risks, bounds, ratios, max(ratios))


# -- embeddings -------------------------------------------------------------------


@dataclass(frozen=True)
class EmbeddingRow:
    witness: str
    functional: str
    report: FunctionalReport

    def to_dict(self) -> dict:
        return {"witness": self.witness, "functional": self.functional, **self.report.to_dict()}


EXPECTED_MEMBERSHIP = {
    ("s0", "hybrid_A"): "bounded",
    ("s0", "besov2_tail"): "diverging",
    ("s1", "besov2_tail"): "bounded",
    ("s1", "weak_besov"): "bounded",
    ("s1", "hybrid_A"): "diverging",
}


def nonlinear_report(s: WaveletCoeffs, coll: CollectionSpec, alpha: float, top: int) -> FunctionalReport:
    """Nonlinear approximation functional over budgets ``M <= 2^top``.

    The value is the sup over every budget; the series, and so the verdict,
    uses the dyadic budgets ``M = 2^i`` on which the range is indexed.
    """
    M, vals = nonlinear_A_series(s, coll, alpha, 1 << top)
    pos = {int(m): k for k, m in enumerate(M)}
    idx = [i for i in range(top + 1) if (1 << i) in pos]
    rep = report(idx, [vals[pos[1 << i]] for i in idx])
    return FunctionalReport(float(np.max(vals)) if vals.size else 0.0, rep.index, rep.series, rep.growth_ratio, rep.verdict)


def embedding_report(alpha: float, theta: float, j_max: int, pad: int = TAIL_PAD) -> list[EmbeddingRow]:
    """Bounded/diverging verdicts of each witness signal against each space.

    Series run over the index range ``0..j_max`` (levels ``J``, truncation
    depths or budgets ``M = 2^i``).  Witnesses are built ``pad`` levels deeper
    so that tail sums at the top of that range are not cut off by the finite
    expansion.
    """
    if not theta > 2:
        raise ConfigError(f"theta must exceed 2, got {theta}")
    depth = min(j_max + pad, MAX_DEPTH)
    q = 2.0 / (1 + 2 * alpha)
    J = list(range(j_max + 1))
    witnesses = {
        "s0": signals.s0(depth),
        "s1": signals.s1(alpha, depth),
        "besov_extremal": signals.besov_extremal(alpha, depth),
    }
    colls = {
        "full": CollectionSpec.full(),
        "sieve": CollectionSpec.sieve(),
        "hybrid": CollectionSpec.hybrid(theta, depth),
    }
    rows = []
    for name, s in witnesses.items():
        rows.append(EmbeddingRow(name, "besov2_tail", report(J, besov2_tail_series(s, alpha)[: j_max + 1])))
        weak = weak_besov_series(s.truncate(max(j_max, 1)), q, "rearr")
        rows.append(EmbeddingRow(name, "weak_besov", report(J[1:], weak)))
        rows.append(EmbeddingRow(name, "hybrid_A", report(J, hybrid_A_series(s, alpha, theta)[: j_max + 1])))
        for cname, coll in colls.items():
            rows.append(EmbeddingRow(name, f"nonlinear_A[{cname}]", nonlinear_report(s, coll, alpha, j_max)))
    return rows


def membership_matches(rows: list[EmbeddingRow]) -> dict:
    """The expected membership verdicts, each paired with what was found."""
    found = {(r.witness, r.functional): r.report.verdict for r in rows}
    return {f"{w}/{f}": (v, found.get((w, f))) for (w, f), v in EXPECTED_MEMBERSHIP.items()}


# -- output -------------------------------------------------------------------------


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_rate_csv(path: str | Path, rep: RateReport, statistic: str):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "statistic", "lambda_n", "value", "stderr"])
        for (n, v), lam, e in zip(rep.series, rep.lambdas, rep.value_stderr):
            w.writerow([n, statistic, fmt(lam), fmt(v), fmt(e)])


def write_json(path: str | Path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n")
