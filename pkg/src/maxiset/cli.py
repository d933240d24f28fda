"""Command line entry point: ``maxiset <command> [flags]``.

Every command writes its results under ``--out`` and echoes a short summary
on stdout.  Failures print one JSON object ``{"error": ..., "message": ...}``
on stderr and exit with the code carried by the exception type.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from . import haar, signals, spaces
from .coeffs import WaveletCoeffs
from .errors import ConfigError, GridError, InputFileError, MaxisetError
from .gwn import estimate_An_prob, kraft_sum, lambda_for_kraft, observe
from .model_collections import (
    CollectionSpec,
    PenaltyRule,
    lambda_n,
    project,
    risk_decomposition,
    select_with_criterion,
)
from .rng import parse_seed

# flags that may also come from a --config file, with their defaults
DEFAULTS = {
    "out": "out",
    "seed": None,
    "reps": ex.DEFAULT_REPS,
    "jobs": 0,
    "jmax": ex.DEFAULT_JMAX,
    "signal": "s0",
    "name": "s0",
    "collection": "full",
    "penalty": "logn",
    "lambda0": 16.0,
    "over_penalize": False,
    "theta": 3.0,
    "j0": None,
    "j_trunc": None,
    "n": 4096,
    "grid": "8:16",
    "alpha": None,
    "q": None,
    "pad": ex.TAIL_PAD,
    "lam": None,
    "kraft_target": None,
    "in": None,
    "samples": None,
}


def parse_grid(text) -> list[int]:
    """``a:b`` for ``2^a..2^b`` or a comma-separated list of integers."""
    if isinstance(text, list):
        return [int(v) for v in text]
    text = str(text).strip()
    try:
        if ":" in text:
            a, b = (int(v) for v in text.split(":"))
            grid = None
        else:
            grid = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise GridError(f"cannot parse grid {text!r}") from exc
    if grid is None:
        if not 1 <= a <= b <= 40:
            raise GridError(f"exponent range {text!r} must satisfy 1 <= a <= b <= 40")
        return [1 << k for k in range(a, b + 1)]
    if not grid:
        raise GridError("empty grid")
    return grid


def _load_json(path) -> object:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputFileError(f"cannot read JSON from {path}: {exc}") from exc


def load_coeffs(path) -> WaveletCoeffs:
    """A coefficient file, or any artifact of this tool carrying a ``coeffs`` entry."""
    obj = _load_json(path)
    if isinstance(obj, dict) and "coeffs" in obj:
        obj = obj["coeffs"]
    if not isinstance(obj, dict):
        raise InputFileError(f"{path}: expected a JSON object with alpha00 and levels")
    try:
        return WaveletCoeffs.from_dict(obj)
    except MaxisetError as exc:
        raise InputFileError(f"{path}: {exc}") from exc


def _penalty(cfg) -> PenaltyRule:
    return PenaltyRule(cfg["penalty"], float(cfg["lambda0"]), bool(cfg["over_penalize"]))


def _collection(cfg, j_max: int | None = None) -> CollectionSpec:
    name = cfg["collection"]
    j0 = cfg["j0"]
    if name == "sieve":
        return CollectionSpec.sieve(j0)
    if name == "full":
        return CollectionSpec.full(j0)
    if name == "hybrid":
        return CollectionSpec.hybrid(float(cfg["theta"]), cfg["j_trunc"] if cfg["j_trunc"] is not None else j_max)
    if name == "hybrid_trunc":
        return CollectionSpec.hybrid_trunc(float(cfg["theta"]), j0, cfg["j_trunc"])
    raise ConfigError(f"unknown collection {name!r}; expected sieve, full, hybrid or hybrid_trunc")


def _signal(cfg) -> tuple[WaveletCoeffs, str]:
    if cfg["in"]:
        return load_coeffs(cfg["in"]), f"file:{cfg['in']}"
    if cfg["samples"]:
        try:
            x = haar.read_samples_csv(cfg["samples"])
        except OSError as exc:
            raise InputFileError(f"cannot read {cfg['samples']}: {exc}") from exc
        except MaxisetError as exc:
            raise InputFileError(str(exc)) from exc
        return haar.analyze(x), f"samples:{cfg['samples']}"
    return signals.by_name(cfg["signal"], int(cfg["jmax"])), cfg["signal"]


def _out(cfg) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _finish(cfg, out: Path, name: str, payload: dict) -> dict:
    payload = {"config": _public(cfg), **payload}
    ex.write_json(out / f"{name}.json", payload)
    return payload


def _public(cfg) -> dict:
    return {k: v for k, v in cfg.items() if k not in ("command", "sub", "config", "func")}


# -- commands -------------------------------------------------------------------


def cmd_signals(cfg) -> str:
    s = signals.by_name(cfg["name"], int(cfg["jmax"]))
    out = _out(cfg)
    path = out / f"{cfg['name'].replace(':', '_')}.json"
    ex.write_json(path, s.to_dict())
    return f"wrote {path}"


def cmd_select(cfg) -> str:
    s, label = _signal(cfg)
    pen = _penalty(cfg)
    coll = _collection(cfg, s.j_max)
    n = int(cfg["n"])
    seed = parse_seed(cfg["seed"])
    obs = observe(s, n, seed)
    m, crit = select_with_criterion(obs, coll, pen)
    est = project(obs.coeffs, m)
    bias, dim = risk_decomposition(s, m)
    summary = {
        "signal": label,
        "n": n,
        "seed": seed,
        "lambda_n": lambda_n(pen, n),
        "collection": coll.resolve(n, pen).to_dict(),
        "model": m.to_dict(),
        "risk": {
            "loss": float(np.sum((est.flat - s.flat) ** 2)),
            "bias": bias,
            "dim": dim,
            "criterion": crit,
        },
        "coeffs": est.to_dict(),
    }
    _finish(cfg, _out(cfg), "select", summary)
    return json.dumps({k: summary[k] for k in ("model", "risk")})


def cmd_rate(cfg) -> str:
    s, label = _signal(cfg)
    pen = _penalty(cfg)
    coll = _collection(cfg, s.j_max)
    grid = parse_grid(cfg["grid"])
    seed = parse_seed(cfg["seed"])
    reps, jobs = int(cfg["reps"]), int(cfg["jobs"])
    out = _out(cfg)
    q = ex.q_curve(s, coll, pen, grid)
    r = ex.risk_curve(s, coll, pen, grid, reps, seed, jobs)
    with open(out / "rate.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "statistic", "lambda_n", "value", "stderr"])
        for stat, rep in (("risk", r), ("Q", q)):
            for (n, v), lam, e in zip(rep.series, rep.lambdas, rep.value_stderr):
                w.writerow([n, stat, ex.fmt(lam), ex.fmt(v), ex.fmt(e)])
    payload = {"signal": label, "seed": seed, "risk": r.to_dict(), "Q": q.to_dict()}
    line = f"risk slope {ex.fmt(r.slope)} +- {ex.fmt(r.stderr)}; Q slope {ex.fmt(q.slope)}"
    if cfg["alpha"] is not None:
        rec = ex.equivalence_check(s, coll, pen, grid, float(cfg["alpha"]), reps, seed, jobs)
        payload["equivalence"] = rec.to_dict()
        line += f"; equivalence {rec.verdict}"
    _finish(cfg, out, "rate", payload)
    return line


def cmd_spaces(cfg) -> str:
    s, label = _signal(cfg)
    alpha = float(cfg["alpha"] if cfg["alpha"] is not None else 0.5)
    theta = float(cfg["theta"])
    q = float(cfg["q"]) if cfg["q"] is not None else 2.0 / (1 + 2 * alpha)
    J = list(range(s.j_max + 1))
    reports = {
        "besov2": spaces.report(J[:-1], spaces.besov_series(s, alpha, 2.0)),
        "besov2_tail": spaces.report(J, spaces.besov2_tail_series(s, alpha)),
        "hybrid_A": spaces.report(J[:-1], spaces.hybrid_A_series(s, alpha, theta)),
    }
    for which in ("rearr", "below", "count"):
        reports[f"weak_besov_{which}"] = spaces.report(J[1:], spaces.weak_besov_series(s, q, which))
    rearr, below, count = spaces.weak_besov_functionals(s, q)
    for name, coll in (
        ("full", CollectionSpec.full()),
        ("sieve", CollectionSpec.sieve()),
        ("hybrid", CollectionSpec.hybrid(theta, s.j_max)),
    ):
        reports[f"nonlinear_A[{name}]"] = ex.nonlinear_report(s, coll, alpha, s.j_max)
    table = {k: v.to_dict() for k, v in reports.items()}
    _finish(cfg, _out(cfg), "spaces", {
        "signal": label,
        "alpha": alpha,
        "theta": theta,
        "q": q,
        "depth": s.j_max,
        "weak_besov": {"rearr": rearr, "below": below, "count": count},
        "functionals": table,
    })
    return "\n".join(f"{k:22s} {v.verdict:13s} value={ex.fmt(v.value)}" for k, v in reports.items())


def cmd_embeddings(cfg) -> str:
    alpha = float(cfg["alpha"] if cfg["alpha"] is not None else 0.5)
    rows = ex.embedding_report(alpha, float(cfg["theta"]), int(cfg["jmax"]), int(cfg["pad"]))
    out = _out(cfg)
    with open(out / "embeddings.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["witness", "functional", "verdict", "value", "growth_ratio"])
        for r in rows:
            w.writerow([r.witness, r.functional, r.report.verdict, ex.fmt(r.report.value), ex.fmt(r.report.growth_ratio)])
    matches = ex.membership_matches(rows)
    _finish(cfg, out, "embeddings", {
        "rows": [r.to_dict() for r in rows],
        "expected": {k: {"expected": e, "found": f} for k, (e, f) in matches.items()},
    })
    return "\n".join(f"{r.witness:15s} {r.functional:20s} {r.report.verdict}" for r in rows)


def cmd_oracle(cfg) -> str:
    s, label = _signal(cfg)
    pen = _penalty(cfg)
    coll = _collection(cfg, s.j_max)
    grid = parse_grid(cfg["grid"])
    seed = parse_seed(cfg["seed"])
    rep = ex.oracle_check(s, coll, pen, grid, int(cfg["reps"]), seed, int(cfg["jobs"]))
    out = _out(cfg)
    with open(out / "oracle.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "statistic", "lambda_n", "value", "stderr"])
        for n, ratio in zip(rep.n, rep.ratios):
            w.writerow([n, "oracle_ratio", ex.fmt(lambda_n(pen, n)), ex.fmt(ratio), ex.fmt(0.0)])
    _finish(cfg, out, "oracle", {"signal": label, "seed": seed, **rep.to_dict()})
    return f"max oracle ratio {ex.fmt(rep.max_ratio)}"


def cmd_an(cfg) -> str:
    pen = _penalty(cfg)
    coll = _collection(cfg, cfg["j_trunc"])
    n = int(cfg["n"])
    seed = parse_seed(cfg["seed"])
    lam = cfg["lam"]
    if cfg["kraft_target"] is not None:
        lam = lambda_for_kraft(coll, n, pen, float(cfg["kraft_target"]))
    est = estimate_An_prob(coll, n, pen, int(cfg["reps"]), seed, lam)
    lam_used = lambda_n(pen, n) if lam is None else float(lam)
    kraft = kraft_sum(coll, n, pen, lam_used)
    _finish(cfg, _out(cfg), "an", {
        "lambda": lam_used,
        "kraft_sum": kraft,
        "collection": coll.resolve(n, pen).to_dict(),
        "estimate": est.estimate,
        "stderr": est.stderr,
        "reps": est.reps,
    })
    return f"P(A_n) ~ {ex.fmt(est.estimate)} +- {ex.fmt(est.stderr)} at lambda {ex.fmt(lam_used)}"


# -- argument parsing -----------------------------------------------------------------


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file; explicit flags override it")
    p.add_argument("--out", help="output directory (default: out)")
    p.add_argument("--seed", help="decimal or 0x-hex seed (default: $MAXISET_SEED, then 0)")
    p.add_argument("--jobs", type=int, help="worker processes for replications (0 = all cores)")


def _signal_flags(p: argparse.ArgumentParser):
    p.add_argument("--signal", help="s0, s1[:alpha], besov_extremal[:alpha] or zero")
    p.add_argument("--jmax", type=int, help="depth of generated signals")
    p.add_argument("--in", dest="in", help="coefficient JSON file (or a select output)")
    p.add_argument("--samples", help="CSV of 2^J samples, transformed with the Haar basis")


def _model_flags(p: argparse.ArgumentParser):
    p.add_argument("--collection", help="sieve, full, hybrid or hybrid_trunc")
    p.add_argument("--penalty", help="logn or constant")
    p.add_argument("--lambda0", type=float)
    p.add_argument("--over-penalize", dest="over_penalize", action="store_const", const=True)
    p.add_argument("--theta", type=float)
    p.add_argument("--j0", type=int, help="fix the resolution level instead of j0(n)")
    p.add_argument("--j-trunc", dest="j_trunc", type=int)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="maxiset", description="Maxiset experiments for penalized wavelet model selection.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("signals", help="write witness signals")
    ssub = p.add_subparsers(dest="sub", required=True)
    e = ssub.add_parser("emit", help="write one signal as coefficient JSON")
    _common(e)
    e.add_argument("--name")
    e.add_argument("--jmax", type=int)
    e.set_defaults(func=cmd_signals)

    p = sub.add_parser("select", help="select a model for one noisy observation")
    _common(p)
    _signal_flags(p)
    _model_flags(p)
    p.add_argument("--n", type=int)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("rate", help="risk and Q curves with fitted rates")
    _common(p)
    _signal_flags(p)
    _model_flags(p)
    p.add_argument("--grid", help="a:b for n = 2^a..2^b, or a comma list")
    p.add_argument("--reps", type=int)
    p.add_argument("--alpha", type=float, help="also run the risk/Q equivalence check at this rate")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("spaces", help="approximation-space functionals of a signal")
    ssub = p.add_subparsers(dest="sub", required=True)
    r = ssub.add_parser("report")
    _common(r)
    _signal_flags(r)
    r.add_argument("--alpha", type=float)
    r.add_argument("--theta", type=float)
    r.add_argument("--q", type=float, help="weak-Besov index (default 2/(1+2 alpha))")
    r.set_defaults(func=cmd_spaces)

    p = sub.add_parser("embeddings", help="membership matrix of the witness signals")
    _common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--jmax", type=int)
    p.add_argument("--pad", type=int, help="extra levels built beyond jmax for tail sums")
    p.set_defaults(func=cmd_embeddings)

    p = sub.add_parser("oracle", help="empirical oracle-inequality constant")
    _common(p)
    _signal_flags(p)
    _model_flags(p)
    p.add_argument("--grid")
    p.add_argument("--reps", type=int)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("an", help="probability of the noise-control event")
    _common(p)
    _model_flags(p)
    p.add_argument("--n", type=int)
    p.add_argument("--reps", type=int)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--lambda", dest="lam", type=float, help="penalty level used in the event")
    g.add_argument("--kraft-target", dest="kraft_target", type=float, help="solve for lambda with this Kraft sum")
    p.set_defaults(func=cmd_an)
    return ap


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        data = _load_json(args.config)
        if isinstance(data, dict) and isinstance(data.get("config"), dict):
            data = data["config"]
        if not isinstance(data, dict):
            raise InputFileError(f"{args.config}: config must be a JSON object")
        unknown = set(data) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(data)
    for k, v in vars(args).items():
        if v is not None and k in DEFAULTS:
            cfg[k] = v
    return cfg


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = resolve_config(args)
        print(args.func(cfg))
    except MaxisetError as exc:
        err = {"error": type(exc).__name__, "exit_code": exc.exit_code, "message": str(exc)}
        print(json.dumps(err), file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
