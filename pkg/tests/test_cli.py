import json

import pytest

from maxiset.cli import main, parse_grid
from maxiset.coeffs import WaveletCoeffs
from maxiset.errors import GridError
from maxiset.model_collections import ModelSpec


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_grid():
    assert parse_grid("8:10") == [256, 512, 1024]
    assert parse_grid("100, 200") == [100, 200]
    for bad in ("9:3", "a:b", "", "0:4"):
        with pytest.raises(GridError):
            parse_grid(bad)


def test_signals_emit_roundtrip(tmp_path, capsys):
    code, _, _ = run(capsys, "signals", "emit", "--name", "s1:0.5", "--jmax", 6, "--out", tmp_path)
    assert code == 0
    c = WaveletCoeffs.from_json((tmp_path / "s1_0.5.json").read_text())
    assert c.j_max == 6
    code, _, _ = run(capsys, "select", "--in", tmp_path / "s1_0.5.json", "--n", 512, "--out", tmp_path / "b")
    assert code == 0


def test_select(tmp_path, capsys):
    args = ["select", "--collection", "full", "--lambda0", 4, "--penalty", "logn", "--n", 4096,
            "--signal", "s0", "--seed", 7, "--out", tmp_path]
    code, out, _ = run(capsys, *args)
    assert code == 0
    rec = json.loads((tmp_path / "select.json").read_text())
    m = ModelSpec.from_dict(rec["model"])
    assert m.dim == rec["risk"]["dim"]
    assert json.loads(out)["model"] == rec["model"]
    # every artifact is accepted back: as a config, and as a coefficient file
    code, _, _ = run(capsys, "select", "--config", tmp_path / "select.json", "--out", tmp_path / "again")
    assert code == 0
    assert (tmp_path / "again" / "select.json").read_text().replace(str(tmp_path / "again"), "X") == \
        (tmp_path / "select.json").read_text().replace(str(tmp_path), "X")
    code, _, _ = run(capsys, "select", "--in", tmp_path / "select.json", "--n", 4096, "--out", tmp_path / "c")
    assert code == 0


def test_seed_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("MAXISET_SEED", "0x7")
    run(capsys, "select", "--signal", "s0", "--out", tmp_path / "env")
    monkeypatch.delenv("MAXISET_SEED")
    run(capsys, "select", "--signal", "s0", "--seed", 7, "--out", tmp_path / "flag")
    a = json.loads((tmp_path / "env" / "select.json").read_text())
    b = json.loads((tmp_path / "flag" / "select.json").read_text())
    assert a["seed"] == b["seed"] == 7
    assert a["model"] == b["model"]


def test_rate_outputs_deterministic(tmp_path, capsys):
    args = ["rate", "--signal", "besov_extremal:0.5", "--collection", "full", "--grid", "8:12",
            "--reps", 20, "--seed", 1, "--jobs", 1, "--alpha", 0.5]
    assert run(capsys, *args, "--out", tmp_path / "a")[0] == 0
    assert run(capsys, *args, "--out", tmp_path / "b")[0] == 0
    a, b = (tmp_path / "a" / "rate.csv").read_bytes(), (tmp_path / "b" / "rate.csv").read_bytes()
    assert a == b
    lines = a.decode().splitlines()
    assert lines[0] == "n,statistic,lambda_n,value,stderr"
    assert len(lines) == 1 + 2 * 5
    rec = json.loads((tmp_path / "a" / "rate.json").read_text())
    assert rec["equivalence"]["verdict"] in ("consistent", "violation")
    code, _, _ = run(capsys, "rate", "--config", tmp_path / "a" / "rate.json", "--out", tmp_path / "c")
    assert code == 0
    assert (tmp_path / "c" / "rate.csv").read_bytes() == a


def test_rate_jobs_do_not_change_results(tmp_path, capsys):
    base = ["rate", "--signal", "s0", "--grid", "8:10", "--reps", 12, "--seed", 3]
    run(capsys, *base, "--jobs", 1, "--out", tmp_path / "one")
    run(capsys, *base, "--jobs", 2, "--out", tmp_path / "two")
    assert (tmp_path / "one" / "rate.csv").read_bytes() == (tmp_path / "two" / "rate.csv").read_bytes()


def test_spaces_embeddings_oracle_an(tmp_path, capsys):
    assert run(capsys, "spaces", "report", "--signal", "s1:0.5", "--jmax", 10, "--out", tmp_path)[0] == 0
    rec = json.loads((tmp_path / "spaces.json").read_text())
    assert {"besov2_tail", "hybrid_A", "weak_besov_count"} <= set(rec["functionals"])
    assert rec["functionals"]["besov2_tail"]["verdict"] in ("bounded", "diverging", "inconclusive")

    code, out, _ = run(capsys, "embeddings", "--alpha", 0.5, "--theta", 3, "--jmax", 16, "--out", tmp_path)
    assert code == 0
    rec = json.loads((tmp_path / "embeddings.json").read_text())
    assert all(v["expected"] == v["found"] for v in rec["expected"].values())

    code, out, _ = run(capsys, "oracle", "--signal", "s0", "--grid", "8:10", "--reps", 10, "--out", tmp_path)
    assert code == 0 and "max oracle ratio" in out

    code, out, _ = run(capsys, "an", "--collection", "full", "--j0", 2, "--kraft-target", 0.5, "--reps", 200,
                       "--out", tmp_path)
    assert code == 0
    rec = json.loads((tmp_path / "an.json").read_text())
    assert rec["kraft_sum"] == pytest.approx(0.5, rel=1e-9)


@pytest.mark.parametrize(
    "argv,code,name",
    [
        (["select", "--collection", "bogus"], 2, "ConfigError"),
        (["select", "--penalty", "cubic"], 2, "ConfigError"),
        (["rate", "--grid", "9:3"], 12, "GridError"),
        (["select", "--seed", "zz"], 2, "ConfigError"),
        (["select", "--signal", "s0", "--jmax", 4, "--collection", "full", "--j0", 6], 3, "ShapeError"),
        (["oracle", "--signal", "s0", "--jmax", 6, "--grid", "14:16", "--reps", 2], 9, "InsufficientDepthError"),
        (["select", "--n", 8, "--penalty", "constant", "--lambda0", 16], 8, "NoiseTooLargeError"),
        (["an", "--collection", "full", "--j0", 2, "--lambda", 0.5, "--reps", 10], 5, "PenaltyTooSmallError"),
        (["spaces", "report", "--theta", 2], 11, "DomainError"),
        (["select", "--collection", "hybrid_trunc", "--theta", 3, "--j0", 8, "--j-trunc", 4], 2, "ConfigError"),
    ],
)
def test_errors_have_distinct_codes(tmp_path, capsys, argv, code, name):
    got, _, err = run(capsys, *argv, "--out", tmp_path)
    assert got == code
    rec = json.loads(err)
    assert rec["error"] == name and rec["exit_code"] == code and rec["message"]


def test_malformed_inputs(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    got, _, err = run(capsys, "select", "--in", bad, "--out", tmp_path)
    assert got == 13 and json.loads(err)["error"] == "InputFileError"
    bad.write_text(json.dumps({"alpha00": 0, "levels": [[1], [1, 2, 3]]}))
    assert run(capsys, "select", "--in", bad, "--out", tmp_path)[0] == 13
    samples = tmp_path / "x.csv"
    samples.write_text("1\n2\n3\n")
    assert run(capsys, "select", "--samples", samples, "--out", tmp_path)[0] == 13
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"colour": "red"}))
    assert run(capsys, "select", "--config", cfg, "--out", tmp_path)[0] == 2


def test_samples_input(tmp_path, capsys):
    samples = tmp_path / "x.csv"
    samples.write_text("value\n" + "\n".join(str(v) for v in [1, -1, 2, 0, 3, 3, 1, 1]) + "\n")
    code, _, _ = run(capsys, "select", "--samples", samples, "--n", 8, "--collection", "sieve",
                     "--penalty", "constant", "--lambda0", 2, "--out", tmp_path)
    assert code == 0
