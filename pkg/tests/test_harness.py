import hashlib
import json
import re

import pytest

from chromacc.harness.cli import main
from chromacc.harness.config import ConfigError, ExperimentConfig, derive_seed
from chromacc.harness.pipeline import fit_n
from chromacc.instances import InstanceError, read_instance

ERR = re.compile(r"^error\[E_[A-Z_]+\]: .+$")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def assert_error(code, err, expect=None):
    assert code != 0
    lines = err.strip().splitlines()
    assert len(lines) == 1 and ERR.match(lines[0]), err
    if expect:
        assert lines[0].startswith(f"error[{expect}]")


def test_generate_max_interfering(tmp_path, capsys):
    out = tmp_path / "g.json"
    code, text, _ = run(capsys, "generate", "--family", "max_interfering", "--n", 20, "--L", 2, "--out", out)
    assert code == 0
    doc = json.loads(out.read_text())
    assert len(doc["edges"]) == 190
    stats = json.loads(text)
    assert stats["colors"]["gamma"] == 0 and stats["gamma_fraction"] == 0.0


def test_generate_blowup_needs_base(tmp_path, capsys):
    code, _, err = run(capsys, "generate", "--family", "blowup", "--L", 2, "--out", tmp_path / "b.json")
    assert_error(code, err, "E_PARAM")
    code, _, err = run(capsys, "generate", "--family", "blowup", "--L", 2, "--base", tmp_path / "nope.json", "--out", tmp_path / "b.json")
    assert_error(code, err, "E_INSTANCE")


def test_generate_blowup_with_and_without_metric(tmp_path, capsys):
    base = tmp_path / "base.json"
    base.write_text(json.dumps({"n": 3, "signs": ["+", "+", "-"], "lp": [0.5, 0.5, 1.0]}))
    code, _, _ = run(capsys, "generate", "--family", "blowup", "--L", 3, "--base", base, "--out", tmp_path / "b.json")
    assert code == 0
    assert read_instance(tmp_path / "b.json").n == 9
    base.write_text(json.dumps({"signs": ["+", "+", "-"]}))
    code, _, _ = run(capsys, "generate", "--family", "blowup", "--L", 2, "--base", base, "--out", tmp_path / "c.json")
    assert code == 0
    assert read_instance(tmp_path / "c.json").n == 6


def test_generate_tabular(tmp_path, capsys):
    feats = tmp_path / "f.csv"
    feats.write_text("a;b;group\n1;0;0\n0.9;0.1;1\n0;1;1\n")
    code, _, _ = run(capsys, "generate", "--family", "tabular", "--features", feats, "--delimiter", ";", "--out", tmp_path / "t.json")
    assert code == 0
    inst = read_instance(tmp_path / "t.json")
    assert inst.n == 3 and inst.L == 2


def test_generate_edges(tmp_path, capsys):
    edges = tmp_path / "e.csv"
    edges.write_text("u,v,color\n0,1,c0\n1,2,gamma\n2,3,c1\n")
    code, _, _ = run(capsys, "generate", "--family", "edges", "--edges", edges, "--L", 2, "--out", tmp_path / "e.json")
    assert code == 0
    inst = read_instance(tmp_path / "e.json")
    assert inst.n == 4 and inst.n_labeled == 2


def test_generate_bad_params(tmp_path, capsys):
    code, _, err = run(capsys, "generate", "--family", "max_interfering", "--n", 5, "--L", 2, "--out", tmp_path / "x.json")
    assert_error(code, err, "E_INSTANCE")
    code, _, err = run(capsys, "generate", "--family", "max_interfering", "--L", 2, "--out", tmp_path / "x.json")
    assert_error(code, err, "E_PARAM")
    code, _, err = run(capsys, "generate", "--family", "nope", "--out", "x")
    assert_error(code, err, "E_USAGE")


def _gen(tmp_path, capsys, n, L, name="i.json", neg=0.0):
    p = tmp_path / name
    assert run(capsys, "generate", "--family", "max_interfering", "--n", n, "--L", L, "--neg-fraction", neg, "--out", p)[0] == 0
    return p


def test_solve_single_color_zero(tmp_path, capsys):
    inst = _gen(tmp_path, capsys, 5, 1)
    code, out, _ = run(capsys, "solve", inst, "--out", tmp_path / "s.sol")
    assert code == 0 and json.loads(out)["objective"] == pytest.approx(0.0)


def test_solve_c4_vacuous_at_one_color(tmp_path, capsys):
    inst = _gen(tmp_path, capsys, 6, 1, neg=0.0)
    inst.write_text(inst.read_text())
    a = json.loads(run(capsys, "solve", inst)[1])["objective"]
    b = json.loads(run(capsys, "solve", inst, "--c4")[1])["objective"]
    assert a == b


def test_solve_byte_identical(tmp_path, capsys):
    inst = _gen(tmp_path, capsys, 9, 3, neg=0.3)
    run(capsys, "solve", inst, "--out", tmp_path / "a.sol")
    run(capsys, "solve", inst, "--out", tmp_path / "b.sol")
    assert (tmp_path / "a.sol").read_bytes() == (tmp_path / "b.sol").read_bytes()


def test_solve_refuses_invalid(tmp_path, capsys):
    inst = _gen(tmp_path, capsys, 4, 2)
    bad = tmp_path / "bad.sol"
    lines = ["# n 4", "# L 2"] + [f"x_u{u}_c{c} 0" for u in range(4) for c in range(2)]
    lines += [f"x_p{u}_{v}_c{c} 0" for u in range(4) for v in range(u + 1, 4) for c in range(2)]
    bad.write_text("\n".join(lines) + "\n")
    code, _, err = run(capsys, "solve", inst, "--solver", "external", "--sol-in", bad)
    assert_error(code, err, "E_INVALID_SOLUTION")


def test_round_and_trace(tmp_path, capsys):
    inst = _gen(tmp_path, capsys, 8, 2, neg=0.3)
    run(capsys, "solve", inst, "--c4", "--out", tmp_path / "c4.sol")
    code, _, _ = run(capsys, "round", inst, "--algorithm", "c4", "--solution", tmp_path / "c4.sol",
                     "--trace-out", tmp_path / "t.jsonl", "--out", tmp_path / "r.json")
    assert code == 0
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc["algorithm"] == "c4" and doc["cost"] >= 0
    assert (tmp_path / "t.jsonl").read_text().strip()


def test_gap_rows_and_mismatch(tmp_path, capsys):
    inst = _gen(tmp_path, capsys, 8, 2, neg=0.3)
    run(capsys, "solve", inst, "--out", tmp_path / "s.sol")
    code, _, _ = run(capsys, "gap", inst, "--solution", tmp_path / "s.sol", "--algorithms", "pivot", "--trials", 10, "--out", tmp_path / "g.csv")
    assert code == 0
    body = (tmp_path / "g.csv").read_text().split("\n# summary\n")[0].strip().splitlines()
    assert len(body) == 1 + 10
    code, _, err = run(capsys, "gap", inst, "--solution", tmp_path / "s.sol", "--algorithms", "c4")
    assert_error(code, err, "E_SOLUTION_MISMATCH")


def test_staircase_table(capsys):
    code, out, _ = run(capsys, "staircase", "--L", 1, 2, 3, 4, 10)
    rows = [line.split("\t") for line in out.strip().splitlines()[1:]]
    assert len(rows) == 5
    expected = {"1": 2.0600, "2": 2.0967, "3": 2.1089, "4": 2.1150, "10": 2.1260}
    for L, _, g in rows:
        assert abs(float(g) - expected[L]) <= 5e-4


def test_saddle_command(capsys):
    code, out, _ = run(capsys, "saddle")
    doc = json.loads(out)
    assert code == 0 and doc["saddle"]["grad_norm"] <= 1e-5
    assert "deviation" in doc["reference"]


def test_triples_command(capsys):
    code, out, _ = run(capsys, "triples", "--signs", "cc", "--witness")
    doc = json.loads(out)
    assert doc["ratio"] == pytest.approx(2.06, abs=0.02)
    assert all(r["holds"] for r in doc["independence"])


def test_experiment_sweep_deterministic(tmp_path, capsys):
    cfg = {
        "name": "sweep",
        "family": "max_interfering",
        "params": {"n": 10, "neg_fraction": 0.3},
        "L": [1, 2, 3, 4],
        "algorithms": ["pivot", "lp_ccc", "c4"],
        "trials": 5,
        "seed_base": 7,
        "n_policy": "floor",
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    outs = []
    for k in range(2):
        assert run(capsys, "experiment", path, "--out-dir", tmp_path / f"run{k}")[0] == 0
        outs.append(tmp_path / f"run{k}" / "sweep")
    for L in (1, 2, 3, 4):
        a = (outs[0] / "reports" / f"gap_L{L}.csv").read_text()
        assert a == (outs[1] / "reports" / f"gap_L{L}.csv").read_text()
        assert f",{L}," in a.splitlines()[1]
        meta = json.loads((outs[0] / "instances" / f"L{L}.json").read_text())
        assert meta["L"] == L and meta["meta"]["n"] == (10 // L) * L
    assert (outs[0] / "summary.csv").read_bytes() == (outs[1] / "summary.csv").read_bytes()
    assert json.loads((outs[0] / "config.json").read_text())["seed_base"] == 7


def test_experiment_config_errors(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"family": "max_interfering", "colour": 3}))
    code, _, err = run(capsys, "experiment", p)
    assert_error(code, err, "E_CONFIG")
    p.write_text("{not json")
    code, _, err = run(capsys, "experiment", p)
    assert_error(code, err, "E_CONFIG")
    with pytest.raises(ConfigError):
        ExperimentConfig(algorithms=["magic"])


def test_derive_seed_stable():
    expect = int.from_bytes(hashlib.blake2b(b"7|instance|2", digest_size=8).digest(), "big") & 0x7FFFFFFF
    assert derive_seed(7, "instance", 2) == expect
    assert derive_seed(7, "instance", 2) != derive_seed(7, "instance", 3)


def test_fit_n():
    assert fit_n(40, 3, "floor") == 39
    assert fit_n(40, 3) == 40
    with pytest.raises(InstanceError):
        fit_n(2, 3, "floor")
