import json
import subprocess
import sys
from pathlib import Path

import pytest

from gamred import __version__
from gamred import cli
from gamred.errors import InvariantViolation

DATA = Path(__file__).parent / "data"
STAR3 = str(DATA / "star3.gam")
GEN1 = str(DATA / "gen_seed1.gam")


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_reduce_star3(capsys):
    code, out, _ = run(capsys, "reduce", STAR3)
    data = json.loads(out)
    assert code == 0
    assert data["k"] == 3 and data["bound"] == 4
    assert data["parts"] == [[1, 2, 3]]
    assert data["version"] == __version__ and data["seed"] == 0
    assert data["stats"]["BaseB"] == 1


def test_verify_round_trip(capsys, tmp_path):
    _, out, _ = run(capsys, "reduce", STAR3)
    part = tmp_path / "out.json"
    part.write_text(out)
    code, out, _ = run(capsys, "verify", STAR3, str(part), "--exhaustive")
    assert code == 0
    assert json.loads(out)["ok"]


def test_verify_failure_exits_1(capsys, tmp_path):
    inst = tmp_path / "star2.gam"
    inst.write_text("p gammoid 4 3\na 1 3\na 2 3\na 3 4\ns 1\ns 2\nt 4\n")
    part = tmp_path / "bad.json"
    part.write_text(json.dumps({"k": 2, "parts": [[1], [2]]}))
    code, out, _ = run(capsys, "verify", str(inst), str(part), "--samples", "10", "--seed", "3")
    data = json.loads(out)
    assert code == 1
    assert not data["ok"] and data["seed"] == 3
    assert data["mode"] == "sampled"


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as info:
        cli.main(["bogus"])
    assert info.value.code == 2


def test_bad_instance_exits_2(capsys, tmp_path):
    bad = tmp_path / "bad.gam"
    bad.write_text("p gammoid 2 1\na 1 5\n")
    code, _, err = run(capsys, "reduce", str(bad))
    assert code == 2
    assert "line 2" in err
    code, _, _ = run(capsys, "reduce", str(tmp_path / "missing.gam"))
    assert code == 2


def test_internal_error_exits_3(capsys, monkeypatch):
    def boom(*a, **k):
        raise InvariantViolation("planted")

    monkeypatch.setattr(cli, "run_pipeline", boom)
    code, _, err = run(capsys, "reduce", STAR3)
    assert code == 3
    assert "planted" in err


def test_reduce_with_verify_and_dumps(capsys, tmp_path):
    flow, trees = tmp_path / "flow.txt", tmp_path / "trees.txt"
    code, out, _ = run(
        capsys, "reduce", GEN1, "--verify", "--emit-flow", str(flow), "--emit-trees", str(trees)
    )
    data = json.loads(out)
    assert code == 0
    assert data["verification"]["ok"]
    assert data["stats"]["tree_flow_checks"] >= 0
    assert all(line.startswith("f ") and len(line.split()) == 4 for line in flow.read_text().splitlines())
    assert any(line.startswith("tree ") for line in trees.read_text().splitlines())


def test_fast_mode_skips_tree_flow_checks(capsys, monkeypatch):
    monkeypatch.setenv("GAMRED_DEBUG_ASSERT", "1")
    _, out, _ = run(capsys, "reduce", GEN1, "--fast")
    assert json.loads(out)["stats"]["tree_flow_checks"] == 0


def test_batch_mode_returns_array(capsys):
    code, out, _ = run(capsys, "reduce", STAR3, GEN1, "--jobs", "2")
    data = json.loads(out)
    assert code == 0
    assert [d["instance"] for d in data] == [STAR3, GEN1]


def test_outputs_are_byte_identical(capsys):
    _, a, _ = run(capsys, "reduce", GEN1, "--verify", "--seed", "5")
    _, b, _ = run(capsys, "reduce", GEN1, "--verify", "--seed", "5")
    assert a == b


def test_color_number(capsys):
    code, out, _ = run(capsys, "color-number", STAR3)
    assert code == 0
    assert json.loads(out)["k"] == 3


def test_gen_matches_golden(capsys):
    code, out, _ = run(
        capsys, "gen", "--n-vertices", "10", "--n-edges", "14", "--n-sources", "4",
        "--n-sinks", "2", "--layers", "3", "--seed", "1",
    )
    assert code == 0
    assert out == (DATA / "gen_seed1.gam").read_text()


def test_gen_invalid_params_exit_2(capsys):
    code, _, err = run(
        capsys, "gen", "--n-vertices", "5", "--n-edges", "5", "--n-sources", "0", "--n-sinks", "1",
    )
    assert code == 2
    assert "n_sources" in err


def test_intersect_and_list_color(capsys, tmp_path):
    m2 = tmp_path / "m2.txt"
    m2.write_text("x 1 2\nx 3\n")
    code, out, _ = run(capsys, "intersect", STAR3, str(m2))
    data = json.loads(out)
    assert code == 0
    assert data["k1"] == 3 and data["k2"] == 2
    assert data["colors"] <= 3 * 3
    assert sorted(e for c in data["classes"] for e in c) == [1, 2, 3]

    lists = tmp_path / "lists.json"
    lists.write_text(json.dumps({"1": [1, 2, 3, 4, 5, 6], "2": [2, 3, 4, 5, 6, 7], "3": [1, 3, 5, 7, 9, 11]}))
    code, out, _ = run(capsys, "list-color", STAR3, str(m2), str(lists))
    data = json.loads(out)
    assert code == 0
    assert data["assignment"]["3"] in [1, 3, 5, 7, 9, 11]


def test_list_color_too_small_exits_2(capsys, tmp_path):
    m2 = tmp_path / "m2.txt"
    m2.write_text("x 1\nx 2\nx 3\n")
    lists = tmp_path / "lists.json"
    lists.write_text(json.dumps({"1": [1], "2": [1], "3": [1]}))
    code, _, err = run(capsys, "list-color", STAR3, str(m2), str(lists))
    assert code == 2
    assert "needs at least" in err


def test_console_script_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "gamred.cli", "reduce", STAR3],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["k"] == 3
