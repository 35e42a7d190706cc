import json
import subprocess
import sys
from pathlib import Path

import pytest

from stanley_lab.cli import build_parser, default_budget, main, parse_varlist

IDEALS = Path(__file__).resolve().parent.parent / "ideals"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_analyze_section1_file(capsys):
    code, doc = run_json(capsys, "analyze", str(IDEALS / "example-section1.json"))
    assert code == 0
    assert doc["schema"] == 1
    assert doc["invariants"]["size"] == 1
    assert doc["invariants"]["big_size"] == 3
    assert doc["depth"]["depth_quotient"] == 1
    assert doc["depth"]["trace"][0]["rule"] == "bipartition"
    assert doc["depth"]["method"] == "formula"
    assert doc["bound"]["method"] in ("bound", "exact")
    assert doc["status"] == "PROVED_EXACT"


def test_analyze_table(capsys):
    code, out, _ = run(capsys, "analyze", "example-section1", "--no-exact")
    assert code == 0
    assert "big size" in out and "PROVED" in out


def test_json_is_deterministic(capsys):
    _, first, _ = run(capsys, "analyze", "example-hin", "--json")
    _, second, _ = run(capsys, "analyze", "example-hin", "--json")
    assert first == second


def test_depth_modes(capsys):
    code, doc = run_json(capsys, "depth", "example-hin", "--oracle-only")
    assert code == 0 and doc["depth"] == {"depth_quotient": 3, "depth_ideal": 4,
                                          "method": "oracle"}
    code, doc = run_json(capsys, "depth", "example-hin", "--formula-only")
    assert doc["depth"]["oracle"] is None and doc["depth"]["depth_ideal"] == 4
    code, doc = run_json(capsys, "depth", "example-hin", "--field", "GF2")
    assert doc["depth"]["agreement"] is True


def test_oracle_cap_is_indeterminate(capsys, tmp_path):
    path = tmp_path / "big.json"
    path.write_text(json.dumps({"n": 13, "primes": [[1, 2]]}))
    code, _, err = run(capsys, "depth", str(path), "--oracle-only")
    assert code == 2 and "capped" in err


def test_sdepth_forced_main(capsys):
    code, doc = run_json(capsys, "sdepth", "example-hin", "--main", "R=5,6,7,8,9,10")
    assert code == 0
    assert doc["bound"]["value"] >= 4 and doc["bound"]["main"] == [5, 6, 7, 8, 9, 10]


def test_sdepth_exact_indeterminate(capsys, tmp_path):
    path = tmp_path / "wide.json"
    path.write_text(json.dumps({"n": 11, "primes": [[1, 2], [3, 4]]}))
    code, doc = run_json(capsys, "sdepth", str(path), "--exact")
    assert code == 2
    assert doc["exact_sdepth"]["indeterminate"] is True
    assert doc["exact_sdepth"]["method"] == "exact"


def test_split_on_hin(capsys):
    code, doc = run_json(capsys, "split", "example-hin", "--main", "5,6,7,8,9,10")
    assert code == 0
    assert doc["split"]["verify_direct_sum"]["ok"] is True
    assert [2] in doc["split"]["excluded_tau"]


def test_decompose(capsys):
    code, out, _ = run(capsys, "decompose", str(IDEALS / "two-planes.json"))
    assert code == 0
    assert out.splitlines()[0] == "sdepth 3"
    assert out.count("⊕") == 4


@pytest.mark.parametrize("name", ["example-section1", "example-hin", "remark-r1"])
def test_repro(capsys, name):
    code, out, _ = run(capsys, "repro", name)
    assert code == 0, out
    assert "all expected values reproduced" in out


def test_repro_hin_prints_pair_table(capsys):
    _, out, _ = run(capsys, "repro", "example-hin")
    assert "P2+P5 misses {1,2}" in out
    assert "P1+P2 misses {9,10}" in out


def test_enumerate_and_resume(capsys, tmp_path):
    ckpt = tmp_path / "c.txt"
    code, doc = run_json(capsys, "enumerate", "--n", "3", "--s", "3", "--checkpoint", str(ckpt))
    assert code == 0 and doc["summary"]["ok"]
    total = doc["summary"]["families"]
    code, doc = run_json(capsys, "enumerate", "--n", "3", "--s", "3", "--resume", str(ckpt))
    assert doc["summary"]["skipped"] == total and doc["summary"]["families"] == 0


def test_enumerate_list(capsys):
    code, doc = run_json(capsys, "enumerate", "--n", "2", "--s", "2", "--list")
    assert doc["families"] == ["1:1", "2:1", "2:1,2", "2:1;2"]


def test_enumerate_cap(capsys):
    code, _, err = run(capsys, "enumerate", "--n", "7", "--s", "2", "--list")
    assert code == 1 and "capped" in err


@pytest.mark.parametrize("content", [
    "not json",
    '{"primes": [[1]]}',
    '{"n": 3, "primes": [[1, 4]]}',
    '{"n": 3, "primes": [[]]}',
    '{"n": 3, "primes": [["a"]]}',
    '{"n": true, "primes": [[1]]}',
])
def test_bad_input_exit_one(capsys, tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    code, _, err = run(capsys, "depth", str(path))
    assert code == 1 and err.startswith("error:")


def test_missing_file(capsys):
    code, _, _ = run(capsys, "analyze", "/no/such/file.json")
    assert code == 1


def test_bad_main(capsys):
    assert run(capsys, "split", "example-hin", "--main", "1,2")[0] == 1
    assert run(capsys, "split", "example-hin", "--main", "11")[0] == 1
    assert run(capsys, "split", "example-hin", "--main", "a")[0] == 1


def test_parse_varlist():
    assert parse_varlist("R=1,3-4", 5) == 0b1101


def test_budget_env(monkeypatch):
    monkeypatch.setenv("STANLEY_LAB_BUDGET_MS", "1234")
    assert default_budget() == 1234
    assert build_parser().parse_args(["decompose", "x"]).budget == 1234
    monkeypatch.setenv("STANLEY_LAB_BUDGET_MS", "soon")
    assert default_budget() == 20_000


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "stanley_lab", "repro", "remark-r1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "A " in proc.stdout
