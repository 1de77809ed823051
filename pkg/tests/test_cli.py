import json
import subprocess
import sys
from pathlib import Path

import pytest

from vclab.cli import RunReport, dumps, main, run_command

FIXTURE = Path(__file__).parent / "fixtures" / "q8.cayley"


def test_analyze_q8():
    code, rep = run_command(["analyze", "--group", "q8"])
    r = rep.result
    assert code == 0
    assert r["centre"] == ["1", "-1"]
    assert r["witness"] == {"b": "i", "p": 2, "k": 1}
    assert r["special_set"] == ["1", "-1"]
    assert (r["n"], r["n_exact"]) == (0, True)
    assert r["centre_direct_factor"] is None


def test_analyze_from_file():
    code, rep = run_command(["analyze", "--group", f"@{FIXTURE}"])
    assert code == 0 and rep.result["witness"]["b"] == "i"


def test_analyze_pure_centre():
    code, rep = run_command(["analyze", "--group", "s3xz2"])
    assert code == 0 and rep.result["centre_pure"]
    assert len(rep.result["centre_direct_factor"]) == 6
    assert all(name.endswith(",0)") for name in rep.result["centre_direct_factor"])


def test_analyze_bad_witness():
    code, rep = run_command(["analyze", "--group", "q8", "--b", "-1"])
    assert code == 1 and "witness_error" in rep.result


def test_fnlemma_enumerate():
    code, rep = run_command(["fnlemma", "--p", "2", "--k", "1", "--n", "1", "--enumerate"])
    assert code == 0 and rep.result["passed"]
    assert len(rep.result["functions"]) == 4


def test_fnlemma_bound_violation():
    code, rep = run_command(["fnlemma", "--p", "2", "--k", "1", "--n", "1", "--m", "1"])
    assert code == 1 and rep.result["bound_violated"]


def test_construct_inapplicable():
    code, rep = run_command(["construct", "--group", "z4"])
    assert code == 1 and "pure" in rep.result["error"]


def test_construct_budget():
    code, rep = run_command(["construct", "--group", "q8", "--n", "2", "--cap-family", "5"])
    assert code == 3


def test_verify_nac_and_verify(tmp_path):
    out = tmp_path / "cert.json"
    code, rep = run_command(["verify-nac", "--group", "d4", "--out", str(out)])
    assert code == 0 and rep.result["issued"]
    code, rep = run_command(["verify", str(out)])
    assert code == 0 and rep.result["equations_ok"] == 58


def test_verify_nac_budget():
    code, _ = run_command(["verify-nac", "--group", "q8", "--cap-nodes", "5"])
    assert code == 3


def test_verify_vc_custom_word():
    code, rep = run_command(["verify-vc", "--group", "q8", "--classes", "curated",
                             "--word", "x^2"])
    assert code == 0 and rep.result["complete_classes"] == ["x^2"]


def test_verify_missing_file(tmp_path):
    code, _ = run_command(["verify", str(tmp_path / "nope.json")])
    assert code == 2


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["analyze", "--bogus"],
                                  ["analyze", "--group", "nosuch"], ["analyze", "--p", "2"]])
def test_usage_errors(argv):
    code, rep = run_command(argv)
    assert code == 2 and "error" in rep.result


def test_report_round_trip():
    _, rep = run_command(["analyze", "--group", "d4"])
    d = json.loads(dumps(rep.to_dict()))
    assert RunReport.from_dict(d).to_dict() == rep.to_dict()


def test_reports_deterministic():
    a = run_command(["analyze", "--group", "a4"])[1].to_dict(with_timing=False)
    b = run_command(["analyze", "--group", "a4"])[1].to_dict(with_timing=False)
    assert dumps(a) == dumps(b)


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("VCLAB_SEED", "11")
    _, rep = run_command(["analyze"])
    assert rep.seed == 11


def test_main_prints_json(capsys):
    assert main(["catalog"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["result"]["q8"] == 8


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "vclab", "analyze", "--group", "d4"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["witness"]["b"] == "r"
