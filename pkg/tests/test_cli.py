import json
import shutil
import subprocess
import sys

import pytest

from pgw.cli import main
from pgw.runner import SCHEMA, SCHEMA_VERSION

HEISENBERG = "pgroup p=3\ngens a b c\nconj b^a = b*c\n"


@pytest.fixture
def heis(tmp_path):
    f = tmp_path / "heis.pcp"
    f.write_text(HEISENBERG)
    return str(f)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_validate(capsys, heis, tmp_path):
    code, out, _ = run(capsys, "validate", heis)
    assert code == 0 and "order 3^3 = 27" in out
    bad = tmp_path / "bad.pcp"
    bad.write_text("pgroup p=3\ngens a b c\npow a = b\nconj b^a = b*c\n")
    code, out, _ = run(capsys, "validate", str(bad))
    assert code == 1 and "inconsistent" in out
    bad.write_text("pgroup p=4\ngens a\n")
    code, out, _ = run(capsys, "validate", str(bad))
    assert code == 1 and "parse error" in out


def test_usage_and_io_errors(capsys, tmp_path):
    assert run(capsys, "validate", str(tmp_path / "missing.pcp"))[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys)[0] == 2
    assert run(capsys, "verify", "--checks", "thm-9")[0] == 2
    assert run(capsys, "verify", "--corpus", str(tmp_path / "nope"))[0] == 2
    assert run(capsys, "verify", "--jobs", "0")[0] == 2
    assert run(capsys, "corpus", "emit", "no-such-group", str(tmp_path))[0] == 2


def test_info_json(capsys, heis):
    code, out, _ = run(capsys, "info", heis, "--json")
    data = json.loads(out)
    assert code == 0
    assert data["order"] == 27 and data["class"] == 2 and data["exponent"] == 3
    assert data["lower_central_series"] == [27, 3, 1]
    assert data["metabelian"] is True and data["powerful"] is False


def test_multiplier_wedge_aut(capsys, heis):
    code, out, _ = run(capsys, "multiplier", heis, "--json")
    assert code == 0 and json.loads(out)["invariants"] == [3, 3]
    code, out, _ = run(capsys, "multiplier", heis, "--method", "bar")
    assert code == 0 and "{3, 3}" in out
    code, out, _ = run(capsys, "wedge", heis, "--json")
    data = json.loads(out)
    assert code == 0 and data["order"] == 27 and data["exponent"] == 3 and data["cover_order"] == 243
    code, out, _ = run(capsys, "aut", heis, "--json")
    assert code == 0 and json.loads(out) == {"order": 432, "q": 3}


def test_caps_from_environment(capsys, heis, monkeypatch):
    monkeypatch.setenv("PGW_CAPS", "aut=9")
    code, _, err = run(capsys, "aut", heis)
    assert code == 2 and "cap" in err
    code, out, _ = run(capsys, "aut", heis, "--slow")
    assert code == 0 and "432" in out
    monkeypatch.setenv("PGW_CAPS", "aut=oops")
    code, _, err = run(capsys, "aut", heis)
    assert code == 2 and "PGW_CAPS" in err
    monkeypatch.setenv("PGW_CAPS", "wedge=9")
    assert run(capsys, "wedge", heis)[0] == 2


def test_empty_corpus_directory(capsys, tmp_path):
    report = tmp_path / "r.json"
    code, out, _ = run(capsys, "verify", "--corpus", str(tmp_path), "--report", str(report))
    assert code == 0 and "0 groups" in out
    data = json.loads(report.read_text())
    assert data["entries"] == []
    assert set(data["summary"].values()) == {0}


def test_emit_then_verify_directory(capsys, tmp_path):
    for name in ("heisenberg-3", "abelian-C9", "dihedral-8"):
        assert run(capsys, "corpus", "emit", name, str(tmp_path))[0] == 0
    assert run(capsys, "validate", str(tmp_path / "heisenberg-3.pcp"))[0] == 0
    report = tmp_path / "out" / "r.json"
    report.parent.mkdir()
    code, out, _ = run(capsys, "verify", "--corpus", str(tmp_path), "--report", str(report), "-v")
    assert code == 0
    data = json.loads(report.read_text())
    assert list(data) == ["schema", "schema_version", "generator", "timestamp", "options", "summary", "entries"]
    assert data["schema"] == SCHEMA and data["schema_version"] == SCHEMA_VERSION
    assert [e["name"] for e in data["entries"]] == ["abelian-C9", "dihedral-8", "heisenberg-3"]
    e = data["entries"][2]
    assert list(e) == ["name", "order", "class", "exponent", "checks", "timings"]
    assert (e["order"], e["class"], e["exponent"], e["timings"]) == (27, 2, 3, None)
    for c in e["checks"]:
        assert {"id", "verdict", "hypotheses", "witnesses"} <= set(c)
        if c["witnesses"]:
            assert {"lhs", "rhs", "relation"} <= set(c["witnesses"])
    assert "PASS" in out


def test_verify_filter_and_exit_status(capsys, tmp_path):
    run(capsys, "corpus", "emit", "abelian-C3", str(tmp_path))
    code, out, _ = run(capsys, "verify", "--corpus", str(tmp_path), "--checks", "thm-3.5-ii")
    # cyclic group of prime order violates the printed bound for part (ii)
    assert code == 1 and "FAIL" in out
    code, _, _ = run(capsys, "verify", "--corpus", str(tmp_path), "--checks", "thm-2.1,conjecture", "--timings",
                     "--report", str(tmp_path / "r.json"))
    assert code == 0
    data = json.loads((tmp_path / "r.json").read_text())
    assert {c["id"] for c in data["entries"][0]["checks"]} == {"thm-2.1-i", "thm-2.1-ii", "conjecture"}
    assert data["entries"][0]["timings"]["total"] >= 0
    assert data["options"]["checks"] == ["thm-2.1", "conjecture"]


def test_corpus_list(capsys):
    code, out, _ = run(capsys, "corpus", "list")
    assert code == 0
    assert len(out.strip().splitlines()) == 67
    assert "maxclass-243" in out


def test_console_script_runs():
    exe = shutil.which("pgw")
    cmd = [exe] if exe else [sys.executable, "-m", "pgw.cli"]
    proc = subprocess.run(cmd + ["corpus", "list"], capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert "heisenberg-3" in proc.stdout
