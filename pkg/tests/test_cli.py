import json
from pathlib import Path

import pytest

from prudent.cli import main
from prudent.theories import nspk_text

HERE = Path(__file__).parent
DY_THY = Path(__file__).parents[1] / "src" / "prudent" / "data" / "dolev_yao.thy"


@pytest.fixture
def nspk_file(tmp_path):
    p = tmp_path / "nspk.spec"
    p.write_text(nspk_text())
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_check_theories(capsys, tmp_path):
    assert run(capsys, "check", str(DY_THY))[0] == 0
    fresh = tmp_path / "fresh.thy"
    fresh.write_text("theory fresh\npublic f/1\nvars X\nrule f(X) -> h(X)\nend\n")
    assert run(capsys, "check", str(fresh))[0] == 1
    broken = tmp_path / "broken.thy"
    broken.write_text("theory\nrule -> ->\n")
    assert run(capsys, "check", str(broken))[0] == 2
    assert run(capsys, "check", str(tmp_path / "missing.thy"))[0] == 2


def test_compile_nspk_document(capsys, nspk_file):
    code, out, _ = run(capsys, "compile", nspk_file)
    assert code == 0
    doc = json.loads(out)
    assert doc["format"] == "prudent/1"
    assert [r["name"] for r in doc["roles"]] == ["A", "B"]
    a = doc["frames"][0]
    checks = {(c["lhs"], c["rhs"]) for s in a["steps"] if s["polarity"] == "?" for c in s["checks"]}
    assert ("partner(v_8)", "v_3") in checks
    assert ("proj1(dec(payload(v_8),v_6))", "v_1") in checks
    assert out == json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def test_compile_pretty(capsys, nspk_file):
    code, out, _ = run(capsys, "compile", nspk_file, "--format", "pretty")
    assert code == 0
    assert "ν Na" in out and "proj1(dec(payload(v_r),v_invKA)) ≟ v_Na" in out


def test_compile_not_executable(capsys):
    code, _, err = run(capsys, "compile", str(HERE / "leak.spec"))
    assert code == 1 and "step 6" in err


def test_compile_is_deterministic(capsys, nspk_file):
    assert run(capsys, "compile", nspk_file)[1] == run(capsys, "compile", nspk_file)[1]


def test_emit_full_vs_delta(capsys, nspk_file):
    counts = {}
    for mode in ("full", "delta"):
        doc = json.loads(run(capsys, "compile", nspk_file, "--emit", mode)[1])
        counts[mode] = sum(len(s.get("checks", [])) for f in doc["frames"] for s in f["steps"])
        assert run(capsys, "simulate", nspk_file, "--emit", mode)[0] == 0
        assert run(capsys, "simulate", nspk_file, "--emit", mode, "--mutate", "step=2", "replace=Nb")[0] == 1
    assert counts["full"] > counts["delta"]


def test_simulate(capsys, nspk_file):
    code, out, _ = run(capsys, "simulate", nspk_file)
    doc = json.loads(out)
    assert code == 0 and doc["complete"] and doc["delivered"] == 3
    code, _, err = run(capsys, "simulate", nspk_file, "--mutate", "step=2", "replace=Nb")
    assert code == 1
    assert "rejected: A at step 8 failed proj1(dec(payload(v_8),v_6)) =? v_1" in err


def test_simulate_bad_mutation(capsys, nspk_file):
    assert run(capsys, "simulate", nspk_file, "--mutate", "step=9", "replace=Nb")[0] == 2
    assert run(capsys, "simulate", nspk_file, "--mutate", "replace=Nb")[0] == 2


def test_simulate_empty(capsys, tmp_path):
    p = tmp_path / "empty.spec"
    p.write_text("protocol Empty\ntheory dolev_yao\nend\n")
    code, out, _ = run(capsys, "simulate", str(p))
    assert code == 0 and json.loads(out)["events"] == []


def test_document_round_trip(capsys, nspk_file, tmp_path):
    doc = tmp_path / "nspk.json"
    doc.write_text(run(capsys, "compile", nspk_file)[1])
    direct = run(capsys, "simulate", nspk_file)
    loaded = run(capsys, "simulate", "--document", str(doc))
    assert direct == loaded
    args = ("--mutate", "step=2", "replace=Nb")
    assert run(capsys, "simulate", nspk_file, *args) == run(capsys, "simulate", "--document", str(doc), *args)


def test_audit(capsys, nspk_file, tmp_path):
    assert run(capsys, "audit", nspk_file, "--samples", "60")[0] == 0
    code, out, _ = run(capsys, "audit", nspk_file, "--emit", "none", "--samples", "60")
    assert code == 1 and any(r["violation_count"] for r in json.loads(out)["roles"])
    one = tmp_path / "one.spec"
    one.write_text("protocol One\ntheory dolev_yao\nA -> B : enc(N,KB)\nA knows A, B, KB\nB knows A, B, KB, inv(KB)\nend\n")
    assert run(capsys, "audit", str(one))[0] == 0


def test_narration_errors(capsys, tmp_path):
    p = tmp_path / "bad.spec"
    p.write_text("protocol Bad\ntheory nosuch\nend\n")
    assert run(capsys, "compile", str(p))[0] == 2
    assert run(capsys, "compile", str(tmp_path / "absent.spec"))[0] == 2


def test_extra_theory(capsys, tmp_path):
    thy = tmp_path / "sym.thy"
    thy.write_text("theory sym\npublic senc/2 sdec/2\nvars X Y\nrule sdec(senc(X,Y),Y) -> X\nend\n")
    spec = tmp_path / "sym.spec"
    spec.write_text("protocol Sym\ntheory sym\nA -> B : senc(N,K)\nB -> A : N\nA knows A, B, K\nB knows A, B, K\nend\n")
    code, out, _ = run(capsys, "compile", str(spec), "--theory", str(thy))
    assert code == 0 and json.loads(out)["theory_source"].startswith("theory sym")
    doc = tmp_path / "sym.json"
    doc.write_text(out)
    assert run(capsys, "simulate", "--document", str(doc))[0] == 0
