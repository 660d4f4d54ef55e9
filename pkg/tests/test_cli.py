from __future__ import annotations

import json
from pathlib import Path

import pytest

import hornlp
from hornlp.cli import main, replay_report

PROGRAMS = Path(hornlp.__file__).parent / "programs"


def prog(name: str) -> str:
    return str(PROGRAMS / f"{name}.hc")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_connect_all_answers(capsys):
    code, out, _ = run(capsys, "run", prog("connect"), "--query", "?- connect(X,Y).", "--strategy", "unif", "--all")
    assert code == 0
    assert "success: X = node1, Y = node3" in out


def test_connect_trace_notation(capsys):
    code, out, _ = run(capsys, "run", prog("connect"), "-q", "connect(X, Y)", "--search", "dfs",
                       "--max-steps", "3", "--trace")
    assert code == 0
    lines = out.splitlines()
    assert "   ~>[k1, {X_1:=X, Z_1:=Y}] {connect(X, Y_1), connect(Y_1, Y)}" in lines
    assert lines[-1] == "success: X = node1, Y = node3"


def test_stream_struct_exits_on_bound(capsys):
    code, out, _ = run(capsys, "run", prog("stream"), "--query", "?- stream(X).", "--strategy", "struct",
                       "--max-steps", "8", "--trace")
    assert code == 2
    arrows = [line.split("[")[0].strip() for line in out.splitlines() if line.startswith("   ") and "[" in line]
    assert arrows == ["+>", "->"] * 4


def test_overlap_struct_is_stuck(capsys):
    code, out, _ = run(capsys, "run", prog("overlap"), "--query", "?- p(X).", "--strategy", "struct")
    assert code == 1
    assert "stuck: {q(X)}" in out


def test_partial_with_evidence(capsys):
    code, out, _ = run(capsys, "run", prog("nthfrom"), "-q", "nth(s(z), Y, Z^), from(s(z), Y)", "-s", "partial",
                       "--evidence")
    assert code == 0
    assert "Z = s(s(z))" in out
    assert out.count("evidence:") == 2
    assert "REJECTED" not in out


def test_stuck_evidence(capsys):
    code, out, _ = run(capsys, "run", prog("stuck"), "-q", "p1(X)", "--evidence")
    assert code == 1
    assert r"evidence: \h1. k1 (k2 h1) : p2(k) => p1(k)" in out


@pytest.mark.parametrize(
    "name, query, strategy",
    [
        ("connect", "connect(X, Y)", "unif"),
        ("stream", "stream(X)", "struct"),
        ("nthfrom", "nth(s(z), Y, Z^), from(s(z), Y)", "partial"),
        ("overlap", "p(X)", "struct"),
        ("listp", "p(list(list(int)))", "tm"),
    ],
)
def test_json_reports_replay_exactly(capsys, name, query, strategy):
    code, out, _ = run(capsys, "run", prog(name), "-q", query, "-s", strategy, "--json", "--max-steps", "12",
                       "--max-solutions", "3")
    reports = [json.loads(line) for line in out.splitlines()]
    assert reports
    for rep in reports:
        assert set(rep) == {"program", "query", "strategy", "outcome", "answer", "residual", "evidence", "steps"}
        again = replay_report(rep)
        assert json.dumps(again) == json.dumps(rep["steps"])
        if rep["steps"]:
            assert rep["steps"][-1]["goals_after"] == rep["residual"]


def test_transform_realizability(capsys):
    code, out, _ = run(capsys, "transform", prog("connect"), "--realizability")
    assert code == 0
    assert out.splitlines()[0] == "k1: connect(X, Z, k_k1(U1, U2)) :- connect(X, Y, U1), connect(Y, Z, U2)."


def test_transform_functionalise(capsys):
    code, out, _ = run(capsys, "transform", prog("listp"), "--functionalise")
    assert code == 0
    assert "p(list(X)) -> k2(p(X), p(list(X)))." in out.splitlines()


def test_functionalise_rejects_connect(capsys):
    code, _, err = run(capsys, "transform", prog("connect"), "--functionalise")
    assert code == 1
    assert "k1" in err


def test_analyze_termination(capsys):
    code, out, _ = run(capsys, "analyze", prog("listp"), "--termination")
    assert code == 0
    assert out.splitlines()[0] == "NONTERMINATING"
    assert "p(list(X)) -> p(list(X))" in out
    code, out, _ = run(capsys, "analyze", prog("stream"), "--termination", "--json")
    doc = json.loads(out)
    assert doc["verdict"] == "TERMINATING"
    assert "argument 1" in doc["measures"][0]


def test_analyze_overlap(capsys):
    code, out, _ = run(capsys, "analyze", prog("overlap"), "--overlap")
    assert out.splitlines() == ["OVERLAPPING", "  (k1, k2)"]


def test_analyze_productivity(capsys):
    code, out, _ = run(capsys, "analyze", prog("phi2"), "--productivity", "local", "--query", "p(X^)",
                       "--depth", "5")
    assert out.strip() == "HoldsUpTo(5)"
    code, out, _ = run(capsys, "analyze", prog("phi1"), "--productivity", "local", "--query", "p(X^)", "--json")
    doc = json.loads(out)
    assert doc["verdict"] == "FAILS" and doc["level"] == 1


def test_usage_errors_exit_3(capsys, tmp_path):
    assert run(capsys, "run", prog("connect"))[0] == 3
    assert run(capsys, "analyze", prog("phi2"), "--productivity", "local")[0] == 3
    assert run(capsys, "run", str(tmp_path / "missing.hc"), "-q", "p(X)")[0] == 3
    bad = tmp_path / "bad.hc"
    bad.write_text("k1: p(X :- q.\n")
    code, _, err = run(capsys, "run", str(bad), "-q", "p(X)")
    assert code == 3
    assert "1:9" in err
    assert run(capsys, "run", prog("connect"), "-q", "connect(X")[0] == 3


def test_query_arity_warning(capsys):
    code, _, err = run(capsys, "run", prog("overlap"), "-q", "p(X, Y)")
    assert code == 1
    assert "warning" in err
