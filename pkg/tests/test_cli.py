import json
import subprocess
import sys

import pytest

from synclock.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


@pytest.mark.parametrize(
    "argv, expected",
    [
        (["classify", "sync", "?!0 | !!* | ?0"], "may=true must=false"),
        (["classify", "lock", "P2 | T2 *", "--store", "ee"], "may=true must=true"),
        (["classify", "sync", "*"], "may=true must=true"),
    ],
)
def test_classify(capsys, argv, expected):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert expected in out


def test_classify_trace(capsys):
    code, out, _ = run(capsys, "classify", "sync", "?!0 | !!* | ?0", "--trace")
    assert code == 0
    assert "success witness (2 steps)" in out and "fail witness (2 steps)" in out
    code, doc = run_json(capsys, "trace", "sync", "!* | ?*")
    assert doc["fail_witness"] is None
    assert doc["success_witness"]["steps"][-1]["state"] == "* | *"


def test_classify_json_schema(capsys):
    code, doc = run_json(capsys, "classify", "sync", "!*")
    assert code == 0
    assert doc["schema"] == "synclock.report/1"
    assert set(doc) >= {"schema", "command", "params", "verdicts", "counterexamples", "survivors", "counts", "wall_time_ms"}
    assert doc["verdicts"] == [{"subject": "!*", "may": False, "must": False}]


@pytest.mark.parametrize(
    "argv",
    [
        ["classify", "sync", "!x"],
        ["classify", "lock", "P4", "--store", "eee"],
        ["classify", "lock", "P1"],
        ["check", "--bang", "P1"],
        ["standardize", "--pattern", "bnb", "--store", "ee", "--process", "P1"],
        ["search", "--k", "2", "--max-len", "1", "--stores", "e"],
    ],
)
def test_operational_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("error:")


def test_state_limit_exits_2(capsys):
    code, _, err = run(capsys, "classify", "sync", "!!* | ??*", "--max-states", "1")
    assert code == 2 and "reachable states" in err


def test_check_builtins_survive(capsys):
    for name in ("thm-2.9", "len-8"):
        code, out, _ = run(capsys, "check", "--builtin", name)
        assert code == 0
        assert "survives" in out


def test_check_refuted(capsys):
    code, out, _ = run(capsys, "check", "--bang", "", "--quest", "", "--store", "e")
    assert code == 1
    assert "refuted by !*" in out
    code, doc = run_json(capsys, "check", "--bang", "", "--quest", "", "--store", "e")
    assert code == 1
    assert doc["verdicts"][0]["status"] == "refuted"
    cex = doc["counterexamples"][0]
    assert cex["source"] == "!*" and cex["image"] == "*"
    assert cex["source_class"] == {"may": False, "must": False}


def test_search_small(capsys):
    code, out, _ = run(capsys, "search", "--k", "2", "--max-len", "0", "--stores", "all")
    assert code == 0
    assert "candidate-store pairs: 4" in out and "survivors: 0" in out
    code, doc = run_json(capsys, "search", "--k", "1", "--max-len", "3", "--stores", "e,f", "--no-prune")
    assert code == 0
    assert doc["counts"]["candidates_total"] == 2 * (1 + 4 + 12 + 32)
    assert doc["counts"]["refuted_by_corpus"] == doc["counts"]["candidates_total"]
    assert doc["survivors"] == []


def test_search_with_seed_corpus_only(capsys):
    code, doc = run_json(
        capsys, "search", "--k", "1", "--max-len", "2", "--stores", "f",
        "--max-subprocesses", "1", "--max-prefix-len", "0", "--replicated-max", "0", "--flat-up-to", "0",
    )
    # the seed corpus alone already refutes every k=1 candidate
    assert code == 0 and doc["survivors"] == []


def test_search_checkpoint_flag(capsys, tmp_path):
    path = tmp_path / "ck.jsonl"
    code, out, _ = run(capsys, "search", "--k", "1", "--max-len", "4", "--checkpoint", str(path))
    assert code == 0
    assert len(path.read_text().splitlines()) == 1 + 2 * sum((n + 1) * 2**n for n in range(5))


def test_standardize(capsys):
    code, out, _ = run(capsys, "standardize", "--pattern", "n", "--store", "e", "--process", "P1* | T1", "--verify")
    assert code == 0
    assert "pattern b  store f" in out
    assert "P1 0 | T1 *" in out
    assert "classifications agree" in out
    code, doc = run_json(capsys, "standardize", "--pattern", "bb", "--store", "ef", "--process", "P1 T2 *")
    assert doc["process"] == "P1 T2 *" and doc["store"] == "ef" and doc["pattern"] == "bb"


def test_translate_and_blocking_type(capsys):
    code, out, _ = run(capsys, "translate", "--builtin", "thm-2.9", "!* | ?0")
    assert code == 0 and out.strip() == "P1 T3 P2 T1 * | P3 T2 0"
    code, out, _ = run(capsys, "blocking-type", "--builtin", "thm-2.9")
    assert "blocking type: (P2, P3)" in out
    code, doc = run_json(capsys, "blocking-type", "--bang", "P1 P1", "--quest", "T1", "--store", "e")
    assert doc["verdicts"][0]["bang"] == "P1P1"
    assert doc["verdicts"][0]["filters"]["count"] is False


def test_corpus_command(capsys):
    code, out, _ = run(capsys, "corpus", "--max-subprocesses", "1", "--max-prefix-len", "1",
                       "--replicated-max", "0", "--flat-up-to", "0")
    assert code == 0
    assert len(out.splitlines()) == 12
    code, out, _ = run(capsys, "corpus", "--count")
    assert int(out) > 5000


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "synclock", "classify", "sync", "!* | ?*"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "may=true must=true" in proc.stdout
