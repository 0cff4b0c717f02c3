import csv
import io
import json
import subprocess
import sys

import pytest

from foldrel import __version__
from foldrel.cli import checkpoint_resume, dumps, run


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, out.getvalue()


def test_binom():
    code, text = call("binom", "--b", "16", "--a", "6", "--format", "json")
    assert code == 0 and json.loads(text) == {"a": 6, "b": 16, "parity": 0, "val2": 3}
    code, text = call("binom", "--b", "-1", "--a", "5", "--format", "json")
    assert json.loads(text)["parity"] == 1 and json.loads(text)["val2"] is None


def test_dims_formats():
    code, text = call("dims", "--n", "8", "--n-max", "9", "--format", "json")
    docs = json.loads(text)
    assert code == 0 and [d["quotient_dim"] for d in docs] == [1, 2]
    code, text = call("dims", "--n", "9", "--format", "csv")
    row = next(csv.DictReader(io.StringIO(text)))
    assert row["quotient_dim"] == "2" and row["complement"] == "2:5;4:1"
    code, text = call("dims", "--n", "8", "--compare-r0")
    assert "dim 1" in text


def test_classify():
    code, text = call("classify", "--n", "9", "--format", "json")
    assert code == 0 and json.loads(text)["class"] == "C2"
    code, text = call("classify", "--n", "6", "--n-max", "8")
    assert text.splitlines()[-1].startswith("n=8: A1")


def test_rp_and_cp_exit_codes():
    assert call("rp", "--n", "13", "--target", "12")[0] == 1
    assert call("rp", "--n", "7", "--target", "6")[0] == 0
    assert call("rp", "--n", "15", "--target", "14")[0] == 1
    code, text = call("cp", "--n", "49", "--target", "93", "--format", "csv")
    assert code == 1 and "obstructed" in text
    assert call("cp", "--n", "3", "--target", "5")[0] == 0


def test_numbers(tmp_path):
    from foldrel.gf2poly import partitions

    f = tmp_path / "cn.json"
    f.write_text(json.dumps({"n": 8, "numbers": [
        {"partition": list(p), "value": int(p in {(8,), (2, 2, 2, 2)})} for p in partitions(8)]}))
    code, text = call("numbers", "--file", str(f), "--k", "1", "--vanishing", "1", "--format", "json")
    assert code == 0 and json.loads(text)["verdict"]["status"] == "not-obstructed"
    code, _ = call("numbers", "--file", str(f), "--k", "2", "--class", "morin")
    assert code == 2
    code, _ = call("numbers", "--file", str(tmp_path / "missing.json"), "--k", "1")
    assert code == 2


def test_dold_basis():
    code, text = call("dold-basis", "--n", "8", "--format", "json")
    doc = json.loads(text)
    assert code == 0 and doc["complement"] == [[4, 0]]
    assert len(doc["rows"]) + len(doc["complement"]) == len(doc["basis"])


def test_rank2():
    code, text = call("rank2", "--n", "2", "--n-max", "20", "--format", "json")
    assert code == 0 and all(d["quotient_dim"] in (0, 1) for d in json.loads(text))


@pytest.mark.parametrize("argv", [
    ["dims", "--n", "1"],
    ["dims", "--n", "5", "--n-max", "3"],
    ["rp", "--n", "5", "--target", "9"],
    ["sweep", "--n-max", "20", "--k", "5"],
    ["sweep", "--n-max", "20", "--jobs", "0"],
    ["nonsense"],
    ["binom", "--b", "3"],
])
def test_usage_errors(argv):
    assert call(*argv)[0] == 2


def test_json_is_deterministic():
    for argv in (["rp", "--n", "31", "--target", "24"], ["sweep", "--n-max", "40", "--k", "3,7"]):
        a = call(*argv, "--format", "json")[1]
        b = call(*argv, "--format", "json")[1]
        assert a == b
        assert a.strip() == dumps(json.loads(a))


def test_sweep_report():
    code, text = call("sweep", "--n-max", "40", "--k", "3,7", "--format", "json", "--records")
    doc = json.loads(text)
    assert code == 0 and doc["violations"] == []
    assert doc["count"] == len(doc["records"])
    assert {(d["n"], d["k"]) for d in doc["nonzero"]} == {(8, 3), (16, 3), (32, 3), (16, 7), (32, 7)}


def test_sweep_jobs_match_serial():
    argv = ["sweep", "--n-max", "36", "--k", "3,7", "--format", "json", "--records"]
    assert call(*argv)[1] == call(*argv, "--jobs", "2")[1]


def _sweep(path, *extra):
    return call("sweep", "--n-max", "30", "--k", "3", "--format", "json", "--records",
                "--checkpoint", str(path), *extra)


def test_checkpoint_absent_and_empty(tmp_path):
    assert checkpoint_resume(tmp_path / "none.jsonl") == {}
    p = tmp_path / "empty.jsonl"
    p.write_text("")
    assert checkpoint_resume(p) == {}
    code, text = _sweep(p)
    assert code == 0
    assert len(p.read_text().splitlines()) == json.loads(text)["count"]


def test_checkpoint_resume_skips_done_work(tmp_path):
    p = tmp_path / "ck.jsonl"
    full = _sweep(p)[1]
    lines = p.read_text().splitlines()
    p.write_text("\n".join(lines[:10]) + "\n")
    code, text = _sweep(p)
    assert code == 0 and text == full
    assert "0 computed now" in call("sweep", "--n-max", "30", "--k", "3", "--checkpoint", str(p))[1]


def test_checkpoint_truncated_tail(tmp_path, capsys):
    p = tmp_path / "ck.jsonl"
    full = _sweep(p)[1]
    lines = p.read_text().splitlines()
    p.write_text("\n".join(lines[:5]) + "\n" + lines[5][: len(lines[5]) // 2])
    done = checkpoint_resume(p)
    assert len(done) == 5
    assert "truncated" in capsys.readouterr().err
    assert p.read_text() == "\n".join(lines[:5]) + "\n"
    assert _sweep(p)[1] == full


def test_checkpoint_duplicates_and_corrupt_middle(tmp_path, capsys):
    p = tmp_path / "ck.jsonl"
    full = _sweep(p)[1]
    lines = p.read_text().splitlines()
    p.write_text("\n".join([lines[0], "{not json", lines[0], *lines[1:]]) + "\n")
    done = checkpoint_resume(p)
    err = capsys.readouterr().err
    assert "duplicate" in err and "unreadable" in err
    assert len(done) == len(lines)
    assert _sweep(p)[1] == full


def test_checkpoint_engine_mismatch_recomputed(tmp_path, capsys):
    p = tmp_path / "ck.jsonl"
    full = _sweep(p)[1]
    recs = [json.loads(l) for l in p.read_text().splitlines()]
    for r in recs:
        r["engine_version"] = "0.0.0-old"
        r["quotient_dim"] = 7
    p.write_text("".join(dumps(r) + "\n" for r in recs))
    assert checkpoint_resume(p) == {}
    assert "recomputed" in capsys.readouterr().err
    assert _sweep(p)[1] == full
    fresh = [r for r in map(json.loads, p.read_text().splitlines()) if r["engine_version"] == __version__]
    assert len(fresh) == len(recs)


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "foldrel.cli", "rp", "--n", "13", "--target", "12"],
                         capture_output=True, text=True)
    assert res.returncode == 1 and "morin" in res.stdout
    res = subprocess.run([sys.executable, "-m", "foldrel.cli", "dims", "--n", "0"], capture_output=True, text=True)
    assert res.returncode == 2 and res.stderr.startswith("error:")
