import json
import subprocess
import sys

import pytest

from permlogic.cli import main
from permlogic.constructions import Graph

def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def skew_file(tmp_path):
    from permlogic.logic import format_formula
    from permlogic.transformers import skew_merged_sentence

    path = tmp_path / "skew.mso"
    path.write_text(format_formula(skew_merged_sentence()))
    return str(path)


def test_check_exit_codes(capsys, skew_file):
    assert run(capsys, "check", "--perm", "2413", "--formula", skew_file)[0] == 0
    code, out, _ = run(capsys, "check", "--perm", "2143", "--formula", skew_file)
    assert code == 1 and out.strip() == "false"
    code, _, err = run(capsys, "check", "--perm", "2413", "--formula", "x <1")
    assert code == 2 and "error" in err
    assert run(capsys, "check", "--perm", "2413", "--formula", "x <1 y")[0] == 2


def test_check_json(capsys):
    code, out, _ = run(capsys, "check", "--perm", "3 1 2", "--formula", "E x. E y. x <1 y & y <2 x", "--json")
    data = json.loads(out)
    assert code == 0 and data["result"] is True
    assert set(data) == {"result", "runtime_ms", "nodes_evaluated"}


def test_check_other_theories(capsys, tmp_path):
    word = tmp_path / "w.txt"
    word.write_text("aab\n")
    assert run(capsys, "check", "--perm", str(word), "--theory", "word", "--formula", "E x. Pb(x)")[0] == 0
    graph = tmp_path / "g.txt"
    graph.write_text(Graph.complete(3).format())
    code, _, _ = run(capsys, "check", "--perm", str(graph), "--theory", "graph",
                     "--formula", "ES R. A x. A y. E(x, y) -> !(x in R <-> y in R)")
    assert code == 1
    assert run(capsys, "check", "--perm", "21", "--theory", "incidence",
               "--formula", "E e. succ1(e) & succ2(e)")[0] == 0


def test_compile_targets(capsys, tmp_path):
    code, out, _ = run(capsys, "compile", "card", "--formula", "x <1 y & y <2 x", "--vars", "2", "--q", "1", "--r", "2")
    assert code == 0 and "card" not in out
    code, out, _ = run(capsys, "compile", "relativize", "--formula", "E x. x <1 x | x = x", "--set", "R")
    assert code == 0 and "R" in out
    assert run(capsys, "compile", "word-sim", "--formula", "E x. E y. x <2 y")[0] == 0
    assert run(capsys, "compile", "interpret", "--formula", "E x. E y. x <2 y")[0] == 0
    assert run(capsys, "compile", "expand-card", "--formula", "ES X. card[1,2](X)")[0] == 0
    dest = tmp_path / "m.mso"
    assert run(capsys, "compile", "merge", "--formula", "A x. A y. x <1 y -> x <2 y",
               "A x. A y. x <1 y -> y <2 x", "--out", str(dest))[0] == 0
    assert dest.read_text().strip()
    assert run(capsys, "compile", "card", "--formula", "x <1 y", "--q", "0")[0] == 2
    assert run(capsys, "compile", "relativize", "--formula", "E x. x = x")[0] == 2


def test_construct(capsys, tmp_path):
    code, out, _ = run(capsys, "construct", "pikl", "--k", "1", "--l", "2")
    assert code == 0 and out.strip() == "4 3 1 2"
    code, out, _ = run(capsys, "construct", "staircase", "--k", "3")
    assert out.splitlines()[-1].split()[0] == "/"
    meta = tmp_path / "spiral.json"
    plot = tmp_path / "spiral.png"
    coords = tmp_path / "spiral.csv"
    code, out, _ = run(capsys, "construct", "spiral", "--ell", "1", "--meta", str(meta),
                       "--plot", str(plot), "--coords", str(coords))
    assert code == 0 and len(out.split()) == 57
    assert set(json.loads(meta.read_text())) >= {"blocks", "chunks", "tracks"}
    assert plot.read_bytes()[:4] == b"\x89PNG"
    rows = coords.read_text().splitlines()
    assert rows[0] == "position,value,group,role" and len(rows) == 58
    stair = tmp_path / "stair.png"
    assert run(capsys, "construct", "staircase", "--k", "4", "--plot", str(stair))[0] == 0
    assert stair.stat().st_size > 0
    assert run(capsys, "construct", "pikl", "--k", "1")[0] == 2


def test_reduce_and_decode(capsys, tmp_path):
    graph = tmp_path / "g.txt"
    graph.write_text(Graph.path(3).format())
    perm, meta, formula = tmp_path / "p.txt", tmp_path / "m.json", tmp_path / "f.mso"
    plot, coords = tmp_path / "r.svg", tmp_path / "r.csv"
    code, _, err = run(capsys, "reduce", "--graph", str(graph), "--formula", "E x. E y. E(x, y)",
                       "--out-perm", str(perm), "--out-meta", str(meta), "--out-formula", str(formula),
                       "--plot", str(plot), "--coords", str(coords))
    assert code == 0 and "quantifier depth" in err
    assert "<svg" in plot.read_text()
    assert len(coords.read_text().splitlines()) == len(perm.read_text().split()) + 1
    code, out, _ = run(capsys, "reduce", "decode", "--perm", str(perm), "--meta", str(meta))
    assert code == 0 and Graph.parse(out) == Graph.path(3)
    assert run(capsys, "reduce", "decode", "--perm", str(perm))[0] == 2


def test_ef(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.write_text("3\n")
    b.write_text("7\n")
    code, out, _ = run(capsys, "ef", "--left", str(a), "--right", str(b), "-k", "2", "--theory", "tolo")
    assert code == 0 and out.strip() == "Duplicator"
    code, out, _ = run(capsys, "ef", "--left", "12", "--right", "21", "-k", "1", "--json")
    data = json.loads(out)
    assert data["winner"] == "Duplicator" and {"k", "positions", "runtime_ms"} <= set(data)
    assert json.loads(run(capsys, "ef", "--left", "123", "--right", "321", "-k", "2", "--json")[1])["winner"] == "Spoiler"


def test_stats_and_tw(capsys):
    code, out, _ = run(capsys, "stats", "--perm", "3142", "--json")
    data = json.loads(out)
    assert data["maj"] == 4 and data["descents"] == [1, 3] and data["inversions"] == 3
    assert run(capsys, "tw", "--perm", "2413", "--exact")[1].strip() == "3"
    assert run(capsys, "tw", "--perm", "12345")[1].strip() == "1"
    assert run(capsys, "stats", "--perm", "1 1")[0] == 2


def test_merge_check(capsys):
    code, out, _ = run(capsys, "merge-check", "--perm", "3142", "--alpha", "3142", "--json")
    data = json.loads(out)
    assert code == 0 and data["merge"] and data["verified"] and len(data["coloring"]) == 4
    assert run(capsys, "merge-check", "--perm", "123", "--alpha", "12")[0] == 1
    assert run(capsys, "merge-check", "--perm", "3142", "--alpha", "3142", "--strategy", "naive")[0] == 0
    assert run(capsys, "merge-check", "--perm", "3142", "--alpha", "3142", "--spiral", "1")[0] == 2


def test_deterministic(capsys):
    first = run(capsys, "construct", "spiral", "--ell", "1")[1]
    assert run(capsys, "construct", "spiral", "--ell", "1")[1] == first


def test_entry_point_and_usage_errors():
    proc = subprocess.run([sys.executable, "-m", "permlogic.cli", "construct", "pikl", "--k", "2", "--l", "0"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "2 3 1"
    proc = subprocess.run([sys.executable, "-m", "permlogic.cli", "nonsense"], capture_output=True, text=True)
    assert proc.returncode == 2
