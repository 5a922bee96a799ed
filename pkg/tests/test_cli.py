import json
import shutil
import subprocess

import pytest

from morse_persist.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def pairs_csv(tmp_path):
    # a noisy two-cycle between the halves plus a fixed point near 0
    rows = ["x,y"]
    for i in range(40):
        a = (i % 8) / 32
        rows.append(f"{a + 0.05},{0.9 - a}")
        rows.append(f"{0.9 - a},{a + 0.05}")
        rows.append(f"{a / 8},{a / 16}")
    p = tmp_path / "pairs.csv"
    p.write_text("\n".join(rows) + "\n")
    return p


def test_x2_report(capsys):
    code, out, _ = run(capsys, "analyze", "--map", "x^2", "--box", "0,1", "--depths", "3..6")
    assert code == 0
    rep = json.loads(out)
    assert rep["depths"] == [6, 5, 4, 3]
    persistent = rep["persistent_morse_sets"]
    assert len(persistent) == 2
    assert persistent[0]["cells"] == ["d:3 i:0"] and persistent[1]["cells"] == ["d:3 i:7"]
    for lv in rep["levels"]:
        sets = lv["morse"]["sets"]
        zero = sets.index([f"d:{lv['depth']} i:0"])
        one = sets.index([f"d:{lv['depth']} i:{2 ** lv['depth'] - 1}"])
        assert [one, zero] in lv["morse"]["order"]
    assert all(m["is_morphism"] for m in rep["morphisms"])


def test_schedule_mu_values(capsys, pairs_csv):
    code, out, err = run(capsys, "analyze", "--samples", str(pairs_csv), "--depths", "2..4", "--schedule-mu", "0.3")
    assert code == 0, err
    rep = json.loads(out)
    assert [lv["mu"] for lv in rep["levels"]] == ["3/10", "3/40", "3/160"]
    assert all(m["is_morphism"] for m in rep["morphisms"])


def test_fixed_mu_may_lose_persistence(capsys, tmp_path):
    p = tmp_path / "crafted.csv"
    p.write_text("0.1,0.1\n0.1,0.4\n0.4,0.1\n0.4,0.4\n0.6,0.9\n0.9,0.6\n")
    code, out, _ = run(capsys, "analyze", "--samples", str(p), "--depths", "1..2", "--mu", "0.5")
    assert code == 0
    rep = json.loads(out)
    assert rep["morphisms"][0]["is_morphism"] is False
    assert rep["merge_tree"] is None and rep["barcode"] is None


def test_missing_file(capsys, tmp_path):
    missing = tmp_path / "absent.csv"
    code, _, err = run(capsys, "analyze", "--observations", str(missing))
    assert code == 3
    assert str(missing) in err


def test_point_outside_box(capsys, tmp_path):
    p = tmp_path / "obs.csv"
    p.write_text("0.5\n1.5\n")
    code, _, err = run(capsys, "morse", "--observations", str(p), "--depths", "1..2")
    assert code == 3 and "3/2" in err


def test_short_series(capsys, tmp_path):
    p = tmp_path / "obs.csv"
    p.write_text("0.5\n")
    code, _, _ = run(capsys, "analyze", "--observations", str(p), "--delay", "3")
    assert code == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["analyze", "--map", "x^2", "--depths", "5..3"],
        ["analyze", "--map", "x^2", "--depths", "a..b"],
        ["analyze", "--map", "x^2", "--mu", "0.3"],
        ["analyze", "--map", "x^2", "--box", "1,0"],
        ["analyze", "--map", "x^2", "--box", "0"],
        ["analyze", "--map", "2*x"],
        ["analyze", "--map", "sin(x)"],
        ["analyze", "--map", "x^2", "--delay", "2"],
        ["barcode", "--map", "x^2", "--format", "dot"],
        ["frobnicate", "--map", "x^2"],
        ["analyze"],
    ],
)
def test_config_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_mu_out_of_range(capsys, pairs_csv):
    assert run(capsys, "analyze", "--samples", str(pairs_csv), "--mu", "1")[0] == 2
    assert run(capsys, "analyze", "--samples", str(pairs_csv), "--mu", "0.1", "--lambda", "1")[0] == 2


def test_subcommands(capsys):
    base = ["--map", "x^2", "--depths", "2..4"]
    _, out, _ = run(capsys, "barcode", *base)
    bars = json.loads(out)["barcode"]
    assert sum(1 for b in bars if b["dim"] == 0 and b["birth"] == "4" and b["death"] is None) == 1
    _, out, _ = run(capsys, "mixing", *base)
    assert all(r["mixing"] for lv in json.loads(out)["levels"] for r in lv["mixing"])
    _, out, _ = run(capsys, "morse", *base)
    assert set(json.loads(out)["levels"][0]) == {"depth", "morse", "morse_graph"}
    _, out, _ = run(capsys, "merge-tree", *base)
    # at depth 2 the cell [1/4, 1/2] touches its own image at 1/4, adding a fourth set
    assert len(json.loads(out)["merge_tree"]["nodes"]) == 3 + 3 + 4


def test_dot_output(capsys):
    _, out, _ = run(capsys, "merge-tree", "--map", "x^2", "--depths", "2..3", "--format", "dot")
    assert out.startswith("digraph MergeTree {")
    _, out, _ = run(capsys, "morse", "--map", "x^2", "--depths", "2..3", "--format", "dot")
    assert out.count("digraph") == 2


def test_deterministic_across_threads(capsys, monkeypatch):
    argv = ["analyze", "--map", "3*x*(1-x)", "--depths", "1..5"]
    monkeypatch.setenv("MORSE_PERSIST_THREADS", "1")
    a = run(capsys, *argv)[1]
    monkeypatch.setenv("MORSE_PERSIST_THREADS", "4")
    b = run(capsys, *argv)[1]
    assert a == b


def test_bad_thread_env(capsys, monkeypatch):
    monkeypatch.setenv("MORSE_PERSIST_THREADS", "many")
    assert run(capsys, "analyze", "--map", "x^2")[0] == 2


def test_output_file(capsys, tmp_path):
    target = tmp_path / "rep.json"
    code, out, _ = run(capsys, "analyze", "--map", "x/2", "--depths", "1..2", "-o", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["depths"] == [2, 1]


def test_two_dimensional_map(capsys):
    code, out, _ = run(capsys, "analyze", "--map", "y/2; x/2", "--box", "0,1,0,1", "--depths", "1..3")
    assert code == 0
    assert json.loads(out)["persistent_morse_sets"][0]["cells"] == ["d:1 i:0,0"]


def test_observations_with_morita(capsys, tmp_path):
    p = tmp_path / "obs.csv"
    p.write_text("\n".join(str(x) for x in [0.1, 0.7, 0.2, 0.8, 0.15, 0.75, 0.3]) + "\n")
    code, out, _ = run(capsys, "analyze", "--observations", str(p), "--depths", "1..3", "--lambda", "1/2")
    assert code == 0
    assert "levels" in json.loads(out)


@pytest.mark.skipif(shutil.which("morse-persist") is None, reason="console script not installed")
def test_console_script():
    r = subprocess.run(["morse-persist", "analyze", "--map", "x^2", "--depths", "2..3"], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["depths"] == [3, 2]
