import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from bdhd.cli import main
from bdhd.experiments import CSV_COLUMNS, make_preset, run_experiment
from bdhd.instance import load_instance, save_instance
from helpers.instances import random_instance

MILP_SOLVER = Path(__file__).parent / "helpers" / "lp_milp_solver.py"


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def t1_file(tmp_path, t1):
    path = tmp_path / "T1.json"
    save_instance(t1, path)
    return path


def test_generate(tmp_path, capsys):
    out = tmp_path / "inst.json"
    code, _, _ = run(["generate", "--topology", "circle", "--size", "6.2831853", "--lambda", "5",
                      "--events", "50", "--defenders", "5", "--vmax", "5", "--seed", "7", "-o", out], capsys)
    assert code == 0
    inst = load_instance(out)
    assert inst.n == 50 and inst.k == 5 and inst.seed == 7
    data = json.loads(out.read_text())
    assert data["meta"] == {"seed": 7, "lambda": 5.0}
    code, stdout, _ = run(["generate", "--topology", "square", "--lambda", "1", "--events", "0",
                           "--defenders", "2"], capsys)
    assert code == 0 and json.loads(stdout)["events"] == []


def test_generate_usage_errors(capsys):
    with pytest.raises(SystemExit) as err:
        main(["generate", "--lambda", "5", "--events", "5", "--defenders", "1"])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main(["generate", "--topology", "circle", "--lambda", "0", "--events", "5", "--defenders", "1"])
    assert err.value.code == 2


def test_generate_is_deterministic(tmp_path, capsys):
    args = ["generate", "--topology", "sphere", "--lambda", "3", "--events", "20", "--defenders", "3",
            "--vmax", "4", "--seed", "11"]
    _, a, _ = run(args, capsys)
    _, b, _ = run(args, capsys)
    assert a == b


@pytest.mark.parametrize("algo", ["dp", "edp", "bnb", "oracle"])
def test_solve_t1(algo, t1_file, capsys):
    code, out, _ = run(["solve", "--algo", algo, t1_file], capsys)
    assert code == 0
    report = json.loads(out)["report"]
    assert report["count"] == 3 and report["rate"] == 1.0 and report["algo"] == algo
    assert "wall_ms" in report and "status" in report


def test_solve_external(t1_file, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("BDHD_EXTERNAL_SOLVER", f"{sys.executable} {MILP_SOLVER}")
    code, out, _ = run(["solve", "--algo", "external", "--lp", tmp_path / "m.lp", t1_file], capsys)
    assert code == 0 and json.loads(out)["report"]["count"] == 3
    monkeypatch.delenv("BDHD_EXTERNAL_SOLVER")
    code, _, err = run(["solve", "--algo", "external", t1_file], capsys)
    assert code == 1 and "solver" in err


def test_solve_errors(tmp_path, capsys):
    big = tmp_path / "big.json"
    save_instance(random_instance(0, n=100, k=2), big)
    code, _, err = run(["solve", "--algo", "oracle", big], capsys)
    assert code == 1 and "error" in err
    huge = tmp_path / "huge.json"
    save_instance(random_instance(0, n=64, k=5), huge)
    code, _, err = run(["solve", "--algo", "dp", huge], capsys)
    assert code == 1 and "edp" in err
    code, _, _ = run(["solve", tmp_path / "missing.json"], capsys)
    assert code == 1


def test_export_lp(t1_file, tmp_path, capsys):
    out = tmp_path / "t1.lp"
    code, _, _ = run(["export-lp", t1_file, "-o", out], capsys)
    assert code == 0 and out.read_text().startswith("\\")


def test_simulate(t1_file, tmp_path, capsys):
    code, out, _ = run(["simulate", "--horizon", "inf", t1_file], capsys)
    assert code == 0 and json.loads(out)["count"] == 3
    traj = tmp_path / "traj.csv"
    code, out, _ = run(["simulate", "--horizon", "0.01", t1_file, "--trajectory-csv", traj], capsys)
    assert code == 0 and json.loads(out)["count"] <= 3
    assert traj.read_text().startswith("defender,t,x0")
    with pytest.raises(SystemExit) as err:
        main(["simulate", "--horizon", "0", str(t1_file)])
    assert err.value.code == 2


def _read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_experiment_cardinality_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        code, _, _ = run(["experiment", "heterogeneity", "--runs", "2", "--events", "20", "-o", path], capsys)
        assert code == 0
    rows_a, rows_b = _read_csv(a), _read_csv(b)
    assert len(rows_a) == 10 * 2
    assert list(rows_a[0]) == CSV_COLUMNS
    strip = lambda rows: [{k: v for k, v in r.items() if k != "wall_ms"} for r in rows]
    assert strip(rows_a) == strip(rows_b)
    assert json.loads(Path(str(a) + ".meta.json").read_text())["preset"] == "heterogeneity"
    assert all(r["seed"] != "" for r in rows_a)


def test_preset_cardinalities():
    assert len(make_preset("heterogeneity").cells) * make_preset("heterogeneity").runs == 1000
    topo = make_preset("topology", runs=1)
    assert {c.topology for c in topo.cells} == {"interval", "circle", "square", "sphere"}
    assert len(topo.cells) == 4 * 8
    grid = make_preset("lambda-grid", runs=1)
    assert len(grid.cells) == 25
    for name in ("scaling", "defenders", "horizon"):
        assert make_preset(name, runs=1).cells
    with pytest.raises(ValueError):
        make_preset("nope")


def test_parallel_rows_match_serial():
    preset = make_preset("topology", runs=2, n_events=15)
    preset.cells = preset.cells[:6]
    strip = lambda rows: [{k: v for k, v in r.items() if k != "wall_ms"} for r in rows]
    assert strip(run_experiment(preset, jobs=2)) == strip(run_experiment(preset, jobs=1))


def test_rows_replay_through_generate_and_solve(tmp_path, capsys):
    out = tmp_path / "scaling.csv"
    code, _, _ = run(["experiment", "scaling", "--runs", "1", "--events", "12", "-o", out], capsys)
    assert code == 0
    rows = _read_csv(out)
    assert len(rows) == 4 * 3 * 3
    for row in rows[::5]:
        inst_path = tmp_path / f"replay_{row['k']}_{row['algo']}.json"
        gen = ["generate", "--topology", row["topology"], "--lambda", row["lambda"],
               "--events", row["n_events"], "--defenders", row["k"], "--vmin", row["v_min"],
               "--vmax", row["v_max"], "--seed", row["seed"], "-o", inst_path]
        if row["size"]:
            gen += ["--size", row["size"]]
        if row["speed_sum"]:
            gen += ["--speed-sum", row["speed_sum"]]
        assert run(gen, capsys)[0] == 0
        code, solved, _ = run(["solve", "--algo", row["algo"], inst_path], capsys)
        assert code == 0
        assert json.loads(solved)["report"]["count"] == int(row["count"])


def test_module_entry_point(t1_file):
    proc = subprocess.run([sys.executable, "-m", "bdhd", "solve", "--algo", "dp", str(t1_file)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["report"]["count"] == 3
    proc = subprocess.run([sys.executable, "-m", "bdhd"], capture_output=True, text=True)
    assert proc.returncode == 2
