import json
import math

import numpy as np
import pytest

from secalloc import cli
from secalloc.cli import main
from secalloc.graph import path_graph
from secalloc.wcai import WcaiResult


def write_json(path, data):
    path.write_text(json.dumps(data))
    return str(path)


@pytest.fixture
def scenario(tmp_path):
    write_json(tmp_path / "g.json", path_graph(3).to_dict())
    return write_json(tmp_path / "s.json", {"graph": "g.json", "attack": [1], "monitor": [2], "delta": 1, "attack_energy": 1})


def test_gen_er_is_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["gen-er", "--n", "8", "--p", "0.4", "--seed", "5", "--out", str(a)]) == 0
    assert main(["gen-er", "--n", "8", "--p", "0.4", "--seed", "5", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["n"] == 8


def test_gen_er_impossible_parameters(capsys):
    assert main(["gen-er", "--n", "5", "--p", "0", "--max-rejections", "3"]) == 1
    assert "error" in capsys.readouterr().err


def test_centrality(tmp_path, capsys):
    g = write_json(tmp_path / "g.json", path_graph(5).to_dict())
    assert main(["centrality", "--graph", g, "--kind", "betweenness"]) == 0
    out = capsys.readouterr().out
    assert "3,4" in out and "\n  3\n" in out


def test_wcai_and_certificate(scenario, tmp_path, capsys):
    cert = tmp_path / "p.json"
    assert main(["wcai", "--scenario", scenario, "--emit-certificate", str(cert)]) == 0
    out = capsys.readouterr().out
    assert "optimal" in out and "4.04868" in out
    data = json.loads(cert.read_text())
    assert len(data["P"]) == 3 and data["status"] == "optimal"


def test_wcai_swing_scenario(tmp_path, capsys):
    s = write_json(tmp_path / "s.json", {"graph": "ieee14", "attack": [3], "monitor": [2]})
    assert main(["wcai", "--scenario", s]) == 0
    first = capsys.readouterr().out
    # explicit model key and plural monitor key give the same program
    s = write_json(tmp_path / "t.json", {"model": "swing", "swing": "ieee14", "attack": [3], "monitors": [2]})
    assert main(["wcai", "--scenario", s]) == 0
    assert capsys.readouterr().out.splitlines()[1] == first.splitlines()[1]


@pytest.mark.parametrize("status, code", [("infeasible", 3), ("numerical-failure", 4)])
def test_wcai_exit_codes(scenario, monkeypatch, status, code):
    def fake(model, params, backend="clarabel"):
        value = math.inf if status == "infeasible" else math.nan
        return WcaiResult(value, math.nan, np.full(1, math.nan), None, status, 0.0)

    monkeypatch.setattr(cli, "solve_wcai", fake)
    assert main(["wcai", "--scenario", scenario]) == code


@pytest.mark.parametrize(
    "payload",
    [
        {"model": "consensus", "graph": {"n": 3, "edges": [[1, 2, 1]]}, "attack": [1], "monitors": [2]},  # disconnected
        {"model": "consensus", "graph": {"n": 3, "edges": [[1, 2, 1], [2, 3, 1]]}, "attack": [4], "monitors": [2]},
        {"model": "consensus", "graph": {"n": 3, "edges": [[1, 2, 1], [2, 3, 1]]}, "attack": [1]},
        {"model": "heat", "attack": [1], "monitors": [1]},
        {"model": "consensus", "graph": "missing.json", "attack": [1], "monitors": [2]},
    ],
)
def test_bad_scenarios_exit_one(tmp_path, payload):
    assert main(["wcai", "--scenario", write_json(tmp_path / "s.json", payload)]) == 1


def test_allocate_all(tmp_path, capsys):
    g = write_json(tmp_path / "g.json", path_graph(3).to_dict())
    out = tmp_path / "alloc.json"
    assert main(["allocate", "--graph", g, "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert [d["strategy"] for d in data] == ["optimal", "degree", "closeness", "betweenness", "combined"]
    assert all(d["monitor_set"] == [2] for d in data)
    assert data[1]["wcai_gap"] == 0


def test_allocate_needs_a_graph(capsys):
    assert main(["allocate"]) == 1


def test_jobs_precedence(monkeypatch):
    monkeypatch.setenv("SECALLOC_JOBS", "3")
    assert cli._jobs(None) == 3
    assert cli._jobs(2) == 2
    monkeypatch.delenv("SECALLOC_JOBS")
    assert cli._jobs(None, 4) == 4
    with pytest.raises(ValueError):
        cli._jobs(0)


def test_experiment_command(tmp_path, monkeypatch, capsys):
    cfg = write_json(tmp_path / "cfg.json", {"sizes": [4], "graphs_per_size": 2, "n_a": [1], "seed": 1, "jobs": 1})
    monkeypatch.setenv("SECALLOC_JOBS", "bogus")
    assert main(["experiment", "--config", cfg, "--out", str(tmp_path / "r")]) == 1
    monkeypatch.delenv("SECALLOC_JOBS")
    assert main(["experiment", "--config", cfg, "--out", str(tmp_path / "r")]) == 0
    names = {p.name for p in (tmp_path / "r").iterdir()}
    assert {"records.csv", "timings.csv", "summary.json", "boxplot_N4_na1.svg", "timegap_N4_na1.svg"} <= names


def test_experiment_rejects_unknown_keys(tmp_path):
    cfg = write_json(tmp_path / "cfg.json", {"sizes": [4], "graphs": 2})
    assert main(["experiment", "--config", cfg, "--out", str(tmp_path / "r")]) == 1
