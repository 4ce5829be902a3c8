import csv
import json
import math

import numpy as np
import pytest

from secalloc.allocation import ALL_STRATEGIES, Strategy
from secalloc.experiment import (
    JOBS_ENV,
    RECORD_COLUMNS,
    ExperimentConfig,
    Ieee14Report,
    emit_ieee14,
    emit_outputs,
    env_jobs,
    graph_seed,
    percentiles,
    run_er_experiment,
    summarize,
)
from secalloc.centrality import CentralityKind
from secalloc.svg import box_stats
from secalloc.wcai import ScenarioParams

TINY = dict(sizes=[5], graphs_per_size=4, p=0.5, n_a=[1], seed=3)


@pytest.fixture(scope="module")
def tiny_run():
    cfg = ExperimentConfig.from_dict(TINY)
    return cfg, *run_er_experiment(cfg)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_config_defaults_and_validation():
    cfg = ExperimentConfig()
    assert cfg.sizes == [10] and cfg.graphs_per_size == 30 and cfg.n_s == 1
    assert ExperimentConfig.from_dict({"sizes": 6, "n_a": 2}).sizes == [6]
    with pytest.raises(ValueError, match="unknown"):
        ExperimentConfig.from_dict({"size": [5]})
    for bad in ({"p": 1.5}, {"sizes": [3], "n_a": [4]}, {"graphs_per_size": 0}, {"delta": 0}, {"sizes": []}):
        with pytest.raises(ValueError):
            ExperimentConfig.from_dict(bad)


def test_config_roundtrip(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(TINY))
    assert ExperimentConfig.load(path) == ExperimentConfig(**TINY)
    assert ExperimentConfig.from_dict(ExperimentConfig(**TINY).to_dict()) == ExperimentConfig(**TINY)


def test_env_jobs(monkeypatch):
    monkeypatch.delenv(JOBS_ENV, raising=False)
    assert env_jobs(3) == 3
    monkeypatch.setenv(JOBS_ENV, "2")
    assert env_jobs() == 2
    for bad in ("0", "two"):
        monkeypatch.setenv(JOBS_ENV, bad)
        with pytest.raises(ValueError):
            env_jobs()


def test_graph_seed_is_stable_and_distinct():
    assert graph_seed(0, 10, 1) == graph_seed(0, 10, 1)
    assert len({graph_seed(0, n, i) for n in (10, 12) for i in range(20)}) == 40


def test_percentiles():
    p = percentiles([4.0, 1.0, 3.0, 2.0, math.nan])
    assert (p["p25"], p["median"], p["p75"], p["count"]) == (1.75, 2.5, 3.25, 4)
    assert math.isnan(percentiles([])["median"])


def test_records_are_consistent(tiny_run):
    cfg, records, summary = tiny_run
    assert len(records) == 4
    for r in records:
        assert r.wcai_gap[Strategy.OPTIMAL] == 0
        j_opt = r.results[Strategy.OPTIMAL].wcai
        for s in ALL_STRATEGIES:
            assert r.results[s].wcai >= j_opt * (1 - 1e-6)
        kinds = (Strategy.DEGREE, Strategy.CLOSENESS, Strategy.BETWEENNESS)
        assert r.results[Strategy.COMBINED].wcai == min(r.results[s].wcai for s in kinds)
    assert summary["cells"]["N5_na1"]["graphs"] == 4


def test_outputs_are_byte_identical(tiny_run, tmp_path):
    cfg, records, summary = tiny_run
    emit_outputs(records, summary, tmp_path / "a")
    again = run_er_experiment(cfg)
    emit_outputs(*again, tmp_path / "b")
    assert (tmp_path / "a" / "records.csv").read_bytes() == (tmp_path / "b" / "records.csv").read_bytes()


def test_csv_and_summary_agree(tiny_run, tmp_path):
    cfg, records, summary = tiny_run
    emit_outputs(records, summary, tmp_path)
    rows = read_rows(tmp_path / "records.csv")
    assert list(rows[0]) == RECORD_COLUMNS
    stored = json.loads((tmp_path / "summary.json").read_text())
    for s in ALL_STRATEGIES:
        gaps = [float(row[f"{s.value}_gap"]) for row in rows]
        assert stored["cells"]["N5_na1"]["wcai_gap"][s.value]["median"] == pytest.approx(float(np.median(gaps)), abs=1e-12)
    for row in rows:
        assert row["optimal_gap"] == "0"
        for k in ("degree", "closeness", "betweenness"):
            assert float(row["combined_gap"]) <= float(row[f"{k}_gap"])
    timings = read_rows(tmp_path / "timings.csv")
    assert len(timings) == len(rows) and "optimal_time" in timings[0]


def test_box_plots(tiny_run, tmp_path):
    cfg, records, summary = tiny_run
    emit_outputs(records[:1], summarize(records[:1], cfg), tmp_path)
    for name in ("boxplot_N5_na1.svg", "timegap_N5_na1.svg"):
        svg = (tmp_path / name).read_text()
        assert svg.count('class="box"') == len(ALL_STRATEGIES)


def test_empty_batch_writes_headers(tmp_path):
    cfg = ExperimentConfig(**TINY)
    emit_outputs([], summarize([], cfg), tmp_path)
    assert (tmp_path / "records.csv").read_text().strip() == ",".join(RECORD_COLUMNS)
    assert json.loads((tmp_path / "summary.json").read_text())["cells"]["N5_na1"]["graphs"] == 0


def test_box_stats_whiskers():
    st = box_stats([1, 2, 3, 4, 100])
    assert st["median"] == 3
    assert st["hi"] == 4 and st["outliers"] == [100]
    assert box_stats([]) is None


def test_ieee14_outputs(tmp_path):
    wcai = {1: 2.0, 2: 1.0, 3: 1.5}
    scores = {k: np.array([0.1, 0.2, 0.9]) for k in CentralityKind}
    rep = Ieee14Report(ScenarioParams(), 1, wcai, {b: (1,) for b in wcai}, scores, {k: 3 for k in CentralityKind}, 2, 9, 0.1)
    assert rep.gap(3) == pytest.approx(50.0)
    paths = emit_ieee14(rep, tmp_path)
    rows = read_rows(paths[0])
    assert [r["gap_percent"] for r in rows] == ["100", "0", "50"]
    assert json.loads(paths[1].read_text())["optimal_bus"] == 2
    assert paths[2].read_text().startswith("<svg")
