"""Centrality heuristics against exhaustive monitor placement on random graphs.

A scaled-down batch (10 graphs of 10 vertices); the full study uses
``secalloc experiment --config cfg.json``.

    python3 gallery/er_gap_study.py [out_dir]
"""

import sys

from secalloc.experiment import ExperimentConfig, emit_outputs, run_er_experiment

out = sys.argv[1] if len(sys.argv) > 1 else "gallery_out/er"
cfg = ExperimentConfig(sizes=[10], graphs_per_size=10, n_a=[1], seed=0)
records, summary = run_er_experiment(cfg, progress=lambda k, n: print(f"graph {k}/{n}", end="\r"))
print()

for r in records:
    gaps = "  ".join(f"{s.value[:4]} {g:6.2f}" for s, g in r.wcai_gap.items())
    print(f"graph {r.graph_index:2d}: {gaps}")

cell = summary["cells"]["N10_na1"]
print("\nmedian WCAI gap (%):", {k: round(v["median"], 3) for k, v in cell["wcai_gap"].items()})
print("median time gap (%):", {k: round(v["median"], 1) for k, v in cell["time_gap"].items()})
for p in emit_outputs(records, summary, out):
    print("wrote", p)
