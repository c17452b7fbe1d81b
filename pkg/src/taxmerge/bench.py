"""Per-phase timing of the merge pipeline on generated scenarios."""

from __future__ import annotations

import csv
import dataclasses
import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .graphs import LabelMode, build_icg
from .mappings import generate_mappings
from .merge_base import ROOT_ID, merge_icg_base
from .merge_ext import merge_icg_extended
from .scenarios import Scenario, tree_pair


@dataclass(frozen=True)
class BenchmarkRecord:
    scenario: str
    source_concepts: int
    target_concepts: int
    correspondences: int
    matches: int
    icg_nodes: int
    icg_edges: int
    output_concepts: int
    synthetic_root: bool
    t_icg: float
    t_merge: float
    t_mappings: float

    @property
    def t_total(self) -> float:
        return self.t_icg + self.t_merge + self.t_mappings


def bench_scenario(scenario: Scenario, mode: str = "base", repeats: int = 1) -> BenchmarkRecord:
    """Best-of-``repeats`` wall-clock time per phase; inputs are already in memory."""
    best = [float("inf")] * 3
    for _ in range(max(1, repeats)):
        t0 = time.perf_counter()
        icg = build_icg(scenario.source, scenario.target, scenario.mapping, LabelMode.CONCAT)
        t1 = time.perf_counter()
        if mode == "extended":
            merged = merge_icg_extended(icg, source=scenario.source)
        else:
            merged = merge_icg_base(icg)
        t2 = time.perf_counter()
        generate_mappings(icg, merged)
        t3 = time.perf_counter()
        best = [min(b, t) for b, t in zip(best, (t1 - t0, t2 - t1, t3 - t2))]
    return BenchmarkRecord(
        scenario=scenario.name,
        source_concepts=len(scenario.source),
        target_concepts=len(scenario.target),
        correspondences=len(scenario.mapping.correspondences),
        matches=len(scenario.mapping.concept_pairs()),
        icg_nodes=len(icg.nodes),
        icg_edges=len(icg.edges),
        output_concepts=len(merged.concepts),
        synthetic_root=merged.root == ROOT_ID,
        t_icg=best[0],
        t_merge=best[1],
        t_mappings=best[2],
    )


def run_bench(scenarios: Iterable[Scenario], mode: str = "base", repeats: int = 1) -> list[BenchmarkRecord]:
    return [bench_scenario(s, mode, repeats) for s in scenarios]


def tree_family(sizes: Sequence[int] = (1000, 5000, 10000, 20000), seed: int = 0) -> list[Scenario]:
    return [tree_pair(n, seed) for n in sizes]


def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares line through the points; returns (slope, intercept, R²)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if len(x) < 2:
        raise ValueError("a line fit needs at least two points")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return float(slope), float(intercept), r2


_COLUMNS = [f.name for f in dataclasses.fields(BenchmarkRecord)] + ["t_total"]


def _row(r: BenchmarkRecord) -> dict:
    row = dataclasses.asdict(r)
    row["t_total"] = r.t_total
    return row


def write_csv(records: Sequence[BenchmarkRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=_COLUMNS)
        w.writeheader()
        for r in records:
            w.writerow(_row(r))


def write_json(records: Sequence[BenchmarkRecord], path: str | Path) -> None:
    Path(path).write_text(json.dumps([_row(r) for r in records], indent=2) + "\n", encoding="utf-8")
