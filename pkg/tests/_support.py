"""Helpers shared by the test modules: fixture loading and scenario sweeps."""

from __future__ import annotations

import json
import random
from pathlib import Path

from taxmerge.cli import run_pipeline
from taxmerge.graphs import TARGET
from taxmerge.io import labelled_structure, load_mapping, load_taxonomy
from taxmerge.scenarios import ScenarioParams, gen_scenario

FIXTURES = Path(__file__).parent / "fixtures"

CASES = {
    "running-base": ("running", "source.json", "target.json", "mapping_eq.json", "expected_base.json", "base"),
    "running-extended": (
        "running", "source.json", "target.json", "mapping_extended.json", "expected_extended.json", "extended"
    ),
    "anatomy": ("anatomy", "source.json", "target.json", "mapping.json", "expected.json", "base"),
    "toy-cycle": (
        "toy", "cycle_source.json", "cycle_target.json", "cycle_mapping.json", "cycle_expected.json", "base"
    ),
    "toy-reward": (
        "toy", "reward_source.json", "reward_target.json", "reward_mapping.json", "reward_expected.json", "base"
    ),
    "software": ("software", "source.json", "target.json", "mapping.json", "expected.json", "extended"),
}


def load_case(name: str):
    folder, s, t, m, e, mode = CASES[name]
    d = FIXTURES / folder
    expected = json.loads((d / e).read_text(encoding="utf-8"))
    return load_taxonomy(d / s), load_taxonomy(d / t), load_mapping(d / m), expected, mode


def structure_diff(merged, expected: dict) -> list[str]:
    """Differences between a merge result and an expected-structure document."""
    got = labelled_structure(merged)
    diffs = []
    for key in ("concepts", "edges"):
        want = sorted(expected[key])
        if got[key] != want:
            missing = [x for x in want if x not in got[key]]
            extra = [x for x in got[key] if x not in want]
            diffs.append(f"{key}: missing {missing}, unexpected {extra}")
    root_label = merged.concept(merged.root).label if merged.root else None
    if root_label != expected["root"]:
        diffs.append(f"root {root_label!r} != {expected['root']!r}")
    checks = {
        "relevant_s_edges": sorted(merged.relevant_s_edges()),
        "rewarded_t_edges": sorted(merged.rewarded_t_edges),
        "removed_cycle_edges": sorted(merged.removed_cycle_edges),
        "dropped": sorted(d.label for d in merged.dropped),
    }
    for key, value in checks.items():
        if key in expected and value != sorted(expected[key]):
            diffs.append(f"{key} {value} != {sorted(expected[key])}")
    return diffs


def isomorphism_diff(target, merged, mappings) -> str | None:
    """None when the result is the target up to renaming and ``*`` suffixes."""
    img = mappings.image(TARGET)
    if len(merged.concepts) != len(target.concepts) or len(set(img.values())) != len(target.concepts):
        return f"{len(merged.concepts)} result concepts for {len(target.concepts)} target concepts"
    if {(img[c], img[p]) for c, p in target.isa_edges} != set(merged.isa_edges):
        return "edge sets differ"
    for c in target.concepts:
        label = merged.concept(img[c.id]).label
        if label.rstrip("*") != c.label:
            return f"{c.id} labelled {label!r}"
    return None


def feasible_params(rng: random.Random, enriched: bool, multi_parent_prob: float,
                    lo: int = 5, hi: int = 60, max_instances: int = 60) -> ScenarioParams:
    n_t, n_s = rng.randint(lo, hi), rng.randint(lo, hi)
    depth, fanout = rng.randint(2, 6), rng.randint(2, 6)
    while sum(fanout ** k for k in range(depth + 1)) < n_t:
        fanout += 1
    return ScenarioParams(
        concepts=n_t,
        source_concepts=n_s,
        depth=depth,
        fanout=fanout,
        multi_parent_prob=multi_parent_prob,
        overlap_ratio=rng.random(),
        instance_count=rng.randint(0, max_instances),
        isa_rate=0.15 if enriched else 0.0,
        invisa_rate=0.2 if enriched else 0.0,
    )


def sweep(count: int, lo: int = 5, hi: int = 60, max_instances: int = 60, base_seed: int = 0):
    """Yield ``(scenario, mode, result)``; odd seeds carry is-a and inverse-is-a correspondences."""
    for seed in range(base_seed, base_seed + count):
        rng = random.Random(seed * 7919)
        enriched = seed % 2 == 1
        mpp = (0.0, 0.3)[seed % 4 // 2]
        sc = gen_scenario(seed, feasible_params(rng, enriched, mpp, lo, hi, max_instances))
        mode = "extended" if enriched else "base"
        yield sc, mode, run_pipeline(sc.source, sc.target, sc.mapping, mode)
