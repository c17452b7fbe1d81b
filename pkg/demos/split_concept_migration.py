"""Splitting a broad source concept across narrower target concepts.

The vendor files all mice under one concept; the marketplace separates them by
brand. Filtered inverse correspondences send each instance to the right brand
node and anything else to an "(others)" node.
"""

from collections import Counter
from pathlib import Path

from taxmerge import io
from taxmerge.cli import run_pipeline
from taxmerge.graphs import SOURCE

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

for name, files in {
    "catalog": ("running", "mapping_extended.json"),
    "software": ("software", "mapping.json"),
}.items():
    folder, mapping_file = files
    source = io.load_taxonomy(FIXTURES / folder / "source.json")
    target = io.load_taxonomy(FIXTURES / folder / "target.json")
    mapping = io.load_mapping(FIXTURES / folder / mapping_file)
    res = run_pipeline(source, target, mapping, "extended")
    merged = res.merged

    print(f"== {name}")
    for c in source.concepts:
        rows = [r for r in res.mappings.concept_rows(SOURCE, c.id) if r.filter is not None]
        if not rows:
            continue
        print(f"{c.label} is split by:")
        for r in rows:
            print(f"  {str(r.filter):45s} -> {merged.concept(r.node).label}")

    counts = Counter(merged.concept(node).label for (side, _), node in res.migration.placements.items()
                     if side == SOURCE)
    print("source instances placed:", dict(sorted(counts.items())))
    print("migration errors:", [e.code for e in res.migration.errors] or "none")
    print()
