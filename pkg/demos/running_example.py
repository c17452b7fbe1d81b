"""Walk through merging a vendor's product catalog into a marketplace catalog.

Run from the repository root:  python demos/running_example.py
"""

from pathlib import Path

from taxmerge import io
from taxmerge.cli import run_pipeline
from taxmerge.graphs import SOURCE, TARGET

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "running"

source = io.load_taxonomy(FIXTURES / "source.json")
target = io.load_taxonomy(FIXTURES / "target.json")
mapping = io.load_mapping(FIXTURES / "mapping_eq.json")

print(f"source: {len(source)} concepts, target: {len(target)} concepts, "
      f"{len(mapping.correspondences)} correspondences\n")

res = run_pipeline(source, target, mapping, "base")
merged = res.merged

# The integrated graph holds every concept once, with S and T edges side by side.
kinds = {}
for e in res.icg.edges:
    kinds[e.kind.name] = kinds.get(e.kind.name, 0) + 1
print("integrated graph:", len(res.icg.nodes), "nodes,", kinds)

print("\nrelevant source edges:", sorted(merged.relevant_s_edges()))
print("rewarded target edges:", list(merged.rewarded_t_edges))
print("dropped source concepts:", [d.label for d in merged.dropped])

print("\nmerged hierarchy:")


def show(node, depth=0):
    c = merged.concept(node)
    attrs = f"  [{', '.join(c.attributes)}]" if c.attributes else ""
    print("  " * depth + c.label + attrs)
    for child in sorted(merged.children.get(node, ()), key=lambda n: merged.concept(n).label):
        show(child, depth + 1)


show(merged.root)

print("\nwhere the source concepts went:")
for c in source.concepts:
    for row in res.mappings.concept_rows(SOURCE, c.id):
        print(f"  {c.label:14s} -> {merged.concept(row.node).label}")

print("\nproperty checks:")
for s in res.report.statuses:
    print(f"  {s.name:8s} {dict([(True, 'pass'), (False, 'FAIL'), (None, 'n/a')])[s.passed]}")
assert len(res.mappings.image(TARGET)) == len(target)
