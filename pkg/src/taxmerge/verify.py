"""Executable checks of the merge requirements and the brute-force oracles behind them.

Every checker returns a :class:`PropertyStatus` whose ``witnesses`` name the
offending concepts, edges or instances. ``passed`` is ``None`` when a
conditional property does not apply.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .filters import evaluate
from .graphs import SOURCE, TARGET
from .mappings import MigrationResult, OutputCorrespondence, OutputMappings
from .model import (
    InputMapping,
    Instance,
    Taxonomy,
    count_root_paths,
    find_cycle,
    is_implied,
)


@dataclass(frozen=True)
class PropertyStatus:
    name: str
    passed: bool | None
    witnesses: tuple[str, ...] = ()

    @property
    def failed(self) -> bool:
        return self.passed is False


def _status(name: str, witnesses: list[str], applicable: bool = True) -> PropertyStatus:
    if not applicable:
        return PropertyStatus(name, None)
    return PropertyStatus(name, not witnesses, tuple(witnesses))


@dataclass(frozen=True)
class PropertyReport:
    statuses: tuple[PropertyStatus, ...] = field(default_factory=tuple)

    def __getitem__(self, name: str) -> PropertyStatus:
        for s in self.statuses:
            if s.name == name:
                return s
        raise KeyError(name)

    @property
    def ok(self) -> bool:
        return not any(s.failed for s in self.statuses)

    def failures(self) -> list[PropertyStatus]:
        return [s for s in self.statuses if s.failed]

    def as_dict(self) -> dict:
        return {
            s.name: {"passed": s.passed, "witnesses": list(s.witnesses)}
            for s in self.statuses
        }


def _concept_rows(rows: Iterable[OutputCorrespondence]) -> dict[str, list[OutputCorrespondence]]:
    out: dict[str, list[OutputCorrespondence]] = defaultdict(list)
    for r in rows:
        if not r.is_attribute:
            out[r.concept].append(r)
    return out


def _target_image(target: Taxonomy, merged: Taxonomy, m_t: Iterable[OutputCorrespondence]) -> dict[str, str]:
    rows = _concept_rows(m_t)
    return {
        c.id: rows[c.id][0].node
        for c in target.concepts
        if len(rows.get(c.id, ())) == 1 and rows[c.id][0].node in merged
    }


def check_p1(target: Taxonomy, merged: Taxonomy, m_t: Iterable[OutputCorrespondence]) -> PropertyStatus:
    """Every target concept and attribute has exactly one image in the result."""
    m_t = list(m_t)
    rows = _concept_rows(m_t)
    witnesses = []
    for c in target.concepts:
        hits = [r for r in rows.get(c.id, ()) if r.node in merged]
        if len(hits) != 1:
            witnesses.append(f"concept {c.id}: {len(hits)} images")
    attr_rows: Counter[tuple[str, str]] = Counter()
    for r in m_t:
        if r.is_attribute and r.node in merged and r.node_attribute in merged.concept(r.node).attributes:
            attr_rows[(r.concept, r.attribute)] += 1  # type: ignore[index]
    for c in target.concepts:
        for a in c.attributes:
            if attr_rows[(c.id, a)] != 1:
                witnesses.append(f"attribute {c.id}.{a}: {attr_rows[(c.id, a)]} images")
    return _status("P1", witnesses)


def check_p2(target: Taxonomy, merged: Taxonomy, m_t: Iterable[OutputCorrespondence]) -> PropertyStatus:
    """Every target is-a edge holds in the result, directly or by implication."""
    image = _target_image(target, merged, m_t)
    witnesses = []
    for child, parent in target.isa_edges:
        a, b = image.get(child), image.get(parent)
        if a is None or b is None or not is_implied(merged, a, b):
            witnesses.append(f"{child}->{parent}")
    return _status("P2", witnesses)


def _eq_pairs(mapping: InputMapping) -> set[tuple[str, str]]:
    return mapping.concept_pairs()


def check_p3_p5(
    source: Taxonomy,
    target: Taxonomy,
    mapping: InputMapping,
    merged: Taxonomy,
    mappings: OutputMappings,
    migration: MigrationResult | None = None,
) -> tuple[PropertyStatus, PropertyStatus]:
    """Information preservation and equality preservation."""
    p3: list[str] = []
    for side, tax in ((SOURCE, source), (TARGET, target)):
        rows = _concept_rows(mappings.side(side))
        for leaf in tax.leaves():
            if not any(r.node in merged for r in rows.get(leaf.id, ())):
                p3.append(f"{side} leaf {leaf.id} has no destination")
    if migration is not None:
        for e in migration.errors:
            p3.append(f"{e.side} instance {e.instance} ({e.code})")
        total = sum(len(c.instances) for c in source.concepts) + sum(len(c.instances) for c in target.concepts)
        if len(migration.placements) + len(migration.errors) != total:
            p3.append(f"{total} instances, {len(migration.placements)} placed")

    p5: list[str] = []
    s_img, t_img = mappings.image(SOURCE), mappings.image(TARGET)
    pairs = _eq_pairs(mapping)
    for s, t in sorted(pairs):
        if s_img.get(s) is None or s_img.get(s) != t_img.get(t):
            p5.append(f"partners {s}/{t} map to {s_img.get(s)} and {t_img.get(t)}")
    owners: dict[str, list[tuple[str, str]]] = defaultdict(list)
    for side, img in ((SOURCE, s_img), (TARGET, t_img)):
        for concept, node in img.items():
            owners[node].append((side, concept))
    for node, members in sorted(owners.items()):
        src = [c for side, c in members if side == SOURCE]
        tgt = [c for side, c in members if side == TARGET]
        if len(src) > 1 or len(tgt) > 1 or (src and tgt and (src[0], tgt[0]) not in pairs):
            p5.append(f"node {node} shared by non-partners {members}")
    return _status("P3", p3), _status("P5", p5)


def check_p4(
    target: Taxonomy,
    merged: Taxonomy,
    m_t: Iterable[OutputCorrespondence],
    migrated: MigrationResult | None = None,
) -> PropertyStatus:
    """Single destination per instance and unchanged path counts for target leaves."""
    witnesses = []
    if migrated is not None:
        witnesses += [f"instance {e.instance} -> {list(e.nodes)}" for e in migrated.errors if e.code == "ambiguous"]
    image = _target_image(target, merged, m_t)
    for leaf in target.leaves():
        node = image.get(leaf.id)
        if node is None:
            witnesses.append(f"target leaf {leaf.id} has no image")
            continue
        before, after = count_root_paths(target, leaf.id), count_root_paths(merged, node)
        if before != after:
            witnesses.append(f"target leaf {leaf.id}: {before} paths in target, {after} in result")
    return _status("P4", witnesses)


def check_acyclic(merged: Taxonomy) -> PropertyStatus:
    known = set(merged.index)
    witnesses = [f"dangling edge {c}->{p}" for c, p in merged.isa_edges if c not in known or p not in known]
    cycle = find_cycle([c.id for c in merged.concepts], merged.parents)
    if cycle:
        witnesses.append("cycle " + " -> ".join(cycle))
    return _status("acyclic", witnesses)


def tree_preservation_applies(source: Taxonomy, target: Taxonomy, mapping: InputMapping) -> bool:
    return target.is_tree() and source.is_tree() and mapping.is_equivalence_only


def check_tree_preservation(
    source: Taxonomy, target: Taxonomy, mapping: InputMapping, merged: Taxonomy
) -> PropertyStatus:
    applies = tree_preservation_applies(source, target, mapping)
    witnesses = [f"{c} has parents {ps}" for c, ps in merged.parents.items() if len(ps) > 1]
    return _status("tree", witnesses, applies)


def verify_all(
    source: Taxonomy,
    target: Taxonomy,
    mapping: InputMapping,
    merged: Taxonomy,
    mappings: OutputMappings,
    migration: MigrationResult | None = None,
) -> PropertyReport:
    p3, p5 = check_p3_p5(source, target, mapping, merged, mappings, migration)
    return PropertyReport(
        (
            check_p1(target, merged, mappings.m_t),
            check_p2(target, merged, mappings.m_t),
            p3,
            check_p4(target, merged, mappings.m_t, migration),
            p5,
            check_acyclic(merged),
            check_tree_preservation(source, target, mapping, merged),
        )
    )


# Brute-force oracles ------------------------------------------------------

def enumerate_root_paths(tax: Taxonomy, c: str) -> Iterator[tuple[str, ...]]:
    """Every upward path from ``c`` to a parentless concept, one at a time."""
    stack: list[tuple[str, ...]] = [(c,)]
    while stack:
        path = stack.pop()
        parents = tax.parents.get(path[-1], ())
        if not parents:
            yield path
        for p in parents:
            stack.append(path + (p,))


def brute_force_root_paths(tax: Taxonomy, c: str) -> int:
    return sum(1 for _ in enumerate_root_paths(tax, c))


def brute_force_implied(tax: Taxonomy, a: str, b: str) -> bool:
    return any(b in path[1:] for path in enumerate_root_paths(tax, a))


def brute_force_destinations(
    source: Taxonomy, target: Taxonomy, mappings: OutputMappings
) -> dict[tuple[str, str], list[str]]:
    """Apply every concept correspondence to every instance, independently of migration."""
    out: dict[tuple[str, str], list[str]] = {}
    for side, tax in ((SOURCE, source), (TARGET, target)):
        for concept in tax.concepts:
            for inst in concept.instances:
                plain, hits, split = [], [], False
                for r in mappings.side(side):
                    if r.is_attribute or r.concept != concept.id:
                        continue
                    if r.filter is None:
                        plain.append(r.node)
                        continue
                    split = True
                    if evaluate(r.filter, inst.values):
                        hits.append(r.node)
                out[(side, inst.id)] = sorted(hits if split else plain)
    return out


def all_instances(tax: Taxonomy) -> list[Instance]:
    return [i for c in tax.concepts for i in c.instances]


__all__ = [
    "PropertyStatus",
    "PropertyReport",
    "check_p1",
    "check_p2",
    "check_p3_p5",
    "check_p4",
    "check_acyclic",
    "check_tree_preservation",
    "tree_preservation_applies",
    "verify_all",
    "enumerate_root_paths",
    "brute_force_root_paths",
    "brute_force_implied",
    "brute_force_destinations",
]
