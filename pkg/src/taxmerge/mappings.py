"""Output mappings from the inputs onto the merge result, and instance migration."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Iterable

from .filters import Filter, evaluate
from .graphs import SOURCE, TARGET, EdgeKind, IntegratedConceptGraph
from .merge_base import MergedTaxonomy, MergeError
from .model import Instance, Taxonomy


@dataclass(frozen=True)
class OutputCorrespondence:
    """``side`` is ``"S"`` or ``"T"``; attribute rows set both attribute fields."""

    side: str
    concept: str
    node: str
    filter: Filter | None = None
    attribute: str | None = None
    node_attribute: str | None = None

    @property
    def is_attribute(self) -> bool:
        return self.attribute is not None


@dataclass(frozen=True)
class OutputMappings:
    m_s: tuple[OutputCorrespondence, ...]
    m_t: tuple[OutputCorrespondence, ...]

    def side(self, side: str) -> tuple[OutputCorrespondence, ...]:
        return self.m_s if side == SOURCE else self.m_t

    def concept_rows(self, side: str, concept: str | None = None) -> list[OutputCorrespondence]:
        return [
            c for c in self.side(side)
            if not c.is_attribute and (concept is None or c.concept == concept)
        ]

    def image(self, side: str) -> dict[str, str]:
        """Unfiltered concept image per input concept."""
        return {c.concept: c.node for c in self.side(side) if not c.is_attribute and c.filter is None}


def generate_mappings(icg: IntegratedConceptGraph, merged: MergedTaxonomy) -> OutputMappings:
    """Correspondences from every input concept that survives, directly or split.

    Merged nodes and retained nodes without inverse-is-a edges map each of
    their member concepts unfiltered. A source concept with inverse-is-a
    edges maps once per edge with the edge filter and once onto its
    ``(others)`` concept with the complement filter; if it is also merged
    with a target concept its unfiltered row is kept as the record of the
    equivalence, and migration routes its instances by the filters.
    """
    present = set(merged.index)
    for c in merged.concepts:
        if getattr(c, "synthetic", False) or getattr(c, "others_of", None) not in (None, c.id):
            continue
        if c.id not in icg.node_index:
            raise MergeError(f"merged concept {c.id!r} does not come from this integrated graph")

    m_s: list[OutputCorrespondence] = []
    m_t: list[OutputCorrespondence] = []
    for n in icg.nodes:
        if n.id not in present:
            continue
        split = icg.outgoing(n.id, EdgeKind.INVISA)
        if n.is_merged or not split:
            m_s.extend(OutputCorrespondence(SOURCE, sid, n.id) for sid in n.src_concepts)
            m_t.extend(OutputCorrespondence(TARGET, tid, n.id) for tid in n.tgt_concepts)
        for e in split:
            if e.parent not in present:
                raise MergeError(f"inverse-is-a target {e.parent!r} missing from the merge result")
            m_s.extend(OutputCorrespondence(SOURCE, sid, e.parent, e.filter) for sid in n.src_concepts)
        if split:
            others = merged.others_node(n.id)
            if others is not None:
                m_s.extend(OutputCorrespondence(SOURCE, sid, others.id, others.filter) for sid in n.src_concepts)
        for a in n.attributes:
            if a.source is not None:
                m_s.extend(OutputCorrespondence(SOURCE, sid, n.id, None, a.source, a.name) for sid in n.src_concepts)
            if a.target is not None:
                m_t.extend(OutputCorrespondence(TARGET, tid, n.id, None, a.target, a.name) for tid in n.tgt_concepts)
    return OutputMappings(tuple(m_s), tuple(m_t))


def eval_filter(f: Filter, instance: Instance) -> bool:
    return evaluate(f, instance.values)


@dataclass(frozen=True)
class MigrationIssue:
    code: str  # "no-destination" or "ambiguous"
    side: str
    concept: str
    instance: str
    nodes: tuple[str, ...] = ()


@dataclass(frozen=True)
class MigrationResult:
    merged: MergedTaxonomy
    placements: dict[tuple[str, str], str]
    errors: tuple[MigrationIssue, ...]

    @property
    def ok(self) -> bool:
        return not self.errors


def route_instance(rows: Iterable[OutputCorrespondence], instance: Instance) -> list[str]:
    """Destinations of one instance given its concept's correspondences.

    Filtered rows, when present, decide alone; otherwise every unfiltered
    row is a destination.
    """
    rows = list(rows)
    filtered = [r for r in rows if r.filter is not None]
    if filtered:
        return [r.node for r in filtered if eval_filter(r.filter, instance)]  # type: ignore[arg-type]
    return [r.node for r in rows]


def migrate_instances(
    source: Taxonomy,
    target: Taxonomy,
    mappings: OutputMappings,
    merged: MergedTaxonomy,
) -> MigrationResult:
    """Copy every leaf instance to its single destination node.

    Migrated instances get ids ``s:<id>`` or ``t:<id>`` so that equal ids
    from the two inputs stay distinct.
    """
    rows_by_concept: dict[tuple[str, str], list[OutputCorrespondence]] = {}
    for side in (SOURCE, TARGET):
        for r in mappings.concept_rows(side):
            rows_by_concept.setdefault((side, r.concept), []).append(r)

    placements: dict[tuple[str, str], str] = {}
    errors: list[MigrationIssue] = []
    landed: dict[str, list[Instance]] = {}
    for side, tax in ((SOURCE, source), (TARGET, target)):
        for concept in tax.concepts:
            rows = rows_by_concept.get((side, concept.id), [])
            for inst in concept.instances:
                dests = route_instance(rows, inst)
                if len(dests) != 1:
                    code = "no-destination" if not dests else "ambiguous"
                    errors.append(MigrationIssue(code, side, concept.id, inst.id, tuple(dests)))
                    continue
                placements[(side, inst.id)] = dests[0]
                landed.setdefault(dests[0], []).append(
                    Instance(f"{side.lower()}:{inst.id}", inst.values)
                )

    concepts = []
    for c in merged.concepts:
        extra = sorted(landed.get(c.id, ()), key=lambda i: i.id)
        concepts.append(dataclasses.replace(c, instances=tuple(c.instances) + tuple(extra)) if extra else c)
    out = dataclasses.replace(merged, concepts=tuple(concepts))
    errors.sort(key=lambda e: (e.side, e.instance))
    return MigrationResult(out, dict(sorted(placements.items())), tuple(errors))
