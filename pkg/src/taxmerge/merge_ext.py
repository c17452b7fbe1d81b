"""Extended merge: is-a and inverse-is-a correspondences on top of equivalences.

Is-a correspondences become relationships directly and stop the upward
source walks. Inverse-is-a correspondences split a source concept: each
target concept they point to receives the instances selected by the
correspondence filter, and an ``(others)`` concept keeps the rest.
"""

from __future__ import annotations

import dataclasses
from collections import defaultdict
from typing import Iterable

from .filters import Filter, complement, evaluate
from .graphs import EdgeKind, IntegratedConceptGraph, LabelMode, build_icg
from .merge_base import (
    MergedConcept,
    MergedTaxonomy,
    MergeError,
    Relationship,
    assemble,
    remove_cycles,
    translate_s_edges,
    translate_t_edges,
)
from .model import InputMapping, Taxonomy

OTHERS_SUFFIX = " (others)"


def translate_t_edges_ext(icg: IntegratedConceptGraph, stats: dict[str, int] | None = None):
    """T-edge translation where the rewarded path may mix S and ISA edges."""
    return translate_t_edges(icg, extended=True, stats=stats)


def translate_isa_edges(icg: IntegratedConceptGraph) -> list[Relationship]:
    return [Relationship(e.child, e.parent, e.label) for e in icg.edges_of(EdgeKind.ISA)]


def translate_s_edges_ext(
    icg: IntegratedConceptGraph,
    marks: set[str],
    stats: dict[str, int] | None = None,
) -> tuple[set[str], list[Relationship]]:
    return translate_s_edges(icg, marks, extended=True, stats=stats)


def _source_instances(source: Taxonomy | None, concept: MergedConcept):
    if source is None:
        return []
    return [i for sid in concept.src_concepts if sid in source for i in source.concept(sid).instances]


def translate_inv_isa_edges(
    icg: IntegratedConceptGraph,
    merged: MergedTaxonomy,
    prune_empty_others: bool = False,
    source: Taxonomy | None = None,
) -> MergedTaxonomy:
    """Rename or split concepts along inverse-is-a edges ``A -> B``.

    If a relevant S or T edge ``B -> A`` exists, ``A`` keeps its label and
    gains a child ``<A> (others)``. Otherwise ``A`` itself is renamed to
    ``<A> (others)`` and ``B`` to ``<B> + subset(<A>)``. The ``(others)``
    concept carries the complement of every filter leaving ``A``.

    ``prune_empty_others`` drops a freshly created ``(others)`` leaf that no
    instance of ``source`` would reach.
    """
    invisa = icg.edges_of(EdgeKind.INVISA)
    if not invisa:
        return merged

    concepts: dict[str, MergedConcept] = {c.id: c for c in merged.concepts}  # type: ignore[misc]
    relationships = list(merged.relationships)
    original_label = {cid: c.label for cid, c in concepts.items()}
    filters: dict[str, list[Filter]] = defaultdict(list)
    others: dict[str, str] = {}
    created: list[str] = []

    for e in invisa:
        a, b = e.child, e.parent
        if a not in concepts or b not in concepts:
            raise MergeError(f"inverse-is-a edge {e.label} joins a dropped concept")
        if e.filter is not None:
            filters[a].append(e.filter)
        back = [x for x in icg.outgoing(b, EdgeKind.T) if x.parent == a]
        back += [x for x in icg.outgoing(b, EdgeKind.S) if x.parent == a and merged.relevance.get(x.label)]
        if back:
            if a not in others:
                oid = f"{a}#others"
                parent = concepts[a]
                concepts[oid] = MergedConcept(
                    id=oid,
                    label=original_label[a] + OTHERS_SUFFIX,
                    attributes=parent.attributes,
                    merged_attributes=parent.merged_attributes,
                    others_of=a,
                )
                relationships.append(Relationship(oid, a, "others"))
                others[a] = oid
                created.append(oid)
        else:
            if a not in others:
                concepts[a] = dataclasses.replace(concepts[a], label=original_label[a] + OTHERS_SUFFIX, others_of=a)
                others[a] = a
            concepts[b] = dataclasses.replace(
                concepts[b], label=f"{concepts[b].label} + subset({original_label[a]})"
            )

    for a, oid in others.items():
        if filters[a]:
            concepts[oid] = dataclasses.replace(concepts[oid], filter=complement(filters[a]))

    if prune_empty_others:
        for oid in created:
            c = concepts[oid]
            split = concepts[c.others_of]  # type: ignore[index]
            pool = _source_instances(source, split)
            if c.filter is not None and not any(evaluate(c.filter, i.values) for i in pool):
                del concepts[oid]
                relationships = [r for r in relationships if oid not in (r.child, r.parent)]

    order = [c.id for c in merged.concepts] + [oid for oid in created if oid in concepts]
    return dataclasses.replace(
        merged,
        concepts=tuple(concepts[cid] for cid in order),
        isa_edges=tuple((r.child, r.parent) for r in relationships),
        relationships=tuple(relationships),
    )


def merge_icg_extended(
    icg: IntegratedConceptGraph,
    cycle_overrides: Iterable[tuple[str, str]] = (),
    prune_empty_others: bool = False,
    source: Taxonomy | None = None,
) -> MergedTaxonomy:
    stats: dict[str, int] = {}
    acyclic, removed = remove_cycles(icg, cycle_overrides, include_isa=True, stats=stats)
    t_rels, marks, rewarded = translate_t_edges_ext(acyclic, stats=stats)
    isa_rels = translate_isa_edges(acyclic)
    marks, s_rels = translate_s_edges_ext(acyclic, marks, stats=stats)
    relevance = {e.label: e.label in marks for e in icg.edges_of(EdgeKind.S)}
    merged = assemble(acyclic, t_rels + isa_rels + s_rels, relevance, removed, rewarded, stats, extended=True)
    return translate_inv_isa_edges(acyclic, merged, prune_empty_others, source)


def merge_extended(
    source: Taxonomy,
    target: Taxonomy,
    mapping: InputMapping,
    label_mode: LabelMode = LabelMode.CONCAT,
    cycle_overrides: Iterable[tuple[str, str]] = (),
    prune_empty_others: bool = False,
) -> MergedTaxonomy:
    icg = build_icg(source, target, mapping, label_mode)
    return merge_icg_extended(icg, cycle_overrides, prune_empty_others, source)
