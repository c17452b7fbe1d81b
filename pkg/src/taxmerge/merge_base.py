"""Main phase of the target-driven merge.

The phases run in a fixed order over an integrated concept graph:

1. ``remove_cycles``: drop one S edge per cycle.
2. ``translate_t_edges``: every T edge becomes an is-a relationship unless
   exactly one longer source path connects its endpoints, in which case
   that path is kept instead.
3. ``translate_s_edges``: walk upward from source leaves and keep S edges
   until the walk meets a concept the target already places.
4. ``attach_root``: nest the remaining top level concepts under one root.

Three guards keep the result inside the overlap-control requirement on
inputs whose structure the worked examples never exercise:

* a source path only replaces a T edge when each intermediate concept is
  source-only with a single outgoing edge (no detour adds a second parent);
* walks stop at any concept carrying a target concept, including target
  roots (target concepts never gain source parents by walking);
* only concepts left without any parent are nested under the root.

None of them changes the outcome of the worked examples shipped in
``tests/fixtures``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

from .filters import Filter
from .graphs import (
    EdgeKind,
    ICGEdge,
    IntegratedConceptGraph,
    LabelMode,
    MergedAttribute,
    build_icg,
)
from .model import Concept, InputMapping, Taxonomy

log = logging.getLogger(__name__)

ROOT_ID = "ROOT"
ROOT_LABEL = "ROOT"


class MergeError(RuntimeError):
    """Internal consistency failure while merging."""


@dataclass(frozen=True)
class MergedConcept(Concept):
    src_concepts: tuple[str, ...] = ()
    tgt_concepts: tuple[str, ...] = ()
    merged_attributes: tuple[MergedAttribute, ...] = ()
    description: str | None = None
    filter: Filter | None = None
    others_of: str | None = None
    synthetic: bool = False


class Relationship(NamedTuple):
    child: str
    parent: str
    origin: str  # ICG edge label, "root" or "others"


@dataclass(frozen=True)
class DroppedConcept:
    node: str
    label: str
    src_concepts: tuple[str, ...]
    covering_paths: tuple[tuple[str, ...], ...] = ()


@dataclass(frozen=True)
class MergedTaxonomy(Taxonomy):
    root: str | None = None
    relationships: tuple[Relationship, ...] = ()
    removed_cycle_edges: tuple[str, ...] = ()
    relevance: Mapping[str, bool] = field(default_factory=dict)
    rewarded_t_edges: tuple[str, ...] = ()
    dropped: tuple[DroppedConcept, ...] = ()
    stats: Mapping[str, int] = field(default_factory=dict, compare=False)

    def relevant_s_edges(self) -> set[str]:
        return {label for label, flag in self.relevance.items() if flag}

    def by_label(self, label: str) -> MergedConcept:
        hits = [c for c in self.concepts if c.label == label]
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} concepts labelled {label!r}")
        return hits[0]  # type: ignore[return-value]

    def others_node(self, split_node: str) -> MergedConcept | None:
        for c in self.concepts:
            if getattr(c, "others_of", None) == split_node:
                return c  # type: ignore[return-value]
        return None

    def plain(self) -> Taxonomy:
        return Taxonomy(self.concepts, self.isa_edges)


class TLCClass(NamedTuple):
    source: bool
    target: bool


def classify_tlc(icg: IntegratedConceptGraph, node: str) -> TLCClass:
    icg.node(node)
    return TLCClass(
        not icg.outgoing(node, EdgeKind.S) and bool(icg.incoming(node, EdgeKind.S)),
        not icg.outgoing(node, EdgeKind.T) and bool(icg.incoming(node, EdgeKind.T)),
    )


def _bump(stats: dict[str, int] | None, key: str, n: int = 1) -> None:
    if stats is not None:
        stats[key] = stats.get(key, 0) + n


def remove_cycles(
    icg: IntegratedConceptGraph,
    overrides: Iterable[tuple[str, str]] = (),
    include_isa: bool = False,
    stats: dict[str, int] | None = None,
) -> tuple[IntegratedConceptGraph, tuple[str, ...]]:
    """Break every cycle by deleting S edges; T edges are never touched.

    Within a cycle the victim is, in order of preference: an S edge named in
    ``overrides`` (``(source child id, source parent id)``), an S edge whose
    child is a target top level concept, then the S edge with the smallest
    ``(child label, parent label)``. ISA edges take part in cycle detection
    when ``include_isa`` and are only removed from cycles without S edges.
    """
    kinds = (EdgeKind.S, EdgeKind.T, EdgeKind.ISA) if include_isa else (EdgeKind.S, EdgeKind.T)
    override_set = set(overrides)
    removed: set[str] = set()
    removed_order: list[str] = []

    def src_id(node_id: str) -> str | None:
        src = icg.node(node_id).src_concepts
        return src[0] if src else None

    def rank(e: ICGEdge) -> tuple:
        if (src_id(e.child), src_id(e.parent)) in override_set:
            pref = 0
        elif classify_tlc(icg, e.child).target:
            pref = 1
        else:
            pref = 2
        return (pref, icg.node(e.child).label, icg.node(e.parent).label, e.label)

    def pick(cycle: list[ICGEdge]) -> ICGEdge:
        pool = [e for e in cycle if e.kind is EdgeKind.S] or [e for e in cycle if e.kind is EdgeKind.ISA]
        if not pool:
            names = ", ".join(e.label for e in cycle)
            raise MergeError(f"cycle without a removable edge ({names}); an input taxonomy is cyclic")
        return min(pool, key=rank)

    def adjacent(node: str) -> list[ICGEdge]:
        out = icg.out_edges.get(node)
        if not out:
            return []
        return [e for k in kinds for e in out.get(k, ())]

    WHITE, GRAY, BLACK = 0, 1, 2
    color: dict[str, int] = {}
    for n in icg.nodes:
        if color.get(n.id, WHITE) != WHITE:
            continue
        color[n.id] = GRAY
        # frames: (node, edge iterator, edge that entered the node)
        stack: list[tuple[str, object, ICGEdge | None]] = [(n.id, iter(adjacent(n.id)), None)]
        pos = {n.id: 0}
        while stack:
            node, it, _ = stack[-1]
            e = next(it, None)  # type: ignore[call-overload]
            if e is None:
                color[node] = BLACK
                del pos[node]
                stack.pop()
                continue
            _bump(stats, "cycle_edge_visits")
            if e.label in removed:
                continue
            state = color.get(e.parent, WHITE)
            if state == WHITE:
                color[e.parent] = GRAY
                pos[e.parent] = len(stack)
                stack.append((e.parent, iter(adjacent(e.parent)), e))
            elif state == GRAY:
                start = pos[e.parent]
                cycle = [frame[2] for frame in stack[start + 1:]] + [e]
                victim = pick(cycle)  # type: ignore[arg-type]
                removed.add(victim.label)
                removed_order.append(victim.label)
                log.debug("cycle %s: removing %s", [c.label for c in cycle], victim.label)  # type: ignore[union-attr]
                if victim is e:
                    continue
                cut = next(i for i in range(start + 1, len(stack)) if stack[i][2] is victim)
                for frame in stack[cut:]:
                    color[frame[0]] = WHITE
                    del pos[frame[0]]
                del stack[cut:]
    if not removed:
        return icg, ()
    return icg.without_edges(removed), tuple(removed_order)


def _unique_path(
    icg: IntegratedConceptGraph,
    start: str,
    goal: str,
    kinds: tuple[EdgeKind, ...],
    stats: dict[str, int] | None,
) -> list[ICGEdge] | None:
    """The single ``kinds``-path from start to goal, or None if there are 0 or >=2."""

    def out(x: str) -> list[ICGEdge]:
        return [e for k in kinds for e in icg.outgoing(x, k)]

    counts: dict[str, int] = {goal: 1}
    stack = [start]
    while stack:
        x = stack[-1]
        if x in counts:
            stack.pop()
            continue
        edges = out(x)
        _bump(stats, "path_edge_visits", len(edges))
        pending = [e.parent for e in edges if e.parent not in counts]
        if pending:
            stack.extend(pending)
            continue
        counts[x] = min(2, sum(counts[e.parent] for e in edges))
        stack.pop()
    if counts[start] != 1:
        return None
    path: list[ICGEdge] = []
    x = start
    while x != goal:
        e = next(e for e in out(x) if counts.get(e.parent, 0) == 1)
        path.append(e)
        x = e.parent
    return path


def _reward_allowed(icg: IntegratedConceptGraph, path: list[ICGEdge], kinds: tuple[EdgeKind, ...]) -> bool:
    for e in path[:-1]:
        mid = e.parent
        if icg.node(mid).from_target:
            return False
        if sum(len(icg.outgoing(mid, k)) for k in kinds) != 1:
            return False
    return True


def translate_t_edges(
    icg: IntegratedConceptGraph,
    extended: bool = False,
    stats: dict[str, int] | None = None,
) -> tuple[list[Relationship], set[str], list[str]]:
    """Returns (direct relationships, relevant path edges, rewarded T edges)."""
    kinds = (EdgeKind.S, EdgeKind.ISA) if extended else (EdgeKind.S,)
    relationships: list[Relationship] = []
    marks: set[str] = set()
    rewarded: list[str] = []
    for t in icg.edges_of(EdgeKind.T):
        _bump(stats, "t_edges")
        path = None
        if any(icg.outgoing(t.child, k) for k in kinds):
            path = _unique_path(icg, t.child, t.parent, kinds, stats)
        if path and len(path) > 1 and _reward_allowed(icg, path, kinds):
            marks.update(e.label for e in path)
            rewarded.append(t.label)
        else:
            relationships.append(Relationship(t.child, t.parent, t.label))
    return relationships, marks, rewarded


def translate_s_edges(
    icg: IntegratedConceptGraph,
    marks: set[str],
    extended: bool = False,
    stats: dict[str, int] | None = None,
) -> tuple[set[str], list[Relationship]]:
    """Mark S edges reached by upward walks from source leaves.

    Marking is monotone, so one breadth-first sweep over eligible concepts
    marks exactly the edges the per-path walks would.
    """
    stop_kinds = (EdgeKind.T, EdgeKind.ISA) if extended else (EdgeKind.T,)
    marks = set(marks)

    def eligible(node: str) -> bool:
        if icg.node(node).from_target:
            return False
        return not any(icg.outgoing(node, k) for k in stop_kinds)

    candidates = [
        n.id
        for n in icg.nodes
        if icg.outgoing(n.id, EdgeKind.S) and not icg.incoming(n.id, EdgeKind.S)
    ]
    queue = [c for c in candidates if eligible(c)]
    seen = set(queue)
    while queue:
        x = queue.pop()
        for e in icg.outgoing(x, EdgeKind.S):
            _bump(stats, "walk_edge_visits")
            marks.add(e.label)
            if e.parent not in seen and eligible(e.parent):
                seen.add(e.parent)
                queue.append(e.parent)

    relationships = [
        Relationship(e.child, e.parent, e.label)
        for e in icg.edges_of(EdgeKind.S)
        if e.label in marks
    ]
    return marks, relationships


def _dedupe(relationships: Iterable[Relationship]) -> list[Relationship]:
    seen: set[tuple[str, str]] = set()
    out: list[Relationship] = []
    for r in relationships:
        if (r.child, r.parent) not in seen:
            seen.add((r.child, r.parent))
            out.append(r)
    return out


def retained_nodes(
    icg: IntegratedConceptGraph,
    relationships: Iterable[Relationship],
    extended: bool = False,
) -> set[str]:
    keep = {n.id for n in icg.nodes if n.from_target}
    for r in relationships:
        keep.add(r.child)
        keep.add(r.parent)
    structural = (EdgeKind.S, EdgeKind.T, EdgeKind.ISA) if extended else (EdgeKind.S, EdgeKind.T)
    for n in icg.nodes:
        # a concept without any is-a edge is a whole (one-concept) source taxonomy
        if not any(icg.outgoing(n.id, k) or icg.incoming(n.id, k) for k in structural):
            keep.add(n.id)
    return keep


def top_level_concepts(
    icg: IntegratedConceptGraph,
    relationships: list[Relationship],
    relevance: Mapping[str, bool],
    keep: set[str],
) -> list[str]:
    has_parent = {r.child for r in relationships}
    tlcs: list[str] = []
    for n in icg.nodes:
        if n.id not in keep or n.id in has_parent:
            continue
        cls = classify_tlc(icg, n.id)
        relevant_source = cls.source and any(relevance.get(e.label) for e in icg.incoming(n.id, EdgeKind.S))
        if relevant_source or cls.target:
            tlcs.append(n.id)
    orphans = [n.id for n in icg.nodes if n.id in keep and n.id not in has_parent and n.id not in tlcs]
    return tlcs + orphans


def attach_root(
    icg: IntegratedConceptGraph,
    relationships: list[Relationship],
    relevance: Mapping[str, bool],
    keep: set[str] | None = None,
) -> tuple[str | None, list[Relationship]]:
    """Pick the root: the single top level concept, or a synthetic ``ROOT``."""
    if keep is None:
        keep = retained_nodes(icg, relationships)
    tlcs = top_level_concepts(icg, relationships, relevance, keep)
    if not tlcs:
        if keep:
            raise MergeError("no top level concept in a non-empty merge result")
        return None, []
    if len(tlcs) == 1:
        return tlcs[0], []
    return ROOT_ID, [Relationship(t, ROOT_ID, "root") for t in tlcs]


def _t_path_labels(icg: IntegratedConceptGraph, start: str) -> tuple[str, ...]:
    labels = [icg.node(start).label]
    x, seen = start, {start}
    while True:
        out = icg.outgoing(x, EdgeKind.T)
        if not out or out[0].parent in seen:
            return tuple(labels)
        x = out[0].parent
        seen.add(x)
        labels.append(icg.node(x).label)


def dropped_concepts(icg: IntegratedConceptGraph, keep: set[str]) -> list[DroppedConcept]:
    out = []
    for n in icg.nodes:
        if n.id in keep:
            continue
        covering = tuple(
            _t_path_labels(icg, e.child)
            for e in icg.incoming(n.id, EdgeKind.S)
            if icg.node(e.child).from_target
        )
        out.append(DroppedConcept(n.id, n.label, n.src_concepts, covering))
    return out


def _to_concept(icg: IntegratedConceptGraph, node_id: str) -> MergedConcept:
    n = icg.node(node_id)
    return MergedConcept(
        id=n.id,
        label=n.label,
        attributes=n.attribute_names,
        src_concepts=n.src_concepts,
        tgt_concepts=n.tgt_concepts,
        merged_attributes=n.attributes,
        description=n.description,
    )


def assemble(
    icg: IntegratedConceptGraph,
    relationships: list[Relationship],
    relevance: dict[str, bool],
    removed: tuple[str, ...],
    rewarded: list[str],
    stats: dict[str, int] | None = None,
    extended: bool = False,
) -> MergedTaxonomy:
    relationships = _dedupe(relationships)
    keep = retained_nodes(icg, relationships, extended)
    root, root_edges = attach_root(icg, relationships, relevance, keep)
    concepts: list[Concept] = [_to_concept(icg, n.id) for n in icg.nodes if n.id in keep]
    if root == ROOT_ID:
        concepts.append(MergedConcept(id=ROOT_ID, label=ROOT_LABEL, synthetic=True))
    relationships = relationships + root_edges
    return MergedTaxonomy(
        concepts=tuple(concepts),
        isa_edges=tuple((r.child, r.parent) for r in relationships),
        root=root,
        relationships=tuple(relationships),
        removed_cycle_edges=removed,
        relevance=relevance,
        rewarded_t_edges=tuple(rewarded),
        dropped=tuple(dropped_concepts(icg, keep)),
        stats=dict(stats or {}),
    )


def merge_icg_base(
    icg: IntegratedConceptGraph,
    cycle_overrides: Iterable[tuple[str, str]] = (),
) -> MergedTaxonomy:
    stats: dict[str, int] = {}
    acyclic, removed = remove_cycles(icg, cycle_overrides, stats=stats)
    t_rels, marks, rewarded = translate_t_edges(acyclic, stats=stats)
    marks, s_rels = translate_s_edges(acyclic, marks, stats=stats)
    relevance = {e.label: e.label in marks for e in icg.edges_of(EdgeKind.S)}
    return assemble(acyclic, t_rels + s_rels, relevance, removed, rewarded, stats)


def merge_base(
    source: Taxonomy,
    target: Taxonomy,
    mapping: InputMapping,
    label_mode: LabelMode = LabelMode.CONCAT,
    cycle_overrides: Iterable[tuple[str, str]] = (),
) -> MergedTaxonomy:
    """Base merge driven by the equivalence correspondences only."""
    icg = build_icg(source, target, mapping, label_mode)
    return merge_icg_base(icg, cycle_overrides)


__all__ = [
    "MergeError",
    "MergedConcept",
    "MergedTaxonomy",
    "Relationship",
    "DroppedConcept",
    "TLCClass",
    "classify_tlc",
    "remove_cycles",
    "translate_t_edges",
    "translate_s_edges",
    "attach_root",
    "merge_base",
    "merge_icg_base",
    "ROOT_ID",
]
