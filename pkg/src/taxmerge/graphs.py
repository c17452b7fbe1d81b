"""Preliminary phase: matching graph and integrated concept graph (ICG)."""

from __future__ import annotations

import enum
from collections import Counter, defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from .filters import Filter
from .model import (
    CorrespondenceKind,
    InputMapping,
    Taxonomy,
    TaxonomyError,
    validate_mapping,
)

SOURCE = "S"
TARGET = "T"


class LabelMode(enum.Enum):
    CONCAT = "concat"
    TARGET_PREFERRED = "target-preferred"


class EdgeKind(enum.Enum):
    S = "S"
    T = "T"
    ISA = "ISA"
    INVISA = "INVISA"


@dataclass(frozen=True)
class MatchingGraph:
    """Both concept graphs plus undirected match edges.

    Nodes are ``(origin, concept_id)`` with origin ``"S"`` or ``"T"``.
    """

    nodes: tuple[tuple[str, str], ...]
    match_edges: tuple[tuple[tuple[str, str], tuple[str, str]], ...]
    source: Taxonomy
    target: Taxonomy

    def components(self) -> list[tuple[tuple[str, str], ...]]:
        parent = {n: n for n in self.nodes}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in self.match_edges:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[rb] = ra
        groups: dict[tuple[str, str], list[tuple[str, str]]] = defaultdict(list)
        for n in self.nodes:
            groups[find(n)].append(n)
        return [tuple(g) for g in groups.values()]


def build_matching_graph(source: Taxonomy, target: Taxonomy, mapping: InputMapping) -> MatchingGraph:
    report = validate_mapping(source, target, mapping)
    report.raise_for_errors("mapping")

    nodes = tuple([(SOURCE, c.id) for c in source.concepts] + [(TARGET, c.id) for c in target.concepts])
    edges: list[tuple[tuple[str, str], tuple[str, str]]] = []
    present: set[tuple[str, str]] = set()
    for corr in mapping.of_kind(CorrespondenceKind.EQ_CONCEPT, CorrespondenceKind.EQ_ATTRIBUTE):
        key = (corr.source_concept, corr.target_concept)
        if key not in present:
            present.add(key)
            edges.append(((SOURCE, key[0]), (TARGET, key[1])))
    return MatchingGraph(nodes, tuple(edges), source, target)


def gen_label(labels: Iterable[str]) -> str:
    """Concatenate distinct labels with ``_``; repeated ones get a ``*``.

    >>> gen_label(["Computer", "PC", "PC"])
    'Computer_PC*'
    """
    labels = list(labels)
    if not labels:
        raise ValueError("gen_label needs at least one label")
    counts = Counter(labels)
    distinct = list(dict.fromkeys(labels))
    return "_".join(lab + "*" if counts[lab] > 1 else lab for lab in distinct)


def _pick_label(labels: list[str], mode: LabelMode) -> tuple[str, str | None]:
    if mode is LabelMode.CONCAT:
        return gen_label(labels), None
    rest = [lab for lab in dict.fromkeys(labels[1:]) if lab != labels[0]]
    return labels[0], ("; ".join(rest) or None)


@dataclass(frozen=True)
class MergedAttribute:
    name: str
    source: str | None = None
    target: str | None = None


def gen_attribute_list(
    component: Iterable[tuple[str, str]],
    source: Taxonomy,
    target: Taxonomy,
    attribute_pairs: Iterable[tuple[tuple[str, str], tuple[str, str]]],
    mode: LabelMode = LabelMode.CONCAT,
) -> tuple[MergedAttribute, ...]:
    """Merged attribute list for one matching-graph component.

    Target attributes come first, corresponded source attributes fold into
    their target partner, the rest of the source attributes follow.
    """
    members = list(component)
    tgt_ids = [cid for origin, cid in members if origin == TARGET]
    src_ids = [cid for origin, cid in members if origin == SOURCE]
    src_set, tgt_set = set(src_ids), set(tgt_ids)
    partner: dict[tuple[str, str], tuple[str, str]] = {}
    for s_ref, t_ref in attribute_pairs:
        if s_ref[0] in src_set and t_ref[0] in tgt_set:
            partner.setdefault(t_ref, s_ref)

    out: list[MergedAttribute] = []
    used_src: set[tuple[str, str]] = set()
    for tid in tgt_ids:
        for attr in target.concept(tid).attributes:
            s_ref = partner.get((tid, attr))
            if s_ref is None:
                out.append(MergedAttribute(attr, target=attr))
                continue
            used_src.add(s_ref)
            name, _ = _pick_label([attr, s_ref[1]], mode)
            out.append(MergedAttribute(name, source=s_ref[1], target=attr))
    for sid in src_ids:
        for attr in source.concept(sid).attributes:
            if (sid, attr) not in used_src:
                out.append(MergedAttribute(attr, source=attr))
    return tuple(out)


@dataclass(frozen=True)
class IntegratedNode:
    id: str
    label: str
    attributes: tuple[MergedAttribute, ...] = ()
    src_concepts: tuple[str, ...] = ()
    tgt_concepts: tuple[str, ...] = ()
    description: str | None = None

    @property
    def from_target(self) -> bool:
        return bool(self.tgt_concepts)

    @property
    def is_merged(self) -> bool:
        return bool(self.src_concepts) and bool(self.tgt_concepts)

    @property
    def attribute_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)


@dataclass(frozen=True)
class ICGEdge:
    label: str
    child: str
    parent: str
    kind: EdgeKind
    filter: Filter | None = None


@dataclass(frozen=True)
class IntegratedConceptGraph:
    nodes: tuple[IntegratedNode, ...]
    edges: tuple[ICGEdge, ...]

    @cached_property
    def node_index(self) -> dict[str, IntegratedNode]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def edge_index(self) -> dict[str, ICGEdge]:
        return {e.label: e for e in self.edges}

    @cached_property
    def out_edges(self) -> dict[str, dict[EdgeKind, list[ICGEdge]]]:
        out: dict[str, dict[EdgeKind, list[ICGEdge]]] = defaultdict(lambda: defaultdict(list))
        for e in self.edges:
            out[e.child][e.kind].append(e)
        return out

    @cached_property
    def in_edges(self) -> dict[str, dict[EdgeKind, list[ICGEdge]]]:
        out: dict[str, dict[EdgeKind, list[ICGEdge]]] = defaultdict(lambda: defaultdict(list))
        for e in self.edges:
            out[e.parent][e.kind].append(e)
        return out

    @cached_property
    def source_node(self) -> dict[str, str]:
        return {sid: n.id for n in self.nodes for sid in n.src_concepts}

    @cached_property
    def target_node(self) -> dict[str, str]:
        return {tid: n.id for n in self.nodes for tid in n.tgt_concepts}

    def node(self, node_id: str) -> IntegratedNode:
        try:
            return self.node_index[node_id]
        except KeyError:
            raise KeyError(f"unknown ICG node {node_id!r}") from None

    def outgoing(self, node_id: str, kind: EdgeKind) -> list[ICGEdge]:
        kinds = self.out_edges.get(node_id)
        return kinds.get(kind, []) if kinds else []

    def incoming(self, node_id: str, kind: EdgeKind) -> list[ICGEdge]:
        kinds = self.in_edges.get(node_id)
        return kinds.get(kind, []) if kinds else []

    def edges_of(self, kind: EdgeKind) -> list[ICGEdge]:
        return [e for e in self.edges if e.kind is kind]

    def without_edges(self, labels: Iterable[str]) -> "IntegratedConceptGraph":
        drop = set(labels)
        return IntegratedConceptGraph(self.nodes, tuple(e for e in self.edges if e.label not in drop))


def node_id_for(origin: str, concept_id: str) -> str:
    return ("t:" if origin == TARGET else "s:") + concept_id


def build_icg(
    source: Taxonomy,
    target: Taxonomy,
    mapping: InputMapping,
    label_mode: LabelMode = LabelMode.CONCAT,
) -> IntegratedConceptGraph:
    """One node per matching-graph component, one kind-tagged edge per relationship.

    Node ids are ``t:<target id>`` for anything carrying a target concept and
    ``s:<source id>`` otherwise. S/T edges are labelled ``S1..``/``T1..`` in
    is-a declaration order; is-a and inverse-is-a correspondences become
    ``isa1..``/``c1..`` unless the correspondence carries a name.
    """
    mg = build_matching_graph(source, target, mapping)
    pairs_by_target: dict[str, list] = {}
    for c in mapping.of_kind(CorrespondenceKind.EQ_ATTRIBUTE):
        pairs_by_target.setdefault(c.target[0], []).append((c.source, c.target))

    nodes: list[IntegratedNode] = []
    where: dict[tuple[str, str], str] = {}
    for comp in mg.components():
        tgt = [cid for origin, cid in comp if origin == TARGET]
        src = [cid for origin, cid in comp if origin == SOURCE]
        if len(tgt) > 1 or len(src) > 1:
            raise TaxonomyError(f"m:n correspondences are not supported (component {sorted(comp)})")
        labels = [target.concept(t).label for t in tgt] + [source.concept(s).label for s in src]
        label, description = _pick_label(labels, label_mode)
        node_id = node_id_for(TARGET, tgt[0]) if tgt else node_id_for(SOURCE, src[0])
        nodes.append(
            IntegratedNode(
                node_id,
                label,
                gen_attribute_list(
                    comp, source, target, [p for t in tgt for p in pairs_by_target.get(t, ())], label_mode
                ),
                tuple(src),
                tuple(tgt),
                description,
            )
        )
        for member in comp:
            where[member] = node_id

    # target-provenant nodes first, each group in declaration order
    order = {node_id_for(TARGET, c.id): i for i, c in enumerate(target.concepts)}
    offset = len(order)
    for i, c in enumerate(source.concepts):
        order.setdefault(where[(SOURCE, c.id)], offset + i)
    nodes.sort(key=lambda n: order[n.id])

    edges: list[ICGEdge] = []
    for i, (child, parent) in enumerate(source.isa_edges, 1):
        edges.append(ICGEdge(f"S{i}", where[(SOURCE, child)], where[(SOURCE, parent)], EdgeKind.S))
    for i, (child, parent) in enumerate(target.isa_edges, 1):
        edges.append(ICGEdge(f"T{i}", where[(TARGET, child)], where[(TARGET, parent)], EdgeKind.T))
    for i, corr in enumerate(mapping.of_kind(CorrespondenceKind.ISA), 1):
        edges.append(
            ICGEdge(
                corr.name or f"isa{i}",
                where[(SOURCE, corr.source_concept)],
                where[(TARGET, corr.target_concept)],
                EdgeKind.ISA,
            )
        )
    for i, corr in enumerate(mapping.of_kind(CorrespondenceKind.INV_ISA), 1):
        edges.append(
            ICGEdge(
                corr.name or f"c{i}",
                where[(SOURCE, corr.source_concept)],
                where[(TARGET, corr.target_concept)],
                EdgeKind.INVISA,
                corr.filter,
            )
        )
    labels = [e.label for e in edges]
    if len(set(labels)) != len(labels):
        dup = sorted(lab for lab, n in Counter(labels).items() if n > 1)
        raise TaxonomyError(f"duplicate edge labels {dup}; rename the correspondences")
    return IntegratedConceptGraph(tuple(nodes), tuple(edges))
