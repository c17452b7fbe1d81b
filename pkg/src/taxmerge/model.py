"""Taxonomy data model: concepts, is-a edges, input correspondences.

Edges are stored child -> parent throughout the package, so "outgoing"
always points towards the more general concept.
"""

from __future__ import annotations

import enum
from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Iterable, Mapping

if TYPE_CHECKING:
    from .filters import Filter


class TaxonomyError(ValueError):
    """Raised for structurally invalid taxonomies or mappings."""


class UnknownConceptError(KeyError):
    pass


@dataclass(frozen=True)
class Instance:
    id: str
    values: Mapping[str, str] = field(default_factory=dict)

    def __hash__(self) -> int:
        return hash(self.id)


@dataclass(frozen=True)
class Concept:
    id: str
    label: str
    attributes: tuple[str, ...] = ()
    instances: tuple[Instance, ...] = ()


@dataclass(frozen=True)
class Taxonomy:
    concepts: tuple[Concept, ...]
    isa_edges: tuple[tuple[str, str], ...] = ()

    @classmethod
    def build(
        cls,
        concepts: Iterable[Concept],
        isa_edges: Iterable[tuple[str, str]] = (),
    ) -> "Taxonomy":
        return cls(tuple(concepts), tuple((c, p) for c, p in isa_edges))

    @cached_property
    def index(self) -> dict[str, Concept]:
        return {c.id: c for c in self.concepts}

    @cached_property
    def parents(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = defaultdict(list)
        for child, parent in self.isa_edges:
            out[child].append(parent)
        return out

    @cached_property
    def children(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = defaultdict(list)
        for child, parent in self.isa_edges:
            out[parent].append(child)
        return out

    def __contains__(self, concept_id: object) -> bool:
        return concept_id in self.index

    def __len__(self) -> int:
        return len(self.concepts)

    def concept(self, concept_id: str) -> Concept:
        try:
            return self.index[concept_id]
        except KeyError:
            raise UnknownConceptError(concept_id) from None

    def is_leaf(self, concept_id: str) -> bool:
        return not self.children.get(concept_id)

    def leaves(self) -> list[Concept]:
        return [c for c in self.concepts if not self.children.get(c.id)]

    def roots(self) -> list[Concept]:
        return [c for c in self.concepts if not self.parents.get(c.id)]

    def is_tree(self) -> bool:
        return all(len(ps) <= 1 for ps in self.parents.values())

    @cached_property
    def _root_path_counts(self) -> dict[str, int]:
        # Kahn order from roots downwards; a node's count is the sum over parents.
        pending = {c.id: len(self.parents.get(c.id, ())) for c in self.concepts}
        counts: dict[str, int] = {}
        queue = deque(cid for cid, n in pending.items() if n == 0)
        for cid in queue:
            counts[cid] = 1
        while queue:
            node = queue.popleft()
            for child in self.children.get(node, ()):
                pending[child] -= 1
                if pending[child] == 0:
                    counts[child] = sum(counts[p] for p in self.parents[child])
                    queue.append(child)
        if len(counts) != len(self.concepts):
            raise TaxonomyError("path counts are undefined on a cyclic taxonomy")
        return counts


class CorrespondenceKind(enum.Enum):
    EQ_CONCEPT = "eq-concept"
    EQ_ATTRIBUTE = "eq-attribute"
    ISA = "isa"
    INV_ISA = "inv-isa"


@dataclass(frozen=True)
class Correspondence:
    """A source -> target correspondence.

    For ``EQ_ATTRIBUTE`` the refs are ``(concept_id, attribute)`` pairs,
    otherwise plain concept ids. ``filter`` is only meaningful for
    ``INV_ISA``.
    """

    kind: CorrespondenceKind
    source: str | tuple[str, str]
    target: str | tuple[str, str]
    filter: Filter | None = None
    name: str | None = None

    @property
    def source_concept(self) -> str:
        return self.source[0] if isinstance(self.source, tuple) else self.source

    @property
    def target_concept(self) -> str:
        return self.target[0] if isinstance(self.target, tuple) else self.target


@dataclass(frozen=True)
class InputMapping:
    correspondences: tuple[Correspondence, ...] = ()

    @classmethod
    def build(cls, correspondences: Iterable[Correspondence]) -> "InputMapping":
        return cls(tuple(correspondences))

    def of_kind(self, *kinds: CorrespondenceKind) -> list[Correspondence]:
        return [c for c in self.correspondences if c.kind in kinds]

    @property
    def is_equivalence_only(self) -> bool:
        return not self.of_kind(CorrespondenceKind.ISA, CorrespondenceKind.INV_ISA)

    def without_extensions(self) -> "InputMapping":
        return InputMapping(
            tuple(
                c
                for c in self.correspondences
                if c.kind in (CorrespondenceKind.EQ_CONCEPT, CorrespondenceKind.EQ_ATTRIBUTE)
            )
        )

    def concept_pairs(self) -> set[tuple[str, str]]:
        return {
            (c.source_concept, c.target_concept)
            for c in self.of_kind(CorrespondenceKind.EQ_CONCEPT)
        }


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    message: str
    ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[ValidationIssue, ...] = ()

    def __bool__(self) -> bool:
        return not self.errors

    @property
    def ok(self) -> bool:
        return not self.errors

    def codes(self) -> list[str]:
        return [e.code for e in self.errors]

    def raise_for_errors(self, what: str = "taxonomy") -> None:
        if self.errors:
            lines = "; ".join(f"{e.code}: {e.message}" for e in self.errors)
            raise TaxonomyError(f"invalid {what}: {lines}")


def find_cycle(nodes: Iterable[str], parents: Mapping[str, Iterable[str]]) -> list[str] | None:
    """Return the node sequence of one directed cycle, or None."""
    color: dict[str, int] = {}
    for start in nodes:
        if color.get(start):
            continue
        color[start] = 1
        stack = [(start, iter(parents.get(start, ())))]
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[node] = 2
                stack.pop()
                continue
            state = color.get(nxt, 0)
            if state == 1:
                path = [n for n, _ in stack]
                return path[path.index(nxt):]
            if state == 0:
                color[nxt] = 1
                stack.append((nxt, iter(parents.get(nxt, ()))))
    return None


def validate_taxonomy(tax: Taxonomy) -> ValidationReport:
    errors: list[ValidationIssue] = []

    seen: set[str] = set()
    for c in tax.concepts:
        if c.id in seen:
            errors.append(ValidationIssue("duplicate-concept", f"concept id {c.id!r} repeated", (c.id,)))
        seen.add(c.id)
        if not c.label:
            errors.append(ValidationIssue("empty-label", f"concept {c.id!r} has no label", (c.id,)))

    seen_instances: set[str] = set()
    for c in tax.concepts:
        for inst in c.instances:
            if inst.id in seen_instances:
                errors.append(
                    ValidationIssue("duplicate-instance", f"instance id {inst.id!r} repeated", (inst.id,))
                )
            seen_instances.add(inst.id)

    edge_seen: set[tuple[str, str]] = set()
    for child, parent in tax.isa_edges:
        missing = [x for x in (child, parent) if x not in seen]
        if missing:
            errors.append(
                ValidationIssue("dangling-edge", f"edge {child}->{parent} references unknown concepts", tuple(missing))
            )
        if (child, parent) in edge_seen:
            errors.append(ValidationIssue("duplicate-edge", f"edge {child}->{parent} repeated", (child, parent)))
        edge_seen.add((child, parent))
        if child == parent:
            errors.append(ValidationIssue("cycle", f"self loop on {child}", (child,)))

    proper = {(c, p) for c, p in edge_seen if c != p and c in seen and p in seen}
    parents: dict[str, list[str]] = defaultdict(list)
    for c, p in sorted(proper):
        parents[c].append(p)
    cycle = find_cycle(sorted(seen), parents)
    if cycle:
        errors.append(ValidationIssue("cycle", "is-a cycle through " + " -> ".join(cycle), tuple(sorted(set(cycle)))))

    has_children = {p for _, p in proper}
    for c in tax.concepts:
        if c.instances and c.id in has_children:
            errors.append(
                ValidationIssue("instances-on-inner", f"inner concept {c.id!r} carries instances", (c.id,))
            )
    return ValidationReport(tuple(errors))


def validate_mapping(source: Taxonomy, target: Taxonomy, mapping: InputMapping) -> ValidationReport:
    errors: list[ValidationIssue] = []
    K = CorrespondenceKind

    def check_concept(tax: Taxonomy, ref: str, side: str) -> bool:
        if ref not in tax:
            errors.append(ValidationIssue("dangling-correspondence", f"unknown {side} concept {ref!r}", (ref,)))
            return False
        return True

    src_partner: dict[str, str] = {}
    tgt_partner: dict[str, str] = {}
    seen: set[tuple] = set()
    for corr in mapping.correspondences:
        key = (corr.kind, corr.source, corr.target)
        if key in seen:
            errors.append(
                ValidationIssue("duplicate-correspondence", f"{corr.kind.value} {corr.source}->{corr.target} repeated")
            )
            continue
        seen.add(key)
        if corr.kind is K.EQ_ATTRIBUTE:
            if not (isinstance(corr.source, tuple) and isinstance(corr.target, tuple)):
                errors.append(ValidationIssue("bad-reference", "attribute correspondence needs (concept, attribute) refs"))
                continue
            for tax, (cid, attr), side in ((source, corr.source, "source"), (target, corr.target, "target")):
                if check_concept(tax, cid, side) and attr not in tax.concept(cid).attributes:
                    errors.append(
                        ValidationIssue("dangling-correspondence", f"{side} concept {cid!r} has no attribute {attr!r}", (cid,))
                    )
            continue
        if isinstance(corr.source, tuple) or isinstance(corr.target, tuple):
            errors.append(ValidationIssue("bad-reference", f"{corr.kind.value} correspondence must reference concepts"))
            continue
        ok = check_concept(source, corr.source, "source") & check_concept(target, corr.target, "target")
        if corr.filter is not None and corr.kind is not K.INV_ISA:
            errors.append(ValidationIssue("unexpected-filter", "filters are only allowed on inverse-is-a", (corr.source,)))
        if corr.kind is K.EQ_CONCEPT and ok:
            for partners, a, b in ((src_partner, corr.source, corr.target), (tgt_partner, corr.target, corr.source)):
                if partners.get(a, b) != b:
                    errors.append(
                        ValidationIssue("duplicate-partner", f"{a!r} appears in two equivalence correspondences", (a,))
                    )
                partners[a] = b
        if corr.kind is K.INV_ISA and corr.filter is None:
            errors.append(ValidationIssue("missing-filter", "inverse-is-a correspondences need a filter", (corr.source,)))
        if corr.kind is K.INV_ISA and ok and corr.filter is not None:
            concept = source.concept(corr.source)
            for pred in corr.filter.predicates():
                if pred.concept not in (concept.label, concept.id) or pred.attribute not in concept.attributes:
                    errors.append(
                        ValidationIssue(
                            "bad-filter",
                            f"filter references {pred.concept}.{pred.attribute}, not an attribute of {concept.id!r}",
                            (corr.source,),
                        )
                    )
    for corr in mapping.of_kind(K.ISA, K.INV_ISA):
        if src_partner.get(corr.source) == corr.target:  # type: ignore[arg-type]
            errors.append(
                ValidationIssue(
                    "conflicting-correspondence",
                    f"{corr.source!r} is both equivalent to and {corr.kind.value} {corr.target!r}",
                    (corr.source,),  # type: ignore[arg-type]
                )
            )
    return ValidationReport(tuple(errors))


def is_implied(tax: Taxonomy, a: str, b: str) -> bool:
    """True iff ``b`` is a proper ancestor of ``a``."""
    tax.concept(a)
    tax.concept(b)
    seen = {a}
    stack = list(tax.parents.get(a, ()))
    while stack:
        node = stack.pop()
        if node == b:
            return True
        if node not in seen:
            seen.add(node)
            stack.extend(tax.parents.get(node, ()))
    return False


def count_root_paths(tax: Taxonomy, c: str) -> int:
    """Number of distinct upward paths from ``c`` to a parentless concept."""
    tax.concept(c)
    return tax._root_path_counts[c]
