"""JSON documents for taxonomies, mappings and merge results, plus DOT export."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable

from . import filters
from .graphs import EdgeKind, IntegratedConceptGraph, MatchingGraph
from .mappings import OutputMappings
from .merge_base import MergedConcept, MergedTaxonomy
from .model import (
    Concept,
    Correspondence,
    CorrespondenceKind,
    InputMapping,
    Instance,
    Taxonomy,
    TaxonomyError,
    validate_taxonomy,
)


class DocumentError(TaxonomyError):
    pass


def _read_json(path: str | Path) -> Any:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _write_json(data: Any, path: str | Path) -> None:
    Path(path).write_text(json.dumps(data, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def taxonomy_from_dict(doc: dict) -> Taxonomy:
    if not isinstance(doc, dict) or "concepts" not in doc:
        raise DocumentError("taxonomy document needs a 'concepts' list")
    concepts = []
    for raw in doc["concepts"]:
        try:
            cid = raw["id"]
        except (KeyError, TypeError):
            raise DocumentError(f"concept entry without id: {raw!r}") from None
        if not isinstance(cid, str):
            raise DocumentError(f"concept id {cid!r} is not a string")
        instances = tuple(
            Instance(str(i["id"]), {str(k): str(v) for k, v in i.get("values", {}).items()})
            for i in raw.get("instances", ())
        )
        concepts.append(Concept(cid, raw.get("label", cid), tuple(raw.get("attributes", ())), instances))
    edges = []
    for pair in doc.get("isa", ()):
        if not (isinstance(pair, list) and len(pair) == 2):
            raise DocumentError(f"is-a entry must be [child, parent], got {pair!r}")
        edges.append((str(pair[0]), str(pair[1])))
    return Taxonomy.build(concepts, edges)


def taxonomy_to_dict(tax: Taxonomy) -> dict:
    concepts = []
    for c in tax.concepts:
        entry: dict[str, Any] = {"id": c.id, "label": c.label, "attributes": list(c.attributes)}
        if c.instances:
            entry["instances"] = [{"id": i.id, "values": dict(i.values)} for i in c.instances]
        if isinstance(c, MergedConcept):
            entry["source_concepts"] = list(c.src_concepts)
            entry["target_concepts"] = list(c.tgt_concepts)
            if c.description:
                entry["description"] = c.description
            if c.filter is not None:
                entry["filter"] = filters.render(c.filter)
            if c.synthetic:
                entry["synthetic"] = True
        concepts.append(entry)
    doc: dict[str, Any] = {"concepts": concepts, "isa": [[c, p] for c, p in tax.isa_edges]}
    if isinstance(tax, MergedTaxonomy):
        doc["root"] = tax.root
    return doc


def load_taxonomy(path: str | Path, validate: bool = True) -> Taxonomy:
    tax = taxonomy_from_dict(_read_json(path))
    if validate:
        report = validate_taxonomy(tax)
        if not report.ok:
            raise DocumentError(f"{path}: " + "; ".join(f"{e.code}: {e.message}" for e in report.errors))
    return tax


def save_taxonomy(tax: Taxonomy, path: str | Path) -> None:
    _write_json(taxonomy_to_dict(tax), path)


def _ref(value: Any, kind: CorrespondenceKind) -> str | tuple[str, str]:
    if kind is CorrespondenceKind.EQ_ATTRIBUTE:
        if not (isinstance(value, (list, tuple)) and len(value) == 2):
            raise DocumentError(f"attribute correspondence needs [concept, attribute], got {value!r}")
        return (str(value[0]), str(value[1]))
    if not isinstance(value, str):
        raise DocumentError(f"{kind.value} correspondence needs a concept id, got {value!r}")
    return value


def mapping_from_list(doc: list) -> InputMapping:
    if not isinstance(doc, list):
        raise DocumentError("mapping document must be a list")
    out = []
    for raw in doc:
        try:
            kind = CorrespondenceKind(raw["kind"])
        except (KeyError, ValueError, TypeError):
            raise DocumentError(f"bad correspondence kind in {raw!r}") from None
        flt = raw.get("filter")
        out.append(
            Correspondence(
                kind,
                _ref(raw.get("source"), kind),
                _ref(raw.get("target"), kind),
                filters.parse(flt) if flt else None,
                raw.get("name"),
            )
        )
    return InputMapping.build(out)


def mapping_to_list(mapping: InputMapping) -> list:
    out = []
    for c in mapping.correspondences:
        entry: dict[str, Any] = {
            "kind": c.kind.value,
            "source": list(c.source) if isinstance(c.source, tuple) else c.source,
            "target": list(c.target) if isinstance(c.target, tuple) else c.target,
        }
        if c.filter is not None:
            entry["filter"] = filters.render(c.filter)
        if c.name:
            entry["name"] = c.name
        out.append(entry)
    return out


def load_mapping(path: str | Path) -> InputMapping:
    try:
        return mapping_from_list(_read_json(path))
    except filters.FilterSyntaxError as exc:
        raise DocumentError(f"{path}: {exc}") from None


def save_mapping(mapping: InputMapping, path: str | Path) -> None:
    _write_json(mapping_to_list(mapping), path)


def output_mappings_to_dict(m: OutputMappings) -> dict:
    def side(corrs):
        rows = []
        for c in corrs:
            row: dict[str, Any] = {"from": c.concept, "to": c.node}
            if c.attribute is not None:
                row["from"] = [c.concept, c.attribute]
                row["to"] = [c.node, c.node_attribute]
            if c.filter is not None:
                row["filter"] = filters.render(c.filter)
            rows.append(row)
        return rows

    return {"m_s": side(m.m_s), "m_t": side(m.m_t)}


def merge_report(merged: MergedTaxonomy) -> dict:
    return {
        "root": merged.root,
        "removed_cycle_edges": list(merged.removed_cycle_edges),
        "relevant_s_edges": sorted(merged.relevant_s_edges(), key=_edge_sort_key),
        "rewarded_t_edges": list(merged.rewarded_t_edges),
        "dropped": [
            {"node": d.node, "label": d.label, "source_concepts": list(d.src_concepts),
             "covering_paths": [list(p) for p in d.covering_paths]}
            for d in merged.dropped
        ],
    }


def _edge_sort_key(label: str) -> tuple[str, int]:
    head = label.rstrip("0123456789")
    tail = label[len(head):]
    return (head, int(tail) if tail else -1)


def labelled_structure(tax: Taxonomy) -> dict:
    """Label-level view used for fixture comparison: sorted labels and edges."""
    index = tax.index
    return {
        "concepts": sorted(c.label for c in tax.concepts),
        "edges": sorted([index[c].label, index[p].label] for c, p in tax.isa_edges),
    }


# DOT ----------------------------------------------------------------------

_EDGE_STYLE = {
    EdgeKind.S: 'color="blue"',
    EdgeKind.T: 'color="black"',
    EdgeKind.ISA: 'color="darkgreen", style="dashed"',
    EdgeKind.INVISA: 'color="red", style="dotted"',
}


def _q(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _dot(name: str, node_lines: Iterable[str], edge_lines: Iterable[str]) -> str:
    body = "\n".join(f"  {line}" for line in [*node_lines, *edge_lines])
    return f"digraph {_q(name)} {{\n  rankdir=BT;\n{body}\n}}\n"


def matching_graph_dot(mg: MatchingGraph) -> str:
    nodes = []
    for origin, cid in mg.nodes:
        tax = mg.source if origin == "S" else mg.target
        nodes.append(f"{_q(origin + ':' + cid)} [label={_q(tax.concept(cid).label)}];")
    edges = [f"{_q('S:' + c)} -> {_q('S:' + p)} [color=\"blue\"];" for c, p in mg.source.isa_edges]
    edges += [f"{_q('T:' + c)} -> {_q('T:' + p)};" for c, p in mg.target.isa_edges]
    edges += [
        f"{_q(a[0] + ':' + a[1])} -> {_q(b[0] + ':' + b[1])} [dir=none, penwidth=3];"
        for a, b in mg.match_edges
    ]
    return _dot("matching", nodes, edges)


def icg_dot(icg: IntegratedConceptGraph, relevance: dict[str, bool] | None = None) -> str:
    nodes = []
    for n in icg.nodes:
        fill = "white" if n.is_merged else ("gray30" if n.from_target else "gray80")
        font = ', fontcolor="white"' if fill == "gray30" else ""
        nodes.append(f"{_q(n.id)} [label={_q(n.label)}, style=filled, fillcolor={_q(fill)}{font}];")
    edges = []
    for e in icg.edges:
        style = _EDGE_STYLE[e.kind]
        if e.kind is EdgeKind.S and relevance is not None and not relevance.get(e.label):
            style += ', style="dashed"'
        edges.append(f"{_q(e.child)} -> {_q(e.parent)} [label={_q(e.label)}, {style}];")
    return _dot("icg", nodes, edges)


def taxonomy_dot(tax: Taxonomy, name: str = "taxonomy") -> str:
    nodes = [f"{_q(c.id)} [label={_q(c.label)}];" for c in tax.concepts]
    edges = [f"{_q(c)} -> {_q(p)};" for c, p in tax.isa_edges]
    return _dot(name, nodes, edges)
