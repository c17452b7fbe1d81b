"""Filter conditions attached to inverse-is-a correspondences.

Grammar, in the bracket notation used by mapping documents::

    filter := '[' expr ']'
    expr   := term ('AND' term)*
    term   := 'NOT' term | '(' expr ')' | pred
    pred   := Concept.attr ('=' | '≠' | '!=') 'literal'

``≠`` is the exact negation of ``=``: an instance lacking the attribute
fails ``=`` and satisfies ``≠``. That keeps the complement filter of a
split concept a true partition of its instances.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Union


class FilterSyntaxError(ValueError):
    pass


class _Node:
    def render(self) -> str:
        raise NotImplementedError

    def predicates(self) -> Iterator["Predicate"]:
        return _predicates(self)  # type: ignore[arg-type]

    def __str__(self) -> str:
        return f"[{self.render()}]"


@dataclass(frozen=True)
class Predicate(_Node):
    concept: str
    attribute: str
    literal: str
    negated: bool = False

    def render(self) -> str:
        lit = "'" + self.literal.replace("\\", "\\\\").replace("'", "\\'") + "'"
        if self.negated:
            return f"{self.concept}.{self.attribute} ≠ {lit}"
        return f"{self.concept}.{self.attribute}={lit}"


@dataclass(frozen=True)
class And(_Node):
    terms: tuple["Filter", ...]

    def render(self) -> str:
        return " AND ".join(_render_operand(t) for t in self.terms)


@dataclass(frozen=True)
class Not(_Node):
    term: "Filter"

    def render(self) -> str:
        return "NOT " + _render_operand(self.term)


Filter = Union[Predicate, And, Not]


def _render_operand(f: Filter) -> str:
    return f"({f.render()})" if isinstance(f, And) else f.render()


def _predicates(f: Filter) -> Iterator[Predicate]:
    if isinstance(f, Predicate):
        yield f
    elif isinstance(f, Not):
        yield from _predicates(f.term)
    else:
        for t in f.terms:
            yield from _predicates(t)


def render(f: Filter) -> str:
    return f"[{f.render()}]"


def evaluate(f: Filter, values: Mapping[str, str]) -> bool:
    if isinstance(f, Predicate):
        hit = values.get(f.attribute) == f.literal
        return not hit if f.negated else hit
    if isinstance(f, Not):
        return not evaluate(f.term, values)
    return all(evaluate(t, values) for t in f.terms)


def negate(f: Filter) -> Filter:
    if isinstance(f, Predicate):
        return Predicate(f.concept, f.attribute, f.literal, not f.negated)
    if isinstance(f, Not):
        return f.term
    return Not(f)


def conjoin(filters: list[Filter]) -> Filter:
    flat: list[Filter] = []
    for f in filters:
        flat.extend(f.terms if isinstance(f, And) else (f,))
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def complement(filters: list[Filter]) -> Filter:
    """Filter matching exactly the instances none of ``filters`` match."""
    if not filters:
        raise ValueError("complement of an empty filter set is undefined")
    return conjoin([negate(f) for f in filters])


_TOKEN = re.compile(
    r"""\s*(?:
        (?P<lparen>\() |
        (?P<rparen>\)) |
        (?P<and>AND\b) |
        (?P<not>NOT\b) |
        (?P<pred>(?P<path>[^()'=≠!]+?)\s*(?P<op>=|≠|!=)\s*'(?P<lit>(?:[^'\\]|\\.)*)')
    )""",
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, object]]:
    tokens: list[tuple[str, object]] = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FilterSyntaxError(f"unexpected input at offset {pos}: {text[pos:pos + 20]!r}")
        pos = m.end()
        kind = m.lastgroup if m.lastgroup != "lit" else "pred"
        if m.group("pred"):
            path = m.group("path").strip()
            if "." not in path:
                raise FilterSyntaxError(f"predicate {path!r} must be written Concept.attribute")
            concept, attribute = path.rsplit(".", 1)
            literal = re.sub(r"\\(.)", r"\1", m.group("lit"))
            tokens.append(("pred", Predicate(concept.strip(), attribute.strip(), literal, m.group("op") != "=")))
        else:
            tokens.append((kind, None))
    return tokens


def parse(text: str) -> Filter:
    body = text.strip()
    if body.startswith("[") and body.endswith("]"):
        body = body[1:-1]
    tokens = _tokenize(body)
    pos = 0

    def peek() -> str | None:
        return tokens[pos][0] if pos < len(tokens) else None

    def expr() -> Filter:
        nonlocal pos
        terms = [term()]
        while peek() == "and":
            pos += 1
            terms.append(term())
        return conjoin(terms)

    def term() -> Filter:
        nonlocal pos
        kind = peek()
        if kind == "not":
            pos += 1
            return Not(term())
        if kind == "lparen":
            pos += 1
            inner = expr()
            if peek() != "rparen":
                raise FilterSyntaxError("unbalanced parenthesis")
            pos += 1
            return inner
        if kind == "pred":
            pos += 1
            return tokens[pos - 1][1]  # type: ignore[return-value]
        raise FilterSyntaxError(f"expected a predicate, got {kind or 'end of input'}")

    if not tokens:
        raise FilterSyntaxError("empty filter")
    result = expr()
    if pos != len(tokens):
        raise FilterSyntaxError(f"trailing tokens after position {pos}")
    return result
