"""Triple projection of a description model and a small graph-pattern query engine.

Every instance contributes a type triple, one triple per relation assertion,
one per scalar assertion, and a description triple. ``select`` evaluates a
conjunctive pattern set by nested-loop join, left to right, returning rows
sorted by their rendered text so output order is reproducible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import DescriptionModel
from .vocab import BASE_PREFIX, VOCAB_PREFIX, QualifiedName, Vocabulary

RDF_TYPE = QualifiedName("rdf", "type")
DESC_PREDICATE = QualifiedName(BASE_PREFIX, "desc")


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return f"?{self.name}"


Term = QualifiedName | Variable | bool | int | float | str
GroundTerm = QualifiedName | bool | int | float | str


@dataclass(frozen=True)
class Triple:
    subject: QualifiedName
    predicate: QualifiedName
    object: GroundTerm


@dataclass(frozen=True)
class TriplePattern:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self) -> None:
        if not isinstance(self.subject, (QualifiedName, Variable)):
            raise ValueError("a pattern subject must be a name or a variable")
        if not isinstance(self.predicate, (QualifiedName, Variable)):
            raise ValueError("a pattern predicate must be a name or a variable")


@dataclass(frozen=True)
class Query:
    select_vars: tuple[str, ...]
    patterns: tuple[TriplePattern, ...]
    distinct: bool = False

    def __post_init__(self) -> None:
        mentioned: set[str] = set()
        for pat in self.patterns:
            for term in (pat.subject, pat.predicate, pat.object):
                if isinstance(term, Variable):
                    mentioned.add(term.name)
        for var in self.select_vars:
            if var not in mentioned:
                raise ValueError(f"selected variable ?{var} never occurs in a pattern")


def term_key(term: GroundTerm) -> tuple:
    """A sort/equality key that keeps booleans, numbers, strings, and names apart."""
    if isinstance(term, QualifiedName):
        return ("iri", term.prefix, term.local)
    if isinstance(term, bool):
        return ("boolean", term)
    if isinstance(term, (int, float)):
        return ("number", float(term), isinstance(term, float))
    return ("string", term)


def render_term(term: GroundTerm) -> str:
    if isinstance(term, QualifiedName):
        return str(term)
    if isinstance(term, bool):
        return "true" if term else "false"
    if isinstance(term, (int, float)):
        return repr(term) if isinstance(term, float) else str(term)
    return term


def display_term(term: GroundTerm, model_name: str) -> str:
    """Like :func:`render_term`, but model-local ids show as bare locals."""
    if isinstance(term, QualifiedName) and term.prefix == model_name:
        return term.local
    return render_term(term)


def _matches(term: GroundTerm, value: GroundTerm) -> bool:
    return term_key(term) == term_key(value)


def select(query: Query, triples: list[Triple] | tuple[Triple, ...]) -> list[tuple]:
    """Evaluate *query* over *triples*; rows hold ground terms per select var.

    Results are projections of the distinct total variable assignments that
    satisfy every pattern — repeated matching triples never multiply rows,
    though distinct assignments may still project onto equal rows unless the
    query asks for ``distinct``. A query with no patterns yields exactly one
    empty row.
    """
    bindings: list[dict[str, GroundTerm]] = [{}]
    for pat in query.patterns:
        next_bindings: list[dict[str, GroundTerm]] = []
        for binding in bindings:
            for triple in triples:
                attempt = dict(binding)
                if _bind(attempt, pat.subject, triple.subject) and _bind(
                    attempt, pat.predicate, triple.predicate
                ) and _bind(attempt, pat.object, triple.object):
                    next_bindings.append(attempt)
        bindings = next_bindings
        if not bindings:
            break

    all_vars = sorted({v for b in bindings for v in b})
    seen_assignments: set[tuple] = set()
    assignments: list[dict[str, GroundTerm]] = []
    for binding in bindings:
        key = tuple(term_key(binding[v]) for v in all_vars)
        if key not in seen_assignments:
            seen_assignments.add(key)
            assignments.append(binding)

    out = [tuple(b[var] for var in query.select_vars) for b in assignments]
    if query.distinct:
        seen_rows: set[tuple] = set()
        deduped: list[tuple] = []
        for row in out:
            key = tuple(term_key(t) for t in row)
            if key not in seen_rows:
                seen_rows.add(key)
                deduped.append(row)
        out = deduped
    out.sort(
        key=lambda row: (
            tuple(render_term(t) for t in row),
            tuple(term_key(t) for t in row),
        )
    )
    return out


def _bind(binding: dict[str, GroundTerm], term: Term, value: GroundTerm) -> bool:
    if isinstance(term, Variable):
        if term.name in binding:
            return _matches(binding[term.name], value)
        binding[term.name] = value
        return True
    return _matches(term, value)


def to_triples(model: DescriptionModel, vocab: Vocabulary) -> list[Triple]:
    """Project *model* to triples, in declaration order per instance."""
    triples: list[Triple] = []
    for inst in model.instances:
        triples.append(Triple(inst.id, RDF_TYPE, inst.kind))
        for rel_assert in inst.relations:
            rel = vocab.relation_for(rel_assert.name)
            prefix = rel.name.prefix if rel is not None else VOCAB_PREFIX
            triples.append(
                Triple(
                    inst.id,
                    QualifiedName(prefix, rel_assert.name),
                    rel_assert.target,
                )
            )
        for scalar in inst.scalars:
            prop = vocab.scalar_prop(scalar.name)
            prefix = prop.name.prefix if prop is not None else VOCAB_PREFIX
            triples.append(
                Triple(inst.id, QualifiedName(prefix, scalar.name), scalar.value)
            )
        if inst.desc is not None:
            triples.append(Triple(inst.id, DESC_PREDICATE, inst.desc))
    return triples


class TripleStore:
    """Query access over one model's triples, plus common navigation shortcuts."""

    def __init__(self, model: DescriptionModel, vocab: Vocabulary) -> None:
        self.model = model
        self.vocab = vocab
        self.triples: tuple[Triple, ...] = tuple(to_triples(model, vocab))

    def select(self, query: Query) -> list[tuple]:
        return select(query, self.triples)

    def _locals_where(self, query: Query) -> list[str]:
        return [row[0].local for row in self.select(query) if isinstance(row[0], QualifiedName)]

    def services(self) -> list[str]:
        """Ids of all instances whose kind specializes Service, sorted."""
        service = QualifiedName(VOCAB_PREFIX, "Service")
        out = {
            inst.local_id
            for inst in self.model.instances
            if self.vocab.specializes(inst.kind, service)
        }
        return sorted(out)

    def enablers_of(self, service_id: str) -> list[str]:
        """Ids asserted to enable *service_id*, sorted and deduplicated."""
        target = QualifiedName(self.model.name, service_id)
        query = Query(
            ("e",),
            (
                TriplePattern(
                    Variable("e"), QualifiedName(VOCAB_PREFIX, "enables"), target
                ),
            ),
            distinct=True,
        )
        return self._locals_where(query)

    def inputs_of(self, enabler_id: str) -> list[str]:
        target = QualifiedName(self.model.name, enabler_id)
        query = Query(
            ("i",),
            (
                TriplePattern(
                    Variable("i"), QualifiedName(VOCAB_PREFIX, "inputTo"), target
                ),
            ),
            distinct=True,
        )
        return self._locals_where(query)

    def data_links(self) -> list[tuple[str, str]]:
        """(source, data) pairs for every transmitted-data assertion, sorted."""
        query = Query(
            ("s", "d"),
            (
                TriplePattern(
                    Variable("s"), QualifiedName(VOCAB_PREFIX, "asData"), Variable("d")
                ),
            ),
            distinct=True,
        )
        out = []
        for src, dst in self.select(query):
            if isinstance(src, QualifiedName) and isinstance(dst, QualifiedName):
                out.append((src.local, dst.local))
        return out


def model_resolver(model_name: str, vocab: Vocabulary):
    """Resolver for bare names in query text, in vocabulary-then-model order.

    A bare name is tried as a relation forward name, then a scalar property,
    then a concept local; anything else is read as an instance id in the
    model's namespace.
    """

    def resolve(name: str) -> QualifiedName:
        rel = vocab.relation_for(name)
        if rel is not None:
            return QualifiedName(rel.name.prefix, name)
        prop = vocab.scalar_prop(name)
        if prop is not None:
            return prop.name
        for concept in vocab.concepts:
            if concept.name.local == name:
                return concept.name
        return QualifiedName(model_name, name)

    return resolve


class QueryParseError(ValueError):
    """Query text does not follow the SELECT/WHERE shape."""


_QUERY_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<iri><[^<>\s]+>)
  | (?P<number>-?[0-9]+(?:\.[0-9]+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*(?::[A-Za-z_][A-Za-z0-9_]*)?)
  | (?P<lbrace>\{)
  | (?P<rbrace>\})
  | (?P<dot>\.)
  | (?P<bad>.)
    """,
    re.VERBOSE,
)


def parse_query(text: str, resolver=None) -> Query:
    """Parse ``SELECT [DISTINCT] ?v ... WHERE { s p o . ... }``.

    Bare names go through *resolver* (a ``str -> QualifiedName`` callable)
    when given; ``a`` is shorthand for the type predicate. Raises
    :class:`QueryParseError` on malformed text.
    """
    tokens: list[tuple[str, str]] = []
    for match in _QUERY_TOKEN_RE.finditer(text):
        kind = match.lastgroup or "bad"
        if kind == "ws":
            continue
        if kind == "bad":
            raise QueryParseError(f"unexpected character {match.group()!r} in query")
        tokens.append((kind, match.group()))
    pos = 0

    def peek() -> tuple[str, str]:
        return tokens[pos] if pos < len(tokens) else ("eof", "")

    def advance() -> tuple[str, str]:
        nonlocal pos
        tok = peek()
        pos += 1 if pos < len(tokens) else 0
        return tok

    kind, text_ = peek()
    if kind != "name" or text_.upper() != "SELECT":
        raise QueryParseError("query must start with SELECT")
    advance()

    distinct = False
    kind, text_ = peek()
    if kind == "name" and text_.upper() == "DISTINCT":
        distinct = True
        advance()

    select_vars: list[str] = []
    while peek()[0] == "var":
        select_vars.append(advance()[1][1:])
    if not select_vars:
        raise QueryParseError("SELECT needs at least one ?variable")

    kind, text_ = peek()
    if kind != "name" or text_.upper() != "WHERE":
        raise QueryParseError("expected WHERE after the selected variables")
    advance()
    if advance()[0] != "lbrace":
        raise QueryParseError("expected '{' after WHERE")

    def parse_term(position: str) -> Term:
        kind, text_ = advance()
        if kind == "var":
            return Variable(text_[1:])
        if kind == "string":
            body = text_[1:-1]
            return re.sub(r"\\(.)", lambda m: {"n": "\n", "t": "\t", "r": "\r"}.get(m.group(1), m.group(1)), body)
        if kind == "number":
            return float(text_) if "." in text_ else int(text_)
        if kind == "iri":
            inner = text_[1:-1]
            try:
                return QualifiedName.parse(inner, default_prefix=VOCAB_PREFIX)
            except ValueError as exc:
                raise QueryParseError(f"invalid name {inner!r}") from exc
        if kind == "name":
            if text_ == "a" and position == "predicate":
                return RDF_TYPE
            if text_ in ("true", "false"):
                return text_ == "true"
            if ":" in text_:
                try:
                    return QualifiedName.parse(text_)
                except ValueError as exc:
                    raise QueryParseError(f"invalid name {text_!r}") from exc
            if resolver is not None:
                return resolver(text_)
            return QualifiedName(VOCAB_PREFIX, text_)
        raise QueryParseError(f"expected a term in the {position} position")

    patterns: list[TriplePattern] = []
    while True:
        kind, _ = peek()
        if kind == "rbrace":
            advance()
            break
        if kind == "eof":
            raise QueryParseError("missing '}' at the end of the pattern block")
        subject = parse_term("subject")
        predicate = parse_term("predicate")
        obj = parse_term("object")
        try:
            patterns.append(TriplePattern(subject, predicate, obj))
        except ValueError as exc:
            raise QueryParseError(str(exc)) from exc
        if peek()[0] == "dot":
            advance()

    if peek()[0] != "eof":
        raise QueryParseError(f"unexpected trailing text {peek()[1]!r}")

    try:
        return Query(tuple(select_vars), tuple(patterns), distinct=distinct)
    except ValueError as exc:
        raise QueryParseError(str(exc)) from exc
