"""Textual syntax for description models and vocabulary extensions.

Description blocks look like::

    description plant [
      uses DTDFVocab
      instance boiler : DTDFVocab:Machine [
        base:desc "Primary heat source."
      ]
    ]

Assertions are classified by shape: a name value is a relation assertion, a
literal value is a scalar assertion, and a ``desc`` name with a string value
sets the instance description. ``serialize`` emits a canonical form —
``parse(serialize(parse(text)))`` reproduces the model exactly.

Parsing never raises on bad input; it reports positioned diagnostics and
recovers at the next ``instance`` keyword or the closing bracket, so one
broken instance does not hide the rest of the file.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from decimal import Decimal

from .model import (
    DescriptionModel,
    Instance,
    RelationAssertion,
    ScalarAssertion,
    ScalarValue,
)
from .vocab import (
    BASE_PREFIX,
    VOCAB_PREFIX,
    ConceptDef,
    QualifiedName,
    RelationDef,
    ScalarPropDef,
    Vocabulary,
    VocabularyError,
    builtin_vocabulary,
)

KEYWORDS = frozenset(
    {
        "description",
        "instance",
        "uses",
        "extends",
        "vocabulary",
        "concept",
        "aspect",
        "relation",
        "scalar",
        "property",
        "entity",
        "from",
        "to",
        "forward",
        "reverse",
        "domain",
        "range",
        "functional",
    }
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<badstring>"(?:[^"\\\n]|\\.)*)
  | (?P<number>-?[0-9]+(?:\.[0-9]+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*(?::[A-Za-z_][A-Za-z0-9_]*)?)
  | (?P<lbracket>\[)
  | (?P<rbracket>\])
  | (?P<colon>:)
  | (?P<lt><)
  | (?P<comma>,)
  | (?P<bad>.)
    """,
    re.VERBOSE,
)

_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t", "r": "\r"}


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 1


@dataclass(frozen=True)
class ParseDiagnostic:
    span: SourceSpan
    message: str
    expected: str | None = None

    def __str__(self) -> str:
        return f"{self.span.line}:{self.span.column}: {self.message}"


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int
    value: ScalarValue | None = None

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.col, max(len(self.text), 1))


def _unescape(body: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            nxt = body[i + 1]
            out.append(_ESCAPES.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def tokenize(source: str) -> tuple[list[Token], list[ParseDiagnostic]]:
    tokens: list[Token] = []
    diagnostics: list[ParseDiagnostic] = []
    line = 1
    line_start = 0
    for match in _TOKEN_RE.finditer(source):
        kind = match.lastgroup or "bad"
        text = match.group()
        col = match.start() - line_start + 1
        if kind == "nl":
            line += 1
            line_start = match.end()
            continue
        if kind in ("ws", "comment"):
            continue
        if kind == "badstring":
            diagnostics.append(
                ParseDiagnostic(
                    SourceSpan(line, col, len(text)), "unterminated string literal"
                )
            )
            tokens.append(Token("string", text, line, col, _unescape(text[1:])))
            continue
        if kind == "bad":
            diagnostics.append(
                ParseDiagnostic(
                    SourceSpan(line, col), f"unexpected character {text!r}"
                )
            )
            continue
        value: ScalarValue | None = None
        if kind == "string":
            value = _unescape(text[1:-1])
        elif kind == "number":
            value = float(text) if "." in text else int(text)
        tokens.append(Token(kind, text, line, col, value))
    tokens.append(Token("eof", "", line, len(source) - line_start + 1))
    return tokens, diagnostics


@dataclass
class ParseResult:
    """Outcome of parsing a description: a model, diagnostics, or both.

    ``model`` is kept even when recovery produced diagnostics, so callers can
    inspect the salvageable part; ``ok`` is true only for a clean parse.
    """

    model: DescriptionModel | None
    diagnostics: tuple[ParseDiagnostic, ...] = ()

    @property
    def ok(self) -> bool:
        return self.model is not None and not self.diagnostics


@dataclass
class VocabResult:
    vocabulary: Vocabulary | None
    diagnostics: tuple[ParseDiagnostic, ...] = ()

    @property
    def ok(self) -> bool:
        return self.vocabulary is not None and not self.diagnostics


class _Cursor:
    def __init__(self, tokens: list[Token]) -> None:
        self.tokens = tokens
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at_name(self, text: str) -> bool:
        return self.current.kind == "name" and self.current.text == text

    def at_eof(self) -> bool:
        return self.current.kind == "eof"


def _expect(
    cur: _Cursor, kind: str, what: str, diagnostics: list[ParseDiagnostic]
) -> Token | None:
    tok = cur.current
    if tok.kind != kind:
        shown = tok.text if tok.kind != "eof" else "end of input"
        diagnostics.append(
            ParseDiagnostic(tok.span, f"expected {what}, found {shown!r}", expected=what)
        )
        return None
    return cur.advance()


def _is_plain_name(tok: Token) -> bool:
    return tok.kind == "name" and ":" not in tok.text


DEFAULT_MODEL_NAME = "model"


def parse_description(source: str) -> ParseResult:
    """Parse a ``description`` block into a :class:`DescriptionModel`.

    A source that starts directly with ``instance`` (or ``uses``) is accepted
    as an unwrapped body — copied excerpts parse without adding the
    ``description name [ ... ]`` shell — and the model is named
    :data:`DEFAULT_MODEL_NAME`.
    """
    tokens, diagnostics = tokenize(source)
    cur = _Cursor(tokens)

    wrapped = cur.at_name("description")
    if wrapped:
        cur.advance()
        name_tok = cur.current
        if not _is_plain_name(name_tok) or name_tok.text in KEYWORDS:
            diagnostics.append(
                ParseDiagnostic(
                    name_tok.span,
                    "expected a model name after 'description'",
                    expected="name",
                )
            )
            return ParseResult(None, tuple(diagnostics))
        cur.advance()
        model_name = name_tok.text
        if _expect(cur, "lbracket", "'['", diagnostics) is None:
            return ParseResult(None, tuple(diagnostics))
    elif cur.at_name("instance") or cur.at_name("uses") or cur.at_name("extends"):
        model_name = DEFAULT_MODEL_NAME
    else:
        tok = cur.current
        shown = tok.text if tok.kind != "eof" else "end of input"
        diagnostics.append(
            ParseDiagnostic(
                tok.span,
                f"expected 'description' or 'instance', found {shown!r}",
                expected="description",
            )
        )
        return ParseResult(None, tuple(diagnostics))

    imports: list[str] = []
    instances: list[Instance] = []

    while True:
        tok = cur.current
        if wrapped and tok.kind == "rbracket":
            cur.advance()
            break
        if tok.kind == "eof":
            if wrapped:
                diagnostics.append(
                    ParseDiagnostic(
                        tok.span, "unexpected end of input inside description"
                    )
                )
            break
        if cur.at_name("uses") or cur.at_name("extends"):
            cur.advance()
            imp = cur.current
            if imp.kind == "name":
                cur.advance()
                imports.append(imp.text)
            else:
                diagnostics.append(
                    ParseDiagnostic(imp.span, "expected a name to import", expected="name")
                )
                _recover(cur)
            continue
        if cur.at_name("instance"):
            inst = _parse_instance(cur, model_name, diagnostics)
            if inst is not None:
                instances.append(inst)
            continue
        closer = ", or ']'" if wrapped else ""
        diagnostics.append(
            ParseDiagnostic(
                tok.span,
                f"expected 'instance', 'uses'{closer}, found {tok.text!r}",
                expected="instance",
            )
        )
        cur.advance()
        _recover(cur)

    model = DescriptionModel(model_name, tuple(imports), tuple(instances))
    return ParseResult(model, tuple(diagnostics))


def _recover(cur: _Cursor) -> None:
    """Skip to the next ``instance`` keyword or the block's closing bracket."""
    depth = 0
    while not cur.at_eof():
        tok = cur.current
        if tok.kind == "lbracket":
            depth += 1
        elif tok.kind == "rbracket":
            if depth == 0:
                return
            depth -= 1
        elif depth == 0 and cur.at_name("instance"):
            return
        cur.advance()


def _skip_block_rest(cur: _Cursor) -> None:
    """Consume the remainder of an already-open bracket block, bracket included."""
    depth = 1
    while not cur.at_eof():
        tok = cur.advance()
        if tok.kind == "lbracket":
            depth += 1
        elif tok.kind == "rbracket":
            depth -= 1
            if depth == 0:
                return


def _parse_instance(
    cur: _Cursor, model_name: str, diagnostics: list[ParseDiagnostic]
) -> Instance | None:
    cur.advance()  # 'instance'
    id_tok = cur.current
    if not _is_plain_name(id_tok) or id_tok.text in KEYWORDS:
        diagnostics.append(
            ParseDiagnostic(id_tok.span, "expected an instance id", expected="name")
        )
        _recover(cur)
        return None
    cur.advance()

    if cur.current.kind != "colon":
        tok = cur.current
        shown = tok.text if tok.kind != "eof" else "end of input"
        diagnostics.append(
            ParseDiagnostic(tok.span, f"expected ':', found {shown!r}", expected=":")
        )
        _recover(cur)
        return None
    cur.advance()

    kind_tok = cur.current
    if kind_tok.kind != "name" or (
        ":" not in kind_tok.text and kind_tok.text in KEYWORDS
    ):
        diagnostics.append(
            ParseDiagnostic(kind_tok.span, "expected a kind name", expected="name")
        )
        _recover(cur)
        return None
    cur.advance()
    kind = QualifiedName.parse(kind_tok.text, default_prefix=VOCAB_PREFIX)

    relations: list[RelationAssertion] = []
    scalars: list[ScalarAssertion] = []
    descs: list[str] = []

    if cur.current.kind == "lbracket":
        cur.advance()
        while True:
            tok = cur.current
            if tok.kind == "rbracket":
                cur.advance()
                break
            if tok.kind == "eof":
                diagnostics.append(
                    ParseDiagnostic(
                        tok.span, "unexpected end of input inside instance block"
                    )
                )
                break
            if tok.kind != "name" or (
                ":" not in tok.text and tok.text in KEYWORDS
            ):
                diagnostics.append(
                    ParseDiagnostic(
                        tok.span,
                        f"expected an assertion name or ']', found {tok.text!r}",
                        expected="name",
                    )
                )
                # The next `instance` keyword is the recovery anchor: leave it
                # for the caller so a block whose ']' was lost (for example to
                # an unterminated string) is fatal for this instance only.
                if not cur.at_name("instance"):
                    _skip_block_rest(cur)
                return Instance(
                    QualifiedName(model_name, id_tok.text),
                    kind,
                    tuple(relations),
                    tuple(scalars),
                    "\n\n".join(descs) if descs else None,
                )
            cur.advance()
            assert_local = tok.text.rpartition(":")[2]
            value_tok = cur.current
            if value_tok.kind == "string":
                cur.advance()
                text = str(value_tok.value)
                if assert_local == "desc":
                    descs.append(text)
                else:
                    scalars.append(ScalarAssertion(assert_local, text))
            elif value_tok.kind == "number":
                cur.advance()
                assert value_tok.value is not None
                scalars.append(ScalarAssertion(assert_local, value_tok.value))
            elif value_tok.kind == "name" and value_tok.text in ("true", "false"):
                cur.advance()
                scalars.append(ScalarAssertion(assert_local, value_tok.text == "true"))
            elif value_tok.kind == "name":
                cur.advance()
                target = QualifiedName.parse(value_tok.text, default_prefix=model_name)
                relations.append(RelationAssertion(assert_local, target))
            else:
                shown = value_tok.text if value_tok.kind != "eof" else "end of input"
                diagnostics.append(
                    ParseDiagnostic(
                        value_tok.span,
                        f"expected a value after {tok.text!r}, found {shown!r}",
                        expected="value",
                    )
                )
                _skip_block_rest(cur)
                break

    return Instance(
        QualifiedName(model_name, id_tok.text),
        kind,
        tuple(relations),
        tuple(scalars),
        "\n\n".join(descs) if descs else None,
    )


# -- vocabulary extension files ------------------------------------------------


_XSD_RANGES = {
    "xsd:boolean": "boolean",
    "xsd:string": "string",
    "xsd:integer": "number",
    "xsd:int": "number",
    "xsd:decimal": "number",
    "xsd:double": "number",
    "xsd:number": "number",
    "boolean": "boolean",
    "string": "string",
    "number": "number",
}


def parse_vocabulary(source: str, base: Vocabulary | None = None) -> VocabResult:
    """Parse vocabulary statements and merge them over *base* (built-in by default).

    Supported statements::

        concept Name < Parent1, Parent2
        aspect Name
        relation entity Name [from A to B forward f reverse r]
        scalar property name [domain D range xsd:kind functional]
    """
    base = base or builtin_vocabulary()
    tokens, diagnostics = tokenize(source)
    cur = _Cursor(tokens)

    concepts: list[ConceptDef] = []
    relations: list[RelationDef] = []
    props: list[ScalarPropDef] = []
    seen_locals = {c.name.local for c in base.concepts}
    seen_locals.update(r.name.local for r in base.relations)
    seen_locals.update(p.name.local for p in base.scalar_props)

    def qname(text: str) -> QualifiedName:
        return QualifiedName.parse(text, default_prefix=VOCAB_PREFIX)

    def check_fresh(tok: Token) -> bool:
        local = tok.text.rpartition(":")[2]
        if local in seen_locals:
            diagnostics.append(
                ParseDiagnostic(tok.span, f"redefinition of vocabulary name {local!r}")
            )
            return False
        seen_locals.add(local)
        return True

    while not cur.at_eof():
        if cur.at_name("vocabulary"):
            cur.advance()
            if cur.current.kind == "name":
                cur.advance()
            if cur.current.kind == "lbracket":
                cur.advance()
            continue
        if cur.current.kind == "rbracket":
            cur.advance()
            continue
        if cur.at_name("concept") or cur.at_name("aspect"):
            is_aspect = cur.current.text == "aspect"
            cur.advance()
            name_tok = cur.current
            if name_tok.kind != "name":
                diagnostics.append(
                    ParseDiagnostic(name_tok.span, "expected a concept name")
                )
                _recover_vocab(cur)
                continue
            cur.advance()
            parents: list[QualifiedName] = []
            if cur.current.kind == "lt":
                cur.advance()
                while True:
                    parent_tok = cur.current
                    if parent_tok.kind != "name":
                        diagnostics.append(
                            ParseDiagnostic(parent_tok.span, "expected a parent name")
                        )
                        break
                    cur.advance()
                    parents.append(qname(parent_tok.text))
                    if cur.current.kind == "comma":
                        cur.advance()
                        continue
                    break
            if check_fresh(name_tok):
                concepts.append(
                    ConceptDef(qname(name_tok.text), tuple(parents), is_aspect)
                )
            continue
        if cur.at_name("relation"):
            cur.advance()
            if cur.at_name("entity"):
                cur.advance()
            name_tok = cur.current
            if name_tok.kind != "name":
                diagnostics.append(
                    ParseDiagnostic(name_tok.span, "expected a relation name")
                )
                _recover_vocab(cur)
                continue
            cur.advance()
            fields = _parse_keyed_block(
                cur, ("from", "to", "forward", "reverse"), diagnostics
            )
            missing = [k for k in ("from", "to", "forward", "reverse") if k not in fields]
            if missing:
                diagnostics.append(
                    ParseDiagnostic(
                        name_tok.span,
                        f"relation {name_tok.text} is missing {', '.join(missing)}",
                    )
                )
                continue
            if check_fresh(name_tok):
                relations.append(
                    RelationDef(
                        qname(name_tok.text),
                        qname(fields["from"]),
                        qname(fields["to"]),
                        fields["forward"].rpartition(":")[2],
                        fields["reverse"].rpartition(":")[2],
                    )
                )
            continue
        if cur.at_name("scalar"):
            cur.advance()
            if cur.at_name("property"):
                cur.advance()
            name_tok = cur.current
            if name_tok.kind != "name":
                diagnostics.append(
                    ParseDiagnostic(name_tok.span, "expected a property name")
                )
                _recover_vocab(cur)
                continue
            cur.advance()
            fields = _parse_keyed_block(cur, ("domain", "range"), diagnostics)
            missing = [k for k in ("domain", "range") if k not in fields]
            if missing:
                diagnostics.append(
                    ParseDiagnostic(
                        name_tok.span,
                        f"property {name_tok.text} is missing {', '.join(missing)}",
                    )
                )
                continue
            range_kind = _XSD_RANGES.get(fields["range"])
            if range_kind is None:
                diagnostics.append(
                    ParseDiagnostic(
                        name_tok.span,
                        f"property {name_tok.text} has unsupported range "
                        f"{fields['range']!r}",
                    )
                )
                continue
            if check_fresh(name_tok):
                props.append(
                    ScalarPropDef(
                        qname(name_tok.text),
                        qname(fields["domain"]),
                        range_kind,
                        functional="functional" in fields,
                    )
                )
            continue
        tok = cur.current
        diagnostics.append(
            ParseDiagnostic(
                tok.span,
                f"expected 'concept', 'aspect', 'relation', or 'scalar', "
                f"found {tok.text!r}",
            )
        )
        cur.advance()
        _recover_vocab(cur)

    try:
        vocab = base.extended(tuple(concepts), tuple(relations), tuple(props))
    except VocabularyError as exc:
        diagnostics.append(ParseDiagnostic(SourceSpan(1, 1), str(exc)))
        return VocabResult(None, tuple(diagnostics))
    return VocabResult(vocab, tuple(diagnostics))


def _recover_vocab(cur: _Cursor) -> None:
    anchors = ("concept", "aspect", "relation", "scalar")
    while not cur.at_eof():
        if cur.current.kind == "name" and cur.current.text in anchors:
            return
        cur.advance()


def _parse_keyed_block(
    cur: _Cursor, keys: tuple[str, ...], diagnostics: list[ParseDiagnostic]
) -> dict[str, str]:
    """Parse ``[key value ... functional]`` into a key->value map."""
    fields: dict[str, str] = {}
    if cur.current.kind != "lbracket":
        return fields
    cur.advance()
    while True:
        tok = cur.current
        if tok.kind == "rbracket":
            cur.advance()
            break
        if tok.kind == "eof":
            diagnostics.append(
                ParseDiagnostic(tok.span, "unexpected end of input inside block")
            )
            break
        if tok.kind == "name" and tok.text == "functional":
            cur.advance()
            fields["functional"] = "true"
            continue
        if tok.kind == "name" and tok.text in keys:
            cur.advance()
            val = cur.current
            if val.kind != "name":
                diagnostics.append(
                    ParseDiagnostic(val.span, f"expected a name after {tok.text!r}")
                )
                continue
            cur.advance()
            fields[tok.text] = val.text
            continue
        diagnostics.append(
            ParseDiagnostic(tok.span, f"unexpected token {tok.text!r} in block")
        )
        cur.advance()
    return fields


# -- canonical serialization ---------------------------------------------------


def _escape_string(text: str) -> str:
    out: list[str] = ['"']
    for ch in text:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def format_float(value: float) -> str:
    """Render a float without exponent notation, value-preserving.

    Uses the short repr when it is already plain decimal; otherwise falls
    back to the exact decimal expansion of the binary value, so parsing the
    text always recovers the identical float.
    """
    if not math.isfinite(value):
        raise ValueError("non-finite numbers cannot be serialized")
    text = repr(value)
    if "e" in text or "E" in text:
        text = format(Decimal(value), "f")
        if "." not in text:
            text += ".0"
    return text


def _format_scalar(value: ScalarValue) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value)
    return _escape_string(value)


def _format_target(target: QualifiedName, model_name: str) -> str:
    if target.prefix == model_name:
        return target.local
    return str(target)


def serialize(model: DescriptionModel) -> str:
    """Canonical text for *model*; stable byte-for-byte across runs."""
    lines: list[str] = [f"description {model.name} ["]
    for imp in model.imports:
        lines.append(f"  uses {imp}")
    for inst in model.instances:
        header = f"  instance {inst.local_id} : {inst.kind}"
        body: list[str] = []
        for rel in inst.relations:
            body.append(f"    {rel.name} {_format_target(rel.target, model.name)}")
        for scalar in inst.scalars:
            body.append(f"    {scalar.name} {_format_scalar(scalar.value)}")
        if inst.desc is not None:
            body.append(f"    {BASE_PREFIX}:desc {_escape_string(inst.desc)}")
        if body:
            lines.append(header + " [")
            lines.extend(body)
            lines.append("  ]")
        else:
            lines.append(header + " []")
    lines.append("]")
    return "\n".join(lines) + "\n"
