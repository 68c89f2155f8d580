"""DSL parsing, error recovery, serialization, and round-trip properties."""

from __future__ import annotations

import math
import random

import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from conftest import EXCERPT, random_valid_model
from dtinsight.dsl import (
    DEFAULT_MODEL_NAME,
    format_float,
    parse_description,
    parse_vocabulary,
    serialize,
    tokenize,
)
from dtinsight.model import Instance, RelationAssertion, ScalarAssertion
from dtinsight.vocab import QualifiedName, builtin_vocabulary


# -- parse_description: happy paths -------------------------------------------------


def test_excerpt_parses_to_four_instances_in_source_order():
    result = parse_description(EXCERPT)
    assert result.ok
    model = result.model
    assert model.instance_ids() == (
        "what_if_sim",
        "simulator",
        "controller_model",
        "standardization",
    )
    assert model.instance("what_if_sim").kind == QualifiedName("DTDFVocab", "Service")
    assert model.instance("simulator").relations == (
        RelationAssertion("enables", QualifiedName(model.name, "what_if_sim")),
    )
    cm = model.instance("controller_model")
    assert [r.target.local for r in cm.relations] == [
        "simulator",
        "state_estimator",
        "optimization_algs",
    ]
    assert all(r.name == "inputTo" for r in cm.relations)


def test_bare_excerpt_gets_default_model_name():
    assert parse_description(EXCERPT).model.name == DEFAULT_MODEL_NAME


def test_empty_description_block():
    result = parse_description("description d [ ]")
    assert result.ok
    assert result.model.name == "d"
    assert result.model.instances == ()


def test_imports_recorded():
    result = parse_description("description d [\n  uses DTDFVocab\n  extends other\n]")
    assert result.ok
    assert result.model.imports == ("DTDFVocab", "other")


def test_desc_assertion_sets_instance_desc():
    source = 'description d [ instance x : Service [ base:desc "hello" ] ]'
    model = parse_description(source).model
    assert model.instance("x").desc == "hello"
    assert model.instance("x").scalars == ()


def test_multiple_desc_assertions_concatenate_blank_line_separated():
    source = 'description d [ instance x : Service [ base:desc "a" base:desc "b" ] ]'
    assert parse_description(source).model.instance("x").desc == "a\n\nb"


def test_scalar_classification():
    source = (
        "description d [ instance x : Enabler ["
        ' IsCommEnabler true count 3 ratio -0.5 tag "blue" ] ]'
    )
    model = parse_description(source).model
    assert model.instance("x").scalars == (
        ScalarAssertion("IsCommEnabler", True),
        ScalarAssertion("count", 3),
        ScalarAssertion("ratio", -0.5),
        ScalarAssertion("tag", "blue"),
    )


def test_bare_kind_defaults_to_vocab_prefix():
    model = parse_description("description d [ instance x : Service [] ]").model
    assert model.instance("x").kind == QualifiedName("DTDFVocab", "Service")


def test_bare_target_defaults_to_model_prefix():
    model = parse_description(
        "description d [ instance x : Enabler [ enables y ] ]"
    ).model
    assert model.instance("x").relations[0].target == QualifiedName("d", "y")


def test_prefixed_target_kept():
    model = parse_description(
        "description d [ instance x : Service [ atStage baseDesc:operation ] ]"
    ).model
    assert model.instance("x").relations[0].target == QualifiedName(
        "baseDesc", "operation"
    )


def test_comments_ignored_everywhere():
    plain = parse_description(EXCERPT).model
    commented_lines = []
    for line in EXCERPT.splitlines():
        commented_lines.append("// noise " + str(len(commented_lines)))
        commented_lines.append(line)
    commented = parse_description("\n".join(commented_lines) + "\n// trailing")
    assert commented.ok
    assert commented.model == plain


def test_string_escapes_decode():
    source = r'description d [ instance x : Service [ base:desc "a\"b\\c\nd\te" ] ]'
    assert parse_description(source).model.instance("x").desc == 'a"b\\c\nd\te'


# -- parse_description: errors and recovery -------------------------------------


def test_missing_colon_diagnostic_points_at_kind_token():
    source = (
        "description d [\n"
        "  instance x Service []\n"
        "  instance y : Enabler []\n"
        "]"
    )
    result = parse_description(source)
    assert not result.ok
    assert len(result.diagnostics) == 1
    diag = result.diagnostics[0]
    assert diag.expected == ":"
    assert (diag.span.line, diag.span.column) == (2, 14)
    # Recovery: the following instance still parses.
    assert result.model is not None
    assert result.model.instance_ids() == ("y",)


def test_unterminated_string_fatal_for_that_instance_only():
    source = (
        "description d [\n"
        '  instance x : Service [ base:desc "never closed ]\n'
        "  instance y : Enabler []\n"
        "]"
    )
    result = parse_description(source)
    assert any("unterminated" in d.message for d in result.diagnostics)
    assert result.model is not None
    assert "y" in result.model.instance_ids()


def test_unclosed_description_block_reports_eof():
    result = parse_description("description d [ instance x : Service []")
    assert any("end of input" in d.message for d in result.diagnostics)
    assert result.model is not None
    assert result.model.instance_ids() == ("x",)


def test_garbage_start_is_single_diagnostic():
    result = parse_description("what even is this")
    assert result.model is None
    assert len(result.diagnostics) == 1
    assert result.diagnostics[0].expected == "description"


def test_missing_value_inside_instance_recovers_to_next_instance():
    source = (
        "description d [\n"
        "  instance x : Service [ enables ]\n"
        "  instance y : Enabler []\n"
        "]"
    )
    result = parse_description(source)
    assert result.diagnostics
    assert result.model is not None
    assert "y" in result.model.instance_ids()


def test_diagnostic_str_carries_position():
    result = parse_description("description d [ ? ]")
    assert result.diagnostics
    rendered = str(result.diagnostics[0])
    assert rendered.startswith("1:")


def test_keyword_not_allowed_as_instance_id():
    result = parse_description("description d [ instance instance : Service [] ]")
    assert result.diagnostics


# -- spans stay inside the source ----------------------------------------------


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=120))
@example('description d [ instance x : Service [ base:desc "open')
@example("description d [\x00]")
@example("] ] ] [ [ [")
def test_parsing_is_total_and_spans_in_bounds(source):
    result = parse_description(source)  # must not raise
    lines = source.split("\n")
    for diag in result.diagnostics:
        assert diag.message
        assert diag.span.line >= 1
        assert diag.span.column >= 1
        assert diag.span.line <= max(len(lines), 1)
        line_text = lines[diag.span.line - 1] if diag.span.line <= len(lines) else ""
        assert diag.span.column <= len(line_text) + 2


# -- serialization and round-trip ---------------------------------------------


def test_serialize_canonical_form():
    model = parse_description(
        'description d [ uses DTDFVocab instance x : Service [ enables y base:desc "hi" ] ]'
    ).model
    assert serialize(model) == (
        "description d [\n"
        "  uses DTDFVocab\n"
        "  instance x : DTDFVocab:Service [\n"
        "    enables y\n"
        '    base:desc "hi"\n'
        "  ]\n"
        "]\n"
    )


def test_serialize_empty_instance_block():
    model = parse_description("description d [ instance x : Service [] ]").model
    assert "instance x : DTDFVocab:Service []" in serialize(model)


def test_serialize_empty_model():
    model = parse_description("description d [ ]").model
    assert serialize(model) == "description d [\n]\n"


def test_round_trip_excerpt():
    model = parse_description(EXCERPT).model
    again = parse_description(serialize(model))
    assert again.ok
    assert again.model == model


def test_round_trip_desc_with_quote():
    model_in = parse_description(
        r'description d [ instance x : Service [ base:desc "say \"hi\"" ] ]'
    ).model
    assert model_in.instance("x").desc == 'say "hi"'
    text = serialize(model_in)
    assert '\\"' in text
    assert parse_description(text).model == model_in


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**31))
def test_round_trip_random_models(seed):
    model = random_valid_model(random.Random(seed), max_instances=12)
    result = parse_description(serialize(model))
    assert result.ok, result.diagnostics[:3]
    assert result.model == model


@settings(max_examples=150, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False))
@example(1.2345678901234567e-05)
@example(5e-324)
@example(1.7976931348623157e308)
@example(-0.0)
def test_float_literals_round_trip_exactly(value):
    text = format_float(value)
    assert "e" not in text and "E" not in text
    source = f"description d [ instance x : Service [ p {text} ] ]"
    result = parse_description(source)
    assert result.ok
    scalar = result.model.instance("x").scalars[0].value
    assert isinstance(scalar, float)
    assert scalar == value or (math.isnan(scalar) and math.isnan(value))
    # -0.0 may legitimately serialize as its positive twin's digits only if
    # the bits survive; require exact bit identity.
    assert math.copysign(1.0, scalar) == math.copysign(1.0, value)


def test_format_float_rejects_non_finite():
    for bad in (math.inf, -math.inf, math.nan):
        with pytest.raises(ValueError):
            format_float(bad)


def test_serialize_rejects_non_finite_scalar():
    model = parse_description("description d [ instance x : Service [] ]").model
    poisoned = Instance(
        model.instances[0].id,
        model.instances[0].kind,
        scalars=(ScalarAssertion("p", math.inf),),
    )
    with pytest.raises(ValueError):
        serialize(
            type(model)(model.name, model.imports, (poisoned,))
        )


# -- tokenizer corners ----------------------------------------------------------


def test_tokenizer_reports_bad_characters_but_continues():
    tokens, diagnostics = tokenize("description @ d")
    assert [t.kind for t in tokens] == ["name", "name", "eof"]
    assert len(diagnostics) == 1
    assert "unexpected character" in diagnostics[0].message


def test_tokenizer_counts_lines():
    tokens, _ = tokenize("a\nb\n  c")
    positions = [(t.line, t.col) for t in tokens if t.kind == "name"]
    assert positions == [(1, 1), (2, 1), (3, 3)]


# -- parse_vocabulary -----------------------------------------------------------


def test_empty_vocabulary_source_equals_builtin():
    result = parse_vocabulary("")
    assert result.ok
    assert result.vocabulary == builtin_vocabulary()


def test_vocabulary_extension_constructs():
    source = (
        "vocabulary ext [\n"
        "  aspect Recordable\n"
        "  concept Gearbox < Machine, Recordable\n"
        "  relation entity Monitors [from Gearbox to Service forward monitors reverse monitoredBy]\n"
        "  scalar property rpmLimit [domain Gearbox range xsd:number functional]\n"
        "]\n"
    )
    result = parse_vocabulary(source)
    assert result.ok, result.diagnostics
    vocab = result.vocabulary
    gearbox = QualifiedName("DTDFVocab", "Gearbox")
    assert vocab.concept(gearbox) is not None
    assert vocab.specializes(gearbox, QualifiedName("DTDFVocab", "PTComponent"))
    assert vocab.concept(QualifiedName("DTDFVocab", "Recordable")).is_aspect
    monitors = vocab.relation_for("monitors")
    assert monitors is not None and monitors.range == QualifiedName(
        "DTDFVocab", "Service"
    )
    prop = vocab.scalar_prop("rpmLimit")
    assert prop is not None and prop.range == "number" and prop.functional


def test_vocabulary_statements_equal_builtin_definitions():
    source = (
        "concept Service2 < DTComponent, TimeScaleThing\n"
        "relation entity Enables2 [from Enabler to Service2 forward enables2 reverse enabledBy2]\n"
    )
    result = parse_vocabulary(source)
    assert result.ok
    vocab = result.vocabulary
    original = vocab.concept(QualifiedName("DTDFVocab", "Service"))
    clone = vocab.concept(QualifiedName("DTDFVocab", "Service2"))
    assert set(clone.parents) == set(original.parents)
    enables2 = vocab.relation_for("enables2")
    enables = vocab.relation_for("enables")
    assert enables2.domain == enables.domain


def test_vocabulary_redefinition_diagnostic():
    result = parse_vocabulary("concept Service < DTComponent")
    assert any("redefinition" in d.message for d in result.diagnostics)


def test_vocabulary_unknown_range_primitive_diagnostic():
    result = parse_vocabulary(
        "scalar property odd [domain Enabler range xsd:datetime]"
    )
    assert result.diagnostics


def test_vocabulary_unknown_parent_diagnostic():
    result = parse_vocabulary("concept Thing < Ghost")
    assert result.diagnostics


def test_vocabulary_recovers_after_bad_statement():
    source = "concept < broken\nconcept Fresh < Machine\n"
    result = parse_vocabulary(source)
    assert result.diagnostics
    assert result.vocabulary is not None
    assert result.vocabulary.concept(QualifiedName("DTDFVocab", "Fresh")) is not None
