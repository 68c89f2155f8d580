"""DTDF schema objects: concepts, relations, scalar properties, specialization.

The built-in vocabulary captures a service-oriented reporting frame for
digital twins: models and data are inputs to enablers, enablers enable
services, and a column of physical-twin concepts (Operator through
SensorsDataTransmission) anchors the physical side. Extension files may add
entries but never redefine built-ins.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

VOCAB_PREFIX = "DTDFVocab"
BASE_PREFIX = "base"

SCALAR_KINDS = ("boolean", "string", "number")

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class VocabularyError(ValueError):
    """A vocabulary definition breaks a structural rule (duplicate, cycle, ...)."""


def is_identifier(text: str) -> bool:
    return bool(_IDENT_RE.match(text))


@dataclass(frozen=True, order=True)
class QualifiedName:
    """A namespaced name, rendered as ``prefix:local``."""

    prefix: str
    local: str

    def __post_init__(self) -> None:
        if not is_identifier(self.prefix):
            raise ValueError(f"invalid name prefix {self.prefix!r}")
        if not is_identifier(self.local):
            raise ValueError(f"invalid local name {self.local!r}")

    def __str__(self) -> str:
        return f"{self.prefix}:{self.local}"

    @classmethod
    def parse(cls, text: str, default_prefix: str | None = None) -> QualifiedName:
        """Parse ``prefix:local``, or qualify a bare local with *default_prefix*."""
        if ":" in text:
            prefix, _, local = text.partition(":")
            return cls(prefix, local)
        if default_prefix is None:
            raise ValueError(f"name {text!r} has no prefix and no default was given")
        return cls(default_prefix, text)


@dataclass(frozen=True)
class ConceptDef:
    """A concept or aspect; ``parents`` are the concepts it specializes."""

    name: QualifiedName
    parents: tuple[QualifiedName, ...] = ()
    is_aspect: bool = False


@dataclass(frozen=True)
class RelationDef:
    """A relation entity with domain/range and forward/reverse identifiers.

    Descriptions assert the forward identifier; the reverse identifier is
    recorded for completeness and is not assertable.
    """

    name: QualifiedName
    domain: QualifiedName
    range: QualifiedName
    forward: str
    reverse: str


@dataclass(frozen=True)
class ScalarPropDef:
    name: QualifiedName
    domain: QualifiedName
    range: str
    functional: bool = False


class Vocabulary:
    """Immutable schema: concept hierarchy plus relation/property lookups.

    Construction validates the whole definition set and raises
    :class:`VocabularyError` on duplicates, unresolved references,
    specialization cycles, or a concept being declared parent of an aspect.
    """

    def __init__(
        self,
        concepts: tuple[ConceptDef, ...] | list[ConceptDef],
        relations: tuple[RelationDef, ...] | list[RelationDef] = (),
        scalar_props: tuple[ScalarPropDef, ...] | list[ScalarPropDef] = (),
    ) -> None:
        self.concepts: tuple[ConceptDef, ...] = tuple(concepts)
        self.relations: tuple[RelationDef, ...] = tuple(relations)
        self.scalar_props: tuple[ScalarPropDef, ...] = tuple(scalar_props)
        self._concepts: dict[QualifiedName, ConceptDef] = {}
        self._relations_by_forward: dict[str, RelationDef] = {}
        self._props_by_local: dict[str, ScalarPropDef] = {}
        self._locals: set[str] = set()
        self._ancestors: dict[QualifiedName, frozenset[QualifiedName]] = {}
        self._validate_and_index()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return (
            self.concepts == other.concepts
            and self.relations == other.relations
            and self.scalar_props == other.scalar_props
        )

    def __repr__(self) -> str:
        return (
            f"Vocabulary({len(self.concepts)} concepts, "
            f"{len(self.relations)} relations, {len(self.scalar_props)} scalar props)"
        )

    # -- lookups ------------------------------------------------------------

    def concept(self, name: QualifiedName) -> ConceptDef | None:
        return self._concepts.get(name)

    def relation_for(self, forward_local: str) -> RelationDef | None:
        """Resolve an assertion name to the relation whose forward matches it."""
        return self._relations_by_forward.get(forward_local)

    def scalar_prop(self, local: str) -> ScalarPropDef | None:
        return self._props_by_local.get(local)

    def has_local(self, local: str) -> bool:
        return local in self._locals

    def parents_of(self, name: QualifiedName) -> tuple[QualifiedName, ...]:
        concept = self._concepts.get(name)
        return concept.parents if concept else ()

    def ancestors_of(self, name: QualifiedName) -> frozenset[QualifiedName]:
        """Reflexive-transitive specialization ancestors of *name*."""
        return self._ancestors.get(name, frozenset((name,)))

    def specializes(self, sub: QualifiedName, ancestor: QualifiedName) -> bool:
        if sub == ancestor:
            return True
        return ancestor in self._ancestors.get(sub, frozenset())

    def extended(
        self,
        concepts: tuple[ConceptDef, ...] | list[ConceptDef] = (),
        relations: tuple[RelationDef, ...] | list[RelationDef] = (),
        scalar_props: tuple[ScalarPropDef, ...] | list[ScalarPropDef] = (),
    ) -> Vocabulary:
        """A new vocabulary with extra definitions merged over this one."""
        return Vocabulary(
            self.concepts + tuple(concepts),
            self.relations + tuple(relations),
            self.scalar_props + tuple(scalar_props),
        )

    # -- construction checks --------------------------------------------------

    def _validate_and_index(self) -> None:
        for concept in self.concepts:
            if concept.name.local in self._locals:
                raise VocabularyError(f"duplicate vocabulary name {concept.name}")
            self._locals.add(concept.name.local)
            self._concepts[concept.name] = concept

        assertion_names: set[str] = {"desc"}
        for rel in self.relations:
            if rel.name.local in self._locals:
                raise VocabularyError(f"duplicate vocabulary name {rel.name}")
            self._locals.add(rel.name.local)
            if rel.forward == rel.reverse:
                raise VocabularyError(
                    f"relation {rel.name} has identical forward and reverse names"
                )
            for ident in (rel.forward, rel.reverse):
                if not is_identifier(ident):
                    raise VocabularyError(f"invalid relation identifier {ident!r}")
                if ident in assertion_names:
                    raise VocabularyError(f"duplicate relation identifier {ident!r}")
                assertion_names.add(ident)
            self._relations_by_forward[rel.forward] = rel

        for prop in self.scalar_props:
            if prop.name.local in self._locals:
                raise VocabularyError(f"duplicate vocabulary name {prop.name}")
            self._locals.add(prop.name.local)
            if prop.name.local in assertion_names:
                raise VocabularyError(
                    f"scalar property {prop.name} collides with a relation identifier"
                )
            assertion_names.add(prop.name.local)
            if prop.range not in SCALAR_KINDS:
                raise VocabularyError(
                    f"scalar property {prop.name} has unknown range {prop.range!r}"
                )
            self._props_by_local[prop.name.local] = prop

        for concept in self.concepts:
            for parent in concept.parents:
                parent_def = self._concepts.get(parent)
                if parent_def is None:
                    raise VocabularyError(
                        f"concept {concept.name} names unknown parent {parent}"
                    )
                if concept.is_aspect and not parent_def.is_aspect:
                    raise VocabularyError(
                        f"aspect {concept.name} may not specialize concept {parent}"
                    )

        for rel in self.relations:
            for role, ref in (("domain", rel.domain), ("range", rel.range)):
                if ref not in self._concepts:
                    raise VocabularyError(f"relation {rel.name} has unknown {role} {ref}")
        for prop in self.scalar_props:
            if prop.domain not in self._concepts:
                raise VocabularyError(
                    f"scalar property {prop.name} has unknown domain {prop.domain}"
                )

        self._compute_ancestors()

    def _compute_ancestors(self) -> None:
        state: dict[QualifiedName, int] = {}  # 1 = visiting, 2 = done

        def visit(name: QualifiedName) -> frozenset[QualifiedName]:
            if state.get(name) == 1:
                raise VocabularyError(f"specialization cycle through {name}")
            if state.get(name) == 2:
                return self._ancestors[name]
            state[name] = 1
            acc = {name}
            for parent in self._concepts[name].parents:
                acc.update(visit(parent))
            state[name] = 2
            self._ancestors[name] = frozenset(acc)
            return self._ancestors[name]

        for concept in self.concepts:
            visit(concept.name)


def builtin_vocabulary() -> Vocabulary:
    """The fixed built-in DTDF vocabulary.

    Repeated calls return structurally equal (fresh) values.
    """

    def q(local: str) -> QualifiedName:
        return QualifiedName(VOCAB_PREFIX, local)

    described_thing = QualifiedName(BASE_PREFIX, "DescribedThing")
    concepts = (
        ConceptDef(described_thing),
        ConceptDef(q("TimeScaleThing")),
        ConceptDef(q("ProvidedThing")),
        ConceptDef(q("DTComponent")),
        ConceptDef(q("LifecycleStage")),
        ConceptDef(q("Input"), is_aspect=True),
        ConceptDef(q("Service"), (q("DTComponent"), q("TimeScaleThing"))),
        ConceptDef(q("Enabler"), (q("DTComponent"),)),
        ConceptDef(q("Model"), (q("DTComponent"), q("Input"))),
        ConceptDef(q("Data"), (q("DTComponent"), q("Input"))),
        ConceptDef(q("Standardization"), (described_thing,)),
        ConceptDef(q("PTComponent")),
        ConceptDef(q("Operator"), (q("PTComponent"),)),
        ConceptDef(q("Machine"), (q("PTComponent"),)),
        ConceptDef(q("SystemEnvironment"), (q("PTComponent"),)),
        ConceptDef(q("System"), (q("PTComponent"),)),
        ConceptDef(q("SensorsDataTransmission"), (q("PTComponent"),)),
        ConceptDef(q("DataTransmitted"), (q("SensorsDataTransmission"),)),
    )
    relations = (
        RelationDef(q("Provides"), q("Service"), q("ProvidedThing"), "provides", "providedBy"),
        RelationDef(q("Enables"), q("Enabler"), q("Service"), "enables", "enabledBy"),
        RelationDef(q("InputTo"), q("Input"), q("Enabler"), "inputTo", "hasInput"),
        RelationDef(q("DataInput"), q("DataTransmitted"), q("Data"), "asData", "fromData"),
        RelationDef(q("AtStage"), q("DTComponent"), q("LifecycleStage"), "atStage", "stageOf"),
    )
    scalar_props = (
        ScalarPropDef(q("IsCommEnabler"), q("Enabler"), "boolean", functional=True),
    )
    return Vocabulary(concepts, relations, scalar_props)
