"""Description models: typed instances with relation and scalar assertions.

A description model is the parsed form of one ``description`` block. It is a
plain value — no vocabulary is needed to hold one — and :func:`validate`
checks it against a vocabulary, splitting findings into errors (structurally
unusable assertions) and warnings (suspicious but renderable ones).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .vocab import QualifiedName, Vocabulary

ScalarValue = bool | int | float | str


@dataclass(frozen=True)
class RelationAssertion:
    """One ``name target`` line; *name* is a relation's forward identifier."""

    name: str
    target: QualifiedName


@dataclass(frozen=True)
class ScalarAssertion:
    """One ``name literal`` line."""

    name: str
    value: ScalarValue


@dataclass(frozen=True)
class Instance:
    id: QualifiedName
    kind: QualifiedName
    relations: tuple[RelationAssertion, ...] = ()
    scalars: tuple[ScalarAssertion, ...] = ()
    desc: str | None = None

    @property
    def local_id(self) -> str:
        return self.id.local


@dataclass(frozen=True)
class DescriptionModel:
    name: str
    imports: tuple[str, ...] = ()
    instances: tuple[Instance, ...] = ()

    def instance(self, local_id: str) -> Instance | None:
        for inst in self.instances:
            if inst.local_id == local_id:
                return inst
        return None

    def instance_ids(self) -> tuple[str, ...]:
        return tuple(inst.local_id for inst in self.instances)


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" | "warning"
    code: str
    instance: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: [{self.code}] {self.instance}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...] = field(default_factory=tuple)

    @property
    def errors(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == "error")

    @property
    def warnings(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == "warning")

    @property
    def ok(self) -> bool:
        return not self.errors


def _scalar_kind(value: ScalarValue) -> str:
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, (int, float)):
        return "number"
    return "string"


def validate(model: DescriptionModel, vocab: Vocabulary) -> ValidationReport:
    """Check *model* against *vocab*.

    Errors: duplicate instance ids, unknown or aspect kinds, unknown relation
    names, domain/range violations, and repeated functional properties.
    Everything else that looks off — targets not defined in the model, scalar
    names the vocabulary does not know, literal type or property-domain
    mismatches — is reported as a warning so partially-described systems still
    render.
    """
    findings: list[Finding] = []
    seen_ids: set[str] = set()
    local_ids = {inst.local_id for inst in model.instances}
    kind_by_local: dict[str, QualifiedName] = {}
    for inst in model.instances:
        if inst.local_id not in kind_by_local:
            kind_by_local[inst.local_id] = inst.kind

    for inst in model.instances:
        if inst.local_id in seen_ids:
            findings.append(
                Finding(
                    "error",
                    "DuplicateId",
                    inst.local_id,
                    f"instance id {inst.local_id!r} is declared more than once",
                )
            )
            continue
        seen_ids.add(inst.local_id)

        kind_def = vocab.concept(inst.kind)
        if kind_def is None:
            findings.append(
                Finding(
                    "error",
                    "UnknownKind",
                    inst.local_id,
                    f"kind {inst.kind} is not defined in the vocabulary",
                )
            )
            # Without a kind the domain checks below would be noise.
            continue
        if kind_def.is_aspect:
            findings.append(
                Finding(
                    "error",
                    "AspectKind",
                    inst.local_id,
                    f"{inst.kind} is an aspect and cannot be instantiated",
                )
            )
            continue

        for rel_assert in inst.relations:
            rel = vocab.relation_for(rel_assert.name)
            if rel is None:
                findings.append(
                    Finding(
                        "error",
                        "UnknownRelation",
                        inst.local_id,
                        f"no relation has forward name {rel_assert.name!r}",
                    )
                )
                continue
            if not vocab.specializes(inst.kind, rel.domain):
                findings.append(
                    Finding(
                        "error",
                        "DomainRangeViolation",
                        inst.local_id,
                        f"{rel_assert.name!r} requires a {rel.domain} subject "
                        f"but {inst.local_id} is a {inst.kind}",
                    )
                )
                continue
            target_local = rel_assert.target.local
            if target_local not in local_ids:
                findings.append(
                    Finding(
                        "warning",
                        "DanglingTarget",
                        inst.local_id,
                        f"{rel_assert.name!r} target {target_local!r} "
                        "is not defined in this model",
                    )
                )
                continue
            target_kind = kind_by_local[target_local]
            if vocab.concept(target_kind) is not None and not vocab.specializes(
                target_kind, rel.range
            ):
                findings.append(
                    Finding(
                        "error",
                        "DomainRangeViolation",
                        inst.local_id,
                        f"{rel_assert.name!r} requires a {rel.range} target "
                        f"but {target_local!r} is a {target_kind}",
                    )
                )

        seen_scalar_names: set[str] = set()
        for scalar in inst.scalars:
            prop = vocab.scalar_prop(scalar.name)
            if prop is None:
                findings.append(
                    Finding(
                        "warning",
                        "UnknownProperty",
                        inst.local_id,
                        f"scalar property {scalar.name!r} is not defined "
                        "in the vocabulary",
                    )
                )
                continue
            if prop.functional and scalar.name in seen_scalar_names:
                findings.append(
                    Finding(
                        "error",
                        "FunctionalViolation",
                        inst.local_id,
                        f"functional property {scalar.name!r} is asserted "
                        "more than once",
                    )
                )
            seen_scalar_names.add(scalar.name)
            if not vocab.specializes(inst.kind, prop.domain):
                findings.append(
                    Finding(
                        "warning",
                        "PropertyDomainViolation",
                        inst.local_id,
                        f"{scalar.name!r} applies to {prop.domain} "
                        f"but {inst.local_id} is a {inst.kind}",
                    )
                )
            if _scalar_kind(scalar.value) != prop.range:
                findings.append(
                    Finding(
                        "warning",
                        "TypeMismatch",
                        inst.local_id,
                        f"{scalar.name!r} expects a {prop.range} value, "
                        f"got {_scalar_kind(scalar.value)}",
                    )
                )

    return ValidationReport(tuple(findings))
