"""The 21-row characteristics table and its overridable registry.

Each row is keyed C1..C21. A handful of codes are bound to vocabulary
concepts so their description text can be pulled from matching instances;
the rest are placeholders that report ``not reported`` until a registry
override binds them. The table always has exactly 21 rows, in code order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .model import DescriptionModel
from .vocab import QualifiedName, Vocabulary, builtin_vocabulary

NOT_REPORTED = "not reported"

CODES = tuple(f"C{i}" for i in range(1, 22))


class RegistryError(ValueError):
    """A registry override names an unknown code or is malformed."""


def _q(local: str) -> QualifiedName:
    return QualifiedName("DTDFVocab", local)


@dataclass(frozen=True)
class CharacteristicEntry:
    code: str
    label: str
    concepts: tuple[QualifiedName, ...] = ()


def _default_entries() -> dict[str, CharacteristicEntry]:
    named: dict[str, tuple[str, tuple[QualifiedName, ...]]] = {
        "C6": ("Services", (_q("Service"),)),
        "C7": ("Twinning time-scale", (_q("TimeScaleThing"),)),
        "C10": ("Models/Data", (_q("Model"), _q("Data"))),
        "C11": ("Enablers", (_q("Enabler"),)),
        "C14": ("Fidelity and validity considerations", ()),
        "C15": ("Technical implementation", ()),
        "C20": ("Standardization", (_q("Standardization"),)),
        "C21": ("Security and safety", ()),
    }
    entries: dict[str, CharacteristicEntry] = {}
    for code in CODES:
        if code in named:
            label, concepts = named[code]
            entries[code] = CharacteristicEntry(code, label, concepts)
        else:
            entries[code] = CharacteristicEntry(code, f"{code} (per DTDF)")
    return entries


@dataclass(frozen=True)
class CharacteristicRow:
    code: str
    label: str
    text: str
    sources: tuple[str, ...] = ()


@dataclass(frozen=True)
class CharacteristicRegistry:
    """Code -> entry map, always covering every code in :data:`CODES`."""

    entries: dict[str, CharacteristicEntry] = field(default_factory=_default_entries)

    @classmethod
    def default(cls) -> CharacteristicRegistry:
        return cls()

    def entry(self, code: str) -> CharacteristicEntry:
        return self.entries[code]

    def override(self, raw: dict) -> CharacteristicRegistry:
        """A new registry with entries replaced wholesale from *raw*.

        *raw* maps codes to ``{"label": str, "concepts": [names...]}``;
        ``concepts`` is optional and defaults to none. Unknown codes and
        missing labels are rejected.
        """
        entries = dict(self.entries)
        for code, spec in raw.items():
            if code not in entries:
                raise RegistryError(f"unknown characteristic code {code!r}")
            if not isinstance(spec, dict) or "label" not in spec:
                raise RegistryError(f"override for {code} must be an object with a label")
            label = spec["label"]
            if not isinstance(label, str) or not label:
                raise RegistryError(f"override for {code} has an invalid label")
            raw_concepts = spec.get("concepts", [])
            if not isinstance(raw_concepts, list):
                raise RegistryError(f"override for {code} has invalid concepts")
            concepts = []
            for item in raw_concepts:
                if not isinstance(item, str):
                    raise RegistryError(f"override for {code} has invalid concepts")
                try:
                    concepts.append(QualifiedName.parse(item, default_prefix="DTDFVocab"))
                except ValueError as exc:
                    raise RegistryError(f"override for {code}: {exc}") from exc
            entries[code] = CharacteristicEntry(code, label, tuple(concepts))
        return CharacteristicRegistry(entries)

    @classmethod
    def load(cls, path: str | Path) -> CharacteristicRegistry:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise RegistryError(f"registry file {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise RegistryError(f"registry file {path} must hold a JSON object")
        return cls.default().override(raw)


def characteristics_table(
    model: DescriptionModel,
    registry: CharacteristicRegistry | None = None,
    vocab: Vocabulary | None = None,
) -> tuple[CharacteristicRow, ...]:
    """Project *model* onto the 21 characteristics.

    A row's sources are the ids of every instance whose kind specializes one
    of the row's bound concepts, in declaration order. Its text joins those
    instances' descriptions with blank lines; rows with no description text
    read ``not reported``.
    """
    registry = registry or CharacteristicRegistry.default()
    vocab = vocab or builtin_vocabulary()
    rows: list[CharacteristicRow] = []
    for code in CODES:
        entry = registry.entry(code)
        sources: list[str] = []
        texts: list[str] = []
        for inst in model.instances:
            if any(vocab.specializes(inst.kind, c) for c in entry.concepts):
                sources.append(inst.local_id)
                if inst.desc:
                    texts.append(inst.desc)
        text = "\n\n".join(texts) if texts else NOT_REPORTED
        rows.append(CharacteristicRow(code, entry.label, text, tuple(sources)))
    return tuple(rows)
