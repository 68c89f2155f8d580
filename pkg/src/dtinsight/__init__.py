"""Digital-twin reporting toolkit.

Parse DTDF description models, validate them against the built-in
vocabulary, query them as triples, draw the constellation architecture,
generate a static report site, and serve live telemetry to the
interactive UI.
"""

from .characteristics import (
    CharacteristicRegistry,
    CharacteristicRow,
    characteristics_table,
)
from .constellation import (
    ConstellationGraph,
    NodeCategory,
    build_constellation,
    closure,
    closure_json,
    layout,
)
from .dsl import parse_description, parse_vocabulary, serialize
from .model import DescriptionModel, Instance, ValidationReport, validate
from .render import render_svg, to_yaml
from .report import ReportBundle, build_report, generate_report
from .store import Query, TriplePattern, TripleStore, Variable, parse_query, select, to_triples
from .telemetry import GapEvent, TelemetryHub, TelemetrySample
from .vocab import QualifiedName, Vocabulary, builtin_vocabulary

__version__ = "0.1.0"

__all__ = [
    "CharacteristicRegistry",
    "CharacteristicRow",
    "ConstellationGraph",
    "DescriptionModel",
    "GapEvent",
    "Instance",
    "NodeCategory",
    "QualifiedName",
    "Query",
    "ReportBundle",
    "TelemetryHub",
    "TelemetrySample",
    "TriplePattern",
    "TripleStore",
    "ValidationReport",
    "Variable",
    "Vocabulary",
    "build_constellation",
    "build_report",
    "builtin_vocabulary",
    "characteristics_table",
    "closure",
    "closure_json",
    "generate_report",
    "layout",
    "parse_description",
    "parse_query",
    "parse_vocabulary",
    "render_svg",
    "select",
    "serialize",
    "to_triples",
    "to_yaml",
    "validate",
]
