"""Static report generation: characteristics table, constellation, manifest.

``generate_report`` writes a small self-contained site. Output is staged in a
temporary sibling directory and swapped in with renames, so a crash never
leaves a half-written report, and every artifact except the manifest is
byte-deterministic for identical input bytes.
"""

from __future__ import annotations

import hashlib
import html
import json
import shutil
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .characteristics import (
    CharacteristicRegistry,
    CharacteristicRow,
    characteristics_table,
)
from .constellation import build_constellation, layout
from .dsl import parse_description
from .model import validate
from .render import render_svg, to_yaml
from .vocab import Vocabulary, builtin_vocabulary


class ReportError(ValueError):
    """Input could not be turned into a report (parse or validation failure)."""


@dataclass(frozen=True)
class ReportBundle:
    table_html: str
    constellation_svg: str
    constellation_yaml: str
    index_html: str
    manifest: dict


def table_html(rows: tuple[CharacteristicRow, ...] | list[CharacteristicRow]) -> str:
    """The characteristics table as a standalone HTML fragment."""
    parts = ['<table class="characteristics">']
    parts.append("  <thead>")
    parts.append("    <tr><th>Code</th><th>Characteristic</th><th>Description</th></tr>")
    parts.append("  </thead>")
    parts.append("  <tbody>")
    for row in rows:
        text = html.escape(row.text).replace("\n\n", "<br/><br/>")
        sources = ""
        if row.sources:
            joined = ", ".join(html.escape(s) for s in row.sources)
            sources = f' data-sources="{joined}"'
        parts.append(
            f'    <tr{sources}><td>{html.escape(row.code)}</td>'
            f"<td>{html.escape(row.label)}</td>"
            f"<td>{text}</td></tr>"
        )
    parts.append("  </tbody>")
    parts.append("</table>")
    return "\n".join(parts) + "\n"


def _index_html(
    model_name: str,
    model_hash: str,
    table: str,
    svg: str,
) -> str:
    app_section = (
        "  <section>\n"
        "    <h2>Interactive view</h2>\n"
        '    <iframe src="./app/" title="interactive view" '
        'style="width:100%;height:640px;border:1px solid #ccc;"></iframe>\n'
        "  </section>\n"
    )
    return (
        "<!DOCTYPE html>\n"
        '<html lang="en">\n'
        "<head>\n"
        '<meta charset="utf-8"/>\n'
        f"<title>{html.escape(model_name)} report</title>\n"
        "<style>\n"
        "body { font-family: sans-serif; margin: 2rem; color: #1c2733; }\n"
        "table.characteristics { border-collapse: collapse; width: 100%; }\n"
        "table.characteristics th, table.characteristics td "
        "{ border: 1px solid #9ab0c4; padding: 0.4rem 0.6rem; text-align: left; "
        "vertical-align: top; }\n"
        "table.characteristics th { background: #e2ecf5; }\n"
        "section { margin-bottom: 2rem; }\n"
        "figure { margin: 0; overflow-x: auto; }\n"
        "</style>\n"
        "</head>\n"
        "<body>\n"
        f"<h1>{html.escape(model_name)}</h1>\n"
        f'<p class="model-hash">Model hash: <code>{model_hash}</code></p>\n'
        "  <section>\n"
        "    <h2>Constellation</h2>\n"
        "    <figure>\n"
        + svg
        + "    </figure>\n"
        "  </section>\n"
        "  <section>\n"
        "    <h2>Characteristics</h2>\n"
        + table
        + "  </section>\n"
        + app_section
        + "</body>\n"
        "</html>\n"
    )


def build_report(
    source: str | bytes,
    vocab: Vocabulary | None = None,
    registry: CharacteristicRegistry | None = None,
    generated_at: datetime | None = None,
) -> ReportBundle:
    """Parse, validate, and render *source* into an in-memory bundle.

    Raises :class:`ReportError` when the source does not parse cleanly or
    validation finds errors (warnings pass).
    """
    raw = source.encode("utf-8") if isinstance(source, str) else source
    text = raw.decode("utf-8")
    vocab = vocab or builtin_vocabulary()

    result = parse_description(text)
    if result.model is None or result.diagnostics:
        lines = "; ".join(str(d) for d in result.diagnostics) or "no model parsed"
        raise ReportError(f"input does not parse: {lines}")
    report = validate(result.model, vocab)
    if not report.ok:
        lines = "; ".join(str(f) for f in report.errors)
        raise ReportError(f"input does not validate: {lines}")

    model = result.model
    rows = characteristics_table(model, registry, vocab)
    table = table_html(rows)
    graph = build_constellation(model, vocab)
    placed = layout(graph)
    svg = render_svg(graph, placed)
    yaml_text = to_yaml(graph, placed)

    stamp = (generated_at or datetime.now(timezone.utc)).astimezone(timezone.utc)
    manifest = {
        "generatedAt": stamp.strftime("%Y-%m-%dT%H:%M:%SZ"),
        "modelName": model.name,
        "modelHash": hashlib.sha256(raw).hexdigest(),
    }
    index = _index_html(model.name, manifest["modelHash"], table, svg)
    return ReportBundle(table, svg, yaml_text, index, manifest)


def generate_report(
    source: str | bytes,
    out_dir: str | Path,
    registry_override: str | Path | None = None,
    embed_ui: str | Path | None = None,
    generated_at: datetime | None = None,
) -> ReportBundle:
    """Write the report site into *out_dir* (atomically, replacing any old one).

    Files written: ``index.html``, ``table.html``, ``constellation.svg``,
    ``constellation.yaml``, ``manifest.json`` — plus ``app/`` when *embed_ui*
    names a directory to copy in.
    """
    registry = (
        CharacteristicRegistry.load(registry_override)
        if registry_override is not None
        else None
    )
    bundle = build_report(source, registry=registry, generated_at=generated_at)

    out = Path(out_dir)
    out.parent.mkdir(parents=True, exist_ok=True)
    stage = out.parent / f".{out.name}.stage-{uuid.uuid4().hex[:8]}"
    stage.mkdir()
    try:
        (stage / "index.html").write_text(bundle.index_html, encoding="utf-8")
        (stage / "table.html").write_text(bundle.table_html, encoding="utf-8")
        (stage / "constellation.svg").write_text(
            bundle.constellation_svg, encoding="utf-8"
        )
        (stage / "constellation.yaml").write_text(
            bundle.constellation_yaml, encoding="utf-8"
        )
        (stage / "manifest.json").write_text(
            json.dumps(bundle.manifest, indent=2) + "\n", encoding="utf-8"
        )
        if embed_ui is not None:
            ui_src = Path(embed_ui)
            if not ui_src.is_dir():
                raise ReportError(f"embed-ui path {ui_src} is not a directory")
            shutil.copytree(ui_src, stage / "app")
    except BaseException:
        shutil.rmtree(stage, ignore_errors=True)
        raise

    old = out.parent / f".{out.name}.old-{uuid.uuid4().hex[:8]}"
    if out.exists():
        out.rename(old)
        stage.rename(out)
        shutil.rmtree(old, ignore_errors=True)
    else:
        stage.rename(out)
    return bundle
