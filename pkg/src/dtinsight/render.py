"""Byte-deterministic YAML and SVG views of a laid-out constellation.

Both formats are meant to be committed and diffed: equal graph+layout input
produces identical bytes, node order follows the layout's reading order, and
edges are sorted. All coordinates are written with one decimal place.
"""

from __future__ import annotations

import yaml

from .constellation import ConstellationGraph, LayoutResult, NodeCategory

NODE_WIDTH = 120.0
NODE_HEIGHT = 44.0
PADDING_X = 70.0
PADDING_Y = 50.0

_FILL_BY_CATEGORY = {
    NodeCategory.PT_OPERATOR: "#f4d8aa",
    NodeCategory.PT_MACHINE: "#f4d8aa",
    NodeCategory.PT_SYSTEM_ENVIRONMENT: "#f4d8aa",
    NodeCategory.PT_SYSTEM: "#f4d8aa",
    NodeCategory.PT_SENSORS: "#f0c27a",
    NodeCategory.DT_MODEL_DATA: "#cfe3f5",
    NodeCategory.DT_ENABLER: "#b5d2ee",
    NodeCategory.DT_SERVICE: "#9fc2e8",
}


def _fmt(value: float) -> str:
    return f"{value:.1f}"


def to_yaml(graph: ConstellationGraph, layout: LayoutResult) -> str:
    """YAML document listing nodes (in layout order) and sorted edges."""
    by_id = {node.id: node for node in graph.nodes}
    nodes = []
    for node_id in layout.node_order:
        node = by_id[node_id]
        x, y = layout.positions[node_id]
        nodes.append(
            {
                "id": node.id,
                "label": node.label,
                "category": node.category.value,
                "x": float(_fmt(x)),
                "y": float(_fmt(y)),
            }
        )
    edges = [
        {"src": edge.src, "dst": edge.dst, "relation": edge.relation}
        for edge in sorted(graph.edges, key=lambda e: (e.src, e.dst, e.relation))
    ]
    doc = {"constellation": 1, "nodes": nodes, "edges": edges}
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=False)


def _clip_to_rect(
    cx: float, cy: float, tx: float, ty: float
) -> tuple[float, float]:
    """Point where the segment (cx,cy)->(tx,ty) leaves the node rectangle."""
    dx = tx - cx
    dy = ty - cy
    if dx == 0 and dy == 0:
        return cx, cy
    half_w = NODE_WIDTH / 2
    half_h = NODE_HEIGHT / 2
    scale = 1.0
    if dx != 0:
        scale = min(scale, half_w / abs(dx))
    if dy != 0:
        scale = min(scale, half_h / abs(dy))
    return cx + dx * scale, cy + dy * scale


def render_svg(graph: ConstellationGraph, layout: LayoutResult) -> str:
    """Standalone SVG drawing of the constellation."""
    centers = {
        node_id: (x + PADDING_X, y + PADDING_Y)
        for node_id, (x, y) in layout.positions.items()
    }
    width = layout.size[0] + 2 * PADDING_X if centers else 2 * PADDING_X
    height = layout.size[1] + 2 * PADDING_Y if centers else 2 * PADDING_Y
    by_id = {node.id: node for node in graph.nodes}

    parts: list[str] = []
    parts.append(
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{_fmt(width)}" height="{_fmt(height)}" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">'
    )
    parts.append("  <defs>")
    parts.append(
        '    <marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" '
        'markerWidth="7" markerHeight="7" orient="auto-start-reverse">'
    )
    parts.append('      <path d="M 0 0 L 10 5 L 0 10 z" fill="#4a4a4a"/>')
    parts.append("    </marker>")
    parts.append("  </defs>")

    for edge in sorted(graph.edges, key=lambda e: (e.src, e.dst, e.relation)):
        sx, sy = centers[edge.src]
        tx, ty = centers[edge.dst]
        x1, y1 = _clip_to_rect(sx, sy, tx, ty)
        x2, y2 = _clip_to_rect(tx, ty, sx, sy)
        parts.append('  <g class="edge">')
        parts.append(f"    <title>{_escape(edge.src)} {_escape(edge.relation)} {_escape(edge.dst)}</title>")
        parts.append(
            f'    <line x1="{_fmt(x1)}" y1="{_fmt(y1)}" '
            f'x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
            'stroke="#4a4a4a" stroke-width="1.5" marker-end="url(#arrow)"/>'
        )
        parts.append("  </g>")

    for node_id in layout.node_order:
        node = by_id[node_id]
        cx, cy = centers[node_id]
        x = cx - NODE_WIDTH / 2
        y = cy - NODE_HEIGHT / 2
        fill = _FILL_BY_CATEGORY[node.category]
        parts.append(f'  <g class="node {node.category.value}">')
        parts.append(
            f'    <rect x="{_fmt(x)}" y="{_fmt(y)}" '
            f'width="{_fmt(NODE_WIDTH)}" height="{_fmt(NODE_HEIGHT)}" '
            f'rx="6.0" fill="{fill}" stroke="#35506b" stroke-width="1.0"/>'
        )
        parts.append(
            f'    <text x="{_fmt(cx)}" y="{_fmt(cy + 4.0)}" '
            'text-anchor="middle" font-family="sans-serif" font-size="12.0" '
            f'fill="#1c2733">{_escape(node.label)}</text>'
        )
        parts.append("  </g>")

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )
