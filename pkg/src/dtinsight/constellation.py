"""Constellation graph: categorized nodes, typed edges, and a layered layout.

The drawing convention is a physical column on the left (operator down to
sensors) and three digital layers on the right, stacked so data and models
sit at the bottom, enablers in the middle, and services on top. Edges follow
the vocabulary's relation directions; the layout orders each digital layer
with barycenter sweeps and never returns more edge crossings than the
id-sorted seed order.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .model import DescriptionModel
from .vocab import VOCAB_PREFIX, QualifiedName, Vocabulary


class NodeCategory(Enum):
    PT_OPERATOR = "PT_Operator"
    PT_MACHINE = "PT_Machine"
    PT_SYSTEM_ENVIRONMENT = "PT_SystemEnvironment"
    PT_SYSTEM = "PT_System"
    PT_SENSORS = "PT_Sensors"
    DT_MODEL_DATA = "DT_ModelData"
    DT_ENABLER = "DT_Enabler"
    DT_SERVICE = "DT_Service"


PT_CATEGORIES = (
    NodeCategory.PT_OPERATOR,
    NodeCategory.PT_MACHINE,
    NodeCategory.PT_SYSTEM_ENVIRONMENT,
    NodeCategory.PT_SYSTEM,
    NodeCategory.PT_SENSORS,
)

DT_CATEGORIES = (
    NodeCategory.DT_MODEL_DATA,
    NodeCategory.DT_ENABLER,
    NodeCategory.DT_SERVICE,
)

# Concept -> category, checked in priority order against the instance kind's
# ancestor set (nearest win is resolved by walking ancestors breadth-first).
_CATEGORY_BY_CONCEPT: tuple[tuple[str, NodeCategory], ...] = (
    ("Operator", NodeCategory.PT_OPERATOR),
    ("Machine", NodeCategory.PT_MACHINE),
    ("SystemEnvironment", NodeCategory.PT_SYSTEM_ENVIRONMENT),
    ("System", NodeCategory.PT_SYSTEM),
    ("SensorsDataTransmission", NodeCategory.PT_SENSORS),
    ("Model", NodeCategory.DT_MODEL_DATA),
    ("Data", NodeCategory.DT_MODEL_DATA),
    ("Enabler", NodeCategory.DT_ENABLER),
    ("Service", NodeCategory.DT_SERVICE),
)

# Edge relation -> (source layer set, target layer set). PT sources feed the
# digital side only through asData (sensor-transmitted data into Models/Data).
_EDGE_RULES: dict[str, tuple[tuple[NodeCategory, ...], tuple[NodeCategory, ...]]] = {
    "enables": ((NodeCategory.DT_ENABLER,), (NodeCategory.DT_SERVICE,)),
    "inputTo": ((NodeCategory.DT_MODEL_DATA,), (NodeCategory.DT_ENABLER,)),
    "asData": ((NodeCategory.PT_SENSORS,), (NodeCategory.DT_MODEL_DATA,)),
}


class UnknownNodeError(KeyError):
    """A closure was requested for an id the graph does not contain."""


@dataclass(frozen=True)
class Node:
    id: str
    label: str
    category: NodeCategory


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    relation: str


@dataclass(frozen=True)
class ConstellationGraph:
    nodes: tuple[Node, ...] = ()
    edges: tuple[Edge, ...] = ()

    def __post_init__(self) -> None:
        by_id = {node.id: node for node in self.nodes}
        if len(by_id) != len(self.nodes):
            raise ValueError("duplicate node id in constellation graph")
        for edge in self.edges:
            if edge.src not in by_id or edge.dst not in by_id:
                raise ValueError(f"edge {edge.src}->{edge.dst} references a missing node")
            if edge.src == edge.dst:
                raise ValueError(f"self edge on {edge.src}")
            rule = _EDGE_RULES.get(edge.relation)
            if rule is not None:
                src_ok, dst_ok = rule
                if (
                    by_id[edge.src].category not in src_ok
                    or by_id[edge.dst].category not in dst_ok
                ):
                    raise ValueError(
                        f"edge {edge.src}->{edge.dst} ({edge.relation}) breaks "
                        "the layer rules"
                    )

    def node(self, node_id: str) -> Node | None:
        for node in self.nodes:
            if node.id == node_id:
                return node
        return None

    def node_ids(self) -> tuple[str, ...]:
        return tuple(node.id for node in self.nodes)


def category_of(
    kind: QualifiedName, vocab: Vocabulary
) -> NodeCategory | None:
    """Nearest categorized ancestor of *kind*, by breadth-first distance.

    Distance ties resolve by the fixed priority order of the category table.
    """
    if vocab.concept(kind) is None:
        return None
    frontier: deque[QualifiedName] = deque((kind,))
    seen = {kind}
    while frontier:
        level = list(frontier)
        frontier.clear()
        level_locals = {
            name.local for name in level if name.prefix == VOCAB_PREFIX
        }
        for concept_local, category in _CATEGORY_BY_CONCEPT:
            if concept_local in level_locals:
                return category
        for name in level:
            for parent in vocab.parents_of(name):
                if parent not in seen:
                    seen.add(parent)
                    frontier.append(parent)
    return None


def build_constellation(
    model: DescriptionModel,
    vocab: Vocabulary,
    include_provided: bool = False,
) -> ConstellationGraph:
    """Project *model* onto the constellation drawing.

    One node per instance whose kind has a drawable category; one edge per
    enables/inputTo/asData/provides assertion between two drawn nodes.
    Assertions pointing outside the drawn node set are dropped, as are edges
    that would break the layer rules. With *include_provided*, provided
    things that are declared in the model but have no category of their own
    are drawn as satellite nodes in the service layer.
    """
    nodes: list[Node] = []
    by_id: dict[str, Node] = {}
    for inst in model.instances:
        if inst.local_id in by_id:
            continue
        category = category_of(inst.kind, vocab)
        if category is None:
            continue
        node = Node(inst.local_id, inst.local_id, category)
        nodes.append(node)
        by_id[node.id] = node

    if include_provided:
        for inst in model.instances:
            src = by_id.get(inst.local_id)
            if src is None or src.category is not NodeCategory.DT_SERVICE:
                continue
            for rel in inst.relations:
                if rel.name != "provides":
                    continue
                target = rel.target.local
                if target in by_id or model.instance(target) is None:
                    continue
                node = Node(target, target, NodeCategory.DT_SERVICE)
                nodes.append(node)
                by_id[target] = node

    edges: list[Edge] = []
    seen_edges: set[tuple[str, str, str]] = set()
    for inst in model.instances:
        src = by_id.get(inst.local_id)
        if src is None:
            continue
        for rel in inst.relations:
            if rel.name not in ("enables", "inputTo", "asData", "provides"):
                continue
            dst = by_id.get(rel.target.local)
            if dst is None or dst.id == src.id:
                continue
            rule = _EDGE_RULES.get(rel.name)
            if rule is not None and (
                src.category not in rule[0] or dst.category not in rule[1]
            ):
                continue
            key = (src.id, dst.id, rel.name)
            if key in seen_edges:
                continue
            seen_edges.add(key)
            edges.append(Edge(src.id, dst.id, rel.name))

    return ConstellationGraph(tuple(nodes), tuple(edges))


def closure(graph: ConstellationGraph, start: str, direction: str = "both") -> set[str]:
    """Ids reachable from *start* along edges; includes *start* itself.

    ``direction`` is ``forward`` (follow edges src->dst), ``backward``
    (dst->src), or ``both``.
    """
    if direction not in ("forward", "backward", "both"):
        raise ValueError(f"unknown closure direction {direction!r}")
    if graph.node(start) is None:
        raise UnknownNodeError(start)
    forward: dict[str, list[str]] = {}
    backward: dict[str, list[str]] = {}
    for edge in graph.edges:
        forward.setdefault(edge.src, []).append(edge.dst)
        backward.setdefault(edge.dst, []).append(edge.src)

    out = {start}
    frontier = deque((start,))
    while frontier:
        node_id = frontier.popleft()
        neighbors: list[str] = []
        if direction in ("forward", "both"):
            neighbors.extend(forward.get(node_id, ()))
        if direction in ("backward", "both"):
            neighbors.extend(backward.get(node_id, ()))
        for nxt in neighbors:
            if nxt not in out:
                out.add(nxt)
                frontier.append(nxt)
    return out


def closure_json(graph: ConstellationGraph, start: str, direction: str = "both") -> str:
    """The closure as compact JSON with sorted ids — the wire format."""
    ids = sorted(closure(graph, start, direction))
    return json.dumps({"ids": ids}, separators=(",", ":"))


# -- layout ---------------------------------------------------------------------

LAYER_GAP = 180.0
NODE_GAP = 140.0
PT_COLUMN_X = 0.0
PT_ROW_GAP = 140.0
DT_REGION_X = 400.0

_DT_LAYER_Y = {
    NodeCategory.DT_SERVICE: 0.0,
    NodeCategory.DT_ENABLER: LAYER_GAP,
    NodeCategory.DT_MODEL_DATA: 2 * LAYER_GAP,
}

_PT_ORDER = {category: i for i, category in enumerate(PT_CATEGORIES)}


@dataclass(frozen=True)
class LayoutResult:
    positions: dict[str, tuple[float, float]]
    size: tuple[float, float]
    node_order: tuple[str, ...] = field(default=())


def count_crossings(
    ordered_upper: list[str], ordered_lower: list[str], edges: list[tuple[str, str]]
) -> int:
    """Crossings between two adjacent layers for the given left-to-right orders."""
    upper_pos = {node_id: i for i, node_id in enumerate(ordered_upper)}
    lower_pos = {node_id: i for i, node_id in enumerate(ordered_lower)}
    spans = [
        (upper_pos[a], lower_pos[b])
        for a, b in edges
        if a in upper_pos and b in lower_pos
    ]
    crossings = 0
    for i in range(len(spans)):
        for j in range(i + 1, len(spans)):
            (a1, b1), (a2, b2) = spans[i], spans[j]
            if (a1 - a2) * (b1 - b2) < 0:
                crossings += 1
    return crossings


def _layer_edges(
    graph: ConstellationGraph,
) -> dict[tuple[NodeCategory, NodeCategory], list[tuple[str, str]]]:
    by_id = {node.id: node for node in graph.nodes}
    out: dict[tuple[NodeCategory, NodeCategory], list[tuple[str, str]]] = {}
    for edge in graph.edges:
        src_cat = by_id[edge.src].category
        dst_cat = by_id[edge.dst].category
        if src_cat in DT_CATEGORIES and dst_cat in DT_CATEGORIES:
            out.setdefault((src_cat, dst_cat), []).append((edge.src, edge.dst))
    return out


def _total_crossings(
    orders: dict[NodeCategory, list[str]],
    layer_edges: dict[tuple[NodeCategory, NodeCategory], list[tuple[str, str]]],
) -> int:
    total = 0
    for (src_cat, dst_cat), edges in layer_edges.items():
        total += count_crossings(orders[src_cat], orders[dst_cat], edges)
    return total


def _barycenter_pass(
    target: list[str],
    anchor: list[str],
    adjacency: dict[str, list[str]],
) -> list[str]:
    anchor_pos = {node_id: float(i) for i, node_id in enumerate(anchor)}
    current_pos = {node_id: float(i) for i, node_id in enumerate(target)}

    def weight(node_id: str) -> tuple[float, str]:
        neighbors = [anchor_pos[n] for n in adjacency.get(node_id, ()) if n in anchor_pos]
        if not neighbors:
            return (current_pos[node_id], node_id)
        return (sum(neighbors) / len(neighbors), node_id)

    return sorted(target, key=weight)


def layout(graph: ConstellationGraph) -> LayoutResult:
    """Position every node; deterministic for equal graphs.

    The digital layers start in id order and take four alternating barycenter
    sweeps; the best ordering seen (the seed included) is kept, so the result
    never has more digital-layer crossings than the id-sorted baseline.
    """
    pt_nodes = sorted(
        (node for node in graph.nodes if node.category in PT_CATEGORIES),
        key=lambda node: (_PT_ORDER[node.category], node.id),
    )
    orders: dict[NodeCategory, list[str]] = {
        category: sorted(
            node.id for node in graph.nodes if node.category is category
        )
        for category in DT_CATEGORIES
    }

    layer_edges = _layer_edges(graph)

    # Adjacency between adjacent digital layers, keyed by the node being moved.
    up_from_modeldata: dict[str, list[str]] = {}
    down_from_enabler_md: dict[str, list[str]] = {}
    for src, dst in layer_edges.get(
        (NodeCategory.DT_MODEL_DATA, NodeCategory.DT_ENABLER), []
    ):
        up_from_modeldata.setdefault(dst, []).append(src)
        down_from_enabler_md.setdefault(src, []).append(dst)
    up_from_enabler: dict[str, list[str]] = {}
    down_from_service: dict[str, list[str]] = {}
    for src, dst in layer_edges.get(
        (NodeCategory.DT_ENABLER, NodeCategory.DT_SERVICE), []
    ):
        up_from_enabler.setdefault(dst, []).append(src)
        down_from_service.setdefault(src, []).append(dst)

    best = {category: list(order) for category, order in orders.items()}
    best_crossings = _total_crossings(best, layer_edges)

    for sweep in range(4):
        if sweep % 2 == 0:
            orders[NodeCategory.DT_ENABLER] = _barycenter_pass(
                orders[NodeCategory.DT_ENABLER],
                orders[NodeCategory.DT_MODEL_DATA],
                up_from_modeldata,
            )
            orders[NodeCategory.DT_SERVICE] = _barycenter_pass(
                orders[NodeCategory.DT_SERVICE],
                orders[NodeCategory.DT_ENABLER],
                up_from_enabler,
            )
        else:
            orders[NodeCategory.DT_ENABLER] = _barycenter_pass(
                orders[NodeCategory.DT_ENABLER],
                orders[NodeCategory.DT_SERVICE],
                down_from_service,
            )
            orders[NodeCategory.DT_MODEL_DATA] = _barycenter_pass(
                orders[NodeCategory.DT_MODEL_DATA],
                orders[NodeCategory.DT_ENABLER],
                down_from_enabler_md,
            )
        crossings = _total_crossings(orders, layer_edges)
        if crossings < best_crossings:
            best_crossings = crossings
            best = {category: list(order) for category, order in orders.items()}

    positions: dict[str, tuple[float, float]] = {}
    for i, node in enumerate(pt_nodes):
        positions[node.id] = (PT_COLUMN_X, i * PT_ROW_GAP)
    for category in DT_CATEGORIES:
        y = _DT_LAYER_Y[category]
        for i, node_id in enumerate(best[category]):
            positions[node_id] = (DT_REGION_X + i * NODE_GAP, y)

    node_order = tuple(
        [node.id for node in pt_nodes]
        + best[NodeCategory.DT_MODEL_DATA]
        + best[NodeCategory.DT_ENABLER]
        + best[NodeCategory.DT_SERVICE]
    )

    if positions:
        # All coordinates are non-negative, so bounding from the origin keeps
        # every position inside the reported size.
        max_x = max(pos[0] for pos in positions.values())
        max_y = max(pos[1] for pos in positions.values())
        size = (max_x + NODE_GAP, max_y + PT_ROW_GAP)
    else:
        size = (0.0, 0.0)
    return LayoutResult(positions, size, node_order)
