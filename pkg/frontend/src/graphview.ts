import type { GraphDoc, GraphEdge } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

const NODE_HALF_W = 62;
const NODE_HALF_H = 22;
const MARGIN = 90;

const CATEGORY_CLASS: Record<string, string> = {
  PT_Operator: "cat-pt-operator",
  PT_Machine: "cat-pt-machine",
  PT_SystemEnvironment: "cat-pt-environment",
  PT_System: "cat-pt-system",
  PT_Sensors: "cat-pt-sensors",
  DT_ModelData: "cat-dt-modeldata",
  DT_Enabler: "cat-dt-enabler",
  DT_Service: "cat-dt-service",
};

const FALLBACK_CLASS = "cat-unknown";

export interface GraphViewHandlers {
  onHover(id: string | null): void;
  onClick(id: string): void;
}

interface Point {
  x: number;
  y: number;
}

/** Move from a node's center toward a target, stopping at the node's box edge. */
function clipToBox(center: Point, toward: Point): Point {
  const dx = toward.x - center.x;
  const dy = toward.y - center.y;
  if (dx === 0 && dy === 0) {
    return center;
  }
  const tx = dx !== 0 ? NODE_HALF_W / Math.abs(dx) : Number.POSITIVE_INFINITY;
  const ty = dy !== 0 ? NODE_HALF_H / Math.abs(dy) : Number.POSITIVE_INFINITY;
  const t = Math.min(tx, ty, 1);
  return { x: center.x + dx * t, y: center.y + dy * t };
}

/**
 * Renders the constellation exactly as the gateway laid it out: every node is
 * drawn at its server-provided coordinates and no positions are recomputed on
 * the client. Nodes get a category-specific style (with a fallback for
 * categories this bundle does not know) and edges are drawn as arrows.
 */
export class GraphView {
  private readonly nodeElements = new Map<string, SVGGElement>();
  private readonly edgeElements: { edge: GraphEdge; element: SVGLineElement }[] = [];
  private readonly warnedCategories = new Set<string>();
  private highlight: ReadonlySet<string> | null = null;

  constructor(
    readonly container: HTMLElement,
    readonly doc: GraphDoc,
    readonly handlers: GraphViewHandlers,
  ) {
    this.render();
  }

  private render(): void {
    this.container.textContent = "";
    if (this.doc.nodes.length === 0) {
      const notice = this.container.ownerDocument.createElement("div");
      notice.className = "empty-notice";
      notice.textContent = "no components";
      this.container.appendChild(notice);
      return;
    }

    const width = Math.max(...this.doc.nodes.map((n) => n.x)) + MARGIN + NODE_HALF_W;
    const height = Math.max(...this.doc.nodes.map((n) => n.y)) + MARGIN + NODE_HALF_H;
    const svg = this.container.ownerDocument.createElementNS(SVG_NS, "svg");
    svg.setAttribute("class", "graph-canvas");
    svg.setAttribute("viewBox", `${-MARGIN} ${-MARGIN} ${width + MARGIN} ${height + MARGIN}`);
    svg.setAttribute("role", "img");

    const defs = this.container.ownerDocument.createElementNS(SVG_NS, "defs");
    const marker = this.container.ownerDocument.createElementNS(SVG_NS, "marker");
    marker.setAttribute("id", "arrowhead");
    marker.setAttribute("markerWidth", "10");
    marker.setAttribute("markerHeight", "8");
    marker.setAttribute("refX", "9");
    marker.setAttribute("refY", "4");
    marker.setAttribute("orient", "auto");
    const tip = this.container.ownerDocument.createElementNS(SVG_NS, "path");
    tip.setAttribute("d", "M0,0 L10,4 L0,8 Z");
    tip.setAttribute("class", "arrowhead");
    marker.appendChild(tip);
    defs.appendChild(marker);
    svg.appendChild(defs);

    const centers = new Map<string, Point>();
    for (const node of this.doc.nodes) {
      centers.set(node.id, { x: node.x, y: node.y });
    }

    for (const edge of this.doc.edges) {
      const src = centers.get(edge.src);
      const dst = centers.get(edge.dst);
      if (src === undefined || dst === undefined) {
        continue;
      }
      const start = clipToBox(src, dst);
      const end = clipToBox(dst, src);
      const line = this.container.ownerDocument.createElementNS(SVG_NS, "line");
      line.setAttribute("class", "edge");
      line.setAttribute("x1", String(start.x));
      line.setAttribute("y1", String(start.y));
      line.setAttribute("x2", String(end.x));
      line.setAttribute("y2", String(end.y));
      line.setAttribute("marker-end", "url(#arrowhead)");
      line.setAttribute("data-src", edge.src);
      line.setAttribute("data-dst", edge.dst);
      line.setAttribute("data-relation", edge.relation);
      const title = this.container.ownerDocument.createElementNS(SVG_NS, "title");
      title.textContent = `${edge.src} ${edge.relation} ${edge.dst}`;
      line.appendChild(title);
      svg.appendChild(line);
      this.edgeElements.push({ edge, element: line });
    }

    for (const node of this.doc.nodes) {
      let categoryClass = CATEGORY_CLASS[node.category];
      if (categoryClass === undefined) {
        if (!this.warnedCategories.has(node.category)) {
          this.warnedCategories.add(node.category);
          console.warn(`unknown node category "${node.category}"; using fallback style`);
        }
        categoryClass = FALLBACK_CLASS;
      }
      const group = this.container.ownerDocument.createElementNS(SVG_NS, "g");
      group.setAttribute("class", `node ${categoryClass}`);
      group.setAttribute("data-id", node.id);
      group.setAttribute("data-category", node.category);
      group.setAttribute("tabindex", "0");

      const rect = this.container.ownerDocument.createElementNS(SVG_NS, "rect");
      rect.setAttribute("x", String(node.x - NODE_HALF_W));
      rect.setAttribute("y", String(node.y - NODE_HALF_H));
      rect.setAttribute("width", String(NODE_HALF_W * 2));
      rect.setAttribute("height", String(NODE_HALF_H * 2));
      rect.setAttribute("rx", "8");
      group.appendChild(rect);

      const text = this.container.ownerDocument.createElementNS(SVG_NS, "text");
      text.setAttribute("x", String(node.x));
      text.setAttribute("y", String(node.y + 4));
      text.setAttribute("text-anchor", "middle");
      text.textContent = node.label;
      group.appendChild(text);

      group.addEventListener("mouseenter", () => this.handlers.onHover(node.id));
      group.addEventListener("mouseleave", () => this.handlers.onHover(null));
      group.addEventListener("click", () => this.handlers.onClick(node.id));

      svg.appendChild(group);
      this.nodeElements.set(node.id, group);
    }

    this.container.appendChild(svg);
  }

  /**
   * Dim everything outside the given id set and emphasize edges whose both
   * endpoints are inside it. Passing null clears the highlight.
   */
  applyHighlight(ids: ReadonlySet<string> | null): void {
    this.highlight = ids;
    for (const [id, element] of this.nodeElements) {
      const dimmed = ids !== null && !ids.has(id);
      element.classList.toggle("dimmed", dimmed);
    }
    for (const { edge, element } of this.edgeElements) {
      const inside = ids !== null && ids.has(edge.src) && ids.has(edge.dst);
      element.classList.toggle("emphasized", inside);
      element.classList.toggle("dimmed", ids !== null && !inside);
    }
  }

  currentHighlight(): ReadonlySet<string> | null {
    return this.highlight;
  }

  nodeElement(id: string): SVGGElement | undefined {
    return this.nodeElements.get(id);
  }

  /** Ids of the nodes currently drawn at full strength (i.e. not dimmed). */
  visibleIds(): Set<string> {
    const ids = new Set<string>();
    for (const [id, element] of this.nodeElements) {
      if (!element.classList.contains("dimmed")) {
        ids.add(id);
      }
    }
    return ids;
  }
}
