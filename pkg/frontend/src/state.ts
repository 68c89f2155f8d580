import type { Direction } from "./types.js";

export type Panel =
  | { kind: "details" }
  | { kind: "chart"; topic: string }
  | { kind: "script" };

export interface ViewState {
  /** Node pinned by click, if any. */
  selectedNode: string | null;
  /** Node currently under the pointer, if any. */
  hoveredNode: string | null;
  /** Direction applied to the pinned highlight. Hover always uses "both". */
  highlightDirection: Direction;
  /** Open side panels; at most one of each kind, charts keyed by topic. */
  openPanels: Panel[];
}

export function initialState(): ViewState {
  return {
    selectedNode: null,
    hoveredNode: null,
    highlightDirection: "forward",
    openPanels: [],
  };
}

export function hoverNode(state: ViewState, id: string | null): ViewState {
  return { ...state, hoveredNode: id };
}

/** Click pins the node; clicking the pinned node again releases it. */
export function clickNode(state: ViewState, id: string): ViewState {
  if (state.selectedNode === id) {
    return { ...state, selectedNode: null };
  }
  return { ...state, selectedNode: id };
}

export function clearSelection(state: ViewState): ViewState {
  return { ...state, selectedNode: null };
}

export function setDirection(state: ViewState, direction: Direction): ViewState {
  return { ...state, highlightDirection: direction };
}

function panelKey(panel: Panel): string {
  return panel.kind === "chart" ? `chart:${panel.topic}` : panel.kind;
}

export function openPanel(state: ViewState, panel: Panel): ViewState {
  const key = panelKey(panel);
  if (state.openPanels.some((p) => panelKey(p) === key)) {
    return state;
  }
  return { ...state, openPanels: [...state.openPanels, panel] };
}

export function closePanel(state: ViewState, panel: Panel): ViewState {
  const key = panelKey(panel);
  return { ...state, openPanels: state.openPanels.filter((p) => panelKey(p) !== key) };
}

export function isPanelOpen(state: ViewState, panel: Panel): boolean {
  const key = panelKey(panel);
  return state.openPanels.some((p) => panelKey(p) === key);
}

export interface ActiveHighlight {
  nodeId: string;
  direction: Direction;
}

/**
 * The highlight that should be on screen: a pinned node wins and uses the
 * chosen direction; otherwise a hovered node highlights in both directions;
 * otherwise nothing is highlighted.
 */
export function activeHighlight(state: ViewState): ActiveHighlight | null {
  if (state.selectedNode !== null) {
    return { nodeId: state.selectedNode, direction: state.highlightDirection };
  }
  if (state.hoveredNode !== null) {
    return { nodeId: state.hoveredNode, direction: "both" };
  }
  return null;
}
