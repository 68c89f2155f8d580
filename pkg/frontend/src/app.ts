import { ApiError, GatewayClient, StreamManager } from "./api.js";
import { LiveChart } from "./chart.js";
import { GraphView } from "./graphview.js";
import {
  clearBanner,
  clearDetails,
  renderCharacteristics,
  renderDetails,
  renderErrorBanner,
  renderScript,
  showToast,
} from "./panels.js";
import {
  activeHighlight,
  clearSelection,
  clickNode,
  closePanel,
  hoverNode,
  initialState,
  openPanel,
  setDirection,
  type ViewState,
} from "./state.js";
import { DIRECTIONS, type Direction, type GraphDoc, type StreamEvent } from "./types.js";

/** The fixed page regions the application renders into. */
export interface Shell {
  banner: HTMLElement;
  toolbar: HTMLElement;
  graph: HTMLElement;
  details: HTMLElement;
  charts: HTMLElement;
  script: HTMLElement;
  characteristics: HTMLElement;
  toasts: HTMLElement;
}

export function queryShell(root: Document): Shell {
  const byId = (id: string): HTMLElement => {
    const el = root.getElementById(id);
    if (el === null) {
      throw new Error(`page shell is missing #${id}`);
    }
    return el;
  };
  return {
    banner: byId("banner"),
    toolbar: byId("toolbar"),
    graph: byId("graph"),
    details: byId("details"),
    charts: byId("charts"),
    script: byId("script"),
    characteristics: byId("characteristics"),
    toasts: byId("toasts"),
  };
}

interface OpenChart {
  chart: LiveChart;
  listener: (event: StreamEvent) => void;
  panel: HTMLElement;
}

/**
 * Wires the graph view, the side panels, and the live stream together.
 *
 * The highlight on screen always mirrors the gateway's closure answer for the
 * active node: every hover/click/direction change asks the gateway and applies
 * exactly the returned id set. Requests race safely — only the latest one may
 * touch the view.
 */
export class App {
  state: ViewState = initialState();
  private highlightToken = 0;
  private pendingHighlight: Promise<void> | null = null;
  private readonly openCharts = new Map<string, OpenChart>();

  private constructor(
    readonly shell: Shell,
    readonly client: GatewayClient,
    readonly stream: StreamManager,
    readonly graph: GraphDoc,
    readonly view: GraphView,
  ) {}

  static async create(shell: Shell, client: GatewayClient, stream: StreamManager): Promise<App> {
    const graph = await client.graph();
    let app: App;
    const view = new GraphView(shell.graph, graph, {
      onHover: (id) => app.handleHover(id),
      onClick: (id) => app.handleClick(id),
    });
    app = new App(shell, client, stream, graph, view);
    app.buildToolbar();
    app.installKeyboard();
    stream.start();
    void app.loadCharacteristics();
    return app;
  }

  /** Resolves once no highlight request is in flight (used by tests). */
  async settle(): Promise<void> {
    while (this.pendingHighlight !== null) {
      await this.pendingHighlight;
    }
  }

  handleHover(id: string | null): void {
    this.state = hoverNode(this.state, id);
    this.refreshHighlight();
  }

  handleClick(id: string): void {
    const wasSelected = this.state.selectedNode === id;
    this.state = clickNode(this.state, id);
    this.refreshHighlight();
    if (wasSelected) {
      this.closeDetails();
    } else {
      void this.openDetails(id);
    }
  }

  handleEscape(): void {
    if (this.state.selectedNode === null) {
      return;
    }
    this.state = clearSelection(this.state);
    this.refreshHighlight();
    this.closeDetails();
  }

  handleDirectionChange(direction: Direction): void {
    this.state = setDirection(this.state, direction);
    this.refreshHighlight();
  }

  /**
   * Ask the gateway for the active node's closure and show exactly that set.
   * A stale response (superseded by a newer interaction) is discarded.
   */
  private refreshHighlight(): void {
    const active = activeHighlight(this.state);
    const token = ++this.highlightToken;
    if (active === null) {
      this.view.applyHighlight(null);
      this.pendingHighlight = null;
      return;
    }
    const task = (async () => {
      try {
        const closure = await this.client.closure(active.nodeId, active.direction);
        if (token === this.highlightToken) {
          this.view.applyHighlight(new Set(closure.ids));
        }
      } catch (err) {
        if (token !== this.highlightToken) {
          return;
        }
        this.view.applyHighlight(null);
        const message =
          err instanceof ApiError && err.status === 404
            ? `${active.nodeId}: no such component`
            : `highlight failed: ${err instanceof Error ? err.message : String(err)}`;
        showToast(this.shell.toasts, message);
      } finally {
        if (token === this.highlightToken) {
          this.pendingHighlight = null;
        }
      }
    })();
    this.pendingHighlight = task;
  }

  private async openDetails(id: string): Promise<void> {
    this.state = openPanel(this.state, { kind: "details" });
    try {
      const component = await this.client.component(id);
      if (this.state.selectedNode !== id) {
        return;
      }
      renderDetails(this.shell.details, component, {
        onOpenChart: (topic) => void this.openChart(topic),
        onOpenScript: (nodeId) => void this.openScript(nodeId),
      });
    } catch (err) {
      showToast(
        this.shell.toasts,
        `details unavailable: ${err instanceof Error ? err.message : String(err)}`,
      );
    }
  }

  private closeDetails(): void {
    this.state = closePanel(this.state, { kind: "details" });
    clearDetails(this.shell.details);
  }

  /**
   * Open a live chart for one topic: subscribe to the stream first (buffering
   * events that arrive mid-backfill), backfill history, then replay the buffer
   * — the chart's sequence guard keeps the two sources from overlapping.
   */
  async openChart(topic: string): Promise<void> {
    if (this.openCharts.has(topic)) {
      return;
    }
    this.state = openPanel(this.state, { kind: "chart", topic });
    const doc = this.shell.charts.ownerDocument;
    const panel = doc.createElement("section");
    panel.className = "chart-panel";
    panel.dataset.topic = topic;
    const header = doc.createElement("div");
    header.className = "chart-header";
    const title = doc.createElement("h2");
    title.textContent = topic;
    header.appendChild(title);
    const close = doc.createElement("button");
    close.className = "close-chart";
    close.textContent = "close";
    header.appendChild(close);
    panel.appendChild(header);
    const body = doc.createElement("div");
    body.className = "chart-body";
    panel.appendChild(body);
    this.shell.charts.appendChild(panel);

    const chart = new LiveChart(body, topic);
    const pending: StreamEvent[] = [];
    const buffering = (event: StreamEvent) => pending.push(event);
    this.stream.onEvent(buffering);
    try {
      const history = await this.client.samples(topic);
      chart.backfill(history.samples);
    } catch (err) {
      showToast(
        this.shell.toasts,
        `no history for ${topic}: ${err instanceof Error ? err.message : String(err)}`,
      );
    } finally {
      this.stream.offEvent(buffering);
    }
    for (const event of pending) {
      chart.handleEvent(event);
    }
    const listener = (event: StreamEvent) => chart.handleEvent(event);
    this.stream.onEvent(listener);
    this.stream.onReconnect(() => void this.resyncChart(topic));
    close.addEventListener("click", () => this.closeChart(topic));
    this.openCharts.set(topic, { chart, listener, panel });
  }

  /** After a stream reconnect, fetch what this chart missed using its own cursor. */
  private async resyncChart(topic: string): Promise<void> {
    const open = this.openCharts.get(topic);
    if (open === undefined) {
      return;
    }
    try {
      const missed = await this.client.samples(topic, open.chart.lastSeq);
      open.chart.backfill(missed.samples);
    } catch {
      // the next reconnect or live sample will catch the chart up
    }
  }

  closeChart(topic: string): void {
    const open = this.openCharts.get(topic);
    if (open === undefined) {
      return;
    }
    this.stream.offEvent(open.listener);
    open.panel.remove();
    this.openCharts.delete(topic);
    this.state = closePanel(this.state, { kind: "chart", topic });
  }

  chartFor(topic: string): LiveChart | undefined {
    return this.openCharts.get(topic)?.chart;
  }

  async openScript(nodeId: string): Promise<void> {
    this.state = openPanel(this.state, { kind: "script" });
    try {
      const text = await this.client.script(nodeId);
      renderScript(this.shell.script, nodeId, text);
    } catch (err) {
      this.state = closePanel(this.state, { kind: "script" });
      const message =
        err instanceof ApiError && err.status === 404
          ? `${nodeId}: not connected`
          : `script unavailable: ${err instanceof Error ? err.message : String(err)}`;
      showToast(this.shell.toasts, message);
    }
  }

  private buildToolbar(): void {
    const doc = this.shell.toolbar.ownerDocument;
    this.shell.toolbar.textContent = "";
    const label = doc.createElement("span");
    label.className = "toolbar-label";
    label.textContent = "highlight direction:";
    this.shell.toolbar.appendChild(label);
    for (const direction of DIRECTIONS) {
      const wrapper = doc.createElement("label");
      wrapper.className = "direction-option";
      const radio = doc.createElement("input");
      radio.type = "radio";
      radio.name = "direction";
      radio.value = direction;
      radio.checked = direction === this.state.highlightDirection;
      radio.addEventListener("change", () => {
        if (radio.checked) {
          this.handleDirectionChange(direction);
        }
      });
      wrapper.appendChild(radio);
      wrapper.appendChild(doc.createTextNode(direction));
      this.shell.toolbar.appendChild(wrapper);
    }
    const hint = doc.createElement("span");
    hint.className = "toolbar-hint";
    hint.textContent = "hover previews, click pins, escape clears";
    this.shell.toolbar.appendChild(hint);
  }

  private installKeyboard(): void {
    this.shell.graph.ownerDocument.addEventListener("keydown", (event) => {
      if (event.key === "Escape") {
        this.handleEscape();
      }
    });
  }

  private async loadCharacteristics(): Promise<void> {
    try {
      const rows = await this.client.characteristics();
      renderCharacteristics(this.shell.characteristics, rows);
    } catch {
      // the table is informational; the graph remains usable without it
    }
  }
}

/**
 * Load the graph and start the application. When the gateway cannot be
 * reached, a visible error banner with a retry button is shown instead and
 * null is returned.
 */
export async function boot(shell: Shell, baseUrl = ""): Promise<App | null> {
  const client = new GatewayClient(baseUrl);
  const stream = new StreamManager(baseUrl);
  try {
    const app = await App.create(shell, client, stream);
    clearBanner(shell.banner);
    return app;
  } catch (err) {
    stream.stop();
    const message = err instanceof Error ? err.message : String(err);
    renderErrorBanner(shell.banner, message, () => {
      void boot(shell, baseUrl);
    });
    return null;
  }
}
