import type { CharacteristicRow, ComponentDoc } from "./types.js";

function element<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const el = doc.createElement(tag);
  if (className !== undefined) {
    el.className = className;
  }
  if (text !== undefined) {
    el.textContent = text;
  }
  return el;
}

/** A dismissable full-width error banner with a retry button. */
export function renderErrorBanner(
  container: HTMLElement,
  message: string,
  onRetry: () => void,
): HTMLElement {
  container.textContent = "";
  const doc = container.ownerDocument;
  const banner = element(doc, "div", "error-banner");
  banner.setAttribute("role", "alert");
  banner.appendChild(element(doc, "span", "error-message", message));
  const retry = element(doc, "button", "retry", "retry");
  retry.addEventListener("click", () => {
    container.textContent = "";
    onRetry();
  });
  banner.appendChild(retry);
  container.appendChild(banner);
  return banner;
}

export function clearBanner(container: HTMLElement): void {
  container.textContent = "";
}

/** A transient notification message. */
export function showToast(container: HTMLElement, message: string, ttlMs = 4000): HTMLElement {
  const doc = container.ownerDocument;
  const toast = element(doc, "div", "toast", message);
  container.appendChild(toast);
  setTimeout(() => {
    toast.remove();
  }, ttlMs);
  return toast;
}

export interface DetailsHandlers {
  onOpenChart(topic: string): void;
  onOpenScript(nodeId: string): void;
}

/**
 * Shows what the gateway reports for one component: its kind, stated
 * description, relations, scalar assertions, and — when the component is
 * bound to live data or a behavioral script — buttons to open those views.
 * Unbound components get a "not connected" note and no buttons.
 */
export function renderDetails(
  container: HTMLElement,
  component: ComponentDoc,
  handlers: DetailsHandlers,
): void {
  container.textContent = "";
  const doc = container.ownerDocument;
  container.appendChild(element(doc, "h2", "details-title", component.id));
  container.appendChild(element(doc, "p", "details-kind", component.kind));
  if (component.desc !== null) {
    container.appendChild(element(doc, "p", "details-desc", component.desc));
  }

  if (component.relations.length > 0) {
    const list = element(doc, "ul", "details-relations");
    for (const relation of component.relations) {
      list.appendChild(element(doc, "li", undefined, `${relation.name} → ${relation.target}`));
    }
    container.appendChild(list);
  }

  if (component.scalars.length > 0) {
    const list = element(doc, "ul", "details-scalars");
    for (const scalar of component.scalars) {
      list.appendChild(element(doc, "li", undefined, `${scalar.name} = ${String(scalar.value)}`));
    }
    container.appendChild(list);
  }

  if (component.binding === null) {
    container.appendChild(element(doc, "p", "not-connected", "not connected"));
    return;
  }

  const actions = element(doc, "div", "details-actions");
  const topic = component.binding.topic;
  if (topic !== undefined) {
    const chartButton = element(doc, "button", "open-chart", `chart ${topic}`);
    chartButton.dataset.topic = topic;
    chartButton.addEventListener("click", () => handlers.onOpenChart(topic));
    actions.appendChild(chartButton);
  }
  if (component.binding.script !== undefined) {
    const scriptButton = element(doc, "button", "open-script", "script");
    scriptButton.addEventListener("click", () => handlers.onOpenScript(component.id));
    actions.appendChild(scriptButton);
  }
  container.appendChild(actions);
}

export function clearDetails(container: HTMLElement): void {
  container.textContent = "";
}

/** Plain-text script view with line numbers. */
export function renderScript(container: HTMLElement, nodeId: string, text: string): void {
  container.textContent = "";
  const doc = container.ownerDocument;
  container.appendChild(element(doc, "h2", "script-title", nodeId));
  const lines = text.split("\n");
  if (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop();
  }
  const list = element(doc, "ol", "script-lines");
  for (const line of lines) {
    const item = element(doc, "li");
    item.textContent = line === "" ? " " : line;
    list.appendChild(item);
  }
  container.appendChild(list);
}

export function renderCharacteristics(container: HTMLElement, rows: CharacteristicRow[]): void {
  container.textContent = "";
  const doc = container.ownerDocument;
  container.appendChild(element(doc, "h2", undefined, "reported characteristics"));
  const table = element(doc, "table", "characteristics");
  const head = element(doc, "tr");
  for (const heading of ["code", "characteristic", "reported", "sources"]) {
    head.appendChild(element(doc, "th", undefined, heading));
  }
  table.appendChild(head);
  for (const row of rows) {
    const tr = element(doc, "tr");
    tr.appendChild(element(doc, "td", "char-code", row.code));
    tr.appendChild(element(doc, "td", "char-label", row.label));
    const text = element(doc, "td", "char-text", row.text);
    if (row.text === "not reported") {
      text.classList.add("char-missing");
    }
    tr.appendChild(text);
    tr.appendChild(element(doc, "td", "char-sources", row.sources.join(", ")));
    table.appendChild(tr);
  }
  container.appendChild(table);
}
