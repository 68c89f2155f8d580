import { isGap, type SampleDoc, type StreamEvent } from "./types.js";

export interface ChartPoint {
  ts: number;
  value: number;
  seq: number;
}

const WIDTH = 640;
const HEIGHT = 220;
const PAD = 34;
const SVG_NS = "http://www.w3.org/2000/svg";

export const DEFAULT_MAX_POINTS = 600;

/**
 * Rolling line chart for one topic. Points arrive from the shared stream (and
 * from sinceSeq backfills) and are appended strictly in sequence order: a
 * sample whose seq is not greater than the last accepted one is dropped, so
 * points are never reordered and timestamps never decrease. The window keeps
 * the most recent points (default 600). Each received gap event inserts
 * exactly one visible gap marker at the position where data went missing.
 */
export class LiveChart {
  readonly points: ChartPoint[] = [];
  /**
   * One entry per received gap event: the seq of the first sample that arrived
   * after the gap, or null while that sample has not arrived yet. A marker is
   * retired once its anchor sample scrolls out of the window.
   */
  private readonly gapAnchors: (number | null)[] = [];
  lastSeq = 0;
  readonly maxPoints: number;
  private field: string | null;

  constructor(
    readonly container: HTMLElement | null,
    readonly topic: string,
    opts?: { maxPoints?: number; field?: string },
  ) {
    this.maxPoints = opts?.maxPoints ?? DEFAULT_MAX_POINTS;
    this.field = opts?.field ?? null;
    this.render();
  }

  handleEvent(event: StreamEvent): void {
    if (isGap(event)) {
      this.addGap();
    } else {
      this.addSample(event);
    }
  }

  /** Append one sample; returns false if it was filtered (other topic, stale seq, no numeric field). */
  addSample(sample: SampleDoc): boolean {
    const appended = this.appendQuietly(sample);
    if (appended) {
      this.render();
    }
    return appended;
  }

  addGap(): void {
    this.gapAnchors.push(null);
    this.render();
  }

  gapCount(): number {
    return this.gapAnchors.length;
  }

  backfill(samples: SampleDoc[]): number {
    let appended = 0;
    for (const sample of samples) {
      if (this.appendQuietly(sample)) {
        appended += 1;
      }
    }
    this.render();
    return appended;
  }

  private appendQuietly(sample: SampleDoc): boolean {
    if (sample.topic !== this.topic || sample.seq <= this.lastSeq) {
      return false;
    }
    if (this.field === null) {
      const numeric = Object.keys(sample.fields)
        .sort()
        .find((key) => typeof sample.fields[key] === "number");
      if (numeric === undefined) {
        return false;
      }
      this.field = numeric;
    }
    const value = sample.fields[this.field];
    if (typeof value !== "number") {
      return false;
    }
    this.points.push({ ts: sample.ts, value, seq: sample.seq });
    this.lastSeq = sample.seq;
    for (let i = 0; i < this.gapAnchors.length; i += 1) {
      if (this.gapAnchors[i] === null) {
        this.gapAnchors[i] = sample.seq;
      }
    }
    while (this.points.length > this.maxPoints) {
      this.points.shift();
    }
    this.prune();
    return true;
  }

  /** Drop gap markers whose anchor sample scrolled out of the retained window. */
  private prune(): void {
    if (this.points.length === 0) {
      return;
    }
    const oldest = this.points[0].seq;
    let keepFrom = 0;
    while (keepFrom < this.gapAnchors.length) {
      const anchor = this.gapAnchors[keepFrom];
      if (anchor !== null && anchor < oldest) {
        keepFrom += 1;
      } else {
        break;
      }
    }
    if (keepFrom > 0) {
      this.gapAnchors.splice(0, keepFrom);
    }
  }

  render(): void {
    if (this.container === null) {
      return;
    }
    const doc = this.container.ownerDocument;
    this.container.textContent = "";

    const svg = doc.createElementNS(SVG_NS, "svg");
    svg.setAttribute("class", "chart-canvas");
    svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);

    if (this.points.length === 0) {
      const waiting = doc.createElementNS(SVG_NS, "text");
      waiting.setAttribute("x", String(WIDTH / 2));
      waiting.setAttribute("y", String(HEIGHT / 2));
      waiting.setAttribute("text-anchor", "middle");
      waiting.setAttribute("class", "chart-waiting");
      waiting.textContent = "waiting for samples";
      svg.appendChild(waiting);
      this.container.appendChild(svg);
      return;
    }

    const tsMin = this.points[0].ts;
    const tsMax = this.points[this.points.length - 1].ts;
    const tsSpan = tsMax - tsMin || 1;
    let valueMin = Number.POSITIVE_INFINITY;
    let valueMax = Number.NEGATIVE_INFINITY;
    for (const point of this.points) {
      valueMin = Math.min(valueMin, point.value);
      valueMax = Math.max(valueMax, point.value);
    }
    const valueSpan = valueMax - valueMin || 1;

    const toX = (ts: number): number => PAD + ((ts - tsMin) / tsSpan) * (WIDTH - 2 * PAD);
    const toY = (value: number): number =>
      HEIGHT - PAD - ((value - valueMin) / valueSpan) * (HEIGHT - 2 * PAD);

    const polyline = doc.createElementNS(SVG_NS, "polyline");
    polyline.setAttribute("class", "chart-trace");
    polyline.setAttribute(
      "points",
      this.points.map((p) => `${toX(p.ts).toFixed(1)},${toY(p.value).toFixed(1)}`).join(" "),
    );
    svg.appendChild(polyline);

    for (const anchor of this.gapAnchors) {
      const x = this.gapMarkerX(anchor, toX);
      if (x === null) {
        continue;
      }
      const line = doc.createElementNS(SVG_NS, "line");
      line.setAttribute("class", "gap-marker");
      line.setAttribute("x1", x.toFixed(1));
      line.setAttribute("x2", x.toFixed(1));
      line.setAttribute("y1", String(PAD / 2));
      line.setAttribute("y2", String(HEIGHT - PAD / 2));
      const title = doc.createElementNS(SVG_NS, "title");
      title.textContent = "samples were dropped here";
      line.appendChild(title);
      svg.appendChild(line);
    }

    const labels: [string, number, number, string][] = [
      [`${valueMax.toFixed(2)}`, 2, PAD, "start"],
      [`${valueMin.toFixed(2)}`, 2, HEIGHT - PAD, "start"],
      [`t=${tsMin.toFixed(0)}`, PAD, HEIGHT - 6, "start"],
      [`t=${tsMax.toFixed(0)}`, WIDTH - PAD, HEIGHT - 6, "end"],
      [`${this.points.length} pts`, WIDTH - 4, PAD / 2 + 4, "end"],
    ];
    for (const [content, x, y, anchor] of labels) {
      const text = doc.createElementNS(SVG_NS, "text");
      text.setAttribute("class", "chart-label");
      text.setAttribute("x", String(x));
      text.setAttribute("y", String(y));
      text.setAttribute("text-anchor", anchor);
      text.textContent = content;
      svg.appendChild(text);
    }

    this.container.appendChild(svg);
  }

  /** X position of a gap marker, or null when it cannot be placed. */
  private gapMarkerX(anchor: number | null, toX: (ts: number) => number): number | null {
    if (anchor === null) {
      // reported, but the first post-gap sample has not arrived yet
      return WIDTH - PAD / 2;
    }
    const index = this.points.findIndex((point) => point.seq === anchor);
    if (index < 0) {
      return null;
    }
    if (index === 0) {
      return PAD / 2;
    }
    return (toX(this.points[index - 1].ts) + toX(this.points[index].ts)) / 2;
  }
}
