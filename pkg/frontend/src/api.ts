import type {
  CharacteristicRow,
  ClosureDoc,
  ComponentDoc,
  Direction,
  GapDoc,
  GraphDoc,
  SampleDoc,
  SamplesDoc,
  StreamEvent,
} from "./types.js";

/** Error raised for failed gateway requests. Status 0 means the gateway was unreachable. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function getJson<T>(url: string): Promise<T> {
  let resp: Response;
  try {
    resp = await fetch(url);
  } catch (err) {
    throw new ApiError(0, `cannot reach gateway: ${String(err)}`);
  }
  if (!resp.ok) {
    let detail = "";
    try {
      detail = ((await resp.json()) as { error?: string }).error ?? "";
    } catch {
      // body was not JSON; fall through to the generic message
    }
    throw new ApiError(resp.status, detail || `request failed with status ${resp.status}`);
  }
  return (await resp.json()) as T;
}

/** Typed client for the gateway's JSON endpoints. */
export class GatewayClient {
  constructor(readonly baseUrl: string = "") {}

  graph(): Promise<GraphDoc> {
    return getJson(`${this.baseUrl}/api/graph`);
  }

  characteristics(): Promise<CharacteristicRow[]> {
    return getJson(`${this.baseUrl}/api/characteristics`);
  }

  component(id: string): Promise<ComponentDoc> {
    return getJson(`${this.baseUrl}/api/components/${encodeURIComponent(id)}`);
  }

  closure(id: string, direction: Direction): Promise<ClosureDoc> {
    return getJson(`${this.baseUrl}/api/closure/${encodeURIComponent(id)}?direction=${direction}`);
  }

  samples(topic: string, sinceSeq = 0): Promise<SamplesDoc> {
    return getJson(`${this.baseUrl}/api/samples/${encodeURIComponent(topic)}?sinceSeq=${sinceSeq}`);
  }

  async script(id: string): Promise<string> {
    let resp: Response;
    try {
      resp = await fetch(`${this.baseUrl}/api/script/${encodeURIComponent(id)}`);
    } catch (err) {
      throw new ApiError(0, `cannot reach gateway: ${String(err)}`);
    }
    if (!resp.ok) {
      throw new ApiError(resp.status, `request failed with status ${resp.status}`);
    }
    return resp.text();
  }
}

function parseStreamLine(line: string): StreamEvent | null {
  let doc: unknown;
  try {
    doc = JSON.parse(line);
  } catch {
    console.warn("ignoring unparseable stream line", line);
    return null;
  }
  if (typeof doc !== "object" || doc === null) {
    console.warn("ignoring malformed stream event", line);
    return null;
  }
  const record = doc as Record<string, unknown>;
  if (typeof record.gap === "number") {
    return { gap: record.gap } as GapDoc;
  }
  if (
    typeof record.topic === "string" &&
    typeof record.ts === "number" &&
    typeof record.seq === "number" &&
    typeof record.fields === "object" &&
    record.fields !== null
  ) {
    return {
      topic: record.topic,
      ts: record.ts,
      seq: record.seq,
      fields: record.fields as Record<string, number>,
    } as SampleDoc;
  }
  console.warn("ignoring malformed stream event", line);
  return null;
}

/**
 * The application's single connection to the gateway's live feed.
 *
 * Newline-delimited JSON events are parsed and fanned out to listeners;
 * blank lines (idle heartbeats and event terminators) are skipped. When the
 * connection drops, the manager reconnects after a delay and notifies the
 * reconnect listeners so consumers can re-request missed samples with their
 * own sinceSeq cursor.
 */
export class StreamManager {
  private readonly listeners = new Set<(event: StreamEvent) => void>();
  private readonly reconnectListeners = new Set<() => void>();
  private controller: AbortController | null = null;
  private stopped = false;
  private started = false;

  constructor(
    readonly baseUrl: string = "",
    readonly retryDelayMs: number = 1000,
  ) {}

  onEvent(listener: (event: StreamEvent) => void): void {
    this.listeners.add(listener);
  }

  offEvent(listener: (event: StreamEvent) => void): void {
    this.listeners.delete(listener);
  }

  onReconnect(listener: () => void): void {
    this.reconnectListeners.add(listener);
  }

  start(): void {
    if (this.started) {
      return;
    }
    this.started = true;
    void this.loop();
  }

  stop(): void {
    this.stopped = true;
    this.controller?.abort();
  }

  /** Parse one wire line and dispatch it. Exposed so tests can drive exact wire bytes. */
  dispatchLine(line: string): void {
    const event = parseStreamLine(line);
    if (event === null) {
      return;
    }
    for (const listener of Array.from(this.listeners)) {
      listener(event);
    }
  }

  private async loop(): Promise<void> {
    let everConnected = false;
    while (!this.stopped) {
      try {
        this.controller = new AbortController();
        const resp = await fetch(`${this.baseUrl}/api/stream`, {
          signal: this.controller.signal,
        });
        if (!resp.ok || resp.body === null) {
          throw new Error(`stream request failed with status ${resp.status}`);
        }
        if (everConnected) {
          for (const listener of Array.from(this.reconnectListeners)) {
            listener();
          }
        }
        everConnected = true;
        await this.consume(resp.body);
      } catch {
        // fall through to the retry delay below
      }
      if (!this.stopped) {
        await new Promise((resolve) => setTimeout(resolve, this.retryDelayMs));
      }
    }
  }

  private async consume(body: ReadableStream<Uint8Array>): Promise<void> {
    const reader = body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) {
        return;
      }
      buffer += decoder.decode(value, { stream: true });
      let newline: number;
      while ((newline = buffer.indexOf("\n")) >= 0) {
        const line = buffer.slice(0, newline).trim();
        buffer = buffer.slice(newline + 1);
        if (line !== "") {
          this.dispatchLine(line);
        }
      }
    }
  }
}
