"""Serving layer: HTTP API for the report UI plus TCP telemetry ingest.

The HTTP side exposes the constellation, characteristics, per-component
detail, reachability closures, buffered samples, and a long-lived stream of
newline-delimited JSON events. The TCP side accepts one JSON sample per
line. Both are built on the standard library's threading servers; state
lives in the model objects and a :class:`TelemetryHub`.
"""

from __future__ import annotations

import json
import socket
import socketserver
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import unquote, urlsplit, parse_qs

from .characteristics import CharacteristicRegistry, characteristics_table
from .constellation import (
    ConstellationGraph,
    LayoutResult,
    UnknownNodeError,
    build_constellation,
    closure_json,
    layout,
)
from .model import DescriptionModel
from .store import (
    QueryParseError,
    TripleStore,
    display_term,
    model_resolver,
    parse_query,
)
from .telemetry import TelemetryHub
from .vocab import Vocabulary, builtin_vocabulary


class BindingError(ValueError):
    """The bindings file is malformed or points outside its directory."""


@dataclass(frozen=True)
class Binding:
    topic: str | None = None
    script: Path | None = None


class BindingConfig:
    """Component id -> telemetry topic / script file, loaded from flat JSON.

    Script paths are resolved against the binding file's directory and must
    stay inside it.
    """

    def __init__(self, bindings: dict[str, Binding] | None = None) -> None:
        self.bindings = dict(bindings or {})

    @classmethod
    def load(cls, path: str | Path) -> BindingConfig:
        path = Path(path)
        root = path.parent.resolve()
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise BindingError(f"bindings file {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise BindingError("bindings file must hold a JSON object")
        bindings: dict[str, Binding] = {}
        for component_id, spec in raw.items():
            if not isinstance(spec, dict):
                raise BindingError(f"binding for {component_id!r} must be an object")
            topic = spec.get("topic")
            if topic is not None and not isinstance(topic, str):
                raise BindingError(f"binding for {component_id!r} has a non-string topic")
            script: Path | None = None
            raw_script = spec.get("script")
            if raw_script is not None:
                if not isinstance(raw_script, str):
                    raise BindingError(
                        f"binding for {component_id!r} has a non-string script"
                    )
                candidate = (root / raw_script).resolve()
                if not candidate.is_relative_to(root):
                    raise BindingError(
                        f"binding for {component_id!r} escapes the bindings directory"
                    )
                script = candidate
            bindings[component_id] = Binding(topic, script)
        return cls(bindings)

    def get(self, component_id: str) -> Binding | None:
        return self.bindings.get(component_id)

    def as_json(self, component_id: str) -> dict | None:
        binding = self.bindings.get(component_id)
        if binding is None:
            return None
        doc: dict = {}
        if binding.topic is not None:
            doc["topic"] = binding.topic
        if binding.script is not None:
            doc["script"] = binding.script.name
        return doc


def _compact(doc) -> bytes:
    return json.dumps(doc, separators=(",", ":")).encode("utf-8")


_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".htm": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".yaml": "application/yaml",
    ".yml": "application/yaml",
    ".png": "image/png",
    ".ico": "image/x-icon",
    ".txt": "text/plain; charset=utf-8",
    ".map": "application/json",
}


class Gateway:
    """Bundles model state, telemetry hub, and the two servers."""

    def __init__(
        self,
        model: DescriptionModel,
        vocab: Vocabulary | None = None,
        registry: CharacteristicRegistry | None = None,
        bindings: BindingConfig | None = None,
        hub: TelemetryHub | None = None,
        ui_dir: str | Path | None = None,
        enable_query: bool = False,
    ) -> None:
        self.model = model
        self.vocab = vocab or builtin_vocabulary()
        self.registry = registry or CharacteristicRegistry.default()
        self.bindings = bindings or BindingConfig()
        self.hub = hub or TelemetryHub()
        self.ui_dir = Path(ui_dir).resolve() if ui_dir is not None else None
        self.enable_query = enable_query

        self.graph: ConstellationGraph = build_constellation(model, self.vocab)
        self.layout: LayoutResult = layout(self.graph)
        self.store = TripleStore(model, self.vocab)

        self._http: ThreadingHTTPServer | None = None
        self._tcp: socketserver.ThreadingTCPServer | None = None
        self._threads: list[threading.Thread] = []

    # -- JSON payloads -------------------------------------------------------

    def graph_doc(self) -> dict:
        nodes = []
        by_id = {node.id: node for node in self.graph.nodes}
        for node_id in self.layout.node_order:
            node = by_id[node_id]
            x, y = self.layout.positions[node_id]
            nodes.append(
                {
                    "id": node.id,
                    "label": node.label,
                    "category": node.category.value,
                    "x": round(x, 1),
                    "y": round(y, 1),
                }
            )
        edges = [
            {"src": e.src, "dst": e.dst, "relation": e.relation}
            for e in sorted(self.graph.edges, key=lambda e: (e.src, e.dst, e.relation))
        ]
        return {"constellation": 1, "nodes": nodes, "edges": edges}

    def characteristics_doc(self) -> list[dict]:
        rows = characteristics_table(self.model, self.registry, self.vocab)
        return [
            {
                "code": row.code,
                "label": row.label,
                "text": row.text,
                "sources": list(row.sources),
            }
            for row in rows
        ]

    def component_doc(self, component_id: str) -> dict | None:
        inst = self.model.instance(component_id)
        if inst is None:
            return None
        return {
            "id": inst.local_id,
            "kind": str(inst.kind),
            "desc": inst.desc,
            "relations": [
                {"name": r.name, "target": r.target.local} for r in inst.relations
            ],
            "scalars": [{"name": s.name, "value": s.value} for s in inst.scalars],
            "binding": self.bindings.as_json(component_id),
        }

    def run_query(self, text: str) -> list[list[str]]:
        resolver = model_resolver(self.model.name, self.vocab)
        query = parse_query(text, resolver=resolver)
        return [
            [display_term(t, self.model.name) for t in row]
            for row in self.store.select(query)
        ]

    # -- lifecycle -----------------------------------------------------------

    def start_http(self, host: str = "127.0.0.1", port: int = 0) -> tuple[str, int]:
        handler = _make_handler(self)
        self._http = ThreadingHTTPServer((host, port), handler)
        self._http.daemon_threads = True
        thread = threading.Thread(target=self._http.serve_forever, daemon=True)
        thread.start()
        self._threads.append(thread)
        return self._http.server_address[0], self._http.server_address[1]

    def start_ingest_tcp(self, host: str = "127.0.0.1", port: int = 0) -> tuple[str, int]:
        hub = self.hub

        class IngestHandler(socketserver.StreamRequestHandler):
            def handle(self) -> None:
                for raw in self.rfile:
                    line = raw.strip()
                    if not line:
                        continue
                    hub.ingest_line(line)

        server = socketserver.ThreadingTCPServer((host, port), IngestHandler)
        server.daemon_threads = True
        server.allow_reuse_address = True
        self._tcp = server
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        self._threads.append(thread)
        return server.server_address[0], server.server_address[1]

    def stop(self) -> None:
        if self._http is not None:
            self._http.shutdown()
            self._http.server_close()
            self._http = None
        if self._tcp is not None:
            self._tcp.shutdown()
            self._tcp.server_close()
            self._tcp = None
        for thread in self._threads:
            thread.join(timeout=2.0)
        self._threads.clear()


def _make_handler(gateway: Gateway) -> type[BaseHTTPRequestHandler]:
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, format: str, *args) -> None:  # noqa: A002
            pass

        # -- helpers ---------------------------------------------------------

        def _send_bytes(
            self, status: int, body: bytes, content_type: str = "application/json"
        ) -> None:
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _send_json(self, status: int, doc) -> None:
            self._send_bytes(status, _compact(doc))

        def _error(self, status: int, message: str) -> None:
            self._send_json(status, {"error": message})

        # -- dispatch ----------------------------------------------------------

        def do_GET(self) -> None:  # noqa: N802
            try:
                self._route_get()
            except (BrokenPipeError, ConnectionResetError):
                pass

        def do_POST(self) -> None:  # noqa: N802
            try:
                self._route_post()
            except (BrokenPipeError, ConnectionResetError):
                pass

        def _route_get(self) -> None:
            url = urlsplit(self.path)
            path = unquote(url.path)
            params = parse_qs(url.query)

            if path == "/api/graph":
                self._send_json(200, gateway.graph_doc())
            elif path == "/api/characteristics":
                self._send_json(200, gateway.characteristics_doc())
            elif path.startswith("/api/components/"):
                component_id = path[len("/api/components/") :]
                doc = gateway.component_doc(component_id)
                if doc is None:
                    self._error(404, f"unknown component {component_id!r}")
                else:
                    self._send_json(200, doc)
            elif path.startswith("/api/closure/"):
                component_id = path[len("/api/closure/") :]
                direction = params.get("direction", ["both"])[0]
                if direction not in ("forward", "backward", "both"):
                    self._error(400, f"unknown direction {direction!r}")
                    return
                try:
                    body = closure_json(gateway.graph, component_id, direction)
                except UnknownNodeError:
                    self._error(404, f"unknown component {component_id!r}")
                    return
                self._send_bytes(200, body.encode("utf-8"))
            elif path.startswith("/api/script/"):
                self._serve_script(path[len("/api/script/") :])
            elif path.startswith("/api/samples/"):
                topic = path[len("/api/samples/") :]
                since = 0
                raw_since = params.get("sinceSeq", ["0"])[0]
                try:
                    since = int(raw_since)
                except ValueError:
                    self._error(400, f"sinceSeq must be an integer, got {raw_since!r}")
                    return
                samples = gateway.hub.samples_since(topic, since)
                if samples is None:
                    self._error(404, f"unknown topic {topic!r}")
                    return
                self._send_json(
                    200,
                    {
                        "topic": topic,
                        "samples": [
                            {
                                "topic": s.topic,
                                "ts": s.ts,
                                "fields": s.fields,
                                "seq": s.seq,
                            }
                            for s in samples
                        ],
                    },
                )
            elif path == "/api/stream":
                self._serve_stream()
            elif path.startswith("/api/"):
                self._error(404, f"no such endpoint {path!r}")
            else:
                self._serve_static(path)

        def _route_post(self) -> None:
            url = urlsplit(self.path)
            if url.path != "/api/query":
                self._error(404, f"no such endpoint {url.path!r}")
                return
            if not gateway.enable_query:
                self._error(404, "query endpoint is not enabled")
                return
            length = int(self.headers.get("Content-Length") or 0)
            body = self.rfile.read(length) if length else b""
            try:
                doc = json.loads(body or b"{}")
            except json.JSONDecodeError:
                self._error(400, "request body must be JSON")
                return
            text = doc.get("query") if isinstance(doc, dict) else None
            if not isinstance(text, str):
                self._error(400, 'request body needs a "query" string')
                return
            try:
                rows = gateway.run_query(text)
            except QueryParseError as exc:
                self._error(400, str(exc))
                return
            self._send_json(200, {"rows": rows})

        # -- endpoint bodies ----------------------------------------------------

        def _serve_script(self, component_id: str) -> None:
            binding = gateway.bindings.get(component_id)
            if binding is None or binding.script is None:
                self._error(404, f"no script bound for {component_id!r}")
                return
            script = binding.script
            try:
                body = script.read_bytes()
            except FileNotFoundError:
                self._error(404, f"script for {component_id!r} is missing")
                return
            self._send_bytes(200, body, "text/plain; charset=utf-8")

        def _serve_stream(self) -> None:
            sub = gateway.hub.subscribe()
            try:
                self.send_response(200)
                self.send_header("Content-Type", "application/x-ndjson")
                self.send_header("Cache-Control", "no-store")
                self.send_header("Connection", "close")
                self.end_headers()
                while True:
                    event = sub.get(timeout=0.5)
                    if event is None:
                        if sub.closed:
                            break
                        # Heartbeat keeps half-closed sockets detectable.
                        self.wfile.write(b"\n")
                        self.wfile.flush()
                        continue
                    self.wfile.write(event.to_json().encode("utf-8") + b"\n\n")
                    self.wfile.flush()
            except (BrokenPipeError, ConnectionResetError, OSError):
                pass
            finally:
                gateway.hub.unsubscribe(sub)

        def _serve_static(self, path: str) -> None:
            if gateway.ui_dir is None:
                self._error(404, "no static directory configured")
                return
            rel = path.lstrip("/")
            if not rel or rel.endswith("/"):
                rel += "index.html"
            candidate = (gateway.ui_dir / rel).resolve()
            if not candidate.is_relative_to(gateway.ui_dir):
                self._error(403, "path escapes the static directory")
                return
            if candidate.is_dir():
                candidate = candidate / "index.html"
            if not candidate.is_file():
                self._error(404, f"no such file {path!r}")
                return
            content_type = _CONTENT_TYPES.get(
                candidate.suffix.lower(), "application/octet-stream"
            )
            self._send_bytes(200, candidate.read_bytes(), content_type)

    return Handler


def send_lines_tcp(
    host: str, port: int, lines, retries: int = 20, retry_delay: float = 0.1
) -> int:
    """Send an iterable of sample lines to a TCP ingest endpoint.

    Retries the initial connection a bounded number of times so a freshly
    started server can finish binding. Returns the number of lines sent.
    """
    last_error: OSError | None = None
    for _ in range(max(retries, 1)):
        try:
            conn = socket.create_connection((host, port), timeout=5.0)
            break
        except OSError as exc:
            last_error = exc
            time.sleep(retry_delay)
    else:
        raise ConnectionError(f"cannot reach {host}:{port}: {last_error}")
    count = 0
    with conn:
        for line in lines:
            data = line.encode("utf-8") if isinstance(line, str) else line
            conn.sendall(data.rstrip(b"\n") + b"\n")
            count += 1
    return count


def replay_file(hub: TelemetryHub, path: str | Path, speed: float | None = None) -> int:
    """Feed recorded sample lines into *hub*.

    Without *speed* every line is ingested immediately; with it, gaps between
    sample timestamps are replayed scaled by 1/speed (2.0 = twice as fast).
    Returns the number of samples accepted.
    """
    if speed is not None and speed <= 0:
        raise ValueError("replay speed must be positive")
    accepted = 0
    last_ts: float | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            result = hub.ingest_line(line)
            if isinstance(result, Exception):
                continue
            if speed is not None:
                if last_ts is not None and result.ts > last_ts:
                    time.sleep((result.ts - last_ts) / speed)
                last_ts = result.ts
            accepted += 1
    return accepted
