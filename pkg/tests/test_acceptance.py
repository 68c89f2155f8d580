"""Acceptance gate: nine end-to-end checks, one printed pass line each.

Every test prints ``ACCEPTANCE <n> PASS: <detail>`` on the live terminal once
its assertions hold, so a full run shows one line per criterion.
"""

from __future__ import annotations

import http.client
import json
import random
import threading
import time

from dtinsight.characteristics import CharacteristicRegistry, characteristics_table
from dtinsight.cli import main as cli_main
from dtinsight.constellation import NodeCategory, build_constellation, closure_json, layout
from dtinsight.dsl import parse_description, serialize
from dtinsight.gateway import Gateway, send_lines_tcp
from dtinsight.incubator import (
    HEATER_TOPIC,
    TEMPERATURE_TOPIC,
    SimParams,
    iterate_states,
    plant_update,
    sample_lines,
)
from dtinsight.model import DescriptionModel, validate
from dtinsight.store import select
from dtinsight.telemetry import GapEvent, TelemetryHub, TelemetrySample
from dtinsight.vocab import builtin_vocabulary

from conftest import (
    C20_PREFIX,
    EXCERPT,
    brute_force_select,
    random_query,
    random_store,
    random_valid_model,
)

C20_TEXT = (
    "Communication is carried out using AMQP standard via RabbitMQ. "
    "Behavioral models have been produced following the FMI standard version 2."
)


def announce(capsys, line: str) -> None:
    with capsys.disabled():
        print(line, flush=True)


def http_get(port: int, path: str):
    conn = http.client.HTTPConnection("127.0.0.1", port, timeout=10)
    try:
        conn.request("GET", path)
        resp = conn.getresponse()
        return resp.status, resp.read()
    finally:
        conn.close()


# -- 1: incubator excerpt fidelity ---------------------------------------------


def test_acceptance_01_excerpt_fidelity(capsys):
    start = time.perf_counter()
    result = parse_description(EXCERPT)
    elapsed = time.perf_counter() - start

    assert not result.diagnostics
    model = result.model
    assert model.instance_ids() == (
        "what_if_sim",
        "simulator",
        "controller_model",
        "standardization",
    )

    what_if = model.instance("what_if_sim")
    assert str(what_if.kind) == "DTDFVocab:Service"
    assert [(r.name, r.target.local) for r in what_if.relations] == [
        ("provides", "what_if_sim_results"),
        ("atStage", "operation"),
    ]
    assert str(what_if.relations[1].target) == "baseDesc:operation"

    simulator = model.instance("simulator")
    assert str(simulator.kind) == "DTDFVocab:Enabler"
    assert [(r.name, r.target.local) for r in simulator.relations] == [
        ("enables", "what_if_sim")
    ]

    controller = model.instance("controller_model")
    assert str(controller.kind) == "DTDFVocab:Model"
    assert [(r.name, r.target.local) for r in controller.relations] == [
        ("inputTo", "simulator"),
        ("inputTo", "state_estimator"),
        ("inputTo", "optimization_algs"),
    ]

    standardization = model.instance("standardization")
    assert str(standardization.kind) == "DTDFVocab:Standardization"
    assert standardization.desc == C20_TEXT
    assert standardization.desc.startswith(C20_PREFIX)

    assert elapsed < 1.0
    announce(
        capsys,
        f"ACCEPTANCE 1 PASS: excerpt parsed to 4 exact instances in {elapsed * 1000:.1f} ms",
    )


# -- 2: round-trip identity -----------------------------------------------------


def test_acceptance_02_round_trip_1000_models(capsys):
    rng = random.Random(20_240)
    failures = 0
    for _ in range(1000):
        model = random_valid_model(rng, max_instances=50)
        text = serialize(model)
        first = parse_description(text)
        if first.diagnostics or first.model != model:
            failures += 1
            continue
        second = parse_description(serialize(first.model))
        if second.diagnostics or second.model != first.model:
            failures += 1
    assert failures == 0
    announce(
        capsys,
        "ACCEPTANCE 2 PASS: 1000 random models round-tripped with 0 failures",
    )


# -- 3: query oracle agreement ----------------------------------------------------


def test_acceptance_03_select_matches_brute_force_oracle(capsys):
    rng = random.Random(30_303)
    rows_compared = 0
    for _ in range(200):
        triples = random_store(rng, max_triples=200)
        query = random_query(rng, triples)
        got = select(query, triples)
        want = brute_force_select(query, triples)
        assert got == want
        rows_compared += len(want)
    announce(
        capsys,
        f"ACCEPTANCE 3 PASS: 200 random stores agreed with the oracle "
        f"({rows_compared} rows compared)",
    )


# -- 4: constellation invariants ---------------------------------------------------


def test_acceptance_04_constellation_invariants(capsys):
    rng = random.Random(40_404)
    vocab = builtin_vocabulary()
    edges_checked = 0
    for _ in range(100):
        model = random_valid_model(rng)
        assert validate(model, vocab).ok
        graph = build_constellation(model, vocab)
        placed = layout(graph)
        category = {node.id: node.category for node in graph.nodes}
        for edge in graph.edges:
            edges_checked += 1
            if edge.relation == "enables":
                assert category[edge.src] == NodeCategory.DT_ENABLER
                assert category[edge.dst] == NodeCategory.DT_SERVICE
            elif edge.relation == "inputTo":
                assert category[edge.src] == NodeCategory.DT_MODEL_DATA
                assert category[edge.dst] == NodeCategory.DT_ENABLER
            elif edge.relation == "asData":
                assert category[edge.src] == NodeCategory.PT_SENSORS
                assert category[edge.dst] == NodeCategory.DT_MODEL_DATA
            else:
                raise AssertionError(f"unexpected relation {edge.relation!r}")
        ys = {
            cat: [
                placed.positions[node.id][1]
                for node in graph.nodes
                if node.category == cat
            ]
            for cat in (
                NodeCategory.DT_SERVICE,
                NodeCategory.DT_ENABLER,
                NodeCategory.DT_MODEL_DATA,
            )
        }
        if ys[NodeCategory.DT_MODEL_DATA] and ys[NodeCategory.DT_ENABLER]:
            assert min(ys[NodeCategory.DT_MODEL_DATA]) > max(ys[NodeCategory.DT_ENABLER])
        if ys[NodeCategory.DT_ENABLER] and ys[NodeCategory.DT_SERVICE]:
            assert min(ys[NodeCategory.DT_ENABLER]) > max(ys[NodeCategory.DT_SERVICE])
    announce(
        capsys,
        f"ACCEPTANCE 4 PASS: 100 random models kept layer and edge invariants "
        f"({edges_checked} edges checked)",
    )


# -- 5: byte-deterministic reports ---------------------------------------------------


def test_acceptance_05_report_determinism(tmp_path, capsys):
    model_file = tmp_path / "incubator.dtdf"
    model_file.write_text(EXCERPT, encoding="utf-8")
    out_a, out_b, out_c = (tmp_path / name for name in ("a", "b", "c"))

    assert cli_main(["report", str(model_file), "--out", str(out_a)]) == 0
    assert cli_main(["report", str(model_file), "--out", str(out_b)]) == 0
    for name in ("table.html", "constellation.svg", "constellation.yaml"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    edited = tmp_path / "edited.dtdf"
    edited.write_text(EXCERPT.replace("version 2", "version 3"), encoding="utf-8")
    assert cli_main(["report", str(edited), "--out", str(out_c)]) == 0
    assert (out_c / "table.html").read_bytes() != (out_a / "table.html").read_bytes()

    announce(
        capsys,
        "ACCEPTANCE 5 PASS: repeat runs byte-identical; a desc edit changed table.html",
    )


# -- 6: characteristics table shape ----------------------------------------------------


def test_acceptance_06_characteristics_always_21_rows(capsys):
    vocab = builtin_vocabulary()
    registry = CharacteristicRegistry.default()

    empty_rows = characteristics_table(DescriptionModel("m", (), ()), registry, vocab)
    assert len(empty_rows) == 21
    assert all(row.text == "not reported" for row in empty_rows)

    excerpt_rows = characteristics_table(
        parse_description(EXCERPT).model, registry, vocab
    )
    assert len(excerpt_rows) == 21
    by_code = {row.code: row for row in excerpt_rows}
    assert by_code["C20"].text == C20_TEXT
    missing = [row.code for row in excerpt_rows if row.text == "not reported"]
    assert len(missing) == 21 - sum(
        1 for row in excerpt_rows if row.text != "not reported"
    )
    assert "C20" not in missing

    announce(
        capsys,
        f"ACCEPTANCE 6 PASS: 21 rows always; {len(missing)} absent rows read "
        f'"not reported"',
    )


# -- 7: ordered fan-out under concurrent ingest -----------------------------------------


FLOOD_TOPICS = tuple(f"flood.t{i}" for i in range(3))
FLOOD_TOTAL = 10_000
FLOOD_SOURCES = 2
SLOW_QUEUE = 100


def _flood_lines(source: int) -> list[str]:
    per_source = FLOOD_TOTAL // FLOOD_SOURCES
    lines = []
    for j in range(per_source):
        i = source * per_source + j
        lines.append(
            json.dumps(
                {
                    "topic": FLOOD_TOPICS[j % len(FLOOD_TOPICS)],
                    "ts": float(i),
                    "fields": {"v": float(i)},
                },
                separators=(",", ":"),
            )
        )
    return lines


def _drain(sub) -> list:
    events = []
    while True:
        event = sub.get(timeout=0.2)
        if event is None:
            return events
        events.append(event)


def _assert_fast_stream(events) -> None:
    """Every event is a sample; per-topic seqs are contiguous from 1."""
    assert len(events) == FLOOD_TOTAL
    last: dict[str, int] = {}
    for event in events:
        assert isinstance(event, TelemetrySample)
        assert event.seq == last.get(event.topic, 0) + 1
        last[event.topic] = event.seq
    assert sum(last.values()) == FLOOD_TOTAL


def _run_flood(with_slow: bool, with_http_reader: bool = False):
    """One 10k-sample flood from two TCP senders; returns timing and streams.

    Both conditions run three hub subscribers so the fan-out work is equal;
    only whether the third one is a tiny-queue laggard varies.
    """
    model = parse_description(EXCERPT).model
    hub = TelemetryHub(ring_capacity=4096, max_pending=FLOOD_TOTAL + 64)
    gateway = Gateway(model, hub=hub)
    _, ingest_port = gateway.start_ingest_tcp()

    fast_subs = [hub.subscribe() for _ in range(2)]
    slow_sub = hub.subscribe(max_pending=SLOW_QUEUE) if with_slow else hub.subscribe()

    http_events: list[tuple[str, int]] = []
    http_done = threading.Event()
    http_conn = None
    if with_http_reader:
        _, http_port = gateway.start_http()
        connected = threading.Event()

        def read_stream() -> None:
            nonlocal http_conn
            http_conn = http.client.HTTPConnection("127.0.0.1", http_port, timeout=30)
            http_conn.request("GET", "/api/stream")
            resp = http_conn.getresponse()  # subscription exists once headers arrive
            connected.set()
            while len(http_events) < FLOOD_TOTAL:
                line = resp.fp.readline()
                if not line:
                    break
                if line == b"\n":
                    continue
                doc = json.loads(line)
                http_events.append((doc["topic"], doc["seq"]))
            http_done.set()

        threading.Thread(target=read_stream, daemon=True).start()
        assert connected.wait(10.0)

    batches = [_flood_lines(k) for k in range(FLOOD_SOURCES)]
    senders = [
        threading.Thread(target=send_lines_tcp, args=("127.0.0.1", ingest_port, batch))
        for batch in batches
    ]
    start = time.perf_counter()
    for sender in senders:
        sender.start()
    deadline = time.monotonic() + 120.0
    total = 0
    while time.monotonic() < deadline:
        total = sum(
            (hub.topic_stats(t) or {"nextSeq": 1})["nextSeq"] - 1 for t in FLOOD_TOPICS
        )
        if total >= FLOOD_TOTAL:
            break
        time.sleep(0.005)
    elapsed = time.perf_counter() - start
    for sender in senders:
        sender.join()
    assert total == FLOOD_TOTAL

    fast_events = [_drain(sub) for sub in fast_subs]
    slow_events = _drain(slow_sub) if with_slow else None
    if with_http_reader:
        assert http_done.wait(60.0), "HTTP stream reader never finished"
        if http_conn is not None:
            http_conn.close()
    gateway.stop()
    return elapsed, fast_events, slow_events, http_events


def test_acceptance_07_gateway_ordering_and_throughput(capsys):
    # Verification flood: hub subscribers, an HTTP stream reader, and the
    # deliberately slow subscriber all watch the same 10k-sample interleave.
    _, fast_events, slow_events, http_events = _run_flood(
        with_slow=True, with_http_reader=True
    )
    for events in fast_events:
        _assert_fast_stream(events)

    assert len(http_events) == FLOOD_TOTAL
    last: dict[str, int] = {}
    for topic, seq in http_events:
        assert seq > last.get(topic, 0), "HTTP stream reordered samples"
        last[topic] = seq

    gap_events = [e for e in slow_events if isinstance(e, GapEvent)]
    assert len(gap_events) == 1, f"expected exactly one gap event, got {len(gap_events)}"
    assert slow_events[0] is gap_events[0]
    assert gap_events[0].count == FLOOD_TOTAL - SLOW_QUEUE
    tail = slow_events[1:]
    assert len(tail) == SLOW_QUEUE
    last = {}
    for event in tail:
        assert isinstance(event, TelemetrySample)
        assert event.seq > last.get(event.topic, 0)
        last[event.topic] = event.seq

    # Throughput: identical fan-out either way. Trials are interleaved in
    # base/slow pairs so scheduler drift hits both conditions equally, and
    # each condition keeps its best time — the least-contended measurement.
    _run_flood(with_slow=False)  # warm-up
    base_times: list[float] = []
    slow_times: list[float] = []
    for _ in range(8):
        base_times.append(_run_flood(with_slow=False)[0])
        slow_times.append(_run_flood(with_slow=True)[0])
    base_rate = FLOOD_TOTAL / min(base_times)
    slow_rate = FLOOD_TOTAL / min(slow_times)
    assert abs(slow_rate - base_rate) <= 0.10 * base_rate, (
        f"throughput moved more than 10%: {base_rate:.0f}/s vs {slow_rate:.0f}/s"
    )
    announce(
        capsys,
        f"ACCEPTANCE 7 PASS: 10000 samples in order on every stream; one gap event "
        f"({gap_events[0].count} dropped); throughput {base_rate:.0f}/s vs "
        f"{slow_rate:.0f}/s with slow subscriber",
    )


# -- 8: simulator physics ---------------------------------------------------------


def test_acceptance_08_simulator_physics(capsys):
    params = SimParams()

    temperature = params.ambient
    for _ in range(20_000):
        temperature = plant_update(temperature, 1, params)
    analytic = params.ambient + params.heater_power / params.loss_conductance
    assert analytic == 61.0
    assert abs(temperature - analytic) <= 0.1

    low = params.setpoint - params.hysteresis
    high = params.setpoint + params.hysteresis
    bound = params.dt * params.heater_power / params.heat_capacity
    entered = False
    for state in iterate_states(params, 7200.0):
        if not entered and low <= state.temperature <= high:
            entered = True
        if entered:
            assert low - bound <= state.temperature <= high + bound
    assert entered, "closed loop never reached the hysteresis band"

    first = "\n".join(sample_lines(params, 300.0)).encode()
    second = "\n".join(sample_lines(params, 300.0)).encode()
    assert first == second

    announce(
        capsys,
        f"ACCEPTANCE 8 PASS: held-on temperature {temperature:.3f} °C vs 61.0 "
        f"analytic; closed loop stayed within band ± {bound:.4f}; same-seed bytes identical",
    )


# -- 9: end-to-end pipeline --------------------------------------------------------


def test_acceptance_09_end_to_end_pipeline(tmp_path, capsys):
    t_start = time.perf_counter()

    model_file = tmp_path / "incubator.dtdf"
    model_file.write_text(EXCERPT, encoding="utf-8")
    site = tmp_path / "site"
    assert cli_main(["report", str(model_file), "--out", str(site)]) == 0

    model = parse_description(EXCERPT).model
    gateway = Gateway(model, ui_dir=site)
    _, http_port = gateway.start_http()
    _, ingest_port = gateway.start_ingest_tcp()
    try:
        code = cli_main(
            [
                "simulate",
                "--duration",
                "120",
                "--sink",
                f"tcp://127.0.0.1:{ingest_port}",
            ]
        )
        assert code == 0
        deadline = time.monotonic() + 20.0
        while time.monotonic() < deadline:
            stats = gateway.hub.topic_stats(TEMPERATURE_TOPIC)
            heater = gateway.hub.topic_stats(HEATER_TOPIC)
            if stats and heater and stats["nextSeq"] == 121 and heater["nextSeq"] == 121:
                break
            time.sleep(0.01)
        assert gateway.hub.topic_stats(TEMPERATURE_TOPIC)["nextSeq"] == 121

        status, body = http_get(http_port, "/api/closure/controller_model?direction=forward")
        assert status == 200
        independent = build_constellation(model, builtin_vocabulary())
        assert body == closure_json(independent, "controller_model", "forward").encode()

        status, index_body = http_get(http_port, "/")
        assert status == 200
        assert index_body == (site / "index.html").read_bytes()
        status, svg_body = http_get(http_port, "/constellation.svg")
        assert status == 200
        assert svg_body == (site / "constellation.svg").read_bytes()

        status, samples_body = http_get(http_port, f"/api/samples/{TEMPERATURE_TOPIC}")
        assert status == 200
        assert len(json.loads(samples_body)["samples"]) == 120
    finally:
        gateway.stop()

    elapsed = time.perf_counter() - t_start
    assert elapsed < 30.0
    announce(
        capsys,
        f"ACCEPTANCE 9 PASS: simulate → gateway → report pipeline served the site "
        f"with byte-equal closure output in {elapsed:.2f} s",
    )
