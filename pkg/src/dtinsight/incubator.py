"""Demo telemetry source: a lumped thermal plant with a hysteresis controller.

The plant integrates ``dT/dt = (heater_power*on - loss_conductance*(T - ambient))
/ heat_capacity`` with explicit Euler steps. The controller switches the
heater on below ``setpoint - hysteresis`` and off above ``setpoint +
hysteresis``. With the heater held on, temperature settles at ``ambient +
heater_power / loss_conductance``.

Emitted lines are deterministic for a given parameter set: measurement noise
comes from Python's ``random.Random`` (a seeded Mersenne Twister) through its
``gauss`` method, and timestamps advance from ``t0`` by the fixed step.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .gateway import send_lines_tcp

TEMPERATURE_TOPIC = "incubator.t1"
HEATER_TOPIC = "incubator.heater"


@dataclass(frozen=True)
class SimParams:
    heat_capacity: float = 300.0  # J/K
    heater_power: float = 20.0  # W
    loss_conductance: float = 0.5  # W/K
    ambient: float = 21.0  # degC
    setpoint: float = 35.0  # degC
    hysteresis: float = 1.0  # K
    dt: float = 1.0  # s
    noise_std: float = 0.05  # K
    seed: int = 0
    emit_every: int = 1
    t0: float = 0.0

    def __post_init__(self) -> None:
        if self.heat_capacity <= 0:
            raise ValueError("heat_capacity must be positive")
        if self.loss_conductance <= 0:
            raise ValueError("loss_conductance must be positive")
        if self.heater_power < 0:
            raise ValueError("heater_power must not be negative")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.hysteresis < 0:
            raise ValueError("hysteresis must not be negative")
        if self.noise_std < 0:
            raise ValueError("noise_std must not be negative")
        if self.emit_every < 1:
            raise ValueError("emit_every must be at least 1")
        for name in ("heat_capacity", "heater_power", "loss_conductance",
                     "ambient", "setpoint", "hysteresis", "dt", "noise_std", "t0"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def steady_state_on(self) -> float:
        """Equilibrium temperature with the heater permanently on."""
        return self.ambient + self.heater_power / self.loss_conductance

    @property
    def step_quantum(self) -> float:
        """Largest temperature move one step can make near the setpoint band."""
        return self.dt * self.heater_power / self.heat_capacity


@dataclass(frozen=True)
class SimState:
    t: float
    temperature: float
    heater_on: int


def initial_state(params: SimParams) -> SimState:
    return SimState(0.0, params.ambient, 0)


def plant_update(temperature: float, heater_on: int, params: SimParams) -> float:
    """One Euler step of the thermal plant, controller excluded."""
    flow = (
        params.heater_power * heater_on
        - params.loss_conductance * (temperature - params.ambient)
    )
    return temperature + params.dt * flow / params.heat_capacity


def step(state: SimState, params: SimParams) -> SimState:
    """Advance plant then controller by one step."""
    temperature = plant_update(state.temperature, state.heater_on, params)
    low = params.setpoint - params.hysteresis
    high = params.setpoint + params.hysteresis
    if temperature < low:
        heater_on = 1
    elif temperature > high:
        heater_on = 0
    else:
        heater_on = state.heater_on
    return SimState(state.t + params.dt, temperature, heater_on)


def iterate_states(params: SimParams, duration_s: float) -> Iterator[SimState]:
    """States after each step until the clock passes *duration_s*."""
    state = initial_state(params)
    steps = int(duration_s / params.dt)
    for _ in range(steps):
        state = step(state, params)
        yield state


def sample_lines(params: SimParams, duration_s: float) -> Iterator[str]:
    """Telemetry lines (temperature, then heater state) per emitted step.

    Byte-deterministic: same params produce the same lines.
    """
    rng = random.Random(params.seed)
    for i, state in enumerate(iterate_states(params, duration_s), start=1):
        if i % params.emit_every != 0:
            continue
        ts = params.t0 + state.t
        measured = state.temperature + rng.gauss(0.0, params.noise_std)
        yield json.dumps(
            {
                "topic": TEMPERATURE_TOPIC,
                "ts": ts,
                "fields": {"temperature": measured},
            },
            separators=(",", ":"),
        )
        yield json.dumps(
            {
                "topic": HEATER_TOPIC,
                "ts": ts,
                "fields": {"on": float(state.heater_on)},
            },
            separators=(",", ":"),
        )


def run(params: SimParams, duration_s: float, sink: str) -> int:
    """Generate samples and deliver them to *sink*.

    ``tcp://host:port`` streams to a live ingest endpoint; anything else is
    treated as an output file path (one sample per line). Returns the number
    of lines delivered.
    """
    lines = sample_lines(params, duration_s)
    if sink.startswith("tcp://"):
        rest = sink[len("tcp://") :]
        host, _, port_text = rest.rpartition(":")
        if not host or not port_text.isdigit():
            raise ValueError(f"sink {sink!r} must look like tcp://host:port")
        return send_lines_tcp(host, int(port_text), lines)
    path = Path(sink)
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")
            count += 1
    return count
