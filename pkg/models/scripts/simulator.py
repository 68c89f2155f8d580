"""Runs what-if scenarios by stepping the bundled plant + controller models.

The demo binds this script to the simulator enabler so the report UI can show
the code behind the component.
"""

from dtinsight.incubator import SimParams, initial_state, step


def run_scenario(setpoint: float, duration_s: float) -> list[float]:
    params = SimParams(setpoint=setpoint)
    state = initial_state(params)
    trace = []
    for _ in range(int(duration_s / params.dt)):
        state = step(state, params)
        trace.append(state.temperature)
    return trace


if __name__ == "__main__":
    trace = run_scenario(setpoint=35.0, duration_s=3600.0)
    print(f"final temperature: {trace[-1]:.2f} degC")
