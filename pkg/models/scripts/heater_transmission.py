"""Publishes the heater relay state alongside each temperature sample."""

import json
import socket
import time

GATEWAY = ("127.0.0.1", 9009)
PERIOD_S = 1.0


def heater_is_on() -> bool:
    # Stand-in for the relay GPIO read on the real rig.
    raise NotImplementedError("wire up the relay GPIO here")


def main() -> None:
    with socket.create_connection(GATEWAY) as conn:
        while True:
            sample = {
                "topic": "incubator.heater",
                "ts": time.time(),
                "fields": {"on": 1.0 if heater_is_on() else 0.0},
            }
            conn.sendall(json.dumps(sample).encode() + b"\n")
            time.sleep(PERIOD_S)


if __name__ == "__main__":
    main()
