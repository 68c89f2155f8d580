"""Publishes the t1 thermocouple reading once per second.

In the demo setup this is the script bound to the t1_transmission component;
the gateway serves it verbatim so reviewers can inspect what runs on the rig.
"""

import json
import socket
import time

GATEWAY = ("127.0.0.1", 9009)
PERIOD_S = 1.0


def read_t1() -> float:
    # Stand-in for the ADC read on the real rig.
    raise NotImplementedError("wire up the thermocouple ADC here")


def main() -> None:
    with socket.create_connection(GATEWAY) as conn:
        while True:
            sample = {
                "topic": "incubator.t1",
                "ts": time.time(),
                "fields": {"temperature": read_t1()},
            }
            conn.sendall(json.dumps(sample).encode() + b"\n")
            time.sleep(PERIOD_S)


if __name__ == "__main__":
    main()
