#!/usr/bin/env python3
"""Run the in-payload aggregation example over a handful of packets.

Each UDP payload starts with two u16 fields; the switch prepends their
u32 sum, growing the packet by four bytes. Prints the before/after
payloads and the header fields that changed.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from p4flowgen.builtin_examples import AGG_PORT, insert_agg_solution
from p4flowgen.codegen import generate
from p4flowgen.simulator import initial_state, make_udp_packet, simulate_packet


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--count", type=int, default=5, help="packets to send")
    parser.add_argument("--seed", type=int, default=1, help="payload rng seed")
    parser.add_argument("--emit", metavar="DIR", help="also write generated P4 here")
    args = parser.parse_args(argv)

    solution = insert_agg_solution()
    state = initial_state(solution, seed=0)
    rng = random.Random(args.seed)

    for i in range(args.count):
        a, b = rng.randrange(1 << 16), rng.randrange(1 << 16)
        payload = a.to_bytes(2, "big") + b.to_bytes(2, "big") + rng.randbytes(4)
        packet = make_udp_packet(AGG_PORT, payload=payload)
        result, state = simulate_packet(solution, state, packet)
        out = result.packet
        print(f"packet {i}: {a} + {b} = {a + b}")
        print(f"  in  payload={payload.hex()} totalLen={packet.ipv4['totalLen']}")
        print(f"  out payload={out.payload.hex()} totalLen={out.ipv4['totalLen']}")

    if args.emit:
        for path in sorted(generate(solution).write_to(args.emit)):
            print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
