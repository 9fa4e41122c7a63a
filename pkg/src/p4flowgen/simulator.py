"""Bit-exact execution of a Solution on synthetic packets.

The simulator classifies packets against the selectors, runs the matched
processor's commands with the same fixed-width wraparound semantics the
generated code has, applies the same length and checksum fixups, and
threads shared state (registers, rings, the random generator) across
packets. No P4 is involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .codegen import Solution
from .core_model import (
    U16,
    UValue,
    UWidth,
    deserialize_layout,
    internet_checksum,
    serialize_layout,
)
from .errors import MalformedPacket
from .flow_ast import (
    Add,
    AssignConst,
    AssignVar,
    AtomicNode,
    Block,
    Cast,
    Equals,
    FlowProcessor,
    Forward,
    Greater,
    IfNode,
    Rand,
    RingPush,
    RingReadHead,
    Scope,
    SendBack,
    Sub,
    SwitchNode,
    VarRef,
)
from .selector import FlowSelector, ProtocolStack

PROCESSED = "PROCESSED"
PASSTHROUGH = "PASSTHROUGH"

_L4_BYTES = {ProtocolStack.IPV4_UDP: 8, ProtocolStack.IPV4_TCP: 20}


class SplitMix64:
    """Deterministic 64-bit generator (splitmix64).

    State advances by the golden-gamma constant; output is the state run
    through two xor-shift-multiply rounds. Bit-exact definition:

        state = (state + 0x9E3779B97F4A7C15) mod 2^64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2^64
        output = z ^ (z >> 31)

    A w-bit draw keeps the low w bits of the 64-bit output.
    """

    MASK = (1 << 64) - 1

    def __init__(self, seed: int) -> None:
        self.state = seed & self.MASK

    def next64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def draw(self, width: UWidth) -> int:
        return self.next64() & width.mask

    def copy(self) -> "SplitMix64":
        clone = SplitMix64(0)
        clone.state = self.state
        return clone


@dataclass
class SimPacket:
    """A synthetic packet: standard-header field maps plus raw payload.

    The udp and tcp maps are mutually exclusive; a packet with neither
    is plain IPv4 and can only pass through.
    """

    ingress_port: int
    eth: dict[str, int]
    ipv4: dict[str, int]
    udp: Optional[dict[str, int]] = None
    tcp: Optional[dict[str, int]] = None
    payload: bytes = b""

    def validate(self) -> None:
        if not 0 <= self.ingress_port <= 0xFFFF:
            raise MalformedPacket(f"ingress port {self.ingress_port} out of range")
        if self.udp is not None and self.tcp is not None:
            raise MalformedPacket("packet cannot carry both UDP and TCP")
        if not isinstance(self.payload, (bytes, bytearray)):
            raise MalformedPacket("payload must be bytes")

    def stack(self) -> Optional[ProtocolStack]:
        if self.udp is not None:
            return ProtocolStack.IPV4_UDP
        if self.tcp is not None:
            return ProtocolStack.IPV4_TCP
        return None

    def get_field(self, qualified: str) -> int:
        group_name, _, leaf = qualified.partition(".")
        group = getattr(self, group_name, None)
        if not isinstance(group, dict) or leaf not in group:
            raise MalformedPacket(f"packet has no field {qualified!r}")
        return group[leaf]

    def copy(self) -> "SimPacket":
        return SimPacket(
            ingress_port=self.ingress_port,
            eth=dict(self.eth),
            ipv4=dict(self.ipv4),
            udp=dict(self.udp) if self.udp is not None else None,
            tcp=dict(self.tcp) if self.tcp is not None else None,
            payload=bytes(self.payload),
        )

    def to_bytes(self) -> bytes:
        out = bytearray()
        out += self.eth["dstAddr"].to_bytes(6, "big")
        out += self.eth["srcAddr"].to_bytes(6, "big")
        out += self.eth["etherType"].to_bytes(2, "big")
        out += ipv4_header_bytes(self.ipv4)
        if self.udp is not None:
            for name in ("srcPort", "dstPort", "len", "checksum"):
                out += self.udp[name].to_bytes(2, "big")
        elif self.tcp is not None:
            t = self.tcp
            out += t["srcPort"].to_bytes(2, "big")
            out += t["dstPort"].to_bytes(2, "big")
            out += t["seqNo"].to_bytes(4, "big")
            out += t["ackNo"].to_bytes(4, "big")
            out += ((t["dataOffset"] << 12) | t["flags"]).to_bytes(2, "big")
            out += t["window"].to_bytes(2, "big")
            out += t["checksum"].to_bytes(2, "big")
            out += t["urgentPtr"].to_bytes(2, "big")
        out += self.payload
        return bytes(out)


def ipv4_header_bytes(ipv4: dict[str, int]) -> bytes:
    """The 20 header bytes in wire order (options unsupported)."""
    out = bytearray()
    out.append((ipv4["version"] << 4) | ipv4["ihl"])
    out.append((ipv4["dscp"] << 2) | ipv4["ecn"])
    out += ipv4["totalLen"].to_bytes(2, "big")
    out += ipv4["identification"].to_bytes(2, "big")
    out += ((ipv4["flags"] << 13) | ipv4["fragOffset"]).to_bytes(2, "big")
    out.append(ipv4["ttl"])
    out.append(ipv4["protocol"])
    out += ipv4["hdrChecksum"].to_bytes(2, "big")
    out += ipv4["srcAddr"].to_bytes(4, "big")
    out += ipv4["dstAddr"].to_bytes(4, "big")
    return bytes(out)


def _base_ipv4(protocol: int, payload_len: int, src, dst, ttl: int) -> dict[str, int]:
    header = {
        "version": 4,
        "ihl": 5,
        "dscp": 0,
        "ecn": 0,
        "totalLen": 20 + payload_len,
        "identification": 0,
        "flags": 0,
        "fragOffset": 0,
        "ttl": ttl,
        "protocol": protocol,
        "hdrChecksum": 0,
        "srcAddr": src,
        "dstAddr": dst,
    }
    header["hdrChecksum"] = internet_checksum(ipv4_header_bytes(header)).magnitude
    return header


def make_udp_packet(
    dst_port: int,
    payload: bytes = b"",
    src_port: int = 40000,
    ingress_port: int = 0,
    src_addr: int = 0x0A000001,
    dst_addr: int = 0x0A000002,
    ttl: int = 64,
) -> SimPacket:
    """A consistent UDP packet: lengths derived from the payload, valid
    IPv4 header checksum, UDP checksum left unused (0)."""
    return SimPacket(
        ingress_port=ingress_port,
        eth={"dstAddr": 0x020000000002, "srcAddr": 0x020000000001, "etherType": 0x0800},
        ipv4=_base_ipv4(17, 8 + len(payload), src_addr, dst_addr, ttl),
        udp={
            "srcPort": src_port,
            "dstPort": dst_port,
            "len": 8 + len(payload),
            "checksum": 0,
        },
        payload=bytes(payload),
    )


def make_tcp_packet(
    dst_port: int,
    payload: bytes = b"",
    src_port: int = 40000,
    ingress_port: int = 0,
    src_addr: int = 0x0A000001,
    dst_addr: int = 0x0A000002,
    ttl: int = 64,
) -> SimPacket:
    """A consistent TCP packet with a bare 20-byte header."""
    return SimPacket(
        ingress_port=ingress_port,
        eth={"dstAddr": 0x020000000002, "srcAddr": 0x020000000001, "etherType": 0x0800},
        ipv4=_base_ipv4(6, 20 + len(payload), src_addr, dst_addr, ttl),
        tcp={
            "srcPort": src_port,
            "dstPort": dst_port,
            "seqNo": 0,
            "ackNo": 0,
            "dataOffset": 5,
            "flags": 0x18,
            "window": 65535,
            "checksum": 0,
            "urgentPtr": 0,
        },
        payload=bytes(payload),
    )


@dataclass
class RingState:
    slots: list[int]
    head: int


@dataclass
class SimState:
    """Everything that persists across packets."""

    shared: dict[tuple[str, str], UValue]
    rings: dict[tuple[str, str], RingState]
    rng: SplitMix64

    def copy(self) -> "SimState":
        return SimState(
            shared=dict(self.shared),
            rings={
                key: RingState(list(r.slots), r.head)
                for key, r in self.rings.items()
            },
            rng=self.rng.copy(),
        )


def initial_state(solution: Solution, seed: int = 0) -> SimState:
    """A fresh SimState: declared initial values, zeroed rings, seeded rng."""
    shared: dict[tuple[str, str], UValue] = {}
    rings: dict[tuple[str, str], RingState] = {}
    for p in solution.processors():
        for d in p.shared:
            shared[(p.name, d.name)] = d.initial
        for r in p.rings:
            rings[(p.name, r.name)] = RingState([0] * r.capacity, 0)
    return SimState(shared=shared, rings=rings, rng=SplitMix64(seed))


@dataclass(frozen=True)
class TraceEvent:
    """One executed command: its builder ordinal, kind, and the involved
    values before and after execution (same positional layout)."""

    ordinal: int
    kind: str
    before: tuple[int, ...]
    after: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class SimResult:
    verdict: str
    selector: Optional[str]
    egress_port: int
    packet: SimPacket
    trace: tuple[TraceEvent, ...] = ()
    error: Optional[str] = None


def classify(solution: Solution, packet: SimPacket) -> Optional[FlowSelector]:
    """First registered selector whose stack and criteria all match.

    Raises MalformedPacket when a selector's non-payload criteria match
    but the payload is too short for its lookahead window or input layout.
    """
    packet.validate()
    stack = packet.stack()
    for sel in solution.selectors:
        if sel.stack is not stack:
            continue
        standard = [c for c in sel.criteria if "." in c.field]
        if not all(
            packet.get_field(c.field) == c.value.magnitude for c in standard
        ):
            continue
        if sel.lookahead is not None:
            if len(packet.payload) < sel.lookahead.byte_size:
                raise MalformedPacket(
                    f"payload too short for lookahead of selector {sel.name!r}"
                )
            peeked = deserialize_layout(sel.lookahead, packet.payload)
            if not all(
                peeked[c.field].magnitude == c.value.magnitude
                for c in sel.criteria
                if "." not in c.field
            ):
                continue
        if len(packet.payload) < sel.processor.input.byte_size:
            raise MalformedPacket(
                f"payload too short for input of selector {sel.name!r}"
            )
        return sel
    return None


class _Execution:
    """One processor run over one packet."""

    def __init__(self, proc: FlowProcessor, state: SimState, packet: SimPacket) -> None:
        self.proc = proc
        self.state = state
        self.ingress_port = packet.ingress_port
        self.events: list[TraceEvent] = [TraceEvent(0, "match", (), ())]
        self.egress: Optional[int] = None
        self.env: dict[str, int] = {}
        for name, value in deserialize_layout(proc.input, packet.payload).items():
            self.env[name] = value.magnitude
        if proc.output is not None:
            for f in proc.output.fields:
                self.env[f.name] = 0
        for d in proc.locals:
            self.env[d.name] = 0
        for d in proc.shared:
            self.env[d.name] = state.shared[(proc.name, d.name)].magnitude

    def read(self, op) -> int:
        if isinstance(op, UValue):
            return op.magnitude
        return self.env[op.name]

    def write(self, ref: VarRef, value: int) -> None:
        self.env[ref.name] = value
        if ref.scope is Scope.SHARED:
            self.state.shared[(self.proc.name, ref.name)] = UValue(ref.width, value)

    def ring(self, name: str) -> RingState:
        return self.state.rings[(self.proc.name, name)]

    def event(self, ordinal: int, kind: str, before, after) -> None:
        self.events.append(TraceEvent(ordinal, kind, tuple(before), tuple(after)))

    def run_block(self, block: Block) -> None:
        for cmd in block.commands:
            self.run_command(cmd)

    def run_command(self, cmd) -> None:
        if isinstance(cmd, IfNode):
            cond = self.env[cmd.cond.name]
            self.event(cmd.ordinal, "if", (cond,), (cond,))
            if cond == 1:
                self.run_block(cmd.then_block)
            elif cmd.else_block is not None:
                self.run_block(cmd.else_block)
            return
        if isinstance(cmd, SwitchNode):
            chosen = self.read(cmd.selector)
            self.event(cmd.ordinal, "switch", (chosen,), (chosen,))
            for value, _, case_block in cmd.cases:
                if value.magnitude == chosen:
                    self.run_block(case_block)
                    break
            return
        if isinstance(cmd, AtomicNode):
            self.event(cmd.ordinal, "atomic_begin", (), ())
            self.run_block(cmd.block)
            self.event(cmd.end_ordinal, "atomic_end", (), ())
            return

        if isinstance(cmd, AssignConst):
            before = (self.read(cmd.target), cmd.value.magnitude)
            self.write(cmd.target, cmd.value.magnitude)
            self.event(cmd.ordinal, "assign_const", before, (cmd.value.magnitude, cmd.value.magnitude))
        elif isinstance(cmd, AssignVar):
            src = self.read(cmd.source)
            before = (self.read(cmd.target), src)
            self.write(cmd.target, src)
            self.event(cmd.ordinal, "assign_var", before, (src, src))
        elif isinstance(cmd, Cast):
            src = self.read(cmd.source)
            result = src & cmd.target.width.mask
            before = (self.read(cmd.target), src)
            self.write(cmd.target, result)
            self.event(cmd.ordinal, "cast", before, (result, src))
        elif isinstance(cmd, (Add, Sub)):
            lhs, rhs = self.read(cmd.lhs), self.read(cmd.rhs)
            if isinstance(cmd, Add):
                result = (lhs + rhs) & cmd.target.width.mask
                kind = "add"
            else:
                result = (lhs - rhs) & cmd.target.width.mask
                kind = "sub"
            before = (self.read(cmd.target), lhs, rhs)
            self.write(cmd.target, result)
            self.event(cmd.ordinal, kind, before, (result, lhs, rhs))
        elif isinstance(cmd, (Equals, Greater)):
            lhs, rhs = self.read(cmd.lhs), self.read(cmd.rhs)
            if isinstance(cmd, Equals):
                result = 1 if lhs == rhs else 0
                kind = "equals"
            else:
                result = 1 if lhs > rhs else 0
                kind = "greater"
            before = (self.read(cmd.target), lhs, rhs)
            self.write(cmd.target, result)
            self.event(cmd.ordinal, kind, before, (result, lhs, rhs))
        elif isinstance(cmd, Rand):
            before = (self.read(cmd.target),)
            result = self.state.rng.draw(cmd.target.width)
            self.write(cmd.target, result)
            self.event(cmd.ordinal, "rand", before, (result,))
        elif isinstance(cmd, RingPush):
            ring = self.ring(cmd.ring)
            value = self.read(cmd.source)
            before = (value, ring.head)
            ring.slots[ring.head] = value
            ring.head = (ring.head + 1) % len(ring.slots)
            self.event(cmd.ordinal, "ring_push", before, (value, ring.head))
        elif isinstance(cmd, RingReadHead):
            ring = self.ring(cmd.ring)
            value = ring.slots[ring.head]
            before = (self.read(cmd.target),)
            self.write(cmd.target, value)
            self.event(cmd.ordinal, "ring_read_head", before, (value,))
        elif isinstance(cmd, SendBack):
            self.egress = self.ingress_port
            self.event(cmd.ordinal, "send_back", (), ())
        elif isinstance(cmd, Forward):
            self.egress = cmd.port
            self.event(cmd.ordinal, "forward", (cmd.port,), (cmd.port,))
        else:
            raise TypeError(f"cannot simulate {cmd!r}")


def _egress_fixups(packet: SimPacket, proc: FlowProcessor, env: dict[str, int]) -> SimPacket:
    """Build the outgoing packet: output bytes replace input bytes at the
    payload start, lengths shift by the byte delta, checksums follow the
    same rules the generated pipeline applies."""
    out = packet.copy()
    if proc.output is None:
        return out
    values = {
        f.name: UValue(f.width, env[f.name]) for f in proc.output.fields
    }
    new_payload = serialize_layout(proc.output, values)
    if not proc.truncate_payload:
        new_payload += packet.payload[proc.input.byte_size :]
    delta = len(new_payload) - len(packet.payload)
    out.payload = new_payload
    out.ipv4["totalLen"] = (out.ipv4["totalLen"] + delta) & U16.mask
    if out.udp is not None:
        out.udp["len"] = (out.udp["len"] + delta) & U16.mask
        out.udp["checksum"] = 0
    out.ipv4["hdrChecksum"] = 0
    out.ipv4["hdrChecksum"] = internet_checksum(
        ipv4_header_bytes(out.ipv4)
    ).magnitude
    return out


def simulate_packet(
    solution: Solution, state: SimState, packet: SimPacket
) -> tuple[SimResult, SimState]:
    """Run one packet. The state is updated in place and also returned.

    The input packet is never mutated; a PASSTHROUGH result carries it
    unchanged, a PROCESSED result carries a rebuilt copy.
    """
    default_egress = packet.ingress_port ^ 1
    sel = classify(solution, packet)
    if sel is None:
        return (
            SimResult(PASSTHROUGH, None, default_egress, packet),
            state,
        )
    proc = sel.processor
    run = _Execution(proc, state, packet)
    run.run_block(proc.body)
    egress = run.egress if run.egress is not None else default_egress
    out_packet = _egress_fixups(packet, proc, run.env)
    result = SimResult(
        PROCESSED, sel.name, egress, out_packet, tuple(run.events)
    )
    return result, state


def run_trace(solution: Solution, packets, seed: int = 0) -> list[SimResult]:
    """Simulate packets in order through one shared state. Per-packet
    malformed-packet errors are recorded on the result, not raised."""
    state = initial_state(solution, seed)
    results: list[SimResult] = []
    for packet in packets:
        try:
            result, state = simulate_packet(solution, state, packet)
        except MalformedPacket as e:
            result = SimResult(
                PASSTHROUGH,
                None,
                packet.ingress_port ^ 1,
                packet,
                error=str(e),
            )
        results.append(result)
    return results
