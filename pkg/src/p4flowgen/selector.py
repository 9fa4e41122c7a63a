"""Flow selectors and the chain-shaped parser model built from them.

A FlowSelector binds packets of one protocol stack to one processor via a
conjunction of exact-match criteria. Selectors registered for the same
stack form an ordered chain; the first selector whose criteria all match
wins, later ones are never consulted for that packet.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .core_model import HeaderLayout, UValue, check_identifier
from .errors import (
    DuplicateName,
    MissingLookahead,
    UndeclaredName,
    WidthMismatch,
)
from .flow_ast import FlowProcessor


class ProtocolStack(enum.Enum):
    IPV4_UDP = "IPV4_UDP"
    IPV4_TCP = "IPV4_TCP"


# Matchable standard-header fields and their widths in bits. The 48-bit MAC
# addresses are listed for completeness but cannot be matched against any
# UValue width; extending the value model would unlock them.
STANDARD_FIELDS: dict[str, int] = {
    "eth.dstAddr": 48,
    "eth.srcAddr": 48,
    "eth.etherType": 16,
    "ipv4.srcAddr": 32,
    "ipv4.dstAddr": 32,
    "ipv4.protocol": 8,
    "ipv4.totalLen": 16,
    "ipv4.ttl": 8,
    "udp.srcPort": 16,
    "udp.dstPort": 16,
    "udp.len": 16,
    "tcp.srcPort": 16,
    "tcp.dstPort": 16,
}

# Transport headers only exist on their own stack; eth/ipv4 are always there.
_STACK_PREFIXES = {
    ProtocolStack.IPV4_UDP: ("eth", "ipv4", "udp"),
    ProtocolStack.IPV4_TCP: ("eth", "ipv4", "tcp"),
}


@dataclass(frozen=True)
class Criterion:
    """One exact-match requirement: a field name and the value it must hold.

    Qualified names (``udp.dstPort``) address standard headers; bare names
    address fields of the selector's lookahead layout.
    """

    field: str
    value: UValue


@dataclass(frozen=True, eq=False)
class FlowSelector:
    name: str
    stack: ProtocolStack
    criteria: tuple[Criterion, ...]
    lookahead: Optional[HeaderLayout]
    processor: FlowProcessor


@dataclass(frozen=True, eq=False)
class ParserChain:
    """The selectors of one stack in registration order."""

    stack: ProtocolStack
    links: tuple[FlowSelector, ...]


def _criterion_width(stack: ProtocolStack, field: str, lookahead: Optional[HeaderLayout]) -> int:
    if "." in field:
        if field not in STANDARD_FIELDS:
            raise UndeclaredName(f"{field!r} is not a standard header field")
        prefix = field.split(".", 1)[0]
        if prefix not in _STACK_PREFIXES[stack]:
            raise UndeclaredName(f"{field!r} is not parsed on stack {stack.value}")
        return STANDARD_FIELDS[field]
    if lookahead is None:
        raise MissingLookahead(
            f"criterion on payload field {field!r} needs a lookahead layout"
        )
    if not lookahead.has_field(field):
        raise UndeclaredName(
            f"lookahead layout {lookahead.name!r} has no field {field!r}"
        )
    return lookahead.field(field).width.bits


def new_flow_selector(
    name: str,
    stack: ProtocolStack,
    criteria,
    processor: FlowProcessor,
    lookahead: Optional[HeaderLayout] = None,
) -> FlowSelector:
    """Validate and freeze a selector.

    ``criteria`` may hold Criterion objects or plain (field, value) pairs;
    it must be nonempty and every value's width must equal its field's.
    """
    check_identifier(name, "selector name")
    if not isinstance(stack, ProtocolStack):
        raise TypeError(f"expected a ProtocolStack, got {stack!r}")
    if not isinstance(processor, FlowProcessor):
        raise TypeError(f"expected a FlowProcessor, got {processor!r}")
    normalized = tuple(
        c if isinstance(c, Criterion) else Criterion(*c) for c in criteria
    )
    if not normalized:
        raise ValueError(f"selector {name!r} needs at least one criterion")
    for c in normalized:
        if not isinstance(c.value, UValue):
            raise TypeError(f"criterion value must be a UValue, got {c.value!r}")
        width = _criterion_width(stack, c.field, lookahead)
        if c.value.width.bits != width:
            raise WidthMismatch(
                f"criterion {c.field!r} is {width}-bit, value is "
                f"u{c.value.width.bits}"
            )
    if lookahead is not None and processor.input.byte_size > lookahead.byte_size:
        raise WidthMismatch(
            f"input layout {processor.input.name!r} needs "
            f"{processor.input.byte_size} payload bytes but the lookahead "
            f"window guarantees only {lookahead.byte_size}"
        )
    return FlowSelector(name, stack, normalized, lookahead, processor)


def build_chains(selectors) -> dict[ProtocolStack, ParserChain]:
    """Partition selectors into per-stack chains, keeping registration
    order. Stacks without selectors are absent from the result."""
    seen: set[str] = set()
    ordered: dict[ProtocolStack, list[FlowSelector]] = {}
    for s in selectors:
        if s.name in seen:
            raise DuplicateName(f"selector {s.name!r} registered twice")
        seen.add(s.name)
        ordered.setdefault(s.stack, []).append(s)
    return {
        stack: ParserChain(stack, tuple(links)) for stack, links in ordered.items()
    }
