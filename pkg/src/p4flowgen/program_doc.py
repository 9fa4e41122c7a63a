"""JSON document formats: programs, packet traces, and result dumps.

A program document is the declarative twin of the builder API. Loading
one replays every command through the builder, so each semantic check
fires exactly as it would in a script, and the diagnostic carries the
JSON path of the offending node (``processors[0].body[3]``) instead of
a call ordinal.
"""

from __future__ import annotations

import json
from contextlib import contextmanager
from functools import lru_cache
from pathlib import Path

import jsonschema

from .codegen import CodegenConfig, Solution, TemplateId
from .core_model import (
    FieldDecl,
    HeaderLayout,
    RingBufferDecl,
    SharedVariableDecl,
    UValue,
    UWidth,
)
from .errors import FlowgenError
from .flow_ast import (
    AssignConst,
    AssignVar,
    Add,
    Cast,
    Equals,
    FlowProcessor,
    Forward,
    Greater,
    Hint,
    Rand,
    RingPush,
    RingReadHead,
    SemanticError,
    SendBack,
    Sub,
    bool_local,
    local,
    new_flow_processor,
)
from .selector import Criterion, ProtocolStack, new_flow_selector
from .simulator import SimPacket, SimResult, make_tcp_packet, make_udp_packet


class DocError(FlowgenError):
    """Structural problem in a document: schema violation or a value the
    format itself cannot express."""

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class DocSemanticError(FlowgenError):
    """A semantic check failed while replaying the document."""

    def __init__(self, path: str, kind: str, message: str) -> None:
        super().__init__(f"{path}: [{kind}] {message}")
        self.path = path
        self.kind = kind
        self.message = message


SCHEMA_DIR = Path(__file__).parent / "schemas"


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    """A shipped schema by short name ("program" or "trace")."""
    return json.loads((SCHEMA_DIR / f"{name}.schema.json").read_text())


def _error_relevance(error):
    # A stray-key complaint is only the root cause when nothing else is
    # wrong; a typo'd op otherwise drowns in "unexpected properties".
    return (error.validator != "unevaluatedProperties",
            jsonschema.exceptions.relevance(error))


def _validate(doc, schema_name: str) -> None:
    validator = jsonschema.Draft202012Validator(load_schema(schema_name))
    error = jsonschema.exceptions.best_match(
        validator.iter_errors(doc), key=_error_relevance
    )
    if error is not None:
        path = error.json_path
        path = path[2:] if path.startswith("$.") else path
        raise DocError(path or "$", error.message)


def validate_program_doc(doc) -> None:
    _validate(doc, "program")


def validate_trace_doc(doc) -> None:
    _validate(doc, "trace")


def dumps_doc(doc) -> str:
    """The one serialization used for assets and golden files."""
    return json.dumps(doc, indent=2) + "\n"


# -- programs: document form of a Solution -----------------------------------


def solution_to_doc(solution: Solution) -> dict:
    """Hoist layouts out of the processors and selectors into one named
    section; everything else mirrors the builder state."""
    layouts: dict[str, HeaderLayout] = {}

    def register(layout):
        if layout is None:
            return None
        before = layouts.setdefault(layout.name, layout)
        if before != layout:
            raise DocError(
                "layouts",
                f"layout name {layout.name!r} used for two structures",
            )
        return layout.name

    processors = []
    for proc in solution.processors():
        pdoc = proc.to_doc()
        pdoc["input"] = register(proc.input)
        pdoc["output"] = register(proc.output)
        processors.append(pdoc)
    selectors = []
    for sel in solution.selectors:
        selectors.append(
            {
                "name": sel.name,
                "stack": sel.stack.value,
                "criteria": [
                    {
                        "field": c.field,
                        "width": c.value.width.bits,
                        "value": c.value.magnitude,
                    }
                    for c in sel.criteria
                ],
                "lookahead": register(sel.lookahead),
                "processor": sel.processor.name,
            }
        )
    return {
        "version": 1,
        "template": solution.template.value,
        "options": {
            "emit_combined": solution.options.emit_combined,
            "indent": solution.options.indent,
        },
        "layouts": [
            {
                "name": layout.name,
                "fields": [
                    {"name": f.name, "width": f.width.bits}
                    for f in layout.fields
                ],
            }
            for layout in layouts.values()
        ],
        "processors": processors,
        "selectors": selectors,
    }


@contextmanager
def _at(path: str):
    """Wrap builder exceptions with the JSON path of the current node."""
    try:
        yield
    except DocSemanticError:
        raise
    except SemanticError as e:
        raise DocSemanticError(path, e.kind.value, e.message) from None
    except FlowgenError as e:
        raise DocSemanticError(path, type(e).__name__, str(e)) from None
    except ValueError as e:
        raise DocSemanticError(path, "WidthMismatch", str(e)) from None


def _uvalue(doc) -> UValue:
    return UValue(UWidth(doc["width"]), doc["value"])


def _operand(proc: FlowProcessor, doc):
    if "var" in doc:
        return proc.var(doc["var"])
    return _uvalue(doc["const"])


def _replay_command(proc: FlowProcessor, block, cdoc: dict, site: str):
    """Replay one command doc; returns the block for the next command."""
    op = cdoc["op"]
    if op == "if":
        with _at(site):
            inner = block.If(proc.var(cdoc["cond"]))
        _replay_body(proc, inner, cdoc["then"], site + ".then")
        if cdoc.get("else") is not None:
            with _at(site):
                inner = inner.Else()
            _replay_body(proc, inner, cdoc["else"], site + ".else")
        with _at(site):
            return inner.EndIf()
    if op == "switch":
        with _at(site):
            inner = block.Switch(_operand(proc, cdoc["selector"]))
        for k, case in enumerate(cdoc["cases"]):
            case_site = f"{site}.cases[{k}]"
            with _at(case_site):
                inner = inner.Case(_uvalue(case["value"]))
            _replay_body(proc, inner, case["body"], case_site + ".body")
        with _at(site):
            return inner.EndSwitch()
    if op == "atomic":
        with _at(site):
            inner = block.Atomic()
        _replay_body(proc, inner, cdoc["body"], site + ".body")
        with _at(site):
            return inner.EndAtomic()

    with _at(site):
        if op == "assign_const":
            cmd = AssignConst(proc.var(cdoc["target"]), _uvalue(cdoc["value"]))
        elif op == "assign_var":
            cmd = AssignVar(proc.var(cdoc["target"]), _operand(proc, cdoc["source"]))
        elif op == "cast":
            cmd = Cast(proc.var(cdoc["target"]), _operand(proc, cdoc["source"]))
        elif op == "add":
            cmd = Add(
                proc.var(cdoc["target"]),
                _operand(proc, cdoc["lhs"]),
                _operand(proc, cdoc["rhs"]),
            )
        elif op == "sub":
            cmd = Sub(
                proc.var(cdoc["target"]),
                _operand(proc, cdoc["lhs"]),
                _operand(proc, cdoc["rhs"]),
            )
        elif op == "equals":
            cmd = Equals(
                proc.var(cdoc["target"]),
                _operand(proc, cdoc["lhs"]),
                _operand(proc, cdoc["rhs"]),
                hint=Hint(cdoc.get("hint", "if_else")),
            )
        elif op == "greater":
            cmd = Greater(
                proc.var(cdoc["target"]),
                _operand(proc, cdoc["lhs"]),
                _operand(proc, cdoc["rhs"]),
            )
        elif op == "rand":
            cmd = Rand(proc.var(cdoc["target"]))
        elif op == "ring_push":
            cmd = RingPush(cdoc["ring"], _operand(proc, cdoc["source"]))
        elif op == "ring_read_head":
            cmd = RingReadHead(cdoc["ring"], proc.var(cdoc["target"]))
        elif op == "send_back":
            cmd = SendBack()
        elif op == "forward":
            cmd = Forward(cdoc["port"])
        else:
            raise DocError(site, f"unknown op {op!r}")
        return block.add(cmd)


def _replay_body(proc: FlowProcessor, block, body: list, path: str):
    for j, cdoc in enumerate(body):
        block = _replay_command(proc, block, cdoc, f"{path}[{j}]")
    return block


def _replay_processor(pdoc: dict, layouts: dict, path: str) -> FlowProcessor:
    def layout_of(name: str):
        if name not in layouts:
            raise DocSemanticError(
                path, "UndeclaredName", f"unknown layout {name!r}"
            )
        return layouts[name]

    with _at(path):
        locals_ = [
            bool_local(d["name"])
            if d.get("bool")
            else local(d["name"], UWidth(d["width"]))
            for d in pdoc.get("locals", [])
        ]
        shared = [
            SharedVariableDecl(
                d["name"],
                UWidth(d["width"]),
                UValue(UWidth(d["width"]), d["initial"]),
            )
            for d in pdoc.get("shared", [])
        ]
        rings = [
            RingBufferDecl(d["name"], UWidth(d["width"]), d["capacity"])
            for d in pdoc.get("rings", [])
        ]
        proc = new_flow_processor(
            pdoc["name"],
            input=layout_of(pdoc["input"]),
            output=layout_of(pdoc["output"]) if pdoc.get("output") else None,
            locals=locals_,
            shared=shared,
            rings=rings,
            truncate_payload=pdoc.get("truncate_payload", False),
        )
    _replay_body(proc, proc.body, pdoc["body"], f"{path}.body")
    with _at(path):
        proc.validate_complete()
    return proc


def solution_from_doc(doc) -> Solution:
    """Validate, then rebuild the Solution by replaying the document
    through the builder API. Stored ordinals are informational and
    ignored; the replay assigns the canonical ones."""
    validate_program_doc(doc)
    layouts: dict[str, HeaderLayout] = {}
    for i, ldoc in enumerate(doc["layouts"]):
        path = f"layouts[{i}]"
        if ldoc["name"] in layouts:
            raise DocSemanticError(
                path, "DuplicateName", f"layout {ldoc['name']!r} declared twice"
            )
        with _at(path):
            layouts[ldoc["name"]] = HeaderLayout(
                ldoc["name"],
                [FieldDecl(f["name"], UWidth(f["width"])) for f in ldoc["fields"]],
            )
    processors: dict[str, FlowProcessor] = {}
    for i, pdoc in enumerate(doc["processors"]):
        path = f"processors[{i}]"
        if pdoc["name"] in processors:
            raise DocSemanticError(
                path,
                "DuplicateName",
                f"processor {pdoc['name']!r} declared twice",
            )
        processors[pdoc["name"]] = _replay_processor(pdoc, layouts, path)
    selectors = []
    for i, sdoc in enumerate(doc["selectors"]):
        path = f"selectors[{i}]"
        if sdoc["processor"] not in processors:
            raise DocSemanticError(
                path,
                "UndeclaredName",
                f"unknown processor {sdoc['processor']!r}",
            )
        lookahead = None
        if sdoc.get("lookahead"):
            if sdoc["lookahead"] not in layouts:
                raise DocSemanticError(
                    path,
                    "UndeclaredName",
                    f"unknown layout {sdoc['lookahead']!r}",
                )
            lookahead = layouts[sdoc["lookahead"]]
        with _at(path):
            criteria = [
                Criterion(c["field"], UValue(UWidth(c["width"]), c["value"]))
                for c in sdoc["criteria"]
            ]
            selectors.append(
                new_flow_selector(
                    sdoc["name"],
                    ProtocolStack(sdoc["stack"]),
                    criteria,
                    processors[sdoc["processor"]],
                    lookahead=lookahead,
                )
            )
    options = doc.get("options", {})
    with _at("selectors"):
        return Solution(
            selectors,
            template=TemplateId(doc["template"]),
            options=CodegenConfig(
                emit_combined=options.get("emit_combined", True),
                indent=options.get("indent", 4),
            ),
        )


def load_program(path) -> Solution:
    """Read, validate, and replay a program file."""
    return solution_from_doc(load_json(path))


def load_json(path):
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise DocError("$", f"not valid JSON: {e}") from None


# -- traces: packets in, results out -----------------------------------------

_PACKET_FIELD_BITS = {
    "eth": {"dstAddr": 48, "srcAddr": 48, "etherType": 16},
    "ipv4": {
        "version": 4,
        "ihl": 4,
        "dscp": 6,
        "ecn": 2,
        "totalLen": 16,
        "identification": 16,
        "flags": 3,
        "fragOffset": 13,
        "ttl": 8,
        "protocol": 8,
        "hdrChecksum": 16,
        "srcAddr": 32,
        "dstAddr": 32,
    },
    "udp": {"srcPort": 16, "dstPort": 16, "len": 16, "checksum": 16},
    "tcp": {
        "srcPort": 16,
        "dstPort": 16,
        "seqNo": 32,
        "ackNo": 32,
        "dataOffset": 4,
        "flags": 8,
        "window": 16,
        "checksum": 16,
        "urgentPtr": 16,
    },
}


def parse_field_value(text: str) -> int:
    """Decimal by default, hex with an 0x prefix."""
    return int(text, 16) if text.startswith("0x") else int(text, 10)


def packet_from_doc(pdoc: dict, path: str = "packet") -> SimPacket:
    """Build a SimPacket from its document: defaults first (lengths and
    checksums derived from the payload), explicit fields overlaid."""
    try:
        payload = bytes.fromhex(pdoc["payload"])
    except ValueError as e:
        raise DocError(f"{path}.payload", str(e)) from None
    if "udp" in pdoc:
        packet = make_udp_packet(0, payload=payload)
    else:
        packet = make_tcp_packet(0, payload=payload)
    packet.ingress_port = pdoc.get("ingress_port", 0)
    for group in ("eth", "ipv4", "udp", "tcp"):
        overrides = pdoc.get(group)
        if overrides is None:
            continue
        target = getattr(packet, group)
        bits = _PACKET_FIELD_BITS[group]
        for name, text in overrides.items():
            field_path = f"{path}.{group}.{name}"
            if name not in bits:
                raise DocError(field_path, f"unknown field {group}.{name}")
            value = parse_field_value(text)
            if value >= 1 << bits[name]:
                raise DocError(
                    field_path, f"{value} does not fit in {bits[name]} bits"
                )
            target[name] = value
    return packet


def trace_from_doc(doc) -> tuple[int, list[SimPacket]]:
    validate_trace_doc(doc)
    packets = [
        packet_from_doc(pdoc, f"packets[{i}]")
        for i, pdoc in enumerate(doc["packets"])
    ]
    return doc["seed"], packets


def load_trace(path) -> tuple[int, list[SimPacket]]:
    return trace_from_doc(load_json(path))


def result_to_doc(result: SimResult) -> dict:
    packet = result.packet
    doc = {
        "verdict": result.verdict,
        "selector": result.selector,
        "egress_port": result.egress_port,
        "eth": {k: str(v) for k, v in packet.eth.items()},
        "ipv4": {k: str(v) for k, v in packet.ipv4.items()},
    }
    if packet.udp is not None:
        doc["udp"] = {k: str(v) for k, v in packet.udp.items()}
    if packet.tcp is not None:
        doc["tcp"] = {k: str(v) for k, v in packet.tcp.items()}
    doc["payload_hex"] = packet.payload.hex()
    doc["trace"] = [
        {
            "ordinal": e.ordinal,
            "kind": e.kind,
            "before": list(e.before),
            "after": list(e.after),
        }
        for e in result.trace
    ]
    if result.error is not None:
        doc["error"] = result.error
    return doc


def results_to_doc(seed: int, results) -> dict:
    return {"seed": seed, "results": [result_to_doc(r) for r in results]}
