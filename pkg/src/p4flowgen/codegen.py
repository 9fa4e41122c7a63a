"""P4-16 fragment emission.

A Solution (selectors in registration order plus codegen options) turns
into five fragment files that a shipped static template pulls in through
``#include`` hooks:

* headers.p4inc  - header type definitions for user layouts
* parser.p4inc   - chain-enabling ``#define`` lines and parser chain states
* structs.p4inc  - header instances inside the template's headers struct
* decls.p4inc    - control-scope variables, registers, tables and actions
* apply.p4inc    - the per-flow branches executed in the ingress apply block

Output is deterministic: identical Solutions yield byte-identical files.
User constants are emitted verbatim, never folded. Every builder call is
echoed as a ``// [ordinal] Kind`` comment so generated lines trace back to
the source program.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .core_model import HeaderLayout, UValue, UWidth
from .errors import DuplicateName
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
    Hint,
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
from .selector import Criterion, FlowSelector, ParserChain, ProtocolStack, build_chains

FRAGMENT_NAMES = (
    "headers.p4inc",
    "parser.p4inc",
    "structs.p4inc",
    "decls.p4inc",
    "apply.p4inc",
)

COMBINED_NAME = "program.p4"

# Bytes consumed by the fixed headers in front of the application payload.
_ETH_BYTES = 14
_IPV4_BYTES = 20
_L4_BYTES = {ProtocolStack.IPV4_UDP: 8, ProtocolStack.IPV4_TCP: 20}


class TemplateId(enum.Enum):
    V1MODEL_BASIC = "v1model_basic"


@dataclass(frozen=True)
class CodegenConfig:
    output_dir: Optional[str] = None
    emit_combined: bool = True
    indent: int = 4


@dataclass(frozen=True, eq=False)
class Solution:
    """Selectors in registration order plus emission options."""

    selectors: tuple[FlowSelector, ...]
    template: TemplateId = TemplateId.V1MODEL_BASIC
    options: CodegenConfig = field(default_factory=CodegenConfig)

    def __init__(self, selectors, template=TemplateId.V1MODEL_BASIC, options=None):
        object.__setattr__(self, "selectors", tuple(selectors))
        object.__setattr__(self, "template", template)
        object.__setattr__(self, "options", options or CodegenConfig())
        build_chains(self.selectors)  # rejects duplicate selector names

    def processors(self) -> list[FlowProcessor]:
        """Referenced processors, first appearance order, deduplicated."""
        procs: dict[str, FlowProcessor] = {}
        for sel in self.selectors:
            p = sel.processor
            if p.name in procs:
                if procs[p.name] is not p:
                    raise DuplicateName(
                        f"two distinct processors share the name {p.name!r}"
                    )
            else:
                procs[p.name] = p
        return list(procs.values())


@dataclass(frozen=True, eq=False)
class GeneratedFileSet:
    """The emitted fragments (plus the combined program when requested)
    and the template they splice into."""

    files: dict[str, str]
    template_name: str
    template_text: str

    def fragment(self, name: str) -> str:
        return self.files[name]

    def write_to(self, directory) -> list[Path]:
        """Write every file plus the template copy; returns written paths."""
        root = Path(directory)
        root.mkdir(parents=True, exist_ok=True)
        written = []
        for name, text in self.files.items():
            path = root / name
            path.write_text(text)
            written.append(path)
        template_path = root / self.template_name
        template_path.write_text(self.template_text)
        written.append(template_path)
        return written


def template_path(template) -> Path:
    """Path of a shipped template, by TemplateId or by name."""
    if not isinstance(template, TemplateId):
        try:
            template = TemplateId(template)
        except ValueError:
            raise KeyError(f"unknown template {template!r}") from None
    return Path(__file__).parent / "templates" / f"{template.value}.p4"


def load_template(template) -> str:
    return template_path(template).read_text()


# -- low-level emission helpers ---------------------------------------------


class _Writer:
    def __init__(self, indent: int) -> None:
        self._unit = " " * indent
        self.lines: list[str] = []

    def line(self, depth: int, text: str = "") -> None:
        self.lines.append(self._unit * depth + text if text else "")

    def text(self) -> str:
        if not self.lines:
            return ""
        return "\n".join(self.lines) + "\n"


def _const(v: UValue) -> str:
    return f"{v.width.bits}w{v.magnitude}"


def _lvalue(proc: FlowProcessor, ref: VarRef) -> str:
    if ref.scope is Scope.INPUT:
        return f"hdr.{proc.name}__in.{ref.name}"
    if ref.scope is Scope.OUTPUT:
        return f"hdr.{proc.name}__out.{ref.name}"
    # Locals and shared-register shadows live at control scope under the
    # processor prefix; cross-scope name uniqueness keeps them distinct.
    return f"{proc.name}__{ref.name}"


def _operand(proc: FlowProcessor, op) -> str:
    if isinstance(op, UValue):
        return _const(op)
    return _lvalue(proc, op)


def _shared_writeback(proc: FlowProcessor, ref: VarRef) -> Optional[str]:
    if ref.scope is Scope.SHARED:
        return f"reg__{proc.name}__{ref.name}.write(0, {proc.name}__{ref.name});"
    return None


def _eq_base(proc: FlowProcessor, ordinal: int) -> str:
    return f"{proc.name}__eq__{ordinal}"


def _collect_table_hints(block: Block) -> list[Equals]:
    """Equals commands with the TABLE hint, in body order."""
    found: list[Equals] = []
    for cmd in block.commands:
        if isinstance(cmd, Equals) and cmd.hint is Hint.TABLE:
            found.append(cmd)
        elif isinstance(cmd, IfNode):
            found.extend(_collect_table_hints(cmd.then_block))
            if cmd.else_block is not None:
                found.extend(_collect_table_hints(cmd.else_block))
        elif isinstance(cmd, SwitchNode):
            for _, _, case_block in cmd.cases:
                found.extend(_collect_table_hints(case_block))
        elif isinstance(cmd, AtomicNode):
            found.extend(_collect_table_hints(cmd.block))
    return found


# -- command emission --------------------------------------------------------


def _emit_block(w: _Writer, proc: FlowProcessor, block: Block, depth: int) -> None:
    for cmd in block.commands:
        _emit_command(w, proc, cmd, depth)


def _emit_command(w: _Writer, proc: FlowProcessor, cmd, depth: int) -> None:
    if isinstance(cmd, IfNode):
        w.line(depth, f"// [{cmd.ordinal}] If")
        w.line(depth, f"if ({_lvalue(proc, cmd.cond)} == 8w1) {{")
        _emit_block(w, proc, cmd.then_block, depth + 1)
        w.line(depth, "}")
        if cmd.else_block is not None:
            w.line(depth, f"// [{cmd.else_ordinal}] Else")
            w.line(depth, "else {")
            _emit_block(w, proc, cmd.else_block, depth + 1)
            w.line(depth, "}")
        return
    if isinstance(cmd, SwitchNode):
        w.line(depth, f"// [{cmd.ordinal}] Switch")
        selector = _operand(proc, cmd.selector)
        for i, (value, ordinal, case_block) in enumerate(cmd.cases):
            keyword = "if" if i == 0 else "else if"
            w.line(depth, f"{keyword} ({selector} == {_const(value)}) {{")
            w.line(depth + 1, f"// [{ordinal}] Case")
            _emit_block(w, proc, case_block, depth + 1)
            w.line(depth, "}")
        return
    if isinstance(cmd, AtomicNode):
        w.line(depth, f"// [{cmd.ordinal}] Atomic")
        w.line(depth, "ATOMIC_BEGIN")
        _emit_block(w, proc, cmd.block, depth)
        w.line(depth, f"// [{cmd.end_ordinal}] EndAtomic")
        w.line(depth, "ATOMIC_END")
        return

    w.line(depth, f"// [{cmd.ordinal}] {type(cmd).__name__}")
    writeback = None
    if isinstance(cmd, AssignConst):
        w.line(depth, f"{_lvalue(proc, cmd.target)} = {_const(cmd.value)};")
        writeback = _shared_writeback(proc, cmd.target)
    elif isinstance(cmd, AssignVar):
        w.line(depth, f"{_lvalue(proc, cmd.target)} = {_operand(proc, cmd.source)};")
        writeback = _shared_writeback(proc, cmd.target)
    elif isinstance(cmd, Cast):
        bits = cmd.target.width.bits
        w.line(
            depth,
            f"{_lvalue(proc, cmd.target)} = "
            f"(bit<{bits}>){_operand(proc, cmd.source)};",
        )
        writeback = _shared_writeback(proc, cmd.target)
    elif isinstance(cmd, (Add, Sub)):
        sign = "+" if isinstance(cmd, Add) else "-"
        w.line(
            depth,
            f"{_lvalue(proc, cmd.target)} = {_operand(proc, cmd.lhs)} "
            f"{sign} {_operand(proc, cmd.rhs)};",
        )
        writeback = _shared_writeback(proc, cmd.target)
    elif isinstance(cmd, Equals) and cmd.hint is Hint.TABLE:
        base = _eq_base(proc, cmd.ordinal)
        w.line(
            depth,
            f"{base} = {_operand(proc, cmd.lhs)} ^ {_operand(proc, cmd.rhs)};",
        )
        w.line(depth, f"{base}__t.apply();")
        writeback = _shared_writeback(proc, cmd.target)
    elif isinstance(cmd, (Equals, Greater)):
        op = "==" if isinstance(cmd, Equals) else ">"
        target = _lvalue(proc, cmd.target)
        w.line(
            depth,
            f"if ({_operand(proc, cmd.lhs)} {op} {_operand(proc, cmd.rhs)}) {{",
        )
        w.line(depth + 1, f"{target} = 8w1;")
        w.line(depth, "}")
        w.line(depth, "else {")
        w.line(depth + 1, f"{target} = 8w0;")
        w.line(depth, "}")
        writeback = _shared_writeback(proc, cmd.target)
    elif isinstance(cmd, Rand):
        bits = cmd.target.width.bits
        mask = cmd.target.width.mask
        w.line(
            depth,
            f"random({_lvalue(proc, cmd.target)}, {bits}w0, {bits}w{mask});",
        )
        writeback = _shared_writeback(proc, cmd.target)
    elif isinstance(cmd, RingPush):
        ring = proc.ring(cmd.ring)
        head = f"{proc.name}__{ring.name}__head"
        w.line(depth, f"ring__{proc.name}__{ring.name}__head.read({head}, 0);")
        w.line(
            depth,
            f"ring__{proc.name}__{ring.name}.write({head}, "
            f"{_operand(proc, cmd.source)});",
        )
        w.line(depth, f"{head} = {head} + 32w1;")
        w.line(depth, f"if ({head} == 32w{ring.capacity}) {{")
        w.line(depth + 1, f"{head} = 32w0;")
        w.line(depth, "}")
        w.line(depth, f"ring__{proc.name}__{ring.name}__head.write(0, {head});")
    elif isinstance(cmd, RingReadHead):
        ring = proc.ring(cmd.ring)
        head = f"{proc.name}__{ring.name}__head"
        w.line(depth, f"ring__{proc.name}__{ring.name}__head.read({head}, 0);")
        w.line(
            depth,
            f"ring__{proc.name}__{ring.name}.read({_lvalue(proc, cmd.target)}, "
            f"{head});",
        )
        writeback = _shared_writeback(proc, cmd.target)
    elif isinstance(cmd, SendBack):
        w.line(depth, "smeta.egress_spec = smeta.ingress_port;")
    elif isinstance(cmd, Forward):
        w.line(depth, f"smeta.egress_spec = (bit<9>)16w{cmd.port};")
    else:
        raise TypeError(f"cannot emit {cmd!r}")
    if writeback:
        w.line(depth, writeback)


# -- fragment builders --------------------------------------------------------


def _unique_layouts(selectors: Sequence[FlowSelector]) -> list[HeaderLayout]:
    layouts: dict[str, HeaderLayout] = {}

    def take(layout: Optional[HeaderLayout]) -> None:
        if layout is None:
            return
        known = layouts.get(layout.name)
        if known is None:
            layouts[layout.name] = layout
        elif known is not layout and known != layout:
            raise DuplicateName(
                f"two different layouts share the name {layout.name!r}"
            )

    for sel in selectors:
        take(sel.lookahead)
        take(sel.processor.input)
        take(sel.processor.output)
    return list(layouts.values())


def _emit_headers(layouts: Sequence[HeaderLayout], indent: int) -> str:
    w = _Writer(indent)
    for i, layout in enumerate(layouts):
        if i:
            w.line(0)
        w.line(0, f"header {layout.name}_t {{")
        for f in layout.fields:
            w.line(1, f"bit<{f.width.bits}> {f.name};")
        w.line(0, "}")
    return w.text()


def _emit_structs(procs: Sequence[FlowProcessor], indent: int) -> str:
    w = _Writer(indent)
    for p in procs:
        w.line(1, f"{p.input.name}_t {p.name}__in;")
        if p.output is not None:
            w.line(1, f"{p.output.name}_t {p.name}__out;")
    return w.text()


def _criterion_key(sel: FlowSelector, c: Criterion) -> str:
    if "." in c.field:
        return f"hdr.{c.field}"
    return f"la.{c.field}"


def emit_parser_chain(chain: ParserChain, flow_ids: Optional[Sequence[int]] = None) -> str:
    """Chain states for one stack: state k checks selector k's criteria,
    extracts the input layout and records the flow id on a hit, and falls
    through to state k+1 (or accept) on a miss."""
    if not chain.links:
        raise ValueError("cannot emit an empty parser chain")
    if flow_ids is None:
        flow_ids = list(range(1, len(chain.links) + 1))
    name = chain.stack.value.lower()
    w = _Writer(4)
    for k, (sel, flow_id) in enumerate(zip(chain.links, flow_ids)):
        is_last = k == len(chain.links) - 1
        miss = "accept" if is_last else f"chain_{name}_{k + 1}"
        w.line(1, f"state chain_{name}_{k} {{")
        if sel.lookahead is not None:
            w.line(
                2,
                f"{sel.lookahead.name}_t la = "
                f"pkt.lookahead<{sel.lookahead.name}_t>();",
            )
        keys = ", ".join(_criterion_key(sel, c) for c in sel.criteria)
        w.line(2, f"transition select({keys}) {{")
        values = ", ".join(_const(c.value) for c in sel.criteria)
        if len(sel.criteria) > 1:
            values = f"({values})"
        w.line(3, f"{values}: chain_{name}_{k}_hit;")
        w.line(3, f"default: {miss};")
        w.line(2, "}")
        w.line(1, "}")
        w.line(1, f"state chain_{name}_{k}_hit {{")
        w.line(2, f"pkt.extract(hdr.{sel.processor.name}__in);")
        w.line(2, f"meta.app_flow = 16w{flow_id};")
        w.line(2, "transition accept;")
        w.line(1, "}")
    return w.text()


def _emit_parser(chains: dict[ProtocolStack, ParserChain], flow_ids: dict[str, int], indent: int) -> str:
    parts: list[str] = []
    defines = [
        f"#define PARROT_CHAIN_{stack.value}"
        for stack in ProtocolStack
        if stack in chains
    ]
    if defines:
        parts.append("\n".join(defines) + "\n")
    for stack in ProtocolStack:
        if stack in chains:
            chain = chains[stack]
            ids = [flow_ids[sel.name] for sel in chain.links]
            parts.append(emit_parser_chain(chain, ids))
    return "".join(parts)


def _emit_decls(procs: Sequence[FlowProcessor], indent: int) -> str:
    w = _Writer(indent)
    first = True
    for p in procs:
        if not first:
            w.line(0)
        first = False
        w.line(1, f"// processor {p.name}")
        for d in p.locals:
            w.line(1, f"bit<{d.width.bits}> {p.name}__{d.name};")
        for d in p.shared:
            w.line(1, f"bit<{d.width.bits}> {p.name}__{d.name};")
            w.line(1, f"register<bit<{d.width.bits}>>(1) reg__{p.name}__{d.name};")
        if any(d.initial.magnitude != 0 for d in p.shared):
            w.line(1, f"bit<1> {p.name}__boot__v;")
            w.line(1, f"register<bit<1>>(1) reg__{p.name}__boot__v;")
        for r in p.rings:
            w.line(1, f"bit<32> {p.name}__{r.name}__head;")
            w.line(1, f"register<bit<32>>(1) ring__{p.name}__{r.name}__head;")
            w.line(
                1,
                f"register<bit<{r.element_width.bits}>>({r.capacity}) "
                f"ring__{p.name}__{r.name};",
            )
        for eq in _collect_table_hints(p.body):
            base = _eq_base(p, eq.ordinal)
            width = eq.lhs.width
            target = _lvalue(p, eq.target)
            w.line(1, f"bit<{width.bits}> {base};")
            w.line(1, f"action {base}__hit() {{ {target} = 8w1; }}")
            w.line(1, f"action {base}__miss() {{ {target} = 8w0; }}")
            w.line(1, f"table {base}__t {{")
            w.line(2, f"key = {{ {base} : exact; }}")
            w.line(2, f"actions = {{ {base}__hit; {base}__miss; }}")
            w.line(2, "const entries = {")
            w.line(3, f"{width.bits}w0 : {base}__hit();")
            w.line(2, "}")
            w.line(2, f"const default_action = {base}__miss();")
            w.line(1, "}")
    return w.text()


def emit_processor_control(
    p: FlowProcessor,
    stack: ProtocolStack = ProtocolStack.IPV4_UDP,
    indent: int = 4,
    depth: int = 3,
) -> str:
    """The statements executed when a packet hits this processor: zeroed
    locals, register boot and reads, output activation, the command body,
    then header-validity flips and byte-delta bookkeeping."""
    p.validate_complete()
    w = _Writer(indent)
    for d in p.locals:
        w.line(depth, f"{p.name}__{d.name} = {d.width.bits}w0;")
    if any(d.initial.magnitude != 0 for d in p.shared):
        boot = f"{p.name}__boot__v"
        w.line(depth, f"reg__{p.name}__boot__v.read({boot}, 0);")
        w.line(depth, f"if ({boot} == 1w0) {{")
        for d in p.shared:
            w.line(
                depth + 1,
                f"reg__{p.name}__{d.name}.write(0, {_const(d.initial)});",
            )
        w.line(depth + 1, f"reg__{p.name}__boot__v.write(0, 1w1);")
        w.line(depth, "}")
    for d in p.shared:
        w.line(depth, f"reg__{p.name}__{d.name}.read({p.name}__{d.name}, 0);")
    if p.output is not None:
        w.line(depth, f"hdr.{p.name}__out.setValid();")
        for f in p.output.fields:
            w.line(depth, f"hdr.{p.name}__out.{f.name} = {f.width.bits}w0;")
    _emit_block(w, p, p.body, depth)
    if p.output is not None:
        fixed = _ETH_BYTES + _IPV4_BYTES + _L4_BYTES[stack]
        out_size = p.output.byte_size
        w.line(depth, f"hdr.{p.name}__in.setInvalid();")
        w.line(depth, f"meta.app_added_bytes = 16w{out_size};")
        if p.truncate_payload:
            # Truncation drops the whole residual payload, so the removed
            # count is everything behind the fixed headers, not just the
            # input layout.
            w.line(
                depth,
                "meta.app_removed_bytes = hdr.ipv4.totalLen - "
                f"16w{fixed - _ETH_BYTES};",
            )
            w.line(depth, f"truncate(32w{fixed + out_size});")
        else:
            w.line(depth, f"meta.app_removed_bytes = 16w{p.input.byte_size};")
    return w.text()


def _emit_apply(selectors: Sequence[FlowSelector], flow_ids: dict[str, int], indent: int) -> str:
    w = _Writer(indent)
    first = True
    for sel in selectors:
        if not first:
            w.line(0)
        first = False
        w.line(2, f"// flow {sel.name}")
        w.line(2, f"if (meta.app_flow == 16w{flow_ids[sel.name]}) {{")
        body = emit_processor_control(sel.processor, sel.stack, indent, depth=3)
        w.lines.extend(body.splitlines())
        w.line(2, "}")
    return w.text()


def _combine(template_text: str, files: dict[str, str]) -> str:
    lines = []
    for line in template_text.splitlines():
        stripped = line.strip()
        if stripped.startswith('#include "') and stripped.endswith('"'):
            name = stripped[len('#include "') : -1]
            if name in files:
                fragment = files[name]
                if fragment:
                    lines.extend(fragment.splitlines())
                continue
        lines.append(line)
    return "\n".join(lines) + "\n"


def generate(solution: Solution, output_dir=None) -> GeneratedFileSet:
    """Emit all fragments for a Solution; writes them (plus a template
    copy and, when configured, the combined program) under the output
    directory when one is given here or in the options."""
    selectors = solution.selectors
    procs = solution.processors()
    for p in procs:
        p.validate_complete()
    layouts = _unique_layouts(selectors)
    chains = build_chains(selectors)
    flow_ids = {sel.name: i + 1 for i, sel in enumerate(selectors)}
    indent = solution.options.indent

    files = {
        "headers.p4inc": _emit_headers(layouts, indent),
        "parser.p4inc": _emit_parser(chains, flow_ids, indent),
        "structs.p4inc": _emit_structs(procs, indent),
        "decls.p4inc": _emit_decls(procs, indent),
        "apply.p4inc": _emit_apply(selectors, flow_ids, indent),
    }
    template_text = load_template(solution.template)
    if solution.options.emit_combined:
        files[COMBINED_NAME] = _combine(template_text, files)
    fileset = GeneratedFileSet(
        files=files,
        template_name=f"{solution.template.value}.p4",
        template_text=template_text,
    )
    directory = output_dir or solution.options.output_dir
    if directory is not None:
        fileset.write_to(directory)
    return fileset
