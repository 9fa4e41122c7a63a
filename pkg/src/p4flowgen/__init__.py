"""p4flowgen: build, simulate and compile application-layer packet flows.

The pieces compose in one direction: declare layouts and variables
(core_model), grow a processor body through the checked builder
(flow_ast), bind processors to packets (selector), then either run the
result bit-exactly (simulator) or emit P4 sources (codegen). The
program_doc module round-trips all of it through JSON, and cli fronts
the whole pipeline.
"""

from .codegen import (
    COMBINED_NAME,
    FRAGMENT_NAMES,
    CodegenConfig,
    GeneratedFileSet,
    Solution,
    TemplateId,
    generate,
)
from .core_model import (
    U8,
    U16,
    U32,
    U64,
    FieldDecl,
    HeaderLayout,
    RingBufferDecl,
    SharedVariableDecl,
    UValue,
    UWidth,
    internet_checksum,
    u8,
    u16,
    u32,
    u64,
    wrap_add,
    wrap_sub,
)
from .errors import FlowgenError
from .flow_ast import (
    Add,
    AssignConst,
    AssignVar,
    Cast,
    Equals,
    ErrorKind,
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
from .program_doc import (
    DocError,
    DocSemanticError,
    load_program,
    load_trace,
    solution_from_doc,
    solution_to_doc,
)
from .selector import Criterion, FlowSelector, ProtocolStack, new_flow_selector
from .simulator import (
    PASSTHROUGH,
    PROCESSED,
    SimPacket,
    SimResult,
    classify,
    initial_state,
    make_tcp_packet,
    make_udp_packet,
    run_trace,
    simulate_packet,
)

__version__ = "0.1.0"

__all__ = [
    "COMBINED_NAME",
    "FRAGMENT_NAMES",
    "CodegenConfig",
    "GeneratedFileSet",
    "Solution",
    "TemplateId",
    "generate",
    "U8",
    "U16",
    "U32",
    "U64",
    "FieldDecl",
    "HeaderLayout",
    "RingBufferDecl",
    "SharedVariableDecl",
    "UValue",
    "UWidth",
    "internet_checksum",
    "u8",
    "u16",
    "u32",
    "u64",
    "wrap_add",
    "wrap_sub",
    "FlowgenError",
    "Add",
    "AssignConst",
    "AssignVar",
    "Cast",
    "Equals",
    "ErrorKind",
    "FlowProcessor",
    "Forward",
    "Greater",
    "Hint",
    "Rand",
    "RingPush",
    "RingReadHead",
    "SemanticError",
    "SendBack",
    "Sub",
    "bool_local",
    "local",
    "new_flow_processor",
    "DocError",
    "DocSemanticError",
    "load_program",
    "load_trace",
    "solution_from_doc",
    "solution_to_doc",
    "Criterion",
    "FlowSelector",
    "ProtocolStack",
    "new_flow_selector",
    "PASSTHROUGH",
    "PROCESSED",
    "SimPacket",
    "SimResult",
    "classify",
    "initial_state",
    "make_tcp_packet",
    "make_udp_packet",
    "run_trace",
    "simulate_packet",
    "__version__",
]
