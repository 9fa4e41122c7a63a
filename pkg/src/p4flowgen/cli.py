"""Command-line front end.

Subcommands: check, generate, simulate, examples. Exit codes: 0 for
success, 1 for I/O and schema problems, 2 for semantic errors. All
diagnostics go to stderr; stdout carries machine-readable output only.
"""

from __future__ import annotations

import argparse
import shutil
import sys
import tempfile
from pathlib import Path

from .builtin_examples import EXAMPLE_BUILDERS, asset_path
from .codegen import generate
from .errors import FlowgenError
from .program_doc import (
    DocError,
    DocSemanticError,
    dumps_doc,
    load_json,
    load_trace,
    results_to_doc,
    solution_from_doc,
)
from .simulator import run_trace


def _write_staged(target_dir: Path, files: dict[str, str]) -> list[Path]:
    """Write a file set without ever leaving partial output behind:
    everything is staged in a temp directory first, then moved in."""
    target_dir = Path(target_dir)
    try:
        staging = Path(tempfile.mkdtemp(dir=target_dir.parent, prefix=".stage-"))
    except OSError as e:
        raise OSError(f"cannot write under {target_dir.parent}: {e}") from None
    try:
        for name, text in files.items():
            (staging / name).write_text(text)
        target_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for name in files:
            final = target_dir / name
            (staging / name).replace(final)
            written.append(final)
        return written
    finally:
        shutil.rmtree(staging, ignore_errors=True)


def cmd_check(args) -> int:
    solution_from_doc(load_json(args.program))
    print(f"{args.program}: ok")
    return 0


def cmd_generate(args) -> int:
    solution = solution_from_doc(load_json(args.program))
    fileset = generate(solution)
    files = dict(fileset.files)
    files[fileset.template_name] = fileset.template_text
    for path in _write_staged(Path(args.out_dir), files):
        print(path)
    return 0


def cmd_simulate(args) -> int:
    solution = solution_from_doc(load_json(args.program))
    seed, packets = load_trace(args.trace)
    if args.seed is not None:
        seed = args.seed
    results = run_trace(solution, packets, seed)
    text = dumps_doc(results_to_doc(seed, results))
    if args.out is None:
        sys.stdout.write(text)
    else:
        out = Path(args.out)
        _write_staged(out.parent, {out.name: text})
    return 0


def cmd_examples(args) -> int:
    if args.name is not None and args.name not in EXAMPLE_BUILDERS:
        names = ", ".join(sorted(EXAMPLE_BUILDERS))
        print(
            f"error: unknown example {args.name!r}; available: {names}",
            file=sys.stderr,
        )
        return 2
    names = [args.name] if args.name else sorted(EXAMPLE_BUILDERS)
    files = {f"{name}.json": asset_path(name).read_text() for name in names}
    for path in _write_staged(Path(args.out_dir), files):
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="p4flowgen",
        description="Check, generate, and simulate packet-flow programs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate a program file")
    p.add_argument("program", help="program JSON file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("generate", help="emit P4 fragments for a program")
    p.add_argument("program", help="program JSON file")
    p.add_argument("-o", "--out-dir", required=True, help="output directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("simulate", help="run a packet trace through a program")
    p.add_argument("program", help="program JSON file")
    p.add_argument("-t", "--trace", required=True, help="trace JSON file")
    p.add_argument("--seed", type=int, default=None,
                   help="override the trace's rng seed")
    p.add_argument("-o", "--out", default=None,
                   help="write results here instead of stdout")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("examples", help="write the built-in example programs")
    p.add_argument("name", nargs="?", default=None,
                   help="one example name (default: all)")
    p.add_argument("-o", "--out-dir", default=".", help="output directory")
    p.set_defaults(func=cmd_examples)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DocSemanticError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except DocError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except FlowgenError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def entry() -> None:
    raise SystemExit(main())
