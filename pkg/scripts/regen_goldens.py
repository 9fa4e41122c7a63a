#!/usr/bin/env python3
"""Refresh the frozen outputs under tests/golden/.

The golden tree pins two things:

* the full generated file set for each packaged example
  (tests/golden/<name>/), and
* the simulate results for the trace fixtures in tests/data/
  (tests/golden/<name>_results.json).

Run this after an intentional change to code generation or to the
simulator, review the diff, and commit the result together with the
change that caused it. With --check nothing is written; the script
exits 1 if the tree no longer matches what the package produces.
"""

from __future__ import annotations

import argparse
import shutil
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from p4flowgen.builtin_examples import EXAMPLE_BUILDERS, asset_path
from p4flowgen.codegen import generate
from p4flowgen.program_doc import (
    dumps_doc,
    load_json,
    load_trace,
    results_to_doc,
    solution_from_doc,
)
from p4flowgen.simulator import run_trace

GOLDEN = ROOT / "tests" / "golden"
DATA = ROOT / "tests" / "data"


def build_outputs() -> dict[Path, str]:
    """Map of golden-relative path to expected file text."""
    out: dict[Path, str] = {}
    for name in sorted(EXAMPLE_BUILDERS):
        # Load through the shipped document, the same path the CLI takes.
        solution = solution_from_doc(load_json(asset_path(name)))
        files = generate(solution)
        for fname, text in files.files.items():
            out[Path(name) / fname] = text
        out[Path(name) / files.template_name] = files.template_text

        seed, packets = load_trace(DATA / f"{name}_trace.json")
        results = run_trace(solution, packets, seed=seed)
        out[Path(f"{name}_results.json")] = dumps_doc(results_to_doc(seed, results))
    return out


def check(expected: dict[Path, str]) -> int:
    stale = []
    for rel, text in expected.items():
        path = GOLDEN / rel
        if not path.exists():
            stale.append(f"missing: {rel}")
        elif path.read_text() != text:
            stale.append(f"differs: {rel}")
    for path in sorted(GOLDEN.rglob("*")):
        if path.is_file() and path.relative_to(GOLDEN) not in expected:
            stale.append(f"orphaned: {path.relative_to(GOLDEN)}")
    for line in stale:
        print(line)
    return 1 if stale else 0


def write(expected: dict[Path, str]) -> int:
    if GOLDEN.exists():
        shutil.rmtree(GOLDEN)
    for rel, text in expected.items():
        path = GOLDEN / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        print(f"wrote {path.relative_to(ROOT)}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--check",
        action="store_true",
        help="compare instead of writing; exit 1 on any drift",
    )
    args = parser.parse_args(argv)
    expected = build_outputs()
    return check(expected) if args.check else write(expected)


if __name__ == "__main__":
    raise SystemExit(main())
