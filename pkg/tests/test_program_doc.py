"""Document format checks: schemas, replay, round trips, and traces."""

import copy
import json
from pathlib import Path

import pytest

from p4flowgen.builtin_examples import (
    EXAMPLE_BUILDERS,
    GUESS_PORT,
    asset_path,
    guess_game_solution,
    insert_agg_solution,
)
from p4flowgen.flow_ast import Hint
from p4flowgen.program_doc import (
    SCHEMA_DIR,
    DocError,
    DocSemanticError,
    dumps_doc,
    load_schema,
    packet_from_doc,
    parse_field_value,
    result_to_doc,
    results_to_doc,
    solution_from_doc,
    solution_to_doc,
    trace_from_doc,
    validate_program_doc,
    validate_trace_doc,
)
from p4flowgen.simulator import make_udp_packet, run_trace


def guess_doc():
    return solution_to_doc(guess_game_solution())


def agg_doc():
    return solution_to_doc(insert_agg_solution())


def result_key(res):
    return (
        res.verdict,
        res.selector,
        res.egress_port,
        res.packet.to_bytes(),
        res.trace,
        res.error,
    )


class TestSchemas:
    def test_schemas_load(self):
        assert load_schema("program")["title"]
        assert load_schema("trace")["title"]

    @pytest.mark.parametrize("name", sorted(EXAMPLE_BUILDERS))
    def test_example_docs_validate(self, name):
        validate_program_doc(solution_to_doc(EXAMPLE_BUILDERS[name]()))

    def test_missing_section_rejected(self):
        doc = guess_doc()
        del doc["selectors"]
        with pytest.raises(DocError):
            validate_program_doc(doc)

    def test_unknown_op_rejected_with_path(self):
        doc = agg_doc()
        doc["processors"][0]["body"][0]["op"] = "frobnicate"
        with pytest.raises(DocError) as err:
            validate_program_doc(doc)
        assert err.value.path == "processors[0].body[0].op"

    @pytest.mark.parametrize("name", ["program", "trace"])
    def test_docs_copy_matches_packaged_schema(self, name):
        # The schemas are published under docs/ for consumers; the copy
        # must stay byte-identical to the one the package validates with.
        packaged = SCHEMA_DIR / f"{name}.schema.json"
        published = Path(__file__).parent.parent / "docs" / f"{name}.schema.json"
        assert published.read_bytes() == packaged.read_bytes()

    def test_stray_command_key_rejected(self):
        # Typos like "src" for "source" must fail validation, not be
        # silently ignored by replay.
        doc = agg_doc()
        doc["processors"][0]["body"][3]["src"] = {"var": "wide_a"}
        with pytest.raises(DocError):
            validate_program_doc(doc)

    def test_bool_local_must_be_u8(self):
        doc = guess_doc()
        doc["processors"][0]["locals"][0]["width"] = 16
        with pytest.raises(DocError):
            validate_program_doc(doc)

    def test_unknown_top_level_key_rejected(self):
        doc = guess_doc()
        doc["extras"] = {}
        with pytest.raises(DocError):
            validate_program_doc(doc)


class TestRoundTrip:
    @pytest.mark.parametrize(
        "builder",
        [
            guess_game_solution,
            insert_agg_solution,
            lambda: guess_game_solution(Hint.TABLE),
        ],
    )
    def test_doc_form_is_a_fixed_point(self, builder):
        doc = solution_to_doc(builder())
        assert solution_to_doc(solution_from_doc(doc)) == doc

    def test_replayed_solution_simulates_identically(self):
        packets = [
            make_udp_packet(GUESS_PORT, payload=bytes([g])) for g in (1, 42, 200)
        ]
        original = run_trace(guess_game_solution(), packets, seed=5)
        replayed = run_trace(solution_from_doc(guess_doc()), packets, seed=5)
        assert [result_key(r) for r in original] == [
            result_key(r) for r in replayed
        ]

    def test_stored_ordinals_are_informational(self):
        doc = guess_doc()
        doc["processors"][0]["body"][0]["ordinal"] = 999
        replayed = solution_to_doc(solution_from_doc(doc))
        assert replayed["processors"][0]["body"][0]["ordinal"] == 1


class TestShippedAssets:
    @pytest.mark.parametrize("name", sorted(EXAMPLE_BUILDERS))
    def test_asset_matches_builder(self, name):
        expected = dumps_doc(solution_to_doc(EXAMPLE_BUILDERS[name]()))
        assert asset_path(name).read_text() == expected

    @pytest.mark.parametrize("name", sorted(EXAMPLE_BUILDERS))
    def test_asset_loads(self, name):
        doc = json.loads(asset_path(name).read_text())
        assert solution_from_doc(doc).selectors


class TestSemanticPaths:
    def test_width_mismatch_cites_body_index(self):
        doc = agg_doc()
        doc["processors"][0]["body"][3] = {
            "op": "assign_var",
            "target": "orig_a",
            "source": {"var": "wide_a"},
        }
        with pytest.raises(DocSemanticError) as err:
            solution_from_doc(doc)
        assert err.value.path == "processors[0].body[3]"
        assert err.value.kind == "WidthMismatch"

    def test_undeclared_name_in_nested_branch(self):
        doc = guess_doc()
        then = doc["processors"][0]["body"][0]["body"][2]["then"]
        then[0]["target"] = "nope"
        with pytest.raises(DocSemanticError) as err:
            solution_from_doc(doc)
        assert err.value.path == "processors[0].body[0].body[2].then[0]"
        assert err.value.kind == "UndeclaredName"

    def test_unknown_input_layout(self):
        doc = guess_doc()
        doc["processors"][0]["input"] = "missing_layout"
        with pytest.raises(DocSemanticError) as err:
            solution_from_doc(doc)
        assert err.value.path == "processors[0]"
        assert err.value.kind == "UndeclaredName"

    def test_unknown_processor_in_selector(self):
        doc = guess_doc()
        doc["selectors"][0]["processor"] = "ghost"
        with pytest.raises(DocSemanticError) as err:
            solution_from_doc(doc)
        assert err.value.path == "selectors[0]"

    def test_duplicate_layout_name(self):
        doc = guess_doc()
        doc["layouts"].append(copy.deepcopy(doc["layouts"][0]))
        with pytest.raises(DocSemanticError) as err:
            solution_from_doc(doc)
        assert err.value.path == "layouts[2]"
        assert err.value.kind == "DuplicateName"

    def test_duplicate_selector_name(self):
        doc = guess_doc()
        doc["selectors"].append(copy.deepcopy(doc["selectors"][0]))
        with pytest.raises(DocSemanticError) as err:
            solution_from_doc(doc)
        assert err.value.kind == "DuplicateName"

    def test_lookahead_criterion_without_layout(self):
        doc = guess_doc()
        doc["selectors"][0]["criteria"].append(
            {"field": "msg_type", "width": 8, "value": 1}
        )
        with pytest.raises(DocSemanticError) as err:
            solution_from_doc(doc)
        assert err.value.path == "selectors[0]"
        assert err.value.kind == "MissingLookahead"

    def test_criterion_width_mismatch(self):
        doc = guess_doc()
        doc["selectors"][0]["criteria"][0]["width"] = 8
        doc["selectors"][0]["criteria"][0]["value"] = 5
        with pytest.raises(DocSemanticError) as err:
            solution_from_doc(doc)
        assert err.value.kind == "WidthMismatch"

    def test_const_too_wide_for_declared_width(self):
        doc = agg_doc()
        doc["processors"][0]["shared"] = [
            {"name": "big", "width": 8, "initial": 300}
        ]
        with pytest.raises(DocSemanticError) as err:
            solution_from_doc(doc)
        assert err.value.path == "processors[0]"
        assert err.value.kind == "WidthMismatch"


class TestTraceParsing:
    def test_defaults_derived_from_payload(self):
        _, packets = trace_from_doc(
            {"seed": 0, "packets": [{"udp": {}, "payload": "0a0b"}]}
        )
        pkt = packets[0]
        assert pkt.ingress_port == 0
        assert pkt.payload == bytes([10, 11])
        assert pkt.ipv4["totalLen"] == 20 + 8 + 2
        assert pkt.udp["len"] == 8 + 2

    def test_decimal_and_hex_values(self):
        assert parse_field_value("5555") == 5555
        assert parse_field_value("0x15b3") == 5555
        _, packets = trace_from_doc(
            {
                "seed": 0,
                "packets": [
                    {"udp": {"dstPort": "0x15b3"}, "payload": ""},
                    {"udp": {"dstPort": "5555"}, "payload": ""},
                ],
            }
        )
        assert packets[0].udp["dstPort"] == packets[1].udp["dstPort"] == 5555

    def test_tcp_packet(self):
        _, packets = trace_from_doc(
            {"seed": 0, "packets": [{"tcp": {"dstPort": "80"}, "payload": "00"}]}
        )
        assert packets[0].tcp["dstPort"] == 80
        assert packets[0].udp is None

    def test_unknown_field_cites_path(self):
        with pytest.raises(DocError) as err:
            packet_from_doc(
                {"udp": {"dstport": "1"}, "payload": ""}, "packets[0]"
            )
        assert err.value.path == "packets[0].udp.dstport"

    def test_out_of_range_value_rejected(self):
        with pytest.raises(DocError) as err:
            packet_from_doc(
                {"udp": {"dstPort": "70000"}, "payload": ""}, "packets[0]"
            )
        assert "70000" in err.value.message

    def test_both_stacks_rejected_by_schema(self):
        with pytest.raises(DocError):
            validate_trace_doc(
                {
                    "seed": 0,
                    "packets": [{"udp": {}, "tcp": {}, "payload": ""}],
                }
            )

    def test_odd_hex_payload_rejected(self):
        with pytest.raises(DocError):
            validate_trace_doc(
                {"seed": 0, "packets": [{"udp": {}, "payload": "abc"}]}
            )


class TestResultDocs:
    def test_processed_result_fields(self):
        packets = [make_udp_packet(GUESS_PORT, payload=bytes([10]), ingress_port=2)]
        results = run_trace(guess_game_solution(), packets, seed=1)
        doc = result_to_doc(results[0])
        assert doc["verdict"] == "PROCESSED"
        assert doc["selector"] == "guess_sel"
        assert doc["egress_port"] == 2
        assert doc["payload_hex"] == b"GT".hex()
        assert doc["udp"]["dstPort"] == str(GUESS_PORT)
        assert doc["trace"][0] == {
            "ordinal": 0,
            "kind": "match",
            "before": [],
            "after": [],
        }
        assert "error" not in doc
        assert "tcp" not in doc

    def test_error_recorded(self):
        packets = [make_udp_packet(GUESS_PORT, payload=b"")]
        results = run_trace(guess_game_solution(), packets, seed=0)
        doc = result_to_doc(results[0])
        assert doc["verdict"] == "PASSTHROUGH"
        assert "too short" in doc["error"]

    def test_results_envelope(self):
        doc = results_to_doc(7, [])
        assert doc == {"seed": 7, "results": []}
