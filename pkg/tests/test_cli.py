from __future__ import annotations

import json
import os

import pytest

from ample.cli import run_command
from ample.documents import (
    ParseError,
    dump_payload,
    groupoid_payload,
    load_document,
    parse_document,
)
from ample.groupoid import validate_groupoid

from conftest import Q


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    code, text = run_command(["examples", "--dir", str(d)])
    assert code == 0
    return d


# -- parsing ----------------------------------------------------------------------


def test_minimal_trivial_groupoid_document():
    doc = parse_document(
        json.dumps(
            {
                "kind": "groupoid",
                "objects": ["x"],
                "arrows": [{"id": "e", "src": "x", "dst": "x"}],
                "units": {"x": "e"},
                "inv": {"e": "e"},
                "compose": [["e", "e", "e"]],
            }
        )
    )
    assert doc.kind == "groupoid"
    assert validate_groupoid(doc.value).ok


def test_p2_fixture_round_trip(corpus, p2):
    doc = load_document(str(corpus / "p2.json"))
    assert doc.value == p2
    # emission is stable
    assert dump_payload(groupoid_payload(doc.value)) == (corpus / "p2.json").read_text()


def test_referential_error_names_the_id():
    bad = {
        "kind": "groupoid",
        "objects": ["x"],
        "arrows": [{"id": "e", "src": "x", "dst": "x"}],
        "units": {"x": "e"},
        "inv": {"e": "e"},
        "compose": [["e", "ghost", "e"]],
    }
    with pytest.raises(ParseError) as err:
        parse_document(json.dumps(bad))
    assert "ghost" in str(err.value)
    assert err.value.path.startswith("compose")


def test_syntax_error_has_line_and_column():
    with pytest.raises(ParseError) as err:
        parse_document("{\n  \"kind\": }")
    assert err.value.line == 2
    assert err.value.column is not None
    assert "hint" in str(err.value)


def test_unknown_kind_is_schema_error():
    with pytest.raises(ParseError) as err:
        parse_document('{"kind": "mystery"}')
    assert err.value.path == "kind"


def test_integer_ids_are_stringified():
    doc = parse_document(
        json.dumps(
            {
                "kind": "groupoid",
                "objects": [1],
                "arrows": [{"id": 7, "src": 1, "dst": 1}],
                "units": {"1": 7},
                "inv": {"7": 7},
                "compose": [[7, 7, 7]],
            }
        )
    )
    assert doc.value.objects == ("1",)
    assert doc.value.arrows == ("7",)


def test_module_and_sheaf_fixtures_parse(corpus):
    module_doc = load_document(str(corpus / "module-p2-regular.json"))
    assert module_doc.kind == "module"
    assert module_doc.value.rank == 4
    sheaf_doc = load_document(str(corpus / "sheaf-p2-constant.json"))
    assert sheaf_doc.kind == "sheaf"
    assert sheaf_doc.value.total_rank == 2


def test_span_fixture_parses_with_relative_references(corpus):
    doc = load_document(str(corpus / "span-p2-point.json"))
    assert doc.kind == "span"
    assert doc.value.apex.objects == ("1",)


def test_missing_file_is_reported():
    with pytest.raises(ParseError) as err:
        load_document("no-such-file.json")
    assert "cannot read" in err.value.message


def test_module_document_round_trips_fractions(p2):
    # a change of basis with a scaling step introduces denominators
    from ample.builders import random_module
    from ample.documents import module_payload, parse_document as parse

    module = random_module(p2, Q, 2, seed=36)
    assert module.rank > 0
    payload = module_payload(module)
    text = dump_payload(payload)
    assert parse(text).value == module


def test_sheaf_document_round_trips(p2):
    from ample.builders import random_sheaf
    from ample.documents import parse_document as parse, sheaf_payload

    sheaf = random_sheaf(p2, Q, 2, seed=13)
    assert parse(dump_payload(sheaf_payload(sheaf))).value == sheaf


# -- the validate command --------------------------------------------------------------


def test_validate_groupoid_pass(corpus):
    code, text = run_command(["validate", str(corpus / "p2.json")])
    assert code == 0
    assert text == "groupoid: PASS (4 arrows, 2 objects)"


def test_validate_every_fixture(corpus):
    for name in sorted(os.listdir(corpus)):
        if name == "span-broken.json":
            continue
        code, text = run_command(["validate", str(corpus / name)])
        assert code == 0, f"{name}: {text}"
        assert "PASS" in text


def test_validate_broken_span_fails(corpus):
    code, text = run_command(["validate", str(corpus / "span-broken.json")])
    assert code == 1
    assert "FAIL" in text
    assert "full faithfulness" in text


def test_validate_broken_axioms(tmp_path, corpus):
    payload = json.loads((corpus / "p2.json").read_text())
    payload["inv"]["(1,2)"] = "(1,2)"
    target = tmp_path / "broken.json"
    target.write_text(json.dumps(payload))
    code, text = run_command(["validate", str(target)])
    assert code == 1
    assert "inverse law" in text


def test_validate_broken_module_document(tmp_path, corpus):
    payload = json.loads((corpus / "module-p2-regular.json").read_text())
    payload["action"]["(1,2)"] = [[1 if i == j else 0 for j in range(4)] for i in range(4)]
    payload["groupoid"] = json.loads((corpus / "p2.json").read_text())
    target = tmp_path / "broken-module.json"
    target.write_text(json.dumps(payload))
    code, text = run_command(["validate", str(target)])
    assert code == 1
    assert "support" in text


def test_validate_cyclic_graph(tmp_path):
    target = tmp_path / "cyclic.json"
    target.write_text(json.dumps({"kind": "graph", "vertices": ["a", "b"],
                                  "edges": [["a", "b"], ["b", "a"]]}))
    code, text = run_command(["validate", str(target)])
    assert code == 1
    assert "acyclicity" in text


def test_validate_parse_error_exit_code(tmp_path):
    target = tmp_path / "bad.json"
    target.write_text("{nope")
    code, text = run_command(["validate", str(target)])
    assert code == 1
    assert "hint" in text


# -- usage errors ------------------------------------------------------------------------


def test_unknown_command_is_usage_error():
    code, text = run_command(["frobnicate"])
    assert code == 2


def test_bad_ring_is_usage_error(corpus):
    code, text = run_command(["table", str(corpus / "p2.json"), "--ring", "R"])
    assert code == 2
    assert "usage error" in text


def test_wrong_document_kind_is_usage_error(corpus):
    code, text = run_command(["table", str(corpus / "span-p2-point.json")])
    assert code == 2


def test_composite_modulus_rejected_for_equivalence(corpus):
    code, text = run_command(
        ["equivalence", "--groupoid", str(corpus / "p2.json"), "--ring", "Zmod:6"]
    )
    assert code == 2


# -- reports ------------------------------------------------------------------------------


def test_table_golden(corpus):
    code, text = run_command(["table", str(corpus / "p2.json")])
    assert code == 0
    assert text == (
        "*\t(1,1)\t(1,2)\t(2,1)\t(2,2)\n"
        "(1,1)\t(1,1)\t(1,2)\t0\t0\n"
        "(1,2)\t0\t0\t(1,1)\t(1,2)\n"
        "(2,1)\t(2,1)\t(2,2)\t0\t0\n"
        "(2,2)\t0\t0\t(2,1)\t(2,2)"
    )


def test_table_of_graph_document(corpus):
    code, text = run_command(["table", str(corpus / "single-edge-graph.json")])
    assert code == 0
    assert "(w,v-e0-w)" in text


def test_bisections_report(corpus):
    code, text = run_command(["bisections", str(corpus / "p2.json")])
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "bisections: 7"
    assert "{(1,2),(2,1)}" in lines


def test_equivalence_report_shape(corpus):
    code, text = run_command(
        ["equivalence", "--groupoid", str(corpus / "p2.json"), "--ring", "F5",
         "--seed", "7", "--samples", "4"]
    )
    assert code == 0
    assert text.count("eta[") == 4
    assert text.count("epsilon[") == 4
    assert text.count("naturality[") == 4
    assert text.splitlines()[-1] == "RESULT: PASS (4 eta + 4 epsilon + 4 naturality)"


def test_equivalence_json_output(corpus):
    code, text = run_command(
        ["equivalence", "--groupoid", str(corpus / "p2.json"), "--ring", "F5",
         "--seed", "7", "--samples", "2", "--out", "json"]
    )
    assert code == 0
    payload = json.loads(text)
    assert payload["result"] == "pass"
    assert len(payload["certificates"]["eta"]) == 2


def test_morita_report_and_rank_table(corpus):
    code, text = run_command(
        ["morita", "--span", str(corpus / "span-p2-point.json"), "--ring", "Q",
         "--samples", "2", "--seed", "3"]
    )
    assert code == 0
    assert "rank table:" in text
    assert text.splitlines()[-1] == "RESULT: PASS"


def test_morita_rejects_broken_span(corpus):
    code, text = run_command(
        ["morita", "--span", str(corpus / "span-broken.json"), "--ring", "Q", "--samples", "1"]
    )
    assert code == 1
    assert "REJECTED" in text


# -- determinism -------------------------------------------------------------------------


def test_reports_are_bit_identical_across_runs(corpus):
    for argv in (
        ["table", str(corpus / "p2.json")],
        ["bisections", str(corpus / "z3.json")],
        ["equivalence", "--groupoid", str(corpus / "z2.json"), "--ring", "F2",
         "--seed", "11", "--samples", "3"],
        ["morita", "--span", str(corpus / "span-p2-point.json"), "--ring", "Q",
         "--samples", "2", "--seed", "5"],
    ):
        first = run_command(argv)
        second = run_command(argv)
        assert first == second


def test_examples_emission_is_deterministic(tmp_path):
    d1, d2 = tmp_path / "a", tmp_path / "b"
    run_command(["examples", "--dir", str(d1)])
    run_command(["examples", "--dir", str(d2)])
    names = sorted(os.listdir(d1))
    assert names == sorted(os.listdir(d2))
    for name in names:
        assert (d1 / name).read_text() == (d2 / name).read_text()
