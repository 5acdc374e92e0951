import json

import pytest

from htbgg.cli import DocumentError, complex_to_dict, emit_complex_document, parse_complex_document, run_command
from htbgg.exactla import GF
from htbgg.gallery import build_example, standard_gallery

OMEGA = {"field": "Q", "n": 3, "terms": {"0": [{"twist": -1, "strand": 1}]}, "differentials": {}}


def run(capsys, *argv):
    code = run_command([str(x) for x in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def omega_doc(tmp_path):
    p = tmp_path / "omega.json"
    p.write_text(json.dumps(OMEGA))
    return p


@pytest.fixture
def nc_doc(tmp_path):
    p = tmp_path / "nc.json"
    p.write_text(emit_complex_document(build_example("null_correlation", n=3, i=1).G))
    return p


@pytest.mark.parametrize("ex", standard_gallery(GF(101)), ids=lambda e: e.name)
def test_document_round_trip(ex):
    d = complex_to_dict(ex.G)
    G = parse_complex_document(json.dumps(d))
    assert complex_to_dict(G) == d
    assert G.strand_table() == ex.G.strand_table()


def test_cohomology_csv(capsys, omega_doc):
    code, out, _ = run(capsys, "cohomology", omega_doc, "--degrees", "-4:2")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "i,-4,-3,-2,-1,0,1,2"
    assert lines[3] == "1,0,0,0,1,0,0,0"


def test_cohomology_json_and_md(capsys, omega_doc):
    code, out, _ = run(capsys, "cohomology", omega_doc, "--format", "json")
    assert code == 0 and json.loads(out)["rows"]["1"].count(1) == 1
    code, out, _ = run(capsys, "cohomology", omega_doc, "--format", "md")
    assert code == 0 and out.startswith("|")


def test_check(capsys, nc_doc):
    code, out, _ = run(capsys, "check", nc_doc)
    rep = json.loads(out)
    assert code == 0 and rep["is_ht"] and rep["is_minimal"]
    assert {(s["strand"], s["twist"]) for s in rep["strands"]} == {(1, -1), (2, -3)}


def test_decompose(capsys, nc_doc):
    code, out, _ = run(capsys, "decompose", nc_doc)
    assert code == 0 and json.loads(out)["bundle_rank"] == 2


def test_tate(capsys, nc_doc):
    code, out, _ = run(capsys, "tate", nc_doc, "--window", "-3:3")
    rep = json.loads(out)
    assert code == 0 and rep["exact"] and rep["roundtrip"] == "isomorphic"


def test_stablehom(capsys, nc_doc, omega_doc):
    code, out, _ = run(capsys, "stablehom", nc_doc, nc_doc)
    assert code == 0 and json.loads(out)["stable_hom"] == 1
    code, out, _ = run(capsys, "stablehom", omega_doc, omega_doc)
    assert json.loads(out) == {"hom_chain_maps": 1, "stable_hom": 1}


def test_minimize(capsys, omega_doc):
    code, out, _ = run(capsys, "minimize", omega_doc)
    rep = json.loads(out)
    assert code == 0 and rep["n"] == 3 and rep["terms"]


def test_example_null_correlation(capsys):
    code, out, _ = run(capsys, "example", "null_correlation", "--n", 3, "--i", 1, "--field", "Q")
    rep = json.loads(out)
    assert code == 0 and rep["bundle_rank"] == 2


def test_example_horrocks(capsys):
    code, out, _ = run(capsys, "example", "horrocks_p5", "--field", "GF:7")
    rep = json.loads(out)
    assert code == 0 and rep["cohomology_rank"] == 3 and rep["is_monad"]
    assert rep["mono"]["mode"] == "exhaustive"


def test_example_emits_document(capsys):
    code, out, _ = run(capsys, "example", "koszul", "--n", 3, "--j", 1, "--emit-document")
    doc = json.loads(out)["document"]
    assert code == 0 and parse_complex_document(json.dumps(doc)).is_ht()


def test_bad_example_parameters_exit_1(capsys):
    code, _, err = run(capsys, "example", "null_correlation", "--n", 4)
    assert code == 1 and json.loads(err)["error"] == "GalleryError"


def test_missing_file_exit_1(capsys, tmp_path):
    code, _, err = run(capsys, "check", tmp_path / "nope.json")
    assert code == 1 and "message" in json.loads(err)


def test_unknown_command_exit_2(capsys):
    with pytest.raises(SystemExit) as e:
        run_command(["frobnicate"])
    assert e.value.code == 2


def test_field_mismatch(capsys, omega_doc):
    code, _, err = run(capsys, "check", omega_doc, "--field", "GF:7")
    assert code == 1 and "GF" in json.loads(err)["message"]


@pytest.mark.parametrize("doc,needle", [
    ('{"field": "Q", "n": 3,', "line"),
    ('{"field": "Q", "n": 3, "terms": {"x": []}}', "position"),
    ('{"field": "Q", "n": 3, "terms": {"0": [{"twist": "a"}]}}', "twist"),
    ('{"field": "Q", "n": 3, "terms": {"0": [{"twist": -1, "strand": 2}]}}', "strand"),
    ('{"field": "Q", "n": 3}', "terms"),
    ('{"field": "R", "n": 3, "terms": {}}', ""),
])
def test_malformed_documents(doc, needle):
    with pytest.raises(DocumentError) as e:
        parse_complex_document(doc)
    assert needle in str(e.value)


def test_wrong_degree_entry_rejected():
    doc = {"field": "Q", "n": 2, "terms": {"0": [{"twist": 0}], "1": [{"twist": 2}]},
           "differentials": {"0": [["e[0]"]]}}
    with pytest.raises(DocumentError):
        parse_complex_document(json.dumps(doc))


def test_nonzero_square_rejected():
    doc = {"field": "Q", "n": 2,
           "terms": {"0": [{"twist": 0}], "1": [{"twist": 1}], "2": [{"twist": 2}]},
           "differentials": {"0": [["e[0]"]], "1": [["e[1]"]]}}
    with pytest.raises(DocumentError) as e:
        parse_complex_document(json.dumps(doc))
    assert "d^2" in str(e.value)
