import json

import pytest

from hwb import textio
from hwb.errors import IllFormedTerm, ParseError
from hwb.kripke import satisfies
from hwb.oracle import SearchBounds
from hwb.sigcat import check_cip_criterion, check_square_criterion
from hwb.syntax import Apply, Eq, ser_sentence

ALL_CORPUS = [
    "sound", "classic", "empty", "fo_interpolation", "lemma_preservation",
    "lemma_sort_injectivity", "lemma_op_inj_surj", "lemma_op_surj",
    "positive_squares",
]


def test_tokenizer_records_positions():
    toks = textio.tokenize("signature S {\n  sorts A;\n}")
    assert toks[0].kind == "ident" and toks[0].text == "signature"
    line2 = [t for t in toks if t.line == 2]
    assert line2 and line2[0].column == 3
    assert toks[-1].kind == "eof"


def test_parse_error_carries_location():
    with pytest.raises(ParseError) as err:
        textio.parse_document("signature Bad {\n  sorts ;;\n}")
    assert err.value.line == 2
    assert err.value.column == 10
    assert "line 2" in str(err.value)


def test_unbalanced_block_is_a_parse_error():
    with pytest.raises(ParseError):
        textio.parse_document("signature S {\n  sorts A;\n")


def test_load_document_missing_file_raises():
    with pytest.raises(FileNotFoundError):
        textio.load_document("/tmp/definitely-not-here.hwb")


@pytest.mark.parametrize("name", ALL_CORPUS)
def test_corpus_documents_roundtrip(corpus, name):
    doc = corpus(name)
    sig_names = {s.fingerprint: n for n, s in doc.signatures.items()}
    pieces = []
    for n, sig in sorted(doc.signatures.items()):
        pieces.append(textio.print_signature(n, sig))
    for n, m in sorted(doc.morphisms.items()):
        pieces.append(textio.print_morphism(
            n, m, sig_names[m.source.fingerprint],
            sig_names[m.target.fingerprint]))
    for n, pres in sorted(doc.presentations.items()):
        pieces.append(textio.print_presentation(
            n, pres, sig_names[pres.signature.fingerprint]))
    for n, model in sorted(doc.models.items()):
        pieces.append(textio.print_model(
            n, model, sig_names[model.sig.fingerprint]))
    back = textio.parse_document("\n".join(pieces))
    assert back.signatures == doc.signatures
    assert back.morphisms == doc.morphisms
    assert back.presentations == doc.presentations
    assert back.models == doc.models


def test_parse_sentence_unknown_symbol(corpus):
    sig = corpus("sound").signatures["Sound"]
    with pytest.raises(IllFormedTerm):
        textio.parse_sentence(sig, "mystery = true")


def test_parse_sentence_matches_manual_tree(corpus):
    sig = corpus("sound").signatures["Sound"]
    phi = textio.parse_sentence(sig, "neg(true) = false")
    assert phi == Eq(Apply("neg", (Apply("true"),)), Apply("false"))


def test_stored_sentences_keep_their_signature(corpus):
    doc = corpus("lemma_op_surj")
    sig, phi = doc.sentences["phi_a"]
    assert sig == doc.signatures["SideA"]
    assert textio.parse_sentence(sig, ser_sentence(phi)) == phi


def test_json_reports_carry_schema_tag(corpus):
    doc = corpus("lemma_preservation")
    sig_js = textio.json_signature(doc.signatures["Base"])
    assert sig_js["schema"] == textio.SCHEMA
    assert sig_js["kind"] == "signature"
    report = check_cip_criterion(doc.morphisms["chi"], "chi")
    crit_js = textio.json_criterion(report)
    assert crit_js["verdict"] == "criterion failed"
    assert crit_js["violations"][0]["rule"] == "Preservation"
    square_js = textio.json_square_criterion(
        check_square_criterion(doc.squares["S"]))
    assert square_js["verdict"] == "CIP not guaranteed"
    assert set(square_js) >= {"chi", "delta", "kind", "schema"}
    json.dumps(square_js)  # everything serializable


def test_json_model_shape(corpus):
    doc = corpus("sound")
    js = textio.json_model(doc.models["A"])
    assert js["kind"] == "model"
    assert js["worlds"] == ["w0"]
    json.dumps(js)


def test_json_bounds_reflects_fields():
    bounds = SearchBounds(max_worlds=3, max_carrier=1, budget=77,
                          mode="closed")
    js = textio.json_bounds(bounds)
    assert js["maxWorlds"] == 3
    assert js["budget"] == 77
    assert js["mode"] == "closed"


def test_model_print_shares_rigid_block_once(corpus):
    doc = corpus("lemma_preservation")
    text = textio.print_model("Ma", doc.models["Ma"], "SideA")
    assert text.count("rigid {") == 1
    assert text.count("world ") == 2
    reparsed = textio.parse_document(
        textio.print_signature("SideA", doc.signatures["SideA"]) + "\n" + text)
    m = reparsed.models["Ma"]
    phi = doc.sentences["phi_a"][1]
    for w in m.frame.worlds:
        assert satisfies(m, w, phi)
