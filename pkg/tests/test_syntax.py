import pytest
from hypothesis import given, settings, strategies as st

from hwb.errors import (
    FlexibleQuantificationError, IllFormedSentence, IllFormedTerm,
)
from hwb.sigcat import NOM, identity, validate_morphism, validate_signature
from hwb.syntax import (
    Apply, At, Diamond, Eq, EnumBudgets, Exists, Nominal, Not, Or, Rel,
    Store, Variable, apply_substitution, at, bottom, box, classify_sentence,
    conj, derived, enumerate_sentences, enumerate_terms, forall, is_basic,
    resolve_term, rigid_ground_terms, rigidify, sent_depth, ser_sentence,
    sort_of, top, translate, until, validate_sentence,
)
from hwb.textio import parse_sentence


def test_resolve_term_rejects_tag_on_rigid_op(counter_sig):
    with pytest.raises(IllFormedTerm):
        resolve_term(counter_sig, Apply("e", (), tag="k1"))


def test_resolve_term_rejects_unknown_tag(counter_sig):
    with pytest.raises(IllFormedTerm):
        resolve_term(counter_sig, Apply("zero", (), tag="nope"))


def test_tagged_flexible_term_gets_hybrid_sort(counter_sig):
    assert sort_of(counter_sig, Apply("zero", ())) == "Nat"
    assert sort_of(counter_sig, Apply("zero", (), tag="k1")) == \
        ("@", "k1", "Nat")


def test_equation_requires_matching_hybrid_sorts(counter_sig):
    mixed = Eq(Apply("zero", ()), Apply("zero", (), tag="k1"))
    with pytest.raises(IllFormedSentence):
        validate_sentence(counter_sig, mixed)
    same = Eq(Apply("zero", (), tag="k1"), Apply("zero", (), tag="k1"))
    validate_sentence(counter_sig, same)


def test_quantification_over_flexible_sort_fails(counter_sig):
    v = Variable("x", "Nat", counter_sig.fingerprint)
    with pytest.raises(FlexibleQuantificationError):
        validate_sentence(counter_sig, Exists(v, top()))


def test_quantification_over_rigid_and_nom(counter_sig):
    e = Variable("x", "Elt", counter_sig.fingerprint)
    validate_sentence(counter_sig, Exists(e, Eq(Apply("x"), Apply("e"))))
    z = Variable("z", NOM, counter_sig.fingerprint)
    validate_sentence(counter_sig, Exists(z, At("z", Nominal("k1"))))
    validate_sentence(counter_sig, Store(z, Diamond("lam", Nominal("z"))))


def test_at_unknown_nominal_fails(counter_sig):
    with pytest.raises(IllFormedSentence):
        validate_sentence(counter_sig, At("ghost", top()))


def test_nested_at_collapses_through_helper():
    phi = at("k1", At("k2", Nominal("k1")))
    assert phi == At("k2", Nominal("k1"))


def test_sent_depth_counts_operators(counter_sig):
    assert sent_depth(Nominal("k1")) == 0
    assert sent_depth(Diamond("lam", Nominal("k1"))) == 0
    assert sent_depth(bottom()) == 0
    assert sent_depth(Not(Diamond("lam", Nominal("k1")))) == 1
    assert sent_depth(Not(Diamond("lam", bottom()))) == 2


def test_classify_sentence_tiers(counter_sig):
    zero = Eq(Apply("e"), Apply("e"))
    assert classify_sentence(zero) == "Sen0"
    assert classify_sentence(at("k1", zero)) == "SenB"
    assert classify_sentence(Not(zero)) == "Full"
    assert classify_sentence(Diamond("lam", Nominal("k1"))) == "Sen0"
    assert classify_sentence(Diamond("lam", top())) == "Full"
    assert is_basic(at("k1", Diamond("lam", Nominal("k2"))))
    assert not is_basic(Or((zero, zero)))


def test_rigidify_closes_under_nominals(counter_sig):
    phi = Eq(Apply("zero"), Apply("zero"))
    closure = rigidify(counter_sig, phi)
    assert closure == {at("k1", phi), at("k2", phi)}
    topped = at("k1", phi)
    assert rigidify(counter_sig, topped) == {topped}


def test_derived_formers_build_valid_sentences(counter_sig):
    phi = Eq(Apply("zero"), Apply("zero"))
    psi = Rel("pos", (Apply("zero"),))
    validate_sentence(counter_sig, conj((phi, psi)))
    validate_sentence(counter_sig, box("lam", phi))
    e = Variable("x", "Elt", counter_sig.fingerprint)
    validate_sentence(counter_sig, forall(e, top()))
    u = until(counter_sig, phi, psi)
    validate_sentence(counter_sig, u)
    assert derived("and", (phi, psi)) == conj((phi, psi))


def test_until_needs_unique_binary_modality(bool_sig):
    two = validate_signature({
        "sorts": [], "rigid_sorts": [],
        "ops": [], "rigid_ops": [],
        "rels": [], "rigid_rels": [],
        "nominals": ["k"], "modalities": [("lam", 2), ("mu", 2)],
    })
    with pytest.raises(IllFormedSentence):
        until(two, top(), top())


def test_translate_preserves_wellformedness(corpus):
    doc = corpus("lemma_preservation")
    inc = doc.morphisms["delta_a"]  # SideA -> Apex, an inclusion
    text = ("forall x : Nat . "
            "(or { not (suc(x) = zero); <lam> (not (suc(x) = zero)) })")
    phi = parse_sentence(inc.source, text)
    image = translate(inc, phi)
    validate_sentence(inc.target, image)
    assert image == parse_sentence(inc.target, text)


def test_translate_renames_sorts_in_binders(corpus):
    doc = corpus("fo_interpolation")
    chi = doc.morphisms["chi"]  # maps Int onto Nat
    v = Variable("x", "Int", chi.source.fingerprint)
    phi = Exists(v, Eq(Apply("x"), Apply("x")))
    validate_sentence(chi.source, phi)
    image = translate(chi, phi)
    validate_sentence(chi.target, image)
    assert isinstance(image, Exists) and image.var.sort == "Nat"


def test_substitution_grounds_nominal_variables(counter_sig):
    z = Variable("z", NOM, counter_sig.fingerprint)
    phi = At("z", Diamond("lam", Nominal("z")))
    grounded = apply_substitution(counter_sig, {"z": "k1"}, phi)
    validate_sentence(counter_sig, grounded)
    assert grounded == At("k1", Diamond("lam", Nominal("k1")))


def test_substitution_grounds_rigid_variables(counter_sig):
    x = Variable("x", "Elt", counter_sig.fingerprint)
    phi = Eq(Apply("x"), Apply("e"))
    grounded = apply_substitution(counter_sig, {"x": Apply("e")}, phi)
    assert grounded == Eq(Apply("e"), Apply("e"))


def test_enumerate_terms_rigid_only_filter(counter_sig):
    """Rigid-only keeps world-independent terms: rigid symbols and
    tagged flexible applications (the @-universe)."""
    every = set(enumerate_terms(counter_sig, 1))
    rigid = set(enumerate_terms(counter_sig, 1, rigid_only=True))
    assert rigid < every
    for term, sort in rigid:
        assert sort == "Elt" or sort[0] == "@"
    assert (Apply("zero"), "Nat") in every - rigid


def test_rigid_ground_terms_grow_with_depth(corpus):
    sig = corpus("sound").signatures["Sound"]
    d0 = rigid_ground_terms(sig, "Bool", 0)
    d1 = rigid_ground_terms(sig, "Bool", 1)
    assert set(d0) <= set(d1)
    assert Apply("true") in d0
    assert Apply("neg", (Apply("true"),)) in set(d1) - set(d0)
    assert list(rigid_ground_terms(sig, "Elt", 2)) == []


def test_enumeration_respects_budgets(counter_sig):
    lean = list(enumerate_sentences(counter_sig, 1, EnumBudgets(limit=10)))
    assert len(lean) == 10
    deeper = list(enumerate_sentences(counter_sig, 2, EnumBudgets(limit=40)))
    assert len(deeper) == 40


def test_ser_sentence_is_stable_under_parse(counter_sig):
    samples = [
        at("k1", Eq(Apply("zero", (), tag="k2"), Apply("zero", (), tag="k2"))),
        Or(()),
        Not(bottom()),
        Store(Variable("z", NOM, counter_sig.fingerprint),
              Diamond("lam", Nominal("z"))),
        forall(Variable("x", "Elt", counter_sig.fingerprint),
               Rel("pos", (Apply("zero"),))),
    ]
    for phi in samples:
        validate_sentence(counter_sig, phi)
        assert parse_sentence(counter_sig, ser_sentence(phi)) == phi


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_enumerated_sentences_validate_and_roundtrip(corpus, data):
    sig = corpus("classic").signatures["Classic2"]
    phis = list(enumerate_sentences(sig, 2, EnumBudgets(limit=300)))
    phi = data.draw(st.sampled_from(phis))
    validate_sentence(sig, phi)
    assert parse_sentence(sig, ser_sentence(phi)) == phi


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_translate_along_identity_is_identity(corpus, data):
    sig = corpus("classic").signatures["Classic2"]
    phis = list(enumerate_sentences(sig, 2, EnumBudgets(limit=200)))
    phi = data.draw(st.sampled_from(phis))
    assert translate(identity(sig), phi) == phi
