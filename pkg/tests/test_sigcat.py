import pytest
from hypothesis import given, settings, strategies as st

from hwb.errors import ClashError, MorphismError, ValidationError
from hwb.sigcat import (
    NOM, check_cip_criterion, check_square_criterion, classify_fragment,
    compose, extend_with_constants, identity, inhabited_sorts, make_square,
    pushout, valid_name, validate_morphism, validate_signature,
)


def test_valid_name_rejects_reserved_shapes():
    assert valid_name("Nat")
    assert valid_name("s_1")
    assert not valid_name("")
    assert not valid_name("two words")
    assert not valid_name("@k")


def test_validate_signature_rejects_rigid_profile_over_flexible_sort():
    with pytest.raises(ValidationError) as err:
        validate_signature({
            "sorts": ["Elt"], "rigid_sorts": ["Bool"],
            "ops": [], "rigid_ops": [("f", ("Elt",), "Bool")],
            "rels": [], "rigid_rels": [],
            "nominals": [], "modalities": [],
        })
    assert any("f" in v for v in err.value.violations)


def test_validate_signature_rejects_unknown_result_sort():
    with pytest.raises(ValidationError):
        validate_signature({
            "sorts": [], "rigid_sorts": ["Bool"],
            "ops": [], "rigid_ops": [("f", (), "Missing")],
            "rels": [], "rigid_rels": [],
            "nominals": [], "modalities": [],
        })


def test_validate_signature_rejects_bad_modality_rank(bool_sig):
    with pytest.raises(ValidationError):
        validate_signature({
            "sorts": [], "rigid_sorts": [],
            "ops": [], "rigid_ops": [],
            "rels": [], "rigid_rels": [],
            "nominals": [], "modalities": [("tri", 3)],
        })


def test_identity_and_composition(counter_sig):
    i = identity(counter_sig)
    assert i.source == counter_sig and i.target == counter_sig
    assert compose(i, i) == i


def test_compose_requires_matching_middle(bool_sig, counter_sig):
    from hwb.errors import CompositionError
    with pytest.raises(CompositionError):
        compose(identity(bool_sig), identity(counter_sig))


def test_validate_morphism_unmapped_sort_fails(bool_sig, counter_sig):
    with pytest.raises(MorphismError):
        validate_morphism(counter_sig, bool_sig, {
            "sorts": {}, "ops": {}, "rels": {},
            "nominals": {}, "modalities": {},
        })


def test_validate_morphism_requires_profile_fit(counter_sig):
    target = validate_signature({
        "sorts": ["Nat"], "rigid_sorts": ["Elt"],
        "ops": [("zero", ("Nat",), "Nat")],  # arity changed
        "rigid_ops": [("e", (), "Elt")],
        "rels": [("pos", ("Nat",))], "rigid_rels": [],
        "nominals": ["k1", "k2"], "modalities": [("lam", 2)],
    })
    with pytest.raises(MorphismError):
        validate_morphism(counter_sig, target, {
            "sorts": {}, "ops": {}, "rels": {},
            "nominals": {}, "modalities": {},
        })


def test_rigidity_preserved_along_morphisms(counter_sig):
    """A flexible symbol may become rigid but never the other way."""
    demoted = validate_signature({
        "sorts": ["Elt"], "rigid_sorts": [],
        "ops": [("e", (), "Elt")], "rigid_ops": [],
        "rels": [], "rigid_rels": [],
        "nominals": ["k1", "k2"], "modalities": [("lam", 2)],
    })
    src = validate_signature({
        "sorts": [], "rigid_sorts": ["Elt"],
        "ops": [], "rigid_ops": [("e", (), "Elt")],
        "rels": [], "rigid_rels": [],
        "nominals": ["k1", "k2"], "modalities": [("lam", 2)],
    })
    with pytest.raises(MorphismError):
        validate_morphism(src, demoted, {
            "sorts": {}, "ops": {}, "rels": {},
            "nominals": {}, "modalities": {},
        })
    promoted = validate_morphism(demoted, src, {
        "sorts": {}, "ops": {}, "rels": {},
        "nominals": {}, "modalities": {},
    })
    assert promoted.map_sort("Elt") == "Elt"


def test_extend_with_constants_nominal_and_rigid(bool_sig):
    ext, inc = extend_with_constants(bool_sig, [("c", "Bool"), ("n", NOM)])
    assert ("c", (), "Bool") in ext.full.functions
    assert "n" in ext.nominals
    assert inc.source == bool_sig and inc.target == ext
    with pytest.raises(ValidationError):
        extend_with_constants(bool_sig, [("c", "Missing")])


def test_extend_with_constants_rejects_clash(bool_sig):
    with pytest.raises(ClashError):
        extend_with_constants(bool_sig, [("tt", "Bool")])


def test_pushout_legs_commute(corpus):
    doc = corpus("lemma_preservation")
    square = doc.squares["S"]
    left = compose(square.chi, square.delta_a)
    right = compose(square.delta, square.chi_b)
    assert left == right


def test_pushout_apex_names_least_member():
    base = validate_signature({
        "sorts": [], "rigid_sorts": ["B"],
        "ops": [], "rigid_ops": [],
        "rels": [], "rigid_rels": [],
        "nominals": [], "modalities": [],
    })
    upper = validate_signature({
        "sorts": [], "rigid_sorts": ["Zed"],
        "ops": [], "rigid_ops": [],
        "rels": [], "rigid_rels": [],
        "nominals": [], "modalities": [],
    })
    lower = validate_signature({
        "sorts": [], "rigid_sorts": ["Alpha"],
        "ops": [], "rigid_ops": [],
        "rels": [], "rigid_rels": [],
        "nominals": [], "modalities": [],
    })
    chi = validate_morphism(base, upper, {
        "sorts": {"B": "Zed"}, "ops": {}, "rels": {},
        "nominals": {}, "modalities": {}})
    delta = validate_morphism(base, lower, {
        "sorts": {"B": "Alpha"}, "ops": {}, "rels": {},
        "nominals": {}, "modalities": {}})
    square = pushout(chi, delta)
    # the merged class {Zed, Alpha} takes its least member's name
    assert square.apex.rigid.sorts == frozenset({"Alpha"})


def test_make_square_rejects_mismatched_base(corpus):
    doc = corpus("lemma_preservation")
    other = corpus("lemma_op_surj").squares["S"]
    s = doc.squares["S"]
    with pytest.raises(MorphismError):
        make_square(s.chi, other.delta, s.delta_a, s.chi_b)


def test_criterion_tier_zero_masks_later_tiers(corpus):
    """A sort-collapsing morphism reports SortInjectivity alone even
    though the same merge also breaks the flexible-op conditions."""
    doc = corpus("lemma_sort_injectivity")
    report = check_cip_criterion(doc.morphisms["chi"])
    assert not report.passed
    assert {rule for rule, _ in report.violations} == {"SortInjectivity"}
    assert not report.sort_injective


def test_criterion_preservation_names_the_sort(corpus):
    doc = corpus("lemma_preservation")
    report = check_cip_criterion(doc.morphisms["chi"])
    rules = dict(report.violations)
    assert set(rules) == {"Preservation"}
    assert "Nat" in rules["Preservation"]


def test_criterion_j_rules_are_per_symbol(corpus):
    doc = corpus("lemma_op_surj")
    report = check_cip_criterion(doc.morphisms["chi"])
    rules = dict(report.violations)
    assert set(rules) == {"J2"}
    assert rules["J2"] == ("f",)


def test_criterion_i2_on_merging_leg(corpus):
    doc = corpus("lemma_op_inj_surj")
    report = check_cip_criterion(doc.morphisms["delta"])
    assert {rule for rule, _ in report.violations} == {"I2"}


def test_square_verdict_needs_one_clean_leg(corpus):
    bad = check_square_criterion(corpus("lemma_preservation").squares["S"])
    assert not bad.guaranteed
    assert bad.verdict == "CIP not guaranteed"
    good = check_square_criterion(
        corpus("positive_squares").squares["one_leg_merge"])
    assert good.guaranteed
    assert good.verdict == "CIP guaranteed"


def test_identity_passes_criterion(counter_sig):
    assert check_cip_criterion(identity(counter_sig)).passed


def test_inhabited_sorts_fixpoint(counter_sig):
    assert inhabited_sorts(counter_sig) == frozenset({"Nat", "Elt"})
    lonely = validate_signature({
        "sorts": [], "rigid_sorts": ["A", "B"],
        "ops": [], "rigid_ops": [("f", ("A",), "B")],
        "rels": [], "rigid_rels": [],
        "nominals": [], "modalities": [],
    })
    # f: A -> B gives B nothing until A has a ground term
    assert inhabited_sorts(lonely) == frozenset()


def test_classify_fragment(bool_sig):
    rfohl = validate_signature({
        "sorts": [], "rigid_sorts": ["S"],
        "ops": [], "rigid_ops": [],
        "rels": [], "rigid_rels": [],
        "nominals": ["k"], "modalities": [("lam", 2)],
    })
    hpl = validate_signature({
        "sorts": [], "rigid_sorts": [],
        "ops": [], "rigid_ops": [],
        "rels": [], "rigid_rels": [],
        "nominals": ["k"], "modalities": [("lam", 2)],
    })
    assert classify_fragment(rfohl) == frozenset({"RFOHL"})
    assert classify_fragment(hpl) == frozenset({"HPL"})
    assert classify_fragment(bool_sig) == frozenset({"general"})


_names = st.sampled_from(["A", "B", "C", "D"])


@settings(max_examples=50, deadline=None)
@given(st.lists(_names, min_size=1, max_size=4, unique=True),
       st.permutations(["A", "B", "C", "D"]),
       st.permutations(["A", "B", "C", "D"]))
def test_pushout_of_renamings_commutes(sorts, perm_a, perm_b):
    table_a = dict(zip(["A", "B", "C", "D"], perm_a))
    table_b = dict(zip(["A", "B", "C", "D"], perm_b))
    base = validate_signature({
        "sorts": [], "rigid_sorts": sorts,
        "ops": [], "rigid_ops": [],
        "rels": [], "rigid_rels": [],
        "nominals": [], "modalities": [],
    })
    ren_a = validate_signature({
        "sorts": [], "rigid_sorts": [f"U{table_a[s]}" for s in sorts],
        "ops": [], "rigid_ops": [],
        "rels": [], "rigid_rels": [],
        "nominals": [], "modalities": [],
    })
    ren_b = validate_signature({
        "sorts": [], "rigid_sorts": [f"V{table_b[s]}" for s in sorts],
        "ops": [], "rigid_ops": [],
        "rels": [], "rigid_rels": [],
        "nominals": [], "modalities": [],
    })
    chi = validate_morphism(base, ren_a, {
        "sorts": {s: f"U{table_a[s]}" for s in sorts},
        "ops": {}, "rels": {}, "nominals": {}, "modalities": {}})
    delta = validate_morphism(base, ren_b, {
        "sorts": {s: f"V{table_b[s]}" for s in sorts},
        "ops": {}, "rels": {}, "nominals": {}, "modalities": {}})
    square = pushout(chi, delta)
    assert compose(chi, square.delta_a) == compose(delta, square.chi_b)
    assert check_square_criterion(square).guaranteed
