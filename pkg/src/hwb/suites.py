"""Scenario suite over the bundled corpus.

Each scenario re-derives one headline claim from scratch: it loads the
corpus, runs the library, and checks the outcome against expectations that
are written out here rather than imported from anywhere else.  The suite is
deterministic; every randomized scenario draws from a fixed seed.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass
from pathlib import Path

from . import oracle, syntax, textio
from .errors import ConsistencyLost, HwbError
from .forcing import (
    Condition, build_generic, extends, forces, interpolant_search,
    make_condition, positive_additions,
)
from .kripke import (
    ModelMorphism, amalgamate, basic_model, check_homomorphism,
    generated_submodel, global_satisfies, is_reachable, lift_model,
    quasi_isomorphic, reduct, satisfies,
)
from .oracle import DomainSpec, SearchBounds, sample_structure
from .sigcat import (
    NOM, check_cip_criterion, check_square_criterion, extend_with_constants,
    pushout, validate_morphism, validate_signature,
)
from .syntax import (
    Apply, At, Diamond, Eq, Exists, Nominal, Not, Or, Rel, Store, Variable,
    at, bottom, enumerate_sentences, EnumBudgets, ser_sentence, top, translate,
)

SUITE_SEED = 20260822


class CorpusMissing(HwbError):
    pass


class ScenarioFailure(HwbError):
    pass


def corpus_path(name):
    path = Path(__file__).with_name("corpus") / f"{name}.hwb"
    if not path.is_file():
        raise CorpusMissing(f"bundled corpus file missing: {path}")
    return path


def load_corpus(name):
    return textio.load_document(corpus_path(name))


def _require(condition, message):
    if not condition:
        raise ScenarioFailure(message)


@dataclass(frozen=True)
class ScenarioRow:
    name: str
    passed: bool
    seconds: float
    detail: str


@dataclass(frozen=True)
class SuiteReport:
    rows: tuple
    seconds: float

    @property
    def passed(self):
        return sum(1 for r in self.rows if r.passed)

    @property
    def total(self):
        return len(self.rows)


# ------------------------------------------------------------- generators
#
# Random material for the property scenarios.  These generators live here,
# unshared, so the suite exercises the library through its own constructions.

_SENTENCE_KINDS = ("not", "or", "at", "diamond", "store", "exists")


def _random_hybrid_signature(rng, tag):
    """A small signature with a random mix of features; always validates."""
    flex_sorts = [f"F{tag}{i}" for i in range(rng.randint(0, 2))]
    rigid_sorts = [f"R{tag}{i}" for i in range(rng.randint(0, 1))]
    every = flex_sorts + rigid_sorts
    ops, rigid_ops = [], []
    for i in range(rng.randint(0, 3)):
        if not every:
            break
        res = rng.choice(every)
        arity = rng.randint(0, 2)
        params = tuple(rng.choice(every) for _ in range(arity))
        ops.append((f"f{tag}{i}", params, res))
    for i in range(rng.randint(0, 2)):
        if not rigid_sorts:
            break
        res = rng.choice(rigid_sorts)
        params = tuple(rng.choice(rigid_sorts)
                       for _ in range(rng.randint(0, 1)))
        rigid_ops.append((f"g{tag}{i}", params, res))
    rels, rigid_rels = [], []
    if every and rng.random() < 0.6:
        params = tuple(rng.choice(every) for _ in range(rng.randint(1, 2)))
        rels.append((f"p{tag}", params))
    if rigid_sorts and rng.random() < 0.4:
        rigid_rels.append((f"q{tag}", (rng.choice(rigid_sorts),)))
    nominals = [f"k{tag}{i}" for i in range(rng.randint(0, 2))]
    modalities = [("lam", 2)] if rng.random() < 0.8 else []
    return validate_signature({
        "sorts": flex_sorts, "rigid_sorts": rigid_sorts,
        "ops": ops, "rigid_ops": rigid_ops,
        "rels": rels, "rigid_rels": rigid_rels,
        "nominals": nominals, "modalities": modalities,
    })


def _random_extension(rng, sig, tag):
    """A morphism out of sig: rename some sorts, then extend the target with
    fresh symbols.  Always passes validate_morphism."""
    rename = {}
    for s in sorted(sig.full.sorts):
        if rng.random() < 0.4:
            rename[s] = f"T{s}"
    mapped = lambda s: rename.get(s, s)
    flex_sorts = [mapped(s) for s in sorted(sig.sort_class.flexible)]
    rigid_sorts = [mapped(s) for s in sorted(sig.rigid.sorts)]
    ops, rigid_ops = [], []
    for name, params, res in sorted(sig.full.functions):
        profile = (name, tuple(mapped(p) for p in params), mapped(res))
        if sig.is_rigid_function((name, params, res)):
            rigid_ops.append(profile)
        else:
            ops.append(profile)
    rels, rigid_rels = [], []
    for name, params in sorted(sig.full.relations):
        profile = (name, tuple(mapped(p) for p in params))
        if sig.is_rigid_relation((name, params)):
            rigid_rels.append(profile)
        else:
            rels.append(profile)
    nominals = sorted(sig.nominals)
    modalities = sorted(sig.modalities)

    extra_rigid = f"X{tag}"
    if rng.random() < 0.5:
        rigid_sorts.append(extra_rigid)
        rigid_ops.append((f"x{tag}", (), extra_rigid))
    if rng.random() < 0.5:
        flex_sorts.append(f"Y{tag}")
        ops.append((f"y{tag}", (), f"Y{tag}"))
    if rng.random() < 0.3:
        nominals = nominals + [f"n{tag}"]
    if not modalities and rng.random() < 0.3:
        modalities = [("lam", 2)]

    target = validate_signature({
        "sorts": flex_sorts, "rigid_sorts": rigid_sorts,
        "ops": ops, "rigid_ops": rigid_ops,
        "rels": rels, "rigid_rels": rigid_rels,
        "nominals": nominals, "modalities": modalities,
    })
    return validate_morphism(sig, target, {
        "sorts": rename, "ops": {}, "rels": {},
        "nominals": {}, "modalities": {},
    })


def _random_term(rng, sig, sort, depth, scope):
    makers = [name for name, s in scope if s == sort]
    options = [("var", name, (), None) for name in makers]
    for name, params, res in sorted(sig.full.functions):
        if res != sort:
            continue
        if params and depth <= 0:
            continue
        tag = None
        if (not sig.is_rigid_function((name, params, res))
                and sig.is_rigid_sort(res)
                and all(sig.is_rigid_sort(p) for p in params)
                and sig.nominals and rng.random() < 0.25):
            tag = rng.choice(sorted(sig.nominals))
        options.append(("op", name, params, tag))
    if not options:
        return None
    kind, name, params, tag = rng.choice(options)
    if kind == "var":
        return Apply(name, ())
    args = []
    for p in params:
        arg = _random_term(rng, sig, p, depth - 1, scope)
        if arg is None:
            return None
        args.append(arg)
    return Apply(name, tuple(args), tag)


def _random_atom(rng, sig, scope, nom_scope):
    choices = ["truth"]
    nominal_names = sorted(sig.nominals) + list(nom_scope)
    if nominal_names:
        choices.append("nominal")
    if sig.full.relations:
        choices.append("rel")
    if sig.full.sorts:
        choices.append("eq")
    kind = rng.choice(choices)
    if kind == "nominal":
        return Nominal(rng.choice(nominal_names))
    if kind == "rel":
        name, params = rng.choice(sorted(sig.full.relations))
        args = []
        for p in params:
            t = _random_term(rng, sig, p, 1, scope)
            if t is None:
                return bottom() if rng.random() < 0.5 else top()
            args.append(t)
        return Rel(name, tuple(args))
    if kind == "eq":
        sort = rng.choice(sorted(sig.full.sorts))
        lhs = _random_term(rng, sig, sort, 1, scope)
        rhs = _random_term(rng, sig, sort, 1, scope)
        if lhs is None or rhs is None:
            return bottom() if rng.random() < 0.5 else top()
        return Eq(lhs, rhs)
    return bottom() if rng.random() < 0.5 else top()


def _random_sentence(rng, sig, depth, scope=(), nom_scope=(), quantifiers=2):
    if depth <= 0:
        return _random_atom(rng, sig, scope, nom_scope)
    kind = rng.choice(_SENTENCE_KINDS + ("atom",))
    if kind == "not":
        return Not(_random_sentence(rng, sig, depth - 1, scope, nom_scope,
                                    quantifiers))
    if kind == "or":
        left = _random_sentence(rng, sig, depth - 1, scope, nom_scope,
                                quantifiers)
        right = _random_sentence(rng, sig, depth - 1, scope, nom_scope,
                                 quantifiers)
        return Or((left, right))
    if kind == "at":
        names = sorted(sig.nominals) + list(nom_scope)
        if names:
            return At(rng.choice(names),
                      _random_sentence(rng, sig, depth - 1, scope, nom_scope,
                                       quantifiers))
    if kind == "diamond":
        binary = [name for name, rank in sorted(sig.modalities) if rank == 2]
        if binary:
            return Diamond(rng.choice(binary),
                           _random_sentence(rng, sig, depth - 1, scope,
                                            nom_scope, quantifiers))
    if kind == "store" and quantifiers > 0:
        var = Variable(f"z{len(nom_scope)}", NOM, sig.fingerprint)
        body = _random_sentence(rng, sig, depth - 1, scope,
                                nom_scope + (var.name,), quantifiers - 1)
        return Store(var, body)
    if kind == "exists" and quantifiers > 0:
        sorts = sorted(sig.rigid.sorts) + [NOM]
        sort = rng.choice(sorts)
        if sort == NOM:
            var = Variable(f"z{len(nom_scope)}", NOM, sig.fingerprint)
            body = _random_sentence(rng, sig, depth - 1, scope,
                                    nom_scope + (var.name,), quantifiers - 1)
        else:
            var = Variable(f"v{len(scope)}", sort, sig.fingerprint)
            body = _random_sentence(rng, sig, depth - 1,
                                    tuple(scope) + ((var.name, sort),),
                                    nom_scope, quantifiers - 1)
        return Exists(var, body)
    return _random_atom(rng, sig, scope, nom_scope)


# ------------------------------------------------------------- scenarios

def scenario_satisfaction_condition():
    """Translate-then-evaluate agrees with reduct-then-evaluate."""
    rng = random.Random(SUITE_SEED)
    triples = 0
    while triples < 1000:
        sig = _random_hybrid_signature(rng, "s")
        chi = _random_extension(rng, sig, "e")
        for _ in range(20):
            m = sample_structure(chi.target, rng)
            phi = _random_sentence(rng, sig, rng.randint(0, 3))
            syntax.validate_sentence(sig, phi)
            r = reduct(chi, m)
            chi_phi = translate(chi, phi)
            for w in m.frame.worlds:
                _require(
                    satisfies(r, w, phi) == satisfies(m, w, chi_phi),
                    f"satisfaction condition failed at {w} for "
                    f"{ser_sentence(phi)}")
            triples += 1
            if triples >= 1000:
                break
    return f"{triples} triples agreed"


def scenario_sound_algebra():
    """The boolean algebra satisfies its axioms, refutes true = false, and
    the empty-carrier reading of the universal quantifier is exact."""
    doc = load_corpus("sound")
    model = doc.models["A"]
    axioms = sorted(doc.presentations["Gamma"].sentences, key=ser_sentence)
    for phi in axioms:
        _require(global_satisfies(model, phi),
                 f"axiom fails: {ser_sentence(phi)}")
    _require(not satisfies(model, "w0", Eq(Apply("true", ()), Apply("false", ()))),
             "true = false should fail")
    sig = doc.signatures["Sound"]
    x = Variable("x", "Elt", sig.fingerprint)
    all_bottom = Not(Exists(x, top()))
    bounds = SearchBounds(max_worlds=1, max_carrier=2, budget=10**8,
                          mode="closed")
    swept = 0
    for m in oracle.enumerate_structures(sig, bounds):
        w = m.frame.worlds[0]
        _require(satisfies(m, w, all_bottom) == (not m.carrier(w, "Elt")),
                 "forall x:Elt . false disagrees with carrier emptiness")
        swept += 1
    return f"{len(axioms)} axioms, exhaustive sweep of {swept} structures"


_EXPECTED_RULES = {
    "fo_interpolation": ({"SortInjectivity"}, {"SortInjectivity"}),
    "lemma_preservation": ({"Preservation"}, {"Preservation"}),
    "lemma_sort_injectivity": ({"SortInjectivity"}, {"SortInjectivity"}),
    "lemma_op_inj_surj": ({"J1"}, {"I2"}),
    "lemma_op_surj": ({"J2"}, {"J1"}),
}

_SEARCH_BUDGETS = {
    "lemma_preservation": 8000,
    "lemma_sort_injectivity": 20000,
    "lemma_op_inj_surj": 4000,
    "lemma_op_surj": 6000,
}


def _check_rule_sets(name):
    doc = load_corpus(name)
    square = doc.squares["S"]
    expect_chi, expect_delta = _EXPECTED_RULES[name]
    report = check_square_criterion(square)
    got_chi = {rule for rule, _ in report.chi_report.violations}
    got_delta = {rule for rule, _ in report.delta_report.violations}
    _require(got_chi == expect_chi,
             f"chi rules {sorted(got_chi)} != {sorted(expect_chi)}")
    _require(got_delta == expect_delta,
             f"delta rules {sorted(got_delta)} != {sorted(expect_delta)}")
    _require(not report.guaranteed, "square unexpectedly guaranteed")
    return doc, square


def _check_witness_pair(name, doc, square, pointed=None):
    """The stored pair separates the square: phi_a holds on the left,
    not phi_b on the right, the base reducts have quasi-isomorphic
    generated parts, and no depth-2 candidate interpolates."""
    ma, mb = doc.models["Ma"], doc.models["Mb"]
    phi_a = doc.sentences["phi_a"][1]
    phi_b = doc.sentences["phi_b"][1]
    if pointed is None:
        _require(global_satisfies(ma, phi_a), "Ma does not satisfy phi_a")
        _require(global_satisfies(mb, Not(phi_b)),
                 "Mb does not satisfy not phi_b")
    else:
        _require(satisfies(ma, pointed, phi_a),
                 f"Ma does not satisfy phi_a at {pointed}")
        _require(satisfies(mb, pointed, Not(phi_b)),
                 f"Mb does not satisfy not phi_b at {pointed}")
    anchor = None if pointed is None else (pointed, pointed)
    witness = quasi_isomorphic(reduct(square.chi, ma),
                               reduct(square.delta, mb), pointed=anchor)
    _require(witness is not None, "generated reduct parts not isomorphic")

    bounds = SearchBounds(max_worlds=2, max_carrier=2,
                          budget=_SEARCH_BUDGETS[name], mode="closed")
    oracle.clear_cache()
    found = interpolant_search(square, phi_a, phi_b, 2, bounds)
    _require(found is None,
             f"unexpected interpolant {ser_sentence(found.sentence)}"
             if found else "")

    # stored-witness rule: each candidate is refuted by the bundled pair
    candidates = 0
    for theta in enumerate_sentences(square.base, 2):
        candidates += 1
        chi_theta = translate(square.chi, theta)
        delta_theta = translate(square.delta, theta)
        if pointed is None:
            left_holds = global_satisfies(ma, chi_theta)
            if left_holds:
                _require(
                    global_satisfies(mb, delta_theta)
                    and not global_satisfies(mb, phi_b),
                    f"candidate {ser_sentence(theta)} not refuted on the right")
            else:
                _require(global_satisfies(ma, phi_a),
                         "phi_a lost while refuting on the left")
        else:
            left_holds = satisfies(ma, pointed, chi_theta)
            if left_holds:
                _require(
                    satisfies(mb, pointed, delta_theta)
                    and not satisfies(mb, pointed, phi_b),
                    f"candidate {ser_sentence(theta)} not refuted on the right")
            else:
                _require(satisfies(ma, pointed, phi_a),
                         "phi_a lost while refuting on the left")
    return witness, candidates


def scenario_fo_interpolation():
    _check_rule_sets("fo_interpolation")
    return "SortInjectivity on both legs"


def scenario_preservation():
    doc, square = _check_rule_sets("lemma_preservation")
    _, candidates = _check_witness_pair("lemma_preservation", doc, square)
    return f"Preservation both legs; {candidates} candidates refuted"


def scenario_sort_injectivity():
    doc, square = _check_rule_sets("lemma_sort_injectivity")
    witness, candidates = _check_witness_pair(
        "lemma_sort_injectivity", doc, square)
    for w, per_sort in witness.world_maps:
        maps = {s: dict(t) for s, t in per_sort}
        for x, y in maps.get("Nat", {}).items():
            _require(x == y, "Nat component of the witness is not identity")
        for x, y in maps.get("Int", {}).items():
            _require(x != y, "Int component should move every element")
    return f"sign-flip witness; {candidates} candidates refuted"


def scenario_op_inj_surj():
    doc, square = _check_rule_sets("lemma_op_inj_surj")
    _, candidates = _check_witness_pair(
        "lemma_op_inj_surj", doc, square, pointed="w0")
    return f"J1 on chi, I2 on delta; {candidates} candidates refuted at w0"


def scenario_op_surj():
    doc, square = _check_rule_sets("lemma_op_surj")
    _, candidates = _check_witness_pair("lemma_op_surj", doc, square)
    return f"J2 on chi, J1 on delta; {candidates} candidates refuted"


def scenario_positive_squares():
    doc = load_corpus("positive_squares")
    _require(len(doc.squares) == 5, "expected five positive squares")
    for name, square in doc.squares.items():
        report = check_square_criterion(square)
        _require(report.guaranteed, f"{name} not guaranteed")
        _require(report.verdict == "CIP guaranteed",
                 f"{name} verdict {report.verdict!r}")
    return "5 squares guaranteed"


def _forcing_pool(bounds):
    """Materialized chains over two small seed presentations."""
    pools = []
    sig1 = validate_signature({
        "sorts": [], "rigid_sorts": ["Bool"],
        "ops": [], "rigid_ops": [("tt", (), "Bool"), ("ff", (), "Bool")],
        "rels": [], "rigid_rels": [],
        "nominals": ["k"], "modalities": [("lam", 2)],
    })
    gamma1 = [at("k", Not(Eq(Apply("tt"), Apply("ff"))))]
    pools.append((sig1, gamma1))
    doc = load_corpus("classic")
    sig2 = doc.signatures["Classic2"]
    gamma2 = sorted(doc.presentations["Gamma2"].sentences, key=ser_sentence)
    pools.append((sig2, gamma2))
    chains = []
    for sig, gamma in pools:
        seed = make_condition(sig, gamma, bounds)
        chains.append(build_generic(seed, 24, bounds, item_depth=2))
    return chains


def scenario_forcing_properties():
    """Forcing relation laws on materialized conditions, then agreement of
    forceable-extension with plain consistency."""
    bounds = SearchBounds(max_worlds=2, max_carrier=2, budget=400000,
                          mode="closed")
    chains = _forcing_pool(bounds)
    conditions = [c for chain in chains for c in chain.conditions]
    while len(conditions) < 200:
        conditions = conditions + conditions
    conditions = conditions[:200]

    checked = 0
    budgets = EnumBudgets(limit=6)
    for cond in conditions:
        k = sorted(cond.sig.nominals)[0]
        for phi in enumerate_sentences(cond.sig, 1, budgets):
            verdict = forces(cond, k, phi, bounds)
            negated = forces(cond, k, Not(phi), bounds)
            _require(not (verdict is True and negated is True),
                     f"forces both {ser_sentence(phi)} and its negation")
            if verdict is True:
                _require(forces(cond, k, Not(Not(phi)), bounds) is True,
                         f"double negation fails for {ser_sentence(phi)}")
            checked += 1
    for chain in chains:
        conds = chain.conditions
        k = sorted(conds[0].sig.nominals)[0]
        for phi in enumerate_sentences(conds[0].sig, 1, budgets):
            for i in range(len(conds) - 1):
                p, q = conds[i], conds[i + 1]
                _require(extends(q, p), "chain order broken")
                if forces(p, k, phi, bounds) is True:
                    _require(forces(q, k, phi, bounds) is True,
                             f"monotonicity fails for {ser_sentence(phi)}")

    # semantic forcing vs consistency, on the two seed conditions
    rng = random.Random(SUITE_SEED + 1)
    agreements = 0
    seeds = [chain.conditions[0] for chain in chains]
    while agreements < 200:
        for cond in seeds:
            k = rng.choice(sorted(cond.sig.nominals))
            phi = _random_sentence(rng, cond.sig, rng.randint(0, 2))
            syntax.validate_sentence(cond.sig, phi)
            taken = (set(cond.sig.nominals)
                     | {p[0] for p in cond.sig.full.functions}
                     | set(cond.sig.full.sorts))
            decls, asserted = positive_additions(cond.sig, k, phi, taken)
            ext_sig, _ = extend_with_constants(cond.sig, decls)
            try:
                make_condition(ext_sig,
                               cond.gamma | {at(k, phi)} | set(asserted),
                               bounds)
                forceable = True
            except ConsistencyLost:
                forceable = False
            consistent = oracle.consistent(
                cond.sig, sorted(cond.gamma | {at(k, phi)},
                                 key=ser_sentence), bounds)
            _require(forceable == consistent,
                     f"semantic forcing disagrees on {ser_sentence(phi)}")
            agreements += 1
            if agreements >= 200:
                break
    return f"{checked} law checks, {agreements} agreement checks"


def scenario_generic_model():
    """The classic presentations force a model with an empty guarded sort;
    the classical-Henkin control is inconsistent."""
    doc = load_corpus("classic")
    details = []
    for n in (2, 3):
        sig = doc.signatures[f"Classic{n}"]
        gamma = sorted(doc.presentations[f"Gamma{n}"].sentences,
                       key=ser_sentence)
        bounds = SearchBounds(max_worlds=2, max_carrier=1, budget=500000,
                              mode="closed")
        seed = make_condition(sig, gamma, bounds)
        chain = build_generic(seed, 40, bounds, item_depth=2)
        for phi in gamma:
            _require(global_satisfies(chain.model, phi),
                     f"generic model loses {ser_sentence(phi)}")
        empty = [s for s in sorted(sig.rigid.sorts)
                 if not chain.model.carrier(None, s)]
        _require(empty, f"no guarded sort is empty for n={n}")
        reachable, _ = is_reachable(chain.model)
        _require(reachable, f"generic model not reachable for n={n}")

        decls = [(f"a{i}", f"s{i}") for i in range(1, n + 1)] + [("a0", NOM)]
        control_sig, _ = extend_with_constants(sig, decls)
        _require(oracle.consistent(control_sig, gamma, bounds) is False,
                 f"classical control not inconsistent for n={n}")
        details.append(f"n={n} empty={','.join(empty)}")
    return "; ".join(details)


_BASIC_SIG = None


def _basic_scenario_signature():
    global _BASIC_SIG
    if _BASIC_SIG is None:
        _BASIC_SIG = validate_signature({
            "sorts": [], "rigid_sorts": ["Elt"],
            "ops": [], "rigid_ops": [("a", (), "Elt"), ("b", (), "Elt"),
                                     ("f", ("Elt",), "Elt")],
            "rels": [], "rigid_rels": [("r", ("Elt", "Elt"))],
            "nominals": ["k1", "k2"], "modalities": [("lam", 2)],
        })
    return _BASIC_SIG


def _basic_sentence_bank(sig):
    terms = [t for t, s in syntax.enumerate_terms(sig, 1, rigid_only=True)
             if s == "Elt"]
    bank = []
    for k in sorted(sig.nominals):
        for l in sorted(sig.nominals):
            bank.append(at(k, Nominal(l)))
            bank.append(at(k, Diamond("lam", Nominal(l))))
        for t1, t2 in itertools.combinations(terms, 2):
            bank.append(at(k, Eq(t1, t2)))
        for t1 in terms[:3]:
            for t2 in terms[:3]:
                bank.append(at(k, Rel("r", (t1, t2))))
    return bank


def _homomorphism_exists(source, target):
    """Exhaustive search for a homomorphism between two structures over one
    signature; worlds follow nominals, elements are tried exhaustively."""
    sig = source.sig
    world_choices = []
    anchored = {}
    for k in sorted(sig.nominals):
        anchored[source.frame.world_of(k)] = target.frame.world_of(k)
    for w in source.frame.worlds:
        if w in anchored:
            world_choices.append([anchored[w]])
        else:
            world_choices.append(list(target.frame.worlds))
    rigid_sorts = sorted(sig.rigid.sorts)
    flex_sorts = sorted(sig.sort_class.flexible)
    for frame_pick in itertools.product(*world_choices):
        frame_map = dict(zip(source.frame.worlds, frame_pick))
        rigid_spaces = []
        for s in rigid_sorts:
            dom = source.carrier(None, s)
            cod = target.carrier(None, s)
            if dom and not cod:
                rigid_spaces = None
                break
            rigid_spaces.append([dict(zip(dom, pick)) for pick in
                                 itertools.product(cod, repeat=len(dom))])
        if rigid_spaces is None:
            continue
        flex_spaces = []
        feasible = True
        for w in source.frame.worlds:
            for s in flex_sorts:
                dom = source.carrier(w, s)
                cod = target.carrier(frame_map[w], s)
                if dom and not cod:
                    feasible = False
                    break
                flex_spaces.append(((w, s), [dict(zip(dom, pick)) for pick in
                                             itertools.product(cod, repeat=len(dom))]))
            if not feasible:
                break
        if not feasible:
            continue
        for rigid_pick in itertools.product(*rigid_spaces):
            rigid_maps = dict(zip(rigid_sorts, rigid_pick))
            for flex_pick in itertools.product(*[s for _, s in flex_spaces]):
                world_maps = {w: {} for w in source.frame.worlds}
                for ((w, s), _), table in zip(flex_spaces, flex_pick):
                    world_maps[w][s] = table
                h = ModelMorphism(source, target, frame_map, rigid_maps,
                                  world_maps)
                if not check_homomorphism(h):
                    return True
    return False


def scenario_basic_model():
    """A structure satisfies a basic sentence set exactly when the basic
    model maps homomorphically into it."""
    sig = _basic_scenario_signature()
    bank = _basic_sentence_bank(sig)
    rng = random.Random(SUITE_SEED + 2)
    agreements = 0
    positives = 0
    for _ in range(100):
        psi = frozenset(rng.sample(bank, rng.randint(1, 4)))
        built, _ = basic_model(sig, psi, 1)
        m = sample_structure(sig, rng, max_carrier=2, max_worlds=2)
        total = (sum(len(m.carrier(None, s)) for s in sig.rigid.sorts)
                 + sum(len(m.carrier(w, s)) for w in m.frame.worlds
                       for s in sig.sort_class.flexible))
        _require(total <= 8, "sampled model too large for exhaustive search")
        holds = all(satisfies(m, m.frame.worlds[0], phi) for phi in psi)
        found = _homomorphism_exists(built, m)
        _require(holds == found,
                 f"universality fails for {[ser_sentence(p) for p in sorted(psi, key=ser_sentence)]}")
        agreements += 1
        positives += int(holds)
    return f"{agreements} sets checked, {positives} satisfied"


def _criterion_passing_morphism(rng, tag):
    """Random inclusion that the criterion accepts: renames plus fresh
    rigid material, fresh flexible sorts with their own constants, and
    fresh nominals."""
    sig = _random_hybrid_signature(rng, tag)
    renames = {}
    for s in sorted(sig.full.sorts):
        if rng.random() < 0.3:
            renames[s] = f"T{s}"
    mapped = lambda s: renames.get(s, s)
    flex_sorts = [mapped(s) for s in sorted(sig.sort_class.flexible)]
    rigid_sorts = [mapped(s) for s in sorted(sig.rigid.sorts)]
    ops, rigid_ops = [], []
    for name, params, res in sorted(sig.full.functions):
        profile = (name, tuple(mapped(p) for p in params), mapped(res))
        (rigid_ops if sig.is_rigid_function((name, params, res))
         else ops).append(profile)
    rels, rigid_rels = [], []
    for name, params in sorted(sig.full.relations):
        profile = (name, tuple(mapped(p) for p in params))
        (rigid_rels if sig.is_rigid_relation((name, params))
         else rels).append(profile)
    nominals = sorted(sig.nominals)
    modalities = sorted(sig.modalities) or [("lam", 2)]
    if rng.random() < 0.7:
        rigid_sorts.append(f"NR{tag}")
        rigid_ops.append((f"nr{tag}", (), f"NR{tag}"))
    if rng.random() < 0.7:
        flex_sorts.append(f"NF{tag}")
        ops.append((f"nf{tag}", (), f"NF{tag}"))
    if rng.random() < 0.5:
        nominals = nominals + [f"nn{tag}"]
    target = validate_signature({
        "sorts": flex_sorts, "rigid_sorts": rigid_sorts,
        "ops": ops, "rigid_ops": rigid_ops,
        "rels": rels, "rigid_rels": rigid_rels,
        "nominals": nominals, "modalities": modalities,
    })
    chi = validate_morphism(sig, target, {
        "sorts": renames, "ops": {}, "rels": {},
        "nominals": {}, "modalities": {},
    })
    return chi


def _identity_on_generated(g):
    frame_map = {w: w for w in g.frame.worlds}
    rigid_maps = {s: {x: x for x in g.carrier(None, s)}
                  for s in g.sig.rigid.sorts}
    world_maps = {w: {s: {x: x for x in g.carrier(w, s)}
                      for s in g.sig.sort_class.flexible}
                  for w in g.frame.worlds}
    return ModelMorphism(g, g, frame_map, rigid_maps, world_maps)


def scenario_lifting():
    """lift_model reproduces the source model under reduct and extends the
    given isomorphism without touching it."""
    rng = random.Random(SUITE_SEED + 3)
    lifted = 0
    attempts = 0
    while lifted < 50:
        attempts += 1
        _require(attempts < 2000, "could not sample enough passing morphisms")
        chi = _criterion_passing_morphism(rng, f"l{attempts}")
        if not check_cip_criterion(chi).passed:
            continue
        nprime = sample_structure(chi.target, rng)
        m = reduct(chi, nprime)
        g = generated_submodel(m)
        h = _identity_on_generated(g)
        mprime, hprime = lift_model(chi, m, nprime, h)
        _require(reduct(chi, mprime) == m, "lift reduct differs from m")
        hp_frame = dict(hprime.frame_map)
        for w, v in h.frame_map:
            _require(hp_frame[w] == v, "frame map not extended")
        for s, table in h.rigid_maps:
            target_sort = chi.map_sort(s)
            hp_table = dict(dict(hprime.rigid_maps)[target_sort])
            for x, y in table:
                _require(hp_table[x] == y, f"rigid map at {s} not extended")
        for w, per_sort in h.world_maps:
            hp_per = {s: dict(t) for s, t in dict(hprime.world_maps)[w]}
            for s, table in per_sort:
                target_sort = chi.map_sort(s)
                for x, y in table:
                    _require(hp_per[target_sort][x] == y,
                             f"world map at {w}/{s} not extended")
        lifted += 1
    return f"{lifted} lifts exact (from {attempts} samples)"


def scenario_amalgamation():
    """Amalgamation over random pushout squares is exact and repeatable."""
    rng = random.Random(SUITE_SEED + 4)
    done = 0
    attempts = 0
    while done < 100:
        attempts += 1
        _require(attempts < 2000, "could not sample enough squares")
        base = _random_hybrid_signature(rng, "b")
        chi = _random_extension(rng, base, "a")
        delta = _random_extension(rng, base, "c")
        square = pushout(chi, delta)
        apex_model = sample_structure(square.apex, rng)
        ma = reduct(square.delta_a, apex_model)
        mb = reduct(square.chi_b, apex_model)
        joined = amalgamate(square, ma, mb)
        _require(reduct(square.delta_a, joined) == ma,
                 "amalgam reduct differs on the left")
        _require(reduct(square.chi_b, joined) == mb,
                 "amalgam reduct differs on the right")
        _require(amalgamate(square, ma, mb) == joined,
                 "amalgamation is not repeatable")
        done += 1
    return f"{done} squares amalgamated exactly"


SCENARIOS = (
    ("satisfaction-condition", scenario_satisfaction_condition),
    ("sound-algebra", scenario_sound_algebra),
    ("fo-interpolation", scenario_fo_interpolation),
    ("preservation", scenario_preservation),
    ("sort-injectivity", scenario_sort_injectivity),
    ("op-inj-surj", scenario_op_inj_surj),
    ("op-surj", scenario_op_surj),
    ("positive-squares", scenario_positive_squares),
    ("forcing-properties", scenario_forcing_properties),
    ("generic-model", scenario_generic_model),
    ("basic-model", scenario_basic_model),
    ("lifting", scenario_lifting),
    ("amalgamation", scenario_amalgamation),
)


def run_paper_suite(only=None):
    names = [name for name, _ in SCENARIOS]
    if only is not None and only not in names:
        raise HwbError(
            f"unknown scenario {only!r} (choose from: {', '.join(names)})")
    rows = []
    suite_start = time.perf_counter()
    for name, fn in SCENARIOS:
        if only is not None and name != only:
            continue
        corpus_path  # corpus existence surfaces per scenario
        start = time.perf_counter()
        try:
            detail = fn()
            rows.append(ScenarioRow(name, True, time.perf_counter() - start,
                                    detail))
        except CorpusMissing:
            raise
        except ScenarioFailure as exc:
            rows.append(ScenarioRow(name, False, time.perf_counter() - start,
                                    str(exc)))
        except HwbError as exc:
            rows.append(ScenarioRow(
                name, False, time.perf_counter() - start,
                f"{type(exc).__name__}: {exc}"))
    return SuiteReport(tuple(rows), time.perf_counter() - suite_start)
