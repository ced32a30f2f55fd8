"""Dynamic-constant forcing: conditions, the forcing relation, generic
chains, and the dual-chain interpolation driver.

A condition is a signature extension of some base (constants and nominals
only) together with a finite consistent sentence set. The basic part f(p)
is the rigidification of the sentence set intersected with the basic
sentences, extended with rigidified bare nominal atoms. Decisions, witness
introduction, and consistency certificates all run through the bounded
oracle, so every verdict here is a bounded one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import oracle, syntax
from .errors import (
    BoundTooSmall, BudgetExceeded, ConsistencyLost, EmptyFrame,
    JointConsistencyLost,
)
from .kripke import basic_model, global_satisfies, quasi_isomorphic, reduct
from .sigcat import NOM, compose, extend_with_constants, validate_morphism
from .syntax import (
    At, Diamond, Eq, Exists, Nominal, Not, Or, Rel, Store,
    apply_substitution, at, enumerate_sentences, rigidify_set,
    ser_sentence, translate,
)


@dataclass(frozen=True)
class Condition:
    sig: object
    gamma: frozenset
    certificate: object = None

    def __post_init__(self):
        object.__setattr__(self, "gamma", frozenset(self.gamma))


def make_condition(sig, gamma, bounds):
    """A condition must be consistent; the witness verdict is kept as its
    certificate. Definite inconsistency and open-mode uncertainty both
    refuse the condition."""
    gamma = frozenset(gamma)
    verdict = oracle.find_model(sig, gamma, bounds)
    if isinstance(verdict, oracle.Satisfiable):
        return Condition(sig, gamma, verdict)
    raise ConsistencyLost(
        f"seed set is not satisfiable within bounds: {type(verdict).__name__}")


def extends(q, p):
    """Componentwise inclusion: q's signature and sentence set contain p's."""
    return (p.sig.nominals <= q.sig.nominals
            and p.sig.modalities <= q.sig.modalities
            and p.sig.full.sorts <= q.sig.full.sorts
            and p.sig.full.functions <= q.sig.full.functions
            and p.sig.full.relations <= q.sig.full.relations
            and p.gamma <= q.gamma)


def _is_basic_shape(phi):
    if not isinstance(phi, At):
        return False
    body = phi.body
    if isinstance(body, (Eq, Rel, Nominal)):
        return True
    return isinstance(body, Diamond) and isinstance(body.body, Nominal)


def basic_part(cond):
    """f(p): the rigidified sentence set restricted to basic sentences,
    with rigidified bare nominal atoms kept as world-merge entries."""
    return frozenset(
        phi for phi in rigidify_set(cond.sig, cond.gamma) if _is_basic_shape(phi))


def _merge3(values):
    """Three-valued any(): True beats None beats False."""
    saw_none = False
    for v in values:
        if v is True:
            return True
        if v is None:
            saw_none = True
    return None if saw_none else False


def forces(cond, nominal, phi, bounds):
    """The forcing relation at a nominal; True, False, or None when the
    negation clause's consistency question is open."""
    f_plus = basic_part(cond)

    def go(k, psi):
        if isinstance(psi, Store):
            return go(k, apply_substitution(
                cond.sig, {psi.var.name: k}, psi.body))
        if isinstance(psi, Nominal):
            return at(k, psi) in f_plus
        if isinstance(psi, (Eq, Rel)):
            return at(k, psi) in f_plus
        if isinstance(psi, Diamond):
            if isinstance(psi.body, Nominal):
                return at(k, psi) in f_plus
            results = []
            for l in sorted(cond.sig.nominals):
                if at(k, Diamond(psi.modality, Nominal(l))) in f_plus:
                    results.append(go(l, psi.body))
                else:
                    results.append(False)
            return _merge3(results)
        if isinstance(psi, Or):
            return _merge3(go(k, d) for d in psi.disjuncts)
        if isinstance(psi, At):
            return go(psi.nominal, psi.body)
        if isinstance(psi, Not):
            verdict = oracle.consistent(
                cond.sig, list(cond.gamma) + [at(k, psi.body)], bounds)
            if verdict is None:
                return None
            return not verdict
        if isinstance(psi, Exists):
            name, sort = psi.var.name, psi.var.sort
            if sort == NOM:
                witnesses = [Nominal(l) for l in sorted(cond.sig.nominals)]
                return _merge3(
                    go(k, apply_substitution(cond.sig, {name: w.name}, psi.body))
                    for w in witnesses)
            terms = syntax.rigid_ground_terms(cond.sig, sort, bounds.term_depth)
            return _merge3(
                go(k, apply_substitution(cond.sig, {name: t}, psi.body))
                for t in terms)
        raise ValueError(f"unknown sentence node {psi!r}")

    return go(nominal, phi)


def weak_forces(cond, nominal, phi, bounds):
    """Semantic forcing: bounded entailment of the sentence at the nominal
    from the condition's sentence set."""
    verdict = oracle.entails_at(cond.sig, cond.gamma, nominal, phi, bounds)
    if isinstance(verdict, oracle.ExhaustedComplete):
        return True
    if isinstance(verdict, oracle.Refuted):
        return False
    return None


def _fresh_named(taken, prefix):
    i = 0
    while f"{prefix}{i}" in taken:
        i += 1
    return f"{prefix}{i}"


def _taken_names(sig):
    return (set(sig.nominals) | {p[0] for p in sig.full.functions}
            | {p[0] for p in sig.full.relations} | set(sig.full.sorts))


def positive_additions(sig, k, psi, taken, nominal_prefix="c", constant_prefix="u"):
    """Witness obligations for a positive decision at k: declarations of
    fresh constants and the sentences to assert, gathered recursively.

    Diamond bodies get a fresh nominal with the edge atom and the body
    asserted there; exists gets a Henkin constant and the instance; store
    gets the normalized instance. Disjunctions add nothing."""
    decls = []
    sentences = []

    def go(k, psi):
        if isinstance(psi, Store):
            instance = apply_substitution(sig, {psi.var.name: k}, psi.body)
            sentences.append(at(k, instance))
            go(k, instance)
        elif isinstance(psi, At):
            go(psi.nominal, psi.body)
        elif isinstance(psi, Diamond) and not isinstance(psi.body, Nominal):
            c = _fresh_named(taken, nominal_prefix)
            taken.add(c)
            decls.append((c, NOM))
            sentences.append(at(k, Diamond(psi.modality, Nominal(c))))
            sentences.append(at(c, psi.body))
            go(c, psi.body)
        elif isinstance(psi, Exists):
            name, sort = psi.var.name, psi.var.sort
            if sort == NOM:
                c = _fresh_named(taken, nominal_prefix)
                taken.add(c)
                decls.append((c, NOM))
                instance = apply_substitution(sig, {name: c}, psi.body)
            else:
                u = _fresh_named(taken, constant_prefix)
                taken.add(u)
                decls.append((u, sort))
                instance = apply_substitution(
                    sig, {name: syntax.Apply(u)}, psi.body)
            sentences.append(at(k, instance))
            go(k, instance)

    go(k, psi)
    return decls, sentences


def extend_condition(cond, decls, sentences, bounds, check=True):
    sig = cond.sig
    if decls:
        sig, _ = extend_with_constants(sig, decls)
    gamma = cond.gamma | frozenset(sentences)
    if check:
        return make_condition(sig, gamma, bounds)
    return Condition(sig, gamma, cond.certificate)


def cantor_unpair(n):
    w = (math.isqrt(8 * n + 1) - 1) // 2
    j = n - w * (w + 1) // 2
    return w - j, j


@dataclass(frozen=True)
class Decision:
    step: int
    condition_index: int
    item_index: int
    nominal: object
    sentence: object
    outcome: str  # "positive" | "negative" | "skip"
    added: tuple = ()


@dataclass(frozen=True)
class GenericChain:
    conditions: tuple
    decisions: tuple
    model: object
    table: tuple
    seed_report: tuple

    @property
    def final(self):
        return self.conditions[-1]


class _ItemStream:
    """Materialized-on-demand decision items of one condition: sentence
    stream paired with each nominal, sentence-major, deterministic."""

    def __init__(self, sig, depth, budgets):
        self.items = []
        self._gen = self._generate(sig, depth, budgets)
        self._done = False

    def _generate(self, sig, depth, budgets):
        nominals = sorted(sig.nominals)
        for phi in enumerate_sentences(sig, depth, budgets):
            for k in nominals:
                yield (k, phi)

    def get(self, j):
        while not self._done and len(self.items) <= j:
            try:
                self.items.append(next(self._gen))
            except StopIteration:
                self._done = True
        if j < len(self.items):
            return self.items[j]
        return None


def build_generic(seed, steps, bounds, item_depth=2, budgets=None,
                  extract_depth=2):
    """Drive a generic chain from the seed condition for the given number
    of decision steps, then extract the basic model.

    The schedule walks Cantor pairs (condition index, item index) over each
    condition's deterministic item stream. Decisions are positively biased:
    the sentence is asserted at its nominal when consistent within bounds,
    with eager witnesses, and denied otherwise. ConsistencyLost is raised
    only when open bounds leave both directions unknown."""
    budgets = budgets or syntax.EnumBudgets()
    chain = [seed]
    streams = {0: _ItemStream(seed.sig, item_depth, budgets)}
    decisions = []
    for n in range(steps):
        i, j = cantor_unpair(n)
        current = chain[-1]
        if i >= len(chain):
            chain.append(current)
            continue
        if i not in streams:
            streams[i] = _ItemStream(chain[i].sig, item_depth, budgets)
        item = streams[i].get(j)
        if item is None:
            chain.append(current)
            decisions.append(Decision(n, i, j, None, None, "skip"))
            continue
        k, phi = item
        candidate = at(k, phi)
        negation = at(k, Not(phi))
        if candidate in current.gamma or negation in current.gamma:
            chain.append(current)
            decisions.append(Decision(n, i, j, k, phi, "skip"))
            continue
        verdict = oracle.consistent(
            current.sig, list(current.gamma) + [candidate], bounds)
        if verdict is True:
            taken = _taken_names(current.sig)
            decls, witnesses = positive_additions(current.sig, k, phi, taken)
            added = (candidate,) + tuple(witnesses)
            nxt = extend_condition(current, decls, added, bounds, check=False)
            chain.append(nxt)
            decisions.append(Decision(n, i, j, k, phi, "positive", added))
            continue
        neg_verdict = oracle.consistent(
            current.sig, list(current.gamma) + [negation], bounds)
        if neg_verdict is True:
            nxt = extend_condition(current, (), (negation,), bounds, check=False)
            chain.append(nxt)
            decisions.append(Decision(n, i, j, k, phi, "negative", (negation,)))
            continue
        raise ConsistencyLost(
            f"step {n}: cannot decide {ser_sentence(candidate)} within bounds")
    final = chain[-1]
    model, table = basic_model(final.sig, basic_part(final), extract_depth)
    seed_report = []
    for phi in sorted(seed.gamma, key=ser_sentence):
        try:
            seed_report.append((phi, global_satisfies(model, phi)))
        except BoundTooSmall:
            seed_report.append((phi, None))
    return GenericChain(tuple(chain), tuple(decisions), model,
                        tuple(sorted(table.items())), tuple(seed_report))


@dataclass(frozen=True)
class Interpolant:
    sentence: object
    left: object
    right: object


@dataclass(frozen=True)
class Witnesses:
    model_a: object
    world_a: object
    model_b: object
    world_b: object
    morphism: object


@dataclass(frozen=True)
class Inconclusive:
    reason: str


@dataclass(frozen=True)
class ChainStep:
    round: int
    side: str
    nominal: object
    sentence: object
    outcome: str


@dataclass(frozen=True)
class InterpolationRun:
    steps: tuple
    result: object


def interpolant_search(square, phi_a, phi_b, depth, bounds, budgets=None):
    """Least base-signature sentence whose two entailments both close, or
    None when the stream up to the depth has no such candidate.  A candidate
    whose entailment cannot be confirmed within the node budget is skipped;
    absence is a normal result, never an error."""
    budgets = budgets or syntax.EnumBudgets()
    chi, delta = square.chi, square.delta
    for theta in enumerate_sentences(square.base, depth, budgets):
        try:
            left = oracle.entails(
                chi.target, [phi_a], translate(chi, theta), bounds)
        except BudgetExceeded:
            continue
        if not isinstance(left, oracle.ExhaustedComplete):
            continue
        try:
            right = oracle.entails(
                delta.target, [translate(delta, theta)], phi_b, bounds)
        except BudgetExceeded:
            continue
        if isinstance(right, oracle.ExhaustedComplete):
            return Interpolant(theta, left, right)
    return None


def _joint_consistent(square, cond_a, cond_b, added_a, added_b, bounds):
    """C1: the two sentence sets, translated into the apex extended with
    both sides' constants, have a common bounded model."""
    apex = square.apex
    decls = []
    for name, sort in added_a:
        decls.append((name, NOM if sort == NOM else square.delta_a.map_sort(sort)))
    for name, sort in added_b:
        decls.append((name, NOM if sort == NOM else square.chi_b.map_sort(sort)))
    joined, _ = extend_with_constants(apex, decls)
    ext_a = validate_morphism(cond_a.sig, joined, {
        "sorts": dict(square.delta_a.sort_map),
        "ops": dict(square.delta_a.function_map),
        "rels": dict(square.delta_a.relation_map),
        "nominals": dict(square.delta_a.nominal_map),
        "modalities": dict(square.delta_a.modality_map),
    })
    ext_b = validate_morphism(cond_b.sig, joined, {
        "sorts": dict(square.chi_b.sort_map),
        "ops": dict(square.chi_b.function_map),
        "rels": dict(square.chi_b.relation_map),
        "nominals": dict(square.chi_b.nominal_map),
        "modalities": dict(square.chi_b.modality_map),
    })
    joint = [translate(ext_a, phi) for phi in sorted(cond_a.gamma, key=ser_sentence)]
    joint += [translate(ext_b, phi) for phi in sorted(cond_b.gamma, key=ser_sentence)]
    return oracle.consistent(joined, joint, bounds)


def dual_chain(square, phi_a, phi_b, rounds, bounds, item_depth=1,
               budgets=None, extract_depth=2):
    """Anchored dual chains over the two span targets with the joint
    consistency invariant. Ends in Witnesses when the extracted models'
    base reducts are pointed quasi-isomorphic at the anchors, otherwise
    Inconclusive."""
    budgets = budgets or syntax.EnumBudgets()
    chi, delta = square.chi, square.delta
    taken = (_taken_names(square.apex) | _taken_names(chi.target)
             | _taken_names(delta.target))

    anchor_a = _fresh_named(taken, "a")
    taken.add(anchor_a)
    sig_a, _ = extend_with_constants(chi.target, [(anchor_a, NOM)])
    cond_a = make_condition(sig_a, [Nominal(anchor_a), phi_a], bounds)
    anchor_b = _fresh_named(taken, "b")
    taken.add(anchor_b)
    sig_b, _ = extend_with_constants(delta.target, [(anchor_b, NOM)])
    cond_b = make_condition(sig_b, [Nominal(anchor_b), Not(phi_b)], bounds)
    added_a = [(anchor_a, NOM)]
    added_b = [(anchor_b, NOM)]

    if _joint_consistent(square, cond_a, cond_b, added_a, added_b, bounds) is False:
        raise JointConsistencyLost(0, None, "anchored seeds already jointly inconsistent")

    streams = {"a": _ItemStream(cond_a.sig, item_depth, budgets),
               "b": _ItemStream(cond_b.sig, item_depth, budgets)}
    cursors = {"a": 0, "b": 0}
    steps = []

    def decide(side, r):
        nonlocal cond_a, cond_b
        cond = cond_a if side == "a" else cond_b
        added = added_a if side == "a" else added_b
        prefixes = ("c", "u") if side == "a" else ("d", "o")
        item = streams[side].get(cursors[side])
        cursors[side] += 1
        if item is None:
            return
        k, phi = item
        candidate = at(k, phi)
        negation = at(k, Not(phi))
        if candidate in cond.gamma or negation in cond.gamma:
            steps.append(ChainStep(r, side, k, phi, "skip"))
            return

        def commit(new_cond, new_decls, outcome, cand):
            nonlocal cond_a, cond_b
            added.extend(new_decls)
            if side == "a":
                cond_a = new_cond
            else:
                cond_b = new_cond
            steps.append(ChainStep(r, side, k, phi, outcome))
            joint = _joint_consistent(
                square, cond_a, cond_b, added_a, added_b, bounds)
            if joint is False:
                raise JointConsistencyLost(r, ser_sentence(cand), f"side {side}")

        verdict = oracle.consistent(
            cond.sig, list(cond.gamma) + [candidate], bounds)
        if verdict is True:
            taken_now = _taken_names(cond.sig) | taken
            decls, witnesses = positive_additions(
                cond.sig, k, phi, taken_now, *prefixes)
            taken.update(d[0] for d in decls)
            trial_sig = cond.sig
            if decls:
                trial_sig, _ = extend_with_constants(trial_sig, decls)
            trial = Condition(
                trial_sig, cond.gamma | {candidate} | frozenset(witnesses),
                cond.certificate)
            joint = _joint_consistent(
                square, trial if side == "a" else cond_a,
                trial if side == "b" else cond_b,
                added_a + decls if side == "a" else added_a,
                added_b + decls if side == "b" else added_b, bounds)
            if joint is not False:
                commit(trial, decls, "positive", candidate)
                return
            # positive breaks C1 within bounds: fall through to negative
        trial = Condition(cond.sig, cond.gamma | {negation}, cond.certificate)
        neg_ok = oracle.consistent(trial.sig, list(trial.gamma), bounds)
        if neg_ok is None:
            raise ConsistencyLost(
                f"round {r} side {side}: cannot decide "
                f"{ser_sentence(candidate)} within open bounds")
        if neg_ok is False:
            raise JointConsistencyLost(
                r, ser_sentence(candidate), f"side {side}: both decisions blocked")
        commit(trial, [], "negative", negation)

    for r in range(rounds):
        decide("a", r)
        decide("b", r)

    model_a, _ = basic_model(cond_a.sig, basic_part(cond_a), extract_depth)
    model_b, _ = basic_model(cond_b.sig, basic_part(cond_b), extract_depth)
    inc_a = validate_morphism(chi.target, cond_a.sig, {})
    inc_b = validate_morphism(delta.target, cond_b.sig, {})
    red_a = reduct(compose(chi, inc_a), model_a)
    red_b = reduct(compose(delta, inc_b), model_b)
    world_a = model_a.frame.world_of(anchor_a)
    world_b = model_b.frame.world_of(anchor_b)
    try:
        iso = quasi_isomorphic(red_a, red_b, pointed=(world_a, world_b))
    except EmptyFrame:
        iso = None
    if iso is not None:
        result = Witnesses(model_a, world_a, model_b, world_b, iso)
    else:
        result = Inconclusive("base reducts not quasi-isomorphic at the anchors")
    return InterpolationRun(tuple(steps), result)


def interpolate(square, phi_a, phi_b, depth, rounds, bounds, budgets=None):
    """Search for an interpolant first; fall back to the dual chains."""
    found = interpolant_search(square, phi_a, phi_b, depth, bounds, budgets)
    if found is not None:
        return InterpolationRun((), found)
    return dual_chain(square, phi_a, phi_b, rounds, bounds,
                      budgets=budgets)
