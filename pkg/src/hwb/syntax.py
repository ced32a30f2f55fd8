"""Hybrid terms and sentences over a hybrid signature.

Terms are Apply nodes (symbol, args, optional world tag). A tagged
application f@k(..) evaluates f at the world named k; rigid applications
never carry tags. Hybrid sorts are plain sort names or ("@", k, s) for a
flexible s seen from world k; tagged rigid results collapse to the plain
sort.

Sentences: Nominal, Eq, Rel, Or, Not, At, Diamond, Store, Exists. Or is
deduped and canonically ordered, Eq's arguments are canonically ordered,
nested At collapses (via the at() helper). Binders carry Variable records
(name, sort, owning-signature fingerprint).
"""

from __future__ import annotations

from dataclasses import dataclass
from .errors import FlexibleQuantificationError, IllFormedSentence, IllFormedTerm
from .sigcat import NOM


@dataclass(frozen=True)
class Variable:
    name: str
    sort: str
    owner: str  # fingerprint of the signature the variable was formed over


@dataclass(frozen=True)
class Apply:
    symbol: str
    args: tuple = ()
    tag: str = None

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


def var_term(name):
    return Apply(name, ())


def ser_term(t):
    head = t.symbol if t.tag is None else f"{t.symbol}@{t.tag}"
    if not t.args:
        return head
    return f"{head}({', '.join(ser_term(a) for a in t.args)})"


def ser_sort(hsort):
    if isinstance(hsort, tuple):
        return f"{hsort[2]}@{hsort[1]}"
    return hsort


def collapse_sort(sig, hsort):
    if isinstance(hsort, tuple) and sig.is_rigid_sort(hsort[2]):
        return hsort[2]
    return hsort


class Sentence:
    pass


@dataclass(frozen=True)
class Nominal(Sentence):
    name: str


@dataclass(frozen=True)
class Eq(Sentence):
    left: Apply
    right: Apply

    def __post_init__(self):
        if ser_term(self.right) < ser_term(self.left):
            left, right = self.right, self.left
            object.__setattr__(self, "left", left)
            object.__setattr__(self, "right", right)


@dataclass(frozen=True)
class Rel(Sentence):
    symbol: str
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Or(Sentence):
    disjuncts: tuple

    def __post_init__(self):
        uniq = {ser_sentence(d): d for d in self.disjuncts}
        object.__setattr__(self, "disjuncts", tuple(uniq[k] for k in sorted(uniq)))


@dataclass(frozen=True)
class Not(Sentence):
    body: Sentence


@dataclass(frozen=True)
class At(Sentence):
    nominal: str
    body: Sentence


@dataclass(frozen=True)
class Diamond(Sentence):
    modality: str
    body: Sentence


@dataclass(frozen=True)
class Store(Sentence):
    var: Variable
    body: Sentence


@dataclass(frozen=True)
class Exists(Sentence):
    var: Variable
    body: Sentence


def at(nominal, body):
    """@k phi with the nested-At collapse @k @l phi = @l phi."""
    if isinstance(body, At):
        return body
    return At(nominal, body)


def make_or(disjuncts):
    return Or(tuple(disjuncts))


def bottom():
    return Or(())


def top():
    return Not(Or(()))


def conj(phis):
    return Not(Or(tuple(Not(p) for p in phis)))


def box(modality, body):
    return Not(Diamond(modality, Not(body)))


def forall(var, body):
    return Not(Exists(var, Not(body)))


def ser_sentence(phi):
    if isinstance(phi, Nominal):
        return phi.name
    if isinstance(phi, Eq):
        return f"{ser_term(phi.left)} = {ser_term(phi.right)}"
    if isinstance(phi, Rel):
        return f"{phi.symbol}({', '.join(ser_term(a) for a in phi.args)})"
    if isinstance(phi, Or):
        if not phi.disjuncts:
            return "false"
        return "or { " + "; ".join(ser_sentence(d) for d in phi.disjuncts) + " }"
    if isinstance(phi, Not):
        return f"not ({ser_sentence(phi.body)})"
    if isinstance(phi, At):
        return f"@{phi.nominal} ({ser_sentence(phi.body)})"
    if isinstance(phi, Diamond):
        return f"<{phi.modality}> ({ser_sentence(phi.body)})"
    if isinstance(phi, Store):
        return f"store {phi.var.name} . ({ser_sentence(phi.body)})"
    if isinstance(phi, Exists):
        return f"exists {phi.var.name}:{phi.var.sort} . ({ser_sentence(phi.body)})"
    raise IllFormedSentence(f"unknown node {phi!r}")


def sent_depth(phi):
    """Operator depth. Atoms are Nominal, Eq, Rel, Diamond over a bare
    nominal, and the false literal."""
    if isinstance(phi, (Nominal, Eq, Rel)):
        return 0
    if isinstance(phi, Diamond) and isinstance(phi.body, Nominal):
        return 0
    if isinstance(phi, Or):
        if not phi.disjuncts:
            return 0
        return 1 + max(sent_depth(d) for d in phi.disjuncts)
    if isinstance(phi, (Not, At, Diamond)):
        return 1 + sent_depth(phi.body)
    if isinstance(phi, (Store, Exists)):
        return 1 + sent_depth(phi.body)
    raise IllFormedSentence(f"unknown node {phi!r}")


def resolve_term(sig, term, extra=None):
    """Resolve a term to (profile or None, hybrid sort).

    extra maps bound names to their sorts (NOM for nominal variables). A
    None profile means the leaf is a bound variable occurrence.
    """
    extra = extra or {}
    if not isinstance(term, Apply):
        raise IllFormedTerm(f"not a term: {term!r}")
    nominal_names = set(sig.nominals) | {n for n, s in extra.items() if s == NOM}
    if term.tag is not None and term.tag not in nominal_names:
        raise IllFormedTerm(f"unknown world tag {term.tag} in {ser_term(term)}")

    if not term.args and term.symbol in extra:
        sort = extra[term.symbol]
        if sort == NOM:
            raise IllFormedTerm(f"nominal variable {term.symbol} used as a term")
        if term.tag is not None:
            raise IllFormedTerm(f"tag on rigid variable {term.symbol}")
        return None, sort

    arg_res = [resolve_term(sig, a, extra) for a in term.args]
    arg_sorts = [hs for _, hs in arg_res]

    def fits(profile):
        name, params, _res = profile
        if len(params) != len(arg_sorts):
            return False
        rigid_symbol = sig.is_rigid_function(profile)
        for want, have in zip(params, arg_sorts):
            if sig.is_rigid_sort(want):
                if have != want:
                    return False
            elif term.tag is None or rigid_symbol:
                if have != want:
                    return False
            else:
                if have != ("@", term.tag, want):
                    return False
        return True

    matches = [p for p in sig.functions_named(term.symbol) if fits(p)]
    if not matches:
        raise IllFormedTerm(
            f"no op matches {ser_term(term)} (arg sorts {[ser_sort(s) for s in arg_sorts]})")
    if len(matches) > 1:
        raise IllFormedTerm(f"ambiguous term {ser_term(term)}: {matches}")
    profile = matches[0]
    if sig.is_rigid_function(profile):
        if term.tag is not None:
            raise IllFormedTerm(f"tag on rigid op {term.symbol}")
        return profile, profile[2]
    res = profile[2]
    if sig.is_rigid_sort(res) or term.tag is None:
        return profile, res
    return profile, ("@", term.tag, res)


def sort_of(sig, term, extra=None):
    return resolve_term(sig, term, extra)[1]


def resolve_relation(sig, phi, extra=None):
    """Resolve a Rel atom to its relation profile."""
    extra = extra or {}
    arg_sorts = [sort_of(sig, a, extra) for a in phi.args]

    def fits(profile):
        name, params = profile
        if len(params) != len(arg_sorts):
            return False
        return all(have == want for want, have in zip(params, arg_sorts))

    matches = [p for p in sig.relations_named(phi.symbol) if fits(p)]
    if not matches:
        raise IllFormedSentence(
            f"no rel matches {ser_sentence(phi)} (arg sorts {[ser_sort(s) for s in arg_sorts]})")
    if len(matches) > 1:
        raise IllFormedSentence(f"ambiguous atom {ser_sentence(phi)}")
    return matches[0]


def validate_sentence(sig, phi, extra=None):
    """Check well-formedness over sig; extra carries outer bindings."""
    extra = dict(extra or {})
    nominal_names = set(sig.nominals) | {n for n, s in extra.items() if s == NOM}
    if isinstance(phi, Nominal):
        if phi.name not in nominal_names:
            raise IllFormedSentence(f"unknown nominal {phi.name}")
        return
    if isinstance(phi, Eq):
        ls = collapse_sort(sig, sort_of(sig, phi.left, extra))
        rs = collapse_sort(sig, sort_of(sig, phi.right, extra))
        if ls != rs:
            raise IllFormedSentence(
                f"equation sorts differ: {ser_sort(ls)} vs {ser_sort(rs)}")
        return
    if isinstance(phi, Rel):
        resolve_relation(sig, phi, extra)
        return
    if isinstance(phi, Or):
        for d in phi.disjuncts:
            validate_sentence(sig, d, extra)
        return
    if isinstance(phi, Not):
        validate_sentence(sig, phi.body, extra)
        return
    if isinstance(phi, At):
        if phi.nominal not in nominal_names:
            raise IllFormedSentence(f"unknown nominal {phi.nominal}")
        validate_sentence(sig, phi.body, extra)
        return
    if isinstance(phi, Diamond):
        if phi.modality not in sig.binary_modalities():
            raise IllFormedSentence(
                f"no binary modality {phi.modality} (unary modalities have no sentence former)")
        validate_sentence(sig, phi.body, extra)
        return
    if isinstance(phi, Store):
        if phi.var.sort != NOM:
            raise IllFormedSentence(f"store variable {phi.var.name} must have sort {NOM}")
        extra[phi.var.name] = NOM
        validate_sentence(sig, phi.body, extra)
        return
    if isinstance(phi, Exists):
        sort = phi.var.sort
        if sort != NOM:
            if sort not in sig.full.sorts:
                raise IllFormedSentence(f"unknown sort {sort}")
            if not sig.is_rigid_sort(sort):
                raise FlexibleQuantificationError(
                    f"quantified variable {phi.var.name} at flexible sort {sort}")
        extra[phi.var.name] = sort
        validate_sentence(sig, phi.body, extra)
        return
    raise IllFormedSentence(f"unknown node {phi!r}")


def _fresh_name(taken, start=0):
    i = start
    while f"v{i}" in taken:
        i += 1
    return f"v{i}"


def _target_names(sig):
    names = set(sig.nominals)
    names.update(f[0] for f in sig.full.functions if not f[1])
    return names


def translate(chi, phi):
    """Apply a signature morphism to a sentence. Bound variables keep their
    names unless the name clashes in the target; a clash renames to the
    least-index fresh v_i."""

    tgt = chi.target
    base_taken = _target_names(tgt)

    def tr_term(t, bound, src_extra):
        if not t.args and t.symbol in bound:
            return Apply(bound[t.symbol], ())
        profile, _ = resolve_term(chi.source, t, src_extra)
        name = chi.map_function(profile)[0]
        tag = None
        if t.tag is not None:
            tag = bound.get(t.tag, None)
            if tag is None:
                tag = chi.map_nominal(t.tag)
        return Apply(name, tuple(tr_term(a, bound, src_extra) for a in t.args), tag)

    def tr_nom(name, bound):
        return bound.get(name, None) or chi.map_nominal(name)

    def tr(phi, bound, taken, src_extra):
        if isinstance(phi, Nominal):
            return Nominal(tr_nom(phi.name, bound))
        if isinstance(phi, Eq):
            return Eq(tr_term(phi.left, bound, src_extra), tr_term(phi.right, bound, src_extra))
        if isinstance(phi, Rel):
            profile = resolve_relation(chi.source, phi, src_extra)
            name = chi.map_relation(profile)[0]
            return Rel(name, tuple(tr_term(a, bound, src_extra) for a in phi.args))
        if isinstance(phi, Or):
            return make_or(tr(d, bound, taken, src_extra) for d in phi.disjuncts)
        if isinstance(phi, Not):
            return Not(tr(phi.body, bound, taken, src_extra))
        if isinstance(phi, At):
            return at(tr_nom(phi.nominal, bound), tr(phi.body, bound, taken, src_extra))
        if isinstance(phi, Diamond):
            name = chi.map_modality((phi.modality, 2))[0]
            return Diamond(name, tr(phi.body, bound, taken, src_extra))
        if isinstance(phi, (Store, Exists)):
            var = phi.var
            new_sort = NOM if var.sort == NOM else chi.map_sort(var.sort)
            new_name = var.name
            if new_name in taken:
                new_name = _fresh_name(taken)
            new_var = Variable(new_name, new_sort, tgt.fingerprint)
            bound2 = dict(bound)
            bound2[var.name] = new_name
            taken2 = taken | {new_name}
            extra2 = dict(src_extra)
            extra2[var.name] = var.sort
            body = tr(phi.body, bound2, taken2, extra2)
            return type(phi)(new_var, body)
        raise IllFormedSentence(f"unknown node {phi!r}")

    return tr(phi, {}, set(base_taken), {})


def apply_substitution(sig, theta, phi):
    """Substitute constants: theta maps names to ground terms (rigid sorts)
    or to nominal names (strings). Binder shadowing is respected; a capture
    (a binder whose name occurs in a substituted value) raises."""

    def value_leaf_names(v):
        if isinstance(v, str):
            return {v}
        names = set()
        stack = [v]
        while stack:
            t = stack.pop()
            if not t.args:
                names.add(t.symbol)
            if t.tag is not None:
                names.add(t.tag)
            stack.extend(t.args)
        return names

    def sub_term(t, theta):
        if not t.args and t.tag is None and t.symbol in theta:
            value = theta[t.symbol]
            if isinstance(value, str):
                raise IllFormedTerm(
                    f"nominal substituted into term position: {t.symbol}")
            return value
        tag = t.tag
        if tag is not None and tag in theta:
            value = theta[tag]
            if not isinstance(value, str):
                raise IllFormedTerm(f"term substituted for world tag {tag}")
            tag = value
        return Apply(t.symbol, tuple(sub_term(a, theta) for a in t.args), tag)

    def sub_nom(name, theta):
        if name in theta:
            value = theta[name]
            if not isinstance(value, str):
                raise IllFormedSentence(f"term substituted for nominal {name}")
            return value
        return name

    def sub(phi, theta):
        if not theta:
            return phi
        if isinstance(phi, Nominal):
            return Nominal(sub_nom(phi.name, theta))
        if isinstance(phi, Eq):
            return Eq(sub_term(phi.left, theta), sub_term(phi.right, theta))
        if isinstance(phi, Rel):
            return Rel(phi.symbol, tuple(sub_term(a, theta) for a in phi.args))
        if isinstance(phi, Or):
            return make_or(sub(d, theta) for d in phi.disjuncts)
        if isinstance(phi, Not):
            return Not(sub(phi.body, theta))
        if isinstance(phi, At):
            return at(sub_nom(phi.nominal, theta), sub(phi.body, theta))
        if isinstance(phi, Diamond):
            return Diamond(phi.modality, sub(phi.body, theta))
        if isinstance(phi, (Store, Exists)):
            inner = {k: v for k, v in theta.items() if k != phi.var.name}
            for v in inner.values():
                if phi.var.name in value_leaf_names(v):
                    raise IllFormedSentence(
                        f"capture: binder {phi.var.name} occurs in a substituted value")
            return type(phi)(phi.var, sub(phi.body, inner))
        raise IllFormedSentence(f"unknown node {phi!r}")

    return sub(phi, dict(theta))


def rigidify(sig, phi):
    """The @-closure of one sentence: {@k phi | k nominal}, or {phi} when phi
    is already @-topped. No nominals means an empty set."""
    if isinstance(phi, At):
        return frozenset([phi])
    return frozenset(at(k, phi) for k in sorted(sig.nominals))


def rigidify_set(sig, phis):
    out = set()
    for phi in phis:
        out |= rigidify(sig, phi)
    return frozenset(out)


def classify_sentence(phi):
    """Sen0 (hybrid equations, hybrid relations, diamond over a bare
    nominal), SenB (Sen0 or @k over Sen0), or Full."""
    def sen0(p):
        if isinstance(p, (Eq, Rel)):
            return True
        return isinstance(p, Diamond) and isinstance(p.body, Nominal)

    if sen0(phi):
        return "Sen0"
    if isinstance(phi, At) and sen0(phi.body):
        return "SenB"
    return "Full"


def is_basic(phi):
    return classify_sentence(phi) in ("Sen0", "SenB")


def until(sig, phi, psi):
    """Until via store: requires the signature to have exactly one binary
    modality."""
    mods = sig.binary_modalities()
    if len(mods) != 1:
        raise IllFormedSentence(
            f"until needs exactly one binary modality, found {mods}")
    lam = mods[0]
    taken = _target_names(sig)
    x_name = _fresh_name(taken)
    y_name = _fresh_name(taken | {x_name})
    x = Variable(x_name, NOM, sig.fingerprint)
    y = Variable(y_name, NOM, sig.fingerprint)
    guard = make_or([Not(Diamond(lam, Nominal(y_name))), psi])
    inner = conj([phi, at(x_name, box(lam, guard))])
    return Store(x, Diamond(lam, Store(y, inner)))


def derived(op, args, sig=None):
    """Dispatcher for the derived formers."""
    if op == "true":
        return top()
    if op == "false":
        return bottom()
    if op == "and":
        return conj(args)
    if op == "or":
        return make_or(args)
    if op == "box":
        return box(args[0], args[1])
    if op == "forall":
        return forall(args[0], args[1])
    if op == "until":
        return until(sig, args[0], args[1])
    raise IllFormedSentence(f"unknown derived op {op}")


@dataclass(frozen=True)
class EnumBudgets:
    term_depth: int = 1
    or_fanout: int = 2
    max_quantifiers: int = 1
    limit: int = None


def enumerate_terms(sig, depth, rigid_only=False):
    """Ground hybrid terms up to the given application depth, as
    (term, hybrid sort) pairs, deterministic order. Constants count as depth
    0. rigid_only restricts to the rigid universe: flexible applications must
    be tagged."""
    nominals = sorted(sig.nominals)
    levels = []
    seen = set()

    def add(level, term, hsort):
        key = ser_term(term)
        if key not in seen:
            seen.add(key)
            level.append((term, hsort))

    level0 = []
    for profile in sorted(sig.full.functions):
        name, params, res = profile
        if params:
            continue
        if sig.is_rigid_function(profile):
            add(level0, Apply(name, ()), res)
        else:
            if not rigid_only:
                add(level0, Apply(name, ()), res)
            for k in nominals:
                hsort = res if sig.is_rigid_sort(res) else ("@", k, res)
                add(level0, Apply(name, (), k), hsort)
    level0.sort(key=lambda pair: (ser_term(pair[0])))
    levels.append(level0)

    for d in range(1, depth + 1):
        pool = [pair for level in levels for pair in level]
        by_sort = {}
        for term, hsort in pool:
            by_sort.setdefault(hsort, []).append(term)
        level = []

        def args_for(params, tag):
            # cartesian product of candidate args matching the profile
            choices = []
            for want in params:
                if sig.is_rigid_sort(want):
                    cands = by_sort.get(want, [])
                elif tag is None:
                    cands = by_sort.get(want, [])
                else:
                    cands = by_sort.get(("@", tag, want), [])
                if not cands:
                    return
                choices.append(cands)
            idx = [0] * len(choices)
            while True:
                yield tuple(choices[i][idx[i]] for i in range(len(choices)))
                pos = len(choices) - 1
                while pos >= 0:
                    idx[pos] += 1
                    if idx[pos] < len(choices[pos]):
                        break
                    idx[pos] = 0
                    pos -= 1
                if pos < 0:
                    return

        for profile in sorted(sig.full.functions):
            name, params, res = profile
            if not params:
                continue
            if sig.is_rigid_function(profile):
                tags = [None]
            elif rigid_only:
                tags = list(nominals)
            else:
                tags = [None] + nominals
            for tag in tags:
                for args in args_for(params, tag):
                    term = Apply(name, args, tag)
                    if sig.is_rigid_function(profile) or sig.is_rigid_sort(res):
                        hsort = res
                    elif tag is None:
                        hsort = res
                    else:
                        hsort = ("@", tag, res)
                    add(level, term, hsort)
        level.sort(key=lambda pair: ser_term(pair[0]))
        levels.append(level)

    return [pair for level in levels for pair in level]


def rigid_ground_terms(sig, sort, depth):
    """Rigid-universe ground terms of one plain rigid sort, least first."""
    return [t for t, hs in enumerate_terms(sig, depth, rigid_only=True) if hs == sort]


def _kind_rank(phi):
    if isinstance(phi, Nominal):
        return 0
    if isinstance(phi, Diamond) and isinstance(phi.body, Nominal):
        return 1
    if isinstance(phi, Eq):
        return 2
    if isinstance(phi, Rel):
        return 3
    return 4


def _count_binders(phi):
    if isinstance(phi, (Store, Exists)):
        return 1 + _count_binders(phi.body)
    if isinstance(phi, Or):
        return max((_count_binders(d) for d in phi.disjuncts), default=0)
    if isinstance(phi, (Not, At, Diamond)):
        return _count_binders(phi.body)
    return 0


def enumerate_sentences(sig, depth, budgets=EnumBudgets()):
    """Deterministic, duplicate-free sentence stream with at most `depth`
    operator nodes. Level by level, so the depth-d stream is a prefix of the
    depth-(d+1) stream."""
    nominals = sorted(sig.nominals)
    mods = sig.binary_modalities()
    terms = enumerate_terms(sig, budgets.term_depth)
    emitted = 0
    seen = set()

    def emit(level, phi):
        nonlocal emitted
        key = ser_sentence(phi)
        if key in seen:
            return None
        seen.add(key)
        level.append(phi)
        return phi

    atoms = []
    for k in nominals:
        emit(atoms, Nominal(k))
    for lam in mods:
        for k in nominals:
            emit(atoms, Diamond(lam, Nominal(k)))
    by_sort = {}
    for term, hsort in terms:
        by_sort.setdefault(collapse_sort(sig, hsort), []).append(term)
    eqs = []
    for hsort in sorted(by_sort, key=ser_sort):
        pool = by_sort[hsort]
        for i, t1 in enumerate(pool):
            for t2 in pool[i:]:
                eqs.append(Eq(t1, t2))
    for e in sorted(eqs, key=ser_sentence):
        emit(atoms, e)
    rel_atoms = []
    for profile in sorted(sig.full.relations):
        name, params = profile
        choices = []
        ok = True
        for want in params:
            cands = by_sort.get(want, ())
            if not cands:
                ok = False
                break
            choices.append(list(cands))
        if not ok:
            continue
        idx = [0] * len(choices)
        while True:
            args = tuple(choices[i][idx[i]] for i in range(len(choices)))
            try:
                atom = Rel(name, args)
                resolve_relation(sig, atom)
                rel_atoms.append(atom)
            except Exception:
                pass
            pos = len(choices) - 1
            while pos >= 0:
                idx[pos] += 1
                if idx[pos] < len(choices[pos]):
                    break
                idx[pos] = 0
                pos -= 1
            if pos < 0:
                break
    for a in sorted(rel_atoms, key=ser_sentence):
        emit(atoms, a)

    atoms.sort(key=lambda p: (_kind_rank(p), ser_sentence(p)))
    levels = [atoms]
    for phi in atoms:
        yield phi
        emitted += 1
        if budgets.limit is not None and emitted >= budgets.limit:
            return

    taken = _target_names(sig)
    bind_name = _fresh_name(taken)
    extended = sig.sort_class.extended

    for d in range(1, depth + 1):
        pool = [phi for level in levels for phi in level]
        level = []
        candidates = []
        for phi in pool:
            candidates.append(Not(phi))
        for k in nominals:
            for phi in pool:
                if not isinstance(phi, At):
                    candidates.append(at(k, phi))
        for lam in mods:
            for phi in pool:
                candidates.append(Diamond(lam, phi))
        if budgets.or_fanout >= 2:
            for i, p1 in enumerate(pool):
                for p2 in pool[i + 1:]:
                    candidates.append(make_or([p1, p2]))
        for phi in pool:
            if _count_binders(phi) < budgets.max_quantifiers:
                var = Variable(bind_name, NOM, sig.fingerprint)
                candidates.append(Store(var, phi))
                for sort in sorted(extended):
                    candidates.append(Exists(Variable(bind_name, sort, sig.fingerprint), phi))
        kept = []
        for phi in candidates:
            if emit(level, phi) is not None:
                kept.append(phi)
        kept.sort(key=ser_sentence)
        levels.append(kept)
        for phi in kept:
            yield phi
            emitted += 1
            if budgets.limit is not None and emitted >= budgets.limit:
                return


@dataclass(frozen=True)
class Presentation:
    signature: object
    sentences: frozenset

    def __post_init__(self):
        object.__setattr__(self, "sentences", frozenset(self.sentences))
