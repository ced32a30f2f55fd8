"""Finite Kripke structures and the operations on them.

A structure interprets the full first-order part at every world; rigid
symbols are interpreted once in a shared rigid core, so the sharing
invariant holds by construction. Carriers are tuples (order preserved, used
for exact structural comparison); elements are arbitrary hashable values.

Evaluation conventions: a term that fails to denote raises EmptyCarrier;
equational and relational atoms over such terms are false (negations true);
exists over an empty carrier is false, forall true. Global satisfaction
means satisfaction at every world and is vacuous on an empty frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import syntax
from .errors import (
    BoundTooSmall,
    CriterionViolation,
    EmptyCarrier,
    EmptyFrame,
    NoRigidTerm,
    ReductMismatch,
    ValidationError,
)
from .sigcat import NOM, check_cip_criterion
from .syntax import (
    Apply, At, Diamond, Eq, Exists, Nominal, Not, Or, Rel, Store,
    ser_sentence, ser_term,
)

SENTINEL = "__out__"


@dataclass(frozen=True)
class Frame:
    worlds: tuple
    nominal: tuple  # sorted (name, world) pairs
    modality: tuple  # sorted ((name, rank), frozenset of world tuples) pairs

    def __post_init__(self):
        object.__setattr__(self, "worlds", tuple(self.worlds))
        object.__setattr__(self, "nominal", tuple(sorted(dict(self.nominal).items())))
        object.__setattr__(self, "modality", tuple(sorted(
            (m, frozenset(tuple(t) for t in ts)) for m, ts in dict(self.modality).items())))

    @property
    def nominal_map(self):
        return dict(self.nominal)

    @property
    def modality_map(self):
        return dict(self.modality)

    def world_of(self, nominal):
        return self.nominal_map[nominal]


@dataclass(frozen=True)
class RigidCore:
    carriers: tuple  # sorted (sort, tuple of elements) pairs
    functions: tuple  # sorted (profile, table pairs) pairs
    relations: tuple  # sorted (profile, frozenset) pairs

    def __post_init__(self):
        object.__setattr__(self, "carriers", tuple(sorted(
            (s, tuple(c)) for s, c in dict(self.carriers).items())))
        object.__setattr__(self, "functions", tuple(sorted(
            (p, tuple(sorted(dict(t).items()))) for p, t in dict(self.functions).items())))
        object.__setattr__(self, "relations", tuple(sorted(
            (p, frozenset(tuple(x) for x in ts)) for p, ts in dict(self.relations).items())))


@dataclass(frozen=True)
class WorldPart:
    carriers: tuple
    functions: tuple
    relations: tuple

    def __post_init__(self):
        object.__setattr__(self, "carriers", tuple(sorted(
            (s, tuple(c)) for s, c in dict(self.carriers).items())))
        object.__setattr__(self, "functions", tuple(sorted(
            (p, tuple(sorted(dict(t).items()))) for p, t in dict(self.functions).items())))
        object.__setattr__(self, "relations", tuple(sorted(
            (p, frozenset(tuple(x) for x in ts)) for p, ts in dict(self.relations).items())))


@dataclass(frozen=True)
class KripkeStructure:
    sig: object
    frame: Frame
    rigid: RigidCore
    worlds: tuple  # sorted (world, WorldPart) pairs
    partial: bool = False

    def __post_init__(self):
        object.__setattr__(self, "worlds", tuple(sorted(dict(self.worlds).items())))

    @property
    def world_parts(self):
        return dict(self.worlds)

    def carrier(self, world, sort):
        if self.sig.is_rigid_sort(sort):
            return dict(self.rigid.carriers)[sort]
        return dict(self.world_parts[world].carriers)[sort]

    def fn_table(self, world, profile):
        if self.sig.is_rigid_function(profile):
            return dict(dict(self.rigid.functions)[profile])
        return dict(dict(self.world_parts[world].functions)[profile])

    def rel_set(self, world, profile):
        if self.sig.is_rigid_relation(profile):
            return dict(self.rigid.relations)[profile]
        return dict(self.world_parts[world].relations)[profile]


@dataclass(frozen=True)
class PointedModel:
    structure: KripkeStructure
    world: object


def make_structure(sig, frame, rigid, worlds, partial=False, validate=True):
    """Assemble and (by default) validate a structure.

    frame: (worlds, {nominal: world}, {(mod, rank): edge set})
    rigid: ({sort: carrier}, {profile: table}, {profile: tuples})
    worlds: {world: ({sort: carrier}, {profile: table}, {profile: tuples})}
    """
    fr = Frame(*frame) if not isinstance(frame, Frame) else frame
    core = RigidCore(*rigid) if not isinstance(rigid, RigidCore) else rigid
    parts = {
        w: (wp if isinstance(wp, WorldPart) else WorldPart(*wp))
        for w, wp in dict(worlds).items()
    }
    structure = KripkeStructure(sig, fr, core, tuple(parts.items()), partial)
    if validate:
        problems = check_structure(structure)
        if problems:
            raise ValidationError(problems)
    return structure


def check_structure(m):
    sig = m.sig
    problems = []
    fr = m.frame
    worlds = set(fr.worlds)
    if not worlds and sig.nominals:
        problems.append("empty world set but the signature has nominals")
    noms = fr.nominal_map
    for k in sorted(sig.nominals):
        if k not in noms:
            problems.append(f"nominal {k} uninterpreted")
        elif noms[k] not in worlds:
            problems.append(f"nominal {k} names unknown world {noms[k]}")
    for k in sorted(set(noms) - set(sig.nominals)):
        problems.append(f"unknown nominal {k} interpreted")
    mods = fr.modality_map
    for mod in sorted(sig.modalities):
        if mod not in mods:
            problems.append(f"modality {mod[0]} uninterpreted")
            continue
        for t in sorted(mods[mod]):
            if len(t) != mod[1] or any(x not in worlds for x in t):
                problems.append(f"modality {mod[0]} tuple {t} out of range")

    rigid_carriers = dict(m.rigid.carriers)
    for s in sorted(sig.rigid.sorts):
        if s not in rigid_carriers:
            problems.append(f"rigid sort {s} has no carrier")
    part_map = m.world_parts
    flex_sorts = sorted(sig.sort_class.flexible)
    for w in fr.worlds:
        if w not in part_map:
            problems.append(f"world {w} has no structure")
            continue
        wc = dict(part_map[w].carriers)
        for s in flex_sorts:
            if s not in wc:
                problems.append(f"sort {s} has no carrier at world {w}")

    def check_fn(profile, table, carrier_of, where):
        name, params, res = profile
        domains = [carrier_of(s) for s in params]
        result = carrier_of(res)
        expect = 1
        for d in domains:
            expect *= len(d)
        if not result and expect:
            if sig.is_rigid_function(profile):
                problems.append(f"rigid op {name} cannot be total{where}: empty result carrier")
            elif any(v != SENTINEL for v in table.values()):
                problems.append(f"op {name}{where} has values but an empty result carrier")
            return
        def product(domains):
            out = [()]
            for d in domains:
                out = [t + (x,) for t in out for x in d]
            return out
        for args in product(domains):
            if args not in table:
                problems.append(f"op {name}{where} missing entry {args}")
            elif table[args] != SENTINEL and table[args] not in result:
                problems.append(f"op {name}{where} value {table[args]!r} outside carrier")
        for args in table:
            if len(args) != len(params):
                problems.append(f"op {name}{where} entry {args} has wrong arity")

    def check_rel(profile, tuples, carrier_of, where):
        name, params = profile
        for t in sorted(tuples, key=repr):
            if len(t) != len(params) or any(
                    x not in carrier_of(s) for x, s in zip(t, params)):
                problems.append(f"rel {name}{where} tuple {t} outside carriers")

    rigid_fns = dict(m.rigid.functions)
    for profile in sorted(sig.rigid.functions):
        if profile not in rigid_fns:
            problems.append(f"rigid op {profile[0]} uninterpreted")
            continue
        check_fn(profile, dict(rigid_fns[profile]),
                 lambda s: rigid_carriers.get(s, ()), "")
    rigid_rels = dict(m.rigid.relations)
    for profile in sorted(sig.rigid.relations):
        if profile not in rigid_rels:
            problems.append(f"rigid rel {profile[0]} uninterpreted")
            continue
        check_rel(profile, rigid_rels[profile], lambda s: rigid_carriers.get(s, ()), "")

    flex_fn_profiles = sorted(sig.full.functions - sig.rigid.functions)
    flex_rel_profiles = sorted(sig.full.relations - sig.rigid.relations)
    for w in fr.worlds:
        if w not in part_map:
            continue
        wc = dict(part_map[w].carriers)

        def carrier_of(s, wc=wc):
            if sig.is_rigid_sort(s):
                return rigid_carriers.get(s, ())
            return wc.get(s, ())

        fns = dict(part_map[w].functions)
        for profile in flex_fn_profiles:
            if profile not in fns:
                problems.append(f"op {profile[0]} uninterpreted at world {w}")
                continue
            check_fn(profile, dict(fns[profile]), carrier_of, f" at world {w}")
        rels = dict(part_map[w].relations)
        for profile in flex_rel_profiles:
            if profile not in rels:
                problems.append(f"rel {profile[0]} uninterpreted at world {w}")
                continue
            check_rel(profile, rels[profile], carrier_of, f" at world {w}")
    return problems


def _world_of_tag(m, tag, venv):
    if venv and tag in venv:
        return venv[tag]
    return m.frame.world_of(tag)


def eval_term(m, world, term, venv=None, senv=None):
    """Evaluate a hybrid term at a world. venv maps bound names to elements
    (rigid variables) or worlds (nominal variables); senv maps bound names
    to their sorts."""
    venv = venv or {}
    senv = senv or {}
    if not term.args and term.tag is None and term.symbol in venv and term.symbol in senv:
        return venv[term.symbol]
    profile, _ = syntax.resolve_term(m.sig, term, senv)
    args = tuple(eval_term(m, world, a, venv, senv) for a in term.args)
    if any(a == SENTINEL for a in args):
        raise BoundTooSmall(f"sentinel reached under {ser_term(term)}")
    if m.sig.is_rigid_function(profile):
        table = m.fn_table(None, profile)
    elif term.tag is not None:
        table = m.fn_table(_world_of_tag(m, term.tag, venv), profile)
    else:
        if world is None:
            raise EmptyCarrier(profile[2])
        table = m.fn_table(world, profile)
    if args not in table:
        raise EmptyCarrier(profile[2], world)
    value = table[args]
    if value == SENTINEL:
        raise BoundTooSmall(f"term {ser_term(term)} beyond the model's universe")
    return value


def satisfies(m, world, phi, venv=None, senv=None):
    venv = dict(venv or {})
    senv = dict(senv or {})

    if isinstance(phi, Nominal):
        return _world_of_tag(m, phi.name, venv) == world
    if isinstance(phi, Eq):
        try:
            return (eval_term(m, world, phi.left, venv, senv)
                    == eval_term(m, world, phi.right, venv, senv))
        except EmptyCarrier:
            return False
    if isinstance(phi, Rel):
        profile = syntax.resolve_relation(m.sig, phi, senv)
        try:
            args = tuple(eval_term(m, world, a, venv, senv) for a in phi.args)
        except EmptyCarrier:
            return False
        if m.sig.is_rigid_relation(profile):
            return args in m.rel_set(None, profile)
        return args in m.rel_set(world, profile)
    if isinstance(phi, Or):
        return any(satisfies(m, world, d, venv, senv) for d in phi.disjuncts)
    if isinstance(phi, Not):
        return not satisfies(m, world, phi.body, venv, senv)
    if isinstance(phi, At):
        return satisfies(m, _world_of_tag(m, phi.nominal, venv), phi.body, venv, senv)
    if isinstance(phi, Diamond):
        edges = m.frame.modality_map[(phi.modality, 2)]
        return any(
            satisfies(m, b, phi.body, venv, senv)
            for (a, b) in sorted(edges, key=repr) if a == world)
    if isinstance(phi, Store):
        venv[phi.var.name] = world
        senv[phi.var.name] = NOM
        return satisfies(m, world, phi.body, venv, senv)
    if isinstance(phi, Exists):
        name, sort = phi.var.name, phi.var.sort
        if sort == NOM:
            domain = m.frame.worlds
        else:
            domain = m.carrier(world, sort)
        senv[name] = sort
        for value in domain:
            venv[name] = value
            if satisfies(m, world, phi.body, venv, senv):
                return True
        return False
    raise ValidationError([f"unknown sentence node {phi!r}"])


def satisfies_set(m, world, phis):
    return all(satisfies(m, world, phi) for phi in phis)


def global_satisfies(m, phi):
    return all(satisfies(m, w, phi) for w in m.frame.worlds)


@dataclass(frozen=True)
class ModelMorphism:
    source: KripkeStructure
    target: KripkeStructure
    frame_map: tuple  # sorted (world, world) pairs
    rigid_maps: tuple  # sorted (sort, map pairs) pairs
    world_maps: tuple  # sorted (world, ((sort, map pairs), ...)) pairs

    def __post_init__(self):
        object.__setattr__(self, "frame_map", tuple(sorted(dict(self.frame_map).items())))
        object.__setattr__(self, "rigid_maps", tuple(sorted(
            (s, tuple(sorted(dict(t).items()))) for s, t in dict(self.rigid_maps).items())))
        object.__setattr__(self, "world_maps", tuple(sorted(
            (w, tuple(sorted((s, tuple(sorted(dict(t).items())))
                             for s, t in dict(maps).items())))
            for w, maps in dict(self.world_maps).items())))

    @property
    def frame(self):
        return dict(self.frame_map)

    def rigid_map(self, sort):
        return dict(dict(dict(self.rigid_maps))[sort])

    def world_map(self, world):
        return {s: dict(t) for s, t in dict(self.world_maps)[world]}

    def map_element(self, world, sort, value):
        if self.source.sig.is_rigid_sort(sort):
            return self.rigid_map(sort)[value]
        return self.world_map(world)[sort][value]


def check_homomorphism(h):
    """Preservation checks only; returns a problem list (empty means it is a
    homomorphism)."""
    m, n = h.source, h.target
    sig = m.sig
    problems = []
    fmap = h.frame
    for w in m.frame.worlds:
        if w not in fmap or fmap[w] not in n.frame.worlds:
            problems.append(f"frame map undefined or out of range at {w}")
    if problems:
        return problems
    for k, w in m.frame.nominal:
        if fmap[w] != n.frame.world_of(k):
            problems.append(f"nominal {k} not preserved")
    for mod, edges in m.frame.modality:
        target_edges = n.frame.modality_map[mod]
        for t in sorted(edges, key=repr):
            if tuple(fmap[x] for x in t) not in target_edges:
                problems.append(f"modality {mod[0]} edge {t} not preserved")

    for s in sorted(sig.rigid.sorts):
        rmap = dict(dict(h.rigid_maps)).get(s)
        if rmap is None:
            problems.append(f"no rigid map for sort {s}")
            continue
        rmap = dict(rmap)
        carrier = m.carrier(None, s)
        target_carrier = n.carrier(None, s)
        for x in carrier:
            if x not in rmap or rmap[x] not in target_carrier:
                problems.append(f"rigid map for {s} undefined or out of range at {x!r}")

    def mapped(world, sort, value):
        return h.map_element(world, sort, value)

    for profile in sorted(sig.rigid.functions):
        name, params, res = profile
        table = m.fn_table(None, profile)
        target_table = n.fn_table(None, profile)
        for args, value in sorted(table.items(), key=repr):
            if value == SENTINEL:
                continue
            image = tuple(mapped(None, s, a) for s, a in zip(params, args))
            if target_table.get(image) != mapped(None, res, value):
                problems.append(f"rigid op {name} not preserved at {args}")
    for profile in sorted(sig.rigid.relations):
        name, params = profile
        for t in sorted(m.rel_set(None, profile), key=repr):
            image = tuple(mapped(None, s, a) for s, a in zip(params, t))
            if image not in n.rel_set(None, profile):
                problems.append(f"rigid rel {name} not preserved at {t}")

    flex_fn = sorted(sig.full.functions - sig.rigid.functions)
    flex_rel = sorted(sig.full.relations - sig.rigid.relations)
    for w in m.frame.worlds:
        v = fmap[w]
        wmaps = dict(h.world_maps)
        if w not in wmaps:
            problems.append(f"no world map at {w}")
            continue
        for s in sorted(sig.sort_class.flexible):
            smap = h.world_map(w).get(s)
            if smap is None:
                problems.append(f"no map for sort {s} at world {w}")
                continue
            target_carrier = n.carrier(v, s)
            for x in m.carrier(w, s):
                if x not in smap or smap[x] not in target_carrier:
                    problems.append(f"map for {s} at {w} undefined or out of range at {x!r}")
        if any(p.startswith("no map") or p.startswith("map for") for p in problems):
            continue
        for profile in flex_fn:
            name, params, res = profile
            table = m.fn_table(w, profile)
            target_table = n.fn_table(v, profile)
            for args, value in sorted(table.items(), key=repr):
                if value == SENTINEL:
                    continue
                image = tuple(mapped(w, s, a) for s, a in zip(params, args))
                if target_table.get(image) != mapped(w, res, value):
                    problems.append(f"op {name} not preserved at {args} (world {w})")
        for profile in flex_rel:
            name, params = profile
            for t in sorted(m.rel_set(w, profile), key=repr):
                image = tuple(mapped(w, s, a) for s, a in zip(params, t))
                if image not in n.rel_set(v, profile):
                    problems.append(f"rel {name} not preserved at {t} (world {w})")
    return problems


def reduct(chi, m):
    """Reduct along a signature morphism; worlds are preserved."""
    src = chi.source
    frame = Frame(
        m.frame.worlds,
        {k: m.frame.world_of(chi.map_nominal(k)) for k in src.nominals},
        {mod: m.frame.modality_map[chi.map_modality(mod)] for mod in src.modalities},
    )
    rigid = RigidCore(
        {s: m.carrier(None, chi.map_sort(s)) for s in src.rigid.sorts},
        {p: m.fn_table(None, chi.map_function(p)) for p in src.rigid.functions},
        {p: m.rel_set(None, chi.map_relation(p)) for p in src.rigid.relations},
    )
    flex_sorts = src.sort_class.flexible
    flex_fns = src.full.functions - src.rigid.functions
    flex_rels = src.full.relations - src.rigid.relations
    worlds = {}
    for w in m.frame.worlds:
        worlds[w] = WorldPart(
            {s: m.carrier(w, chi.map_sort(s)) for s in flex_sorts},
            {p: m.fn_table(w, chi.map_function(p)) for p in flex_fns},
            {p: m.rel_set(w, chi.map_relation(p)) for p in flex_rels},
        )
    return KripkeStructure(src, frame, rigid, tuple(worlds.items()), m.partial)


def _first_difference(a, b):
    """(symbol, world, detail) for the first structural difference between
    two structures over the same signature, or None."""
    if a.frame.worlds != b.frame.worlds:
        return ("worlds", None, f"{a.frame.worlds} vs {b.frame.worlds}")
    for k in sorted(a.frame.nominal_map):
        if a.frame.world_of(k) != b.frame.world_of(k):
            return (k, None, f"{a.frame.world_of(k)} vs {b.frame.world_of(k)}")
    for mod in sorted(a.frame.modality_map):
        if a.frame.modality_map[mod] != b.frame.modality_map[mod]:
            return (mod[0], None, "modality edges differ")
    for s, carrier in a.rigid.carriers:
        if dict(b.rigid.carriers).get(s) != carrier:
            return (s, None, "rigid carrier differs")
    for p, table in a.rigid.functions:
        if dict(b.rigid.functions).get(p) != table:
            return (p[0], None, "rigid op differs")
    for p, ts in a.rigid.relations:
        if dict(b.rigid.relations).get(p) != ts:
            return (p[0], None, "rigid rel differs")
    for w, part in a.worlds:
        other = b.world_parts.get(w)
        if other is None:
            return ("world", w, "missing")
        for s, carrier in part.carriers:
            if dict(other.carriers).get(s) != carrier:
                return (s, w, "carrier differs")
        for p, table in part.functions:
            if dict(other.functions).get(p) != table:
                return (p[0], w, "op differs")
        for p, ts in part.relations:
            if dict(other.relations).get(p) != ts:
                return (p[0], w, "rel differs")
    return None


def amalgamate(square, ma, mb):
    """Unique amalgamation of structures agreeing on the base reduct."""
    ra = reduct(square.chi, ma)
    rb = reduct(square.delta, mb)
    diff = _first_difference(ra, rb)
    if diff is not None:
        raise ReductMismatch(*diff)
    apex = square.apex
    da, cb = square.delta_a, square.chi_b

    def pick(items, mapper, target):
        for x in items:
            if mapper(x) == target:
                return x
        return None

    siga, sigb = da.source, cb.source
    nominal = {}
    for k in sorted(apex.nominals):
        pa = pick(sorted(siga.nominals), da.map_nominal, k)
        if pa is not None:
            nominal[k] = ma.frame.world_of(pa)
        else:
            nominal[k] = mb.frame.world_of(
                pick(sorted(sigb.nominals), cb.map_nominal, k))
    modality = {}
    for mod in sorted(apex.modalities):
        pa = pick(sorted(siga.modalities), da.map_modality, mod)
        if pa is not None:
            modality[mod] = ma.frame.modality_map[pa]
        else:
            modality[mod] = mb.frame.modality_map[
                pick(sorted(sigb.modalities), cb.map_modality, mod)]
    frame = Frame(ma.frame.worlds, nominal, modality)

    def carrier_source(sort):
        pa = pick(sorted(siga.full.sorts), da.map_sort, sort)
        if pa is not None:
            return ("a", pa)
        return ("b", pick(sorted(sigb.full.sorts), cb.map_sort, sort))

    def fn_source(profile):
        pa = pick(sorted(siga.full.functions), da.map_function, profile)
        if pa is not None:
            return ("a", pa)
        return ("b", pick(sorted(sigb.full.functions), cb.map_function, profile))

    def rel_source(profile):
        pa = pick(sorted(siga.full.relations), da.map_relation, profile)
        if pa is not None:
            return ("a", pa)
        return ("b", pick(sorted(sigb.full.relations), cb.map_relation, profile))

    rigid_carriers = {}
    for s in sorted(apex.rigid.sorts):
        side, p = carrier_source(s)
        rigid_carriers[s] = (ma if side == "a" else mb).carrier(None, p)
    rigid_fns = {}
    for profile in sorted(apex.rigid.functions):
        side, p = fn_source(profile)
        rigid_fns[profile] = (ma if side == "a" else mb).fn_table(None, p)
    rigid_rels = {}
    for profile in sorted(apex.rigid.relations):
        side, p = rel_source(profile)
        rigid_rels[profile] = (ma if side == "a" else mb).rel_set(None, p)

    flex_sorts = sorted(apex.sort_class.flexible)
    flex_fns = sorted(apex.full.functions - apex.rigid.functions)
    flex_rels = sorted(apex.full.relations - apex.rigid.relations)
    worlds = {}
    for w in frame.worlds:
        carriers = {}
        for s in flex_sorts:
            side, p = carrier_source(s)
            carriers[s] = (ma if side == "a" else mb).carrier(w, p)
        fns = {}
        for profile in flex_fns:
            side, p = fn_source(profile)
            fns[profile] = (ma if side == "a" else mb).fn_table(w, p)
        rels = {}
        for profile in flex_rels:
            side, p = rel_source(profile)
            rels[profile] = (ma if side == "a" else mb).rel_set(w, p)
        worlds[w] = WorldPart(carriers, fns, rels)

    md = KripkeStructure(apex, frame, RigidCore(rigid_carriers, rigid_fns, rigid_rels),
                         tuple(worlds.items()), ma.partial or mb.partial)
    for leg, m_in, label in ((da, ma, "a"), (cb, mb, "b")):
        diff = _first_difference(reduct(leg, md), m_in)
        if diff is not None:
            raise ReductMismatch(diff[0], diff[1], f"amalgam reduct drifted on side {label}")
    return md


def term_model(sig, depth_bound):
    """Model of @-rigidified ground terms: worlds are the nominals, carriers
    hold serialized rigid-universe terms up to depth_bound, relations are
    empty. Out-of-universe applications map to a sentinel and set the
    partial flag; touching the sentinel raises BoundTooSmall."""
    pairs = syntax.enumerate_terms(sig, depth_bound, rigid_only=True)
    terms = {}
    by_sort = {}
    for term, hsort in pairs:
        key = ser_term(term)
        terms[key] = (term, hsort)
        by_sort.setdefault(hsort, []).append(key)

    nominals = sorted(sig.nominals)
    frame = Frame(tuple(nominals), {k: k for k in nominals},
                  {mod: frozenset() for mod in sig.modalities})
    partial = False

    def table_for(profile, tag):
        nonlocal partial
        name, params, res = profile
        rigid_fn = sig.is_rigid_function(profile)
        domains = []
        for s in params:
            if sig.is_rigid_sort(s):
                domains.append(by_sort.get(s, []))
            else:
                domains.append(by_sort.get(("@", tag, s), []))
        combos = [()]
        for d in domains:
            combos = [c + (x,) for c in combos for x in d]
        table = {}
        for args in combos:
            term = Apply(name, tuple(terms[a][0] for a in args),
                         None if rigid_fn else tag)
            key = ser_term(term)
            if key in terms:
                table[args] = key
            else:
                table[args] = SENTINEL
                partial = True
        return table

    rigid = RigidCore(
        {s: tuple(by_sort.get(s, [])) for s in sorted(sig.rigid.sorts)},
        {p: table_for(p, None) for p in sorted(sig.rigid.functions)},
        {p: frozenset() for p in sorted(sig.rigid.relations)},
    )
    flex_sorts = sorted(sig.sort_class.flexible)
    flex_fns = sorted(sig.full.functions - sig.rigid.functions)
    flex_rels = sorted(sig.full.relations - sig.rigid.relations)
    worlds = {}
    for k in nominals:
        worlds[k] = WorldPart(
            {s: tuple(by_sort.get(("@", k, s), [])) for s in flex_sorts},
            {p: table_for(p, k) for p in flex_fns},
            {p: frozenset() for p in flex_rels},
        )
    model = KripkeStructure(sig, frame, rigid, tuple(worlds.items()), partial)
    object.__setattr__(model, "terms", terms)
    return model


def initial_hom(tm, m):
    """The canonical evaluation homomorphism from a term model into m."""
    frame_map = {k: m.frame.world_of(k) for k in tm.frame.worlds}
    rigid_maps = {}
    for s, carrier in tm.rigid.carriers:
        rigid_maps[s] = {key: eval_term(m, None, tm.terms[key][0]) for key in carrier}
    world_maps = {}
    for k, part in tm.worlds:
        maps = {}
        for s, carrier in part.carriers:
            maps[s] = {key: eval_term(m, frame_map[k], tm.terms[key][0]) for key in carrier}
        world_maps[k] = maps
    return ModelMorphism(tm, m, frame_map, rigid_maps, world_maps)


def generated_submodel(m):
    """Keep every world and every rigid element; shrink flexible carriers to
    the per-world closures under that world's flexible ops (rigid arguments
    range over the whole rigid part)."""
    if not m.frame.worlds:
        raise EmptyFrame("generated submodel of an empty frame")
    sig = m.sig
    flex_fns = sorted(sig.full.functions - sig.rigid.functions)
    worlds = {}
    for w in m.frame.worlds:
        reach = {s: set() for s in sig.sort_class.flexible}
        changed = True
        while changed:
            changed = False
            for profile in flex_fns:
                name, params, res = profile
                if sig.is_rigid_sort(res):
                    continue
                table = m.fn_table(w, profile)
                for args, value in table.items():
                    ok = all(
                        (sig.is_rigid_sort(s) or a in reach[s])
                        for s, a in zip(params, args))
                    if ok and value != SENTINEL and value not in reach[res]:
                        reach[res].add(value)
                        changed = True
        carriers = {s: tuple(x for x in m.carrier(w, s) if x in reach[s])
                    for s in sig.sort_class.flexible}
        fns = {}
        for profile in flex_fns:
            name, params, res = profile
            table = m.fn_table(w, profile)
            kept = {}
            for args, value in table.items():
                if all(sig.is_rigid_sort(s) or a in reach[s]
                       for s, a in zip(params, args)):
                    kept[args] = value
            fns[profile] = kept
        rels = {}
        for profile in sorted(sig.full.relations - sig.rigid.relations):
            name, params = profile
            rels[profile] = frozenset(
                t for t in m.rel_set(w, profile)
                if all(sig.is_rigid_sort(s) or x in reach[s]
                       for s, x in zip(params, t)))
        worlds[w] = WorldPart(carriers, fns, rels)
    return KripkeStructure(sig, m.frame, m.rigid, tuple(worlds.items()), m.partial)


def is_reachable(m):
    """(True, reach) when term evaluation covers all worlds and all rigid
    carriers; otherwise (False, witness) with the first unreached world or
    (sort, element)."""
    sig = m.sig
    named = []
    seen_worlds = set()
    for k, w in m.frame.nominal:
        if w not in seen_worlds:
            seen_worlds.add(w)
            named.append(w)
    for w in m.frame.worlds:
        if w not in seen_worlds:
            return False, ("world", w)

    reach_r = {s: set() for s in sig.rigid.sorts}
    reach_f = {w: {s: set() for s in sig.sort_class.flexible} for w in named}
    changed = True
    while changed:
        changed = False
        for profile in sorted(sig.rigid.functions):
            name, params, res = profile
            table = m.fn_table(None, profile)
            for args, value in table.items():
                if all(a in reach_r[s] for s, a in zip(params, args)):
                    if value not in reach_r[res]:
                        reach_r[res].add(value)
                        changed = True
        for profile in sorted(sig.full.functions - sig.rigid.functions):
            name, params, res = profile
            for w in named:
                table = m.fn_table(w, profile)
                for args, value in table.items():
                    if value == SENTINEL:
                        continue
                    ok = all(
                        (a in reach_r[s] if sig.is_rigid_sort(s) else a in reach_f[w][s])
                        for s, a in zip(params, args))
                    if not ok:
                        continue
                    bucket = reach_r[res] if sig.is_rigid_sort(res) else reach_f[w][res]
                    if value not in bucket:
                        bucket.add(value)
                        changed = True
    for s in sorted(sig.rigid.sorts):
        for x in m.carrier(None, s):
            if x not in reach_r[s]:
                return False, ("element", s, x)
    return True, {"rigid": {s: sorted(v, key=repr) for s, v in reach_r.items()},
                  "flexible": {w: {s: sorted(v, key=repr) for s, v in d.items()}
                               for w, d in reach_f.items()}}


def _world_signature(m, w):
    degrees = []
    for mod, edges in m.frame.modality:
        if mod[1] == 2:
            degrees.append((mod, sum(1 for e in edges if e[0] == w),
                            sum(1 for e in edges if e[1] == w)))
        else:
            degrees.append((mod, sum(1 for e in edges if e[0] == w), 0))
    sizes = tuple(
        (s, len(m.carrier(w, s))) for s in sorted(m.sig.sort_class.flexible))
    return (tuple(degrees), sizes)


def quasi_isomorphic(ma, mb, pointed=None):
    """Search for an isomorphism between the generated submodels; returns a
    ModelMorphism between them (with the pointed constraint world mapped as
    requested) or None. Deterministic: candidates tried in canonical order."""
    if not ma.frame.worlds or not mb.frame.worlds:
        raise EmptyFrame("quasi-isomorphism over an empty frame")
    ga, gb = generated_submodel(ma), generated_submodel(mb)
    sig = ga.sig
    if len(ga.frame.worlds) != len(gb.frame.worlds):
        return None

    fmap = {}
    for k in sorted(sig.nominals):
        w, v = ga.frame.world_of(k), gb.frame.world_of(k)
        if fmap.get(w, v) != v:
            return None
        fmap[w] = v
    if pointed is not None:
        w, v = pointed
        if fmap.get(w, v) != v:
            return None
        fmap[w] = v
    if len(set(fmap.values())) != len(fmap):
        return None

    free_a = [w for w in ga.frame.worlds if w not in fmap]
    sig_b = {w: _world_signature(gb, w) for w in gb.frame.worlds}

    def frame_candidates(partial):
        used = set(partial.values())
        out = []
        for w in free_a:
            if w in partial:
                continue
            want = _world_signature(ga, w)
            out.append((w, [v for v in gb.frame.worlds
                            if v not in used and sig_b[v] == want]))
            break
        return out

    def frame_ok(full):
        for mod, edges in ga.frame.modality:
            mapped = frozenset(tuple(full[x] for x in t) for t in edges)
            if mapped != gb.frame.modality_map[mod]:
                return False
        return True

    def match_elements(full_frame):
        # rigid sorts once, then flexible sorts per world, then verify
        slots = []
        for s in sorted(sig.rigid.sorts):
            slots.append((None, s, list(ga.carrier(None, s)), list(gb.carrier(None, s))))
        for w in ga.frame.worlds:
            v = full_frame[w]
            for s in sorted(sig.sort_class.flexible):
                slots.append((w, s, list(ga.carrier(w, s)), list(gb.carrier(v, s))))
        for _, _, ca, cb in slots:
            if len(ca) != len(cb):
                return None

        assignment = {}

        def verify():
            rigid_maps = {s: assignment[(None, s)] for s in sig.rigid.sorts}
            world_maps = {
                w: {s: assignment[(w, s)] for s in sig.sort_class.flexible}
                for w in ga.frame.worlds}
            h = ModelMorphism(ga, gb, full_frame, rigid_maps, world_maps)
            if check_homomorphism(h):
                return None
            # reflection: relation images must coincide exactly
            for profile in sorted(sig.rigid.relations):
                name, params = profile
                image = {
                    tuple(h.map_element(None, s, x) for s, x in zip(params, t))
                    for t in ga.rel_set(None, profile)}
                if image != set(gb.rel_set(None, profile)):
                    return None
            for w in ga.frame.worlds:
                v = full_frame[w]
                for profile in sorted(sig.full.relations - sig.rigid.relations):
                    name, params = profile
                    image = {
                        tuple(h.map_element(w, s, x) for s, x in zip(params, t))
                        for t in ga.rel_set(w, profile)}
                    if image != set(gb.rel_set(v, profile)):
                        return None
            return h

        def backtrack(i):
            if i == len(slots):
                return verify()
            w, s, ca, cb = slots[i]
            def place(j, mapping, used):
                if j == len(ca):
                    assignment[(w, s)] = dict(mapping)
                    result = backtrack(i + 1)
                    if result is not None:
                        return result
                    del assignment[(w, s)]
                    return None
                for y in cb:
                    if y in used:
                        continue
                    mapping[ca[j]] = y
                    used.add(y)
                    result = place(j + 1, mapping, used)
                    if result is not None:
                        return result
                    del mapping[ca[j]]
                    used.remove(y)
                return None
            return place(0, {}, set())

        return backtrack(0)

    def search_frames(partial):
        if len(partial) == len(ga.frame.worlds):
            if not frame_ok(partial):
                return None
            return match_elements(dict(partial))
        for w, candidates in frame_candidates(partial):
            for v in candidates:
                partial[w] = v
                result = search_frames(partial)
                if result is not None:
                    return result
                del partial[w]
            return None
        return None

    if len(fmap) == len(ga.frame.worlds) and len(set(fmap.values())) != len(gb.frame.worlds):
        return None
    return search_frames(dict(fmap))


def equiv_at_depth(pma, pmb, depth, budgets=None):
    """None when no sentence up to the given operator depth distinguishes
    the two pointed models; otherwise the first distinguishing sentence."""
    budgets = budgets or syntax.EnumBudgets()
    for phi in syntax.enumerate_sentences(pma.structure.sig, depth, budgets):
        try:
            a = satisfies(pma.structure, pma.world, phi)
            b = satisfies(pmb.structure, pmb.world, phi)
        except BoundTooSmall:
            continue
        if a != b:
            return phi
    return None


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        self.add(x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if str(rb) < str(ra):
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True

    def classes(self):
        buckets = {}
        for x in self.parent:
            buckets.setdefault(self.find(x), set()).add(x)
        return buckets


def _canon_at(sig, term, world):
    """Push a world tag onto every untagged flexible application."""
    args = tuple(_canon_at(sig, a, world) for a in term.args)
    tag = term.tag
    if tag is None:
        profile, _ = syntax.resolve_term(
            sig, Apply(term.symbol, term.args, None))
        if not sig.is_rigid_function(profile):
            tag = world
    return Apply(term.symbol, args, tag)


def basic_model(sig, sentences, depth_bound):
    """Quotient of the rigid-universe term model by the congruence a basic
    set generates. Raises BoundTooSmall when a mentioned term falls outside
    the bounded universe. Returns (structure, table) where table maps each
    universe term and nominal to its representative."""
    rigidified = syntax.rigidify_set(sig, sentences)
    pairs = syntax.enumerate_terms(sig, depth_bound, rigid_only=True)
    universe = {}
    for term, hsort in pairs:
        universe[ser_term(term)] = (term, hsort)

    wuf = _UnionFind()
    for k in sig.nominals:
        wuf.add(k)
    euf = _UnionFind()
    for key in universe:
        euf.add(key)

    def intern(term):
        key = ser_term(term)
        if key not in universe:
            raise BoundTooSmall(
                f"term {key} outside the universe at depth {depth_bound}")
        return key

    pending_rels = []
    pending_edges = []
    for phi in sorted(rigidified, key=ser_sentence):
        if isinstance(phi, At):
            k, body = phi.nominal, phi.body
        else:
            k, body = None, phi
        if isinstance(body, Eq):
            left = intern(_canon_at(sig, body.left, k) if k else body.left)
            right = intern(_canon_at(sig, body.right, k) if k else body.right)
            euf.union(left, right)
        elif isinstance(body, Rel):
            profile = syntax.resolve_relation(sig, body)
            args = tuple(
                intern(_canon_at(sig, a, k) if k else a) for a in body.args)
            pending_rels.append((profile, k, args))
        elif isinstance(body, Diamond) and isinstance(body.body, Nominal):
            pending_edges.append((body.modality, k, body.body.name))
        elif isinstance(body, Nominal):
            if k is not None:
                wuf.union(k, body.name)
        else:
            raise ValidationError([f"not a basic sentence: {ser_sentence(phi)}"])

    # congruence closure with world merging
    changed = True
    while changed:
        changed = False
        keys = {}
        for key in sorted(universe):
            term, _ = universe[key]
            tag_class = wuf.find(term.tag) if term.tag is not None else None
            sig_key = (term.symbol, tag_class,
                       tuple(euf.find(ser_term(a)) for a in term.args))
            other = keys.get(sig_key)
            if other is None:
                keys[sig_key] = key
            elif euf.union(other, key):
                changed = True

    world_rep = {k: wuf.find(k) for k in sig.nominals}
    elem_rep = {}
    class_members = euf.classes()
    for root, members in class_members.items():
        rep = min(members)
        for x in members:
            elem_rep[x] = rep

    def hsort_of(key):
        term, hsort = universe[elem_rep[key]]
        if isinstance(hsort, tuple):
            return ("@", world_rep[hsort[1]], hsort[2])
        return hsort

    worlds = sorted(set(world_rep.values()))
    edge_map = {mod: set() for mod in sig.modalities}
    for lam, a, b in pending_edges:
        edge_map[(lam, 2)].add((world_rep[a], world_rep[b]))
    frame = Frame(tuple(worlds), world_rep,
                  {mod: frozenset(v) for mod, v in edge_map.items()})

    by_sort = {}
    for key in sorted(universe):
        if elem_rep[key] != key:
            continue
        by_sort.setdefault(hsort_of(key), []).append(key)

    partial = False

    def table_for(profile, world):
        nonlocal partial
        name, params, res = profile
        rigid_fn = sig.is_rigid_function(profile)
        index = {}
        for key in universe:
            term, _ = universe[key]
            if term.symbol != name or len(term.args) != len(params):
                continue
            if rigid_fn:
                if term.tag is not None:
                    continue
                try:
                    p, _ = syntax.resolve_term(sig, term)
                except Exception:
                    continue
                if p != profile:
                    continue
            else:
                if term.tag is None or world_rep[term.tag] != world:
                    continue
                try:
                    p, _ = syntax.resolve_term(sig, term)
                except Exception:
                    continue
                if p != profile:
                    continue
            index[tuple(elem_rep[ser_term(a)] for a in term.args)] = elem_rep[key]
        domains = []
        for s in params:
            if sig.is_rigid_sort(s):
                domains.append(by_sort.get(s, []))
            else:
                domains.append(by_sort.get(("@", world, s), []))
        combos = [()]
        for d in domains:
            combos = [c + (x,) for c in combos for x in d]
        table = {}
        for args in combos:
            if args in index:
                table[args] = index[args]
            else:
                table[args] = SENTINEL
                partial = True
        return table

    rigid_rel_sets = {p: set() for p in sig.rigid.relations}
    flex_rel_sets = {(p, w): set()
                     for p in (sig.full.relations - sig.rigid.relations)
                     for w in worlds}
    for profile, k, args in pending_rels:
        mapped = tuple(elem_rep[a] for a in args)
        if sig.is_rigid_relation(profile):
            rigid_rel_sets[profile].add(mapped)
        else:
            flex_rel_sets[(profile, world_rep[k])].add(mapped)

    rigid = RigidCore(
        {s: tuple(by_sort.get(s, [])) for s in sorted(sig.rigid.sorts)},
        {p: table_for(p, None) for p in sorted(sig.rigid.functions)},
        {p: frozenset(v) for p, v in rigid_rel_sets.items()},
    )
    flex_sorts = sorted(sig.sort_class.flexible)
    flex_fns = sorted(sig.full.functions - sig.rigid.functions)
    flex_rels = sorted(sig.full.relations - sig.rigid.relations)
    world_parts = {}
    for w in worlds:
        world_parts[w] = WorldPart(
            {s: tuple(by_sort.get(("@", w, s), [])) for s in flex_sorts},
            {p: table_for(p, w) for p in flex_fns},
            {p: frozenset(flex_rel_sets[(p, w)]) for p in flex_rels},
        )
    model = KripkeStructure(sig, frame, rigid, tuple(world_parts.items()), partial)
    table = dict(elem_rep)
    table.update(world_rep)

    if worlds:
        w0 = worlds[0]
        for phi in sorted(rigidified, key=ser_sentence):
            if not satisfies(model, w0, phi):
                raise ValidationError(
                    [f"basic model fails its own presentation: {ser_sentence(phi)}"])
    return model, table


def _ground_term_candidates(sig, sort, max_depth):
    """Plain ground terms of the given sort in (depth, text) order."""
    out = []
    for term, hsort in syntax.enumerate_terms(sig, max_depth, rigid_only=False):
        if hsort == sort and term.tag is None:
            out.append(term)
    return out


def lift_model(chi, m, nprime, h):
    """Lift m along a criterion-passing morphism.

    nprime is a structure over the target signature and h an isomorphism
    from the generated submodel of its source reduct onto the generated
    submodel of m. Returns (mprime, hprime) with reduct(chi, mprime) == m
    and hprime the induced isomorphism of generated submodels extending h.
    """
    report = check_cip_criterion(chi)
    if not report.passed:
        raise CriterionViolation(
            f"morphism fails the interpolation criterion: {report.verdict}")
    src, tgt = chi.source, chi.target
    n = reduct(chi, nprime)
    gn, gm = generated_submodel(n), generated_submodel(m)
    diff = _first_difference(h.source, gn)
    if diff is not None:
        raise ValidationError([f"h source is not the generated reduct: {diff}"])
    diff = _first_difference(h.target, gm)
    if diff is not None:
        raise ValidationError([f"h target is not the generated submodel: {diff}"])
    problems = check_homomorphism(h)
    if problems:
        raise ValidationError(["h is not a homomorphism"] + problems[:3])
    hframe = h.frame
    if len(set(hframe.values())) != len(hframe) or set(hframe.values()) != set(gm.frame.worlds):
        raise ValidationError(["h frame map is not a bijection"])

    sort_image = {chi.map_sort(s): s for s in src.full.sorts}
    fn_image = {}
    for p in sorted(src.full.functions):
        fn_image.setdefault(chi.map_function(p), []).append(p)
    rel_image = {}
    for p in sorted(src.full.relations):
        rel_image.setdefault(chi.map_relation(p), []).append(p)
    nom_image = {}
    for k in sorted(src.nominals):
        nom_image.setdefault(chi.map_nominal(k), []).append(k)
    mod_image = {}
    for mod in sorted(src.modalities):
        mod_image.setdefault(chi.map_modality(mod), []).append(mod)

    inv_frame = {v: w for w, v in hframe.items()}

    # frame: image nominals and modalities copy m; new ones transport
    nominal = {}
    for k in sorted(tgt.nominals):
        pre = nom_image.get(k)
        if pre:
            targets = {m.frame.world_of(p) for p in pre}
            if len(targets) > 1:
                raise CriterionViolation(f"nominal {k} transport conflict")
            nominal[k] = targets.pop()
        else:
            nominal[k] = hframe[nprime.frame.world_of(k)]
    modality = {}
    for mod in sorted(tgt.modalities):
        pre = mod_image.get(mod)
        if pre:
            interp = {m.frame.modality_map[p] for p in pre}
            if len(interp) > 1:
                raise CriterionViolation(f"modality {mod[0]} transport conflict")
            modality[mod] = interp.pop()
        else:
            modality[mod] = frozenset(
                tuple(hframe[x] for x in t)
                for t in nprime.frame.modality_map[mod])
    frame = Frame(m.frame.worlds, nominal, modality)

    # rigid maps for h', total on every rigid target sort
    hprime_rigid = {}
    for s in sorted(tgt.rigid.sorts):
        pre = sort_image.get(s)
        if pre is not None:
            hprime_rigid[s] = h.rigid_map(pre)
        else:
            hprime_rigid[s] = {x: x for x in nprime.carrier(None, s)}

    rigid_carriers = {}
    for s in sorted(tgt.rigid.sorts):
        pre = sort_image.get(s)
        if pre is not None:
            rigid_carriers[s] = m.carrier(None, pre)
        else:
            rigid_carriers[s] = nprime.carrier(None, s)
    rigid_fns = {}
    for profile in sorted(tgt.rigid.functions):
        name, params, res = profile
        table = nprime.fn_table(None, profile)
        rigid_fns[profile] = {
            tuple(hprime_rigid[s][a] for s, a in zip(params, args)):
                hprime_rigid[res][value]
            for args, value in table.items()}
    rigid_rels = {}
    for profile in sorted(tgt.rigid.relations):
        name, params = profile
        rigid_rels[profile] = frozenset(
            tuple(hprime_rigid[s][x] for s, x in zip(params, t))
            for t in nprime.rel_set(None, profile))

    # flexible carriers: image sorts copy m, new sorts transport by identity
    flex_sorts = sorted(s for s in tgt.full.sorts if not tgt.is_rigid_sort(s))
    flex_carriers = {}
    for w in frame.worlds:
        v = inv_frame[w]
        per = {}
        for s in flex_sorts:
            pre = sort_image.get(s)
            if pre is not None:
                per[s] = m.carrier(w, pre)
            else:
                per[s] = nprime.carrier(v, s)
        flex_carriers[w] = per

    # per-world element maps for h', partial on image sorts (the generated
    # part), total on new sorts
    def hmap_at(w, s):
        v = inv_frame[w]
        pre = sort_image.get(s)
        if pre is not None:
            return h.world_map(v).get(pre, {})
        return {x: x for x in nprime.carrier(v, s)}

    def map_value(w, s, x):
        if tgt.is_rigid_sort(s):
            table = hprime_rigid[s]
        else:
            table = hmap_at(w, s)
        if x in table:
            return table[x]
        return None

    flex_fn_profiles = sorted(tgt.full.functions - tgt.rigid.functions)
    flex_rel_profiles = sorted(tgt.full.relations - tgt.rigid.relations)
    unresolved = []
    flex_fns = {w: {} for w in frame.worlds}
    for profile in flex_fn_profiles:
        name, params, res = profile
        pre_list = fn_image.get(profile)
        if pre_list:
            flex_pre = [p for p in pre_list if not src.is_rigid_function(p)]
            first = flex_pre[0]
            for other in flex_pre[1:]:
                for w in frame.worlds:
                    if m.fn_table(w, first) != m.fn_table(w, other):
                        raise CriterionViolation(
                            f"merged ops {first[0]} and {other[0]} disagree at {w}")
            for w in frame.worlds:
                flex_fns[w][profile] = m.fn_table(w, first)
            continue
        for w in frame.worlds:
            v = inv_frame[w]
            source_table = nprime.fn_table(v, profile)
            table = {}
            transported = {}
            for args, value in source_table.items():
                image_args = tuple(
                    map_value(w, s, a) for s, a in zip(params, args))
                if any(a is None for a in image_args):
                    continue
                image_value = map_value(w, res, value)
                if image_value is None:
                    continue
                transported[image_args] = image_value
            domains = []
            for s in params:
                if tgt.is_rigid_sort(s):
                    domains.append(rigid_carriers[s])
                else:
                    domains.append(flex_carriers[w][s])
            combos = [()]
            for d in domains:
                combos = [c + (x,) for c in combos for x in d]
            result_carrier = (rigid_carriers[res] if tgt.is_rigid_sort(res)
                              else flex_carriers[w][res])
            for args in combos:
                if args in transported:
                    table[args] = transported[args]
                elif not result_carrier:
                    pass
                else:
                    unresolved.append((profile, w, args))
            flex_fns[w][profile] = table

    flex_rels = {w: {} for w in frame.worlds}
    for profile in flex_rel_profiles:
        name, params = profile
        pre_list = rel_image.get(profile)
        if pre_list:
            flex_pre = [p for p in pre_list if not src.is_rigid_relation(p)]
            first = flex_pre[0]
            for other in flex_pre[1:]:
                for w in frame.worlds:
                    if m.rel_set(w, first) != m.rel_set(w, other):
                        raise CriterionViolation(
                            f"merged rels {first[0]} and {other[0]} disagree at {w}")
            for w in frame.worlds:
                flex_rels[w][profile] = m.rel_set(w, first)
            continue
        for w in frame.worlds:
            v = inv_frame[w]
            kept = set()
            for t in nprime.rel_set(v, profile):
                image = tuple(map_value(w, s, x) for s, x in zip(params, t))
                if all(x is not None for x in image):
                    kept.add(image)
            flex_rels[w][profile] = frozenset(kept)

    def build(fns):
        worlds = {}
        for w in frame.worlds:
            worlds[w] = WorldPart(flex_carriers[w], fns[w], flex_rels[w])
        return KripkeStructure(
            tgt, frame, RigidCore(rigid_carriers, rigid_fns, rigid_rels),
            tuple(worlds.items()), m.partial or nprime.partial)

    # fill untransported entries with denotations of least ground terms,
    # in staged passes so earlier fills feed later ones
    max_depth = len(tgt.full.sorts) + 1
    candidates = {}
    while unresolved:
        provisional = build(flex_fns)
        progressed = False
        still = []
        for profile, w, args in unresolved:
            res = profile[2]
            if res not in candidates:
                candidates[res] = _ground_term_candidates(tgt, res, max_depth)
            filled = False
            for term in candidates[res]:
                try:
                    value = eval_term(provisional, w, term)
                except (EmptyCarrier, KeyError, BoundTooSmall):
                    continue
                flex_fns[w][profile][args] = value
                filled = True
                progressed = True
                break
            if not filled:
                still.append((profile, w, args))
        unresolved = still
        if unresolved and not progressed:
            raise NoRigidTerm(min(p[2] for p, _, _ in unresolved))

    mprime = build(flex_fns)
    problems = check_structure(mprime)
    if problems:
        raise ValidationError(problems)
    diff = _first_difference(reduct(chi, mprime), m)
    if diff is not None:
        raise ValidationError([f"lift reduct drifted: {diff}"])

    gnp = generated_submodel(nprime)
    gmp = generated_submodel(mprime)
    hp_rigid = {s: dict(hprime_rigid[s]) for s in tgt.rigid.sorts}
    hp_world = {}
    for v in gnp.frame.worlds:
        w = hframe[v]
        per = {}
        for s in flex_sorts:
            table = {}
            for x in gnp.carrier(v, s):
                y = map_value(w, s, x)
                if y is None:
                    raise ValidationError(
                        [f"generated element {x!r} of {s} at {v} has no image"])
                table[x] = y
            per[s] = table
        hp_world[v] = per
    hprime = ModelMorphism(gnp, gmp, hframe, hp_rigid, hp_world)
    problems = check_homomorphism(hprime)
    if problems:
        raise ValidationError(["lifted morphism is not a homomorphism"] + problems[:3])
    return mprime, hprime
