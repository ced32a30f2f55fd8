"""Signatures, morphisms, pushouts, and the interpolation criterion.

A hybrid signature has a nominal part (nominals, unary/binary modalities over
the one world sort "nom") and a first-order part split into a rigid
subsignature and the full signature. Rigidity is marked per symbol: an op or
relation is flexible unless it is listed rigid, even when its profile lies on
rigid sorts. Rigid profiles may only use rigid sorts.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from functools import cached_property

from .errors import (
    ClashError,
    CompositionError,
    FlexibleQuantificationError,
    MorphismError,
    ValidationError,
)

NOM = "nom"

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")


def valid_name(name):
    return isinstance(name, str) and bool(_NAME_RE.match(name)) and name != NOM


@dataclass(frozen=True)
class FolSignature:
    """Many-sorted first-order signature.

    functions: frozenset of (name, argsorts, result); relations: frozenset of
    (name, argsorts). Overloading by distinct profile is permitted.
    """

    sorts: frozenset
    functions: frozenset
    relations: frozenset

    def constants(self, sort=None):
        out = [f for f in self.functions if not f[1]]
        if sort is not None:
            out = [f for f in out if f[2] == sort]
        return sorted(out)


EMPTY_FOL = FolSignature(frozenset(), frozenset(), frozenset())


@dataclass(frozen=True)
class SortClass:
    rigid: frozenset
    flexible: frozenset
    extended: frozenset  # rigid sorts plus the world sort


@dataclass(frozen=True)
class HybridSignature:
    nominals: frozenset
    modalities: frozenset  # (name, rank) with rank 1 or 2
    rigid: FolSignature
    full: FolSignature

    @property
    def sorts(self):
        return self.full.sorts

    @cached_property
    def sort_class(self):
        rigid = self.rigid.sorts
        return SortClass(
            rigid=rigid,
            flexible=self.full.sorts - rigid,
            extended=rigid | {NOM},
        )

    def is_rigid_sort(self, sort):
        return sort in self.rigid.sorts

    def is_rigid_function(self, profile):
        return profile in self.rigid.functions

    def is_rigid_relation(self, profile):
        return profile in self.rigid.relations

    def binary_modalities(self):
        return sorted(name for name, rank in self.modalities if rank == 2)

    def functions_named(self, name):
        return sorted(f for f in self.full.functions if f[0] == name)

    def relations_named(self, name):
        return sorted(r for r in self.full.relations if r[0] == name)

    @cached_property
    def canonical_text(self):
        lines = []
        lines.append("nominals " + " ".join(sorted(self.nominals)))
        lines.append(
            "modalities "
            + " ".join(f"{n}:{r}" for n, r in sorted(self.modalities))
        )
        lines.append("rigid sorts " + " ".join(sorted(self.rigid.sorts)))
        lines.append("sorts " + " ".join(sorted(self.full.sorts - self.rigid.sorts)))
        for tag, fns in (("rigid ops", self.rigid.functions),
                         ("ops", self.full.functions - self.rigid.functions)):
            for name, args, res in sorted(fns):
                lines.append(f"{tag} {name}: {' '.join(args)} -> {res}")
        for tag, rels in (("rigid rels", self.rigid.relations),
                          ("rels", self.full.relations - self.rigid.relations)):
            for name, args in sorted(rels):
                lines.append(f"{tag} {name}: {' '.join(args)}")
        return "\n".join(lines)

    @cached_property
    def fingerprint(self):
        return hashlib.sha256(self.canonical_text.encode()).hexdigest()[:16]


EMPTY_SIGNATURE = HybridSignature(frozenset(), frozenset(), EMPTY_FOL, EMPTY_FOL)


def validate_signature(candidate):
    """Build a HybridSignature from a raw description.

    candidate keys (all optional): sorts, rigid_sorts, ops, rigid_ops, rels,
    rigid_rels, nominals, modalities. Collects every violation before raising.
    """

    if isinstance(candidate, HybridSignature):
        candidate = {
            "sorts": sorted(candidate.full.sorts - candidate.rigid.sorts),
            "rigid_sorts": sorted(candidate.rigid.sorts),
            "ops": sorted(candidate.full.functions - candidate.rigid.functions),
            "rigid_ops": sorted(candidate.rigid.functions),
            "rels": sorted(candidate.full.relations - candidate.rigid.relations),
            "rigid_rels": sorted(candidate.rigid.relations),
            "nominals": sorted(candidate.nominals),
            "modalities": sorted(candidate.modalities),
        }

    violations = []

    def check_name(name, what):
        if not valid_name(name):
            violations.append(f"{what} name {name!r} is not a valid identifier")

    flex_sorts = list(candidate.get("sorts", ()))
    rigid_sorts = list(candidate.get("rigid_sorts", ()))
    for s in flex_sorts + rigid_sorts:
        check_name(s, "sort")
    overlap = set(flex_sorts) & set(rigid_sorts)
    for s in sorted(overlap):
        violations.append(f"sort {s} listed both rigid and flexible")
    all_sorts = frozenset(flex_sorts) | frozenset(rigid_sorts)
    rset = frozenset(rigid_sorts)

    def norm_ops(entries, what):
        seen = set()
        out = []
        for entry in entries:
            name, args, res = entry
            profile = (name, tuple(args), res)
            check_name(name, what)
            for s in profile[1]:
                if s not in all_sorts:
                    violations.append(f"{what} {name} uses undeclared sort {s}")
            if profile[2] not in all_sorts:
                violations.append(f"{what} {name} has undeclared result sort {res}")
            if profile in seen:
                violations.append(f"duplicate {what} profile {name}: {' '.join(profile[1])} -> {res}")
            seen.add(profile)
            out.append(profile)
        return out, seen

    def norm_rels(entries, what):
        seen = set()
        out = []
        for entry in entries:
            name, args = entry
            profile = (name, tuple(args))
            check_name(name, what)
            for s in profile[1]:
                if s not in all_sorts:
                    violations.append(f"{what} {name} uses undeclared sort {s}")
            if profile in seen:
                violations.append(f"duplicate {what} profile {name}: {' '.join(profile[1])}")
            seen.add(profile)
            out.append(profile)
        return out, seen

    flex_ops, flex_ops_set = norm_ops(candidate.get("ops", ()), "op")
    rigid_ops, rigid_ops_set = norm_ops(candidate.get("rigid_ops", ()), "rigid op")
    for p in sorted(flex_ops_set & rigid_ops_set):
        violations.append(f"op {p[0]} listed both rigid and flexible")
    flex_rels, flex_rels_set = norm_rels(candidate.get("rels", ()), "rel")
    rigid_rels, rigid_rels_set = norm_rels(candidate.get("rigid_rels", ()), "rigid rel")
    for p in sorted(flex_rels_set & rigid_rels_set):
        violations.append(f"rel {p[0]} listed both rigid and flexible")

    # rigid profiles may only touch rigid sorts
    for name, args, res in sorted(rigid_ops_set):
        for s in args + (res,):
            if s in all_sorts and s not in rset:
                violations.append(f"rigid op {name} touches flexible sort {s}")
    for name, args in sorted(rigid_rels_set):
        for s in args:
            if s in all_sorts and s not in rset:
                violations.append(f"rigid rel {name} touches flexible sort {s}")

    nominals = []
    for k in candidate.get("nominals", ()):
        check_name(k, "nominal")
        nominals.append(k)
    modalities = []
    for entry in candidate.get("modalities", ()):
        name, rank = entry
        check_name(name, "modality")
        if rank not in (1, 2):
            violations.append(f"modality {name} has rank {rank}, want 1 or 2")
        modalities.append((name, rank))

    if violations:
        raise ValidationError(violations)

    rigid = FolSignature(rset, frozenset(rigid_ops_set), frozenset(rigid_rels_set))
    full = FolSignature(
        all_sorts,
        frozenset(rigid_ops_set) | frozenset(flex_ops_set),
        frozenset(rigid_rels_set) | frozenset(flex_rels_set),
    )
    return HybridSignature(frozenset(nominals), frozenset(modalities), rigid, full)


@dataclass(frozen=True)
class SignatureMorphism:
    """Total, profile-compatible, rigidity-preserving signature morphism.

    function_map is keyed by full source profile and yields the target NAME;
    the target profile is the source profile pushed through sort_map.
    """

    source: HybridSignature
    target: HybridSignature
    sort_map: tuple  # sorted pairs (sort, sort)
    function_map: tuple  # sorted pairs (profile, name)
    relation_map: tuple  # sorted pairs (profile, name)
    nominal_map: tuple  # sorted pairs (name, name)
    modality_map: tuple  # sorted pairs ((name, rank), name)

    @cached_property
    def _sorts(self):
        return dict(self.sort_map)

    @cached_property
    def _fns(self):
        return dict(self.function_map)

    @cached_property
    def _rels(self):
        return dict(self.relation_map)

    @cached_property
    def _noms(self):
        return dict(self.nominal_map)

    @cached_property
    def _mods(self):
        return dict(self.modality_map)

    def map_sort(self, sort):
        if sort == NOM:
            return NOM
        return self._sorts[sort]

    def map_function(self, profile):
        """Source profile to target profile."""
        name, args, res = profile
        return (self._fns[profile], tuple(self.map_sort(s) for s in args), self.map_sort(res))

    def map_relation(self, profile):
        name, args = profile
        return (self._rels[profile], tuple(self.map_sort(s) for s in args))

    def map_nominal(self, name):
        return self._noms[name]

    def map_modality(self, mod):
        return (self._mods[mod], mod[1])


def _resolve_symbol_keys(raw, profiles, kind, problems):
    """Expand name-string keys to full profile keys when unambiguous."""
    out = {}
    by_name = {}
    for p in profiles:
        by_name.setdefault(p[0], []).append(p)
    for key, value in raw.items():
        if isinstance(key, str):
            matches = by_name.get(key, [])
            if not matches:
                problems.append((key, f"unknown source {kind}"))
                continue
            if len(matches) > 1:
                problems.append((key, f"ambiguous {kind} name, give the full profile"))
                continue
            out[matches[0]] = value
        else:
            name, rest = key[0], tuple(tuple(x) if isinstance(x, list) else x for x in key[1:])
            out[(name,) + rest] = value
    return out


def validate_morphism(source, target, maps):
    """Build a SignatureMorphism from raw maps.

    maps keys: sorts, ops, rels, nominals, modalities (each a dict). Unlisted
    symbols default to the same-name image (inclusion convention). Every
    incompatible symbol is reported, not just the first.
    """

    problems = []
    raw_sorts = dict(maps.get("sorts", {}))
    raw_noms = dict(maps.get("nominals", {}))
    raw_mods = dict(maps.get("modalities", {}))
    raw_fns = _resolve_symbol_keys(dict(maps.get("ops", {})), source.full.functions, "op", problems)
    raw_rels = _resolve_symbol_keys(dict(maps.get("rels", {})), source.full.relations, "rel", problems)

    sort_map = {}
    for s in sorted(source.full.sorts):
        img = raw_sorts.get(s, s)
        if img not in target.full.sorts:
            problems.append((s, f"sort image {img} not in target"))
            continue
        if source.is_rigid_sort(s) and not target.is_rigid_sort(img):
            problems.append((s, f"rigid sort mapped to flexible sort {img}"))
            continue
        sort_map[s] = img
    for s in sorted(set(raw_sorts) - source.full.sorts):
        problems.append((s, "not a source sort"))

    def msort(s):
        return sort_map.get(s, s) if s != NOM else NOM

    fn_map = {}
    for profile in sorted(source.full.functions):
        name, args, res = profile
        if any(a not in sort_map for a in args) or res not in sort_map:
            continue  # sort problem already reported
        img_name = raw_fns.get(profile, name)
        img_profile = (img_name, tuple(msort(a) for a in args), msort(res))
        if img_profile not in target.full.functions:
            problems.append((name, f"no target op {img_name}: {' '.join(img_profile[1])} -> {img_profile[2]}"))
            continue
        if source.is_rigid_function(profile) and not target.is_rigid_function(img_profile):
            problems.append((name, "rigid op mapped to flexible op"))
            continue
        fn_map[profile] = img_name
    for profile in sorted(set(raw_fns) - source.full.functions):
        problems.append((profile[0], "not a source op"))

    rel_map = {}
    for profile in sorted(source.full.relations):
        name, args = profile
        if any(a not in sort_map for a in args):
            continue
        img_name = raw_rels.get(profile, name)
        img_profile = (img_name, tuple(msort(a) for a in args))
        if img_profile not in target.full.relations:
            problems.append((name, f"no target rel {img_name}: {' '.join(img_profile[1])}"))
            continue
        if source.is_rigid_relation(profile) and not target.is_rigid_relation(img_profile):
            problems.append((name, "rigid rel mapped to flexible rel"))
            continue
        rel_map[profile] = img_name
    for profile in sorted(set(raw_rels) - source.full.relations):
        problems.append((profile[0], "not a source rel"))

    nom_map = {}
    for k in sorted(source.nominals):
        img = raw_noms.get(k, k)
        if img not in target.nominals:
            problems.append((k, f"nominal image {img} not in target"))
            continue
        nom_map[k] = img
    for k in sorted(set(raw_noms) - source.nominals):
        problems.append((k, "not a source nominal"))

    mod_map = {}
    mods_by_name = {}
    for m in source.modalities:
        mods_by_name.setdefault(m[0], []).append(m)
    norm_mods = {}
    for key, value in raw_mods.items():
        if isinstance(key, str):
            matches = mods_by_name.get(key, [])
            if len(matches) == 1:
                norm_mods[matches[0]] = value
            elif not matches:
                problems.append((key, "not a source modality"))
            else:
                problems.append((key, "ambiguous modality name, give (name, rank)"))
        else:
            norm_mods[(key[0], key[1])] = value
    for mod in sorted(source.modalities):
        name, rank = mod
        img = norm_mods.get(mod, name)
        if (img, rank) not in target.modalities:
            problems.append((name, f"no target modality {img} of rank {rank}"))
            continue
        mod_map[mod] = img

    if problems:
        raise MorphismError(problems)

    return SignatureMorphism(
        source=source,
        target=target,
        sort_map=tuple(sorted(sort_map.items())),
        function_map=tuple(sorted(fn_map.items())),
        relation_map=tuple(sorted(rel_map.items())),
        nominal_map=tuple(sorted(nom_map.items())),
        modality_map=tuple(sorted(mod_map.items())),
    )


def identity(sig):
    return validate_morphism(sig, sig, {})


def compose(first, second):
    """Diagram-order composition: first then second."""
    if first.target != second.source:
        raise CompositionError("middle signatures differ")
    return SignatureMorphism(
        source=first.source,
        target=second.target,
        sort_map=tuple(sorted((s, second.map_sort(t)) for s, t in first.sort_map)),
        function_map=tuple(sorted(
            (p, second.map_function(first.map_function(p))[0]) for p, _ in first.function_map)),
        relation_map=tuple(sorted(
            (p, second.map_relation(first.map_relation(p))[0]) for p, _ in first.relation_map)),
        nominal_map=tuple(sorted((k, second.map_nominal(v)) for k, v in first.nominal_map)),
        modality_map=tuple(sorted(
            (m, second.map_modality((v, m[1]))[0]) for m, v in first.modality_map)),
    )


@dataclass(frozen=True)
class SignatureSquare:
    """Commuting square: span (chi, delta) out of a shared source, cospan
    (delta_a after chi) = (chi_b after delta)."""

    chi: SignatureMorphism
    delta: SignatureMorphism
    delta_a: SignatureMorphism
    chi_b: SignatureMorphism

    @property
    def base(self):
        return self.chi.source

    @property
    def apex(self):
        return self.delta_a.target


def make_square(chi, delta, delta_a, chi_b):
    problems = []
    if chi.source != delta.source:
        problems.append(("span", "legs have different sources"))
    if delta_a.source != chi.target:
        problems.append(("delta_a", "source is not chi's target"))
    if chi_b.source != delta.target:
        problems.append(("chi_b", "source is not delta's target"))
    if delta_a.target != chi_b.target:
        problems.append(("cospan", "legs have different targets"))
    if problems:
        raise MorphismError(problems)
    left = compose(chi, delta_a)
    right = compose(delta, chi_b)
    if left != right:
        raise MorphismError([("square", "does not commute")])
    return SignatureSquare(chi=chi, delta=delta, delta_a=delta_a, chi_b=chi_b)


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            # keep the lexicographically least root for determinism
            if ry < rx:
                rx, ry = ry, rx
            self.parent[ry] = rx

    def classes(self):
        out = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return {root: sorted(members) for root, members in out.items()}


def _choose_names(classes, used, key_of):
    """Deterministic class naming: least original name wins, ties broken by
    side tag; residual collisions on the same namespace key get numeric
    suffixes in canonical class order."""
    order = sorted(classes.items(), key=lambda kv: min((side, name) for side, name in
                                                       ((m[0], _entity_name(m)) for m in kv[1])))
    names = {}
    for root, members in order:
        base = min(_entity_name(m) for m in members)
        name = base
        n = 2
        while key_of(root, name) in used:
            name = f"{base}_{n}"
            n += 1
        used.add(key_of(root, name))
        names[root] = name
    return names


def _entity_name(member):
    side, payload = member
    if isinstance(payload, tuple):
        return payload[0]
    return payload


def pushout(chi, delta):
    """Pushout of a span. Deterministic: class names are the least original
    member name, disambiguated by numeric suffix on collision."""
    if chi.source != delta.source:
        raise CompositionError("span legs must share a source")
    base = chi.source
    siga, sigb = chi.target, delta.target

    def build(uf, a_items, b_items, base_items, amap, bmap):
        for x in a_items:
            uf.add(("a", x))
        for x in b_items:
            uf.add(("b", x))
        for x in base_items:
            uf.union(("a", amap(x)), ("b", bmap(x)))

    sorts_uf = _UnionFind()
    build(sorts_uf, sorted(siga.full.sorts), sorted(sigb.full.sorts),
          sorted(base.full.sorts), chi.map_sort, delta.map_sort)
    fns_uf = _UnionFind()
    build(fns_uf, sorted(siga.full.functions), sorted(sigb.full.functions),
          sorted(base.full.functions), chi.map_function, delta.map_function)
    rels_uf = _UnionFind()
    build(rels_uf, sorted(siga.full.relations), sorted(sigb.full.relations),
          sorted(base.full.relations), chi.map_relation, delta.map_relation)
    noms_uf = _UnionFind()
    build(noms_uf, sorted(siga.nominals), sorted(sigb.nominals),
          sorted(base.nominals), chi.map_nominal, delta.map_nominal)
    mods_uf = _UnionFind()
    build(mods_uf, sorted(siga.modalities), sorted(sigb.modalities),
          sorted(base.modalities), chi.map_modality, delta.map_modality)

    sort_classes = sorts_uf.classes()
    used = set()
    sort_names = _choose_names(sort_classes, used, lambda root, name: ("sort", name))
    sort_of = {}  # (side, sort) -> class name
    rigid_sorts = set()
    for root, members in sort_classes.items():
        rigid = any((siga if side == "a" else sigb).is_rigid_sort(s) for side, s in members)
        for m in members:
            sort_of[m] = sort_names[root]
        if rigid:
            rigid_sorts.add(sort_names[root])

    def mapped_fn_profile(root, name):
        side, (f, args, res) = min(fns_uf.classes()[root])
        return (name, tuple(sort_of[(side, a)] for a in args), sort_of[(side, res)])

    fn_classes = fns_uf.classes()
    used = set()
    fn_names = _choose_names(
        fn_classes, used,
        lambda root, name: ("fn", name) + mapped_fn_profile(root, name)[1:])
    fn_of = {}
    fns = set()
    rigid_fns = set()
    for root, members in fn_classes.items():
        profile = mapped_fn_profile(root, fn_names[root])
        fns.add(profile)
        for m in members:
            fn_of[m] = fn_names[root]
        if any((siga if side == "a" else sigb).is_rigid_function(p) for side, p in members):
            rigid_fns.add(profile)

    def mapped_rel_profile(root, name):
        side, (r, args) = min(rels_uf.classes()[root])
        return (name, tuple(sort_of[(side, a)] for a in args))

    rel_classes = rels_uf.classes()
    used = set()
    rel_names = _choose_names(
        rel_classes, used,
        lambda root, name: ("rel", name) + mapped_rel_profile(root, name)[1:])
    rel_of = {}
    rels = set()
    rigid_rels = set()
    for root, members in rel_classes.items():
        profile = mapped_rel_profile(root, rel_names[root])
        rels.add(profile)
        for m in members:
            rel_of[m] = rel_names[root]
        if any((siga if side == "a" else sigb).is_rigid_relation(p) for side, p in members):
            rigid_rels.add(profile)

    nom_classes = noms_uf.classes()
    used = set()
    nom_names = _choose_names(nom_classes, used, lambda root, name: ("nom", name))
    nom_of = {m: nom_names[root] for root, members in nom_classes.items() for m in members}

    mod_classes = mods_uf.classes()
    used = set()
    mod_names = _choose_names(
        mod_classes, used,
        lambda root, name: ("mod", name, min(mod_classes[root])[1][1]))
    mod_of = {}
    mods = set()
    for root, members in mod_classes.items():
        rank = members[0][1][1]
        mods.add((mod_names[root], rank))
        for m in members:
            mod_of[m] = mod_names[root]

    apex = HybridSignature(
        nominals=frozenset(nom_of.values()),
        modalities=frozenset(mods),
        rigid=FolSignature(
            frozenset(rigid_sorts),
            frozenset(p for p in fns if p in rigid_fns),
            frozenset(p for p in rels if p in rigid_rels),
        ),
        full=FolSignature(frozenset(sort_names.values()), frozenset(fns), frozenset(rels)),
    )

    def leg(side, sig):
        return SignatureMorphism(
            source=sig,
            target=apex,
            sort_map=tuple(sorted((s, sort_of[(side, s)]) for s in sig.full.sorts)),
            function_map=tuple(sorted((p, fn_of[(side, p)]) for p in sig.full.functions)),
            relation_map=tuple(sorted((p, rel_of[(side, p)]) for p in sig.full.relations)),
            nominal_map=tuple(sorted((k, nom_of[(side, k)]) for k in sig.nominals)),
            modality_map=tuple(sorted((m, mod_of[(side, m)]) for m in sig.modalities)),
        )

    return make_square(chi, delta, leg("a", siga), leg("b", sigb))


def extend_with_constants(sig, decls):
    """Extend with fresh constants at extended-rigid sorts.

    decls: iterable of (name, sort) with sort in the extended sort universe
    (rigid sorts plus "nom"). Returns (extended signature, inclusion).
    """

    nominals = set(sig.nominals)
    rigid_fns = set(sig.rigid.functions)
    full_fns = set(sig.full.functions)
    for name, sort in decls:
        if not valid_name(name):
            raise ClashError(f"bad constant name {name!r}")
        if sort == NOM:
            if name in nominals:
                raise ClashError(f"nominal {name} already declared")
            nominals.add(name)
            continue
        if sort not in sig.full.sorts:
            raise ValidationError([f"unknown sort {sort}"])
        if not sig.is_rigid_sort(sort):
            raise FlexibleQuantificationError(
                f"constant {name} declared at flexible sort {sort}")
        profile = (name, (), sort)
        if profile in full_fns:
            raise ClashError(f"constant {name}: -> {sort} already declared")
        rigid_fns.add(profile)
        full_fns.add(profile)

    extended = HybridSignature(
        nominals=frozenset(nominals),
        modalities=sig.modalities,
        rigid=FolSignature(sig.rigid.sorts, frozenset(rigid_fns), sig.rigid.relations),
        full=FolSignature(sig.full.sorts, frozenset(full_fns), sig.full.relations),
    )
    inclusion = validate_morphism(sig, extended, {})
    return extended, inclusion


def inhabited_sorts(sig):
    """Sorts with a ground term, via one fixpoint over all ops (rigid or
    flexible). The @-universe adds nothing to inhabitation."""
    inhabited = set()
    changed = True
    while changed:
        changed = False
        for name, args, res in sig.full.functions:
            if res not in inhabited and all(a in inhabited for a in args):
                inhabited.add(res)
                changed = True
    return frozenset(inhabited)


RULES = ("SortInjectivity", "Preservation", "I1", "I2", "J1", "J2")


@dataclass(frozen=True)
class CriterionReport:
    label: str
    sort_injective: bool
    violations: tuple  # ((rule, (symbol, ...)), ...) from the first failing tier
    verdict: str
    detail: tuple = field(default=(), compare=False)  # full per-clause findings

    @property
    def passed(self):
        return not self.violations


@dataclass(frozen=True)
class SquareCriterionReport:
    chi_report: CriterionReport
    delta_report: CriterionReport
    verdict: str

    @property
    def guaranteed(self):
        return self.verdict == "CIP guaranteed"


def _eval_clauses(m):
    src, tgt = m.source, m.target
    src_flex = src.sort_class.flexible
    tgt_flex = tgt.sort_class.flexible
    findings = {rule: [] for rule in RULES}

    preimages = {}
    for s in sorted(src.full.sorts):
        preimages.setdefault(m.map_sort(s), []).append(s)
    for img, pre in sorted(preimages.items()):
        if len(pre) > 1:
            findings["SortInjectivity"].extend(pre)
            if all(s in src_flex for s in pre):
                findings["I1"].extend(pre)

    for s in sorted(src_flex):
        if m.map_sort(s) not in tgt_flex:
            findings["Preservation"].append(s)

    def flexible_arity(args):
        return any(a in src_flex for a in args)

    img_fn = {}
    for p in sorted(src.full.functions):
        if not src.is_rigid_function(p) and flexible_arity(p[1]):
            img_fn.setdefault(m.map_function(p), []).append(p[0])
    for img, pre in sorted(img_fn.items()):
        if len(pre) > 1:
            findings["I2"].extend(pre)
    img_rel = {}
    for p in sorted(src.full.relations):
        if not src.is_rigid_relation(p) and flexible_arity(p[1]):
            img_rel.setdefault(m.map_relation(p), []).append(p[0])
    for img, pre in sorted(img_rel.items()):
        if len(pre) > 1:
            findings["I2"].extend(pre)

    fn_image = {m.map_function(p) for p in src.full.functions}
    flex_sort_image = {m.map_sort(s) for s in src_flex}
    inhabited = inhabited_sorts(tgt)
    j1_passed = {}
    new_flex_fns = sorted(
        p for p in tgt.full.functions
        if not tgt.is_rigid_function(p) and p not in fn_image)
    for name, args, res in new_flex_fns:
        ok = not (res in tgt_flex and res in flex_sort_image)
        j1_passed[(name, args, res)] = ok
        if not ok:
            findings["J1"].append(name)
    for name, args, res in new_flex_fns:
        if not j1_passed[(name, args, res)]:
            continue  # J2 only checked once the symbol's J1 passed
        if any(a in flex_sort_image for a in args) and res not in inhabited:
            findings["J2"].append(name)

    return {rule: tuple(sorted(set(syms))) for rule, syms in findings.items()}


def check_cip_criterion(m, label="morphism"):
    """Tier-ordered criterion check: SortInjectivity, then Preservation, then
    I2, then the J clauses. Only the first failing tier is reported as the
    violation set; the full per-clause findings ride along in detail."""
    findings = _eval_clauses(m)
    detail = tuple((rule, findings[rule]) for rule in RULES)
    sort_injective = not findings["SortInjectivity"]
    for tier in ("SortInjectivity", "Preservation", "I2"):
        if findings[tier]:
            return CriterionReport(
                label=label,
                sort_injective=sort_injective,
                violations=((tier, findings[tier]),),
                verdict="criterion failed",
                detail=detail,
            )
    violations = tuple(
        (rule, findings[rule]) for rule in ("J1", "J2") if findings[rule])
    if violations:
        return CriterionReport(label, sort_injective, violations, "criterion failed", detail)
    return CriterionReport(label, sort_injective, (), "criterion passed", detail)


def check_square_criterion(square):
    chi_report = check_cip_criterion(square.chi, "chi")
    delta_report = check_cip_criterion(square.delta, "delta")
    ok = chi_report.passed or delta_report.passed
    return SquareCriterionReport(
        chi_report=chi_report,
        delta_report=delta_report,
        verdict="CIP guaranteed" if ok else "CIP not guaranteed",
    )


def classify_fragment(sig):
    """Fragment tags: RFOHL (one rigid sort, one binary modality, no rigid
    ops or rels), HPL (no sorts, no rigid part), else general."""
    tags = set()
    if (
        len(sig.full.sorts) == 1
        and next(iter(sig.full.sorts)) in sig.rigid.sorts
        and len(sig.modalities) == 1
        and next(iter(sig.modalities))[1] == 2
        and not sig.rigid.functions
        and not sig.rigid.relations
    ):
        tags.add("RFOHL")
    if (
        not sig.full.sorts
        and not sig.rigid.functions
        and not sig.rigid.relations
    ):
        tags.add("HPL")
    if not tags:
        tags.add("general")
    return frozenset(tags)
