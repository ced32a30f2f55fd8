"""Bounded semantic oracle: canonical enumeration of finite structures and
three-way verdicts for satisfiability and entailment.

Enumeration order is deterministic: world counts ascending, nominal
assignments, modality edge sets, carrier sizes, then interpretation tables,
each in canonical order. A closed search that exhausts its space without a
hit is reported as complete; an open one stays inconclusive. The node
budget counts candidate structures and raises BudgetExceeded when crossed.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from . import syntax
from .errors import BudgetExceeded
from .kripke import (
    Frame, KripkeStructure, PointedModel, RigidCore, WorldPart,
    check_structure, satisfies,
)
from .syntax import Not, ser_sentence

MODE_OPEN = "open"
MODE_CLOSED = "closed"


@dataclass(frozen=True)
class SearchBounds:
    max_worlds: int = 2
    max_carrier: int = 2
    term_depth: int = 2
    budget: int = 200000
    mode: str = MODE_OPEN

    def __post_init__(self):
        if self.mode not in (MODE_OPEN, MODE_CLOSED):
            raise ValueError(f"unknown search mode {self.mode!r}")

    def closed(self):
        return SearchBounds(self.max_worlds, self.max_carrier,
                            self.term_depth, self.budget, MODE_CLOSED)


@dataclass(frozen=True)
class DomainSpec:
    """Carrier size constraints: each entry pins a sort to an exact size or
    an inclusive (lo, hi) range. Unlisted sorts range over 0..max_carrier
    (rigid sorts start at whatever totality demands)."""
    sizes: tuple = ()
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(sorted(dict(self.sizes).items())))

    def range_for(self, sort, default_lo, default_hi):
        spec = dict(self.sizes).get(sort)
        if spec is None:
            return range(default_lo, default_hi + 1)
        if isinstance(spec, int):
            return range(spec, spec + 1)
        lo, hi = spec
        return range(lo, hi + 1)


class OracleVerdict:
    pass


@dataclass(frozen=True)
class Satisfiable(OracleVerdict):
    model: KripkeStructure
    world: object
    nodes_visited: int

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Refuted(OracleVerdict):
    model: KripkeStructure
    world: object
    nodes_visited: int

    def __bool__(self):
        return False


@dataclass(frozen=True)
class NoneWithinBounds(OracleVerdict):
    nodes_visited: int

    def __bool__(self):
        return False


@dataclass(frozen=True)
class ExhaustedComplete(OracleVerdict):
    nodes_visited: int

    def __bool__(self):
        return False


def _products(domains):
    if not domains:
        return [()]
    return list(itertools.product(*domains))


def _all_tables(arg_space, values):
    """All total maps arg_space -> values, canonical odometer order."""
    if not arg_space:
        yield {}
        return
    for choice in itertools.product(values, repeat=len(arg_space)):
        yield dict(zip(arg_space, choice))


def _all_subsets(space):
    for mask in range(1 << len(space)):
        yield frozenset(space[i] for i in range(len(space)) if mask >> i & 1)


def enumerate_structures(sig, bounds, domain=None):
    """Yield candidate structures in canonical order. Structures that
    cannot be made total (a rigid op with a nonempty domain and an empty
    result carrier) are skipped rather than yielded."""
    domain = domain or DomainSpec()
    rigid_sorts = sorted(sig.rigid.sorts)
    flex_sorts = sorted(sig.sort_class.flexible)
    rigid_fns = sorted(sig.rigid.functions)
    rigid_rels = sorted(sig.rigid.relations)
    flex_fns = sorted(sig.full.functions - sig.rigid.functions)
    flex_rels = sorted(sig.full.relations - sig.rigid.relations)
    nominals = sorted(sig.nominals)
    modalities = sorted(sig.modalities)

    # a rigid sort with rigid constants can never be empty
    rigid_lo = {}
    for s in rigid_sorts:
        lo = 0
        if any(p[2] == s and not p[1] for p in rigid_fns):
            lo = 1
        rigid_lo[s] = lo

    for n_worlds in range(1, bounds.max_worlds + 1):
        worlds = tuple(f"w{i}" for i in range(n_worlds))
        nominal_assignments = _products([worlds] * len(nominals))
        edge_spaces = []
        for name, rank in modalities:
            space = sorted(itertools.product(worlds, repeat=rank))
            edge_spaces.append(list(_all_subsets(space)))
        rigid_size_ranges = [
            domain.range_for(s, rigid_lo[s], bounds.max_carrier)
            for s in rigid_sorts]
        flex_size_ranges = [
            domain.range_for(s, 0, bounds.max_carrier)
            for s in flex_sorts for _ in worlds]

        for noms in nominal_assignments:
            nominal_map = dict(zip(nominals, noms))
            for edges in itertools.product(*edge_spaces):
                modality_map = dict(zip(modalities, edges))
                frame = Frame(worlds, nominal_map, modality_map)
                for rigid_sizes in itertools.product(*rigid_size_ranges):
                    rigid_carriers = {
                        s: tuple(range(n)) for s, n in zip(rigid_sorts, rigid_sizes)}
                    # rigid interpretations
                    rigid_fn_spaces = []
                    feasible = True
                    for name, params, res in rigid_fns:
                        args = _products([rigid_carriers[s] for s in params])
                        values = rigid_carriers[res]
                        if args and not values:
                            feasible = False
                            break
                        rigid_fn_spaces.append(list(_all_tables(args, values)))
                    if not feasible:
                        continue
                    rigid_rel_spaces = []
                    for name, params in rigid_rels:
                        space = _products([rigid_carriers[s] for s in params])
                        rigid_rel_spaces.append(list(_all_subsets(space)))
                    for flex_sizes in itertools.product(*flex_size_ranges):
                        flex_carriers = {}
                        i = 0
                        for s in flex_sorts:
                            for w in worlds:
                                flex_carriers[(w, s)] = tuple(range(flex_sizes[i]))
                                i += 1

                        def carrier_at(w, s):
                            if s in rigid_carriers:
                                return rigid_carriers[s]
                            return flex_carriers[(w, s)]

                        flex_fn_spaces = []
                        for name, params, res in flex_fns:
                            for w in worlds:
                                args = _products([carrier_at(w, s) for s in params])
                                values = carrier_at(w, res)
                                if args and not values:
                                    flex_fn_spaces.append([{}])
                                else:
                                    flex_fn_spaces.append(
                                        list(_all_tables(args, values)))
                        flex_rel_spaces = []
                        for name, params in flex_rels:
                            for w in worlds:
                                space = _products([carrier_at(w, s) for s in params])
                                flex_rel_spaces.append(list(_all_subsets(space)))

                        for rf in itertools.product(*rigid_fn_spaces):
                            for rr in itertools.product(*rigid_rel_spaces):
                                rigid_core = RigidCore(
                                    rigid_carriers,
                                    dict(zip(rigid_fns, rf)),
                                    dict(zip(rigid_rels, rr)))
                                for ff in itertools.product(*flex_fn_spaces):
                                    for fr in itertools.product(*flex_rel_spaces):
                                        parts = {}
                                        for wi, w in enumerate(worlds):
                                            fns = {}
                                            for fi, p in enumerate(flex_fns):
                                                fns[p] = ff[fi * len(worlds) + wi]
                                            rels = {}
                                            for ri, p in enumerate(flex_rels):
                                                rels[p] = fr[ri * len(worlds) + wi]
                                            parts[w] = WorldPart(
                                                {s: flex_carriers[(w, s)] for s in flex_sorts},
                                                fns, rels)
                                        yield KripkeStructure(
                                            sig, frame, rigid_core,
                                            tuple(parts.items()))


def find_model(sig, sentences, bounds, domain=None):
    """Search for a pointed model of the sentence set. Satisfiable with the
    first witness in canonical order, else NoneWithinBounds (open) or
    ExhaustedComplete (closed)."""
    phis = sorted(sentences, key=ser_sentence)
    nodes = 0
    for m in enumerate_structures(sig, bounds, domain):
        nodes += 1
        if nodes > bounds.budget:
            raise BudgetExceeded(nodes, bounds.budget)
        for w in m.frame.worlds:
            if all(satisfies(m, w, phi) for phi in phis):
                return Satisfiable(m, w, nodes)
    if bounds.mode == MODE_CLOSED:
        return ExhaustedComplete(nodes)
    return NoneWithinBounds(nodes)


_entail_cache = {}


def entails(sig, gamma, psi, bounds, domain=None):
    """Countermodel search for gamma with the negated conclusion. Refuted
    with a witness when one is found; ExhaustedComplete means the
    entailment holds throughout the closed bounded space."""
    key = (sig.fingerprint,
           tuple(sorted(ser_sentence(p) for p in gamma)),
           ser_sentence(psi), bounds, domain)
    hit = _entail_cache.get(key)
    if hit is not None:
        return hit
    verdict = find_model(sig, list(gamma) + [Not(psi)], bounds, domain)
    if isinstance(verdict, Satisfiable):
        verdict = Refuted(verdict.model, verdict.world, verdict.nodes_visited)
    _entail_cache[key] = verdict
    return verdict


def entails_at(sig, gamma, nominal, psi, bounds, domain=None):
    return entails(sig, gamma, syntax.at(nominal, psi), bounds, domain)


def consistent(sig, gamma, bounds, domain=None):
    """True, False, or None (inconclusive under open bounds)."""
    verdict = find_model(sig, gamma, bounds, domain)
    if isinstance(verdict, Satisfiable):
        return True
    if isinstance(verdict, ExhaustedComplete):
        return False
    return None


def clear_cache():
    _entail_cache.clear()


def sample_structure(sig, rng, max_carrier=2, max_worlds=2):
    """One random valid structure, drawn with the given Random instance.
    Rigid carriers stay nonempty so rigid ops can always be total."""
    n_worlds = rng.randint(1, max_worlds)
    worlds = tuple(f"w{i}" for i in range(n_worlds))
    nominal_map = {k: rng.choice(worlds) for k in sorted(sig.nominals)}
    modality_map = {}
    for name, rank in sorted(sig.modalities):
        space = sorted(itertools.product(worlds, repeat=rank))
        modality_map[(name, rank)] = frozenset(
            t for t in space if rng.random() < 0.5)
    rigid_carriers = {
        s: tuple(range(rng.randint(1, max_carrier)))
        for s in sorted(sig.rigid.sorts)}
    flex_carriers = {}
    for s in sorted(sig.sort_class.flexible):
        for w in worlds:
            flex_carriers[(w, s)] = tuple(range(rng.randint(0, max_carrier)))

    def carrier_at(w, s):
        return rigid_carriers.get(s) if s in rigid_carriers else flex_carriers[(w, s)]

    def random_table(args, values):
        return {a: rng.choice(values) for a in args}

    rigid_fns = {}
    for profile in sorted(sig.rigid.functions):
        name, params, res = profile
        args = _products([rigid_carriers[s] for s in params])
        rigid_fns[profile] = random_table(args, rigid_carriers[res])
    rigid_rels = {}
    for profile in sorted(sig.rigid.relations):
        name, params = profile
        space = _products([rigid_carriers[s] for s in params])
        rigid_rels[profile] = frozenset(t for t in space if rng.random() < 0.5)

    parts = {}
    for w in worlds:
        fns = {}
        for profile in sorted(sig.full.functions - sig.rigid.functions):
            name, params, res = profile
            args = _products([carrier_at(w, s) for s in params])
            values = carrier_at(w, res)
            fns[profile] = random_table(args, values) if values else {}
        rels = {}
        for profile in sorted(sig.full.relations - sig.rigid.relations):
            name, params = profile
            space = _products([carrier_at(w, s) for s in params])
            rels[profile] = frozenset(t for t in space if rng.random() < 0.5)
        parts[w] = WorldPart(
            {s: flex_carriers[(w, s)] for s in sig.sort_class.flexible},
            fns, rels)
    m = KripkeStructure(sig, Frame(worlds, nominal_map, modality_map),
                        RigidCore(rigid_carriers, rigid_fns, rigid_rels),
                        tuple(parts.items()))
    problems = check_structure(m)
    if problems:
        raise AssertionError(f"sampled structure invalid: {problems[:2]}")
    return m
