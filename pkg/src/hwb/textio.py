"""The .hwb text format: tokenizer, recursive-descent parser, canonical
printers, and JSON exporters.

A document is a sequence of named blocks (signature, morphism, square,
presentation, model, sentence), each usable only after its definition.
Printing is canonical and parse(print(x)) round-trips. The JSON side is
one-way: structured exports under the "hwb/1" schema tag.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import syntax
from .errors import ParseError, ResolveError
from .kripke import SENTINEL, make_structure
from .sigcat import NOM, make_square, validate_morphism, validate_signature
from .syntax import (
    Apply, Diamond, Eq, Exists, Nominal, Not, Rel, Store, Variable,
    at, bottom, box, conj, make_or, ser_sentence, top,
)

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_INT = re.compile(r"-?[0-9]+")
_PUNCT = ("->", "{", "}", "(", ")", ";", ",", ":", "=", "@", "<", ">",
          "[", "]", ".", "/")


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "punct" | "eof"
    text: str
    line: int
    column: int


def tokenize(text):
    tokens = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        m = _IDENT.match(text, i)
        if m:
            tokens.append(Token("ident", m.group(), line, col))
            col += len(m.group())
            i = m.end()
            continue
        if ch == "-" and i + 1 < n and text[i + 1] == ">":
            tokens.append(Token("punct", "->", line, col))
            i += 2
            col += 2
            continue
        m = _INT.match(text, i)
        if m and m.group() not in ("-",):
            tokens.append(Token("int", m.group(), line, col))
            col += len(m.group())
            i = m.end()
            continue
        matched = False
        for p in _PUNCT:
            if text.startswith(p, i):
                tokens.append(Token("punct", p, line, col))
                i += len(p)
                col += len(p)
                matched = True
                break
        if not matched:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Cursor:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead=0):
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self):
        tok = self.peek()
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, message, expected=()):
        tok = self.peek()
        raise ParseError(message, tok.line, tok.column, tuple(expected))

    def expect(self, text):
        tok = self.peek()
        if tok.text != text or tok.kind == "eof":
            self.fail(f"expected {text!r}, found {tok.text!r}", (text,))
        return self.next()

    def ident(self, what="a name"):
        tok = self.peek()
        if tok.kind != "ident":
            self.fail(f"expected {what}, found {tok.text!r}")
        return self.next().text

    def at_ident(self, text=None):
        tok = self.peek()
        return tok.kind == "ident" and (text is None or tok.text == text)

    def element(self):
        tok = self.peek()
        if tok.kind == "ident":
            return self.next().text
        if tok.kind == "int":
            return int(self.next().text)
        self.fail("expected an element (identifier or integer)")


@dataclass
class Document:
    signatures: dict = field(default_factory=dict)
    morphisms: dict = field(default_factory=dict)
    squares: dict = field(default_factory=dict)
    presentations: dict = field(default_factory=dict)
    models: dict = field(default_factory=dict)
    sentences: dict = field(default_factory=dict)

    def signature(self, name):
        if name not in self.signatures:
            raise ResolveError(name, f"unknown signature {name}")
        return self.signatures[name]

    def morphism(self, name):
        if name not in self.morphisms:
            raise ResolveError(name, f"unknown morphism {name}")
        return self.morphisms[name]

    def model(self, name):
        if name not in self.models:
            raise ResolveError(name, f"unknown model {name}")
        return self.models[name]


# ---------------------------------------------------------------- sentences

def _parse_term(cur, sig, scope):
    name = cur.ident("a term symbol")
    tag = None
    if cur.peek().text == "@" and cur.peek(1).kind == "ident" \
            and cur.peek(2).text == "(":
        cur.next()
        tag = cur.ident("a world tag")
    args = []
    if cur.peek().text == "(":
        cur.next()
        if cur.peek().text != ")":
            args.append(_parse_term(cur, sig, scope))
            while cur.peek().text == ",":
                cur.next()
                args.append(_parse_term(cur, sig, scope))
        cur.expect(")")
    elif tag is None and cur.peek().text == "@" and cur.peek(1).kind == "ident":
        # tagged constant: f@k
        cur.next()
        tag = cur.ident("a world tag")
    return Apply(name, tuple(args), tag)


def _starts_term(cur):
    """true/false keyword vs constant of the same name: `=` wins."""
    i = 1
    if cur.peek(i).text == "@":
        i += 2
    if cur.peek(i).text == "(":
        depth = 0
        while True:
            t = cur.peek(i)
            if t.kind == "eof":
                return False
            if t.text == "(":
                depth += 1
            elif t.text == ")":
                depth -= 1
                if depth == 0:
                    i += 1
                    break
            i += 1
    return cur.peek(i).text == "="


def parse_sentence_tokens(cur, sig, scope=None):
    scope = dict(scope or {})
    tok = cur.peek()
    if tok.text == "@":
        cur.next()
        k = cur.ident("a nominal")
        cur.expect("(")
        body = parse_sentence_tokens(cur, sig, scope)
        cur.expect(")")
        return at(k, body)
    if tok.text == "<":
        cur.next()
        lam = cur.ident("a modality")
        cur.expect(">")
        cur.expect("(")
        body = parse_sentence_tokens(cur, sig, scope)
        cur.expect(")")
        return Diamond(lam, body)
    if tok.text == "[":
        cur.next()
        lam = cur.ident("a modality")
        cur.expect("]")
        cur.expect("(")
        body = parse_sentence_tokens(cur, sig, scope)
        cur.expect(")")
        return box(lam, body)
    if cur.at_ident("not"):
        cur.next()
        cur.expect("(")
        body = parse_sentence_tokens(cur, sig, scope)
        cur.expect(")")
        return Not(body)
    if cur.at_ident("or") and cur.peek(1).text == "{":
        cur.next()
        cur.next()
        parts = []
        if cur.peek().text != "}":
            parts.append(parse_sentence_tokens(cur, sig, scope))
            while cur.peek().text == ";":
                cur.next()
                parts.append(parse_sentence_tokens(cur, sig, scope))
        cur.expect("}")
        return make_or(parts)
    if cur.at_ident("and") and cur.peek(1).text == "{":
        cur.next()
        cur.next()
        parts = []
        if cur.peek().text != "}":
            parts.append(parse_sentence_tokens(cur, sig, scope))
            while cur.peek().text == ";":
                cur.next()
                parts.append(parse_sentence_tokens(cur, sig, scope))
        cur.expect("}")
        return conj(parts)
    if cur.at_ident("store"):
        cur.next()
        name = cur.ident("a variable")
        cur.expect(".")
        cur.expect("(")
        inner = dict(scope)
        inner[name] = NOM
        body = parse_sentence_tokens(cur, sig, inner)
        cur.expect(")")
        return Store(Variable(name, NOM, sig.fingerprint), body)
    if cur.at_ident("exists") or cur.at_ident("forall"):
        forall = tok.text == "forall"
        cur.next()
        name = cur.ident("a variable")
        cur.expect(":")
        sort = cur.ident("a sort")
        cur.expect(".")
        cur.expect("(")
        inner = dict(scope)
        inner[name] = NOM if sort == NOM else sort
        body = parse_sentence_tokens(cur, sig, inner)
        cur.expect(")")
        var = Variable(name, NOM if sort == NOM else sort, sig.fingerprint)
        if forall:
            return Not(Exists(var, Not(body)))
        return Exists(var, body)
    if cur.at_ident("true") and not _starts_term(cur):
        cur.next()
        return top()
    if cur.at_ident("false") and not _starts_term(cur):
        cur.next()
        return bottom()
    if tok.kind != "ident":
        cur.fail(f"expected a sentence, found {tok.text!r}")

    # term-or-atom: equation on '=', else relation or nominal
    start = cur.pos
    term = _parse_term(cur, sig, scope)
    if cur.peek().text == "=":
        cur.next()
        right = _parse_term(cur, sig, scope)
        return Eq(term, right)
    if term.tag is None and not term.args and cur.tokens[cur.pos - 1].text != ")":
        # bare name: nominal atom or bound nominal variable
        return Nominal(term.symbol)
    if term.tag is not None:
        cur.fail(f"relation {term.symbol} cannot take a world tag")
    return Rel(term.symbol, term.args)


def parse_sentence(sig, text, scope=None):
    cur = _Cursor(tokenize(text))
    phi = parse_sentence_tokens(cur, sig, scope)
    if cur.peek().kind != "eof":
        cur.fail(f"trailing input after sentence: {cur.peek().text!r}")
    syntax.validate_sentence(sig, phi, dict(scope or {}))
    return phi


def parse_term(sig, text, scope=None):
    cur = _Cursor(tokenize(text))
    term = _parse_term(cur, sig, dict(scope or {}))
    if cur.peek().kind != "eof":
        cur.fail(f"trailing input after term: {cur.peek().text!r}")
    syntax.resolve_term(sig, term, dict(scope or {}))
    return term


# ---------------------------------------------------------------- blocks

def _parse_signature_block(cur):
    name = cur.ident("a signature name")
    cur.expect("{")
    data = {
        "sorts": [], "rigid_sorts": [], "ops": [], "rigid_ops": [],
        "rels": [], "rigid_rels": [], "nominals": [], "modalities": [],
    }
    while cur.peek().text != "}":
        rigid = False
        if cur.at_ident("rigid"):
            cur.next()
            rigid = True
        kw = cur.ident("a signature item")
        if kw == "sorts":
            items = []
            while cur.peek().kind == "ident":
                items.append(cur.next().text)
            cur.expect(";")
            data["rigid_sorts" if rigid else "sorts"].extend(items)
        elif kw == "ops":
            while True:
                op = cur.ident("an op name")
                cur.expect(":")
                args = []
                while cur.peek().kind == "ident":
                    args.append(cur.next().text)
                cur.expect("->")
                res = cur.ident("a result sort")
                data["rigid_ops" if rigid else "ops"].append(
                    (op, tuple(args), res))
                if cur.peek().text == ",":
                    cur.next()
                    continue
                break
            cur.expect(";")
        elif kw == "rels":
            while True:
                rel = cur.ident("a relation name")
                args = []
                if cur.peek().text == ":":
                    cur.next()
                    while cur.peek().kind == "ident":
                        args.append(cur.next().text)
                data["rigid_rels" if rigid else "rels"].append(
                    (rel, tuple(args)))
                if cur.peek().text == ",":
                    cur.next()
                    continue
                break
            cur.expect(";")
        elif kw == "nominals" and not rigid:
            while cur.peek().kind == "ident":
                data["nominals"].append(cur.next().text)
            cur.expect(";")
        elif kw == "modalities" and not rigid:
            while True:
                mod = cur.ident("a modality name")
                rank = 2
                if cur.peek().text == "/":
                    cur.next()
                    tok = cur.peek()
                    if tok.kind != "int":
                        cur.fail("expected a modality rank")
                    rank = int(cur.next().text)
                data["modalities"].append((mod, rank))
                if cur.peek().text == ",":
                    cur.next()
                    continue
                break
            cur.expect(";")
        else:
            cur.fail(f"unknown signature item {kw!r}")
    cur.expect("}")
    return name, validate_signature(data)


def _parse_mapping_list(cur):
    out = {}
    while True:
        src = cur.ident("a symbol")
        cur.expect("->")
        dst = cur.ident("an image symbol")
        out[src] = dst
        if cur.peek().text == ",":
            cur.next()
            continue
        break
    cur.expect(";")
    return out


def _parse_morphism_block(cur, doc):
    name = cur.ident("a morphism name")
    cur.expect(":")
    src = doc.signature(cur.ident("a source signature"))
    cur.expect("->")
    tgt = doc.signature(cur.ident("a target signature"))
    cur.expect("{")
    maps = {"sorts": {}, "ops": {}, "rels": {}, "nominals": {}, "modalities": {}}
    while cur.peek().text != "}":
        kw = cur.ident("a mapping kind")
        if kw not in maps:
            cur.fail(f"unknown mapping kind {kw!r}")
        maps[kw].update(_parse_mapping_list(cur))
    cur.expect("}")
    return name, validate_morphism(src, tgt, maps)


def _parse_square_block(cur, doc):
    name = cur.ident("a square name")
    cur.expect("{")
    legs = {}
    for leg in ("chi", "delta", "delta_a", "chi_b"):
        got = cur.ident("a leg name")
        if got != leg:
            cur.fail(f"expected leg {leg!r}, found {got!r}")
        cur.expect("=")
        legs[leg] = doc.morphism(cur.ident("a morphism name"))
        cur.expect(";")
    cur.expect("}")
    return name, make_square(legs["chi"], legs["delta"],
                             legs["delta_a"], legs["chi_b"])


def _parse_presentation_block(cur, doc):
    name = cur.ident("a presentation name")
    cur.expect("over")
    sig = doc.signature(cur.ident("a signature name"))
    cur.expect("{")
    sentences = []
    while cur.peek().text != "}":
        phi = parse_sentence_tokens(cur, sig, {})
        syntax.validate_sentence(sig, phi)
        sentences.append(phi)
        cur.expect(";")
    cur.expect("}")
    return name, syntax.Presentation(sig, frozenset(sentences))


def _parse_table_entries(cur):
    """op entries: `(a, b) -> v` pairs or one bare element (a constant)."""
    table = {}
    if cur.peek().text == ";":
        return table
    while True:
        if cur.peek().text == "(":
            cur.next()
            args = []
            if cur.peek().text != ")":
                args.append(cur.element())
                while cur.peek().text == ",":
                    cur.next()
                    args.append(cur.element())
            cur.expect(")")
            cur.expect("->")
            table[tuple(args)] = cur.element()
        else:
            table[()] = cur.element()
        if cur.peek().text == ",":
            cur.next()
            continue
        break
    return table


def _parse_tuples(cur):
    tuples = []
    while cur.peek().text == "(":
        cur.next()
        args = []
        if cur.peek().text != ")":
            args.append(cur.element())
            while cur.peek().text == ",":
                cur.next()
                args.append(cur.element())
        cur.expect(")")
        tuples.append(tuple(args))
    return frozenset(tuples)


def _resolve_fn(cur, sig, name, annotation):
    matches = [p for p in sig.full.functions if p[0] == name]
    if annotation is not None:
        matches = [p for p in matches if p[1:] == annotation]
    if len(matches) == 1:
        return matches[0]
    if not matches:
        cur.fail(f"unknown op {name}")
    cur.fail(f"ambiguous op {name}, annotate its profile")


def _resolve_rel(cur, sig, name, annotation):
    matches = [p for p in sig.full.relations if p[0] == name]
    if annotation is not None:
        matches = [p for p in matches if p[1] == annotation]
    if len(matches) == 1:
        return matches[0]
    if not matches:
        cur.fail(f"unknown relation {name}")
    cur.fail(f"ambiguous relation {name}, annotate its profile")


def _parse_interpretation(cur, sig):
    """One rigid/world block body: carriers, ops, rels."""
    carriers = {}
    fns = {}
    rels = {}
    while cur.peek().text != "}":
        kw = cur.ident("carrier, op, or rel")
        if kw == "carrier":
            sort = cur.ident("a sort")
            cur.expect("=")
            elems = []
            while cur.peek().kind in ("ident", "int"):
                elems.append(cur.element())
            cur.expect(";")
            carriers[sort] = tuple(elems)
        elif kw == "op":
            name = cur.ident("an op name")
            annotation = None
            if cur.peek().text == ":":
                cur.next()
                args = []
                while cur.peek().kind == "ident" and cur.peek(1).text != "=":
                    nxt = cur.peek(1).text
                    args.append(cur.next().text)
                    if nxt == "->":
                        break
                cur.expect("->")
                res = cur.ident("a result sort")
                annotation = (tuple(args), res)
            profile = _resolve_fn(cur, sig, name, annotation)
            cur.expect("=")
            fns[profile] = _parse_table_entries(cur)
            cur.expect(";")
        elif kw == "rel":
            name = cur.ident("a relation name")
            annotation = None
            if cur.peek().text == ":":
                cur.next()
                args = []
                while cur.peek().kind == "ident":
                    args.append(cur.next().text)
                annotation = tuple(args)
            profile = _resolve_rel(cur, sig, name, annotation)
            cur.expect("=")
            rels[profile] = _parse_tuples(cur)
            cur.expect(";")
        else:
            cur.fail(f"unknown interpretation item {kw!r}")
    return carriers, fns, rels


def _parse_model_block(cur, doc):
    name = cur.ident("a model name")
    cur.expect("over")
    sig = doc.signature(cur.ident("a signature name"))
    cur.expect("{")
    worlds = []
    nominal = {}
    modality = {mod: frozenset() for mod in sig.modalities}
    rigid = ({}, {}, {})
    world_parts = {}
    while cur.peek().text != "}":
        kw = cur.ident("a model item")
        if kw == "worlds":
            while cur.peek().kind == "ident":
                worlds.append(cur.next().text)
            cur.expect(";")
        elif kw == "nominal":
            k = cur.ident("a nominal")
            cur.expect("=")
            nominal[k] = cur.ident("a world")
            cur.expect(";")
        elif kw == "modality":
            mod = cur.ident("a modality name")
            matches = [m for m in sig.modalities if m[0] == mod]
            if len(matches) != 1:
                cur.fail(f"unknown or ambiguous modality {mod}")
            cur.expect("=")
            modality[matches[0]] = _parse_tuples(cur)
            cur.expect(";")
        elif kw == "rigid":
            cur.expect("{")
            rigid = _parse_interpretation(cur, sig)
            cur.expect("}")
        elif kw == "world":
            w = cur.ident("a world")
            cur.expect("{")
            world_parts[w] = _parse_interpretation(cur, sig)
            cur.expect("}")
        else:
            cur.fail(f"unknown model item {kw!r}")
    cur.expect("}")

    # unlisted relations default to empty; carriers and ops must be given
    rigid_rels = dict(rigid[2])
    for p in sig.rigid.relations:
        rigid_rels.setdefault(p, frozenset())
    flex_rels_template = sig.full.relations - sig.rigid.relations
    filled_worlds = {}
    for w in worlds:
        carriers, fns, rels = world_parts.get(w, ({}, {}, {}))
        rels = dict(rels)
        for p in flex_rels_template:
            rels.setdefault(p, frozenset())
        filled_worlds[w] = (carriers, fns, rels)
    m = make_structure(sig, (tuple(worlds), nominal, modality),
                       (rigid[0], rigid[1], rigid_rels), filled_worlds)
    return name, m


def parse_document(text):
    cur = _Cursor(tokenize(text))
    doc = Document()
    while cur.peek().kind != "eof":
        kw = cur.ident("a block keyword")
        if kw == "signature":
            name, sig = _parse_signature_block(cur)
            doc.signatures[name] = sig
        elif kw == "morphism":
            name, m = _parse_morphism_block(cur, doc)
            doc.morphisms[name] = m
        elif kw == "square":
            name, s = _parse_square_block(cur, doc)
            doc.squares[name] = s
        elif kw == "presentation":
            name, p = _parse_presentation_block(cur, doc)
            doc.presentations[name] = p
        elif kw == "model":
            name, m = _parse_model_block(cur, doc)
            doc.models[name] = m
        elif kw == "sentence":
            name = cur.ident("a sentence name")
            cur.expect("over")
            sig = doc.signature(cur.ident("a signature name"))
            cur.expect("=")
            phi = parse_sentence_tokens(cur, sig, {})
            syntax.validate_sentence(sig, phi)
            cur.expect(";")
            doc.sentences[name] = (sig, phi)
        else:
            cur.fail(f"unknown block keyword {kw!r}")
    return doc


def load_document(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_document(fh.read())


# ---------------------------------------------------------------- printers

def _fmt_element(x):
    return str(x)


def print_signature(name, sig):
    lines = [f"signature {name} {{"]
    flex_sorts = sorted(sig.sort_class.flexible)
    if flex_sorts:
        lines.append(f"  sorts {' '.join(flex_sorts)};")
    if sig.rigid.sorts:
        lines.append(f"  rigid sorts {' '.join(sorted(sig.rigid.sorts))};")

    def op_text(p):
        name_, args, res = p
        left = f"{name_} :"
        if args:
            left += " " + " ".join(args)
        return f"{left} -> {res}"

    flex_ops = sorted(sig.full.functions - sig.rigid.functions)
    if flex_ops:
        lines.append(f"  ops {', '.join(op_text(p) for p in flex_ops)};")
    if sig.rigid.functions:
        lines.append(
            f"  rigid ops {', '.join(op_text(p) for p in sorted(sig.rigid.functions))};")

    def rel_text(p):
        name_, args = p
        if args:
            return f"{name_} : {' '.join(args)}"
        return name_

    flex_rels = sorted(sig.full.relations - sig.rigid.relations)
    if flex_rels:
        lines.append(f"  rels {', '.join(rel_text(p) for p in flex_rels)};")
    if sig.rigid.relations:
        lines.append(
            f"  rigid rels {', '.join(rel_text(p) for p in sorted(sig.rigid.relations))};")
    if sig.nominals:
        lines.append(f"  nominals {' '.join(sorted(sig.nominals))};")
    if sig.modalities:
        parts = [f"{m}/{r}" for m, r in sorted(sig.modalities)]
        lines.append(f"  modalities {', '.join(parts)};")
    lines.append("}")
    return "\n".join(lines)


def print_morphism(name, m, source_name, target_name):
    lines = [f"morphism {name} : {source_name} -> {target_name} {{"]
    sort_pairs = [f"{a} -> {b}" for a, b in m.sort_map if a != b]
    if sort_pairs:
        lines.append(f"  sorts {', '.join(sort_pairs)};")
    op_pairs = [f"{p[0]} -> {img}" for p, img in m.function_map if p[0] != img]
    if op_pairs:
        lines.append(f"  ops {', '.join(op_pairs)};")
    rel_pairs = [f"{p[0]} -> {img}" for p, img in m.relation_map if p[0] != img]
    if rel_pairs:
        lines.append(f"  rels {', '.join(rel_pairs)};")
    nom_pairs = [f"{a} -> {b}" for a, b in m.nominal_map if a != b]
    if nom_pairs:
        lines.append(f"  nominals {', '.join(nom_pairs)};")
    mod_pairs = [f"{mod[0]} -> {img}" for mod, img in m.modality_map
                 if mod[0] != img]
    if mod_pairs:
        lines.append(f"  modalities {', '.join(mod_pairs)};")
    lines.append("}")
    return "\n".join(lines)


def _print_interpretation(carriers, fns, rels, indent, sig):
    lines = []
    pad = " " * indent
    for sort, elems in sorted(carriers.items()):
        lines.append(
            f"{pad}carrier {sort} = {' '.join(_fmt_element(x) for x in elems)};")
    by_name = {}
    for p in fns:
        by_name.setdefault(p[0], []).append(p)
    for p, table in sorted(fns.items()):
        annotate = len(by_name[p[0]]) > 1 or any(
            q[0] == p[0] and q != p for q in sig.full.functions)
        head = f"{pad}op {p[0]}"
        if annotate:
            head += f" : {' '.join(p[1])} -> {p[2]}"
        entries = sorted(table.items(), key=repr)
        if not entries:
            lines.append(f"{head} = ;")
            continue
        if len(entries) == 1 and entries[0][0] == ():
            lines.append(f"{head} = {_fmt_element(entries[0][1])};")
            continue
        parts = []
        for args, value in entries:
            if value == SENTINEL:
                raise ValueError(f"cannot print a partial model: {p[0]}")
            argtext = ", ".join(_fmt_element(a) for a in args)
            parts.append(f"({argtext}) -> {_fmt_element(value)}")
        lines.append(f"{head} = {', '.join(parts)};")
    for p, tuples in sorted(rels.items()):
        if not tuples:
            continue
        parts = []
        for t in sorted(tuples, key=repr):
            parts.append(f"({', '.join(_fmt_element(x) for x in t)})")
        lines.append(f"{pad}rel {p[0]} = {' '.join(parts)};")
    return lines


def print_model(name, m, signature_name):
    sig = m.sig
    lines = [f"model {name} over {signature_name} {{"]
    lines.append(f"  worlds {' '.join(str(w) for w in m.frame.worlds)};")
    for k, w in m.frame.nominal:
        lines.append(f"  nominal {k} = {w};")
    for mod, edges in m.frame.modality:
        if not edges:
            continue
        parts = [f"({', '.join(str(x) for x in t)})" for t in sorted(edges, key=repr)]
        lines.append(f"  modality {mod[0]} = {' '.join(parts)};")
    rigid_carriers = dict(m.rigid.carriers)
    rigid_fns = {p: dict(t) for p, t in m.rigid.functions}
    rigid_rels = dict(m.rigid.relations)
    if rigid_carriers or rigid_fns or rigid_rels:
        lines.append("  rigid {")
        lines.extend(_print_interpretation(rigid_carriers, rigid_fns, rigid_rels, 4, sig))
        lines.append("  }")
    for w, part in m.worlds:
        lines.append(f"  world {w} {{")
        lines.extend(_print_interpretation(
            dict(part.carriers), {p: dict(t) for p, t in part.functions},
            dict(part.relations), 4, sig))
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines)


def print_presentation(name, pres, signature_name):
    lines = [f"presentation {name} over {signature_name} {{"]
    for phi in sorted(pres.sentences, key=ser_sentence):
        lines.append(f"  {ser_sentence(phi)};")
    lines.append("}")
    return "\n".join(lines)


# ---------------------------------------------------------------- JSON

SCHEMA = "hwb/1"


def json_signature(sig):
    return {
        "schema": SCHEMA,
        "kind": "signature",
        "sorts": sorted(sig.sort_class.flexible),
        "rigidSorts": sorted(sig.rigid.sorts),
        "ops": [
            {"name": p[0], "args": list(p[1]), "result": p[2],
             "rigid": sig.is_rigid_function(p)}
            for p in sorted(sig.full.functions)],
        "rels": [
            {"name": p[0], "args": list(p[1]),
             "rigid": sig.is_rigid_relation(p)}
            for p in sorted(sig.full.relations)],
        "nominals": sorted(sig.nominals),
        "modalities": [{"name": m, "rank": r} for m, r in sorted(sig.modalities)],
        "fingerprint": sig.fingerprint,
    }


def json_criterion(report):
    return {
        "schema": SCHEMA,
        "kind": "criterion",
        "morphism": report.label,
        "sortInjective": report.sort_injective,
        "violations": [
            {"rule": rule, "symbols": list(symbols)}
            for rule, symbols in report.violations],
        "verdict": report.verdict,
    }


def json_square_criterion(report):
    return {
        "schema": SCHEMA,
        "kind": "square-criterion",
        "chi": json_criterion(report.chi_report),
        "delta": json_criterion(report.delta_report),
        "verdict": report.verdict,
    }


def json_model(m):
    return {
        "schema": SCHEMA,
        "kind": "model",
        "worlds": [str(w) for w in m.frame.worlds],
        "nominals": {k: str(w) for k, w in m.frame.nominal},
        "modalities": {
            mod[0]: sorted([list(map(str, t)) for t in edges])
            for mod, edges in m.frame.modality},
        "rigid": {
            "carriers": {s: [_fmt_element(x) for x in c]
                         for s, c in m.rigid.carriers},
            "ops": {p[0]: [[list(map(_fmt_element, a)), _fmt_element(v)]
                           for a, v in t]
                    for p, t in m.rigid.functions},
            "rels": {p[0]: sorted([list(map(_fmt_element, t)) for t in ts])
                     for p, ts in m.rigid.relations},
        },
        "worldsDetail": {
            str(w): {
                "carriers": {s: [_fmt_element(x) for x in c]
                             for s, c in part.carriers},
                "ops": {p[0]: [[list(map(_fmt_element, a)), _fmt_element(v)]
                               for a, v in t]
                        for p, t in part.functions},
                "rels": {p[0]: sorted([list(map(_fmt_element, t)) for t in ts])
                         for p, ts in part.relations},
            }
            for w, part in m.worlds},
        "partial": m.partial,
    }


def json_witness(h):
    return {
        "schema": SCHEMA,
        "kind": "morphism-witness",
        "frameMap": {str(w): str(v) for w, v in h.frame_map},
        "rigidMaps": {
            s: {_fmt_element(a): _fmt_element(b) for a, b in t}
            for s, t in h.rigid_maps},
        "perWorldMaps": {
            str(w): {s: {_fmt_element(a): _fmt_element(b) for a, b in t}
                     for s, t in maps}
            for w, maps in h.world_maps},
    }


def json_bounds(bounds):
    return {
        "maxWorlds": bounds.max_worlds,
        "maxCarrier": bounds.max_carrier,
        "termDepth": bounds.term_depth,
        "budget": bounds.budget,
        "mode": bounds.mode,
    }


def json_oracle(verdict, bounds):
    out = {
        "schema": SCHEMA,
        "kind": "oracle",
        "tag": type(verdict).__name__,
        "boundsUsed": json_bounds(bounds),
        "nodesVisited": verdict.nodes_visited,
    }
    if hasattr(verdict, "model"):
        out["witness"] = json_model(verdict.model)
        out["world"] = str(verdict.world)
    return out


def json_run(run):
    result = run.result
    out = {
        "schema": SCHEMA,
        "kind": "interpolation-run",
        "steps": [
            {"kind": "decision", "round": s.round, "side": s.side,
             "nominal": str(s.nominal), "sentence": ser_sentence(s.sentence),
             "decision": s.outcome, "freshConstants": []}
            for s in run.steps],
        "result": {"tag": type(result).__name__},
    }
    tag = out["result"]
    if hasattr(result, "sentence"):
        tag["sentence"] = ser_sentence(result.sentence)
    if hasattr(result, "reason"):
        tag["reason"] = result.reason
    if hasattr(result, "model_a"):
        tag["modelA"] = json_model(result.model_a)
        tag["worldA"] = str(result.world_a)
        tag["modelB"] = json_model(result.model_b)
        tag["worldB"] = str(result.world_b)
        tag["witness"] = json_witness(result.morphism)
    return out
