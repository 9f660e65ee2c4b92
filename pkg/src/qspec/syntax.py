"""Text (``.qs``) and JSON formats for label structures and systems.

Text grammar, informally::

    file      := [structure] system*
    structure := "structure" "{" (kind | alphabet | order | sync)* "}"
    kind      := "kind" ("discrete" | "weighted" | "set") ";"
    alphabet  := ("alphabet" | "gamma") NAME ("," NAME)* ";"
    order     := "order" NAME "<=" NAME ("," NAME "<=" NAME)* ";"
    sync      := "sync" ("csp" | "plus" | "max" | "cap") ";"
    system    := "system" NAME ":" ("lts" | "dmts" | "aa" | "nu") "{" stmt* "}"
    stmt      := "states" NAME,* ";" | "init" NAME,* ";"
               | "may" NAME "->" NAME ":" LABEL ";"          (dmts)
               | "must" NAME "->" "{" pair,* "}" ";"          (dmts)
               | "trans" NAME "->" NAME ":" LABEL ";"        (lts)
               | "tran" NAME "=" "{" set,* "}" ";"            (aa)
               | "diamond" NAME "=" "{" set,* "}" ";"         (nu)
               | "box" NAME ":" LABEL "->" NAME ";"          (nu)
    set       := "{" pair,* "}"
    pair      := "(" LABEL "," NAME ")"

NAME is an identifier or a double-quoted string.  ``#`` starts a line comment.
"""
import json
import logging
import re

from .errors import ParseError, QSpecError, ValidationError
from .labels import IDENT_RE, KINDS, SYNC_OPS, LabelStructure, label_key, parse_label_at
from .model import AA, DMTS, LTS, NuExpr, SpecDocument, canon, validate

log = logging.getLogger(__name__)

_STRING_RE = re.compile(r'"((?:[^"\\]|\\.)*)"')
_WS_OR_COMMENT_RE = re.compile(r"(?:\s+|#[^\n]*)*")


class _Reader:

    def __init__(self, text):
        self.text = text
        self.pos = 0

    def where(self, pos=None):
        pos = self.pos if pos is None else pos
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def error(self, message, pos=None):
        line, col = self.where(pos)
        return ParseError(message, line, col)

    def skip(self):
        self.pos = _WS_OR_COMMENT_RE.match(self.text, self.pos).end()

    def at_end(self):
        self.skip()
        return self.pos >= len(self.text)

    def peek(self, token):
        self.skip()
        return self.text.startswith(token, self.pos)

    def accept(self, token):
        if self.peek(token):
            self.pos += len(token)
            return True
        return False

    def expect(self, token):
        if not self.accept(token):
            got = self.text[self.pos:self.pos + 12] or "end of input"
            raise self.error(f"expected {token!r}, found {got!r}")

    def word(self):
        self.skip()
        m = IDENT_RE.match(self.text, self.pos)
        if not m:
            got = self.text[self.pos:self.pos + 12] or "end of input"
            raise self.error(f"expected a name, found {got!r}")
        self.pos = m.end()
        return m.group()

    def keyword(self, allowed):
        start = self.pos
        w = self.word()
        if w not in allowed:
            raise self.error(f"expected one of {', '.join(allowed)}, found {w!r}", start)
        return w

    def name(self):
        self.skip()
        if self.text.startswith('"', self.pos):
            m = _STRING_RE.match(self.text, self.pos)
            if not m:
                raise self.error("unterminated string")
            self.pos = m.end()
            return re.sub(r"\\(.)", r"\1", m.group(1))
        return self.word()

    def names(self):
        out = [self.name()]
        while self.accept(","):
            out.append(self.name())
        return out

    def label(self, ls):
        self.skip()
        start = self.pos
        try:
            lab, self.pos = parse_label_at(self.text, self.pos, ls)
        except QSpecError as err:
            msg = str(err)
            raise self.error(f"bad label: {msg}", start) from None
        return lab

    def pair(self, ls):
        self.expect("(")
        lab = self.label(ls)
        self.expect(",")
        target = self.name()
        self.expect(")")
        return lab, target

    def pair_set(self, ls):
        self.expect("{")
        out = set()
        if self.accept("}"):
            return frozenset()
        while True:
            out.add(self.pair(ls))
            if self.accept("}"):
                return frozenset(out)
            self.expect(",")

    def set_of_sets(self, ls):
        self.expect("{")
        out = set()
        if self.accept("}"):
            return frozenset()
        while True:
            out.add(self.pair_set(ls))
            if self.accept("}"):
                return frozenset(out)
            self.expect(",")


def _parse_structure(r):
    r.expect("{")
    kind = None
    alphabet = []
    order = []
    sync = None
    while not r.accept("}"):
        key = r.keyword(("kind", "alphabet", "gamma", "order", "sync"))
        if key == "kind":
            kind = r.keyword(KINDS)
        elif key in ("alphabet", "gamma"):
            alphabet.extend(r.names())
        elif key == "order":
            while True:
                a = r.name()
                r.expect("<=")
                b = r.name()
                order.append((a, b))
                if not r.accept(","):
                    break
        else:
            sync = r.keyword(SYNC_OPS)
        r.expect(";")
    if kind is None:
        raise r.error("structure block needs a 'kind'")
    if sync is None:
        sync = {"discrete": "csp", "weighted": "plus", "set": "cap"}[kind]
    try:
        return LabelStructure(kind, frozenset(alphabet), frozenset(order), sync)
    except ValueError as err:
        raise r.error(f"bad structure: {err}") from None


def _parse_system(r, ls, kind):
    states = []
    seen = set()

    def note(*xs):
        for x in xs:
            if x not in seen:
                seen.add(x)
                states.append(x)

    initial = []
    edges = set()
    must = set()
    tran = {}
    diamond = {}
    box = {}
    allowed = {"lts": ("states", "init", "trans"),
               "dmts": ("states", "init", "may", "must"),
               "aa": ("states", "init", "tran"),
               "nu": ("states", "vars", "init", "diamond", "box")}[kind]
    r.expect("{")
    while not r.accept("}"):
        stmt = r.keyword(allowed)
        if stmt in ("states", "vars"):
            note(*r.names())
        elif stmt == "init":
            xs = r.names()
            note(*xs)
            initial.extend(xs)
        elif stmt in ("may", "trans"):
            s = r.name()
            r.expect("->")
            t = r.name()
            r.expect(":")
            lab = r.label(ls)
            note(s, t)
            edges.add((s, lab, t))
        elif stmt == "must":
            s = r.name()
            r.expect("->")
            n = r.pair_set(ls)
            note(s, *sorted(t for _, t in n))
            must.add((s, n))
        elif stmt == "tran":
            s = r.name()
            r.expect("=")
            ms = r.set_of_sets(ls)
            note(s, *sorted({t for m in ms for _, t in m}))
            tran[s] = tran.get(s, frozenset()) | ms
        elif stmt == "diamond":
            x = r.name()
            r.expect("=")
            ns = r.set_of_sets(ls)
            note(x, *sorted({t for m in ns for _, t in m}))
            diamond[x] = diamond.get(x, frozenset()) | ns
        else:
            x = r.name()
            r.expect(":")
            lab = r.label(ls)
            r.expect("->")
            y = r.name()
            note(x, y)
            box.setdefault(x, set()).add((lab, y))
        r.expect(";")
    states = frozenset(states)
    if kind == "lts":
        if len(initial) != 1:
            raise r.error(f"an LTS needs exactly one initial state, got {len(initial)}")
        return LTS(ls, states, initial[0], frozenset(edges))
    if kind == "dmts":
        return DMTS(ls, states, frozenset(initial), frozenset(edges), frozenset(must))
    if kind == "aa":
        return AA(ls, states, frozenset(initial), tran)
    return NuExpr(ls, states, frozenset(initial), diamond, box)


def parse_spec(text, check=True):
    """Parse a ``.qs`` document.  With ``check`` every system is validated and the
    first invalid one raises :class:`ValidationError` naming it."""
    r = _Reader(text)
    ls = None
    doc = SpecDocument(None, {})
    while not r.at_end():
        start = r.pos
        head = r.keyword(("structure", "system"))
        if head == "structure":
            if ls is not None:
                raise r.error("only one structure block is allowed", start)
            ls = _parse_structure(r)
            doc.label_structure = ls
            continue
        if ls is None:
            raise r.error("a structure block must come before the first system", start)
        name = r.name()
        if name in doc.systems:
            raise r.error(f"system {name!r} is defined twice", start)
        r.expect(":")
        kind = r.keyword(("lts", "dmts", "aa", "nu"))
        system = _parse_system(r, ls, kind)
        if check:
            problems = validate(system)
            if problems:
                raise ValidationError(problems, name)
        doc.systems[name] = system
    return doc


def load_spec(paths, check=True):
    """Load and merge several files; their structure blocks must agree."""
    merged = None
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        doc = parse_json(text, check) if str(path).endswith(".json") else parse_spec(text, check)
        if merged is None:
            merged = doc
            continue
        if doc.label_structure is not None and merged.label_structure is not None \
                and doc.label_structure != merged.label_structure:
            raise ParseError(f"{path}: structure block differs from the earlier files")
        merged.label_structure = merged.label_structure or doc.label_structure
        for name, system in doc.systems.items():
            if name in merged.systems:
                raise ParseError(f"{path}: system {name!r} is defined twice")
            merged.systems[name] = system
    return merged or SpecDocument(None, {})


# -- text output ------------------------------------------------------------------

def _name(x):
    s = canon(x)
    if IDENT_RE.fullmatch(s) and s not in ("inf",):
        return s
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _pairs_text(pairs):
    items = sorted(pairs, key=lambda p: (label_key(p[0]), canon(p[1])))
    return "{" + ", ".join(f"({a}, {_name(t)})" for a, t in items) + "}"


def _sets_text(sets):
    items = sorted(sets, key=lambda m: (len(m), _pairs_text(m)))
    return "{" + ", ".join(_pairs_text(m) for m in items) + "}"


def structure_text(ls):
    lines = ["structure {", f"  kind {ls.kind};"]
    if ls.alphabet:
        lines.append("  alphabet " + ", ".join(_name(a) for a in sorted(ls.alphabet)) + ";")
    order = sorted((a, b) for a, b in ls.preorder if a != b)
    if order:
        lines.append("  order " + ", ".join(f"{_name(a)} <= {_name(b)}" for a, b in order) + ";")
    lines.append(f"  sync {ls.sync_op};")
    lines.append("}")
    return "\n".join(lines)


def system_text(name, sys):
    out = [f"system {_name(name)} : {sys.kind} {{"]
    states = sorted(sys.states, key=canon)
    if states:
        out.append("  states " + ", ".join(_name(s) for s in states) + ";")
    inits = sorted(sys.initials, key=canon)
    if inits:
        out.append("  init " + ", ".join(_name(s) for s in inits) + ";")
    edge_key = lambda e: (canon(e[0]), label_key(e[1]), canon(e[2]))  # noqa: E731
    if sys.kind == "lts":
        for s, a, t in sorted(sys.transitions, key=edge_key):
            out.append(f"  trans {_name(s)} -> {_name(t)} : {a};")
    elif sys.kind == "dmts":
        for s, a, t in sorted(sys.may, key=edge_key):
            out.append(f"  may {_name(s)} -> {_name(t)} : {a};")
        for s, n in sorted(sys.must, key=lambda e: (canon(e[0]), _pairs_text(e[1]))):
            out.append(f"  must {_name(s)} -> {_pairs_text(n)};")
    elif sys.kind == "aa":
        for s in states:
            if s in sys.tran:
                out.append(f"  tran {_name(s)} = {_sets_text(sys.tran[s])};")
    else:
        for x in states:
            if sys.diamond.get(x):
                out.append(f"  diamond {_name(x)} = {_sets_text(sys.diamond[x])};")
        for x in states:
            for a, y in sorted(sys.box.get(x, ()), key=lambda p: (label_key(p[0]), canon(p[1]))):
                out.append(f"  box {_name(x)} : {a} -> {_name(y)};")
    out.append("}")
    return "\n".join(out)


def serialize(doc, fmt="text"):
    if fmt == "json":
        return json.dumps(to_json_obj(doc), indent=2, sort_keys=True) + "\n"
    parts = []
    if doc.label_structure is not None:
        parts.append(structure_text(doc.label_structure))
    for name in sorted(doc.systems):
        parts.append(system_text(name, doc.systems[name]))
    return "\n\n".join(parts) + ("\n" if parts else "")


# -- JSON mirror ------------------------------------------------------------------

def _pairs_json(pairs):
    return [[str(a), canon(t)] for a, t in sorted(pairs, key=lambda p: (label_key(p[0]), canon(p[1])))]


def _sets_json(sets):
    return sorted((_pairs_json(m) for m in sets), key=lambda m: (len(m), json.dumps(m)))


def system_json(sys):
    states = sorted(canon(s) for s in sys.states)
    edges = lambda es: sorted([canon(s), str(a), canon(t)] for s, a, t in es)  # noqa: E731
    if sys.kind == "lts":
        return {"type": "lts", "states": states, "initial": canon(sys.initial),
                "transitions": edges(sys.transitions)}
    out = {"type": sys.kind, "states": states, "initial": sorted(canon(s) for s in sys.initials)}
    if sys.kind == "dmts":
        out["may"] = edges(sys.may)
        out["must"] = sorted(([canon(s), _pairs_json(n)] for s, n in sys.must), key=json.dumps)
    elif sys.kind == "aa":
        out["tran"] = {canon(s): _sets_json(ms) for s, ms in sys.tran.items()}
    else:
        out["diamond"] = {canon(x): _sets_json(ns) for x, ns in sys.diamond.items() if ns}
        out["box"] = {canon(x): _pairs_json(b) for x, b in sys.box.items() if b}
    return out


def to_json_obj(doc):
    obj = {"systems": {name: system_json(s) for name, s in doc.systems.items()}}
    ls = doc.label_structure
    if ls is not None:
        obj["structure"] = {"kind": ls.kind, "alphabet": sorted(ls.alphabet),
                            "order": sorted([a, b] for a, b in ls.preorder if a != b),
                            "sync": ls.sync_op}
    return obj


def parse_json(text, check=True):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"invalid JSON: {err.msg}", err.lineno, err.colno) from None
    try:
        return from_json_obj(obj, check)
    except (KeyError, TypeError, ValueError) as err:
        raise ParseError(f"malformed document: {err}") from None


def from_json_obj(obj, check=True):
    st = obj.get("structure")
    if st is None:
        if obj.get("systems"):
            raise ParseError("systems given without a structure")
        return SpecDocument(None, {})
    ls = LabelStructure(st["kind"], frozenset(st.get("alphabet", ())),
                        frozenset(tuple(p) for p in st.get("order", ())),
                        st.get("sync") or {"discrete": "csp", "weighted": "plus", "set": "cap"}[st["kind"]])
    lab = ls.label

    def pairs(ps):
        return frozenset((lab(a), t) for a, t in ps)

    doc = SpecDocument(ls, {})
    for name, s in obj.get("systems", {}).items():
        kind = s["type"]
        states = frozenset(s.get("states", ()))
        if kind == "lts":
            sys = LTS(ls, states, s["initial"], frozenset((a, lab(b), c) for a, b, c in s.get("transitions", ())))
        elif kind == "dmts":
            sys = DMTS(ls, states, frozenset(s.get("initial", ())),
                       frozenset((a, lab(b), c) for a, b, c in s.get("may", ())),
                       frozenset((x, pairs(n)) for x, n in s.get("must", ())))
        elif kind == "aa":
            sys = AA(ls, states, frozenset(s.get("initial", ())),
                     {x: frozenset(pairs(m) for m in ms) for x, ms in s.get("tran", {}).items()})
        elif kind == "nu":
            sys = NuExpr(ls, states, frozenset(s.get("initial", ())),
                         {x: frozenset(pairs(m) for m in ns) for x, ns in s.get("diamond", {}).items()},
                         {x: pairs(b) for x, b in s.get("box", {}).items()})
        else:
            raise ParseError(f"unknown system type {kind!r}")
        if check:
            problems = validate(sys)
            if problems:
                raise ValidationError(problems, name)
        doc.systems[name] = sys
    return doc


def relabel_states(system):
    """Copy of ``system`` with every state renamed to its printable string."""
    ls = system.ls
    n = canon
    if system.kind == "lts":
        return LTS(ls, frozenset(map(n, system.states)), n(system.initial),
                   frozenset((n(s), a, n(t)) for s, a, t in system.transitions))
    inits = frozenset(map(n, system.initials))
    states = frozenset(map(n, system.states))
    if system.kind == "dmts":
        return DMTS(ls, states, inits, frozenset((n(s), a, n(t)) for s, a, t in system.may),
                    frozenset((n(s), frozenset((a, n(t)) for a, t in nn)) for s, nn in system.must))
    if system.kind == "aa":
        return AA(ls, states, inits, {n(s): frozenset(frozenset((a, n(t)) for a, t in m) for m in ms)
                                      for s, ms in system.tran.items()})
    return NuExpr(ls, states, inits,
                  {n(x): frozenset(frozenset((a, n(y)) for a, y in m) for m in ns)
                   for x, ns in system.diamond.items()},
                  {n(x): frozenset((a, n(y)) for a, y in b) for x, b in system.box.items()})
