"""System representations (LTS, DMTS, acceptance automata, normal-form nu-calculus)
and the structural translations between them."""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Any

from .errors import BudgetError, KindMismatchError, StructureMismatchError, ValidationError
from .labels import LabelStructure, label_key

log = logging.getLogger(__name__)

DEFAULT_STATE_BUDGET = 100_000
# largest number of candidate (label, target) pairs whose subsets we enumerate
DEFAULT_SUBSET_BUDGET = 20


def canon(x):
    """Deterministic printable name for a state or label (used for ordering and output)."""
    if isinstance(x, str):
        return x
    if isinstance(x, tuple):
        return "(" + ",".join(canon(v) for v in x) + ")"
    if isinstance(x, frozenset):
        return "{" + ",".join(sorted(canon(v) for v in x)) + "}"
    return str(x)


def ordered(items):
    return sorted(items, key=canon)


def _pair_key(p):
    return (label_key(p[0]), canon(p[1]))


def sorted_pairs(pairs):
    return sorted(pairs, key=_pair_key)


@dataclass(frozen=True)
class QuotientState:
    """A set of (dividend state, divisor state) pairs; the empty set is the universal state."""
    pairs: frozenset

    def __str__(self):
        return "{" + ",".join(sorted(f"{canon(a)}/{canon(b)}" for a, b in self.pairs)) + "}"

    @property
    def universal(self):
        return not self.pairs


def _fs(x):
    return x if isinstance(x, frozenset) else frozenset(x)


@dataclass(frozen=True)
class LTS:
    ls: LabelStructure
    states: frozenset
    initial: Any
    transitions: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "states", _fs(self.states))
        object.__setattr__(self, "transitions", _fs(tuple(t) for t in self.transitions))

    kind = "lts"

    @property
    def initials(self):
        return frozenset({self.initial})

    def successors(self, s):
        return [(a, t) for (u, a, t) in self.transitions if u == s]


@dataclass(frozen=True)
class DMTS:
    ls: LabelStructure
    states: frozenset
    initial: frozenset
    may: frozenset = frozenset()
    must: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "states", _fs(self.states))
        object.__setattr__(self, "initial", _fs(self.initial))
        object.__setattr__(self, "may", _fs(tuple(t) for t in self.may))
        object.__setattr__(self, "must", _fs((s, _fs(tuple(p) for p in n)) for s, n in self.must))

    kind = "dmts"

    @property
    def initials(self):
        return self.initial

    def may_from(self, s):
        return [(a, t) for (u, a, t) in self.may if u == s]

    def must_from(self, s):
        return [n for (u, n) in self.must if u == s]


@dataclass(frozen=True)
class AA:
    """Acceptance automaton: ``tran`` maps each state to a set of admissible outgoing sets."""
    ls: LabelStructure
    states: frozenset
    initial: frozenset
    tran: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "states", _fs(self.states))
        object.__setattr__(self, "initial", _fs(self.initial))
        object.__setattr__(self, "tran", {
            s: _fs(_fs(tuple(p) for p in m) for m in ms) for s, ms in self.tran.items()})

    kind = "aa"

    @property
    def initials(self):
        return self.initial

    def __hash__(self):
        return hash((self.ls, self.states, self.initial))


AcceptanceAutomaton = AA


@dataclass(frozen=True)
class NuExpr:
    """Normal-form nu-calculus equation system.

    ``diamond[x]`` is a set of disjunctions, each a set of (label, var) pairs; all
    must hold.  ``box[x]`` is the set of (label, var) pairs bounding what may
    happen from ``x``: every step must be covered by one of its entries.
    """
    ls: LabelStructure
    vars: frozenset
    initial: frozenset
    diamond: dict = field(default_factory=dict)
    box: dict = field(default_factory=dict)

    def __post_init__(self):
        vs = _fs(self.vars)
        object.__setattr__(self, "vars", vs)
        object.__setattr__(self, "initial", _fs(self.initial))
        diamond = {x: _fs(_fs(tuple(p) for p in n) for n in ns) for x, ns in self.diamond.items()}
        box = {x: _fs(tuple(p) for p in b) for x, b in self.box.items()}
        for x in vs:
            diamond.setdefault(x, frozenset())
            box.setdefault(x, frozenset())
        object.__setattr__(self, "diamond", diamond)
        object.__setattr__(self, "box", box)

    kind = "nu"

    @property
    def states(self):
        return self.vars

    @property
    def initials(self):
        return self.initial

    def __hash__(self):
        return hash((self.ls, self.vars, self.initial))


SYSTEM_TYPES = {"lts": LTS, "dmts": DMTS, "aa": AA, "nu": NuExpr}


@dataclass
class SpecDocument:
    label_structure: LabelStructure
    systems: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.systems[name]

    def add(self, name, system):
        if system.ls != self.label_structure:
            raise StructureMismatchError(f"system {name!r} uses a different label structure")
        self.systems[name] = system


def same_structure(*systems):
    first = systems[0]
    for other in systems[1:]:
        if other.ls != first.ls:
            raise StructureMismatchError("systems live over different label structures")
    return first.ls


def require_kind(system, kind):
    if system.kind != kind:
        raise StructureMismatchError(f"expected a {kind} system, got {system.kind}")


# -- validation ------------------------------------------------------------------

def _check_label(ls, label, where, out):
    try:
        ls.check(label)
        return True
    except KindMismatchError as err:
        out.append(f"{where}: {err}")
        return False


def validate(system, ls=None):
    """Return a list of human-readable violations (empty iff well formed)."""
    ls = ls or system.ls
    out = []
    if system.ls != ls:
        out.append("system label structure differs from the document's")
    states = system.states
    kind = system.kind
    if kind == "lts":
        if system.initial not in states:
            out.append(f"initial state {canon(system.initial)} is not a declared state")
        for s, a, t in system.transitions:
            where = f"transition {canon(s)} -{a}-> {canon(t)}"
            if s not in states or t not in states:
                out.append(f"{where}: endpoint is not a declared state")
            if _check_label(ls, a, where, out) and not ls.is_implementation(a):
                out.append(f"{where}: {a} is not an implementation label")
        return out
    for s in system.initials - states:
        out.append(f"initial state {canon(s)} is not a declared state")
    if kind == "dmts":
        for s, a, t in system.may:
            where = f"may {canon(s)} -{a}-> {canon(t)}"
            if s not in states or t not in states:
                out.append(f"{where}: endpoint is not a declared state")
            _check_label(ls, a, where, out)
        may_by_src = {}
        for s, b, t in system.may:
            may_by_src.setdefault(s, []).append((b, t))
        for s, n in system.must:
            if s not in states:
                out.append(f"must from {canon(s)}: source is not a declared state")
            for a, t in n:
                where = f"must {canon(s)} -> ({a}, {canon(t)})"
                if t not in states:
                    out.append(f"{where}: target is not a declared state")
                if not _check_label(ls, a, where, out):
                    continue
                if not any(u == t and _safe_refines(ls, a, b) for b, u in may_by_src.get(s, ())):
                    out.append(f"{where}: no may-edge covers this must branch")
    elif kind == "aa":
        for s in states:
            if s not in system.tran:
                out.append(f"state {canon(s)} has no transition constraint")
        for s, ms in system.tran.items():
            if s not in states:
                out.append(f"tran {canon(s)}: not a declared state")
            for m in ms:
                for a, t in m:
                    where = f"tran {canon(s)} element ({a}, {canon(t)})"
                    if t not in states:
                        out.append(f"{where}: target is not a declared state")
                    _check_label(ls, a, where, out)
    elif kind == "nu":
        for x in set(system.diamond) | set(system.box):
            if x not in states:
                out.append(f"table entry for undeclared variable {canon(x)}")
        for x, ns in system.diamond.items():
            for n in ns:
                for a, y in n:
                    where = f"diamond {canon(x)} <{a}>{canon(y)}"
                    if y not in states:
                        out.append(f"{where}: target is not a declared variable")
                    _check_label(ls, a, where, out)
        for x, b in system.box.items():
            for a, y in b:
                where = f"box {canon(x)} [{a}]{canon(y)}"
                if y not in states:
                    out.append(f"{where}: target is not a declared variable")
                _check_label(ls, a, where, out)
    else:
        out.append(f"unknown system kind {kind!r}")
    return out


def _safe_refines(ls, a, b):
    try:
        return ls.refines(a, b)
    except KindMismatchError:
        return False


def ensure_valid(system, name=None):
    problems = validate(system)
    if problems:
        raise ValidationError(problems, name)
    return system


def is_implementation(system):
    """True iff the system is implementation-shaped in its own formalism."""
    ls = system.ls
    if validate(system):
        return False
    if system.kind == "lts":
        return True
    if len(system.initials) != 1:
        return False
    if system.kind == "dmts":
        if not all(ls.is_implementation(a) for _, a, _ in system.may):
            return False
        return system.must == frozenset((s, frozenset({(a, t)})) for s, a, t in system.may)
    if system.kind == "aa":
        for s in system.states:
            ms = system.tran[s]
            if len(ms) != 1:
                return False
            (m,) = ms
            if not all(ls.is_implementation(a) for a, _ in m):
                return False
        return True
    for x in system.vars:
        box = system.box[x]
        if not all(ls.is_implementation(a) for a, _ in box):
            return False
        if system.diamond[x] != frozenset(frozenset({p}) for p in box):
            return False
    return True


# -- translations ----------------------------------------------------------------

def _subsets(items):
    for r in range(len(items) + 1):
        yield from itertools.combinations(items, r)


def db(d, subset_budget=DEFAULT_SUBSET_BUDGET):
    """DMTS -> AA.  Tran(s) collects the outgoing sets allowed by the may-edges that
    meet every must-hyperedge of ``s``."""
    require_kind(d, "dmts")
    ls = d.ls
    tran = {}
    for s in d.states:
        mays = d.may_from(s)
        musts = d.must_from(s)
        # must branches may carry labels strictly below their covering may label,
        # so they are candidates too
        cand = set(mays)
        for n in musts:
            cand |= n
        cand = [p for p in sorted_pairs(cand) if any(
            t == p[1] and ls.refines(p[0], b) for b, t in mays)]
        if len(cand) > subset_budget:
            raise BudgetError(f"state {canon(s)} has {len(cand)} candidate transitions "
                              f"(budget {subset_budget})")
        index = {p: i for i, p in enumerate(cand)}
        need = [sum(1 << index[p] for p in n if p in index) for n in musts]
        choices = []
        for mask in range(1 << len(cand)):
            if all(mask & nm for nm in need):
                choices.append(frozenset(cand[i] for i in range(len(cand)) if mask >> i & 1))
        tran[s] = frozenset(choices)
    return AA(ls, d.states, d.initial, tran)


def bd(a, budget=DEFAULT_STATE_BUDGET):
    """AA -> DMTS over states (s, M), one per admissible set M of s."""
    require_kind(a, "aa")
    n_states = sum(len(a.tran.get(s, ())) for s in a.states)
    if n_states > budget:
        raise BudgetError(f"translation needs {n_states} states (budget {budget})")
    states = frozenset((s, m) for s in a.states for m in a.tran.get(s, ()))
    initial = frozenset((s, m) for s in a.initial for m in a.tran.get(s, ()))
    must = set()
    may = set()
    for s, m in states:
        for lab, t in m:
            n = frozenset((lab, (t, m2)) for m2 in a.tran.get(t, ()))
            must.add(((s, m), n))
            for _, u in n:
                may.add(((s, m), lab, u))
    return DMTS(a.ls, states, initial, frozenset(may), frozenset(must))


def ddh(d):
    """DMTS -> normal-form nu-calculus (purely syntactic)."""
    require_kind(d, "dmts")
    diamond = {s: set() for s in d.states}
    box = {s: set() for s in d.states}
    for s, n in d.must:
        diamond.setdefault(s, set()).add(n)
    for s, a, t in d.may:
        box.setdefault(s, set()).add((a, t))
    return NuExpr(d.ls, d.states, d.initial, diamond, box)


def hd(n):
    """Normal-form nu-calculus -> DMTS.  Every diamond obligation must be covered
    by a box entry, otherwise the result would not be a DMTS."""
    require_kind(n, "nu")
    may = frozenset((x, a, y) for x, b in n.box.items() for a, y in b)
    must = frozenset((x, nn) for x, ns in n.diamond.items() for nn in ns)
    d = DMTS(n.ls, n.vars, n.initial, may, must)
    problems = [p for p in validate(d) if "no may-edge covers" in p]
    if problems:
        raise ValidationError(["uncovered diamond obligation: " + p for p in problems])
    return d


def embed_lts(i, target):
    """View an LTS as an implementation-shaped DMTS, AA or nu-expression."""
    require_kind(i, "lts")
    init = frozenset({i.initial})
    if target == "lts":
        return i
    if target == "dmts":
        must = frozenset((s, frozenset({(a, t)})) for s, a, t in i.transitions)
        return DMTS(i.ls, i.states, init, i.transitions, must)
    if target == "aa":
        tran = {s: frozenset({frozenset(i.successors(s))}) for s in i.states}
        return AA(i.ls, i.states, init, tran)
    if target == "nu":
        box = {s: frozenset(i.successors(s)) for s in i.states}
        diamond = {s: frozenset(frozenset({p}) for p in box[s]) for s in i.states}
        return NuExpr(i.ls, i.states, init, diamond, box)
    raise ValueError(f"unknown target formalism {target!r}")


def as_lts(system):
    """Recover the LTS from an implementation-shaped system (inverse of embed_lts)."""
    if system.kind == "lts":
        return system
    if not is_implementation(system):
        raise ValidationError(["system is not an implementation"])
    (init,) = system.initials
    if system.kind == "dmts":
        trans = system.may
    elif system.kind == "aa":
        trans = frozenset((s, a, t) for s in system.states for m in system.tran[s] for a, t in m)
    else:
        trans = frozenset((x, a, y) for x in system.vars for a, y in system.box[x])
    return LTS(system.ls, system.states, init, trans)


TRANSLATIONS = {
    ("dmts", "aa"): db,
    ("aa", "dmts"): bd,
    ("dmts", "nu"): ddh,
    ("nu", "dmts"): hd,
}


def translate(system, target):
    """Translate between formalisms, chaining through DMTS when needed."""
    src = system.kind
    if src == target:
        return system
    if src == "lts":
        return embed_lts(system, target)
    if target == "lts":
        return as_lts(system)
    if (src, target) in TRANSLATIONS:
        return TRANSLATIONS[(src, target)](system)
    return translate(translate(system, "dmts"), target)
