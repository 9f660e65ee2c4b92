"""Boolean modal refinement, nu-calculus model checking and bounded thorough-refinement oracles."""
import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .errors import StructureMismatchError
from .model import LTS, canon, embed_lts, ordered, same_structure, translate

log = logging.getLogger(__name__)


@dataclass
class RefinementWitness:
    holds: bool
    relation: frozenset
    failure: Optional[tuple] = None
    # the full greatest relation, before restricting to pairs reachable from initial ones
    greatest: frozenset = field(default=frozenset(), repr=False)

    def __bool__(self):
        return self.holds


class _LabelOrder:
    """Memoized label refinement for one structure."""

    def __init__(self, ls):
        self.ls = ls
        self._cache = {}

    def __call__(self, a, b):
        key = (a, b)
        hit = self._cache.get(key)
        if hit is None:
            hit = self._cache[key] = self.ls.refines(a, b)
        return hit


def _gfp(pairs, deps, check):
    """Greatest relation inside ``pairs`` closed under ``check``.

    ``deps[(t1, t2)]`` lists the pairs whose clause looks at (t1, t2); ``check``
    returns None when a pair is fine, or a description of the broken clause.
    """
    rel = set(pairs)
    reasons = {}
    work = deque(ordered(rel))
    queued = set(rel)
    while work:
        p = work.popleft()
        queued.discard(p)
        if p not in rel:
            continue
        why = check(p, rel)
        if why is None:
            continue
        rel.discard(p)
        reasons[p] = why
        for q in deps.get(p, ()):
            if q in rel and q not in queued:
                queued.add(q)
                work.append(q)
    return rel, reasons


def _deps(states1, states2, succ1, succ2):
    pred1 = {}
    for s in states1:
        for t in succ1(s):
            pred1.setdefault(t, set()).add(s)
    pred2 = {}
    for s in states2:
        for t in succ2(s):
            pred2.setdefault(t, set()).add(s)

    class _Lazy(dict):
        def get(self, key, default=()):
            t1, t2 = key
            return [(s1, s2) for s1 in pred1.get(t1, ()) for s2 in pred2.get(t2, ())]
    return _Lazy()


def _finish(initial1, initial2, rel, reasons, succ1, succ2):
    holds = True
    failure = None
    for s1 in ordered(initial1):
        if not any((s1, s2) in rel for s2 in initial2):
            holds = False
            if failure is None:
                cands = ordered(initial2)
                if cands:
                    s2 = cands[0]
                    failure = ((s1, s2), reasons.get((s1, s2), "pair not related"))
                else:
                    failure = ((s1, None), "no initial state on the right")
    # restrict to pairs reachable from related initial pairs
    start = [(s1, s2) for s1 in initial1 for s2 in initial2 if (s1, s2) in rel]
    seen = set(start)
    work = deque(start)
    while work:
        s1, s2 = work.popleft()
        for t1 in succ1(s1):
            for t2 in succ2(s2):
                q = (t1, t2)
                if q in rel and q not in seen:
                    seen.add(q)
                    work.append(q)
    return RefinementWitness(holds, frozenset(seen), failure, frozenset(rel))


def _mr_modal(states1, init1, may1, must1, states2, init2, may2, must2, le):
    """Shared engine for DMTS and normal-form nu-expressions (may = box, must = diamond)."""
    succ1 = {s: {t for _, t in may1.get(s, ())} | {t for n in must1.get(s, ()) for _, t in n}
             for s in states1}
    succ2 = {s: {t for _, t in may2.get(s, ())} | {t for n in must2.get(s, ()) for _, t in n}
             for s in states2}

    def check(p, rel):
        s1, s2 = p
        for a1, t1 in may1.get(s1, ()):
            if not any((t1, t2) in rel and le(a1, a2) for a2, t2 in may2.get(s2, ())):
                return f"may {a1} to {canon(t1)} is not matched"
        for n2 in must2.get(s2, ()):
            if not any(all(any((t1, t2) in rel and le(a1, a2) for a2, t2 in n2) for a1, t1 in n1)
                       for n1 in must1.get(s1, ())):
                return "disjunctive must " + canon(frozenset(f"({a},{canon(t)})" for a, t in n2)) \
                    + " is not matched"
        return None

    pairs = itertools.product(states1, states2)
    deps = _deps(states1, states2, succ1.__getitem__, succ2.__getitem__)
    rel, reasons = _gfp(pairs, deps, check)
    return _finish(init1, init2, rel, reasons, succ1.__getitem__, succ2.__getitem__)


def _index_dmts(d):
    may, must = {}, {}
    for s, a, t in d.may:
        may.setdefault(s, []).append((a, t))
    for s, n in d.must:
        must.setdefault(s, []).append(n)
    return may, must


def _index_nu(n):
    may = {x: list(b) for x, b in n.box.items()}
    must = {x: list(ns) for x, ns in n.diamond.items()}
    return may, must


def _as(system, kind):
    if system.kind == "lts":
        return embed_lts(system, kind)
    if system.kind != kind:
        raise StructureMismatchError(f"expected a {kind} system, got {system.kind}")
    return system


def mr_dmts(d1, d2):
    ls = same_structure(d1, d2)
    d1, d2 = _as(d1, "dmts"), _as(d2, "dmts")
    may1, must1 = _index_dmts(d1)
    may2, must2 = _index_dmts(d2)
    return _mr_modal(d1.states, d1.initial, may1, must1, d2.states, d2.initial, may2, must2,
                     _LabelOrder(ls))


def mr_nu(n1, n2):
    ls = same_structure(n1, n2)
    n1, n2 = _as(n1, "nu"), _as(n2, "nu")
    may1, must1 = _index_nu(n1)
    may2, must2 = _index_nu(n2)
    return _mr_modal(n1.vars, n1.initial, may1, must1, n2.vars, n2.initial, may2, must2,
                     _LabelOrder(ls))


def matches(m1, m2, rel, le):
    """``M1 refines M2`` relative to ``rel``: each side's pairs are covered by the other's."""
    for a1, t1 in m1:
        if not any((t1, t2) in rel and le(a1, a2) for a2, t2 in m2):
            return False
    for a2, t2 in m2:
        if not any((t1, t2) in rel and le(a1, a2) for a1, t1 in m1):
            return False
    return True


def mr_aa(a1, a2):
    ls = same_structure(a1, a2)
    a1, a2 = _as(a1, "aa"), _as(a2, "aa")
    le = _LabelOrder(ls)
    tran1 = {s: list(a1.tran.get(s, ())) for s in a1.states}
    tran2 = {s: list(a2.tran.get(s, ())) for s in a2.states}
    succ1 = {s: {t for m in ms for _, t in m} for s, ms in tran1.items()}
    succ2 = {s: {t for m in ms for _, t in m} for s, ms in tran2.items()}

    def check(p, rel):
        s1, s2 = p
        for m1 in tran1[s1]:
            if not any(matches(m1, m2, rel, le) for m2 in tran2[s2]):
                return "admissible set " + canon(frozenset(f"({a},{canon(t)})" for a, t in m1)) \
                    + " has no matching set"
        return None

    deps = _deps(a1.states, a2.states, succ1.__getitem__, succ2.__getitem__)
    rel, reasons = _gfp(itertools.product(a1.states, a2.states), deps, check)
    return _finish(a1.initial, a2.initial, rel, reasons, succ1.__getitem__, succ2.__getitem__)


def refines(s1, s2):
    """Modal refinement for two systems of the same formalism (LTS operands are embedded)."""
    kind = s2.kind if s1.kind == "lts" else s1.kind
    if kind == "lts":
        kind = "dmts"
    if kind == "dmts":
        return mr_dmts(s1, s2)
    if kind == "aa":
        return mr_aa(s1, s2)
    if kind == "nu":
        return mr_nu(s1, s2)
    raise StructureMismatchError(f"no refinement for {kind}")


def mr(s1, s2):
    return refines(s1, s2).holds


def equivalent(s1, s2):
    return mr(s1, s2) and mr(s2, s1)


# -- model checking --------------------------------------------------------------

def nu_semantics(i, n):
    """Greatest fixed point assignment of ``n`` over the states of LTS ``i``.

    A diamond disjunction holds at s if some step s -b-> t has b refining one of
    its labels a with t in the assignment of the paired variable.  The box table
    holds at s if every step s -b-> t is covered by an entry (a, y) with b refining
    a and t in the assignment of y.
    """
    ls = same_structure(i, n)
    le = _LabelOrder(ls)
    steps = {s: i.successors(s) for s in i.states}
    sigma = {x: set(i.states) for x in n.vars}
    changed = True
    while changed:
        changed = False
        for x in ordered(n.vars):
            keep = set()
            for s in sigma[x]:
                ok = all(any(le(b, a) and t in sigma[y] for a, y in nn for b, t in steps[s])
                         for nn in n.diamond[x])
                if ok:
                    ok = all(any(le(b, a) and t in sigma[y] for a, y in n.box[x])
                             for b, t in steps[s])
                if ok:
                    keep.add(s)
            if keep != sigma[x]:
                sigma[x] = keep
                changed = True
    return {x: frozenset(v) for x, v in sigma.items()}


def mc_nu(i, n):
    if i.kind != "lts":
        raise StructureMismatchError("model checking needs an LTS")
    n = translate(n, "nu")
    sigma = nu_semantics(i, n)
    return any(i.initial in sigma[x] for x in n.initial)


# -- bounded implementation enumeration ------------------------------------------

class ImplementationStream:
    """Iterator over enumerated implementations; ``truncated`` is set once the
    enumeration stopped early because of ``limit``."""

    def __init__(self, gen, limit=None):
        self._gen = gen
        self.limit = limit
        self.count = 0
        self.truncated = False

    def __iter__(self):
        for item in self._gen:
            if self.limit is not None and self.count >= self.limit:
                self.truncated = True
                return
            self.count += 1
            yield item


_UNIVERSE_CACHE = {}


def _canonical_order(n, out):
    """True iff breadth-first discovery from state 0 visits 0, 1, ..., n-1 in order."""
    order = [0]
    seen = {0}
    k = 0
    while k < len(order):
        for _, t in out[order[k]]:
            if t not in seen:
                seen.add(t)
                order.append(t)
        k += 1
    return order == list(range(n))


def lts_universe(ls, impl_alphabet, max_states):
    """All LTS over ``impl_alphabet`` with 1..max_states states, all reachable, with
    states numbered in breadth-first discovery order (covers every isomorphism class)."""
    labels = sorted(impl_alphabet, key=lambda a: a.sort_key())
    key = (ls, tuple(labels), max_states)
    if key in _UNIVERSE_CACHE:
        return _UNIVERSE_CACHE[key]
    result = []
    for n in range(1, max_states + 1):
        pairs = [(a, t) for t in range(n) for a in labels]
        pairs.sort(key=lambda p: (p[1], p[0].sort_key()))
        per_state = [tuple(c) for r in range(len(pairs) + 1) for c in itertools.combinations(pairs, r)]
        for outs in itertools.product(per_state, repeat=n):
            if n > 1 and not _canonical_order(n, outs):
                continue
            names = [f"q{j}" for j in range(n)]
            trans = frozenset((names[s], a, names[t]) for s in range(n) for a, t in outs[s])
            result.append(LTS(ls, frozenset(names), names[0], trans))
    _UNIVERSE_CACHE[key] = result
    log.debug("enumerated %d LTS with up to %d states", len(result), max_states)
    return result


def default_impl_alphabet(ls):
    return ls.implementation_labels()


def implementations_upto(s, max_states, impl_alphabet=None, limit=None):
    """Stream the enumerated LTS (up to ``max_states`` states) that modally refine ``s``."""
    impl_alphabet = default_impl_alphabet(s.ls) if impl_alphabet is None else impl_alphabet

    def gen():
        if not s.initials:
            return
        for i in lts_universe(s.ls, impl_alphabet, max_states):
            if refines(i if s.kind != "aa" else embed_lts(i, "aa"), s).holds:
                yield i
    return ImplementationStream(gen(), limit)


@dataclass
class BoundedVerdict:
    holds: bool
    bounded: bool = True
    truncated: bool = False

    def __bool__(self):
        return self.holds


def tr_oracle(s1, s2, max_states, impl_alphabet=None, limit=None):
    """Thorough refinement restricted to the enumerated implementation universe."""
    same_structure(s1, s2)
    stream = implementations_upto(s1, max_states, impl_alphabet, limit)
    target = s2 if s2.kind != "lts" else embed_lts(s2, "dmts")
    holds = True
    for i in stream:
        if not refines(i if target.kind != "aa" else embed_lts(i, "aa"), target).holds:
            holds = False
            break
    return BoundedVerdict(holds, True, stream.truncated)
