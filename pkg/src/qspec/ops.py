"""Compositional operators: disjunction, conjunction, structural composition,
quotient, consistency pruning and the lattice bounds."""
import itertools
import logging
import os
from collections import deque

from .errors import BudgetError, CapabilityError, StructureMismatchError
from .labels import INF, Interval, Weighted, label_key
from .model import AA, DMTS, NuExpr, QuotientState, canon, ordered, same_structure, translate

log = logging.getLogger(__name__)

DEFAULT_QUOTIENT_BUDGET = 16
DEFAULT_QUOTIENT_STATES = 20_000


def _budget_from_env(default):
    raw = os.environ.get("QSPEC_BUDGET")
    if raw:
        try:
            return int(raw)
        except ValueError:
            log.warning("ignoring non-integer QSPEC_BUDGET=%r", raw)
    return default


def _tag(i, s):
    return (i, s)


# -- disjunction and conjunction --------------------------------------------------

def disjoin(s1, s2):
    """Disjoint union; states are tagged (1, s) and (2, s)."""
    ls = same_structure(s1, s2)
    if s1.kind != s2.kind:
        raise StructureMismatchError("disjunction needs two systems of the same formalism")
    kind = s1.kind
    if kind == "lts":
        s1, s2 = translate(s1, "dmts"), translate(s2, "dmts")
        kind = "dmts"

    def ren(i, s):
        return _tag(i, s)

    states = frozenset(ren(1, s) for s in s1.states) | frozenset(ren(2, s) for s in s2.states)
    initial = frozenset(ren(1, s) for s in s1.initials) | frozenset(ren(2, s) for s in s2.initials)
    if kind == "dmts":
        may = set()
        must = set()
        for i, d in ((1, s1), (2, s2)):
            may |= {(ren(i, s), a, ren(i, t)) for s, a, t in d.may}
            must |= {(ren(i, s), frozenset((a, ren(i, t)) for a, t in n)) for s, n in d.must}
        return DMTS(ls, states, initial, frozenset(may), frozenset(must))
    if kind == "aa":
        tran = {}
        for i, a in ((1, s1), (2, s2)):
            for s, ms in a.tran.items():
                tran[ren(i, s)] = frozenset(frozenset((b, ren(i, t)) for b, t in m) for m in ms)
        return AA(ls, states, initial, tran)
    diamond, box = {}, {}
    for i, n in ((1, s1), (2, s2)):
        for x in n.vars:
            diamond[ren(i, x)] = frozenset(frozenset((a, ren(i, y)) for a, y in nn)
                                           for nn in n.diamond[x])
            box[ren(i, x)] = frozenset((a, ren(i, y)) for a, y in n.box[x])
    return NuExpr(ls, states, initial, diamond, box)


def conjoin(d1, d2):
    """Product of two DMTS; only pairs reachable from initial pairs are built."""
    ls = same_structure(d1, d2)
    kind = d1.kind
    d1, d2 = translate(d1, "dmts"), translate(d2, "dmts")
    may1 = {s: d1.may_from(s) for s in d1.states}
    may2 = {s: d2.may_from(s) for s in d2.states}
    must1 = {s: d1.must_from(s) for s in d1.states}
    must2 = {s: d2.must_from(s) for s in d2.states}
    conj_cache = {}

    def conj(a, b):
        key = (a, b)
        if key not in conj_cache:
            conj_cache[key] = ls.conj(a, b)
        return conj_cache[key]

    initial = frozenset(itertools.product(d1.initial, d2.initial))
    seen = set(initial)
    work = deque(ordered(initial))
    may, must = set(), set()
    while work:
        p = work.popleft()
        s1, s2 = p
        succ = set()
        for a1, t1 in may1[s1]:
            for a2, t2 in may2[s2]:
                c = conj(a1, a2)
                if c is not None:
                    may.add((p, c, (t1, t2)))
                    succ.add((t1, t2))
        for n1 in must1[s1]:
            n = set()
            for a1, t1 in n1:
                for a2, t2 in may2[s2]:
                    c = conj(a1, a2)
                    if c is not None:
                        n.add((c, (t1, t2)))
            must.add((p, frozenset(n)))
            succ |= {t for _, t in n}
        for n2 in must2[s2]:
            n = set()
            for a2, t2 in n2:
                for a1, t1 in may1[s1]:
                    c = conj(a1, a2)
                    if c is not None:
                        n.add((c, (t1, t2)))
            must.add((p, frozenset(n)))
            succ |= {t for _, t in n}
        for q in ordered(succ):
            if q not in seen:
                seen.add(q)
                work.append(q)
    out = DMTS(ls, frozenset(seen), initial, frozenset(may), frozenset(must))
    return translate(out, kind) if kind in ("aa", "nu") else out


# -- structural composition ---------------------------------------------------------

def sync_sets(m1, m2, ls, cache=None):
    out = set()
    for a1, t1 in m1:
        for a2, t2 in m2:
            if cache is not None:
                key = (a1, a2)
                c = cache.get(key, key)
                if c is key:
                    c = cache[key] = ls.sync(a1, a2)
            else:
                c = ls.sync(a1, a2)
            if c is not None:
                out.add((c, (t1, t2)))
    return frozenset(out)


def _warn_sync(ls):
    if not ls.sync_monotone:
        log.warning("csp synchronization over a non-trivial label order is not monotone; "
                    "composition and quotient laws may fail")


def compose(a1, a2):
    """Structural composition of acceptance automata (other formalisms are translated)."""
    ls = same_structure(a1, a2)
    _warn_sync(ls)
    a1, a2 = translate(a1, "aa"), translate(a2, "aa")
    cache = {}
    initial = frozenset(itertools.product(a1.initial, a2.initial))
    seen = set(initial)
    work = deque(ordered(initial))
    tran = {}
    while work:
        p = work.popleft()
        s1, s2 = p
        ms = frozenset(sync_sets(m1, m2, ls, cache)
                       for m1 in a1.tran[s1] for m2 in a2.tran[s2])
        tran[p] = ms
        for m in ms:
            for _, t in m:
                if t not in seen:
                    seen.add(t)
                    work.append(t)
    return AA(ls, frozenset(seen), initial, tran)


# -- lattice bounds -----------------------------------------------------------------

TOP_STATE = "top"


def universal_tran(ls, state):
    """All subsets of (top label) x {state}; every label refines some top label."""
    tops = sorted(ls.tops(), key=label_key)
    return frozenset(frozenset((a, state) for a in combo)
                     for r in range(len(tops) + 1) for combo in itertools.combinations(tops, r))


def lattice_bounds(ls):
    bottom = AA(ls, frozenset(), frozenset(), {})
    top = AA(ls, frozenset({TOP_STATE}), frozenset({TOP_STATE}),
             {TOP_STATE: universal_tran(ls, TOP_STATE)})
    return bottom, top


# -- consistency pruning --------------------------------------------------------------

def prune_inconsistent(a):
    """Drop admissible sets leading to inconsistent states, repeat, then drop
    unreachable states.  Initial states that end up inconsistent are kept."""
    a = translate(a, "aa")
    tran = {s: set(a.tran.get(s, ())) for s in a.states}
    bad = {s for s, ms in tran.items() if not ms}
    changed = True
    while changed:
        changed = False
        for s, ms in tran.items():
            if s in bad:
                continue
            keep = {m for m in ms if not any(t in bad for _, t in m)}
            if keep != ms:
                tran[s] = keep
                changed = True
                if not keep:
                    bad.add(s)
    seen = set(a.initial)
    work = deque(ordered(a.initial))
    while work:
        s = work.popleft()
        for m in tran[s]:
            for _, t in m:
                if t not in seen:
                    seen.add(t)
                    work.append(t)
    stuck = [s for s in a.initial if not tran[s]]
    if stuck:
        log.warning("initial states %s are inconsistent", ", ".join(canon(s) for s in ordered(stuck)))
    return AA(a.ls, frozenset(seen), a.initial, {s: frozenset(tran[s]) for s in seen})


def inconsistent_initials(a):
    """Initial states with no admissible set (nothing can implement the system from them)."""
    return frozenset(s for s in a.initial if not a.tran.get(s))


def is_consistent(a):
    """True iff some initial state survives pruning."""
    pruned = prune_inconsistent(a)
    return any(pruned.tran.get(s) for s in pruned.initial)


# -- quotient -------------------------------------------------------------------------

def split_divisor(a):
    """Make the admissible sets of every state pairwise disjoint by giving each set
    its own copies of the target states.  The result is equivalent to ``a``.

    A copy of ``t`` reached through set number j of state ``o`` is named
    ``(t, (o, j))``; see :func:`origin`.
    """
    def needs_split(o):
        ms = list(a.tran.get(o, ()))
        return any(m1 & m2 for m1, m2 in itertools.combinations(ms, 2))

    split = {o: needs_split(o) for o in a.states}
    if not any(split.values()):
        return a

    def out_sets(o):
        ms = sorted(a.tran.get(o, ()), key=lambda m: canon(frozenset(f"{lab}>{canon(t)}" for lab, t in m)))
        if not split[o]:
            return frozenset(ms)
        return frozenset(frozenset((lab, _Copy(t, o, j)) for lab, t in m) for j, m in enumerate(ms))

    states = set(a.initial)
    tran = {}
    work = deque(ordered(a.initial))
    while work:
        q = work.popleft()
        ms = out_sets(origin(q))
        tran[q] = ms
        for m in ms:
            for _, t in m:
                if t not in states:
                    states.add(t)
                    work.append(t)
    return AA(a.ls, frozenset(states), a.initial, tran)


class _Copy(tuple):
    __slots__ = ()

    def __new__(cls, t, o, j):
        return super().__new__(cls, (t, (o, j)))

    def __str__(self):
        return f"{canon(self[0])}#{canon(self[1][0])}.{self[1][1]}"


def origin(q):
    """The original divisor state behind a state produced by :func:`split_divisor`."""
    while isinstance(q, _Copy):
        q = q[0]
    return q


def _weighted_candidates(ls, intervals_by_action):
    """Intervals whose endpoints are drawn from the given intervals' endpoints (and
    the points just beyond them), i.e. closed under intersection and complement pieces."""
    out = []
    for u in sorted(intervals_by_action):
        lows = {(-INF, True)}
        highs = {(INF, True)}
        for iv in intervals_by_action[u]:
            lows.add((iv.lo, iv.lo_open))
            highs.add((iv.hi, iv.hi_open))
            if iv.hi != INF:
                lows.add((iv.hi, not iv.hi_open))
            if iv.lo != -INF:
                highs.add((iv.lo, not iv.lo_open))
        for (lo, lo_open), (hi, hi_open) in itertools.product(sorted(lows), sorted(highs)):
            iv = Interval.make(lo, hi, lo_open, hi_open)
            if iv is not None:
                out.append(Weighted(u, iv))
    return out


class _QuotientBuilder:

    def __init__(self, a3, a1, budget, max_states):
        self.ls = a3.ls
        self.a3 = a3
        self.a1 = a1
        self.budget = budget
        self.max_states = max_states
        self._sync = {}
        self._le = {}

    def sync(self, a, b):
        key = (a, b)
        if key not in self._sync:
            self._sync[key] = self.ls.sync(a, b)
        return self._sync[key]

    def le(self, a, b):
        key = (a, b)
        if key not in self._le:
            self._le[key] = self.ls.refines(a, b)
        return self._le[key]

    def candidates(self, positions, s3s):
        ls = self.ls
        if ls.kind == "discrete":
            return ls.finite_labels()
        if ls.kind != "weighted":
            raise CapabilityError(f"quotient is not supported for {ls.kind} labels "
                                  f"with {ls.sync_op} synchronization")
        if ls.sync_op == "csp":
            return sorted({a1 for _, a1, _ in positions} | set(ls.tops()), key=label_key)
        by_action = {}
        a3s = {a3 for s3 in s3s for m in self.a3.tran[s3] for a3, _ in m}
        for _, a1, _ in positions:
            by_action.setdefault(a1.action, set()).add(a1.interval)
        for a3 in a3s:
            by_action.setdefault(a3.action, set()).add(a3.interval)
        for i, a1, _ in positions:
            for m in self.a3.tran[s3s[i]]:
                for a3, _ in m:
                    for r in ls.residuals(a1, a3):
                        by_action[r.action].add(r.interval)
        for u in ls.alphabet:
            by_action.setdefault(u, set())
        return _weighted_candidates(ls, by_action)

    def state_tran(self, s):
        """Compute Tran of quotient state ``s`` (a QuotientState)."""
        a3, a1 = self.a3, self.a1
        pairs = sorted(s.pairs, key=canon)
        s3s = [p[0] for p in pairs]
        s1s = [p[1] for p in pairs]
        positions = []
        for i, s1 in enumerate(s1s):
            seen = set()
            for m in a1.tran[s1]:
                for lab, t1 in m:
                    if (lab, t1) not in seen:
                        seen.add((lab, t1))
                        positions.append((i, lab, t1))
        positions.sort(key=lambda p: (p[0], label_key(p[1]), canon(p[2])))
        # (a3, t3) options per dividend component
        options3 = [sorted({p for m in a3.tran[s3] for p in m}, key=lambda p: (label_key(p[0]), canon(p[1])))
                    for s3 in s3s]

        # signature of a candidate: defined positions and the (position, a3, t3) it may use
        sigs = {}
        for x in self.candidates(positions, s3s):
            defined = []
            good = []
            ok = True
            for k, (i, lab1, t1) in enumerate(positions):
                c = self.sync(lab1, x)
                if c is None:
                    continue
                defined.append(k)
                opts = [(a, t3) for a, t3 in options3[i] if self.le(c, a)]
                if not opts:
                    ok = False
                    break
                good.extend((k, a, t3) for a, t3 in opts)
            if not ok:
                continue
            sig = (tuple(defined), frozenset(good))
            sigs.setdefault(sig, []).append(x)
        perm = []
        for sig, xs in sigs.items():
            for x in xs:
                if not any(y != x and self.le(x, y) for y in xs):
                    perm.append((x, sig))
        perm.sort(key=lambda e: label_key(e[0]))

        # postra: one next state per way of choosing a t3 for every defined position
        postra = []
        for x, (defined, good) in perm:
            choices = []
            for k in defined:
                i, lab1, t1 = positions[k]
                c = self.sync(lab1, x)
                t3s = sorted({t3 for a, t3 in options3[i] if self.le(c, a)}, key=canon)
                choices.append([(t3, t1) for t3 in t3s])
            for combo in itertools.product(*choices):
                postra.append((x, QuotientState(frozenset(combo))))
        postra = sorted(set(postra), key=lambda e: (label_key(e[0]), canon(e[1])))
        return self._admissible(postra, pairs)

    def _admissible(self, postra, pairs):
        a3, a1 = self.a3, self.a1
        n = len(postra)
        constraints = []  # per (i, M1): list of (allowed mask, cover masks)
        for i, (s3, s1) in enumerate(pairs):
            for m1 in a1.tran[s1]:
                alts = []
                for m3 in a3.tran[s3]:
                    allowed = 0
                    for u, (x, t) in enumerate(postra):
                        fine = True
                        for lab1, t1 in m1:
                            c = self.sync(lab1, x)
                            if c is None:
                                continue
                            if not any(self.le(c, lab3) and (t3, t1) in t.pairs for lab3, t3 in m3):
                                fine = False
                                break
                        if fine:
                            allowed |= 1 << u
                    covers = []
                    for lab3, t3 in m3:
                        cover = 0
                        for u, (x, t) in enumerate(postra):
                            for lab1, t1 in m1:
                                c = self.sync(lab1, x)
                                if c is not None and (t3, t1) in t.pairs and self.le(c, lab3):
                                    cover |= 1 << u
                                    break
                        covers.append(cover & allowed)
                    if all(covers):
                        alts.append((allowed, covers))
                if not alts:
                    return frozenset(), postra
                constraints.append(alts)
        usable = (1 << n) - 1
        for alts in constraints:
            union = 0
            for allowed, _ in alts:
                union |= allowed
            usable &= union
        idx = [u for u in range(n) if usable >> u & 1]
        if len(idx) > self.budget:
            raise BudgetError(f"quotient state needs subsets of {len(idx)} transitions "
                              f"(budget {self.budget})")
        result = []
        for r in range(len(idx) + 1):
            for combo in itertools.combinations(idx, r):
                mask = 0
                for u in combo:
                    mask |= 1 << u
                if all(any(mask & ~allowed == 0 and all(mask & cv for cv in covers)
                           for allowed, covers in alts) for alts in constraints):
                    result.append(frozenset(postra[u] for u in combo))
        return frozenset(result), postra

    def build(self):
        ls = self.ls
        init3 = ordered(self.a3.initial)
        init1 = ordered(self.a1.initial)
        if not init1:
            initial = [QuotientState(frozenset())]
        else:
            initial = [QuotientState(frozenset(zip(choice, init1)))
                       for choice in itertools.product(init3, repeat=len(init1))]
        tran = {}
        seen = set(initial)
        work = deque(initial)
        while work:
            s = work.popleft()
            if s.universal:
                tran[s] = universal_tran(ls, s)
                continue
            ms, _ = self.state_tran(s)
            tran[s] = ms
            for m in ms:
                for _, t in m:
                    if t not in seen:
                        seen.add(t)
                        work.append(t)
                        if len(seen) > self.max_states:
                            raise BudgetError(f"quotient exceeds {self.max_states} states")
        return AA(ls, frozenset(seen), frozenset(initial), tran)


def quotient(a3, a1, split=True, budget=None, max_states=DEFAULT_QUOTIENT_STATES):
    """The most permissive specification whose composition with ``a1`` refines ``a3``.

    States are :class:`QuotientState` sets of (dividend, divisor) pairs.  With
    ``split`` the divisor is first made to have pairwise disjoint admissible sets.
    """
    ls = same_structure(a3, a1)
    _warn_sync(ls)
    if ls.kind == "set":
        raise CapabilityError(f"quotient is not supported for set labels with {ls.sync_op} synchronization")
    budget = _budget_from_env(DEFAULT_QUOTIENT_BUDGET) if budget is None else budget
    a3, a1 = translate(a3, "aa"), translate(a1, "aa")
    if split:
        a1 = split_divisor(a1)
    return _QuotientBuilder(a3, a1, budget, max_states).build()


def quotient_postra(a3, a1, state, split=True):
    """Debugging aid: the (label, next state) pairs available at one quotient state."""
    same_structure(a3, a1)
    a3, a1 = translate(a3, "aa"), translate(a1, "aa")
    if split:
        a1 = split_divisor(a1)
    _, postra = _QuotientBuilder(a3, a1, DEFAULT_QUOTIENT_BUDGET, DEFAULT_QUOTIENT_STATES).state_tran(state)
    return postra
