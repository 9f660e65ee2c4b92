"""Refinement distances over the extended non-negative reals.

Values live in [0, inf]; the bottom element 0 means "refines", inf means "cannot
be matched at all".  Conventions used throughout: the supremum of an empty set
is 0 and the infimum of an empty set is inf.
"""
import json
import logging
import math
from dataclasses import dataclass
from typing import Callable

from .errors import CapabilityError, StructureMismatchError
from .model import canon, embed_lts, ordered, same_structure
from .refine import default_impl_alphabet, implementations_upto

log = logging.getLogger(__name__)

INF = math.inf
BOTTOM = 0.0
TOP = INF
DEFAULT_TOL = 1e-9
METRICS = ("discrete", "pointwise", "discounting")


def sup(values):
    return max(values, default=BOTTOM)


def inf(values):
    return min(values, default=TOP)


@dataclass(frozen=True)
class TraceDistanceSpec:
    """A recursively specified trace distance: ``F(a, b, alpha)`` is the distance of
    two traces starting with labels a and b whose tails are alpha apart."""
    metric: str
    lam: float = 0.0
    recursively_separating: bool = True

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.metric == "discounting":
            if not (0.0 <= self.lam < 1.0):
                raise ValueError(f"discount factor must lie in [0, 1), got {self.lam}")

    def label_term(self, a, b, ls):
        """The label part d used inside F (inf blocks the step entirely)."""
        if self.metric == "discrete":
            return 0.0 if ls.refines(a, b) else INF
        return ls.distance(a, b)

    def combine(self, d, alpha):
        if self.metric == "discounting":
            if self.lam == 0.0 or d == INF:
                return d
            return d + self.lam * alpha
        return max(d, alpha)

    def F(self, a, b, alpha, ls):
        return self.combine(self.label_term(a, b, ls), alpha)

    def eval(self, value):
        return value

    def plus(self, x, y):
        """Quantale addition matching the metric (max for pointwise)."""
        if self.metric == "pointwise":
            return max(x, y)
        return x + y


def make_metric(kind, lam=None, **params):
    if kind == "discounting":
        if lam is None:
            lam = params.get("lambda", 0.9)
        return TraceDistanceSpec("discounting", float(lam))
    if lam not in (None, 0, 0.0):
        log.warning("discount factor ignored for the %s metric", kind)
    return TraceDistanceSpec(kind)


@dataclass
class DistanceTable:
    values: dict
    converged: bool
    error_bound: float
    rounds: int = 0
    metric: TraceDistanceSpec = None
    initial_left: frozenset = frozenset()
    initial_right: frozenset = frozenset()

    def __getitem__(self, pair):
        return self.values[pair]

    def value(self):
        return sup(inf(self.values[(s1, s2)] for s2 in self.initial_right)
                   for s1 in self.initial_left)

    def to_json(self):
        def num(v):
            return "inf" if v == INF else v
        rows = [{"left": canon(s1), "right": canon(s2), "value": num(v)}
                for (s1, s2), v in sorted(self.values.items(), key=lambda kv: (canon(kv[0][0]), canon(kv[0][1])))]
        return json.dumps({"pairs": rows, "converged": self.converged,
                           "error_bound": num(self.error_bound), "rounds": self.rounds,
                           "value": num(self.value())}, indent=2, sort_keys=True)


# -- equation compilation --------------------------------------------------------------
#
# A leaf is (d, q): label term d and the index q of the successor pair.  The
# DMTS / nu equations for a pair are
#   max( sup_{may1} inf_{may2} F,  sup_{must2} inf_{must1} sup_{N1} inf_{N2} F )
# and the AA equations are
#   sup_{M1} inf_{M2} max( sup_{M1} inf_{M2} F, sup_{M2} inf_{M1} F ).

class _Compiler:

    def __init__(self, metric, ls):
        self.metric = metric
        self.ls = ls
        self.d = {}
        self.index = {}
        self.pairs = []

    def label_term(self, a, b):
        key = (a, b)
        if key not in self.d:
            self.d[key] = self.metric.label_term(a, b, self.ls)
        return self.d[key]

    def pair(self, t1, t2):
        p = (t1, t2)
        q = self.index.get(p)
        if q is None:
            q = self.index[p] = len(self.pairs)
            self.pairs.append(p)
        return q

    def leaves(self, src, dst):
        """sup over src of inf over dst, as a list of leaf lists."""
        return [[(self.label_term(a1, a2), self.pair(t1, t2)) for a2, t2 in dst] for a1, t1 in src]

    def leaves_rev(self, src, dst):
        """sup over dst-side pairs (a2, t2) of inf over src-side pairs (a1, t1)."""
        return [[(self.label_term(a1, a2), self.pair(t1, t2)) for a1, t1 in src] for a2, t2 in dst]


def _compile(s1, s2, metric):
    ls = same_structure(s1, s2)
    kind = s1.kind
    comp = _Compiler(metric, ls)
    for a in ordered(s1.initials):
        for b in ordered(s2.initials):
            comp.pair(a, b)
    terms = []
    k = 0
    if kind in ("dmts", "nu"):
        if kind == "dmts":
            may1 = {s: sorted_edges(s1.may_from(s)) for s in s1.states}
            may2 = {s: sorted_edges(s2.may_from(s)) for s in s2.states}
            must1 = {s: [sorted_edges(n) for n in s1.must_from(s)] for s in s1.states}
            must2 = {s: [sorted_edges(n) for n in s2.must_from(s)] for s in s2.states}
        else:
            may1 = {x: sorted_edges(s1.box[x]) for x in s1.vars}
            may2 = {x: sorted_edges(s2.box[x]) for x in s2.vars}
            must1 = {x: [sorted_edges(n) for n in s1.diamond[x]] for x in s1.vars}
            must2 = {x: [sorted_edges(n) for n in s2.diamond[x]] for x in s2.vars}
        while k < len(comp.pairs):
            p1, p2 = comp.pairs[k]
            a = comp.leaves(may1[p1], may2[p2])
            b = [[comp.leaves(n1, n2) for n1 in must1[p1]] for n2 in must2[p2]]
            terms.append(("modal", a, b))
            k += 1
    elif kind == "aa":
        tran1 = {s: [sorted_edges(m) for m in s1.tran[s]] for s in s1.states}
        tran2 = {s: [sorted_edges(m) for m in s2.tran[s]] for s in s2.states}
        while k < len(comp.pairs):
            p1, p2 = comp.pairs[k]
            t = [[(comp.leaves(m1, m2), comp.leaves_rev(m1, m2)) for m2 in tran2[p2]] for m1 in tran1[p1]]
            terms.append(("aa", t))
            k += 1
    else:
        raise StructureMismatchError(f"no refinement distance for {kind}")
    finite = [v for v in comp.d.values() if v != INF]
    return comp.pairs, terms, max(finite, default=0.0)


def sorted_edges(edges):
    return sorted(edges, key=lambda p: (p[0].sort_key(), canon(p[1])))


def _iterate(pairs, terms, metric, tol, dmax, max_rounds):
    n = len(pairs)
    table = [BOTTOM] * n
    discount = metric.metric == "discounting"
    lam = metric.lam
    combine = metric.combine

    def supinf(groups, cur):
        best = BOTTOM
        for group in groups:
            low = TOP
            for d, q in group:
                v = combine(d, cur[q])
                if v < low:
                    low = v
                    if low <= best:
                        break
            if low > best:
                best = low
                if best == TOP:
                    break
        return best

    rounds = 0
    error = INF
    while True:
        rounds += 1
        new = [0.0] * n
        for k, term in enumerate(terms):
            if term[0] == "modal":
                _, a, b = term
                v = supinf(a, table)
                if v < TOP:
                    for n1s in b:
                        low = TOP
                        for groups in n1s:
                            w = supinf(groups, table)
                            if w < low:
                                low = w
                        if low > v:
                            v = low
                            if v == TOP:
                                break
            else:
                v = BOTTOM
                for row in term[1]:
                    low = TOP
                    for fwd, bwd in row:
                        w = supinf(fwd, table)
                        if w < low:
                            w2 = supinf(bwd, table)
                            w = max(w, w2)
                        if w < low:
                            low = w
                    if low > v:
                        v = low
                        if v == TOP:
                            break
            new[k] = v
        if new == table:
            return new, True, 0.0, rounds
        table = new
        if discount and rounds > n:
            error = (lam ** rounds) * dmax / (1.0 - lam)
            if error < tol:
                return table, True, error, rounds
        if rounds >= max_rounds:
            log.warning("distance iteration stopped after %d rounds", rounds)
            return table, False, error, rounds


def _align(s1, s2):
    if s1.kind == "lts" and s2.kind == "lts":
        return embed_lts(s1, "dmts"), embed_lts(s2, "dmts")
    if s1.kind == "lts":
        return embed_lts(s1, s2.kind), s2
    if s2.kind == "lts":
        return s1, embed_lts(s2, s1.kind)
    if s1.kind != s2.kind:
        raise StructureMismatchError(f"cannot measure {s1.kind} against {s2.kind}")
    return s1, s2


def refinement_distance(s1, s2, metric, tol=DEFAULT_TOL, max_rounds=1_000_000):
    """Least fixed point of the refinement-distance equations by Kleene iteration.

    Returns ``(value, table)``.  For the discrete and point-wise metrics the
    iteration stops when a round changes nothing; the discounting metric stops once
    the remaining error is provably below ``tol`` (the returned value is a lower
    bound on the exact one, at most ``table.error_bound`` below it).
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    s1, s2 = _align(s1, s2)
    pairs, terms, dmax = _compile(s1, s2, metric)
    values, converged, error, rounds = _iterate(pairs, terms, metric, tol, dmax, max_rounds)
    table = DistanceTable(dict(zip(pairs, values)), converged, error, rounds, metric,
                          frozenset(s1.initials), frozenset(s2.initials))
    return metric.eval(table.value()), table


def distance(s1, s2, metric, tol=DEFAULT_TOL):
    return refinement_distance(s1, s2, metric, tol)[0]


def relaxed_membership(i, s, alpha, metric, tol=DEFAULT_TOL):
    """Is ``i`` an implementation of ``s`` up to ``alpha``?"""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if alpha == INF:
        return True
    value, table = refinement_distance(i, s, metric, tol)
    if abs(value - alpha) <= max(tol, table.error_bound):
        log.info("distance %.12g is within tolerance of the threshold %.12g", value, alpha)
    return value <= alpha


@dataclass
class BoundedValue:
    value: float
    bounded: bool = True
    truncated: bool = False

    def __float__(self):
        return float(self.value)


def thorough_distance_oracle(s1, s2, metric, max_states, impl_alphabet=None, tol=DEFAULT_TOL,
                             limit=None):
    """sup over enumerated implementations of s1 of inf over enumerated
    implementations of s2 of their distance (a bounded approximation)."""
    same_structure(s1, s2)
    impl_alphabet = default_impl_alphabet(s1.ls) if impl_alphabet is None else impl_alphabet
    left = implementations_upto(s1, max_states, impl_alphabet, limit)
    right_stream = implementations_upto(s2, max_states, impl_alphabet, limit)
    right = list(right_stream)
    best = BOTTOM
    for i1 in left:
        low = TOP
        for i2 in right:
            v = distance(i1, i2, metric, tol)
            if v < low:
                low = v
                if low <= best:
                    break
        if low > best:
            best = low
    return BoundedValue(best, True, left.truncated or right_stream.truncated)


def composition_bound_P(metric, sync_op) -> Callable[[float, float], float]:
    """Uniform bound on distances of composed systems in terms of the operands' distances."""
    m = metric.metric
    if sync_op == "plus" and m in ("discounting", "pointwise"):
        return lambda a, b: a + b
    if sync_op == "csp" and m == "discrete":
        return max
    raise CapabilityError(f"no composition bound for the {m} metric with {sync_op} synchronization")


def witness_family(table, alpha):
    """The pairs whose distance is at most ``alpha``."""
    return frozenset(p for p, v in table.values.items() if v <= alpha)
