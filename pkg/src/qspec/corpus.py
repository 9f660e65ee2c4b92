"""Seeded random generators for small label structures and systems."""
import random

from .labels import Discrete, Interval, LabelStructure, Weighted
from .model import AA, DMTS, LTS


def discrete_structure(n_symbols=3, ordered_pairs=0, rng=None):
    """Discrete labels a, b, c, ...; optionally a few order facts x <= y."""
    rng = rng or random.Random(0)
    names = [chr(ord("a") + k) for k in range(n_symbols)]
    order = set()
    for _ in range(ordered_pairs):
        lo, hi = rng.sample(range(n_symbols), 2)
        lo, hi = min(lo, hi), max(lo, hi)
        order.add((names[lo], names[hi]))
    return LabelStructure.discrete(names, order)


def weighted_structure(n_actions=2, sync_op="plus"):
    return LabelStructure.weighted([chr(ord("a") + k) for k in range(n_actions)], sync_op)


def random_interval(rng, lo=0, hi=4, open_ends=False):
    while True:
        a, b = sorted(rng.randint(lo, hi) for _ in range(2))
        lo_open = open_ends and rng.random() < 0.3
        hi_open = open_ends and rng.random() < 0.3
        iv = Interval.make(a, b, lo_open, hi_open)
        if iv is not None:
            return iv


def random_label(rng, ls, implementation=False, open_ends=False, span=4):
    if ls.kind == "weighted":
        u = rng.choice(sorted(ls.alphabet))
        if implementation:
            return Weighted(u, Interval.point(rng.randint(0, span)))
        return Weighted(u, random_interval(rng, 0, span, open_ends))
    pool = ls.implementation_labels() if implementation else ls.finite_labels()
    return rng.choice(pool)


def random_below(rng, ls, label):
    """A random label refining ``label``."""
    if ls.kind == "weighted":
        iv = label.interval
        if rng.random() < 0.5 or iv.is_point:
            return label
        lo, hi = iv.lo, iv.hi
        a, b = sorted(rng.uniform(lo, hi) for _ in range(2))
        a, b = round(a), round(b)
        sub = Interval.make(max(a, lo), min(b, hi))
        if sub is None or not sub.issubset(iv):
            return label
        return Weighted(label.action, sub)
    below = [x for x in ls.finite_labels() if ls.refines(x, label)]
    return rng.choice(below)


def random_dmts(rng, ls, n_states=3, max_out=3, must_prob=0.5, n_init=1, open_ends=False,
                span=4, prefix="s"):
    states = [f"{prefix}{k}" for k in range(n_states)]
    may = set()
    must = set()
    for s in states:
        outs = []
        for _ in range(rng.randint(0, max_out)):
            e = (random_label(rng, ls, open_ends=open_ends, span=span), rng.choice(states))
            outs.append(e)
            may.add((s, e[0], e[1]))
        while outs and rng.random() < must_prob:
            k = rng.randint(1, min(2, len(outs)))
            n = frozenset((random_below(rng, ls, a), t) for a, t in rng.sample(outs, k))
            must.add((s, n))
            must_prob /= 2
    init = rng.sample(states, min(n_init, n_states))
    return DMTS(ls, frozenset(states), frozenset(init), frozenset(may), frozenset(must))


def random_aa(rng, ls, n_states=3, max_sets=2, max_size=2, n_init=1, open_ends=False, span=4,
              implementation_labels=False, prefix="q"):
    states = [f"{prefix}{k}" for k in range(n_states)]
    tran = {}
    for s in states:
        ms = set()
        for _ in range(rng.randint(1, max_sets)):
            m = frozenset((random_label(rng, ls, implementation_labels, open_ends, span), rng.choice(states))
                          for _ in range(rng.randint(0, max_size)))
            ms.add(m)
        tran[s] = frozenset(ms)
    init = rng.sample(states, min(n_init, n_states))
    return AA(ls, frozenset(states), frozenset(init), tran)


def random_lts(rng, ls, n_states=3, max_out=2, span=4, prefix="p"):
    states = [f"{prefix}{k}" for k in range(n_states)]
    trans = set()
    for s in states:
        for _ in range(rng.randint(0, max_out)):
            trans.add((s, random_label(rng, ls, implementation=True, span=span), rng.choice(states)))
    return LTS(ls, frozenset(states), states[0], frozenset(trans))


def discrete_labels(ls):
    return [Discrete(s) for s in sorted(ls.alphabet)]
