import random

import pytest

from qspec import (AA, DMTS, LTS, BudgetError, CapabilityError, Discrete, LabelStructure, compose,
                   conjoin, db, disjoin, is_consistent, lattice_bounds, mr_aa, mr_dmts, prune_inconsistent,
                   quotient, refines, split_divisor, tr_oracle)
from qspec.corpus import discrete_labels, discrete_structure, random_aa, random_dmts, weighted_structure
from qspec.ops import origin
from qspec.refine import lts_universe

L = LabelStructure.discrete(["a", "b"])
A, B = Discrete("a"), Discrete("b")


def sub_aa(rng, a):
    """A refinement of ``a``: keep a non-empty subset of every Tran set."""
    tran = {}
    for s, ms in a.tran.items():
        ms = sorted(ms, key=lambda m: sorted(map(str, m)))
        tran[s] = frozenset(rng.sample(ms, rng.randint(1, len(ms)))) if ms else frozenset()
    return AA(a.ls, a.states, a.initial, tran)


# -- disjunction -------------------------------------------------------------------

def test_disjunction_is_join():
    rng = random.Random(21)
    for _ in range(80):
        ls = discrete_structure(2, rng.randint(0, 1), rng)
        s1, s2, s3 = (random_dmts(rng, ls, rng.randint(1, 3)) for _ in range(3))
        d = disjoin(s1, s2)
        assert mr_dmts(s1, d).holds and mr_dmts(s2, d).holds
        assert mr_dmts(d, s3).holds == (mr_dmts(s1, s3).holds and mr_dmts(s2, s3).holds)


def test_disjunction_implementations():
    # the implementations of a disjunction are exactly those of either side
    rng = random.Random(5)
    ls = discrete_structure(2)
    universe = lts_universe(ls, discrete_labels(ls), 2)
    for _ in range(10):
        s1, s2 = random_dmts(rng, ls, 2), random_dmts(rng, ls, 2)
        d = disjoin(s1, s2)
        for i in universe:
            assert refines(i, d).holds == (refines(i, s1).holds or refines(i, s2).holds)


def test_disjunction_of_aa_and_nu():
    rng = random.Random(8)
    ls = discrete_structure(2)
    a1, a2 = random_aa(rng, ls, 2), random_aa(rng, ls, 2)
    d = disjoin(a1, a2)
    assert d.kind == "aa" and mr_aa(a1, d).holds and mr_aa(a2, d).holds


# -- conjunction -------------------------------------------------------------------

def test_conjunction_is_lower_bound():
    rng = random.Random(22)
    for k in range(80):
        ls = discrete_structure(3, rng.randint(0, 2), rng) if k % 2 else weighted_structure(2)
        s1, s2 = (random_dmts(rng, ls, rng.randint(1, 3)) for _ in range(2))
        c = conjoin(s1, s2)
        assert mr_dmts(c, s1).holds and mr_dmts(c, s2).holds


def test_conjunction_greatest_for_implementations():
    rng = random.Random(9)
    ls = discrete_structure(2)
    universe = lts_universe(ls, discrete_labels(ls), 2)
    for _ in range(10):
        s1, s2 = random_dmts(rng, ls, 2), random_dmts(rng, ls, 2)
        c = conjoin(s1, s2)
        for i in universe:
            if refines(i, s1).holds and refines(i, s2).holds:
                assert refines(i, c).holds


def test_inconsistent_conjunction():
    w = LabelStructure.weighted(["a"])
    d1 = DMTS(w, {"s", "t"}, {"s"}, may={("s", w.label("a[0,1]"), "t")},
              must={("s", frozenset({(w.label("a[0,1]"), "t")}))})
    d2 = DMTS(w, {"s", "t"}, {"s"}, may={("s", w.label("a[3,4]"), "t")})
    c = conjoin(d1, d2)
    assert not is_consistent(db(c))
    pruned = prune_inconsistent(c)
    assert all(not pruned.tran[s] for s in pruned.initial)


# -- composition -------------------------------------------------------------------

def test_composition_is_monotone():
    rng = random.Random(23)
    for _ in range(60):
        ls = discrete_structure(2, 0, rng)
        b1, b2 = random_aa(rng, ls, rng.randint(1, 3)), random_aa(rng, ls, rng.randint(1, 3))
        a1, a2 = sub_aa(rng, b1), sub_aa(rng, b2)
        assert mr_aa(a1, b1).holds and mr_aa(a2, b2).holds
        assert mr_aa(compose(a1, a2), compose(b1, b2)).holds


def test_composition_weighted_plus():
    w = LabelStructure.weighted(["u"])
    a1 = AA(w, {"p", "q"}, {"p"}, {"p": {frozenset({(w.label("u[1,2]"), "q")})}, "q": {frozenset()}})
    a2 = AA(w, {"p", "q"}, {"p"}, {"p": {frozenset({(w.label("u[3,3]"), "q")})}, "q": {frozenset()}})
    c = compose(a1, a2)
    (m,) = c.tran[("p", "p")]
    assert m == {(w.label("u[4,5]"), ("q", "q"))}


def test_composition_with_empty_tran_is_empty():
    a = AA(L, {"s"}, {"s"}, {"s": frozenset()})
    b = AA(L, {"s"}, {"s"}, {"s": {frozenset()}})
    c = compose(a, b)
    assert c.tran[("s", "s")] == frozenset()


# -- consistency and bounds --------------------------------------------------------

def test_prune_keeps_implementations():
    rng = random.Random(24)
    for _ in range(20):
        ls = discrete_structure(2)
        a = random_aa(rng, ls, 3)
        # make one state inconsistent
        tran = dict(a.tran)
        tran["q2"] = frozenset()
        a = AA(ls, a.states, a.initial, tran)
        p = prune_inconsistent(a)
        assert mr_aa(p, a).holds
        assert tr_oracle(a, p, 2).holds and tr_oracle(p, a, 2).holds


def test_lattice_bounds():
    rng = random.Random(25)
    ls = discrete_structure(2, 1, rng)
    bottom, top = lattice_bounds(ls)
    for _ in range(20):
        a = random_aa(rng, ls, 3)
        assert mr_aa(bottom, a).holds
        assert mr_aa(a, top).holds
    w = weighted_structure(2)
    bottom, top = lattice_bounds(w)
    a = random_aa(random.Random(1), w, 3, open_ends=True)
    assert mr_aa(a, top).holds and mr_aa(bottom, a).holds


# -- quotient ----------------------------------------------------------------------

def test_split_divisor_disjoint_and_equivalent():
    rng = random.Random(26)
    for _ in range(30):
        ls = discrete_structure(2)
        a = random_aa(rng, ls, 3, max_sets=3)
        s = split_divisor(a)
        for q, ms in s.tran.items():
            ms = list(ms)
            for i in range(len(ms)):
                for j in range(i + 1, len(ms)):
                    assert not (ms[i] & ms[j])
            assert origin(q) in a.states
        assert mr_aa(s, a).holds and mr_aa(a, s).holds


def test_sender_quotient(sender):
    s, t = sender["s"], sender["t"]
    q = quotient(s, t)
    assert len(q.states) == 6
    assert mr_aa(compose(t, q), db(s)).holds
    p = prune_inconsistent(q)
    assert mr_aa(compose(t, p), db(s)).holds
    for state in p.states:
        if p.tran[state]:
            assert not any((s3, origin(s1)) == ("s2", "t2") for s3, s1 in state.pairs)


def test_quotient_adjunction_discrete():
    rng = random.Random(27)
    done = 0
    while done < 25:
        ls = discrete_structure(2, 0, rng)
        a1, a2, a3 = (random_aa(rng, ls, rng.randint(1, 3), n_init=rng.randint(1, 2)) for _ in range(3))
        try:
            q = quotient(a3, a1)
        except BudgetError:
            continue
        done += 1
        assert mr_aa(compose(a1, a2), a3).holds == mr_aa(a2, q).holds


def test_quotient_of_everything_by_nothing():
    # no divisor initial states: the quotient is the universal specification
    rng = random.Random(3)
    a3 = random_aa(rng, L, 2)
    empty = AA(L, set(), set(), {})
    q = quotient(a3, empty)
    (init,) = q.initial
    assert init.universal
    _, top = lattice_bounds(L)
    assert mr_aa(top, q).holds


def test_quotient_capabilities(monkeypatch):
    sets = LabelStructure.sets(["x", "y"])
    a = AA(sets, {"s"}, {"s"}, {"s": {frozenset()}})
    with pytest.raises(CapabilityError):
        quotient(a, a)
    ls = discrete_structure(3)
    a3 = AA(ls, {"s"}, {"s"}, {"s": {frozenset((Discrete(c), "s") for c in "abc")}})
    with pytest.raises(BudgetError):
        quotient(a3, a3, budget=1)
    monkeypatch.setenv("QSPEC_BUDGET", "1")
    with pytest.raises(BudgetError):
        quotient(a3, a3)


def test_lts_operands():
    i = LTS(L, {"p"}, "p", {("p", A, "p")})
    d = DMTS(L, {"s"}, {"s"}, may={("s", A, "s"), ("s", B, "s")})
    assert mr_dmts(conjoin(i, d), i).holds
    assert refines(i, disjoin(i, i)).holds
