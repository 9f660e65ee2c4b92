"""Acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line (also collected into the end-of-run
summary) and then asserts.  Run as a script for just the lines:
``python tests/test_acceptance.py``.
"""
import math
import random
import sys
import time

import pytest

from qspec import (BudgetError, CapabilityError, bd, compose, composition_bound_P, conjoin, db, ddh,
                   disjoin, hd, make_metric, mc_nu, mr_aa, mr_dmts, mr_nu, parse_spec,
                   prune_inconsistent, quotient, refinement_distance, refines, relaxed_membership,
                   thorough_distance_oracle)
from qspec.corpus import discrete_labels, discrete_structure, random_aa, random_dmts, weighted_structure
from qspec.ops import origin
from qspec.refine import lts_universe

import conftest
from conftest import spec_path

INF = math.inf


def report(n, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {title} ({detail})"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def close(a, b, tol):
    return a == b or abs(a - b) <= tol


def load(name):
    from qspec import load_spec
    return load_spec([spec_path(name)])


def test_vending_refinement():
    t0 = time.perf_counter()
    doc = load("vending.qs")
    with_order = refines(doc["t"], doc["s"]).holds
    with open(spec_path("vending.qs")) as fh:
        text = fh.read()
    assert ", beer <= beverage" in text
    without = parse_spec(text.replace(", beer <= beverage", ""))
    without_order = refines(without["t"], without["s"]).holds
    elapsed = time.perf_counter() - t0
    ok = with_order and not without_order and elapsed < 1
    assert report(1, "vending refinement flips with the beer order fact", ok,
                  f"with={with_order}, without={without_order}, {elapsed:.3f}s")


def test_request_grant():
    t0 = time.perf_counter()
    doc = load("grants.qs")
    r1 = mc_nu(doc["i1"], doc["xnu"])
    r2 = mc_nu(doc["i2"], doc["xnu"])
    r3 = mr_dmts(doc["xprime"], doc["x"]).holds
    elapsed = time.perf_counter() - t0
    ok = r1 and not r2 and not r3 and elapsed < 1
    assert report(2, "request/grant model checking and refinement", ok,
                  f"mc(i1)={r1}, mc(i2)={r2}, mr(x',x)={r3}, {elapsed:.3f}s")


def test_discounted_distance():
    t0 = time.perf_counter()
    doc = load("grants.qs")
    got = []
    ok = True
    for lam in (0.5, 0.9, 0.99):
        m = make_metric("discounting", lam)
        want = lam / (1 - lam)
        for left, right in (("x", "xprime"), ("xprime", "x")):
            v = refinement_distance(doc[left], doc[right], m)[0]
            got.append(v)
            ok = ok and close(v, want, 1e-6)
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 1
    assert report(3, "discounted distance equals lambda/(1-lambda)", ok,
                  ", ".join(f"{v:.9f}" for v in got) + f", {elapsed:.3f}s")


def test_conjunction_defect():
    t0 = time.perf_counter()
    doc = load("conflict.qs")
    pw = make_metric("pointwise")
    i, d1, d2 = doc["I"], doc["D1"], doc["D2"]
    both = conjoin(d1, d2)
    dists = [refinement_distance(i, s, pw)[0] for s in (d1, d2, both)]
    members = [relaxed_membership(i, s, 1, pw) for s in (d1, d2, both)]
    elapsed = time.perf_counter() - t0
    ok = dists == [1.0, 1.0, INF] and members == [True, True, False] and elapsed < 1
    assert report(4, "pointwise distances 1, 1, inf and relaxed membership", ok,
                  f"distances={dists}, members={members}, {elapsed:.3f}s")


def test_sender_quotient():
    t0 = time.perf_counter()
    doc = load("sender.qs")
    s, t = doc["s"], doc["t"]
    q = quotient(s, t)
    pruned = prune_inconsistent(q)
    reachable_by_may = {u for ms in pruned.tran.values() for m in ms for _, u in m}
    offending = [st for st in pruned.states
                 if st in reachable_by_may and pruned.tran[st]
                 and any((s3, origin(s1)) == ("s2", "t2") for s3, s1 in st.pairs)]
    holds = mr_aa(compose(t, q), db(s)).holds
    elapsed = time.perf_counter() - t0
    ok = not offending and holds and elapsed < 5
    assert report(5, "quotient of the sender example", ok,
                  f"{len(q.states)} states, {len(pruned.states)} after pruning, (s2,t2) states={len(offending)}, "
                  f"mr(t||q, s)={holds}, {elapsed:.3f}s")


def test_translation_invariance():
    t0 = time.perf_counter()
    rng = random.Random(1)
    metrics = [make_metric("discrete"), make_metric("pointwise"), make_metric("discounting", 0.5)]
    n = skipped = bad = 0
    while n < 200:
        ls = discrete_structure(3, rng.randint(0, 2), rng) if n % 2 == 0 else weighted_structure(rng.choice([2, 3]))
        d1 = random_dmts(rng, ls, rng.randint(1, 6), max_out=3, n_init=rng.randint(1, 2))
        d2 = random_dmts(rng, ls, rng.randint(1, 6), max_out=3, n_init=rng.randint(1, 2))
        try:
            a1, a2 = db(d1), db(d2)
            b1, b2 = bd(a1), bd(a2)
        except BudgetError:
            skipped += 1
            continue
        n += 1
        n1, n2 = ddh(d1), ddh(d2)
        v = mr_dmts(d1, d2).holds
        verdicts = [mr_aa(a1, a2).holds, mr_dmts(b1, b2).holds, mr_nu(n1, n2).holds,
                    mr_dmts(hd(n1), hd(n2)).holds]
        bad += any(x != v for x in verdicts)
        for m in metrics:
            x = refinement_distance(d1, d2, m)[0]
            ys = [refinement_distance(a1, a2, m)[0], refinement_distance(b1, b2, m)[0],
                  refinement_distance(n1, n2, m)[0], refinement_distance(hd(n1), hd(n2), m)[0]]
            tol = 1e-6 if m.metric == "discounting" else 0
            bad += any(not close(y, x, tol) for y in ys)
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and elapsed < 120
    assert report(6, "verdicts and distances agree across db/bd and ddh/hd", ok,
                  f"{n} pairs, {skipped} over budget, {bad} mismatches, {elapsed:.1f}s")


def _adjunction(rng, ls_factory, count, max_states, metric, with_bool):
    n = skipped = bad_bool = bad_dist = 0
    worst = 0.0
    while n < count:
        ls = ls_factory(rng)
        a1, a2, a3 = (random_aa(rng, ls, rng.randint(1, max_states), max_sets=2, max_size=2,
                                n_init=rng.randint(1, 2), span=3) for _ in range(3))
        try:
            q = quotient(a3, a1)
        except BudgetError:
            skipped += 1
            continue
        n += 1
        left = compose(a1, a2)
        if with_bool:
            bad_bool += mr_aa(left, a3).holds != mr_aa(a2, q).holds
        dl = refinement_distance(left, a3, metric)[0]
        dr = refinement_distance(a2, q, metric)[0]
        if not close(dl, dr, 1e-6):
            bad_dist += 1
            worst = max(worst, abs(dl - dr) if dl != dr else 0.0)
    return n, skipped, bad_bool, bad_dist, worst


def test_quotient_adjunction():
    t0 = time.perf_counter()
    rng = random.Random(2)
    d = _adjunction(rng, lambda r: discrete_structure(r.choice([2, 3]), 0, r), 100, 4,
                    make_metric("discrete"), True)
    w = _adjunction(rng, lambda r: weighted_structure(r.choice([1, 2]), "plus"), 50, 4,
                    make_metric("discounting", 0.5), True)
    elapsed = time.perf_counter() - t0
    ok = d[2] == 0 and d[3] == 0 and w[3] == 0 and elapsed < 300
    assert report(7, "quotient adjunction (discrete csp Boolean and distance, weighted plus discounting)", ok,
                  f"discrete: {d[0]} triples, {d[1]} over budget, {d[2]} verdict and {d[3]} distance mismatches; "
                  f"weighted: {w[0]} triples, {w[1]} over budget, {w[2]} verdict and {w[3]} distance mismatches; "
                  f"{elapsed:.1f}s")


def test_lattice_and_soundness_laws():
    t0 = time.perf_counter()
    rng = random.Random(3)
    failures = {}

    def fail(name):
        failures[name] = failures.get(name, 0) + 1

    ls2 = discrete_structure(2)
    universe = lts_universe(ls2, discrete_labels(ls2), 2)
    for k in range(60):
        ls = discrete_structure(2, rng.randint(0, 1), rng) if k % 2 else weighted_structure(2)
        s1, s2, s3 = (random_dmts(rng, ls, rng.randint(1, 3)) for _ in range(3))
        d = disjoin(s1, s2)
        if mr_dmts(d, s3).holds != (mr_dmts(s1, s3).holds and mr_dmts(s2, s3).holds):
            fail("disjunction join")
        if not (mr_dmts(s1, d).holds and mr_dmts(s2, d).holds):
            fail("disjunction upper bound")
        c = conjoin(s1, s2)
        if not (mr_dmts(c, s1).holds and mr_dmts(c, s2).holds):
            fail("conjunction lower bound")
    for _ in range(10):
        s1, s2 = random_dmts(rng, ls2, 2), random_dmts(rng, ls2, 2)
        d = disjoin(s1, s2)
        for i in universe:
            if refines(i, d).holds != (refines(i, s1).holds or refines(i, s2).holds):
                fail("disjunction implementations")

    separating = [make_metric("discrete"), make_metric("discounting", 0.5)]
    for k in range(120):
        ls = discrete_structure(3, 1, rng) if k % 2 else weighted_structure(2)
        d1, d2 = random_dmts(rng, ls, rng.randint(1, 3)), random_dmts(rng, ls, rng.randint(1, 3))
        holds = mr_dmts(d1, d2).holds
        for m in separating + [make_metric("pointwise")]:
            v = refinement_distance(d1, d2, m)[0]
            if holds and v != 0:
                fail("refinement gives distance 0")
            if m in separating and v == 0 and not holds:
                fail("distance 0 gives refinement")

    for k in range(30):
        ls = discrete_structure(2) if k % 3 else discrete_structure(1)
        bound = 2 if k % 3 else 3
        d1, d2 = random_dmts(rng, ls, rng.randint(1, 2)), random_dmts(rng, ls, rng.randint(1, 2))
        for m in (make_metric("discrete"), make_metric("discounting", 0.5)):
            if thorough_distance_oracle(d1, d2, m, bound).value > refinement_distance(d1, d2, m)[0]:
                fail("thorough below modal")

    m = make_metric("discounting", 0.5)
    P = composition_bound_P(m, "plus")
    for _ in range(100):
        ls = weighted_structure(rng.choice([1, 2]), "plus")
        a1, b1, a2, b2 = (random_aa(rng, ls, rng.randint(1, 3), span=3) for _ in range(4))
        lhs = refinement_distance(compose(a1, a2), compose(b1, b2), m)[0]
        rhs = P(refinement_distance(a1, b1, m)[0], refinement_distance(a2, b2, m)[0])
        if lhs > rhs + 1e-6:
            fail("composition bound")
    try:
        composition_bound_P(make_metric("pointwise"), "cap")
        fail("unsupported bound accepted")
    except CapabilityError:
        pass

    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 600
    detail = ", ".join(f"{k}: {v}" for k, v in sorted(failures.items())) or "all laws held"
    assert report(8, "lattice and soundness laws", ok, f"{detail}, {elapsed:.1f}s")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
