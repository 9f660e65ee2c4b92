import json
import math
import random

import pytest

from qspec import (AA, DMTS, CapabilityError, LabelStructure, compose, composition_bound_P, conjoin, db,
                   ddh, make_metric, mr_dmts, refinement_distance, relaxed_membership,
                   thorough_distance_oracle, witness_family)
from qspec.corpus import discrete_structure, random_aa, random_dmts, weighted_structure
from qspec.quant import distance

INF = math.inf
DISCOUNT = [0.5, 0.9, 0.99]


@pytest.mark.parametrize("lam", DISCOUNT)
def test_grant_distance(grants, lam):
    m = make_metric("discounting", lam)
    expected = lam / (1 - lam)
    for left, right in (("x", "xprime"), ("xprime", "x")):
        value, table = refinement_distance(grants[left], grants[right], m)
        assert value == pytest.approx(expected, abs=1e-6)
        assert table.converged and table.error_bound <= 1e-9


def test_grant_distance_via_nu(grants):
    m = make_metric("discounting", 0.9)
    assert distance(grants["xnu"], ddh(grants["xprime"]), m) == pytest.approx(9.0, abs=1e-6)


def test_conflict_distances(conflict):
    pw = make_metric("pointwise")
    i, d1, d2 = conflict["I"], conflict["D1"], conflict["D2"]
    assert distance(i, d1, pw) == 1.0
    assert distance(i, d2, pw) == 1.0
    both = conjoin(d1, d2)
    assert distance(i, both, pw) == INF
    assert relaxed_membership(i, d1, 1, pw)
    assert relaxed_membership(i, d2, 1, pw)
    assert not relaxed_membership(i, both, 1, pw)
    assert not relaxed_membership(i, d1, 0.5, pw)


def test_refinement_means_zero_distance():
    rng = random.Random(31)
    metrics = [make_metric("discrete"), make_metric("pointwise"), make_metric("discounting", 0.7)]
    for k in range(80):
        ls = discrete_structure(3, 1, rng) if k % 2 else weighted_structure(2)
        d1 = random_dmts(rng, ls, rng.randint(1, 3), open_ends=True)
        d2 = random_dmts(rng, ls, rng.randint(1, 3), open_ends=True)
        if mr_dmts(d1, d2).holds:
            for m in metrics:
                assert distance(d1, d2, m) == 0


def test_zero_distance_means_refinement_closed_labels():
    rng = random.Random(32)
    metrics = [make_metric("discrete"), make_metric("discounting", 0.5)]
    seen = 0
    for k in range(120):
        ls = discrete_structure(3, 1, rng) if k % 2 else weighted_structure(2)
        d1 = random_dmts(rng, ls, rng.randint(1, 3))
        d2 = random_dmts(rng, ls, rng.randint(1, 3))
        for m in metrics:
            if distance(d1, d2, m) == 0:
                seen += 1
                assert mr_dmts(d1, d2).holds
    assert seen > 10


def test_open_ends_break_separation():
    w = LabelStructure.weighted(["a"])
    closed = DMTS(w, {"s"}, {"s"}, may={("s", w.label("a[0,1]"), "s")})
    opened = DMTS(w, {"s"}, {"s"}, may={("s", w.label("a(0,1)"), "s")})
    assert distance(closed, opened, make_metric("discounting", 0.5)) == 0
    assert not mr_dmts(closed, opened).holds


def test_distances_agree_across_formalisms():
    rng = random.Random(33)
    for k in range(40):
        ls = discrete_structure(2, 1, rng) if k % 2 else weighted_structure(2)
        d1, d2 = random_dmts(rng, ls, rng.randint(1, 3)), random_dmts(rng, ls, rng.randint(1, 3))
        for m in (make_metric("pointwise"), make_metric("discounting", 0.5)):
            v = distance(d1, d2, m)
            assert distance(db(d1), db(d2), m) == pytest.approx(v, abs=1e-6)
            assert distance(ddh(d1), ddh(d2), m) == pytest.approx(v, abs=1e-6)


def test_thorough_distance_below_modal():
    rng = random.Random(34)
    for _ in range(25):
        ls = discrete_structure(2)
        d1 = random_dmts(rng, ls, rng.randint(1, 2))
        d2 = random_dmts(rng, ls, rng.randint(1, 2))
        for m in (make_metric("discrete"), make_metric("discounting", 0.5)):
            bounded = thorough_distance_oracle(d1, d2, m, 2)
            assert bounded.value <= distance(d1, d2, m)


@pytest.mark.parametrize("kind", ["discounting", "pointwise"])
def test_composition_bound(kind):
    rng = random.Random(35)
    metric = make_metric(kind, 0.5 if kind == "discounting" else None)
    bound = composition_bound_P(metric, "plus")
    nontrivial = 0
    for _ in range(120):
        ls = weighted_structure(rng.choice([1, 2]), "plus")
        a1, b1, a2, b2 = (random_aa(rng, ls, rng.randint(1, 3), span=3) for _ in range(4))
        rhs = bound(distance(a1, b1, metric), distance(a2, b2, metric))
        lhs = distance(compose(a1, a2), compose(b1, b2), metric)
        assert lhs <= rhs + 1e-6
        nontrivial += 0 < rhs < INF
    assert nontrivial > 5


def test_composition_bound_discrete_csp():
    rng = random.Random(36)
    metric = make_metric("discrete")
    bound = composition_bound_P(metric, "csp")
    for _ in range(60):
        ls = discrete_structure(2)
        a1, b1, a2, b2 = (random_aa(rng, ls, rng.randint(1, 3)) for _ in range(4))
        lhs = distance(compose(a1, a2), compose(b1, b2), metric)
        assert lhs <= bound(distance(a1, b1, metric), distance(a2, b2, metric))


def test_composition_bound_unsupported():
    with pytest.raises(CapabilityError):
        composition_bound_P(make_metric("pointwise"), "cap")


@pytest.mark.parametrize("kind", ["discounting", "pointwise"])
def test_triangle_inequality(kind):
    rng = random.Random(37)
    m = make_metric(kind, 0.6 if kind == "discounting" else None)
    for _ in range(80):
        ls = weighted_structure(2)
        s1, s2, s3 = (random_dmts(rng, ls, rng.randint(1, 3), span=3) for _ in range(3))
        assert distance(s1, s3, m) <= m.plus(distance(s1, s2, m), distance(s2, s3, m)) + 1e-6


def test_witness_family(grants):
    m = make_metric("discounting", 0.9)
    value, table = refinement_distance(grants["x"], grants["xprime"], m)
    fam = witness_family(table, value + 1e-6)
    assert ("x", "x") in fam
    assert witness_family(table, -1) == frozenset()
    assert witness_family(table, INF) == frozenset(table.values)


def test_table_json(grants):
    _, table = refinement_distance(grants["x"], grants["xprime"], make_metric("discounting", 0.5))
    data = json.loads(table.to_json())
    assert data["converged"] is True
    assert {"left", "right", "value"} <= set(data["pairs"][0])
    assert data["value"] == pytest.approx(1.0, abs=1e-6)


def test_infinite_values_in_json(conflict):
    _, table = refinement_distance(conflict["I"], conjoin(conflict["D1"], conflict["D2"]), make_metric("pointwise"))
    assert json.loads(table.to_json())["value"] == "inf"


def test_metric_parameters():
    with pytest.raises(ValueError):
        make_metric("discounting", 1.0)
    with pytest.raises(ValueError):
        make_metric("euclid")
    # without discounting the tail is ignored, even an infinite one
    w = LabelStructure.weighted(["a"])
    m = make_metric("discounting", 0.0)
    assert m.F(w.label("a[1,1]"), w.label("a[0,0]"), INF, w) == 1


def test_empty_conventions():
    w = LabelStructure.weighted(["a"])
    nothing = AA(w, set(), set(), {})
    some = AA(w, {"s"}, {"s"}, {"s": {frozenset()}})
    m = make_metric("pointwise")
    # sup over no initial states is 0, inf over none is inf
    assert distance(nothing, some, m) == 0
    assert distance(some, nothing, m) == INF


def test_relaxed_membership_monotone(grants):
    m = make_metric("discounting", 0.5)
    i2 = grants["i2"]
    d = distance(i2, grants["x"], m)
    assert 0 < d < INF
    assert not relaxed_membership(i2, grants["x"], d / 2, m)
    assert relaxed_membership(i2, grants["x"], d, m)
    assert relaxed_membership(i2, grants["x"], INF, m)
