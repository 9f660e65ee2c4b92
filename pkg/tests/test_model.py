import random

import pytest

from qspec import (AA, DMTS, LTS, BudgetError, Discrete, LabelStructure, NuExpr, SpecDocument,
                   StructureMismatchError, ValidationError, bd, db, ddh, embed_lts, hd,
                   is_implementation, translate, validate)
from qspec.corpus import discrete_structure, random_dmts, random_lts, weighted_structure
from qspec.model import as_lts, canon
from qspec.refine import equivalent, mr_aa, mr_dmts

L = LabelStructure.discrete(["a", "b"])
A, B = Discrete("a"), Discrete("b")


def either_or():
    # s must do a or b (or both), t has no obligations
    return DMTS(L, {"s", "t"}, {"s"},
                may={("s", A, "t"), ("s", B, "t")},
                must={("s", frozenset({(A, "t"), (B, "t")}))})


def test_validate_clean_system():
    assert validate(either_or()) == []


def test_validate_uncovered_must():
    d = DMTS(L, {"s", "t"}, {"s"}, may=set(), must={("s", frozenset({(A, "t")}))})
    problems = validate(d)
    assert len(problems) == 1 and "no may-edge covers" in problems[0]


def test_validate_unknown_state_and_label():
    d = DMTS(L, {"s"}, {"s"}, may={("s", A, "nowhere")})
    assert any("nowhere" in p for p in validate(d))
    w = LabelStructure.weighted(["a"])
    d = DMTS(L, {"s"}, {"s"}, may={("s", w.label("a[0,1]"), "s")})
    assert validate(d)


def test_db_enumerates_admissible_sets():
    a = db(either_or())
    assert a.tran["s"] == {frozenset({(A, "t")}), frozenset({(B, "t")}), frozenset({(A, "t"), (B, "t")})}
    # no obligations: anything from nothing to everything allowed
    assert a.tran["t"] == {frozenset()}


def test_db_budget():
    many = DMTS(L, {"s"}, {"s"}, may={("s", A, "s"), ("s", B, "s")})
    with pytest.raises(BudgetError):
        db(many, subset_budget=1)


def test_bd_states_are_choices():
    d = bd(db(either_or()))
    assert len(d.states) == 4
    assert len(d.initial) == 3
    # each choice refines the original, the original refines no single choice
    assert mr_dmts(d, either_or()).holds
    assert not mr_dmts(either_or(), d).holds


def test_empty_tran_state_has_no_bd_copy():
    a = AA(L, {"s"}, {"s"}, {"s": set()})
    d = bd(a)
    assert d.states == frozenset() and d.initial == frozenset()


def test_nu_round_trip_is_identity():
    rng = random.Random(3)
    for _ in range(30):
        d = random_dmts(rng, discrete_structure(3, 1, rng), rng.randint(1, 5))
        assert hd(ddh(d)) == d


def test_hd_rejects_uncovered_diamond():
    n = NuExpr(L, {"x"}, {"x"}, diamond={"x": {frozenset({(A, "x")})}}, box={})
    with pytest.raises(ValidationError):
        hd(n)


def test_translations_preserve_modal_semantics():
    rng = random.Random(7)
    for k in range(40):
        ls = discrete_structure(3, rng.randint(0, 2), rng) if k % 2 else weighted_structure(2)
        d1 = random_dmts(rng, ls, rng.randint(1, 4), n_init=rng.randint(1, 2))
        d2 = random_dmts(rng, ls, rng.randint(1, 4), n_init=rng.randint(1, 2))
        verdict = mr_dmts(d1, d2).holds
        assert mr_dmts(bd(db(d1)), d1).holds
        assert mr_aa(db(d1), db(d2)).holds == verdict
        assert mr_dmts(bd(db(d1)), bd(db(d2))).holds == verdict
        assert equivalent(hd(ddh(d1)), d1)


def test_translate_chains_through_dmts():
    n = ddh(either_or())
    a = translate(n, "aa")
    assert a.kind == "aa"
    assert mr_aa(a, db(either_or())).holds and mr_aa(db(either_or()), a).holds


def test_lts_embedding_round_trip():
    rng = random.Random(5)
    for _ in range(20):
        i = random_lts(rng, discrete_structure(2), rng.randint(1, 4))
        for target in ("dmts", "aa", "nu"):
            e = embed_lts(i, target)
            assert is_implementation(e)
            back = as_lts(e)
            assert back.transitions == i.transitions and back.initial == i.initial


def test_is_implementation():
    assert not is_implementation(either_or())
    w = LabelStructure.weighted(["u"])
    i = LTS(w, {"p"}, "p", {("p", w.label("u[1,1]"), "p")})
    assert is_implementation(embed_lts(i, "dmts"))
    loose = DMTS(w, {"p"}, {"p"}, may={("p", w.label("u[1,2]"), "p")},
                 must={("p", frozenset({(w.label("u[1,2]"), "p")}))})
    assert not is_implementation(loose)
    with pytest.raises(ValidationError):
        as_lts(loose)


def test_document_rejects_foreign_structure():
    doc = SpecDocument(L)
    with pytest.raises(StructureMismatchError):
        doc.add("x", LTS(LabelStructure.discrete(["z"]), {"p"}, "p"))


def test_canonical_names():
    assert canon(("a", 1)) == "(a,1)"
    assert canon(frozenset({"b", "a"})) == "{a,b}"


def test_mixed_structures_refused():
    other = DMTS(LabelStructure.discrete(["a", "b", "c"]), {"s"}, {"s"})
    with pytest.raises(StructureMismatchError):
        mr_dmts(either_or(), other)
