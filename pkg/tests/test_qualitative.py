import json

import pytest
from hypothesis import given, settings

from conftest import W, fixture_path, instances, mm
from seqflow.errors import UsageError
from seqflow.flow_algebra import generate_closure, parse_expression
from seqflow.instance import parse_nfa
from seqflow.mm_algebra import MMValue
from seqflow.oracle import naive_closure
from seqflow.qualitative import (BOTTOM, LabeledElement, check_fair_unbounded,
                                 check_regular_unbounded, check_unbounded, decide,
                                 generate_labeled_closure, is_in_rec, labeled_is_idempotent,
                                 labeled_sharp, minimal_sharp_height, star)

B_SHARP = mm([[0, 0, 0, 0], [0, W, W, 0], [0, 0, W, 0], [0, 0, 0, 0]])
ABA_SHARP = mm([[0, W, 0, W], [0, 0, 0, 0], [0, W, 0, W], [0, 0, 0, 0]])


def load_nfa(name, inst):
    with open(fixture_path(name)) as fh:
        return parse_nfa(json.load(fh), inst.capacities)


@pytest.mark.parametrize("strategy", ["closure", "bounded"])
def test_intro_is_unbounded(intro, strategy):
    v = check_unbounded(intro, strategy)
    assert v.unbounded and v.element[0, 3] == MMValue.OMEGA
    out = v.to_json()
    assert parse_expression(out["witness"], intro.generators()).value == v.element
    if strategy == "closure":
        assert out == {"status": "unbounded", "witness": "(a.(b)#.a)"}
    assert v.to_json(with_witness=False) == {"status": "unbounded"}


@pytest.mark.parametrize("letters,status", [
    ("c", "bounded"), ("d", "bounded"), ("e", "bounded"), ("ce", "unbounded"),
    ("cd", "bounded"), ("cde", "unbounded"),
])
@pytest.mark.parametrize("strategy", ["closure", "bounded"])
def test_figure_verdicts(fig1, letters, status, strategy):
    assert check_unbounded(fig1.restrict(list(letters)), strategy).status == status


def test_unknown_strategy(intro):
    with pytest.raises(UsageError):
        check_unbounded(intro, "guess")


@settings(max_examples=30)
@given(instances(max_n=3, max_letters=2))
def test_strategies_agree_with_naive_saturation(inst):
    expected = any(x[inst.source, inst.target] == MMValue.OMEGA
                   for x in naive_closure(inst.generators()))
    assert check_unbounded(inst, "closure").unbounded == expected
    assert check_unbounded(inst, "bounded").unbounded == expected


def test_height_limited_search(intro):
    assert not check_unbounded(intro, "bounded", height=2).unbounded
    assert check_unbounded(intro, "bounded", height=3).unbounded


def test_recursive_membership(intro):
    assert is_in_rec(intro, B_SHARP, 1)
    assert not is_in_rec(intro, B_SHARP, 0)
    assert is_in_rec(intro, ABA_SHARP, 3)
    assert not is_in_rec(intro, ABA_SHARP, 2)
    assert not is_in_rec(intro, ABA_SHARP, -1)


def test_strict_recursion_agrees_on_a_tiny_instance():
    gens = {"a": mm([[0, W], [0, 1]]), "b": mm([[0, 1], [0, W]])}
    F = naive_closure(gens)
    probes = list(F)[:4] + [mm([[W, W], [W, W]])]
    for x in probes:
        for h in (0, 1, 2):
            assert is_in_rec(gens, x, h, strict_space=True) == is_in_rec(gens, x, h)


def test_fair_variants(intro):
    assert check_fair_unbounded(intro, [(0, 3), (2, 3)]).unbounded
    assert not check_fair_unbounded(intro, [(0, 3), (1, 0)]).unbounded
    assert not check_fair_unbounded(intro, [(0, 3), (1, 0)], "bounded").unbounded
    with pytest.raises(UsageError):
        check_fair_unbounded(intro, [])


def test_fair_single_pair_is_plain(fig1):
    for letters in ("c", "ce"):
        inst = fig1.restrict(list(letters))
        assert (check_fair_unbounded(inst, [(0, 3)]).unbounded
                == check_unbounded(inst).unbounded)


def test_nesting_depths(intro, nested):
    assert minimal_sharp_height(intro.generators(), [(0, 3)], 3) == 1
    assert minimal_sharp_height(nested.generators(), [(0, 4)], 3) == 2
    assert minimal_sharp_height(intro.restrict(["a"]).generators(), [(0, 3)], 2) is None
    v = check_unbounded(nested)
    assert v.witness.serialize() == "(a.((b)#.c.a)#)"


# ---------------------------------------------------------------- automata

def test_labeled_operations(intro):
    x = LabeledElement("p", B_SHARP, "p")
    y = LabeledElement("q", B_SHARP, "p")
    assert star(x, y) is BOTTOM and star(BOTTOM, x) is BOTTOM
    assert star(y, x) == LabeledElement("q", B_SHARP, "p")
    assert labeled_is_idempotent(x) and labeled_is_idempotent(BOTTOM)
    assert labeled_sharp(BOTTOM) is BOTTOM
    with pytest.raises(UsageError):
        labeled_sharp(y)


def test_labeled_closure_size(intro):
    nfa = load_nfa("nfa-aba.json", intro)
    closure = generate_labeled_closure(intro, nfa)
    assert len(closure) == 12
    assert BOTTOM in closure.elements


def test_regular_constraints(intro):
    v = check_regular_unbounded(intro, load_nfa("nfa-aba.json", intro))
    assert v.unbounded and v.labels == ("q0", "q2")
    assert not check_regular_unbounded(intro, load_nfa("nfa-finite.json", intro)).unbounded


def test_universal_automaton_is_plain(fig1):
    for letters in ("c", "ce", "cd"):
        inst = fig1.restrict(list(letters))
        assert check_regular_unbounded(inst).unbounded == check_unbounded(inst).unbounded


def test_decide_dispatch(intro):
    nfa = load_nfa("nfa-finite.json", intro)
    assert decide(intro.with_options(nfa=nfa)).status == "bounded"
    assert decide(intro.with_options(edges=[(0, 3), (1, 0)])).status == "bounded"
    assert decide(intro).status == "unbounded"


def test_closure_and_verdict_consistency(intro):
    F = generate_closure(intro.generators())
    assert any(x[0, 3] == MMValue.OMEGA for x in F.elements)
