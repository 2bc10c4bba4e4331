import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fixture_path, instances
from seqflow.errors import ResourceLimitError, UsageError
from seqflow.instance import parse_nfa
from seqflow.maxflow import max_flow_word
from seqflow.mm_algebra import OMEGA
from seqflow.oracle import brute_optimal, fair_word_value
from seqflow.quantitative import (Problem, configurations, exists_flow_of_value,
                                  letter_successors, one_step, one_step_letter, optimal_value,
                                  quick_upper_bound, reach)


def load_nfa(name, inst):
    with open(fixture_path(name)) as fh:
        return parse_nfa(json.load(fh), inst.capacities)


@pytest.mark.parametrize("letters,value", [
    ("c", 2), ("d", 2), ("e", 1), ("ce", OMEGA), ("cd", 3),
])
@pytest.mark.parametrize("mode", ["bfs", "dichotomic"])
def test_figure_optima(fig1, letters, value, mode):
    res = optimal_value(fig1.restrict(list(letters)), mode=mode)
    assert res.value == value


def test_optimal_word_attains_the_value(fig1):
    res = optimal_value(fig1.restrict(["c"]))
    assert res.word is not None and max_flow_word(fig1, res.word) == 2
    assert res.to_json() == {"status": "bounded", "value": 2}
    assert res.to_json(with_word=True)["word"] == list(res.word)


def test_unbounded_result_json(intro):
    res = optimal_value(intro)
    assert res.value is OMEGA
    assert res.to_json() == {"status": "unbounded", "witness": "(a.(b)#.a)"}


def test_one_step_examples(fig1):
    c = fig1.restrict(["c"])
    assert one_step(c, (2, 0, 0, 0), (0, 2, 0, 0), 2)
    assert not one_step(c, (0, 2, 0, 0), (0, 0, 2, 0), 2)
    assert one_step(c, (0, 2, 0, 0), (0, 1, 1, 0), 2)
    assert letter_successors(c, "c", ((0, 2, 0, 0),)) == {((0, 1, 1, 0),)}


def test_one_step_rejects_bad_configurations(fig1):
    with pytest.raises(UsageError):
        one_step(fig1, (1, 0, 0, 0), (0, 2, 0, 0), 2)
    with pytest.raises(UsageError):
        one_step(fig1, (2, 0, 0), (0, 2, 0, 0), 2)


def test_reach_examples(fig1):
    c = fig1.restrict(["c"])
    assert reach(c, (2, 0, 0, 0), (0, 0, 0, 2))
    assert not reach(c, (3, 0, 0, 0), (0, 0, 0, 3))
    assert not reach(c, (2, 0, 0, 0), (0, 0, 0, 2), ell_max=3)
    assert reach(c, (2, 0, 0, 0), (0, 0, 0, 2), ell_max=4, mode="dichotomic")
    with pytest.raises(UsageError):
        reach(c, (2, 0, 0, 0), (0, 0, 0, 2), mode="sideways")


@given(st.integers(1, 4), st.integers(0, 5))
def test_configuration_count(n, C):
    confs = list(configurations(n, C))
    assert len(confs) == len(set(confs)) == math.comb(C + n - 1, n - 1)
    assert all(sum(x) == C and len(x) == n for x in confs)


@settings(max_examples=30)
@given(instances(max_n=3, max_letters=2, max_cap=2), st.integers(1, 3))
def test_successors_match_one_step_networks(inst, C):
    for a in inst.letters:
        for x in configurations(inst.n, C):
            succ = {y[0] for y in letter_successors(inst, a, (x,))}
            for y in configurations(inst.n, C):
                assert (y in succ) == one_step_letter(inst, a, x, y, C)


@settings(max_examples=30)
@given(instances(max_n=3, max_letters=2, max_cap=2))
def test_optimum_dominates_brute_force(inst):
    res = optimal_value(inst)
    brute = brute_optimal(inst, 5)
    if res.value is OMEGA:
        return
    assert brute.best <= res.value
    if res.word:
        assert max_flow_word(inst, res.word) >= res.value
        if len(res.word) <= 5:
            assert brute.best == res.value


@settings(max_examples=20)
@given(instances(max_n=3, max_letters=2, max_cap=2))
def test_search_modes_agree(inst):
    a = optimal_value(inst, mode="bfs")
    b = optimal_value(inst, mode="dichotomic")
    assert a.value == b.value


def test_explicit_bound_search(fig1):
    c = fig1.restrict(["c", "d"])
    res = optimal_value(c, from_bound=True, bound=20)
    assert res.value == 3
    assert len(res.probes) <= 6


def test_configured_bound_is_refused(fig1):
    with pytest.raises(ResourceLimitError):
        optimal_value(fig1.restrict(["c"]), from_bound=True)


def test_state_budget(fig1):
    with pytest.raises(ResourceLimitError):
        optimal_value(fig1.restrict(["c", "d"]), max_states=5)


def test_existence_checks(fig1):
    c = fig1.restrict(["c"])
    assert exists_flow_of_value(c, 0)
    assert exists_flow_of_value(c, 2)
    assert not exists_flow_of_value(c, 3)
    with pytest.raises(UsageError):
        exists_flow_of_value(c, -1)


def test_quick_bound(fig1):
    assert quick_upper_bound(Problem.of(fig1.restrict(["c"]))) is OMEGA
    from seqflow.instance import make_instance
    inst = make_instance(3, {"a": [[0, 2, 1], [0, 0, OMEGA], [0, 0, 0]]})
    assert quick_upper_bound(Problem.of(inst)) == 3
    # all tokens arrive together, so the direct edge cannot be combined with the detour
    assert optimal_value(inst).value == 2


def test_fair_optimum_matches_brute_force(intro):
    pairs = [(0, 3), (1, 0)]
    res = optimal_value(intro, edges=pairs)
    brute = brute_optimal(intro, 5, edges=pairs)
    assert res.value == brute.best == 0


def test_fair_optimum_on_figure(fig1):
    inst = fig1.restrict(["c", "d"])
    pairs = [(0, 3), (0, 1)]
    res = optimal_value(inst, edges=pairs)
    assert res.value != OMEGA
    assert fair_word_value(inst, res.word, pairs) >= res.value
    assert brute_optimal(inst, 5, edges=pairs).best <= res.value


def test_regular_optima(intro):
    finite = load_nfa("nfa-finite.json", intro)
    assert optimal_value(intro, nfa=finite).value == 1
    assert brute_optimal(intro, 3, nfa=finite).best == 1
    assert optimal_value(intro, nfa=load_nfa("nfa-aba.json", intro)).value is OMEGA


def test_options_travel_with_the_instance(intro):
    finite = load_nfa("nfa-finite.json", intro)
    assert optimal_value(intro.with_options(nfa=finite)).value == 1
    assert optimal_value(intro.with_options(nfa=finite), use_options=False).value is OMEGA
