import itertools
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import instances
from seqflow.flow_algebra import generate_closure, sharp
from seqflow.mm_algebra import product
from seqflow.semigroup import (BoundConfig, FiniteSemigroup, block_decomposition,
                               build_sharp_summary, build_summary, check_block_decomposition,
                               check_summary, descendants_j_above, element_j_lengths,
                               ramsey_bracket, ramsey_number, regular_j_length,
                               summary_height_bound)

BOOL = FiniteSemigroup.from_table([[0, 0], [0, 1]])


def flow_semigroup(inst):
    F = generate_closure(inst.generators())
    S = FiniteSemigroup(F.elements, product)
    sharp_idx = lambda i: S.index[sharp(S.elements[i])] if S.is_idempotent(i) else i
    return S, sharp_idx


@pytest.fixture(scope="module")
def intro_sg(intro):
    S, sh = flow_semigroup(intro)
    return S, sh, {a: S.index[g] for a, g in intro.generators().items()}


def cyclic(n):
    return FiniteSemigroup.from_table([[(i + j) % n for j in range(n)] for i in range(n)])


# ---------------------------------------------------------------- basics

def test_generated_and_table_agree():
    S = FiniteSemigroup.generated([1], lambda x, y: (x + y) % 5)
    assert sorted(S.elements) == [0, 1, 2, 3, 4]
    assert S.check_associative()
    assert [S.elements[i] for i in S.idempotents()] == [0]


def test_duplicates_rejected():
    with pytest.raises(ValueError):
        FiniteSemigroup([1, 1], min)


def test_eval_and_subsemigroup():
    assert BOOL.eval([1, 1, 0, 1]) == 0
    sub = cyclic(6).subsemigroup([2])
    assert sorted(sub.elements) == [0, 2, 4]


def test_non_associative_table_detected():
    S = FiniteSemigroup.from_table([[1, 0], [0, 0]])
    assert not S.check_associative()


# ---------------------------------------------------------------- Green relations

def test_left_zero_semigroup():
    S = FiniteSemigroup.from_table([[0, 0, 0], [1, 1, 1], [2, 2, 2]])
    G = S.green()
    assert G.classes("L") == [[0, 1, 2]]
    assert G.classes("R") == [[0], [1], [2]]
    assert G.classes("J") == [[0, 1, 2]]
    assert G.classes("H") == [[0], [1], [2]]


def test_group_is_one_h_class():
    G = cyclic(4).green()
    assert G.classes("H") == [[0, 1, 2, 3]]


def test_boolean_order():
    G = BOOL.green()
    assert G.lt("J", 0, 1) and not G.le("J", 1, 0)
    assert regular_j_length(BOOL) == 2
    assert element_j_lengths(BOOL) == [1, 2]


def _brute_le(S, rel, x, y):
    ones = [None] + list(range(len(S)))

    def m(a, b):
        return b if a is None else a if b is None else S.mul(a, b)

    if rel == "R":
        return any(m(y, z) == x for z in ones)
    if rel == "L":
        return any(m(z, y) == x for z in ones)
    return any(m(m(z, y), w) == x for z in ones for w in ones)


@settings(max_examples=15)
@given(instances(max_n=3, max_letters=2))
def test_green_matches_definitions(inst):
    S, _ = flow_semigroup(inst)
    if len(S) > 40:
        S = S.subsemigroup(S.generators()[:1])
    G = S.green()
    for x, y in itertools.product(range(len(S)), repeat=2):
        for rel in "JLR":
            assert G.le(rel, x, y) == _brute_le(S, rel, x, y)


def test_j_length_at_most_number_of_classes(intro_sg):
    S, _, _ = intro_sg
    assert 1 <= regular_j_length(S) <= len(S.green().classes("J"))
    lengths = element_j_lengths(S)
    G = S.green()
    for x, y in itertools.product(range(len(S)), repeat=2):
        if G.le("J", x, y):
            assert lengths[x] <= lengths[y]


# ---------------------------------------------------------------- Ramsey numbers

def _avoids(S, word, k):
    n = len(word)
    for lo in range(n):
        for cuts in itertools.combinations(range(lo + 1, n + 1), k):
            bounds = (lo,) + cuts
            vals = {S.eval(word[bounds[i]:bounds[i + 1]]) for i in range(k)}
            if len(vals) == 1 and S.is_idempotent(vals.pop()):
                return False
    return True


def _brute_ramsey(S, k, limit=12):
    for n in range(1, limit):
        if not any(_avoids(S, w, k) for w in itertools.product(range(len(S)), repeat=n)):
            return n
    return None


def test_boolean_ramsey_numbers():
    assert ramsey_number(BOOL, 2).value == 4
    assert ramsey_number(BOOL, 3).value == 9
    assert _avoids(BOOL, [1, 0, 1], 2)


@pytest.mark.parametrize("S", [BOOL, cyclic(2), cyclic(3),
                               FiniteSemigroup.from_table([[0, 0, 0], [1, 1, 1], [2, 2, 2]])],
                         ids=["bool", "z2", "z3", "left-zero"])
@pytest.mark.parametrize("k", [1, 2])
def test_ramsey_matches_brute_force(S, k):
    r = ramsey_number(S, k)
    assert r.exact == _brute_ramsey(S, k)
    lo, hi = ramsey_bracket(S, k)
    assert lo <= r.value <= hi


def test_ramsey_falls_back_to_bracket():
    r = ramsey_number(BOOL, 3, max_states=2)
    assert r.bracket_only and r.value == r.upper


# ---------------------------------------------------------------- block decompositions

def test_literal_guard_without_blocks():
    blocks, tail = block_decomposition(BOOL, [1, 0, 1], ramsey=9)
    assert blocks == [] and tail == (0, 3)


def test_block_of_repeated_letter():
    blocks, tail = block_decomposition(BOOL, [1] * 3, greedy=True)
    assert len(blocks) == 1 and tail == (3, 3)
    assert check_block_decomposition(BOOL, [1] * 3, blocks, tail)


@settings(max_examples=60)
@given(st.lists(st.integers(0, 1), min_size=0, max_size=60))
def test_boolean_decompositions_respect_the_guard(word):
    R = ramsey_number(BOOL, 3).value
    blocks, tail = block_decomposition(BOOL, word)
    assert check_block_decomposition(BOOL, word, blocks, tail, ramsey=R)


@settings(max_examples=40)
@given(st.integers(0, 2 ** 32 - 1))
def test_flow_decompositions_are_valid(intro_sg, seed):
    S, _, gens = intro_sg
    rng = random.Random(seed)
    word = [rng.choice(list(gens.values())) for _ in range(rng.randint(1, 80))]
    for reduce in (False, True):
        blocks, tail = block_decomposition(S, word, greedy=True, reduce=reduce)
        assert check_block_decomposition(S, word, blocks, tail)


# ---------------------------------------------------------------- summaries

def test_summary_of_a_b_cubed_a(intro_sg):
    S, _, g = intro_sg
    word = [g["a"], g["b"], g["b"], g["b"], g["a"]]
    tree = build_summary(S, word)
    assert check_summary(S, word, tree)
    assert tree.element == S.eval(word)
    assert tree.size == 7 and tree.height == 3


def test_summary_rejects_empty_word(intro_sg):
    S, sh, _ = intro_sg
    with pytest.raises(ValueError):
        build_summary(S, [])
    with pytest.raises(ValueError):
        build_sharp_summary(S, [], sh)


@pytest.mark.parametrize("n", [3, 4, 10, 40])
def test_sharp_summary_of_a_bn_a(intro_sg, n):
    S, sh, g = intro_sg
    word = [g["a"]] + [g["b"]] * n + [g["a"]]
    tree = build_sharp_summary(S, word, sh)
    assert check_summary(S, word, tree, sh)
    assert tree.element == S.mul(S.mul(g["a"], sh(g["b"])), g["a"])
    assert tree.max_unstable_per_branch() == 1
    assert descendants_j_above(S, tree)


@settings(max_examples=30)
@given(instances(max_n=3, max_letters=2), st.integers(0, 2 ** 32 - 1))
def test_random_summaries(inst, seed):
    S, sh = flow_semigroup(inst)
    gens = [S.index[x] for x in inst.generators().values()]
    rng = random.Random(seed)
    word = [rng.choice(gens) for _ in range(rng.randint(1, 120))]
    tree = build_summary(S, word)
    assert check_summary(S, word, tree)
    assert tree.element == S.eval(word)
    assert descendants_j_above(S, tree)
    R = ramsey_number(S, 3, max_states=2000).value
    assert tree.height <= summary_height_bound(S, R)
    stree = build_sharp_summary(S, word, sh)
    assert check_summary(S, word, stree, sh)
    assert stree.max_unstable_per_branch() <= inst.n ** 2 - 1


def test_render_marks_iterated_nodes(intro_sg):
    S, sh, g = intro_sg
    tree = build_sharp_summary(S, [g["a"]] + [g["b"]] * 5 + [g["a"]], sh)
    assert "idempotent#" in tree.render()


# ---------------------------------------------------------------- bounds

def test_bound_config_values():
    cfg = BoundConfig()
    assert cfg.sharp_expression_height(2) == 32
    assert cfg.sharp_height(3) == 8
    assert cfg.summary_height(1) == 536
    assert cfg.sharp_summary_height(2) == 4 * 536 * 2 ** 10
    assert cfg.closure_size_bound(2) == 81
    assert cfg.boolean_j_length_bound(2) == 4
    assert cfg.flow_bound(3, 1) == 3
    assert math.isclose(cfg.flow_bound_log2(4, 2), 2 + cfg.sharp_summary_height(2))
    with pytest.raises(OverflowError):
        cfg.flow_bound(3, 2)
    assert cfg.flow_bound_log2(0, 3) == float("-inf")
    assert cfg.regular_bound_log2(1, 1, 1) == 835
