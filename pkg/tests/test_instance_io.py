import json

import pytest
from hypothesis import given

from conftest import fixture_path, instances
from seqflow.errors import ParseError, UsageError, ValidationError
from seqflow.instance import (instance_from_json, instance_to_json, load_instance, make_instance,
                              parse_instance, parse_nfa, serialize_instance)
from seqflow.mm_algebra import OMEGA


def test_figure_instance(fig1):
    assert fig1.n == 4 and fig1.K == 2
    assert fig1.letters == ["c", "d", "e"]
    assert fig1.capacity("c")[0, 1] is OMEGA and fig1.capacity("e")[1, 3] == 2


def test_missing_capacities():
    with pytest.raises(ParseError):
        load_instance(fixture_path("missing-capacities.json"))


def test_source_inflow_is_rejected():
    with pytest.raises(ValidationError, match="v2->v1"):
        load_instance(fixture_path("bad-source-inflow.json"))


@pytest.mark.parametrize("text,exc", [
    ("not json", ParseError),
    ("[1, 2]", ParseError),
    ('{"vertices": [], "source": "v1", "target": "v2", "capacities": {}}', ParseError),
    ('{"vertices": ["v1", "v1"], "source": "v1", "target": "v1", "capacities": {}}', ValidationError),
    ('{"vertices": ["v1", "v2"], "source": "v1", "target": "v3", "capacities": {"a": {}}}', ValidationError),
    ('{"vertices": ["v1", "v2"], "source": "v1", "target": "v1", "capacities": {"a": {}}}', ValidationError),
    ('{"vertices": ["v1", "v2"], "source": "v1", "target": "v2", "capacities": {}}', ValidationError),
    ('{"vertices": ["v1", "v2"], "source": "v1", "target": "v2", "capacities": {"a": {"v1-v2": 1}}}', ParseError),
    ('{"vertices": ["v1", "v2"], "source": "v1", "target": "v2", "capacities": {"a": {"v1->v2": "lots"}}}', ParseError),
    ('{"vertices": ["v1", "v2"], "source": "v1", "target": "v2", "capacities": {"a": {"v1->v2": -1}}}', ValidationError),
    ('{"vertices": ["v1", "v2"], "source": "v1", "target": "v2", "capacities": {"a": {"v2->v2": 1}}}', ValidationError),
    ('{"vertices": ["v1", "v2"], "source": "v1", "target": "v2", "capacities": {"a": {"v1->v2": 1}}, "edges": []}', ValidationError),
    ('{"vertices": ["v1", "v2"], "source": "v1", "target": "v2", "capacities": {"a": {"v1->v2": 1}}, '
     '"nfa": {"states": 1, "initial": ["q0"], "final": ["q0"], "delta": [["q0", "z", "q0"]]}}', ValidationError),
    ('{"vertices": ["v1", "v2"], "source": "v1", "target": "v2", "capacities": {"a": {"v1->v2": 1}}, '
     '"nfa": {"states": 1, "initial": ["q0"], "final": ["q9"], "delta": []}}', ValidationError),
])
def test_malformed_files(text, exc):
    with pytest.raises(exc):
        parse_instance(text)


def test_full_format_round_trip():
    obj = {"vertices": ["s", "m", "t"], "source": "s", "target": "t",
           "capacities": {"a": {"s->m": "omega", "m->t": 3}, "b": {"m->m": 1}},
           "edges": [["s", "t"], ["m", "t"]],
           "nfa": {"states": 2, "initial": ["q0"], "final": ["q1"],
                   "delta": [["q0", "a", "q1"], ["q1", "b", "q1"]]}}
    inst = instance_from_json(obj)
    assert inst.edges == ((0, 2), (1, 2))
    assert inst.nfa.states == ("q0", "q1") and inst.nfa.accepts(["a", "b", "b"])
    assert parse_instance(serialize_instance(inst)) == inst
    assert instance_to_json(inst)["capacities"]["a"] == {"s->m": "omega", "m->t": 3}


@given(instances(max_n=4, max_letters=3, max_cap=5))
def test_round_trip(inst):
    assert parse_instance(serialize_instance(inst)) == inst


def test_restrict_and_lookup(fig1):
    c = fig1.restrict(["c"])
    assert c.letters == ["c"] and c.vertex("v3") == 2 and c.vertex(1) == 1
    with pytest.raises(UsageError):
        fig1.vertex("v9")
    with pytest.raises(UsageError):
        fig1.restrict(["z"])


def test_nfa_parsing():
    with open(fixture_path("nfa-aba.json")) as fh:
        nfa = parse_nfa(json.load(fh))
    assert nfa.m == 3 and nfa.accepts("abba") and not nfa.accepts("ab")
    with pytest.raises(ParseError):
        parse_nfa({"states": 1})
    with pytest.raises(ParseError):
        parse_nfa({"states": "x", "initial": [], "final": [], "delta": []})
    with pytest.raises(ValidationError):
        parse_nfa({"states": 1, "initial": ["q0"], "final": ["q0"], "delta": [["q0", "z", "q0"]]}, {"a": None})


def test_make_instance_validates():
    with pytest.raises(ValidationError):
        make_instance(2, {"a": [[1, 0], [0, 0]]})
    inst = make_instance(3, {"a": [[0, 1, 0], [0, 0, OMEGA], [0, 0, 0]]}, names=["s", "x", "t"])
    assert inst.vertices == ("s", "x", "t") and inst.K == 1
