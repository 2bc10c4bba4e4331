"""Problem instances, automata, and the JSON file format.

Example file::

    {"vertices": ["v1", "v2", "v3", "v4"], "source": "v1", "target": "v4",
     "capacities": {"c": {"v1->v2": "omega", "v2->v3": 1}},
     "edges": [["v1", "v4"]],
     "nfa": {"states": 2, "initial": ["q0"], "final": ["q1"],
             "delta": [["q0", "c", "q1"]]}}

Edges not listed in a capacity map have capacity 0.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .errors import ParseError, UsageError, ValidationError
from .mm_algebra import OMEGA, AbstractMatrix, CapacityMatrix, abstract


@dataclass(frozen=True)
class Nfa:
    states: tuple
    initial: frozenset
    final: frozenset
    delta: tuple  # of (q, letter, q')

    @property
    def m(self) -> int:
        return len(self.states)

    def index(self, q) -> int:
        return self.states.index(q)

    def accepts(self, word) -> bool:
        cur = set(self.initial)
        for a in word:
            cur = {q2 for (q1, b, q2) in self.delta if q1 in cur and b == a}
            if not cur:
                return False
        return bool(cur & self.final)

    @classmethod
    def universal(cls, letters) -> "Nfa":
        return cls(("q0",), frozenset({"q0"}), frozenset({"q0"}),
                   tuple(("q0", a, "q0") for a in letters))

    def to_json(self) -> dict:
        return {
            "states": list(self.states),
            "initial": sorted(self.initial),
            "final": sorted(self.final),
            "delta": [list(t) for t in self.delta],
        }


@dataclass(frozen=True)
class Instance:
    vertices: tuple
    source: int
    target: int
    capacities: dict = field(hash=False)  # name -> CapacityMatrix, insertion ordered
    edges: Optional[tuple] = None  # fair edge set as (i, j) index pairs
    nfa: Optional[Nfa] = None

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def letters(self) -> list:
        return list(self.capacities)

    @property
    def K(self) -> int:
        return max((c.max_finite() for c in self.capacities.values()), default=0)

    def generators(self) -> dict:
        return {a: abstract(c) for a, c in self.capacities.items()}

    def generator(self, a: str) -> AbstractMatrix:
        return abstract(self.capacity(a))

    def capacity(self, a: str) -> CapacityMatrix:
        try:
            return self.capacities[a]
        except KeyError:
            raise UsageError(f"unknown capacity letter {a!r}") from None

    def vertex(self, name) -> int:
        if isinstance(name, int):
            if not 0 <= name < self.n:
                raise UsageError(f"vertex index {name} out of range")
            return name
        try:
            return self.vertices.index(name)
        except ValueError:
            raise UsageError(f"unknown vertex {name!r}") from None

    def fair_edges(self) -> tuple:
        return self.edges if self.edges else ((self.source, self.target),)

    def restrict(self, letters) -> "Instance":
        """Same graph, only the named capacities (and NFA transitions over them)."""
        caps = {a: self.capacity(a) for a in letters}
        nfa = self.nfa
        if nfa is not None:
            nfa = Nfa(nfa.states, nfa.initial, nfa.final,
                      tuple(t for t in nfa.delta if t[1] in caps))
        return Instance(self.vertices, self.source, self.target, caps, self.edges, nfa)

    def with_options(self, edges=None, nfa=None) -> "Instance":
        return Instance(self.vertices, self.source, self.target, self.capacities,
                        self.edges if edges is None else tuple(edges),
                        self.nfa if nfa is None else nfa)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.vertices == other.vertices and self.source == other.source
                and self.target == other.target
                and list(self.capacities.items()) == list(other.capacities.items())
                and self.edges == other.edges and self.nfa == other.nfa)

    def __hash__(self):
        return hash((self.vertices, self.source, self.target, tuple(self.capacities)))


def make_instance(n: int, capacities: dict, source: int = 0, target: Optional[int] = None,
                  edges=None, nfa: Optional[Nfa] = None, names=None) -> Instance:
    """Build and validate an instance from index-based rows."""
    target = n - 1 if target is None else target
    names = tuple(names) if names else tuple(f"v{i + 1}" for i in range(n))
    caps = {a: c if isinstance(c, CapacityMatrix) else CapacityMatrix(c)
            for a, c in capacities.items()}
    inst = Instance(names, source, target, caps,
                    tuple(tuple(e) for e in edges) if edges else None, nfa)
    validate_instance(inst)
    return inst


def validate_instance(inst: Instance) -> None:
    if inst.source == inst.target:
        raise ValidationError("source and target must differ")
    if not inst.capacities:
        raise ValidationError("instance needs at least one capacity")
    s, t = inst.source, inst.target
    for a, cap in inst.capacities.items():
        if cap.n != inst.n:
            raise ValidationError(f"capacity {a!r} has wrong dimension")
        for v in range(inst.n):
            if cap[v, s] != 0:
                raise ValidationError(
                    f"capacity {a!r}: edge {inst.vertices[v]}->{inst.vertices[s]} "
                    "enters the source; inflow to the source must be 0")
            if cap[t, v] != 0:
                raise ValidationError(
                    f"capacity {a!r}: edge {inst.vertices[t]}->{inst.vertices[v]} "
                    "leaves the target; outflow from the target must be 0")
    if inst.edges is not None:
        if not inst.edges:
            raise ValidationError("fair edge set must be nonempty")
        for (u, v) in inst.edges:
            if not (0 <= u < inst.n and 0 <= v < inst.n):
                raise ValidationError(f"fair edge {(u, v)} out of range")
    if inst.nfa is not None:
        for (q1, a, q2) in inst.nfa.delta:
            if a not in inst.capacities:
                raise ValidationError(f"automaton label {a!r} is not a capacity name")
            if q1 not in inst.nfa.states or q2 not in inst.nfa.states:
                raise ValidationError(f"transition {(q1, a, q2)} uses unknown state")
        if not set(inst.nfa.initial) <= set(inst.nfa.states) or \
                not set(inst.nfa.final) <= set(inst.nfa.states):
            raise ValidationError("initial/final states must be declared states")


def _parse_capacity_value(raw, where):
    if raw == "omega" or raw == "ω":
        return OMEGA
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ParseError(f"{where}: capacity must be an integer or \"omega\", got {raw!r}")
    if raw < 0:
        raise ValidationError(f"{where}: negative capacity {raw}")
    return raw


def parse_nfa(obj, letters=None) -> Nfa:
    if not isinstance(obj, dict):
        raise ParseError("nfa must be an object")
    for key in ("states", "initial", "final", "delta"):
        if key not in obj:
            raise ParseError(f"nfa missing {key!r}")
    states = obj["states"]
    if isinstance(states, int) and not isinstance(states, bool):
        states = tuple(f"q{i}" for i in range(states))
    elif isinstance(states, list):
        states = tuple(str(q) for q in states)
    else:
        raise ParseError("nfa states must be a count or a list of names")
    try:
        delta = tuple((str(q1), str(a), str(q2)) for q1, a, q2 in obj["delta"])
    except (TypeError, ValueError):
        raise ParseError("nfa delta must be a list of [q, letter, q'] triples") from None
    nfa = Nfa(states, frozenset(map(str, obj["initial"])), frozenset(map(str, obj["final"])), delta)
    if letters is not None:
        for (_, a, _) in delta:
            if a not in letters:
                raise ValidationError(f"automaton label {a!r} is not a capacity name")
    return nfa


def instance_from_json(obj) -> Instance:
    if not isinstance(obj, dict):
        raise ParseError("instance must be a JSON object")
    for key in ("vertices", "source", "target", "capacities"):
        if key not in obj:
            raise ParseError(f"missing required field {key!r}")
    vertices = obj["vertices"]
    if not isinstance(vertices, list) or not vertices:
        raise ParseError("vertices must be a nonempty list")
    vertices = tuple(str(v) for v in vertices)
    if len(set(vertices)) != len(vertices):
        raise ValidationError("duplicate vertex names")
    index = {v: i for i, v in enumerate(vertices)}

    def vid(name, where):
        if name not in index:
            raise ValidationError(f"{where}: unknown vertex {name!r}")
        return index[name]

    source = vid(obj["source"], "source")
    target = vid(obj["target"], "target")
    n = len(vertices)
    caps_raw = obj["capacities"]
    if not isinstance(caps_raw, dict):
        raise ParseError("capacities must be an object")
    caps = {}
    for name, edges in caps_raw.items():
        if not isinstance(edges, dict):
            raise ParseError(f"capacity {name!r} must map \"u->v\" keys to values")
        rows = [[0] * n for _ in range(n)]
        for key, raw in edges.items():
            parts = key.split("->")
            if len(parts) != 2:
                raise ParseError(f"capacity {name!r}: malformed edge key {key!r}")
            u = vid(parts[0].strip(), f"capacity {name!r}")
            v = vid(parts[1].strip(), f"capacity {name!r}")
            rows[u][v] = _parse_capacity_value(raw, f"capacity {name!r} edge {key}")
        caps[str(name)] = CapacityMatrix(rows)
    edges = None
    if obj.get("edges") is not None:
        try:
            edges = tuple((vid(u, "edges"), vid(v, "edges")) for u, v in obj["edges"])
        except (TypeError, ValueError):
            raise ParseError("edges must be a list of [u, v] pairs") from None
    nfa = parse_nfa(obj["nfa"], caps) if obj.get("nfa") is not None else None
    inst = Instance(vertices, source, target, caps, edges, nfa)
    validate_instance(inst)
    return inst


def parse_instance(text: str) -> Instance:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    return instance_from_json(obj)


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def instance_to_json(inst: Instance) -> dict:
    vs = inst.vertices
    caps = {}
    for a, cap in inst.capacities.items():
        entries = {}
        for u in range(inst.n):
            for v in range(inst.n):
                c = cap[u, v]
                if c != 0:
                    entries[f"{vs[u]}->{vs[v]}"] = "omega" if c is OMEGA else c
        caps[a] = entries
    out = {"vertices": list(vs), "source": vs[inst.source], "target": vs[inst.target],
           "capacities": caps}
    if inst.edges is not None:
        out["edges"] = [[vs[u], vs[v]] for u, v in inst.edges]
    if inst.nfa is not None:
        out["nfa"] = inst.nfa.to_json()
    return out


def serialize_instance(inst: Instance) -> str:
    return json.dumps(instance_to_json(inst))
