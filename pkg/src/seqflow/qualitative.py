"""Deciding unboundedness.

Two strategies find the same verdicts: saturating the whole flow semigroup, or
asking for each candidate matrix whether it has a ♯-expression of bounded
height. Fair (multi-edge) and automaton-constrained variants live here too.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import UsageError
from .flow_algebra import Leaf, Product, Sharp, SharpExpression, find_witness, generate_closure, sharp
from .instance import Instance, Nfa
from .mm_algebra import AbstractMatrix, MMValue, all_matrices, is_idempotent, product
from .semigroup import BoundConfig


@dataclass(frozen=True)
class Verdict:
    unbounded: bool
    witness: Optional[SharpExpression] = None
    element: Optional[AbstractMatrix] = None
    labels: Optional[tuple] = None  # (q, q') for automaton witnesses

    @property
    def status(self) -> str:
        return "unbounded" if self.unbounded else "bounded"

    def to_json(self, with_witness: bool = True) -> dict:
        out = {"status": self.status}
        if self.unbounded and with_witness and self.witness is not None:
            out["witness"] = self.witness.serialize()
        return out


def _generators(source) -> dict:
    return source.generators() if isinstance(source, Instance) else dict(source)


def _has_omega_on(x: AbstractMatrix, pairs) -> bool:
    return all(x[u, v] == MMValue.OMEGA for u, v in pairs)


# ---------------------------------------------------------------- bounded-height search

class HeightLevels:
    """levels[h]: elements with a ♯-expression of height ≤ h, grown on demand.

    This is the tabulated form of the recursive membership test: x passes at
    height h iff it is a generator, a product of two height h-1 members, or
    the iteration of a height h-1 idempotent.
    """

    def __init__(self, generators: dict):
        self.generators = dict(generators)
        self.prov = {}
        for name, x in self.generators.items():
            self.prov.setdefault(x, Leaf(name, x))
        self.levels = [frozenset(self.prov)]
        self.saturated = False

    def grow(self, h: int) -> frozenset:
        while len(self.levels) <= h and not self.saturated:
            cur = sorted(self.levels[-1], key=AbstractMatrix.encode)
            nxt = set(cur)
            for y in cur:
                for z in cur:
                    x = product(y, z)
                    if x not in nxt:
                        nxt.add(x)
                        self.prov[x] = Product(self.prov[y], self.prov[z], x)
            for e in cur:
                if is_idempotent(e):
                    x = sharp(e)
                    if x not in nxt:
                        nxt.add(x)
                        self.prov[x] = Sharp(self.prov[e], x)
            if len(nxt) == len(cur):
                self.saturated = True
            else:
                self.levels.append(frozenset(nxt))
        return self.levels[min(h, len(self.levels) - 1)]

    def contains(self, x: AbstractMatrix, h: int) -> bool:
        return x in self.grow(h)


_LEVEL_CACHE: dict = {}


def _levels_for(gens: dict) -> HeightLevels:
    key = tuple(sorted((k, v.encode()) for k, v in gens.items()))
    lv = _LEVEL_CACHE.get(key)
    if lv is None:
        lv = _LEVEL_CACHE[key] = HeightLevels(gens)
    return lv


def is_in_rec(source, x: AbstractMatrix, h: int, strict_space: bool = False) -> bool:
    """Does x have a ♯-expression of height ≤ h over the generators?

    With strict_space the literal recursion runs, enumerating every
    factorization y·z = x and every idempotent e with e♯ = x, with no table.
    That is exponential in n²; use it only for tiny instances.
    """
    gens = _generators(source)
    if h < 0:
        return False
    if not strict_space:
        return _levels_for(gens).contains(x, h)
    pool = list(gens.values())
    universe = list(all_matrices(x.n))

    def rec(y, k):
        if y in pool:
            return True
        if k == 0:
            return False
        for a in universe:
            for b in universe:
                if product(a, b) == y and rec(a, k - 1) and rec(b, k - 1):
                    return True
        for e in universe:
            if is_idempotent(e) and sharp(e) == y and rec(e, k - 1):
                return True
        return False

    return rec(x, h)


def sharp_expression_height_bound(n: int) -> int:
    return BoundConfig().sharp_expression_height(n)


# ---------------------------------------------------------------- verdicts

def _pairs(instance: Instance, edges) -> list:
    pairs = list(edges) if edges is not None else list(instance.fair_edges())
    if not pairs:
        raise UsageError("fair edge set must be nonempty")
    return pairs


def check_unbounded(instance: Instance, strategy: str = "closure", edges=None,
                    height: Optional[int] = None) -> Verdict:
    """Unbounded iff some flow-semigroup element has ω on (source, target),
    or on every pair of `edges` when given."""
    pairs = _pairs(instance, edges) if edges is not None else [(instance.source, instance.target)]
    gens = instance.generators()
    if strategy == "closure":
        F = generate_closure(gens)
        hit = find_witness(F, instance.source, instance.target, pairs)
        if hit is None:
            return Verdict(False)
        return Verdict(True, hit[1], hit[0])
    if strategy == "bounded":
        H = sharp_expression_height_bound(instance.n) if height is None else height
        levels = _levels_for(gens)
        members = levels.grow(H)
        # candidates in canonical order; membership is the height-H test
        for x in sorted(members, key=AbstractMatrix.encode):
            if _has_omega_on(x, pairs):
                return Verdict(True, levels.prov[x], x)
        return Verdict(False)
    raise UsageError(f"unknown strategy {strategy!r}")


def check_fair_unbounded(instance: Instance, edges, strategy: str = "closure") -> Verdict:
    if not edges:
        raise UsageError("fair edge set must be nonempty")
    return check_unbounded(instance, strategy, edges=list(edges))


def closure_with_sharp_height(generators: dict, max_sharp: int) -> set:
    """Elements having an expression with at most `max_sharp` nested iterations."""
    def product_closure(start):
        out = set(start)
        todo = list(out)
        while todo:
            x = todo.pop()
            for y in list(out):
                for z in (product(x, y), product(y, x)):
                    if z not in out:
                        out.add(z)
                        todo.append(z)
        return out

    cur = product_closure(generators.values())
    for _ in range(max_sharp):
        cur = product_closure(cur | {sharp(e) for e in cur if is_idempotent(e)})
    return cur


def minimal_sharp_height(generators: dict, pairs, limit: int) -> Optional[int]:
    """Least k such that an element with ω on all pairs needs only k nested iterations."""
    for k in range(limit + 1):
        if any(_has_omega_on(x, pairs) for x in closure_with_sharp_height(generators, k)):
            return k
    return None


# ---------------------------------------------------------------- labeled semigroup

class _Bottom:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BOTTOM"


BOTTOM = _Bottom()


@dataclass(frozen=True)
class LabeledElement:
    start: str
    value: AbstractMatrix
    end: str


def star(x, y):
    if x is BOTTOM or y is BOTTOM or x.end != y.start:
        return BOTTOM
    return LabeledElement(x.start, product(x.value, y.value), y.end)


def labeled_is_idempotent(x) -> bool:
    return star(x, x) == x


def labeled_sharp(x):
    if x is BOTTOM:
        return BOTTOM
    if x.start != x.end or not is_idempotent(x.value):
        raise UsageError("iteration needs a labeled idempotent")
    return LabeledElement(x.start, sharp(x.value), x.end)


@dataclass
class LabeledClosure:
    elements: list
    provenance: dict

    def __len__(self):
        return len(self.elements)


def generate_labeled_closure(instance: Instance, nfa: Nfa) -> LabeledClosure:
    gens = instance.generators()
    prov = {}
    elements = []
    for (q, a, q2) in nfa.delta:
        if a not in gens:
            raise UsageError(f"automaton label {a!r} is not a capacity name")
        x = LabeledElement(q, gens[a], q2)
        if x not in prov:
            prov[x] = Leaf(a, gens[a])
            elements.append(x)
    k = 0
    while k < len(elements):
        x = elements[k]
        for y in elements[:k + 1]:
            for (l, r) in ((x, y), (y, x)):
                z = star(l, r)
                if z not in prov:
                    prov[z] = None if z is BOTTOM else Product(prov[l], prov[r], z.value)
                    elements.append(z)
        if x is not BOTTOM and labeled_is_idempotent(x):
            z = labeled_sharp(x)
            if z not in prov:
                prov[z] = Sharp(prov[x], z.value)
                elements.append(z)
        k += 1
    return LabeledClosure(elements, prov)


def check_regular_unbounded(instance: Instance, nfa: Optional[Nfa] = None, edges=None) -> Verdict:
    nfa = nfa if nfa is not None else instance.nfa
    if nfa is None:
        nfa = Nfa.universal(instance.letters)
    pairs = _pairs(instance, edges)
    closure = generate_labeled_closure(instance, nfa)
    for x in closure.elements:
        if x is BOTTOM:
            continue
        if x.start in nfa.initial and x.end in nfa.final and _has_omega_on(x.value, pairs):
            return Verdict(True, closure.provenance[x], x.value, (x.start, x.end))
    return Verdict(False)


def decide(instance: Instance, strategy: str = "closure") -> Verdict:
    """Dispatch on the instance's options: automaton first, then fair edges."""
    if instance.nfa is not None:
        return check_regular_unbounded(instance, instance.nfa)
    if instance.edges is not None:
        return check_fair_unbounded(instance, instance.edges, strategy)
    return check_unbounded(instance, strategy)
