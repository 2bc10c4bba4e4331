"""Iteration of idempotents, ω-graph structure, the flow semigroup closure and
explicit token-flow realizations of its elements."""
from __future__ import annotations

import enum
import os
import re
from dataclasses import dataclass, field
from typing import Optional

from .errors import ResourceLimitError, UsageError
from .maxflow import TokenFlow, find_path
from .mm_algebra import OMEGA, AbstractMatrix, MMValue, _bool_product, is_idempotent, product


class PairClass(enum.Enum):
    ZERO = "Zero"
    OMEGA = "Omega"
    STABLE1 = "Stable1"
    UNSTABLE1 = "Unstable1"


def _require_idempotent(e: AbstractMatrix):
    if not is_idempotent(e):
        raise UsageError("operation requires an idempotent matrix")


def _exact_one(e: AbstractMatrix) -> tuple:
    return tuple(a & ~b for a, b in zip(e.one, e.om))


def unstable_mask(e: AbstractMatrix) -> tuple:
    """Row masks of the unstable pairs: 1-entries bridged ω, 1, ω."""
    ones = _exact_one(e)
    bridge = _bool_product(_bool_product(e.om, ones), e.om)
    return tuple(o & b for o, b in zip(ones, bridge))


def classify_pair(e: AbstractMatrix, v: int, v2: int) -> PairClass:
    _require_idempotent(e)
    val = e[v, v2]
    if val == MMValue.ZERO:
        return PairClass.ZERO
    if val == MMValue.OMEGA:
        return PairClass.OMEGA
    if (unstable_mask(e)[v] >> v2) & 1:
        return PairClass.UNSTABLE1
    return PairClass.STABLE1


def sharp(e: AbstractMatrix) -> AbstractMatrix:
    """Promote the unstable 1-entries of an idempotent to ω."""
    _require_idempotent(e)
    return AbstractMatrix(e.n, e.one, tuple(b | u for b, u in zip(e.om, unstable_mask(e))))


def is_stable(e: AbstractMatrix) -> bool:
    return not any(unstable_mask(e))


def unstable_pairs(e: AbstractMatrix) -> list:
    mask = unstable_mask(e)
    return [(i, j) for i in range(e.n) for j in range(e.n) if (mask[i] >> j) & 1]


def _transitive_closure(rows: tuple, n: int) -> list:
    reach = list(rows)
    for k in range(n):
        bit = 1 << k
        for i in range(n):
            if reach[i] & bit:
                reach[i] |= reach[k]
    return reach


def omega_structure(e: AbstractMatrix):
    """Nontrivial SCCs of the ω-edge graph and the ω-edges between distinct ones.

    Returns (components, relation): components are frozensets sorted by least
    vertex, relation is a set of (i, j) component index pairs.
    """
    n = e.n
    reach = _transitive_closure(e.om, n)
    comps = []
    seen = set()
    for u in range(n):
        if u in seen or not (reach[u] >> u) & 1:
            continue
        comp = frozenset(v for v in range(n) if (reach[u] >> v) & 1 and (reach[v] >> u) & 1)
        seen |= comp
        comps.append(comp)
    where = {v: k for k, c in enumerate(comps) for v in c}
    rel = set()
    for u in range(n):
        for v in range(n):
            if (e.om[u] >> v) & 1 and u in where and v in where and where[u] != where[v]:
                rel.add((where[u], where[v]))
    return comps, rel


def decompose_unstable(e: AbstractMatrix) -> list:
    """Simple unstable idempotents e_1..e_m with e♯ ≤ e·e_1♯···e_m♯·e.

    One per unstable pair whose endpoints both carry ω self-loops; each keeps the
    diagonal of e plus that single 1-entry.
    """
    _require_idempotent(e)
    pairs = [(p, q) for (p, q) in unstable_pairs(e)
             if e[p, p] == MMValue.OMEGA and e[q, q] == MMValue.OMEGA]
    if not unstable_pairs(e):
        raise UsageError("decompose_unstable needs an unstable idempotent")
    diag_one = [(1 << i) if (e.one[i] >> i) & 1 else 0 for i in range(e.n)]
    diag_om = [(1 << i) if (e.om[i] >> i) & 1 else 0 for i in range(e.n)]
    out = []
    for (p, q) in pairs:
        one = list(diag_one)
        one[p] |= 1 << q
        out.append(AbstractMatrix(e.n, one, diag_om))
    return out


# ---------------------------------------------------------------- expressions

class SharpExpression:
    """Derivation tree of a flow-semigroup element. Every node caches its value."""

    value: AbstractMatrix

    @property
    def height(self) -> int:
        raise NotImplementedError

    @property
    def sharp_height(self) -> int:
        raise NotImplementedError

    def evaluate(self, generators: dict) -> AbstractMatrix:
        raise NotImplementedError

    def factors(self) -> list:
        return [self]

    def serialize(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.serialize()


@dataclass(frozen=True, eq=False)
class Leaf(SharpExpression):
    name: str
    value: AbstractMatrix

    height = 0
    sharp_height = 0

    def evaluate(self, generators):
        return generators[self.name]

    def serialize(self):
        return self.name


@dataclass(frozen=True, eq=False)
class Product(SharpExpression):
    left: SharpExpression
    right: SharpExpression
    value: AbstractMatrix = field(default=None)

    def __post_init__(self):
        if self.value is None:
            object.__setattr__(self, "value", product(self.left.value, self.right.value))

    @property
    def height(self):
        return 1 + max(self.left.height, self.right.height)

    @property
    def sharp_height(self):
        return max(self.left.sharp_height, self.right.sharp_height)

    def evaluate(self, generators):
        return product(self.left.evaluate(generators), self.right.evaluate(generators))

    def factors(self):
        return self.left.factors() + self.right.factors()

    def serialize(self):
        return "(" + ".".join(f.serialize() for f in self.factors()) + ")"


@dataclass(frozen=True, eq=False)
class Sharp(SharpExpression):
    child: SharpExpression
    value: AbstractMatrix = field(default=None)

    def __post_init__(self):
        if self.value is None:
            object.__setattr__(self, "value", sharp(self.child.value))

    @property
    def height(self):
        return 1 + self.child.height

    @property
    def sharp_height(self):
        return 1 + self.child.sharp_height

    def evaluate(self, generators):
        return sharp(self.child.evaluate(generators))

    def serialize(self):
        inner = self.child.serialize()
        if not isinstance(self.child, Product):
            inner = "(" + inner + ")"
        return inner + "#"


def check_expression(expr: SharpExpression, generators: dict) -> bool:
    """Cached values agree with re-evaluation and ♯ only wraps idempotents."""
    if isinstance(expr, Leaf):
        return generators.get(expr.name) == expr.value
    if isinstance(expr, Product):
        return (check_expression(expr.left, generators) and check_expression(expr.right, generators)
                and product(expr.left.value, expr.right.value) == expr.value)
    if isinstance(expr, Sharp):
        return (check_expression(expr.child, generators) and is_idempotent(expr.child.value)
                and sharp(expr.child.value) == expr.value)
    return False


_TOKEN = re.compile(r"\s*(?:([()#.])|([^\s().#]+))")


def parse_expression(text: str, generators: dict) -> SharpExpression:
    """Inverse of ``serialize``; also accepts spaces and binary nesting."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise UsageError(f"bad expression near {text[pos:]!r}")
        tokens.append(m.group(1) or ("name", m.group(2)))
        pos = m.end()
    tokens = [t for t in tokens if t != ""]
    i = 0

    def peek():
        return tokens[i] if i < len(tokens) else None

    def atom():
        nonlocal i
        t = peek()
        if t == "(":
            i += 1
            parts = [expr()]
            while peek() == ".":
                i += 1
                parts.append(expr())
            if peek() != ")":
                raise UsageError("unbalanced parentheses in expression")
            i += 1
            node = parts[0]
            for p in parts[1:]:
                node = Product(node, p)
            return node
        if isinstance(t, tuple):
            i += 1
            name = t[1]
            if name not in generators:
                raise UsageError(f"unknown generator {name!r}")
            return Leaf(name, generators[name])
        raise UsageError(f"unexpected token {t!r}")

    def expr():
        nonlocal i
        node = atom()
        while peek() == "#":
            i += 1
            if not is_idempotent(node.value):
                raise UsageError("♯ applied to a non-idempotent subexpression")
            node = Sharp(node)
        return node

    result = expr()
    if i != len(tokens):
        raise UsageError("trailing input in expression")
    return result


# ---------------------------------------------------------------- closure

def default_max_closure() -> int:
    raw = os.environ.get("SEQFLOW_MAX_CLOSURE")
    return int(raw) if raw else 10 ** 7


@dataclass
class FlowSemigroup:
    generators: dict  # name -> AbstractMatrix
    elements: list  # discovery order
    provenance: dict  # AbstractMatrix -> SharpExpression
    depth: dict  # AbstractMatrix -> BFS level (= minimal expression height)

    def __contains__(self, x):
        return x in self.provenance

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def idempotents(self) -> list:
        return [x for x in self.elements if is_idempotent(x)]

    def level_sets(self) -> list:
        """levels[h] is the set of elements with a ♯-expression of height ≤ h."""
        top = max(self.depth.values(), default=0)
        out = []
        acc = set()
        by_depth = {}
        for x, d in self.depth.items():
            by_depth.setdefault(d, []).append(x)
        for h in range(top + 1):
            acc |= set(by_depth.get(h, ()))
            out.append(frozenset(acc))
        return out


def generate_closure(generators, names=None, max_size: Optional[int] = None) -> FlowSemigroup:
    """Breadth-first saturation under product and ♯.

    Level k+1 holds the products with a level-k factor, then the iterations of
    level-k idempotents; candidates are visited in canonical encoding order, so
    each element keeps a minimal-height provenance (fewest nodes among those,
    first found on ties).
    """
    if isinstance(generators, dict):
        names, mats = list(generators), list(generators.values())
    else:
        mats = list(generators)
        names = list(names) if names else [f"g{i}" for i in range(len(mats))]
    if mats and len({m.n for m in mats}) != 1:
        raise UsageError("generators must share one dimension")
    cap = default_max_closure() if max_size is None else max_size
    prov, depth, size, elements = {}, {}, {}, []
    for name, x in zip(names, mats):
        if x not in prov:
            prov[x] = Leaf(name, x)
            depth[x] = 0
            size[x] = 1
            elements.append(x)
    frontier = sorted(elements, key=AbstractMatrix.encode)
    level = 0
    while frontier:
        level += 1
        everything = sorted(elements, key=AbstractMatrix.encode)
        fresh = set(frontier)
        new = []
        for x in everything:
            x_new = x in fresh
            for y in everything:
                if not (x_new or y in fresh):
                    continue
                z = product(x, y)
                if z not in prov:
                    prov[z] = Product(prov[x], prov[y], z)
                    size[z] = size[x] + size[y] + 1
                    depth[z] = level
                    new.append(z)
                    if len(prov) > cap:
                        raise ResourceLimitError(f"flow semigroup exceeds {cap} elements")
                elif depth[z] == level and size[x] + size[y] + 1 < size[z]:
                    # same height, fewer nodes: keep the smaller derivation
                    prov[z] = Product(prov[x], prov[y], z)
                    size[z] = size[x] + size[y] + 1
        for e in frontier:
            if is_idempotent(e):
                z = sharp(e)
                if z not in prov:
                    prov[z] = Sharp(prov[e], z)
                    size[z] = size[e] + 1
                    depth[z] = level
                    new.append(z)
        elements.extend(new)
        frontier = sorted(new, key=AbstractMatrix.encode)
    return FlowSemigroup(dict(zip(names, mats)), elements, prov, depth)


def find_witness(F: FlowSemigroup, source: int, target: int, edges=None):
    """First element (in discovery order) with ω on (source, target), or on every pair of `edges`."""
    pairs = list(edges) if edges else [(source, target)]
    for x in F.elements:
        if all(x[u, v] == MMValue.OMEGA for u, v in pairs):
            return x, F.provenance[x]
    return None


# ---------------------------------------------------------------- realization

def _route(values: list, u: int, v: int) -> list:
    """Vertices u = x_0, ..., x_k = v with values[j](x_j, x_j+1) = ω, lowest indices first."""
    k = len(values)
    n = values[0].n
    # back[j] = vertices from which v is reachable through factors j..k-1
    back = [0] * (k + 1)
    back[k] = 1 << v
    for j in range(k - 1, -1, -1):
        m = values[j].om
        back[j] = sum(1 << x for x in range(n) if m[x] & back[j + 1])
    if not (back[0] >> u) & 1:
        raise AssertionError("pair is not ω in the product")
    path = [u]
    for j in range(k):
        cur = path[-1]
        nxt = min(y for y in range(n) if (values[j].om[cur] >> y) & 1 and (back[j + 1] >> y) & 1)
        path.append(nxt)
    return path


class _Realizer:
    def __init__(self, instance):
        self.instance = instance

    def run(self, node: SharpExpression, demand: dict):
        """(word, groups) with groups[(u, v)] a list of trajectories u → v, at
        least demand[(u, v)] of them, valid together over word."""
        if isinstance(node, Leaf):
            return self.leaf(node, demand)
        if isinstance(node, Product):
            return self.chain([node.left, node.right], [node.left.value, node.right.value], demand)
        if isinstance(node, Sharp):
            return self.sharp(node, demand)
        raise UsageError(f"malformed expression node {node!r}")

    def leaf(self, node, demand):
        for (u, v), d in demand.items():
            if d and node.value[u, v] != MMValue.OMEGA:
                raise AssertionError("demand on a non-ω pair")
        return [node.name], {p: [p] * d for p, d in demand.items() if d}

    def chain(self, parts, values, demand, realize=None):
        """Realize a product of factors. parts[j] is realized by realize(j, demand_j)."""
        k = len(parts)
        routes = []
        sub = [dict() for _ in range(k)]
        for (u, v), d in sorted(demand.items()):
            if not d:
                continue
            path = _route(values, u, v)
            routes.append((path, d))
            for j in range(k):
                key = (path[j], path[j + 1])
                sub[j][key] = sub[j].get(key, 0) + d
        results = [realize(j, sub[j]) if realize else self.run(parts[j], sub[j]) for j in range(k)]
        word = [a for (w, _) in results for a in w]
        pools = [{p: list(ts) for p, ts in g.items()} for (_, g) in results]
        groups = {}
        for path, d in routes:
            out = groups.setdefault((path[0], path[-1]), [])
            for _ in range(d):
                traj = list(pools[0][(path[0], path[1])].pop())
                for j in range(1, k):
                    traj.extend(pools[j][(path[j], path[j + 1])].pop()[1:])
                out.append(tuple(traj))
        return word, groups

    def sharp(self, node, demand):
        e = node.child.value
        if is_stable(e):
            return self.run(node.child, demand)
        simple = decompose_unstable(e)
        values = [e] + [sharp(s) for s in simple] + [e]

        def realize(j, dem):
            if j == 0 or j == len(values) - 1:
                return self.run(node.child, dem)
            s = simple[j - 1]
            pair = next(p for p in unstable_pairs(s))
            return self.simple_sharp(node.child, e, pair, dem)

        return self.chain(list(range(len(values))), values, demand, realize)

    def simple_sharp(self, child, e, pair, demand):
        """Iterate a simple unstable idempotent: loops of e plus `pair` promoted to ω."""
        p, q = pair
        loops = [u for u in range(e.n) if e[u, u] == MMValue.OMEGA]
        ell = {u: demand.get((u, u), 0) for u in loops}
        D = demand.get((p, q), 0)
        if D == 0:
            word, groups = self.run(child, {(u, u): ell[u] for u in loops if ell[u]})
            return word, groups
        need = dict(ell)
        need[p] += D - 1
        need[q] += D - 1
        slack = 2
        while True:
            single = self._single_transfer(child, loops, need, slack, p, q)
            if single is not None:
                break
            slack *= 2
            if slack > 1 << 20:  # pragma: no cover - the construction always succeeds
                raise RuntimeError("could not route the iteration token")
        w1, loop_tokens, tau = single
        # chunk j moves one token p → q; p keeps ell[p] + D - j loop tokens, q gains one per chunk
        at = {u: [("L", u, k) for k in range(ell[u])] for u in loops}
        at[p] = [("L", p, k) for k in range(ell[p] + D)]
        traj = {tok: [u] for u in loops for tok in at[u]}
        moved = []
        for j in range(1, D + 1):
            mover = at[p].pop()
            for u in loops:
                for k, tok in enumerate(at[u]):
                    traj[tok].extend(loop_tokens[u][k][1:])
            traj[mover].extend(tau[1:])
            at[q].append(mover)
            moved.append(mover)
        word = w1 * D
        groups = {}
        for u in loops:
            stay = [t for t in at[u] if t not in moved]
            if ell[u]:
                groups[(u, u)] = [tuple(traj[t]) for t in stay[:ell[u]]]
        groups[(p, q)] = [tuple(traj[t]) for t in moved]
        return word, groups

    def _single_transfer(self, child, loops, need, slack, p, q):
        """One copy-chain over child's word moving a fresh token p → q while
        keeping need[u] tokens on every ω-loop u; None if slack was too small."""
        inst = self.instance
        base_word, base_groups = self.run(child, {(u, u): need[u] + slack for u in loops})
        base = [(u, t) for u in loops for t in base_groups.get((u, u), [])]
        T = len(base_word)
        pi = find_path(inst, base_word, p, q)
        if pi is None:  # pragma: no cover - e(p, q) = 1 guarantees a path
            raise AssertionError("no path for the unstable pair")
        crossers = [[k for k, (_, t) in enumerate(base) if t[d] == pi[d]] for d in range(T + 1)]
        caps = [inst.capacity(a) for a in base_word]

        copies = []
        tau = []
        start = None  # None: first copy starts on π at date 0
        while True:
            deleted = set()
            if start is None:
                s = 0
                route = [pi[0]]
            else:
                cands = [k for k, (u, _) in enumerate(base) if u == start]
                s = max(d for d in range(T + 1) for k in crossers[d] if k in cands)
                mimic = min(k for k in crossers[s] if k in cands)
                deleted.add(mimic)
                route = list(base[mimic][1][:s + 1])
            nxt = next((d for d in range(s + 1, T + 1) if crossers[d]), None)
            if nxt is None:
                route.extend(pi[s + 1:])
                end = None
            else:
                pool = crossers[nxt]
                via = [k for k in pool if base[k][1][nxt - 1] == pi[nxt - 1]]
                follow = min(via) if via else min(pool)
                deleted.add(follow)
                route.extend(pi[s + 1:nxt + 1])
                route.extend(base[follow][1][nxt + 1:])
                end = base[follow][0]
            self._clear_conflicts(caps, base, route, deleted)
            survivors = {u: [t for k, (v, t) in enumerate(base) if v == u and k not in deleted]
                         for u in loops}
            if any(len(survivors[u]) < need[u] for u in loops):
                return None
            copies.append(survivors)
            tau.extend(route if not tau else route[1:])
            if end is None or end == q:
                break
            start = end
            if len(copies) > len(loops) + 1:  # pragma: no cover - start vertices are distinct
                raise AssertionError("crossing chain did not terminate")
        if tau[-1] != q:  # pragma: no cover
            raise AssertionError("iteration token did not reach its target")
        word = base_word * len(copies)
        loop_tokens = {}
        for u in loops:
            tracks = []
            for k in range(need[u]):
                tr = [u]
                for surv in copies:
                    tr.extend(surv[u][k][1:])
                tracks.append(tr)
            loop_tokens[u] = tracks
        return word, loop_tokens, tau

    @staticmethod
    def _clear_conflicts(caps, base, route, deleted):
        for i, cap in enumerate(caps):
            x, y = route[i], route[i + 1]
            c = cap[x, y]
            if c is OMEGA:
                continue
            users = [k for k, (_, t) in enumerate(base)
                     if k not in deleted and t[i] == x and t[i + 1] == y]
            excess = len(users) + 1 - c
            for k in users[len(users) - excess:] if excess > 0 else ():
                deleted.add(k)


def realize_flow(expr: SharpExpression, N: int, instance):
    """A capacity word and a token flow carrying ≥ N tokens on every ω-pair of expr's value.

    Every pair with value ≥ 1 also has a positive-capacity path in the word.
    """
    if N < 0:
        raise UsageError("N must be nonnegative")
    gens = instance.generators()
    if not check_expression(expr, gens):
        raise UsageError("expression does not evaluate consistently over the instance")
    x = expr.value
    demand = {(u, v): N for u in range(x.n) for v in range(x.n) if N and x[u, v] == MMValue.OMEGA}
    word, groups = _Realizer(instance).run(expr, demand)
    positions = [t for p in sorted(groups) for t in groups[p][:demand.get(p, 0)]]
    return tuple(word), TokenFlow(tuple(word), tuple(positions))
