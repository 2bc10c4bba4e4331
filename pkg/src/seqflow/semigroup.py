"""Finite semigroups: Green preorders, regular J-length, Ramsey numbers, block
decompositions, summaries and ♯-summaries, plus the configured bound formulas."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence


class FiniteSemigroup:
    """Elements are numbered 0..size-1; products are computed lazily and cached."""

    def __init__(self, elements: Sequence, mul: Callable, generators: Optional[Sequence] = None,
                 names: Optional[Sequence[str]] = None):
        self.elements = list(elements)
        self.index = {x: i for i, x in enumerate(self.elements)}
        if len(self.index) != len(self.elements):
            raise ValueError("duplicate semigroup elements")
        self._mul = mul
        self._cache = {}
        self._gens = None if generators is None else [self.index[g] for g in generators]
        self.names = list(names) if names else None
        self._green = None
        self._idem = None

    @classmethod
    def from_table(cls, table: Sequence[Sequence[int]]) -> "FiniteSemigroup":
        size = len(table)
        return cls(range(size), lambda x, y: table[x][y])

    @classmethod
    def generated(cls, generators: Sequence, mul: Callable) -> "FiniteSemigroup":
        """Closure of `generators` under `mul`."""
        elements = []
        seen = set()
        for g in generators:
            if g not in seen:
                seen.add(g)
                elements.append(g)
        k = 0
        while k < len(elements):
            x = elements[k]
            for g in list(generators):
                for z in (mul(x, g), mul(g, x)):
                    if z not in seen:
                        seen.add(z)
                        elements.append(z)
            k += 1
        return cls(elements, mul, generators=list(dict.fromkeys(generators)))

    def __len__(self):
        return len(self.elements)

    def mul(self, i: int, j: int) -> int:
        key = (i, j)
        r = self._cache.get(key)
        if r is None:
            z = self._mul(self.elements[i], self.elements[j])
            try:
                r = self.index[z]
            except KeyError:
                raise ValueError("semigroup is not closed under its product") from None
            self._cache[key] = r
        return r

    def eval(self, word: Sequence[int]) -> int:
        it = iter(word)
        acc = next(it)
        for x in it:
            acc = self.mul(acc, x)
        return acc

    def is_idempotent(self, i: int) -> bool:
        return self.mul(i, i) == i

    def idempotents(self) -> list:
        if self._idem is None:
            self._idem = [i for i in range(len(self)) if self.is_idempotent(i)]
        return self._idem

    def generators(self) -> list:
        """A product-generating set: given generators if any, else computed."""
        if self._gens is None:
            size = len(self)
            products = set()
            for i in range(size):
                for j in range(size):
                    products.add(self.mul(i, j))
            gens = [i for i in range(size) if i not in products]
            covered = self._closure_of(gens)
            for i in range(size):
                if i not in covered:
                    gens.append(i)
                    covered = self._closure_of(gens)
            self._gens = gens
        return self._gens

    def _closure_of(self, gens) -> set:
        out = set(gens)
        todo = list(gens)
        while todo:
            x = todo.pop()
            for g in gens:
                for z in (self.mul(x, g), self.mul(g, x)):
                    if z not in out:
                        out.add(z)
                        todo.append(z)
        return out

    def subsemigroup(self, elems: Sequence[int]) -> "FiniteSemigroup":
        members = sorted(self._closure_of(list(dict.fromkeys(elems))))
        sub = FiniteSemigroup(members, lambda x, y: self.mul(x, y), generators=list(dict.fromkeys(elems)))
        return sub

    def green(self) -> "GreenData":
        if self._green is None:
            self._green = green_compare(self)
        return self._green

    def check_associative(self, sample: Optional[Sequence[int]] = None) -> bool:
        idx = range(len(self)) if sample is None else sample
        return all(self.mul(self.mul(x, y), z) == self.mul(x, self.mul(y, z))
                   for x in idx for y in idx for z in idx)


# ---------------------------------------------------------------- Green relations

def _scc(num: int, succ: list) -> list:
    """Tarjan's algorithm, iterative. Returns component id per node, in reverse topological order."""
    index = [0] * num
    low = [0] * num
    on = [False] * num
    seen = [False] * num
    comp = [-1] * num
    stack = []
    counter = 1
    ncomp = 0
    for root in range(num):
        if seen[root]:
            continue
        work = [(root, 0)]
        while work:
            v, k = work.pop()
            if k == 0:
                seen[v] = True
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on[v] = True
            edges = succ[v]
            if k < len(edges):
                work.append((v, k + 1))
                w = edges[k]
                if not seen[w]:
                    work.append((w, 0))
                elif on[w]:
                    low[v] = min(low[v], index[w])
                continue
            for w in edges:
                if on[w] and comp[w] == -1:
                    low[v] = min(low[v], low[w])
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
    return comp


def _down_sets(num: int, succ: list) -> list:
    """down[x]: bitset of everything reachable from x (including x)."""
    comp = _scc(num, succ)
    ncomp = max(comp) + 1 if num else 0
    members = [0] * ncomp
    csucc = [set() for _ in range(ncomp)]
    for v in range(num):
        members[comp[v]] |= 1 << v
        for w in succ[v]:
            if comp[w] != comp[v]:
                csucc[comp[v]].add(comp[w])
    reach = [0] * ncomp
    # Tarjan numbers components in reverse topological order: successors come first
    for c in range(ncomp):
        r = members[c]
        for d in csucc[c]:
            r |= reach[d]
        reach[c] = r
    return [reach[comp[v]] for v in range(num)]


@dataclass
class GreenData:
    """down_X[y] is the bitset of x with x ≤_X y (with optional empty factors)."""

    down_J: list
    down_L: list
    down_R: list

    def le(self, rel: str, x: int, y: int) -> bool:
        if rel == "H":
            return self.le("L", x, y) and self.le("R", x, y)
        return bool((getattr(self, "down_" + rel)[y] >> x) & 1)

    def equiv(self, rel: str, x: int, y: int) -> bool:
        return self.le(rel, x, y) and self.le(rel, y, x)

    def lt(self, rel: str, x: int, y: int) -> bool:
        return self.le(rel, x, y) and not self.le(rel, y, x)

    def classes(self, rel: str) -> list:
        size = len(self.down_J)
        out, seen = [], set()
        for x in range(size):
            if x in seen:
                continue
            cls = [y for y in range(size) if self.equiv(rel, x, y)]
            seen.update(cls)
            out.append(cls)
        return out


def green_compare(S: FiniteSemigroup) -> GreenData:
    """Preorders via reachability in the Cayley graphs over a generating set."""
    size = len(S)
    gens = S.generators()
    right = [[S.mul(x, g) for g in gens] for x in range(size)]
    left = [[S.mul(g, x) for g in gens] for x in range(size)]
    both = [r + l for r, l in zip(right, left)]
    return GreenData(_down_sets(size, both), _down_sets(size, left), _down_sets(size, right))


def _chain_tops(S: FiniteSemigroup) -> dict:
    """For each idempotent J-class representative: longest strict chain of idempotents ending there."""
    G = S.green()
    reps = {}
    for e in S.idempotents():
        key = G.down_J[e]
        reps.setdefault(key, e)
    classes = sorted(reps.items(), key=lambda kv: bin(kv[0]).count("1"))
    top = {}
    for key, e in classes:
        best = 0
        for key2, f in classes:
            if key2 != key and (key >> f) & 1:
                best = max(best, top.get(f, 0))
        top[e] = best + 1
    return top


def regular_j_length(S: FiniteSemigroup) -> int:
    top = _chain_tops(S)
    return max(top.values(), default=0)


def element_j_lengths(S: FiniteSemigroup) -> list:
    """Regular J-length of each element: longest idempotent chain J-below it."""
    G = S.green()
    top = _chain_tops(S)
    out = []
    for x in range(len(S)):
        below = G.down_J[x]
        out.append(max((t for e, t in top.items() if (below >> e) & 1), default=0))
    return out


# ---------------------------------------------------------------- Ramsey numbers

@dataclass(frozen=True)
class RamseyResult:
    k: int
    lower: int
    upper: int
    exact: Optional[int] = None

    @property
    def value(self) -> int:
        """Exact value when known, otherwise the upper bracket."""
        return self.exact if self.exact is not None else self.upper

    @property
    def bracket_only(self) -> bool:
        return self.exact is None


def ramsey_bracket(S: FiniteSemigroup, k: int) -> tuple:
    L = regular_j_length(S)
    return k ** L, (k * len(S) ** 4) ** L


def ramsey_number(S: FiniteSemigroup, k: int, max_states: int = 20000) -> RamseyResult:
    """Least n such that every word of length n has an infix u_1···u_k with all
    φ(u_i) equal to one idempotent.

    Exact search runs over sets of suffix states (idempotent, completed factors,
    value of the pending factor); it falls back to the bracket past max_states.
    """
    lo, hi = ramsey_bracket(S, k)
    if k <= 0:
        return RamseyResult(k, 0, 0, 0)
    letters = range(len(S))
    idem = set(S.idempotents())

    def step(state, a):
        out = set()
        for (e, j, x) in state:
            x2 = a if x is None else S.mul(x, a)
            out.add((e, j, x2))
            if j == 0:
                if x2 in idem:
                    out.add((x2, 1, None))
            elif x2 == e:
                out.add((e, j + 1, None))
        out.add((None, 0, a))
        if a in idem:
            out.add((a, 1, None))
        # only the suffix structure matters; j = 0 entries keep e = None
        return frozenset(out)

    def done(state):
        return any(j >= k and x is None for (_, j, x) in state)

    level = {frozenset()}
    seen = 0
    length = 0
    while level:
        length += 1
        nxt = set()
        for st in level:
            for a in letters:
                s2 = step(st, a)
                if not done(s2):
                    nxt.add(s2)
        seen += len(nxt)
        if seen > max_states:
            return RamseyResult(k, lo, hi, None)
        level = nxt
    return RamseyResult(k, lo, hi, length)


# ---------------------------------------------------------------- block decompositions

@dataclass(frozen=True)
class Block:
    """Spans [lo, hi) of the parts u, α, β, γ; `idempotent` is φ(α) = φ(β) = φ(γ)."""

    u: tuple
    alpha: tuple
    beta: tuple
    gamma: tuple
    idempotent: int


class _Infix:
    """Infix values of a word, computed on demand."""

    def __init__(self, S: FiniteSemigroup, word: Sequence[int]):
        self.S = S
        self.word = list(word)
        self.memo = {}

    def __call__(self, lo: int, hi: int) -> int:
        key = (lo, hi)
        r = self.memo.get(key)
        if r is None:
            if hi - lo == 1:
                r = self.word[lo]
            else:
                r = self.S.mul(self(lo, hi - 1), self.word[hi - 1])
            self.memo[key] = r
        return r


def _scan_block(S, word, i):
    """The first block starting at i: least end position, then short γ, short β, short α.

    Returns a Block or None when no infix starting at i is a block."""
    k = len(word)
    vals = []  # vals[s - i] = φ(word[s:e])
    ends = {}  # e -> {value: starts in descending order}
    ok = {}  # c -> values g with some b < c: φ(b, c) = g and some a ≥ i: φ(a, b) = g
    for e in range(i + 1, k + 1):
        x = word[e - 1]
        vals = [S.mul(v, x) for v in vals] + [x]
        table = {}
        for s in range(e - 1, i - 1, -1):
            table.setdefault(vals[s - i], []).append(s)
        ends[e] = table
        for c in range(e - 1, i + 1, -1):
            g = vals[c - i]
            if S.is_idempotent(g) and g in ok[c]:
                b = next(b for b in ends[c][g] if g in ends.get(b, ()))
                a = ends[b][g][0]
                return Block((i, a), (a, b), (b, c), (c, e), g)
        ok[e] = {g for g, starts in table.items()
                 if S.is_idempotent(g) and any(g in ends.get(b, ()) for b in starts)}
    return None


def block_decomposition(S: FiniteSemigroup, word: Sequence[int], ramsey: Optional[int] = None,
                        reduce: bool = True, greedy: bool = False):
    """Cut the word into blocks u α β γ while more than `ramsey` letters remain.

    Returns (blocks, tail_span). `ramsey` defaults to R_S(3) (exact if feasible,
    else the upper bracket). With greedy=True the guard is dropped: blocks are
    cut as long as one exists, which meets the same length bounds for the true
    R_S(3) without computing it. With reduce=True, blocks are merged while some
    pair i < j has φ(α_i) = φ(α_j) = φ(β_i γ_i ··· u_j α_j β_j).
    """
    word = list(word)
    k = len(word)
    R = 0 if greedy else (ramsey if ramsey is not None else ramsey_number(S, 3).value)
    blocks = []
    i = 0
    while k - i > R:
        blk = _scan_block(S, word, i)
        if blk is None:
            if greedy:
                break
            raise ValueError("no block found; the Ramsey value is too small for this semigroup")
        blocks.append(blk)
        i = blk.gamma[1]
    tail = (i, k)
    if reduce:
        blocks = _reduce_blocks(_Infix(S, word), blocks)
    return blocks, tail

def _reduce_blocks(phi, blocks):
    blocks = list(blocks)
    changed = True
    while changed:
        changed = False
        for i in range(len(blocks)):
            for j in range(i + 1, len(blocks)):
                bi, bj = blocks[i], blocks[j]
                e = phi(*bi.alpha)
                if phi(*bj.alpha) != e:
                    continue
                mid = (bi.beta[0], bj.beta[1])
                if phi(*mid) == e:
                    blocks[i:j + 1] = [Block(bi.u, bi.alpha, mid, bj.gamma, e)]
                    changed = True
                    break
            if changed:
                break
    return blocks


def check_block_decomposition(S, word, blocks, tail, ramsey=None) -> bool:
    phi = _Infix(S, word)
    pos = 0
    for b in blocks:
        for part in (b.u, b.alpha, b.beta, b.gamma):
            if part[0] != pos or part[1] < part[0]:
                return False
            pos = part[1]
        for part in (b.alpha, b.beta, b.gamma):
            if part[1] == part[0] or phi(*part) != b.idempotent:
                return False
        if not S.is_idempotent(b.idempotent):
            return False
        if ramsey is not None:
            if any(p[1] - p[0] > ramsey for p in (b.u, b.alpha, b.gamma)):
                return False
    if tail != (pos, len(word)):
        return False
    if ramsey is not None and tail[1] - tail[0] > ramsey:
        return False
    return True


# ---------------------------------------------------------------- summaries

@dataclass(eq=False)
class SummaryNode:
    kind: str  # "leaf" | "product" | "idempotent"
    element: int
    span: tuple  # [lo, hi) over the original word
    children: tuple = ()
    middle: Optional["SummaryNode"] = None  # idempotent nodes: product tree of the skipped middle
    base: Optional[int] = None  # idempotent nodes: e (element is e, or e♯ in a ♯-summary)
    fresh: bool = field(default=True, repr=False)

    @property
    def unstable(self) -> bool:
        return self.kind == "idempotent" and self.base != self.element

    @property
    def height(self) -> int:
        return 0 if not self.children else 1 + max(c.height for c in self.children)

    @property
    def size(self) -> int:
        return 1 + sum(c.size for c in self.children)

    def nodes(self):
        yield self
        for c in self.children:
            yield from c.nodes()

    def max_unstable_per_branch(self) -> int:
        below = max((c.max_unstable_per_branch() for c in self.children), default=0)
        return below + (1 if self.unstable else 0)

    def max_stable_run(self) -> int:
        """Longest run of consecutive nodes along a branch that are neither leaves nor unstable."""
        def walk(node, run):
            if node.kind == "leaf" or node.unstable:
                run = 0
            else:
                run += 1
            return max([run] + [walk(c, run) for c in node.children])
        return walk(self, 0)

    def render(self, name: Callable[[int], str] = str, indent: int = 0) -> str:
        tag = self.kind
        if self.unstable:
            tag = "idempotent#"
        lines = ["  " * indent + f"{tag} {name(self.element)} [{self.span[0]}:{self.span[1]}]"]
        for c in self.children:
            lines.append(c.render(name, indent + 1))
        return "\n".join(lines)


def _leaf(x: int, pos: int) -> SummaryNode:
    return SummaryNode("leaf", x, (pos, pos + 1))


def _product(S, left: SummaryNode, right: SummaryNode) -> SummaryNode:
    return SummaryNode("product", S.mul(left.element, right.element),
                       (left.span[0], right.span[1]), (left, right))


def _balanced(S, trees: list) -> SummaryNode:
    if len(trees) == 1:
        return trees[0]
    mid = (len(trees) + 1) // 2
    return _product(S, _balanced(S, trees[:mid]), _balanced(S, trees[mid:]))


@dataclass
class _Item:
    value: int
    node: SummaryNode


class _SummaryBuilder:
    """With ramsey=None blocks are cut greedily; otherwise the guard uses the given value."""

    def __init__(self, S: FiniteSemigroup, ramsey: Optional[int] = None):
        self.S = S
        self.L = element_j_lengths(S)
        self.ramsey = ramsey

    def summarize(self, items: list) -> SummaryNode:
        S = self.S
        if len(items) == 1:
            return items[0].node
        total = S.eval([it.value for it in items])
        level = self.L[total]
        pieces = []
        i = 0
        while i < len(items):
            acc = None
            cut = None
            for j in range(i, len(items)):
                acc = items[j].value if acc is None else S.mul(acc, items[j].value)
                if self.L[acc] == level:
                    cut = j
                    break
            if cut is None:
                break
            pieces.append((i, cut))
            i = cut + 1
        tail = items[i:]
        trees = []
        for (lo, hi) in pieces:
            if lo == hi:
                trees.append(items[hi].node)
            else:
                trees.append(_product(S, self.summarize(items[lo:hi]), items[hi].node))
        if tail:
            trees[-1] = _product(S, trees[-1], self.summarize(tail))
        if len(trees) == 1:
            return trees[0]
        return self.same_level(trees)

    def same_level(self, trees: list) -> SummaryNode:
        S = self.S
        values = [t.element for t in trees]
        blocks, tail = block_decomposition(S, values, ramsey=self.ramsey, greedy=self.ramsey is None)
        segments = []
        for b in blocks:
            if b.u[1] > b.u[0]:
                segments.append(_balanced(S, trees[b.u[0]:b.u[1]]))
            alpha = _balanced(S, trees[b.alpha[0]:b.alpha[1]])
            gamma = _balanced(S, trees[b.gamma[0]:b.gamma[1]])
            middle = _balanced(S, trees[b.beta[0]:b.beta[1]])
            segments.append(SummaryNode("idempotent", b.idempotent, (alpha.span[0], gamma.span[1]),
                                        (alpha, gamma), middle, b.idempotent))
        if tail[1] > tail[0]:
            segments.append(_balanced(S, trees[tail[0]:tail[1]]))
        return _balanced(S, segments)


def build_summary(S: FiniteSemigroup, word: Sequence[int], ramsey: Optional[int] = None) -> SummaryNode:
    """A summary of a nonempty word whose result is φ(word)."""
    if not word:
        raise ValueError("summaries need a nonempty word")
    builder = _SummaryBuilder(S, ramsey)
    return builder.summarize([_Item(x, _leaf(x, p)) for p, x in enumerate(word)])


def build_sharp_summary(S: FiniteSemigroup, word: Sequence[int], sharp: Callable[[int], int],
                        ramsey: Optional[int] = None) -> SummaryNode:
    """A ♯-summary: repeatedly summarize, then collapse the deepest unstable idempotent node
    into a single letter e♯ until every new idempotent node is stable.

    `sharp` maps an idempotent's index to the index of its iteration.
    """
    if not word:
        raise ValueError("summaries need a nonempty word")
    builder = _SummaryBuilder(S, ramsey)
    items = [_Item(x, _leaf(x, p)) for p, x in enumerate(word)]
    for leaf in (it.node for it in items):
        leaf.fresh = False
    while True:
        tree = builder.summarize(items)
        target = None
        best = -1
        stack = [(tree, 0)]
        while stack:
            node, depth = stack.pop()
            if not node.fresh:
                continue
            if node.kind == "idempotent" and sharp(node.base) != node.base and depth > best:
                target, best = node, depth
            for c in reversed(node.children):
                stack.append((c, depth + 1))
        for node in tree.nodes():
            node.fresh = False
        if target is None:
            return tree
        target.element = sharp(target.base)
        _refresh(S, tree)
        lo, hi = target.span
        starts = [it.node.span[0] for it in items]
        first = starts.index(lo)
        last = first
        while last + 1 < len(items) and items[last + 1].node.span[0] < hi:
            last += 1
        items[first:last + 1] = [_Item(target.element, target)]


def _refresh(S, node: SummaryNode) -> int:
    """Recompute product labels after a relabeling below them."""
    if node.kind == "product":
        node.element = S.mul(_refresh(S, node.children[0]), _refresh(S, node.children[1]))
    else:
        for c in node.children:
            _refresh(S, c)
    return node.element


def check_summary(S: FiniteSemigroup, word: Sequence[int], node: SummaryNode,
                  sharp: Optional[Callable[[int], int]] = None) -> bool:
    """Every label is consistent with its children and the word; idempotent nodes
    skip a middle with the same value. With `sharp`, idempotent nodes may carry e♯."""
    word = list(word)
    lo, hi = node.span
    if node.kind == "leaf":
        return hi - lo == 1 and word[lo] == node.element
    if node.kind == "product":
        a, b = node.children
        return (a.span[0] == lo and b.span[1] == hi and a.span[1] == b.span[0]
                and S.mul(a.element, b.element) == node.element
                and check_summary(S, word, a, sharp) and check_summary(S, word, b, sharp))
    if node.kind == "idempotent":
        a, b = node.children
        e = node.base
        if not S.is_idempotent(e) or a.element != e or b.element != e:
            return False
        if a.span[0] != lo or b.span[1] != hi:
            return False
        expected = e if sharp is None else sharp(e)
        if node.element != expected and node.element != e:
            return False
        if sharp is None and node.element != e:
            return False
        mid = node.middle
        if mid is None:
            return a.span[1] == b.span[0]
        if mid.span != (a.span[1], b.span[0]) or mid.element != e:
            return False
        return (check_summary(S, word, a, sharp) and check_summary(S, word, b, sharp)
                and check_summary(S, word, mid, sharp))
    return False


def descendants_j_above(S: FiniteSemigroup, node: SummaryNode) -> bool:
    """A node's element is J-below each of its descendants' elements."""
    G = S.green()
    for child in node.children:
        for d in child.nodes():
            if not G.le("J", node.element, d.element):
                return False
        if not descendants_j_above(S, child):
            return False
    return True


# ---------------------------------------------------------------- bounds

def summary_height_bound(S: FiniteSemigroup, ramsey: Optional[int] = None) -> float:
    R = ramsey if ramsey is not None else ramsey_number(S, 3).value
    L = regular_j_length(S)
    return L * (math.log2(len(S)) + 2 * math.log2(R) + 4)


@dataclass(frozen=True)
class BoundConfig:
    """Height and value bounds as functions of n = |V|, K and m."""

    sharp_expression_coeff: int = 2  # height ≤ 2 n^4
    summary_coeff: int = 536  # height ≤ 536 n^10

    def sharp_expression_height(self, n: int) -> int:
        return self.sharp_expression_coeff * n ** 4

    def sharp_height(self, n: int) -> int:
        return n * n - 1

    def summary_height(self, n: int) -> int:
        return self.summary_coeff * n ** 10

    def sharp_summary_height(self, n: int) -> int:
        return n * n * self.summary_height(n)

    def flow_bound_log2(self, K: int, n: int) -> float:
        if K == 0:
            return float("-inf")
        return math.log2(K) + self.sharp_summary_height(n) * math.log2(n)

    def flow_bound(self, K: int, n: int, max_bits: int = 1 << 16) -> int:
        """K · n^h with h the ♯-summary height; refuses integers wider than max_bits."""
        if self.flow_bound_log2(K, n) > max_bits:
            raise OverflowError("flow bound too large to materialize")
        return K * n ** self.sharp_summary_height(n)

    def regular_bound_log2(self, K: int, n: int, m: int) -> float:
        if K == 0:
            return float("-inf")
        expo = (170 * math.log2(max(m, 1)) + 835) * n ** 12
        return math.log2(K) + expo * math.log2(2 * n)

    def closure_size_bound(self, n: int) -> int:
        return 3 ** (n * n)

    def boolean_j_length_bound(self, n: int) -> float:
        return (n * n + n + 2) / 2
