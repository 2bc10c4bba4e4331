"""Integral max-flow over the time-expanded graph of a capacity word.

Layer i of the pipeline holds one copy of every vertex; letter a_i joins layer
i-1 to layer i. Node (v, i) is numbered i*n + v.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import InfeasibleFlow, UsageError
from .mm_algebra import OMEGA, ExtNat, ext_sum


@dataclass(frozen=True)
class TokenFlow:
    """positions[k][i] is the vertex of token k at date i, for i in 0..len(word)."""

    word: tuple
    positions: tuple

    @property
    def horizon(self) -> int:
        return len(self.word)

    @property
    def num_tokens(self) -> int:
        return len(self.positions)

    def global_flow(self, n: int) -> list:
        g = [[0] * n for _ in range(n)]
        for traj in self.positions:
            g[traj[0]][traj[-1]] += 1
        return g

    def to_json(self, vertices=None) -> list:
        name = (lambda v: vertices[v]) if vertices else (lambda v: v)
        return [[name(v) for v in traj] for traj in self.positions]


@dataclass(frozen=True)
class Cut:
    """layers[i] is the set of edges (v, v') removed at step i+1."""

    layers: tuple
    cost: ExtNat


def _check_word(instance, word):
    for a in word:
        instance.capacity(a)


def _endpoints(instance, src, dst):
    src = instance.source if src is None else instance.vertex(src)
    dst = instance.target if dst is None else instance.vertex(dst)
    return src, dst


class _Network:
    """Residual graph with paired forward/backward arcs."""

    def __init__(self, num_nodes: int):
        self.adj = [[] for _ in range(num_nodes)]
        self.to = []
        self.cap = []

    def add(self, u: int, v: int, c: int) -> int:
        k = len(self.to)
        self.to += [v, u]
        self.cap += [c, 0]
        self.adj[u].append(k)
        self.adj[v].append(k + 1)
        return k

    def max_flow(self, s: int, t: int, limit: Optional[int] = None) -> int:
        flow = 0
        to, cap, adj = self.to, self.cap, self.adj
        while limit is None or flow < limit:
            parent = {s: -1}
            q = deque([s])
            while q and t not in parent:
                u = q.popleft()
                for k in adj[u]:
                    v = to[k]
                    if cap[k] > 0 and v not in parent:
                        parent[v] = k
                        q.append(v)
            if t not in parent:
                break
            push = None
            v = t
            while v != s:
                k = parent[v]
                push = cap[k] if push is None else min(push, cap[k])
                v = to[k ^ 1]
            if limit is not None:
                push = min(push, limit - flow)
            v = t
            while v != s:
                k = parent[v]
                cap[k] -= push
                cap[k ^ 1] += push
                v = to[k ^ 1]
            flow += push
        return flow

    def reachable(self, s: int) -> set:
        seen = {s}
        q = deque([s])
        while q:
            u = q.popleft()
            for k in self.adj[u]:
                if self.cap[k] > 0 and self.to[k] not in seen:
                    seen.add(self.to[k])
                    q.append(self.to[k])
        return seen


def _layer_reach(instance, word, src, admissible) -> list:
    """Vertex sets reachable from (src, 0) at each date along admissible edges."""
    n = instance.n
    layers = [{src}]
    for a in word:
        cap = instance.capacity(a)
        nxt = {v2 for v in layers[-1] for v2 in range(n) if admissible(cap[v, v2])}
        layers.append(nxt)
    return layers


def _omega_path(instance, word, src, dst) -> bool:
    return dst in _layer_reach(instance, word, src, lambda c: c is OMEGA)[-1]


def path_exists(instance, word: Sequence[str], src=None, dst=None) -> bool:
    """A layered path using only edges of positive capacity."""
    _check_word(instance, word)
    src, dst = _endpoints(instance, src, dst)
    return dst in _layer_reach(instance, word, src, lambda c: c is OMEGA or c > 0)[-1]


def find_path(instance, word: Sequence[str], src: int, dst: int) -> Optional[list]:
    """One positive-capacity layered path, preferring low vertex indices."""
    layers = _layer_reach(instance, word, src, lambda c: c is OMEGA or c > 0)
    if dst not in layers[-1]:
        return None
    path = [dst]
    for i in range(len(word), 0, -1):
        cap = instance.capacity(word[i - 1])
        cur = path[-1]
        prev = min(v for v in layers[i - 1] if cap[v, cur] is OMEGA or cap[v, cur] > 0)
        path.append(prev)
    path.reverse()
    return path


def _build(instance, word, src, dst, omega_cap):
    n = instance.n
    ell = len(word)
    net = _Network((ell + 1) * n)
    arcs = []
    for i, a in enumerate(word):
        cap = instance.capacity(a)
        for v in range(n):
            for v2 in range(n):
                c = cap[v, v2]
                if c is OMEGA:
                    c = omega_cap
                if c > 0:
                    arcs.append((i, v, v2, net.add(i * n + v, (i + 1) * n + v2, c)))
    return net, arcs, src, ell * n + dst


def _finite_bound(instance, word) -> int:
    return 1 + sum(instance.capacity(a).finite_total() for a in word)


def max_flow_word(instance, word: Sequence[str], src=None, dst=None) -> ExtNat:
    """Maximal integral flow from (src, 0) to (dst, |word|); ω when an all-ω path exists."""
    _check_word(instance, word)
    src, dst = _endpoints(instance, src, dst)
    if not word:
        return OMEGA if src == dst else 0
    if _omega_path(instance, word, src, dst):
        return OMEGA
    net, _, s, t = _build(instance, word, src, dst, _finite_bound(instance, word))
    return net.max_flow(s, t)


def min_cut_word(instance, word: Sequence[str], src=None, dst=None) -> Cut:
    """Minimum cut read off residual reachability; its cost equals the max flow."""
    _check_word(instance, word)
    src, dst = _endpoints(instance, src, dst)
    if not word:
        return Cut((), OMEGA if src == dst else 0)
    net, arcs, s, t = _build(instance, word, src, dst, _finite_bound(instance, word))
    net.max_flow(s, t)
    side = net.reachable(s)
    n = instance.n
    layers = [set() for _ in word]
    for (i, v, v2, _) in arcs:
        if i * n + v in side and (i + 1) * n + v2 not in side:
            layers[i].add((v, v2))
    cost = ext_sum(instance.capacity(word[i])[e] for i, es in enumerate(layers) for e in es)
    return Cut(tuple(frozenset(es) for es in layers), cost)


def cut_separates(instance, word, cut: Cut, src=None, dst=None) -> bool:
    """Every positive-capacity path from src to dst uses a cut edge."""
    src, dst = _endpoints(instance, src, dst)
    cur = {src}
    for i, a in enumerate(word):
        cap = instance.capacity(a)
        cur = {v2 for v in cur for v2 in range(instance.n)
               if (cap[v, v2] is OMEGA or cap[v, v2] > 0) and (v, v2) not in cut.layers[i]}
    return dst not in cur


def validate_token_flow(instance, word: Sequence[str], flow: TokenFlow) -> bool:
    """Per step and per edge, the number of tokens moving stays within the letter's capacity."""
    _check_word(instance, word)
    ell = len(word)
    counts = {}
    for traj in flow.positions:
        if len(traj) != ell + 1:
            raise UsageError(f"token trajectory of length {len(traj)} does not match horizon {ell}")
        for i in range(ell):
            key = (i, traj[i], traj[i + 1])
            counts[key] = counts.get(key, 0) + 1
    for (i, v, v2), k in counts.items():
        c = instance.capacity(word[i])[v, v2]
        if c is not OMEGA and k > c:
            return False
    return True


def extract_token_flow(instance, word: Sequence[str], src=None, dst=None, value: int = 0) -> TokenFlow:
    """A token flow moving exactly `value` tokens from src to dst."""
    _check_word(instance, word)
    src, dst = _endpoints(instance, src, dst)
    word = tuple(word)
    if value == 0:
        return TokenFlow(word, ())
    best = max_flow_word(instance, word, src, dst)
    if best is not OMEGA and value > best:
        raise InfeasibleFlow(f"value {value} exceeds max flow {best}")
    if not word:
        return TokenFlow(word, tuple((src,) for _ in range(value)))
    omega_cap = max(_finite_bound(instance, word), value)
    net, arcs, s, t = _build(instance, word, src, dst, omega_cap)
    got = net.max_flow(s, t, limit=value)
    if got < value:  # pragma: no cover - guarded by the max-flow check above
        raise InfeasibleFlow(f"only {got} tokens routed")
    remaining = {}
    for (i, v, v2, k) in arcs:
        used = net.cap[k ^ 1]
        if used:
            remaining.setdefault((i, v), []).append([v2, used])
    tokens = []
    for _ in range(value):
        traj = [src]
        for i in range(len(word)):
            outs = remaining.get((i, traj[-1]))
            if not outs:
                raise RuntimeError("flow decomposition left a dangling token")
            nxt = outs[0]
            traj.append(nxt[0])
            nxt[1] -= 1
            if nxt[1] == 0:
                outs.pop(0)
        tokens.append(tuple(traj))
    return TokenFlow(word, tuple(tokens))
