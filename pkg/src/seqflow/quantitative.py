"""Exact optimal sequential flow for bounded instances.

A configuration records how many tokens of each commodity sit on each vertex.
One letter moves every token along an edge of positive capacity; a flow of
value C exists iff the all-on-sources configuration reaches the all-on-targets
one. The optimum is then found by binary search on C.

For the plain problem there is a single commodity (source, target). The fair
variant has one commodity per designated pair, each carrying C tokens. With an
automaton, configurations are paired with a control state.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .errors import ResourceLimitError, UsageError
from .instance import Instance, Nfa
from .maxflow import _Network
from .mm_algebra import OMEGA, ExtNat
from .qualitative import Verdict, decide
from .semigroup import BoundConfig

DEFAULT_MAX_STATES = 2_000_000


@dataclass(frozen=True)
class Problem:
    """What a configuration search ranges over."""

    instance: Instance
    pairs: tuple  # commodities as (source, target) index pairs
    nfa: Optional[Nfa] = None

    @classmethod
    def of(cls, instance: Instance, edges=None, nfa=None, use_options: bool = True) -> "Problem":
        if edges is None and use_options:
            edges = instance.edges
        if nfa is None and use_options:
            nfa = instance.nfa
        pairs = tuple(tuple(e) for e in edges) if edges else ((instance.source, instance.target),)
        if not pairs:
            raise UsageError("fair edge set must be nonempty")
        return cls(instance, pairs, nfa)

    @property
    def n(self) -> int:
        return self.instance.n

    def start(self, C: int) -> tuple:
        return tuple(_point(self.n, s, C) for s, _ in self.pairs)

    def goal(self, C: int) -> tuple:
        return tuple(_point(self.n, t, C) for _, t in self.pairs)

    def num_configurations(self, C: int) -> int:
        per = math.comb(C + self.n - 1, self.n - 1)
        m = self.nfa.m if self.nfa else 1
        return per ** len(self.pairs) * m


def _point(n: int, v: int, C: int) -> tuple:
    out = [0] * n
    out[v] = C
    return tuple(out)


def configurations(n: int, C: int):
    """All vectors of n nonnegative counts summing to C."""
    for bars in itertools.combinations(range(C + n - 1), n - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(C + n - 1 - prev - 1)
        yield tuple(out)


# ---------------------------------------------------------------- one step

def _check_config(n, x, C):
    if len(x) != n or any(c < 0 for c in x):
        raise UsageError(f"configuration {x} is not a vector of {n} counts")
    if sum(x) != C:
        raise UsageError(f"configuration {x} does not sum to {C}")


def one_step_letter(instance: Instance, a: str, x, x2, C: int) -> bool:
    """Max flow C from a fresh source feeding x(v) into v, through letter a,
    to a fresh sink draining x2(v) from v."""
    n = instance.n
    cap = instance.capacity(a)
    net = _Network(2 * n + 2)
    src, snk = 2 * n, 2 * n + 1
    for v in range(n):
        if x[v]:
            net.add(src, v, x[v])
        if x2[v]:
            net.add(n + v, snk, x2[v])
        for v2 in range(n):
            c = cap[v, v2]
            c = C if c is OMEGA else min(c, C)
            if c > 0:
                net.add(v, n + v2, c)
    return net.max_flow(src, snk) == C


def one_step(instance: Instance, x, x2, C: int, letters=None) -> bool:
    n = instance.n
    _check_config(n, x, C)
    _check_config(n, x2, C)
    letters = instance.letters if letters is None else letters
    return any(one_step_letter(instance, a, x, x2, C) for a in letters)


def _vertex_moves(cap_row, counts):
    """Ways to send the commodity counts sitting on one vertex along its out-edges.

    Returns a list of per-commodity target vectors (tuples of length n)."""
    n = len(cap_row)
    k = len(counts)
    targets = [v2 for v2 in range(n) if cap_row[v2] is OMEGA or cap_row[v2] > 0]
    if not any(counts):
        return [tuple((0,) * n for _ in range(k))]
    if not targets:
        return []
    results = []
    room = {v2: cap_row[v2] for v2 in targets}

    def spread(c, left, t_idx, acc, all_acc):
        if c == k:
            results.append(tuple(all_acc))
            return
        if t_idx == len(targets) - 1:
            v2 = targets[t_idx]
            r = room[v2]
            if r is not OMEGA and left > r:
                return
            if r is not OMEGA:
                room[v2] = r - left
            row = list(acc)
            row[v2] += left
            nxt_left = counts[c + 1] if c + 1 < k else 0
            spread(c + 1, nxt_left, 0, [0] * n, all_acc + [tuple(row)])
            room[v2] = r
            return
        v2 = targets[t_idx]
        r = room[v2]
        top = left if r is OMEGA else min(left, r)
        for amount in range(top + 1):
            if r is not OMEGA:
                room[v2] = r - amount
            acc[v2] += amount
            spread(c, left - amount, t_idx + 1, acc, all_acc)
            acc[v2] -= amount
        room[v2] = r

    spread(0, counts[0], 0, [0] * n, [])
    return results


def letter_successors(instance: Instance, a: str, config: tuple) -> set:
    """Configurations reachable from `config` in one step under letter a."""
    n = instance.n
    cap = instance.capacity(a)
    k = len(config)
    acc = {tuple((0,) * n for _ in range(k))}
    for v in range(n):
        counts = [config[c][v] for c in range(k)]
        moves = _vertex_moves(cap.rows[v], counts)
        if not moves:
            return set()
        nxt = set()
        for base in acc:
            for mv in moves:
                nxt.add(tuple(tuple(p + q for p, q in zip(base[c], mv[c])) for c in range(k)))
        acc = nxt
    return acc


def successors(problem: Problem, state) -> dict:
    """state -> letter for every one-step successor (first letter found)."""
    inst = problem.instance
    out = {}
    if problem.nfa is None:
        for a in inst.letters:
            for y in letter_successors(inst, a, state):
                out.setdefault(y, a)
        return out
    config, q = state
    for (q1, a, q2) in problem.nfa.delta:
        if q1 != q:
            continue
        for y in letter_successors(inst, a, config):
            out.setdefault((y, q2), a)
    return out


# ---------------------------------------------------------------- reachability

def _initial_states(problem: Problem, x):
    if problem.nfa is None:
        return [x]
    return [(x, q) for q in sorted(problem.nfa.initial)]


def _is_goal(problem: Problem, state, goal) -> bool:
    if problem.nfa is None:
        return state == goal
    return state[0] == goal and state[1] in problem.nfa.final


@dataclass
class ReachResult:
    reachable: bool
    word: Optional[tuple] = None
    explored: int = 0


def _reach_bfs(problem: Problem, xs, xt, horizon: int, max_states: int) -> ReachResult:
    parent = {}
    frontier = []
    for s in _initial_states(problem, xs):
        parent[s] = None
        frontier.append(s)
    for s in frontier:
        if _is_goal(problem, s, xt):
            return ReachResult(True, (), len(parent))
    depth = 0
    queue = deque(frontier)
    while queue and depth < horizon:
        depth += 1
        nxt = deque()
        while queue:
            s = queue.popleft()
            for y, a in successors(problem, s).items():
                if y in parent:
                    continue
                parent[y] = (s, a)
                if len(parent) > max_states:
                    raise ResourceLimitError(f"configuration search exceeds {max_states} states")
                if _is_goal(problem, y, xt):
                    return ReachResult(True, _unwind(parent, y), len(parent))
                nxt.append(y)
        queue = nxt
    return ReachResult(False, None, len(parent))


def _unwind(parent, y) -> tuple:
    word = []
    while parent[y] is not None:
        y, a = parent[y]
        word.append(a)
    return tuple(reversed(word))


class _Dichotomic:
    """Exact-length reachability by splitting the horizon at its midpoint."""

    def __init__(self, problem: Problem, C: int, memo: bool = True):
        self.problem = problem
        self.C = C
        self.memo = {} if memo else None
        n = problem.n
        per = list(configurations(n, C))
        configs = list(itertools.product(per, repeat=len(problem.pairs)))
        if problem.nfa is None:
            self.states = configs
        else:
            self.states = [(x, q) for x in configs for q in problem.nfa.states]

    def step(self, s, t) -> bool:
        return t in successors(self.problem, s)

    def __call__(self, s, t, ell: int) -> bool:
        if ell == 0:
            return s == t
        if ell == 1:
            return self.step(s, t)
        key = (s, t, ell)
        if self.memo is not None and key in self.memo:
            return self.memo[key]
        res = False
        for mid in self.states:
            if self(s, mid, (ell + 1) // 2) and self(mid, t, ell // 2):
                res = True
                break
        if self.memo is not None:
            self.memo[key] = res
        return res


def reach(instance: Instance, xs, xt, ell_max: Optional[int] = None, mode: str = "bfs",
          edges=None, nfa=None, max_states: int = DEFAULT_MAX_STATES) -> bool:
    """Is there ℓ ≤ ell_max with xs →ℓ xt? Single-commodity configurations may be
    given as flat count vectors."""
    problem = Problem.of(instance, edges, nfa, use_options=False)
    xs, xt = _normalize(problem, xs), _normalize(problem, xt)
    C = sum(xs[0])
    for x in xs + xt:
        _check_config(problem.n, x, C)
    return _reach(problem, xs, xt, C, ell_max, mode, max_states).reachable


def _normalize(problem: Problem, x) -> tuple:
    if x and isinstance(x[0], int):
        return (tuple(x),)
    return tuple(tuple(c) for c in x)


def _reach(problem, xs, xt, C, ell_max, mode, max_states) -> ReachResult:
    horizon = problem.num_configurations(C)
    if ell_max is not None:
        horizon = min(horizon, ell_max)
    if mode == "bfs":
        return _reach_bfs(problem, xs, xt, horizon, max_states)
    if mode == "dichotomic":
        if problem.num_configurations(C) > max_states:
            raise ResourceLimitError("configuration space too large for the dichotomic search")
        rec = _Dichotomic(problem, C)
        for s in _initial_states(problem, xs):
            for ell in range(horizon + 1):
                targets = [xt] if problem.nfa is None else [(xt, q) for q in sorted(problem.nfa.final)]
                if any(rec(s, t, ell) for t in targets):
                    return ReachResult(True)
        return ReachResult(False)
    raise UsageError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------- optimisation

def quick_upper_bound(problem: Problem) -> ExtNat:
    """Tokens leaving a commodity's source in the first step are limited by its out-capacity."""
    inst = problem.instance
    best = OMEGA
    for (s, _) in problem.pairs:
        out = 0
        for a in inst.letters:
            row = inst.capacity(a).rows[s]
            if any(c is OMEGA for c in row):
                out = OMEGA
                break
            out = max(out, sum(row))
        if out is not OMEGA:
            best = out if best is OMEGA else min(best, out)
    return best


def exists_flow_of_value(instance: Instance, C: int, mode: str = "bfs", edges=None, nfa=None,
                         max_states: int = DEFAULT_MAX_STATES, use_options: bool = True) -> bool:
    return _exists(Problem.of(instance, edges, nfa, use_options), C, mode, max_states).reachable


def _exists(problem: Problem, C: int, mode: str, max_states: int) -> ReachResult:
    if C < 0:
        raise UsageError("flow value must be nonnegative")
    if C == 0:
        return ReachResult(True, ())
    ub = quick_upper_bound(problem)
    if ub is not OMEGA and C > ub:
        return ReachResult(False)
    return _reach(problem, problem.start(C), problem.goal(C), C, None, mode, max_states)


@dataclass
class OptimalResult:
    value: ExtNat
    verdict: Verdict
    word: Optional[tuple] = None  # a word attaining the value, when known
    probes: list = field(default_factory=list)  # (C, feasible) in query order

    def to_json(self, with_witness: bool = True, with_word: bool = False) -> dict:
        if self.value is OMEGA:
            return self.verdict.to_json(with_witness)
        out = {"status": "bounded", "value": self.value}
        if with_word and self.word is not None:
            out["word"] = list(self.word)
        return out


def optimal_value(instance: Instance, mode: str = "bfs", strategy: str = "closure", edges=None,
                  nfa=None, from_bound: bool = False, bound: Optional[int] = None,
                  max_states: int = DEFAULT_MAX_STATES, use_options: bool = True) -> OptimalResult:
    """ω when unbounded; otherwise the largest C with a flow of value C.

    The default search doubles C until infeasible; from_bound starts the
    binary search from [0, B+1] with B the configured bound (or `bound`).
    """
    problem = Problem.of(instance, edges, nfa, use_options)
    sub = Instance(instance.vertices, instance.source, instance.target, instance.capacities,
                   None if len(problem.pairs) == 1 and problem.pairs[0] == (instance.source, instance.target)
                   else problem.pairs, problem.nfa)
    verdict = decide(sub, strategy)
    if verdict.unbounded:
        return OptimalResult(OMEGA, verdict)
    probes = []
    words = {0: ()}

    def feasible(C):
        r = _exists(problem, C, mode, max_states)
        probes.append((C, r.reachable))
        if r.reachable:
            words[C] = r.word
        return r.reachable

    if from_bound:
        if bound is None:
            cfg = BoundConfig()
            n = instance.n
            try:
                if problem.nfa is not None:
                    bits = cfg.regular_bound_log2(instance.K, n, problem.nfa.m)
                    if bits > 4096:
                        raise OverflowError
                    bound = int(2 ** bits)
                else:
                    bound = cfg.flow_bound(instance.K, n, max_bits=4096)
            except OverflowError:
                raise ResourceLimitError(
                    "the configured flow bound is too large to search; pass an explicit bound") from None
        lo, hi = 0, bound + 1
    else:
        lo, hi = 0, 1
        while feasible(hi):
            lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return OptimalResult(lo, verdict, words.get(lo), probes)
