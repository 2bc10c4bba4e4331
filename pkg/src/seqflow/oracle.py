"""Brute-force baselines for cross-checking the solvers.

Matrix arithmetic here works on plain nested lists of 0/1/2 (2 = ω) and shares
nothing with the bitmask implementation in flow_algebra.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .instance import Instance, Nfa
from .maxflow import max_flow_word
from .mm_algebra import OMEGA, AbstractMatrix, CapacityMatrix, ExtNat

_OM = 2


def _rows(x) -> tuple:
    if isinstance(x, AbstractMatrix):
        return tuple(tuple(int(v) for v in row) for row in x.rows())
    return tuple(tuple(int(v) for v in row) for row in x)


def naive_product(x, y) -> tuple:
    n = len(x)
    return tuple(tuple(max(min(x[i][k], y[k][j]) for k in range(n)) for j in range(n))
                 for i in range(n))


def naive_sharp(e) -> tuple:
    n = len(e)
    out = []
    for v in range(n):
        row = []
        for v2 in range(n):
            val = e[v][v2]
            if val == 1 and any(e[v][a] == _OM and e[a][b] == 1 and e[b][v2] == _OM
                                for a in range(n) for b in range(n)):
                val = _OM
            row.append(val)
        out.append(tuple(row))
    return tuple(out)


def naive_closure(generators) -> set:
    """Saturate under product and iteration of idempotents, until nothing changes."""
    gens = generators.values() if isinstance(generators, dict) else generators
    elems = {_rows(g) for g in gens}
    while True:
        new = set()
        for x in elems:
            for y in elems:
                new.add(naive_product(x, y))
            if naive_product(x, x) == x:
                new.add(naive_sharp(x))
        if new <= elems:
            return {AbstractMatrix.from_rows(r) for r in elems}
        elems |= new


def brute_membership(source, x) -> bool:
    gens = source.generators() if isinstance(source, Instance) else source
    return AbstractMatrix.from_rows(_rows(x)) in naive_closure(gens)


# ---------------------------------------------------------------- optimal values

@dataclass
class BruteResult:
    best: ExtNat
    word: Optional[tuple]
    table: list  # best value per exact length 1..max_len; None where no word qualifies


def _better(a, b) -> bool:
    if b is None:
        return a is not None
    if a is None:
        return False
    if b is OMEGA:
        return False
    return a is OMEGA or a > b


def brute_optimal(instance: Instance, max_len: int, nfa: Optional[Nfa] = None,
                  edges=None, letters=None) -> BruteResult:
    """Best flow over every word of length 1..max_len (accepted by nfa, if given).

    With edges, a word's value is the fair value: the most tokens that can be
    sent simultaneously along every listed pair."""
    letters = list(letters) if letters is not None else instance.letters
    pairs = list(edges) if edges else None
    best, best_word, table = None, None, []
    for length in range(1, max_len + 1):
        row = None
        row_word = None
        for word in itertools.product(letters, repeat=length):
            if nfa is not None and not nfa.accepts(word):
                continue
            val = (max_flow_word(instance, word) if pairs is None
                   else fair_word_value(instance, word, pairs))
            if _better(val, row):
                row, row_word = val, word
        table.append(row)
        if _better(row, best):
            best, best_word = row, row_word
    return BruteResult(0 if best is None else best, best_word, table)


def _omega_reach(instance, word, src, dst) -> bool:
    cur = {src}
    for a in word:
        cap = instance.capacity(a)
        cur = {v2 for v in cur for v2 in range(instance.n) if cap[v, v2] is OMEGA}
    return dst in cur


def fair_word_value(instance: Instance, word, pairs) -> ExtNat:
    """max over integral multi-commodity flows of the smallest per-pair token count."""
    word = tuple(word)
    pairs = [tuple(p) for p in pairs]
    if not word:
        return OMEGA if all(s == t for s, t in pairs) else 0
    if all(_omega_reach(instance, word, s, t) for s, t in pairs):
        return OMEGA
    n = instance.n
    big = 1 + sum(instance.capacity(a).finite_total() for a in word)
    arcs = []
    for i, a in enumerate(word):
        cap = instance.capacity(a)
        for v in range(n):
            for v2 in range(n):
                c = cap[v, v2]
                if c is OMEGA:
                    c = big
                if c > 0:
                    arcs.append((i, v, v2, c))
    k = len(pairs)
    na = len(arcs)
    nvar = k * na + 1  # last variable: the common value
    rows, lo, hi = [], [], []

    def var(c, j):
        return c * na + j

    ell = len(word)
    for c, (s, t) in enumerate(pairs):
        for layer in range(ell + 1):
            for v in range(n):
                row = np.zeros(nvar)
                for j, (i, u, u2, _) in enumerate(arcs):
                    if i == layer and u == v:
                        row[var(c, j)] += 1  # out of (v, layer)
                    if i + 1 == layer and u2 == v:
                        row[var(c, j)] -= 1  # into (v, layer)
                if layer == 0:
                    if v == s:
                        row[-1] = -1  # out of the source at least the common value
                        rows.append(row)
                        lo.append(0)
                        hi.append(np.inf)
                        continue
                    rows.append(row)
                    lo.append(0)
                    hi.append(0)
                elif layer == ell:
                    if v == t:
                        continue
                    rows.append(row)
                    lo.append(0)
                    hi.append(0)
                else:
                    rows.append(row)
                    lo.append(0)
                    hi.append(0)
    for j, (_, _, _, cap) in enumerate(arcs):
        row = np.zeros(nvar)
        for c in range(k):
            row[var(c, j)] = 1
        rows.append(row)
        lo.append(0)
        hi.append(cap)
    objective = np.zeros(nvar)
    objective[-1] = -1
    res = milp(objective, constraints=LinearConstraint(np.array(rows), lo, hi),
               integrality=np.ones(nvar), bounds=Bounds(0, big))
    if not res.success:  # pragma: no cover - the zero flow is always feasible
        raise RuntimeError(res.message)
    return int(round(-res.fun))


# ---------------------------------------------------------------- idempotent pipelines

def idempotent_flow_profile(e: AbstractMatrix, v: int, v2: int, lengths=range(1, 7)) -> list:
    """K_n: max flow from v to v2 over the pipeline e^n, reading 1 as capacity 1."""
    cap = CapacityMatrix([[OMEGA if int(x) == _OM else int(x) for x in row] for row in e.rows()])
    names = tuple(f"v{i + 1}" for i in range(e.n))
    # the pipeline need not satisfy the source/target convention, so skip validation
    inst = Instance(names, 0, e.n - 1 if e.n > 1 else 0, {"e": cap})
    return [max_flow_word(inst, ("e",) * k, v, v2) for k in lengths]
