"""Endpoint projection of path queries  pi_{x1,x_{k+1}}( R1(x1,x2) ⋈ ... ⋈ Rk(xk,x_{k+1}) ).

Values of degree above ``Delta`` get their reachable endpoint set stored
up front. Enumeration descends the path: a stored value is scanned, a light
value merges the sorted endpoint streams of its at most ``Delta`` successors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from .core import ConfigurationError, PausableEnumerator, mapped, merge_sorted
from .relation import (
    DomainMap,
    Relation,
    SchemaError,
    compress_domain,
    compute_full_join_size,
    counting_sort,
    full_reducer,
)


@dataclass
class PathQuery:
    k: int
    relations: List[Relation]
    dmap: DomainMap
    succ: List[Dict[int, List[int]]] = field(default_factory=list)

    @property
    def input_size(self) -> int:
        return sum(len(r) for r in self.relations)

    def decode(self, t: tuple) -> tuple:
        inv = self.dmap.inverse
        return (inv[t[0]], inv[t[1]])


def prepare_path(relations: Sequence[Relation]) -> PathQuery:
    rels = list(relations)
    if len(rels) < 2:
        raise SchemaError("a path query needs at least two relations")
    for i, r in enumerate(rels):
        if r.arity != 2:
            raise SchemaError(f"{r.name} is not binary")
        if i and r.schema[0] != rels[i - 1].schema[1]:
            raise SchemaError(f"{r.name} does not continue the path at {rels[i - 1].schema[1]!r}")
    names = [r.schema[0] for r in rels] + [rels[-1].schema[1]]
    if len(set(names)) != len(names):
        raise SchemaError("path variables must be distinct")
    compressed, dmap = compress_domain(rels)
    reduced = full_reducer(compressed)
    q = PathQuery(len(rels), reduced, dmap)
    for r in reduced:
        q.succ.append(r.adjacency(r.schema[0], r.schema[1]))
    return q


def _as_query(q) -> PathQuery:
    return q if isinstance(q, PathQuery) else prepare_path(q)


@dataclass
class SuffixViewStore:
    """Reachable last-variable values for every heavy ``(level, value)``, sorted."""

    delta: int
    views: Dict[Tuple[int, int], List[int]] = field(default_factory=dict)
    ticks: int = 0
    epsilon: float = 0.0

    @property
    def entries(self) -> int:
        return sum(len(v) for v in self.views.values())


def path_threshold(D: int, epsilon: float, k: int) -> int:
    """``max(1, floor(|D|^(epsilon/(k-1))))``, guarded against float round-down."""
    r = max(1, math.floor(D ** (epsilon / (k - 1))))
    # D^(eps/(k-1)) >= r  <=>  D^eps >= r^(k-1); correct off-by-one float error
    while (r + 1) ** (k - 1) <= D ** epsilon * (1 + 1e-12):
        r += 1
    while r > 1 and r ** (k - 1) > D ** epsilon * (1 + 1e-12):
        r -= 1
    return r


def suffix_view(q: PathQuery, level: int, a: int) -> Tuple[List[int], int]:
    """Sorted endpoints reachable from ``a`` at ``level`` (0-based), and the ticks spent."""
    n = len(q.dmap)
    stamp = [0] * (n + 1)
    frontier = list(q.succ[level].get(a, ()))
    ticks = len(frontier)
    for j in range(level + 1, q.k):
        nxt = []
        mark = j + 1
        succ = q.succ[j]
        for b in frontier:
            for c in succ.get(b, ()):
                ticks += 1
                if stamp[c] != mark:
                    stamp[c] = mark
                    nxt.append(c)
        frontier = nxt
    ticks += len(frontier)
    return counting_sort(frontier, lambda v: v, n), ticks


def preprocess_path(q, epsilon: float) -> SuffixViewStore:
    q = _as_query(q)
    if not (0 <= epsilon < 1):
        raise ConfigurationError(f"epsilon must be in [0, 1), got {epsilon!r}")
    D = q.input_size
    delta = path_threshold(D, epsilon, q.k) if D else 1
    store = SuffixViewStore(delta, epsilon=epsilon)
    for i in range(q.k):
        for a in sorted(q.succ[i]):
            if len(q.succ[i][a]) > delta:
                view, t = suffix_view(q, i, a)
                store.views[(i, a)] = view
                store.ticks += t
    return store


def _level(q: PathQuery, store: SuffixViewStore, i: int, a: int):
    view = store.views.get((i, a))
    if view is not None:
        for z in view:
            yield (z,)
        return
    if i == q.k - 1:
        for z in q.succ[i][a]:
            yield (z,)
        return
    yield from merge_sorted([_level(q, store, i + 1, b) for b in q.succ[i][a]])


def enum_path(q, store: SuffixViewStore) -> PausableEnumerator:
    """Enumerate endpoint pairs with delay O(Delta^(k-1)) using a store from :func:`preprocess_path`."""
    q = _as_query(q)

    def program():
        yield 1
        for a in sorted(q.succ[0]):
            yield 1
            for item in _level(q, store, 0, a):
                if type(item) is int:
                    yield item
                else:
                    yield (a, item[0])

    e = PausableEnumerator(mapped(program(), q.decode), name="path")
    e.info.update(delta=store.delta, epsilon=store.epsilon, k=q.k, input_size=q.input_size,
                  full_join_size=compute_full_join_size(q.relations),
                  stored_entries=store.entries, preprocessing_ticks=store.ticks,
                  bound_formula=store.delta ** (q.k - 1))
    return e
