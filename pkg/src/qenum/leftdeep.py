"""Left-deep hierarchical queries  pi_{w1..wk}( R1(w1,x1) ⋈ R2(w2,x1,x2) ⋈ ... ⋈ Rk(wk,x1..xk) ).

After reduction the private variable ``x_k`` of the last relation joins
nothing, so R_k is projected onto ``(w_k, x_1..x_{k-1})`` before any counting.
A value ``v`` of ``w_k`` is then a set of join prefixes ``u``; each prefix
contributes the cartesian product of ``k-1`` sorted ``w`` lists.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Sequence, Tuple

from .core import InterleavePlan, PausableEnumerator, interleave_union, mapped, merge_sorted, scan
from .relation import DomainMap, Relation, SchemaError, compress_domain, full_reducer, join_weights


@dataclass
class LeftDeepQuery:
    """Compressed, reduced left-deep query with prefix indexes.

    ``prefix_index[i]`` maps the prefix ``(x_1..x_{i+1})`` to the sorted
    ``w_{i+1}`` values of R_{i+1} (0-based ``i < k-1``); ``by_w`` maps each
    ``w_k`` value to its sorted prefixes ``(x_1..x_{k-1})``.
    """

    k: int
    relations: List[Relation]
    dmap: DomainMap
    prefix_index: List[Dict[tuple, List[int]]] = field(default_factory=list)
    by_w: Dict[int, List[tuple]] = field(default_factory=dict)
    original_input_size: int = 0

    @property
    def input_size(self) -> int:
        return sum(len(r) for r in self.relations)

    def full_join_size(self) -> int:
        return sum(join_weights(self.relations).values()) if self.relations[0].rows else 0

    def lists_for(self, u: tuple) -> List[List[int]]:
        return [self.prefix_index[i].get(u[:i + 1], []) for i in range(self.k - 1)]

    def decode(self, t: tuple) -> tuple:
        inv = self.dmap.inverse
        return tuple(inv[c] for c in t)


def check_leftdeep(relations: Sequence[Relation]) -> None:
    k = len(relations)
    if k < 2:
        raise SchemaError("a left-deep query needs at least two relations")
    xs: Tuple[str, ...] = ()
    ws = set()
    for i, r in enumerate(relations):
        w = r.schema[0]
        if len(r.schema) != i + 2 or r.schema[1:i + 1] != xs:
            raise SchemaError(f"{r.name} schema {r.schema} breaks the left-deep pattern")
        if w in ws or w in r.schema[1:]:
            raise SchemaError(f"{r.name}: projection variable {w!r} is not private")
        ws.add(w)
        xs = r.schema[1:]
    if ws & set(xs):
        raise SchemaError("projection and join variables overlap")


def prepare_leftdeep(relations: Sequence[Relation]) -> LeftDeepQuery:
    """Check, compress, reduce, drop ``x_k`` and index a left-deep query.

    Relations must list ``w_i`` first and then ``x_1..x_i``.
    """
    rels = list(relations)
    check_leftdeep(rels)
    k = len(rels)
    compressed, dmap = compress_domain(rels)
    reduced = full_reducer(compressed)
    last = reduced[-1]
    reduced[-1] = last.project(last.schema[:-1])
    q = LeftDeepQuery(k, reduced, dmap, original_input_size=sum(len(r) for r in rels))
    for i in range(k - 1):
        r = reduced[i]
        idx = r.index(r.schema[1:], r.schema[:1])
        q.prefix_index.append({key: [v[0] for v in vals] for key, vals in idx.items()})
    r = reduced[-1]
    q.by_w = {key[0]: vals for key, vals in r.index(r.schema[:1], r.schema[1:]).items()}
    return q


def _as_query(q) -> LeftDeepQuery:
    return q if isinstance(q, LeftDeepQuery) else prepare_leftdeep(q)


def _cartesian(lists):
    if any(not lst for lst in lists):
        yield 1
        return
    for combo in product(*lists):
        yield 1
        yield combo


def per_u_cartesian(q: LeftDeepQuery, u: tuple) -> PausableEnumerator:
    """Lexicographic ``(w_1..w_{k-1})`` combinations for one join prefix of R_k.

    ``u`` is a row ``(w_k, x_1, ...)`` of R_k or just its ``x`` prefix; only
    ``x_1..x_{k-1}`` is used.
    """
    if len(u) >= q.k:
        u = tuple(u[1:q.k])
    lists = q.lists_for(tuple(u))
    assert all(lists), f"prefix {u} has an empty sub-list; relations were not reduced"
    return PausableEnumerator(_cartesian(lists), name="cartesian")


def heavy_join_size(q: LeftDeepQuery, heavy: Sequence[int]) -> int:
    total = 0
    for v in heavy:
        for u in q.by_w[v]:
            p = 1
            for lst in q.lists_for(u):
                p *= len(lst)
            total += p
    return total


def _light(q: LeftDeepQuery, values):
    for v in values:
        yield 1
        children = [_cartesian(q.lists_for(u)) for u in q.by_w[v]]
        yield from merge_sorted(children, make=lambda w, v=v: w + (v,))


def _heavy(q: LeftDeepQuery, values):
    k = q.k
    for v in values:
        yield 1
        seen = set()
        for u in q.by_w[v]:
            yield k
            for combo in product(*q.lists_for(u)):
                yield 2
                if combo in seen:
                    continue
                seen.add(combo)
                yield 1
                yield combo + (v,)


def leftdeep_threshold(D: int, out_join: int, k: int) -> int:
    return -(-2 * D ** k // out_join)


def enum_leftdeep(q, bypass: bool = True) -> PausableEnumerator:
    """Enumerate a left-deep query with delay O(|D|^k / |OUT⋈|).

    Sizes are those of the reduced query with ``x_k`` projected away.
    """
    q = _as_query(q)
    k, D = q.k, q.input_size
    out_join = q.full_join_size()
    info = {"input_size": D, "original_input_size": q.original_input_size, "full_join_size": out_join, "k": k}
    if out_join == 0:
        e = PausableEnumerator(iter([1]), name="leftdeep", bound=1)
        e.info.update(info, mode="empty")
        return e
    if bypass and out_join < 2 * D:
        rows = sorted({combo + (v,) for v, us in q.by_w.items() for u in us for combo in product(*q.lists_for(u))})
        e = PausableEnumerator(scan([q.decode(t) for t in rows]), name="leftdeep", bound=1)
        e.info.update(info, mode="materialized")
        return e
    delta = leftdeep_threshold(D, out_join, k)
    ws = sorted(q.by_w)
    light = [v for v in ws if len(q.by_w[v]) <= delta]
    heavy = [v for v in ws if len(q.by_w[v]) > delta]
    q_heavy = heavy_join_size(q, heavy)
    T = len(heavy) + k * sum(len(q.by_w[v]) for v in heavy) + 4 * q_heavy
    plan = InterleavePlan.for_bounds(T, out_join - q_heavy)
    inner = interleave_union(_heavy(q, heavy), _light(q, light), plan)
    info.update(mode="interleave", delta=delta, heavy_join_size=q_heavy, plan=plan,
                heavy_bound=D ** k / delta, bound_formula=D ** k / out_join)
    inner.info.update(info)
    out = PausableEnumerator(mapped(inner, q.decode), name="leftdeep")
    out.info = inner.info
    return out
