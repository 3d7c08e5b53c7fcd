"""Enumeration of star queries  pi_{x1..xk}( R1(x1,y) ⋈ ... ⋈ Rk(xk,y) ).

Three enumerators live here:

* :func:`enum_two_path` for ``k = 2`` (degree-sorted split of the x values),
* :func:`enum_star` for any ``k`` (heavy/light decomposition on a threshold),
* :func:`enum_star_alternate`, which pre-stores a duplicate-free slice of the
  answer and computes the rest on the fly.

All of them compress, reduce and index the input first, run on integer ids,
and decode results on emission.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

from .core import (
    InterleavePlan,
    PausableEnumerator,
    ceil_root,
    dedup_cost,
    dedup_interleave,
    interleave_union,
    list_merge,
    mapped,
    merge_sorted,
    scan,
)
from .relation import (
    DomainMap,
    Relation,
    SchemaError,
    compress_domain,
    count_sort_by_degree,
    find_split_index,
    full_reducer,
    radix_sort,
)


# ---------------------------------------------------------------------------
# preparation
# ---------------------------------------------------------------------------

@dataclass
class StarQuery:
    """A compressed, reduced star query over binary relations ``(x_i, y)``.

    Composite ``x_i`` or ``y`` vectors are folded into single ids; ``decode``
    flattens them back into external values.
    """

    relations: List[Relation]
    dmap: DomainMap
    x_vars: List[Tuple[str, ...]]
    y_vars: Tuple[str, ...]
    by_x: List[Dict[int, List[int]]] = field(default_factory=list)
    by_y: List[Dict[int, List[int]]] = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.relations)

    @property
    def input_size(self) -> int:
        return sum(len(r) for r in self.relations)

    @property
    def free_vars(self) -> Tuple[str, ...]:
        return tuple(v for xs in self.x_vars for v in xs)

    def decode(self, t: tuple) -> tuple:
        inv = self.dmap.inverse
        out = []
        for c, xs in zip(t, self.x_vars):
            v = inv[c]
            if len(xs) > 1:
                out.extend(v)
            else:
                out.append(v)
        return tuple(out)

    def full_join_size(self) -> int:
        return sum(_prod(len(b[u]) for b in self.by_y) for u in self.by_y[0]) if self.by_y else 0


def _prod(values) -> int:
    p = 1
    for v in values:
        p *= v
    return p


def prepare_star(relations: Sequence[Relation], y_vars: Optional[Sequence[str]] = None) -> StarQuery:
    """Compress, reduce and index the relations of a star query.

    ``y_vars`` defaults to the variables common to every relation.
    """
    rels = list(relations)
    if len(rels) < 2:
        raise SchemaError("a star query needs at least two relations")
    if y_vars is None:
        common = set(rels[0].schema)
        for r in rels[1:]:
            common &= set(r.schema)
        y_vars = tuple(v for v in rels[0].schema if v in common)
    y_vars = tuple(y_vars)
    if not y_vars:
        raise SchemaError("star relations share no join variable")
    x_vars = []
    binary = []
    for r in rels:
        xs = tuple(v for v in r.schema if v not in y_vars)
        if not xs:
            raise SchemaError(f"{r.name} has no projection variable")
        if any(v in {u for prev in x_vars for u in prev} for v in xs):
            raise SchemaError(f"x variables of {r.name} overlap another relation")
        x_vars.append(xs)
        xp, yp = r.positions(xs), r.positions(y_vars)
        rows = []
        for row in r.rows:
            xv = row[xp[0]] if len(xp) == 1 else tuple(row[i] for i in xp)
            yv = row[yp[0]] if len(yp) == 1 else tuple(row[i] for i in yp)
            rows.append((xv, yv))
        binary.append(Relation(r.name, ("x", "y"), rows))
    compressed, dmap = compress_domain(binary)
    # each relation gets its own x column name so the chain check sees only y shared
    renamed = [Relation(r.name, (f"x{i + 1}", "y"), r.rows) for i, r in enumerate(compressed)]
    reduced = full_reducer(renamed)
    q = StarQuery(reduced, dmap, x_vars, y_vars)
    for i, r in enumerate(reduced):
        q.by_x.append(r.adjacency(f"x{i + 1}", "y"))
        q.by_y.append(r.adjacency("y", f"x{i + 1}"))
    return q


def _as_query(q) -> StarQuery:
    if isinstance(q, StarQuery):
        return q
    return prepare_star(q)


def _finish(inner: PausableEnumerator, decode, name: str) -> PausableEnumerator:
    out = PausableEnumerator(mapped(inner, decode), name=name, bound=inner.bound)
    out.info = inner.info
    out.flags = inner.flags
    return out


def _materialized(rows: List[tuple], decode, name: str, info: dict) -> PausableEnumerator:
    e = PausableEnumerator(scan([decode(t) for t in rows]), name=name, bound=1)
    e.info.update(info, mode="materialized")
    return e


def _empty(name: str, info: dict) -> PausableEnumerator:
    e = PausableEnumerator(iter([1]), name=name, bound=1)
    e.info.update(info, mode="empty")
    return e


def _dedup_join(q: StarQuery) -> List[tuple]:
    """Full projected answer in ascending order, built directly (used when it is small)."""
    seen = set()
    for u in q.by_y[0]:
        seen.update(product(*(b[u] for b in q.by_y)))
    return radix_sort(list(seen), len(q.dmap))


# ---------------------------------------------------------------------------
# two-path
# ---------------------------------------------------------------------------

def two_path_split(q: StarQuery):
    """Degree-sorted x values of R, their join contributions and the split point."""
    R = q.relations[0]
    L = count_sort_by_degree(R, "x1")
    Sy = q.by_y[1]
    contrib = [sum(len(Sy[u]) for u in q.by_x[0][v]) for v in L]
    return L, contrib, find_split_index(L, contrib)


def _two_path_heavy(q: StarQuery, values: Sequence[int]):
    """On-the-fly projected join for the heavy x values, deduplicated with a stamp array."""
    Rx, Sy = q.by_x[0], q.by_y[1]
    stamp = [0] * (len(q.dmap) + 1)
    for v in values:
        yield 1
        for u in Rx[v]:
            yield 1
            for z in Sy[u]:
                yield 2
                if stamp[z] != v:
                    stamp[z] = v
                    yield 1
                    yield (v, z)


def _two_path_light(q: StarQuery, values: Sequence[int]):
    Rx, Sy = q.by_x[0], q.by_y[1]
    for v in values:
        yield 1
        yield from list_merge([Sy[u] for u in Rx[v]], lambda z, v=v: (v, z))


def enum_two_path(R, S: Optional[Relation] = None, bypass: bool = True) -> PausableEnumerator:
    """Enumerate pi_{x,z}(R(x,y) ⋈ S(y,z)) with delay O(|D|^2 / |OUT⋈|).

    ``R`` may also be a prepared :class:`StarQuery` with ``k = 2``. ``S`` is
    given with schema ``(y, z)``.
    """
    if isinstance(R, StarQuery):
        q = R
    else:
        if S is None:
            raise TypeError("enum_two_path needs R and S")
        if len(R.schema) != 2 or len(S.schema) != 2:
            raise SchemaError("two-path relations must be binary")
        y = R.schema[1]
        if y not in S.schema:
            raise SchemaError(f"{S.name} does not contain join variable {y!r}")
        z = [v for v in S.schema if v != y][0]
        q = prepare_star([R, Relation(S.name, (z, y), S.project((z, y)).rows)], (y,))
    if q.k != 2:
        raise SchemaError("enum_two_path is for k = 2")
    D = q.input_size
    out_join = q.full_join_size()
    info = {"input_size": D, "full_join_size": out_join, "k": 2}
    if out_join == 0:
        return _empty("two-path", info)
    if bypass and out_join < 2 * D:
        return _materialized(_dedup_join(q), q.decode, "two-path", info)
    L, contrib, split = two_path_split(q)
    light, heavy = L[:split.i_star], L[split.i_star:]
    degrees = q.by_x[0]
    T = len(heavy) + sum(len(degrees[v]) for v in heavy) + 4 * split.j_heavy
    plan = InterleavePlan.for_bounds(T, split.j_light)
    delta = len(degrees[L[split.i_star - 1]]) if split.i_star else 1
    inner = interleave_union(_two_path_heavy(q, heavy), _two_path_light(q, light), plan, delta=None)
    info.update(mode="interleave", split=split, degree_threshold=delta, plan=plan,
                bound_formula=D * D / out_join)
    inner.info.update(info)
    return _finish(inner, q.decode, "two-path")


# ---------------------------------------------------------------------------
# general star
# ---------------------------------------------------------------------------

@dataclass
class HeavyLightPartition:
    """Per relation, the tuples whose x value has degree above ``delta`` and the rest."""

    delta: int
    heavy: List[Relation]
    light: List[Relation]
    heavy_by_x: List[Dict[int, List[int]]] = field(default_factory=list)
    heavy_by_y: List[Dict[int, List[int]]] = field(default_factory=list)
    light_values: List[List[int]] = field(default_factory=list)
    heavy_values: List[List[int]] = field(default_factory=list)

    def is_heavy(self, i: int, v: int) -> bool:
        return v in self.heavy_by_x[i]


def star_threshold(D: int, out_join: int, k: int) -> int:
    """Smallest integer ``delta`` with ``delta^(k-1) >= 2 |D|^k / |OUT⋈|``."""
    return ceil_root(2 * D ** k, out_join, k - 1)


def partition(q: StarQuery, delta: int) -> HeavyLightPartition:
    heavy, light = [], []
    part = HeavyLightPartition(delta, heavy, light)
    for i, r in enumerate(q.relations):
        bx = q.by_x[i]
        hv = [v for v in sorted(bx) if len(bx[v]) > delta]
        lv = [v for v in sorted(bx) if len(bx[v]) <= delta]
        hset = set(hv)
        h = Relation(r.name + "_h", r.schema, [t for t in r.rows if t[0] in hset])
        lrel = Relation(r.name + "_l", r.schema, [t for t in r.rows if t[0] not in hset])
        heavy.append(h)
        light.append(lrel)
        part.heavy_values.append(hv)
        part.light_values.append(lv)
        part.heavy_by_x.append(h.adjacency(r.schema[0], "y"))
        part.heavy_by_y.append(h.adjacency("y", r.schema[0]))
    return part


def heavy_join_size(part: HeavyLightPartition) -> int:
    """|full join of the all-heavy subquery|, from per-y counts."""
    first = part.heavy_by_y[0]
    return sum(_prod(len(b.get(u, ())) for b in part.heavy_by_y) for u in first)


def _cartesian(lists: Sequence[Sequence[int]]):
    if any(not lst for lst in lists):
        yield 1
        return
    for combo in product(*lists):
        yield 1
        yield combo


def enum_one_valuation(q: StarQuery, i: int, v: int, part: HeavyLightPartition) -> PausableEnumerator:
    """Answers with ``x_i = v`` where relations before ``i`` are heavy-only.

    ``i`` is 0-based. Per neighbour ``u`` of ``v`` the other x values form a
    cartesian product of sorted lists, walked lexicographically; these
    products are merged, so the delay is O(deg(v)).
    """
    children = []
    for u in q.by_x[i][v]:
        lists = []
        for j in range(q.k):
            if j == i:
                continue
            src = part.heavy_by_y[j] if j < i else q.by_y[j]
            lists.append(src.get(u, []))
        children.append(_cartesian(lists))
    return merge_sorted(children, make=lambda w: w[:i] + (v,) + w[i:])


def _star_light(q: StarQuery, part: HeavyLightPartition):
    for i in range(q.k):
        for v in part.light_values[i]:
            yield 1
            yield from enum_one_valuation(q, i, v, part)


def _star_heavy(q: StarQuery, part: HeavyLightPartition):
    hx0 = part.heavy_by_x[0]
    rest = part.heavy_by_y[1:]
    k = q.k
    for v in part.heavy_values[0]:
        yield 1
        seen = set()
        for u in hx0[v]:
            yield k
            lists = [b.get(u) for b in rest]
            if not all(lists):
                continue
            for combo in product(*lists):
                yield 2
                if combo in seen:
                    continue
                seen.add(combo)
                yield 1
                yield (v,) + combo


def heavy_tick_bound(part: HeavyLightPartition, q_heavy: int, k: int) -> int:
    """Exact upper bound on the ticks of the heavy-side program."""
    hx0 = part.heavy_by_x[0]
    return len(part.heavy_values[0]) + k * sum(len(v) for v in hx0.values()) + 4 * q_heavy


def enum_star(q, bypass: bool = True) -> PausableEnumerator:
    """Enumerate a star query with delay O(|D|^{k/(k-1)} / |OUT⋈|^{1/(k-1)}).

    ``q`` is a :class:`StarQuery` or a list of relations sharing ``y``.
    """
    q = _as_query(q)
    k, D = q.k, q.input_size
    out_join = q.full_join_size()
    info = {"input_size": D, "full_join_size": out_join, "k": k}
    if out_join == 0:
        return _empty("star", info)
    if bypass and out_join < 2 * D:
        return _materialized(_dedup_join(q), q.decode, "star", info)
    delta = star_threshold(D, out_join, k)
    part = partition(q, delta)
    q_heavy = heavy_join_size(part)
    T = heavy_tick_bound(part, q_heavy, k)
    plan = InterleavePlan.for_bounds(T, out_join - q_heavy)
    inner = interleave_union(_star_heavy(q, part), _star_light(q, part), plan, delta=None)
    info.update(mode="interleave", delta=delta, heavy_join_size=q_heavy, plan=plan,
                heavy_bound=D * (D / delta) ** (k - 1))
    inner.info.update(info)
    return _finish(inner, q.decode, "star")


# ---------------------------------------------------------------------------
# stored-output alternative
# ---------------------------------------------------------------------------

class CartesianSet:
    """Factorized set  L_1 x ... x L_k  of sorted id lists."""

    def __init__(self, lists: Sequence[Sequence[int]]):
        self.lists = [list(lst) for lst in lists]
        self._sets = [set(lst) for lst in self.lists]

    def __len__(self) -> int:
        return _prod(len(lst) for lst in self.lists)

    def __contains__(self, t) -> bool:
        return len(t) == len(self._sets) and all(x in s for x, s in zip(t, self._sets))

    def __iter__(self):
        return product(*self.lists)


class WitnessSet:
    """One stored answer per value of a chosen x variable."""

    def __init__(self, rows: Sequence[tuple]):
        self.rows = list(rows)
        self._set = set(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def __contains__(self, t) -> bool:
        return t in self._set

    def __iter__(self):
        return iter(self.rows)


def stored_output(q: StarQuery):
    """The larger of the two duplicate-free answer slices available in linear time.

    Returns ``(J, kind)``; on a tie the factorized product wins.
    """
    best_u, best_p = None, 0
    for u in q.by_y[0]:
        p = _prod(len(b[u]) for b in q.by_y)
        if p > best_p:
            best_u, best_p = u, p
    doms = [len(bx) for bx in q.by_x]
    j = max(range(q.k), key=lambda i: (doms[i], -i))
    if best_u is not None and best_p >= doms[j]:
        return CartesianSet([b[best_u] for b in q.by_y]), "cartesian"
    rows = []
    for a in sorted(q.by_x[j]):
        u = q.by_x[j][a][0]
        rows.append(tuple(a if i == j else q.by_y[i][u][0] for i in range(q.k)))
    return WitnessSet(rows), f"domain:x{j + 1}"


def _full_join(q: StarQuery):
    k = q.k
    for u in q.by_y[0]:
        yield k
        for combo in product(*(b[u] for b in q.by_y)):
            yield 1
            yield combo


def enum_star_alternate(q) -> PausableEnumerator:
    """Enumerate a star query with delay O(|OUT⋈| / |OUTπ|^{1/k})."""
    q = _as_query(q)
    D = q.input_size
    out_join = q.full_join_size()
    info = {"input_size": D, "full_join_size": out_join, "k": q.k}
    if out_join == 0:
        return _empty("star-alt", info)
    J, kind = stored_output(q)
    work = q.k * len(q.by_y[0]) + out_join
    T = dedup_cost(work, out_join)
    inner = dedup_interleave(J, _full_join(q), T)
    info.update(mode="dedup", J=len(J), J_kind=kind, T=T, bound_formula=out_join / len(J))
    inner.info.update(info)
    return _finish(inner, q.decode, "star-alt")
