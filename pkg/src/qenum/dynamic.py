"""Star self-join  pi_{x1..xk}( R(x1,y) ⋈ ... ⋈ R(xk,y) )  under single-tuple updates.

The index keeps sorted adjacency lists both ways and the diagonal answers
``(a, ..., a)``, one per x value, so every update is O(1) hash work plus a
sorted-list insertion. Enumeration pairs the diagonal with the full join the
same way :func:`qenum.star.enum_star_alternate` does.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Optional, Tuple

from .core import PausableEnumerator, dedup_cost, dedup_interleave, mapped
from .relation import DomainMap, ParseError


@dataclass
class UpdateReport:
    op: str
    row: tuple
    applied: bool
    ticks: int
    flag: Optional[str] = None


@dataclass
class SelfJoinIndex:
    k: int = 2
    dmap: DomainMap = field(default_factory=DomainMap)
    by_x: Dict[int, List[int]] = field(default_factory=dict)
    by_y: Dict[int, List[int]] = field(default_factory=dict)
    diag: set = field(default_factory=set)
    rows: set = field(default_factory=set)

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("self-join star needs k >= 2")

    def __len__(self) -> int:
        return len(self.rows)

    def insert(self, x, y) -> UpdateReport:
        a, b = self.dmap.encode(x), self.dmap.encode(y)
        if (a, b) in self.rows:
            return UpdateReport("I", (x, y), False, 1, "duplicate insert ignored")
        self.rows.add((a, b))
        xs = self.by_x.get(a)
        if xs is None:
            xs = self.by_x[a] = []
            self.diag.add((a,) * self.k)
        bisect.insort(xs, b)
        bisect.insort(self.by_y.setdefault(b, []), a)
        return UpdateReport("I", (x, y), True, 6)

    def delete(self, x, y) -> UpdateReport:
        a, b = self.dmap.forward.get(x), self.dmap.forward.get(y)
        if a is None or b is None or (a, b) not in self.rows:
            return UpdateReport("D", (x, y), False, 1, "delete of absent tuple ignored")
        self.rows.discard((a, b))
        xs = self.by_x[a]
        del xs[bisect.bisect_left(xs, b)]
        if not xs:
            del self.by_x[a]
            self.diag.discard((a,) * self.k)
        ys = self.by_y[b]
        del ys[bisect.bisect_left(ys, a)]
        if not ys:
            del self.by_y[b]
        return UpdateReport("D", (x, y), True, 6)

    def full_join_size(self) -> int:
        return sum(len(xs) ** self.k for xs in self.by_y.values())

    def answer_count_lower_bound(self) -> int:
        return len(self.diag)


def selfjoin_insert(index: SelfJoinIndex, row) -> UpdateReport:
    x, y = row
    return index.insert(x, y)


def selfjoin_delete(index: SelfJoinIndex, row) -> UpdateReport:
    x, y = row
    return index.delete(x, y)


def _full_join(index: SelfJoinIndex, k: int):
    for xs in index.by_y.values():
        yield 2
        for combo in product(xs, repeat=k):
            yield 1
            yield combo


def enum_selfjoin_star(index: SelfJoinIndex, k: Optional[int] = None) -> PausableEnumerator:
    """Enumerate the current answer with delay O(|OUT⋈| / |OUTπ|^{1/k}).

    ``k`` defaults to the arity the index maintains its diagonal for; another
    arity rebuilds the diagonal first. The index must not change while the
    returned enumerator is consumed.
    """
    k = index.k if k is None else k
    if k < 2:
        raise ValueError("self-join star needs k >= 2")
    diag = index.diag if k == index.k else {(a,) * k for a in index.by_x}
    out_join = sum(len(xs) ** k for xs in index.by_y.values())
    inv = index.dmap.inverse
    T = dedup_cost(2 * len(index.by_y) + out_join, out_join)
    inner = dedup_interleave(diag, _full_join(index, k), T)
    inner.info.update(input_size=len(index), full_join_size=out_join, J=len(diag), T=T, k=k,
                      bound_formula=out_join / len(diag) if diag else None)
    out = PausableEnumerator(mapped(inner, lambda t: tuple(inv[c] for c in t)), name="selfjoin")
    out.info = inner.info
    out.flags = inner.flags
    return out


def parse_update_script(text: str) -> List[Tuple[str, str, str]]:
    """Parse lines ``I x y`` / ``D x y``; blank lines and ``#`` comments are skipped."""
    ops = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] not in ("I", "D"):
            raise ParseError(f"line {lineno}: expected 'I x y' or 'D x y', got {line!r}")
        ops.append((parts[0], parts[1], parts[2]))
    return ops


def apply_updates(index: SelfJoinIndex, ops) -> List[UpdateReport]:
    return [index.insert(x, y) if op == "I" else index.delete(x, y) for op, x, y in ops]
