"""Two-path enumeration with a boolean matrix product in preprocessing.

For a threshold ``delta``, x values of R and z values of S are heavy when
their degree exceeds ``delta``. Answers with both endpoints heavy are
materialized up front: through light y values by an explicit join, and
through heavy y values by multiplying the two incidence matrices. The rest
is enumerated by sorted-list merges over at most ``delta`` lists each.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .core import ConfigurationError, PausableEnumerator, chain, list_merge, mapped, scan
from .relation import DomainMap, Relation, SchemaError, compress_domain, full_reducer


@dataclass
class BoolMatrix:
    """Dense boolean matrix stored as one Python-int bitset per row (bit j = column j)."""

    rows: int
    cols: int
    bits: List[int]
    row_labels: List[int] = field(default_factory=list)
    col_labels: List[int] = field(default_factory=list)

    def __post_init__(self):
        if len(self.bits) != self.rows:
            raise ValueError(f"expected {self.rows} row bitsets, got {len(self.bits)}")
        if self.row_labels and len(set(self.row_labels)) != len(self.row_labels):
            raise ValueError("row labels must be distinct")
        if self.col_labels and len(set(self.col_labels)) != len(self.col_labels):
            raise ValueError("column labels must be distinct")

    @classmethod
    def zeros(cls, rows: int, cols: int, row_labels=None, col_labels=None) -> "BoolMatrix":
        return cls(rows, cols, [0] * rows, list(row_labels or []), list(col_labels or []))

    @classmethod
    def from_lists(cls, cells: Sequence[Sequence[int]]) -> "BoolMatrix":
        rows = len(cells)
        cols = len(cells[0]) if rows else 0
        bits = []
        for r in cells:
            if len(r) != cols:
                raise ValueError("ragged matrix")
            bits.append(sum(1 << j for j, v in enumerate(r) if v))
        return cls(rows, cols, bits)

    @classmethod
    def identity(cls, n: int) -> "BoolMatrix":
        return cls(n, n, [1 << i for i in range(n)])

    def get(self, i: int, j: int) -> bool:
        return bool(self.bits[i] >> j & 1)

    def set(self, i: int, j: int) -> None:
        self.bits[i] |= 1 << j

    def to_lists(self) -> List[List[int]]:
        return [[self.bits[i] >> j & 1 for j in range(self.cols)] for i in range(self.rows)]

    def ones(self):
        """Yield ``(i, j)`` for every set cell, row-major."""
        for i, b in enumerate(self.bits):
            j = 0
            while b:
                if b & 1:
                    yield i, j
                b >>= 1
                j += 1

    def __eq__(self, other) -> bool:
        if not isinstance(other, BoolMatrix):
            return NotImplemented
        return (self.rows, self.cols, self.bits) == (other.rows, other.cols, other.bits)


def _naive_multiply(A: BoolMatrix, B: BoolMatrix) -> List[int]:
    # row i of C is the OR of the rows of B selected by row i of A
    out = []
    for a in A.bits:
        acc = 0
        k = 0
        while a:
            if a & 1:
                acc |= B.bits[k]
            a >>= 1
            k += 1
        out.append(acc)
    return out


def _numpy_multiply(A: BoolMatrix, B: BoolMatrix) -> List[int]:
    import numpy as np

    a = np.array(A.to_lists(), dtype=np.int64).reshape(A.rows, A.cols)
    b = np.array(B.to_lists(), dtype=np.int64).reshape(B.rows, B.cols)
    c = (a @ b) > 0
    return [sum(1 << j for j in np.flatnonzero(row).tolist()) for row in c]


MULTIPLIERS: Dict[str, Callable[[BoolMatrix, BoolMatrix], List[int]]] = {
    "naive": _naive_multiply,
    "numpy": _numpy_multiply,
}


def register_multiplier(name: str, fn: Callable[[BoolMatrix, BoolMatrix], List[int]]) -> None:
    """Add a plug; ``fn(A, B)`` returns the row bitsets of the product."""
    MULTIPLIERS[name] = fn


def bool_matmul(A: BoolMatrix, B: BoolMatrix, multiplier: str = "naive") -> BoolMatrix:
    if A.cols != B.rows:
        raise ValueError(f"dimension mismatch: {A.rows}x{A.cols} times {B.rows}x{B.cols}")
    try:
        fn = MULTIPLIERS[multiplier]
    except KeyError:
        raise ConfigurationError(f"unknown multiplier {multiplier!r}") from None
    return BoolMatrix(A.rows, B.cols, fn(A, B), list(A.row_labels), list(B.col_labels))


# ---------------------------------------------------------------------------
# plan
# ---------------------------------------------------------------------------

@dataclass
class FmmPlan:
    delta: int
    dmap: DomainMap
    R_by_x: Dict[int, List[int]]
    R_by_y: Dict[int, List[int]]
    S_by_y: Dict[int, List[int]]
    S_by_z: Dict[int, List[int]]
    heavy_x: List[int]
    heavy_z: List[int]
    heavy_y: List[int]
    light_y: List[int]
    materialized_hh: List[Tuple[int, int]]
    heavy_x_by_y: Dict[int, List[int]]
    light_z_lists: List[Tuple[int, List[int]]]
    preprocessing_ticks: int = 0
    matmul_ticks: int = 0
    sizes: Tuple[int, int] = (0, 0)
    multiplier: str = "naive"

    @property
    def input_size(self) -> int:
        return sum(self.sizes)

    def decode(self, t):
        inv = self.dmap.inverse
        return (inv[t[0]], inv[t[1]])


def _prepare(R: Relation, S: Relation):
    if R.arity != 2 or S.arity != 2:
        raise SchemaError("two-path relations must be binary")
    y = R.schema[1]
    if y not in S.schema:
        raise SchemaError(f"{S.name} does not contain join variable {y!r}")
    z = [v for v in S.schema if v != y]
    if len(z) != 1 or z[0] == R.schema[0]:
        raise SchemaError("two-path endpoints must be distinct variables")
    S2 = S.project((y, z[0]))
    (cr, cs), dmap = compress_domain([Relation(R.name, ("x", "y"), R.rows), Relation(S.name, ("y", "z"), S2.rows)])
    cr, cs = full_reducer([cr, cs])
    return cr, cs, dmap


def preprocess_fmm(R: Relation, S: Relation, delta: int, multiplier: str = "naive") -> FmmPlan:
    """Classify values against ``delta`` and materialize the heavy-x/heavy-z answers."""
    if int(delta) != delta or delta < 1:
        raise ConfigurationError(f"delta must be an integer >= 1, got {delta!r}")
    delta = int(delta)
    cr, cs, dmap = _prepare(R, S)
    R_by_x, R_by_y = cr.adjacency("x", "y"), cr.adjacency("y", "x")
    S_by_y, S_by_z = cs.adjacency("y", "z"), cs.adjacency("z", "y")
    ticks = len(cr) + len(cs)

    heavy_x = sorted(v for v, ys in R_by_x.items() if len(ys) > delta)
    heavy_z = sorted(v for v, ys in S_by_z.items() if len(ys) > delta)
    hx, hz = set(heavy_x), set(heavy_z)
    light_y, heavy_y = [], []
    for u in sorted(R_by_y):
        (light_y if len(R_by_y[u]) <= delta and len(S_by_y[u]) <= delta else heavy_y).append(u)
    ticks += len(R_by_x) + len(S_by_z) + len(R_by_y)

    pairs = set()
    # heavy endpoints meeting at a light y: at most delta^2 pairs per y
    for u in light_y:
        xs = [x for x in R_by_y[u] if x in hx]
        zs = [z for z in S_by_y[u] if z in hz]
        ticks += len(R_by_y[u]) + len(S_by_y[u]) + len(xs) * len(zs)
        for x in xs:
            for z in zs:
                pairs.add((x, z))
    # heavy endpoints meeting at a heavy y: one matrix product
    matmul_ticks = 0
    if heavy_x and heavy_z and heavy_y:
        ycol = {u: j for j, u in enumerate(heavy_y)}
        zcol = {z: j for j, z in enumerate(heavy_z)}
        A = BoolMatrix.zeros(len(heavy_x), len(heavy_y), heavy_x, heavy_y)
        for i, x in enumerate(heavy_x):
            for u in R_by_x[x]:
                j = ycol.get(u)
                if j is not None:
                    A.set(i, j)
        B = BoolMatrix.zeros(len(heavy_y), len(heavy_z), heavy_y, heavy_z)
        for j, u in enumerate(heavy_y):
            for z in S_by_y[u]:
                c = zcol.get(z)
                if c is not None:
                    B.set(j, c)
        C = bool_matmul(A, B, multiplier)
        matmul_ticks = A.rows * A.cols * B.cols
        ticks += sum(len(R_by_x[x]) for x in heavy_x) + sum(len(S_by_y[u]) for u in heavy_y)
        ticks += matmul_ticks + A.rows * B.cols
        for i, j in C.ones():
            pairs.add((heavy_x[i], heavy_z[j]))
    materialized = sorted(pairs)
    ticks += len(materialized)

    # second case: per light z, the y lists restricted to heavy x
    heavy_x_by_y = {}
    for u, xs in R_by_y.items():
        h = [x for x in xs if x in hx]
        if h:
            heavy_x_by_y[u] = h
    light_z_lists = []
    for w in sorted(S_by_z):
        if w in hz:
            continue
        us = [u for u in S_by_z[w] if u in heavy_x_by_y]
        if us:
            light_z_lists.append((w, us))
    ticks += len(cr) + len(cs)

    return FmmPlan(delta, dmap, R_by_x, R_by_y, S_by_y, S_by_z, heavy_x, heavy_z, heavy_y, light_y,
                   materialized, heavy_x_by_y, light_z_lists, ticks, matmul_ticks, (len(R), len(S)),
                   multiplier)


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def _light_x(plan: FmmPlan):
    hx = set(plan.heavy_x)
    for v in sorted(plan.R_by_x):
        if v in hx:
            continue
        yield 1
        yield from list_merge([plan.S_by_y[u] for u in plan.R_by_x[v]], lambda z, v=v: (v, z))


def _heavy_x_light_z(plan: FmmPlan):
    for w, us in plan.light_z_lists:
        yield 1
        yield from list_merge([plan.heavy_x_by_y[u] for u in us], lambda x, w=w: (x, w))


def fmm_cases(plan: FmmPlan):
    """The three disjoint case programs (compressed ids): light x, heavy x with light z, both heavy."""
    return [_light_x(plan), _heavy_x_light_z(plan), scan(plan.materialized_hh)]


def enum_fmm(R: Relation, S: Relation, plan: FmmPlan) -> PausableEnumerator:
    """Enumerate pi_{x,z}(R ⋈ S) with delay O(delta) given a plan for the same R, S."""
    if plan.sizes != (len(R), len(S)):
        raise ConfigurationError("plan was built for different relations")
    e = PausableEnumerator(mapped(chain(*fmm_cases(plan)), plan.decode), name="fmm", bound=None)
    e.info.update(delta=plan.delta, heavy_x=len(plan.heavy_x), heavy_y=len(plan.heavy_y),
                  heavy_z=len(plan.heavy_z), materialized=len(plan.materialized_hh),
                  preprocessing_ticks=plan.preprocessing_ticks, input_size=plan.input_size,
                  full_join_size=sum(len(xs) * len(plan.S_by_y[u]) for u, xs in plan.R_by_y.items()),
                  bound_formula=plan.delta)
    return e
