"""Relations, domain compression, semijoin reduction and degree statistics.

Every enumerator in the package starts from the primitives here: relations are
loaded (or generated), relabelled onto a dense integer domain, stripped of
dangling tuples, and indexed into sorted adjacency lists.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

Row = Tuple[Any, ...]


class RelationError(Exception):
    """Base error for relation loading and preprocessing."""


class ParseError(RelationError):
    pass


class SchemaError(RelationError):
    pass


# ---------------------------------------------------------------------------
# linear-time sorting on small integer keys
# ---------------------------------------------------------------------------

def counting_sort(items: Sequence, key, max_key: int) -> list:
    """Stable counting sort of ``items`` by an integer ``key`` in ``0..max_key``."""
    counts = [0] * (max_key + 2)
    keys = [key(it) for it in items]
    for k in keys:
        counts[k + 1] += 1
    for i in range(1, len(counts)):
        counts[i] += counts[i - 1]
    out = [None] * len(items)
    for it, k in zip(items, keys):
        out[counts[k]] = it
        counts[k] += 1
    return out


def radix_sort(rows: Sequence[Row], max_value: int, positions: Optional[Sequence[int]] = None) -> list:
    """LSD radix sort of integer rows, lexicographic over ``positions``."""
    rows = list(rows)
    if positions is None:
        positions = range(len(rows[0])) if rows else ()
    for p in reversed(list(positions)):
        rows = counting_sort(rows, lambda r, p=p: r[p], max_value)
    return rows


def _all_ints(values: Iterable) -> bool:
    return all(type(v) is int and v >= 0 for v in values)


# ---------------------------------------------------------------------------
# domain map
# ---------------------------------------------------------------------------

@dataclass
class DomainMap:
    """Bijection between external values and the dense ids ``1..n``.

    ``inverse[0]`` is a placeholder so that ``inverse[i]`` decodes id ``i``.
    """

    forward: Dict[Hashable, int] = field(default_factory=dict)
    inverse: List[Any] = field(default_factory=lambda: [None])

    def __len__(self) -> int:
        return len(self.inverse) - 1

    def encode(self, value) -> int:
        code = self.forward.get(value)
        if code is None:
            code = len(self.inverse)
            self.forward[value] = code
            self.inverse.append(value)
        return code

    def decode(self, code: int):
        if code < 1 or code >= len(self.inverse):
            raise KeyError(code)
        return self.inverse[code]

    def encode_row(self, row: Row) -> Row:
        return tuple(self.encode(v) for v in row)

    def decode_row(self, row: Row) -> Row:
        inv = self.inverse
        return tuple(inv[v] for v in row)


# ---------------------------------------------------------------------------
# relations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Relation:
    """A duplicate-free relation with lazily built sorted indexes.

    Row order is the insertion order of the first occurrence of each row; it
    fixes the id assignment of :func:`compress_domain`.
    """

    name: str
    schema: Tuple[str, ...]
    rows: Tuple[Row, ...] = ()
    _indexes: Dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        schema = tuple(self.schema)
        if len(set(schema)) != len(schema):
            raise SchemaError(f"repeated variable in schema {schema} of {self.name}")
        rows = []
        for r in self.rows:
            r = tuple(r)
            if len(r) != len(schema):
                raise SchemaError(
                    f"row {r!r} has {len(r)} fields, schema of {self.name} has {len(schema)}")
            rows.append(r)
        object.__setattr__(self, "schema", schema)
        object.__setattr__(self, "rows", tuple(dict.fromkeys(rows)))

    @property
    def arity(self) -> int:
        return len(self.schema)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __contains__(self, row) -> bool:
        return tuple(row) in self._row_set()

    def _row_set(self):
        s = self._indexes.get("__rows__")
        if s is None:
            s = self._indexes["__rows__"] = frozenset(self.rows)
        return s

    def positions(self, variables: Sequence[str]) -> Tuple[int, ...]:
        try:
            return tuple(self.schema.index(v) for v in variables)
        except ValueError:
            raise SchemaError(f"{variables} not all in schema {self.schema} of {self.name}") from None

    def index(self, key_vars: Sequence[str], value_vars: Optional[Sequence[str]] = None) -> Dict[Row, List[Row]]:
        """Map each key vector to the ascending list of co-occurring value vectors.

        Integer relations are sorted with :func:`radix_sort`; anything else
        falls back to ``sorted``.
        """
        key_vars = tuple(key_vars)
        if value_vars is None:
            value_vars = tuple(v for v in self.schema if v not in key_vars)
        value_vars = tuple(value_vars)
        cache_key = (key_vars, value_vars)
        idx = self._indexes.get(cache_key)
        if idx is not None:
            return idx
        kp, vp = self.positions(key_vars), self.positions(value_vars)
        pairs = {(tuple(r[i] for i in kp), tuple(r[i] for i in vp)) for r in self.rows}
        pairs = list(pairs)
        flat = [k + v for k, v in pairs]
        if flat and _all_ints(x for row in flat for x in row):
            top = max(x for row in flat for x in row)
            ordered = radix_sort(flat, top, range(len(kp), len(kp) + len(vp)))
        else:
            ordered = sorted(flat, key=lambda row: row[len(kp):])
        idx = {}
        for row in ordered:
            idx.setdefault(row[:len(kp)], []).append(row[len(kp):])
        self._indexes[cache_key] = idx
        return idx

    def degrees(self, key_vars: Sequence[str]) -> Dict[Row, int]:
        return {k: len(v) for k, v in self.index(key_vars).items()}

    def adjacency(self, key_var: str, value_var: str) -> Dict[Any, List[Any]]:
        """Scalar form of :meth:`index` for one key and one value variable."""
        cache_key = ("adj", key_var, value_var)
        adj = self._indexes.get(cache_key)
        if adj is None:
            adj = {k[0]: [v[0] for v in vs] for k, vs in self.index((key_var,), (value_var,)).items()}
            self._indexes[cache_key] = adj
        return adj

    def values(self, var: str) -> List[Any]:
        p = self.schema.index(var)
        return list(dict.fromkeys(r[p] for r in self.rows))

    def project(self, variables: Sequence[str], name: Optional[str] = None) -> "Relation":
        pos = self.positions(variables)
        return Relation(name or self.name, tuple(variables), [tuple(r[i] for i in pos) for r in self.rows])

    def semijoin(self, other: "Relation") -> "Relation":
        """Rows of ``self`` that agree with some row of ``other`` on shared variables."""
        common = [v for v in self.schema if v in other.schema]
        if not common:
            return self if len(other) else Relation(self.name, self.schema, [])
        keys = set(other.index(common, ()).keys())
        pos = self.positions(common)
        kept = [r for r in self.rows if tuple(r[i] for i in pos) in keys]
        if len(kept) == len(self.rows):
            return self
        return Relation(self.name, self.schema, kept)

    def with_rows(self, rows: Iterable[Row]) -> "Relation":
        return Relation(self.name, self.schema, list(rows))

    def max_value(self) -> int:
        return max((x for r in self.rows for x in r), default=0)


def input_size(relations: Sequence[Relation]) -> int:
    return sum(len(r) for r in relations)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def load_csv(path: str, schema: Optional[Sequence[str]] = None, name: Optional[str] = None) -> Relation:
    """Read a relation from a headered CSV file of opaque string values.

    Quoting is not supported; a field may not contain a comma.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    name = name or os.path.splitext(os.path.basename(path))[0]
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines:
        if schema is None:
            raise ParseError(f"{path}: missing header line")
        return Relation(name, tuple(schema), [])
    header = [h.strip() for h in lines[0].split(",")]
    if any('"' in h for h in header) or "" in header:
        raise ParseError(f"{path}:1: malformed header {lines[0]!r}")
    if schema is not None and tuple(schema) != tuple(header):
        if len(schema) != len(header):
            raise SchemaError(f"{path}: header {header} does not match schema {list(schema)}")
        # header names are superseded by the caller's schema
    names = tuple(schema) if schema is not None else tuple(header)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if '"' in line:
            raise ParseError(f"{path}:{lineno}: quoted fields are not supported")
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != len(names):
            raise SchemaError(
                f"{path}:{lineno}: expected {len(names)} fields, got {len(fields)}")
        rows.append(tuple(fields))
    return Relation(name, names, rows)


def write_csv(relation: Relation, path: str) -> None:
    for row in relation.rows:
        for v in row:
            if "," in str(v) or "\n" in str(v):
                raise ParseError(f"value {v!r} of {relation.name} cannot be written without quoting")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(relation.schema) + "\n")
        for row in relation.rows:
            fh.write(",".join(str(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# compression
# ---------------------------------------------------------------------------

def compress_domain(relations: Sequence[Relation], domain: Optional[DomainMap] = None):
    """Relabel every value onto ``1..n`` in first-encounter, row-major order."""
    dmap = domain if domain is not None else DomainMap()
    out = []
    for rel in relations:
        out.append(Relation(rel.name, rel.schema, [dmap.encode_row(r) for r in rel.rows]))
    return out, dmap


def decompress(relations: Sequence[Relation], dmap: DomainMap) -> List[Relation]:
    return [Relation(r.name, r.schema, [dmap.decode_row(t) for t in r.rows]) for r in relations]


# ---------------------------------------------------------------------------
# chain join trees: reduction and counting
# ---------------------------------------------------------------------------
# Star, path and left-deep queries all admit the join tree R1 - R2 - ... - Rk
# (declaration order), so a single chain implementation covers every shape.

def check_chain(relations: Sequence[Relation]) -> None:
    """Raise unless every variable occurs in a contiguous run of relations."""
    seen: Dict[str, List[int]] = {}
    for i, rel in enumerate(relations):
        for v in rel.schema:
            seen.setdefault(v, []).append(i)
    for v, idx in seen.items():
        if idx != list(range(idx[0], idx[-1] + 1)):
            raise SchemaError(f"variable {v!r} breaks the chain join tree (relations {idx})")


def _shared(a: Relation, b: Relation) -> List[str]:
    return [v for v in a.schema if v in b.schema]


def full_reducer(relations: Sequence[Relation], query=None) -> List[Relation]:
    """Remove dangling tuples with one bottom-up and one top-down semijoin pass."""
    rels = list(relations)
    check_chain(rels)
    if any(len(r) == 0 for r in rels):
        return [r.with_rows([]) for r in rels]
    for i in range(len(rels) - 2, -1, -1):
        rels[i] = rels[i].semijoin(rels[i + 1])
    for i in range(1, len(rels)):
        rels[i] = rels[i].semijoin(rels[i - 1])
    if any(len(r) == 0 for r in rels):
        return [r.with_rows([]) for r in rels]
    return rels


def join_weights(relations: Sequence[Relation]) -> Dict[Row, int]:
    """For each row of the first relation, the number of full-join tuples it extends to."""
    rels = list(relations)
    check_chain(rels)
    weights = {r: 1 for r in rels[-1].rows}
    for i in range(len(rels) - 2, -1, -1):
        nxt, cur = rels[i + 1], rels[i]
        common = _shared(cur, nxt)
        npos, cpos = nxt.positions(common), cur.positions(common)
        agg: Dict[Row, int] = {}
        for r, w in weights.items():
            k = tuple(r[j] for j in npos)
            agg[k] = agg.get(k, 0) + w
        weights = {r: agg.get(tuple(r[j] for j in cpos), 0) for r in cur.rows}
    return weights


def compute_full_join_size(relations: Sequence[Relation], query=None) -> int:
    """|full join| from per-key counts; the join itself is never built."""
    if not relations:
        return 0
    return sum(join_weights(relations).values())


# ---------------------------------------------------------------------------
# degree statistics
# ---------------------------------------------------------------------------

def count_sort_by_degree(relation: Relation, attr: str) -> List[Any]:
    """Values of ``attr`` by ascending degree, ties by ascending compressed id.

    Two stable counting sorts (id, then degree); no comparisons.
    """
    deg = {k[0]: d for k, d in relation.degrees((attr,)).items()}
    if not deg:
        return []
    vals = list(deg)
    if not _all_ints(vals):
        raise RelationError("count_sort_by_degree needs a compressed relation")
    by_id = counting_sort(vals, lambda v: v, max(vals))
    return counting_sort(by_id, lambda v: deg[v], max(deg.values()))


@dataclass(frozen=True)
class SplitPoint:
    """Split of a degree-sorted value list into a light prefix and heavy suffix.

    ``i_star`` is 1-based: values ``L[:i_star]`` are light.
    """

    i_star: int
    j_light: int
    j_heavy: int


def find_split_index(L: Sequence, per_value_join: Sequence[int]) -> SplitPoint:
    """Smallest prefix whose join contribution is at least that of the rest."""
    if len(L) != len(per_value_join):
        raise ValueError("L and per_value_join differ in length")
    if any(c < 1 for c in per_value_join):
        raise ValueError("every value of a reduced relation contributes at least one join tuple")
    total = sum(per_value_join)
    prefix = 0
    for i, c in enumerate(per_value_join, start=1):
        prefix += c
        if prefix >= total - prefix:
            return SplitPoint(i, prefix, total - prefix)
    return SplitPoint(0, 0, 0)


@dataclass
class JoinStats:
    input_size: int
    full_join_size: int
    projection_size_hint: Optional[int] = None
    degree_sorted_values: Dict[Tuple[str, str], List[Any]] = field(default_factory=dict)


def join_stats(relations: Sequence[Relation], attrs: Optional[Dict[str, Sequence[str]]] = None,
               projection_size: Optional[int] = None) -> JoinStats:
    """Collect |D|, |OUT⋈| and degree-sorted value lists for ``attrs`` (relation name → variables)."""
    stats = JoinStats(input_size(relations), compute_full_join_size(relations), projection_size)
    by_name = {r.name: r for r in relations}
    for rname, vars_ in (attrs or {}).items():
        for v in vars_:
            stats.degree_sorted_values[(rname, v)] = count_sort_by_degree(by_name[rname], v)
    return stats


# ---------------------------------------------------------------------------
# query shapes
# ---------------------------------------------------------------------------

SHAPES = ("star", "leftdeep", "path")


def shape_schemas(shape: str, k: int) -> List[Tuple[str, ...]]:
    """Canonical variable names for the relations of a query shape."""
    if shape == "star":
        if k < 2:
            raise ValueError("star query needs k >= 2")
        return [(f"x{i}", "y") for i in range(1, k + 1)]
    if shape == "leftdeep":
        if k < 2:
            raise ValueError("left-deep query needs k >= 2")
        return [(f"w{i}",) + tuple(f"x{j}" for j in range(1, i + 1)) for i in range(1, k + 1)]
    if shape == "path":
        if k < 2:
            raise ValueError("path query needs k >= 2")
        return [(f"x{i}", f"x{i + 1}") for i in range(1, k + 1)]
    raise ValueError(f"unknown shape {shape!r}")


def shape_free_vars(shape: str, k: int) -> Tuple[str, ...]:
    if shape == "star":
        return tuple(f"x{i}" for i in range(1, k + 1))
    if shape == "leftdeep":
        return tuple(f"w{i}" for i in range(1, k + 1))
    if shape == "path":
        return ("x1", f"x{k + 1}")
    raise ValueError(f"unknown shape {shape!r}")
