"""Reference semantics: nested-loop join, projection and deduplication.

Deliberately shares no code with the enumerators; only the tuple-level
join definition is assumed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Set, Tuple

from .relation import Relation

DEFAULT_LIMIT = 10 ** 7


class OracleLimitError(RuntimeError):
    pass


@dataclass
class OracleResult:
    tuples: Set[tuple]
    full_join_size: int
    projection_size: int


def oracle_project_join(relations: Sequence[Relation], free_vars: Sequence[str],
                        limit: int = DEFAULT_LIMIT) -> OracleResult:
    """Join ``relations`` by backtracking over bindings, then project onto ``free_vars``.

    Refuses once the full join grows past ``limit`` tuples.
    """
    rels = list(relations)
    if not rels or any(len(r) == 0 for r in rels):
        return OracleResult(set(), 0, 0)
    bound: List[str] = []
    plans = []
    for r in rels:
        keys = [v for v in r.schema if v in bound]
        kpos = [r.schema.index(v) for v in keys]
        table: Dict[tuple, List[tuple]] = {}
        for row in r.rows:
            table.setdefault(tuple(row[p] for p in kpos), []).append(row)
        plans.append((r.schema, keys, table))
        for v in r.schema:
            if v not in bound:
                bound.append(v)
    missing = [v for v in free_vars if v not in bound]
    if missing:
        raise ValueError(f"free variables {missing} do not occur in any relation")

    out: Set[tuple] = set()
    count = 0
    binding: Dict[str, object] = {}

    def visit(i: int) -> None:
        nonlocal count
        if i == len(plans):
            count += 1
            if count > limit:
                raise OracleLimitError(f"full join exceeds {limit} tuples; refusing to materialize")
            out.add(tuple(binding[v] for v in free_vars))
            return
        schema, keys, table = plans[i]
        for row in table.get(tuple(binding[v] for v in keys), ()):
            added = []
            for v, x in zip(schema, row):
                if v not in binding:
                    binding[v] = x
                    added.append(v)
            visit(i + 1)
            for v in added:
                del binding[v]

    visit(0)
    return OracleResult(out, count, len(out))


def estimate_upper_bound(relations: Sequence[Relation]) -> int:
    """Crude bound on the full join: product of relation sizes."""
    p = 1
    for r in relations:
        p *= len(r)
    return p
