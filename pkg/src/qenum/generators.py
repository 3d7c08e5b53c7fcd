"""Instance generators: the skewed two-path families and seeded random queries.

Generated values are strings with a letter prefix per role, so unions of
families stay disjoint. Star instances use the schemas ``R_i(x_i, y)``.
"""
from __future__ import annotations

import math
import random
from typing import List, Optional

from .relation import Relation, shape_schemas


def _star(pairs_per_rel: List[list], k: int) -> List[Relation]:
    return [Relation(f"R{i + 1}", (f"x{i + 1}", "y"), rows) for i, rows in enumerate(pairs_per_rel[:k])]


def _cross(xs, ys):
    return [(x, y) for x in xs for y in ys]


def d0(n: int, k: int = 2, tag: str = "") -> List[Relation]:
    """One hub y joined with ``n`` values of every x variable; full join n^k."""
    if n < 1:
        raise ValueError("n must be positive")
    hub = f"e{tag}1"
    return _star([[(f"{chr(100 + i)}{tag}{j}", hub) for j in range(1, n + 1)] for i in range(k)], k)


def d_alpha(n: int, alpha: float, k: int = 2, tag: str = "") -> List[Relation]:
    """Per relation, the cross product of n^alpha x values and n^(1-alpha) y values."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    a = round(n ** alpha)
    b = round(n ** (1 - alpha))
    if a * b != n:
        raise ValueError(f"n^alpha * n^(1-alpha) is not integral for n={n}, alpha={alpha}")
    ys = [f"b{tag}{j}" for j in range(1, b + 1)]
    rels = []
    for i in range(k):
        xs = [f"{'acghij'[i % 6]}{tag}{i // 6 or ''}{j}" for j in range(1, a + 1)]
        rels.append(_cross(xs, ys))
    return _star(rels, k)


def d1(n: int, k: int = 2, tag: str = "") -> List[Relation]:
    """sqrt(n) x sqrt(n) bicliques; full join n^((k+1)/2)."""
    s = math.isqrt(n)
    if s * s != n:
        raise ValueError("d1 needs a perfect square n")
    return d_alpha(n, 0.5, k, tag) if n > 1 else _star([[(f"a{tag}1", f"b{tag}1")]] * k, k)


def union(*instances: List[Relation]) -> List[Relation]:
    k = len(instances[0])
    if any(len(inst) != k for inst in instances):
        raise ValueError("instances differ in relation count")
    return [Relation(instances[0][i].name, instances[0][i].schema,
                     [row for inst in instances for row in inst[i].rows]) for i in range(k)]


def d0_d1(n: int, k: int = 2) -> List[Relation]:
    return union(d0(n, k, tag="0_"), d1(n, k, tag="1_"))


def quadratic_family(n: int) -> List[Relation]:
    """Hub y over n log n x and z values, plus the cross products D_1..D_{log n}.

    D_i joins ``2^i`` x values (and as many z values) with ``n / 2^i`` fresh y
    values; x and z values are drawn from the hub's pools.
    """
    if n < 2 or n & (n - 1):
        raise ValueError("n must be a power of 2, at least 2")
    log = n.bit_length() - 1
    pool = n * log
    xs = [f"x{j}" for j in range(1, pool + 1)]
    zs = [f"z{j}" for j in range(1, pool + 1)]
    R = [(x, "y*") for x in xs]
    S = [(z, "y*") for z in zs]
    for i in range(1, log + 1):
        ys = [f"y{i}_{j}" for j in range(1, n // 2 ** i + 1)]
        R += _cross(xs[:2 ** i], ys)
        S += _cross(zs[:2 ** i], ys)
    return _star([R, S], 2)


def quadratic_family_join_size(n: int) -> int:
    log = n.bit_length() - 1
    return sum(n * 2 ** i for i in range(1, log + 1)) + (n * log) ** 2


def random_instance(shape: str, k: int, size: int, domain: int, seed: int,
                    skew: float = 0.0, join_domain: Optional[int] = None) -> List[Relation]:
    """Seeded uniform (or Zipf-skewed) tuples without duplicates.

    ``size`` tuples per relation over values ``1..domain``; join variables of
    star and left-deep shapes use ``1..join_domain`` (default ``domain``).
    """
    rng = random.Random(seed)
    join_domain = join_domain or domain
    schemas = shape_schemas(shape, k)

    def draw(n: int) -> int:
        if skew <= 0:
            return rng.randint(1, n)
        weights = [1 / (i ** skew) for i in range(1, n + 1)]
        return rng.choices(range(1, n + 1), weights)[0]

    rels = []
    for schema in schemas:
        rows = set()
        ordered = []
        capacity = 1
        for v in schema:
            capacity *= join_domain if _is_join_var(shape, v) else domain
        target = min(size, capacity)
        while len(rows) < target:
            row = tuple(draw(join_domain if _is_join_var(shape, v) else domain) for v in schema)
            if row not in rows:
                rows.add(row)
                ordered.append(row)
        rels.append(Relation(f"R{len(rels) + 1}", schema, ordered))
    return rels


def _is_join_var(shape: str, var: str) -> bool:
    if shape == "star":
        return var == "y"
    if shape == "leftdeep":
        return var.startswith("x")
    return False


KINDS = ("d0", "d1", "d_alpha", "d0_d1", "quadratic_family", "random")


def gen_instance(kind: str, **params) -> List[Relation]:
    if kind == "d0":
        return d0(params["n"], params.get("k", 2))
    if kind == "d1":
        return d1(params["n"], params.get("k", 2))
    if kind == "d_alpha":
        return d_alpha(params["n"], params["alpha"], params.get("k", 2))
    if kind == "d0_d1":
        return d0_d1(params["n"], params.get("k", 2))
    if kind == "quadratic_family":
        return quadratic_family(params["n"])
    if kind == "random":
        return random_instance(params.get("shape", "star"), params.get("k", 2), params.get("size", 50),
                               params.get("domain", 20), params.get("seed", 0), params.get("skew", 0.0),
                               params.get("join_domain"))
    raise ValueError(f"unknown instance kind {kind!r}; expected one of {KINDS}")
