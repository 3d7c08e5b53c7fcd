import random
from itertools import product

import pytest

from conftest import random_star
from qenum.core import drain, measure_delay
from qenum.oracle import oracle_project_join
from qenum.relation import Relation
from qenum.star import (
    CartesianSet,
    WitnessSet,
    enum_one_valuation,
    enum_star,
    enum_star_alternate,
    enum_two_path,
    heavy_join_size,
    partition,
    prepare_star,
    star_threshold,
    stored_output,
    _star_heavy,
)

SMALL_OUT = {("a1", "c1"), ("a1", "c2"), ("a1", "c3"), ("a2", "c1"), ("a2", "c2")}


def star_oracle(rels):
    k = len(rels)
    return oracle_project_join(rels, tuple(f"x{i}" for i in range(1, k + 1)))


@pytest.mark.parametrize("bypass", [True, False])
def test_two_path_small_example(small_R, small_S, bypass):
    out, _ = drain(enum_two_path(small_R, small_S, bypass=bypass))
    assert set(out) == SMALL_OUT and len(out) == 5
    assert [z for x, z in out if x == "a1"] == ["c1", "c2", "c3"]


def test_two_path_bypasses_small_output(small_R, small_S):
    e = enum_two_path(small_R, small_S)
    assert e.info["mode"] == "materialized"
    assert e.info["full_join_size"] == 6


def test_two_path_random_against_oracle():
    rng = random.Random(1)
    for _ in range(50):
        size = rng.randint(5, 150)
        rels = random_star(rng, 2, size, rng.randint(2, 40), rng.randint(1, 10))
        ref = star_oracle(rels).tuples
        for bypass in (True, False):
            out, _ = drain(enum_two_path(rels[0], rels[1], bypass=bypass))
            assert len(out) == len(set(out))
            assert set(out) == ref


def hub_skew(n):
    """One x value adjacent to n-1 y values, n-1 x values with one private y each; S = R reversed."""
    R = [("hub", f"y{i}") for i in range(1, n)] + [(f"v{i}", f"y{i}") for i in range(1, n)]
    return Relation("R", ("x", "y"), R), Relation("S", ("y", "z"), [(y, x) for x, y in R])


def test_two_path_skewed_hub_has_constant_delay():
    gaps = []
    for n in (64, 256, 1024):
        R, S = hub_skew(n)
        e = enum_two_path(R, S, bypass=False)
        rep = measure_delay(e)
        assert e.info["mode"] == "interleave"
        gaps.append(rep.max_gap)
    assert max(gaps) <= 2 * min(gaps)


def test_star_k2_matches_two_path(small_R, small_S):
    S = Relation("S", ("x2", "y"), [(z, y) for y, z in small_S.rows])
    R = Relation("R", ("x1", "y"), small_R.rows)
    for bypass in (True, False):
        out, _ = drain(enum_star([R, S], bypass=bypass))
        assert set(out) == SMALL_OUT


def cross_star(m, k):
    rows = [(a, b) for a in range(1, m + 1) for b in range(1, m + 1)]
    return [Relation(f"R{i}", (f"x{i}", "y"), rows) for i in range(1, k + 1)]


def test_star_cross_product_instance():
    ratios = []
    for m in (4, 6, 8):
        rels = cross_star(m, 3)
        e = enum_star(rels)
        out, rep = drain(e)
        assert set(out) == set(product(range(1, m + 1), repeat=3))
        assert e.info["full_join_size"] == m ** 4 and e.info["input_size"] == 3 * m * m
        assert e.info["delta"] == star_threshold(3 * m * m, m ** 4, 3)
        ratios.append(rep.max_gap / e.info["delta"])
    assert max(ratios) <= 2 * min(ratios)


def test_star_random_against_oracle():
    rng = random.Random(2)
    for _ in range(30):
        k = rng.choice([2, 3, 4])
        rels = random_star(rng, k, rng.randint(5, 200 // k), rng.randint(2, 20), rng.randint(1, 6))
        ref = star_oracle(rels).tuples
        for bypass in (True, False):
            out, _ = drain(enum_star(rels, bypass=bypass))
            assert len(out) == len(set(out)) and set(out) == ref


def test_star_composite_variables():
    rng = random.Random(3)
    R1 = Relation("R1", ("a", "b", "y"), {(rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 2)) for _ in range(12)})
    R2 = Relation("R2", ("c", "y"), {(rng.randint(1, 5), rng.randint(1, 2)) for _ in range(8)})
    ref = oracle_project_join([R1, R2], ("a", "b", "c")).tuples
    for f in (lambda r: enum_star(r, bypass=False), enum_star_alternate):
        out, _ = drain(f([R1, R2]))
        assert set(out) == ref and len(out) == len(ref)


def test_one_valuation_walk(small_R, small_S):
    S = Relation("S", ("x2", "y"), [(z, y) for y, z in small_S.rows])
    q = prepare_star([Relation("R", ("x1", "y"), small_R.rows), S])
    part = partition(q, delta=10)
    a1 = q.dmap.forward["a1"]
    out, _ = drain(enum_one_valuation(q, 0, a1, part))
    assert [q.decode(t) for t in out] == [("a1", "c1"), ("a1", "c2"), ("a1", "c3")]


def test_one_valuation_singletons():
    rels = [Relation(f"R{i}", (f"x{i}", "y"), [(i, 0)]) for i in range(1, 4)]
    q = prepare_star(rels)
    part = partition(q, 0)
    out, rep = drain(enum_one_valuation(q, 1, q.dmap.forward[2], part))
    assert [q.decode(t) for t in out] == [(1, 2, 3)]
    assert rep.max_gap <= 8


def test_one_valuation_union_is_lexicographic():
    # v=0 in R2 has neighbours y=1, y=2; each y joins two values of x1 and two of x3
    R1 = Relation("R1", ("x1", "y"), [(10, 1), (11, 1), (11, 2), (12, 2)])
    R2 = Relation("R2", ("x2", "y"), [(0, 1), (0, 2)])
    R3 = Relation("R3", ("x3", "y"), [(20, 1), (21, 1), (20, 2), (22, 2)])
    q = prepare_star([R1, R2, R3])
    part = partition(q, 0)  # everything heavy, so Q_2 reads R1 heavy = R1
    out, _ = drain(enum_one_valuation(q, 1, q.dmap.forward[0], part))
    dec = [q.decode(t) for t in out]
    expect = sorted({(a, 0, c) for a, c in product([10, 11], [20, 21])} | {(a, 0, c) for a, c in product([11, 12], [20, 22])})
    assert set(dec) == set(expect) and len(dec) == 7
    assert out == sorted(out) and len(set(out)) == len(out)


def subquery_outputs(q, part):
    """Per member of the decomposition, the tuples it produces (compressed ids)."""
    members = []
    for i in range(q.k):
        outs = []
        for v in part.light_values[i]:
            got, _ = drain(enum_one_valuation(q, i, v, part))
            assert got == sorted(got) and len(set(got)) == len(got)
            outs += got
        members.append(outs)
    heavy, _ = drain(_star_heavy(q, part))
    members.append(heavy)
    return members


def test_partition_soundness_exhaustive():
    rng = random.Random(4)
    for _ in range(40):
        k = rng.choice([2, 3])
        rels = random_star(rng, k, rng.randint(5, 60), rng.randint(2, 10), rng.randint(1, 4))
        q = prepare_star(rels)
        D, out_join = q.input_size, q.full_join_size()
        if out_join == 0:
            continue
        part = partition(q, star_threshold(D, out_join, k))
        for i, r in enumerate(q.relations):
            assert len(part.heavy[i]) + len(part.light[i]) == len(r)
            assert set(part.heavy[i].rows).isdisjoint(part.light[i].rows)
        produced = [q.decode(t) for m in subquery_outputs(q, part) for t in m]
        assert len(produced) == len(set(produced))
        assert set(produced) == star_oracle(rels).tuples


def test_heavy_subquery_bound():
    rng = random.Random(5)
    for _ in range(60):
        k = rng.choice([2, 3, 4])
        rels = random_star(rng, k, rng.randint(5, 60), rng.randint(2, 15), rng.randint(1, 5))
        q = prepare_star(rels)
        D, out_join = q.input_size, q.full_join_size()
        if out_join == 0:
            continue
        delta = star_threshold(D, out_join, k)
        qh = heavy_join_size(partition(q, delta))
        assert qh <= D * (D / delta) ** (k - 1) + 1e-9
        assert D * (D / delta) ** (k - 1) <= out_join / 2 + 1e-9


def test_alternate_cartesian_witness():
    # one y joins everything: J is the full cartesian product
    R1 = Relation("R1", ("x1", "y"), [(i, 0) for i in range(6)] + [(0, 1)])
    R2 = Relation("R2", ("x2", "y"), [(i, 0) for i in range(5)] + [(9, 1)])
    q = prepare_star([R1, R2])
    J, kind = stored_output(q)
    assert kind == "cartesian" and isinstance(J, CartesianSet) and len(J) == 30
    e = enum_star_alternate([R1, R2])
    out, rep = drain(e)
    assert set(out) == star_oracle([R1, R2]).tuples and len(out) == len(set(out))
    assert e.info["window"] <= 7 * e.info["full_join_size"] / e.info["J"] + 1
    assert rep.max_gap <= e.info["window"] + 8


def test_alternate_domain_witness():
    # x1 has many values each with a private y: dom(x1) beats every per-y product
    R1 = Relation("R1", ("x1", "y"), [(i, i) for i in range(10)])
    R2 = Relation("R2", ("x2", "y"), [(0, i) for i in range(10)])
    q = prepare_star([R1, R2])
    J, kind = stored_output(q)
    assert kind == "domain:x1" and isinstance(J, WitnessSet) and len(J) == 10
    assert {q.decode(t) for t in J} <= star_oracle([R1, R2]).tuples


def test_alternate_tie_prefers_cartesian():
    R1 = Relation("R1", ("x1", "y"), [(1, 0), (2, 0)])
    R2 = Relation("R2", ("x2", "y"), [(1, 0)])
    _, kind = stored_output(prepare_star([R1, R2]))
    assert kind == "cartesian"


def test_alternate_random_and_selection_rule():
    rng = random.Random(6)
    for _ in range(30):
        k = rng.choice([2, 3])
        rels = random_star(rng, k, rng.randint(5, 80), rng.randint(2, 20), rng.randint(1, 6))
        ref = star_oracle(rels)
        e = enum_star_alternate(rels)
        out, rep = drain(e)
        assert len(out) == len(set(out)) and set(out) == ref.tuples
        if ref.projection_size:
            assert e.info["J"] >= ref.projection_size ** (1 / k) - 1e-9
            assert e.info["window"] <= (5 + k) * ref.full_join_size / e.info["J"] + 1
            assert rep.max_gap <= e.info["window"] + 2 * k + 4
            assert not e.flags


def test_empty_star():
    rels = [Relation("R1", ("x1", "y"), [(1, 1)]), Relation("R2", ("x2", "y"), [(1, 2)])]
    for f in (enum_star, enum_star_alternate):
        out, _ = drain(f(rels))
        assert out == []
