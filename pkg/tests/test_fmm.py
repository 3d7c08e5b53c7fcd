import random

import pytest

from conftest import brute_join
from qenum.core import ConfigurationError, drain, measure_delay
from qenum.fmm import (
    MULTIPLIERS,
    BoolMatrix,
    bool_matmul,
    enum_fmm,
    fmm_cases,
    preprocess_fmm,
)
from qenum.relation import Relation

SMALL_OUT = {("a1", "c1"), ("a1", "c2"), ("a1", "c3"), ("a2", "c1"), ("a2", "c2")}


def reference_product(a, b):
    n, m, p = len(a), len(b), len(b[0]) if b else 0
    return [[int(any(a[i][k] and b[k][j] for k in range(m))) for j in range(p)] for i in range(n)]


def random_cells(rng, n, m, density=0.3):
    return [[int(rng.random() < density) for _ in range(m)] for _ in range(n)]


@pytest.mark.parametrize("plug", sorted(MULTIPLIERS))
def test_identity_and_unit(plug):
    rng = random.Random(0)
    M = BoolMatrix.from_lists(random_cells(rng, 6, 6))
    assert bool_matmul(BoolMatrix.identity(6), M, plug) == M
    one = BoolMatrix.from_lists([[1]])
    assert bool_matmul(one, one, plug).to_lists() == [[1]]


@pytest.mark.parametrize("plug", sorted(MULTIPLIERS))
def test_random_against_triple_loop(plug):
    rng = random.Random(1)
    for _ in range(20):
        a, b = random_cells(rng, 20, 30), random_cells(rng, 30, 10, 0.1)
        assert bool_matmul(BoolMatrix.from_lists(a), BoolMatrix.from_lists(b), plug).to_lists() == reference_product(a, b)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        bool_matmul(BoolMatrix.zeros(2, 3), BoolMatrix.zeros(2, 3))
    with pytest.raises(ConfigurationError):
        bool_matmul(BoolMatrix.zeros(1, 1), BoolMatrix.zeros(1, 1), "strassen")
    with pytest.raises(ValueError):
        BoolMatrix(2, 2, [0])


def heavy_heavy(R, S, delta):
    dx = {}
    for x, _ in R.rows:
        dx[x] = dx.get(x, 0) + 1
    dz = {}
    for _, z in S.rows:
        dz[z] = dz.get(z, 0) + 1
    out, _ = brute_join([R, S], ("x", "z"))
    return {(x, z) for x, z in out if dx[x] > delta and dz[z] > delta}


def decoded_hh(plan):
    return {plan.decode(t) for t in plan.materialized_hh}


def test_large_delta_gives_empty_plan(small_R, small_S):
    plan = preprocess_fmm(small_R, small_S, 10)
    assert plan.heavy_x == [] and plan.heavy_z == [] and plan.materialized_hh == []
    assert set(drain(enum_fmm(small_R, small_S, plan))[0]) == SMALL_OUT


def test_delta_one_on_small_example(small_R, small_S):
    plan = preprocess_fmm(small_R, small_S, 1)
    assert [plan.dmap.decode(v) for v in plan.heavy_x] == ["a1"]
    assert decoded_hh(plan) == heavy_heavy(small_R, small_S, 1)
    assert set(drain(enum_fmm(small_R, small_S, plan))[0]) == SMALL_OUT


def test_grid_uses_matrix_path():
    m = 5
    R = Relation("R", ("x", "y"), [(f"x{i}", f"y{j}") for i in range(m) for j in range(m)])
    S = Relation("S", ("y", "z"), [(f"y{j}", f"z{i}") for i in range(m) for j in range(m)])
    plan = preprocess_fmm(R, S, 2)
    assert len(plan.heavy_y) == m and plan.matmul_ticks == m ** 3
    assert decoded_hh(plan) == heavy_heavy(R, S, 2)


def test_invalid_delta(small_R, small_S):
    for bad in (0, -1, 1.5):
        with pytest.raises(ConfigurationError):
            preprocess_fmm(small_R, small_S, bad)


def test_plan_must_match_relations(small_R, small_S):
    plan = preprocess_fmm(small_R, small_S, 2)
    with pytest.raises(ConfigurationError):
        enum_fmm(small_R.with_rows(small_R.rows[:2]), small_S, plan)


def test_small_example_delta_two(small_R, small_S):
    out, _ = drain(enum_fmm(small_R, small_S, preprocess_fmm(small_R, small_S, 2)))
    assert set(out) == SMALL_OUT and len(out) == 5


def random_two_path(rng, size, xdom, ydom, zdom):
    R = Relation("R", ("x", "y"), {(rng.randint(1, xdom), rng.randint(1, ydom)) for _ in range(size)})
    S = Relation("S", ("y", "z"), {(rng.randint(1, ydom), rng.randint(1, zdom)) for _ in range(size)})
    return R, S


def test_all_light_is_pure_merge():
    rng = random.Random(2)
    R, S = random_two_path(rng, 30, 30, 30, 30)
    plan = preprocess_fmm(R, S, 100)
    assert plan.materialized_hh == [] and plan.light_z_lists == []
    out, rep = drain(enum_fmm(R, S, plan))
    assert set(out) == brute_join([R, S], ("x", "z"))[0]


def test_random_against_oracle_with_delay():
    rng = random.Random(3)
    for _ in range(30):
        R, S = random_two_path(rng, rng.randint(5, 100), rng.randint(2, 20), rng.randint(1, 8), rng.randint(2, 20))
        ref = brute_join([R, S], ("x", "z"))[0]
        for delta in (1, 2, 4, 8):
            plan = preprocess_fmm(R, S, delta)
            e = enum_fmm(R, S, plan)
            out, rep = drain(e)
            assert len(out) == len(set(out)) and set(out) == ref
            # one merge round over at most delta lists
            assert rep.max_gap <= 5 * delta + 4


def test_cases_partition_output():
    rng = random.Random(4)
    for _ in range(30):
        R, S = random_two_path(rng, rng.randint(5, 100), rng.randint(2, 15), rng.randint(1, 6), rng.randint(2, 15))
        ref = brute_join([R, S], ("x", "z"))[0]
        for delta in (1, 2, 4, 8):
            plan = preprocess_fmm(R, S, delta)
            parts = [{plan.decode(t) for t in drain(c)[0]} for c in fmm_cases(plan)]
            assert sum(map(len, parts)) == len(ref)
            assert set().union(*parts) == ref


def test_preprocessing_ticks_bound():
    rng = random.Random(5)
    for _ in range(20):
        R, S = random_two_path(rng, 150, 20, 10, 20)
        for delta in (1, 2, 4, 8):
            plan = preprocess_fmm(R, S, delta)
            D = len(R) + len(S)
            assert plan.preprocessing_ticks <= 8 * ((D / delta) ** 3 + D * delta)


def test_numpy_plug_gives_same_plan():
    rng = random.Random(6)
    R, S = random_two_path(rng, 120, 15, 6, 15)
    a = preprocess_fmm(R, S, 2)
    b = preprocess_fmm(R, S, 2, "numpy")
    assert a.materialized_hh == b.materialized_hh
