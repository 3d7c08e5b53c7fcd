import json
import math

import pytest

from conftest import brute_join
from qenum.bench import (
    ALGORITHMS,
    SUITES,
    Algorithm,
    OracleMismatch,
    QueryDescriptor,
    load_relations,
    run_suite,
    verify_delay,
)
from qenum.cli import main
from qenum.core import PausableEnumerator, scan
from qenum.generators import (
    d0,
    d0_d1,
    d1,
    d_alpha,
    gen_instance,
    quadratic_family,
    quadratic_family_join_size,
    random_instance,
)
from qenum.oracle import OracleLimitError, oracle_project_join
from qenum.relation import Relation, SchemaError, write_csv


def test_oracle_on_small_example(small_R, small_S):
    res = oracle_project_join([small_R, small_S], ("x", "z"))
    assert res.projection_size == 5 and res.full_join_size == 6


def test_oracle_empty_and_unknown_variable(small_R, small_S):
    assert oracle_project_join([small_R, small_S.with_rows([])], ("x", "z")).full_join_size == 0
    with pytest.raises(ValueError):
        oracle_project_join([small_R], ("q",))


def test_oracle_agrees_with_brute_force():
    for seed in range(10):
        rels = random_instance("star", 3, 12, 6, seed, join_domain=3)
        res = oracle_project_join(rels, ("x1", "x2", "x3"))
        assert (res.tuples, res.full_join_size) == brute_join(rels, ("x1", "x2", "x3"))


def test_oracle_limit():
    with pytest.raises(OracleLimitError):
        oracle_project_join(d0(50), ("x1", "x2"), limit=100)


def test_d0():
    rels = d0(4)
    res = oracle_project_join(rels, ("x1", "x2"))
    assert [len(r) for r in rels] == [4, 4]
    assert res.full_join_size == res.projection_size == 16


def test_d1():
    rels = d1(4)
    res = oracle_project_join(rels, ("x1", "x2"))
    assert [len(r) for r in rels] == [4, 4]
    assert res.full_join_size == 8 and res.projection_size == 4
    with pytest.raises(ValueError):
        d1(5)


@pytest.mark.parametrize("n,alpha", [(16, 0.5), (16, 0.25), (64, 0.5), (8, 1 / 3)])
def test_d_alpha_join_size(n, alpha):
    rels = d_alpha(n, alpha)
    res = oracle_project_join(rels, ("x1", "x2"))
    assert [len(r) for r in rels] == [n, n]
    assert res.full_join_size == round(n ** (1 + alpha))
    assert res.projection_size == round(n ** (2 * alpha))


def test_d0_d1_is_disjoint_union():
    rels = d0_d1(16)
    res = oracle_project_join(rels, ("x1", "x2"))
    assert res.full_join_size == 16 ** 2 + 16 ** 1.5


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_quadratic_family(n):
    rels = quadratic_family(n)
    D = sum(len(r) for r in rels)
    log = int(math.log2(n))
    res = oracle_project_join(rels, ("x1", "x2"))
    assert res.full_join_size == quadratic_family_join_size(n)
    assert D == 2 * n * log + 2 * sum(2 ** i * (n // 2 ** i) for i in range(1, log + 1))
    assert D <= 4 * n * log
    assert 1 <= 16 * res.full_join_size / D ** 2 <= 4


def test_quadratic_family_n8_values():
    rels = quadratic_family(8)
    assert sum(len(r) for r in rels) == 96
    assert quadratic_family_join_size(8) == 688
    with pytest.raises(ValueError):
        quadratic_family(6)


def test_generators_are_deterministic():
    for shape, k in [("star", 3), ("leftdeep", 3), ("path", 4)]:
        a = random_instance(shape, k, 30, 10, seed=5, skew=0.7)
        b = random_instance(shape, k, 30, 10, seed=5, skew=0.7)
        assert [r.rows for r in a] == [r.rows for r in b]
        assert all(len(set(r.rows)) == len(r.rows) for r in a)
    assert gen_instance("d0", n=3, k=3)[2].rows == d0(3, 3)[2].rows
    with pytest.raises(ValueError):
        gen_instance("nope")


def test_verify_delay_reports(small_R, small_S):
    rels = [Relation("R1", ("x1", "y"), small_R.rows), Relation("R2", ("x2", "y"), small_S.project(("z", "y")).rows)]
    rep = verify_delay(rels, "two-path", 2)
    assert rep.correct and rep.projection_size == 5 and rep.full_join_size == 6
    assert rep.ratio == rep.delay["max_gap"] / rep.bound


def test_verify_delay_detects_wrong_output(monkeypatch):
    def broken(rels, params):
        return PausableEnumerator(scan([("nope", "nope")]), name="broken")

    monkeypatch.setitem(ALGORITHMS, "broken", Algorithm("broken", "star", "1", broken, lambda i: 1))
    with pytest.raises(OracleMismatch, match="unexpected"):
        verify_delay(d0(3), "broken", 2)
    with pytest.raises(ValueError):
        verify_delay(d0(3), "fmm", 3)


def test_smoke_suite_passes():
    for res in run_suite("smoke", seeds=5, calibration=10):
        assert all(r.correct and r.passed is not None for r in res.reports)
        assert res.worst_excess <= 2
    with pytest.raises(ValueError):
        run_suite("missing")
    assert {c.algo for c in SUITES["default"]} == set(ALGORITHMS)


def test_load_relations_checks_headers(tmp_path):
    for r in d0(3):
        write_csv(r, tmp_path / f"{r.name}.csv")
    assert [len(r) for r in load_relations(str(tmp_path), "star", 2)] == [3, 3]
    with pytest.raises(SchemaError):
        load_relations(str(tmp_path), "path", 2)
    desc = QueryDescriptor("star", 2, generator={"kind": "d0", "n": 3})
    assert desc.free_vars == ("x1", "x2") and len(desc.load()) == 2


def test_cli_gen_run_oracle(tmp_path, capsys):
    inst = tmp_path / "inst"
    assert main(["gen", "--kind", "d0_d1", "--n", "16", "--out", str(inst)]) == 0
    report = tmp_path / "rep.json"
    assert main(["run", "--shape", "star", "--k", "2", "--algo", "star", "--inputs", str(inst),
                 "--check", "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["correct"] and data["projection_size"] == 16 * 16 + 16
    capsys.readouterr()
    assert main(["oracle", "--shape", "star", "--k", "2", "--inputs", str(inst)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out == {"full_join_size": 16 ** 2 + 64, "projection_size": 272}


def test_cli_run_emit_and_errors(tmp_path, capsys):
    inst = tmp_path / "inst"
    main(["gen", "--kind", "random", "--shape", "path", "--k", "3", "--n", "20", "--domain", "6", "--out", str(inst)])
    capsys.readouterr()
    assert main(["run", "--shape", "path", "--k", "3", "--algo", "path", "--inputs", str(inst),
                 "--epsilon", "0.3", "--emit", "--report", str(tmp_path / "r.json")]) == 0
    lines = capsys.readouterr().out.split()
    ref = oracle_project_join(load_relations(str(inst), "path", 3), ("x1", "x4")).tuples
    assert {tuple(int(v) for v in l.split(",")) for l in lines} == {tuple(int(v) for v in t) for t in ref}
    assert main(["run", "--shape", "star", "--k", "2", "--algo", "star", "--inputs", str(tmp_path / "none")]) == 2
    with pytest.raises(SystemExit):
        main(["run", "--shape", "path", "--k", "2", "--algo", "star", "--inputs", str(inst)])


def test_cli_update(tmp_path, capsys):
    script = tmp_path / "ops.txt"
    script.write_text("I 1 5\nI 2 5\nI 2 5\nD 3 3\nI 4 6\nD 4 6\n")
    assert main(["update", "--script", str(script), "--emit"]) == 0
    out = capsys.readouterr().out
    answers = [l for l in out.splitlines() if l and "," in l and not l.startswith((" ", "{", "}"))]
    assert sorted(answers) == ["1,1", "1,2", "2,1", "2,2"]
    summary = json.loads(out[out.index("{"):])
    assert summary["applied"] == 4 and summary["tuples"] == 2 and summary["diagonal"] == 2
