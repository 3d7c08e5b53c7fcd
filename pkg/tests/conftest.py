import random
from itertools import product

import pytest

from qenum.relation import Relation

ACCEPTANCE_LINES = []


@pytest.fixture
def small_R():
    return Relation("R", ("x", "y"), [("a1", "b1"), ("a1", "b2"), ("a1", "b3"), ("a2", "b1")])


@pytest.fixture
def small_S():
    return Relation("S", ("y", "z"), [("b1", "c1"), ("b1", "c2"), ("b2", "c2"), ("b3", "c3")])


def brute_join(relations, free):
    """Naive join over all tuple combinations; only for tiny inputs."""
    out = set()
    full = 0
    for combo in product(*(r.rows for r in relations)):
        b = {}
        ok = True
        for r, t in zip(relations, combo):
            for v, x in zip(r.schema, t):
                if b.setdefault(v, x) != x:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            full += 1
            out.add(tuple(b[v] for v in free))
    return out, full


def random_star(rng: random.Random, k: int, size: int, xdom: int, ydom: int):
    rels = []
    for i in range(1, k + 1):
        rows = {(rng.randint(1, xdom), rng.randint(1, ydom)) for _ in range(size)}
        rels.append(Relation(f"R{i}", (f"x{i}", "y"), sorted(rows)))
    return rels


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
