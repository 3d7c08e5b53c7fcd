"""Delay verification: run an enumerator on an instance, compare with the oracle,
and relate the measured max gap to the algorithm's delay formula.

A suite fixes one algorithm, one ``k`` and one random-instance recipe. Its
constant ``c_measured`` is the largest gap/bound ratio over a set of
calibration seeds disjoint from the evaluation seeds.
"""
from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

from .core import PausableEnumerator, measure_delay
from .dynamic import SelfJoinIndex, enum_selfjoin_star
from .fmm import enum_fmm, preprocess_fmm
from .generators import random_instance
from .leftdeep import enum_leftdeep
from .oracle import oracle_project_join
from .path import enum_path, preprocess_path
from .relation import Relation, SchemaError, load_csv, shape_free_vars, shape_schemas
from .star import enum_star, enum_star_alternate, enum_two_path, star_threshold


class OracleMismatch(AssertionError):
    pass


# ---------------------------------------------------------------------------
# algorithms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Algorithm:
    name: str
    shape: str
    formula: str
    run: Callable[[List[Relation], dict], PausableEnumerator]
    bound: Callable[[dict], float]
    ks: tuple = (2, 3, 4)


def _run_two_path(rels, params):
    return enum_two_path(rels[0], rels[1])


def _run_fmm(rels, params):
    delta = params.get("delta") or default_fmm_delta(sum(len(r) for r in rels))
    plan = preprocess_fmm(rels[0], rels[1], delta, params.get("multiplier", "naive"))
    return enum_fmm(rels[0], rels[1], plan)


def default_fmm_delta(D: int) -> int:
    return max(1, round(D ** (1 / 3)))


def _run_path(rels, params):
    eps = params.get("epsilon", 0.5)
    return enum_path(rels, preprocess_path(rels, eps))


def selfjoin_index(relation: Relation, k: int) -> SelfJoinIndex:
    idx = SelfJoinIndex(k)
    for x, y in relation.rows:
        idx.insert(x, y)
    return idx


def _run_selfjoin(rels, params):
    k = params.get("k", 2)
    return enum_selfjoin_star(selfjoin_index(rels[0], k), k)


def _ratio(num: float, den: float) -> float:
    return num / den if den else 1.0


def _bound_two_path(info):
    return _ratio(info["input_size"] ** 2, info["full_join_size"])


def _bound_star(info):
    if "delta" in info:
        return info["delta"]
    if not info["full_join_size"]:
        return 1
    return star_threshold(info["input_size"], info["full_join_size"], info["k"])


def _bound_alt(info):
    return _ratio(info["full_join_size"], info.get("J", 0))


def _bound_leftdeep(info):
    return _ratio(info["input_size"] ** info["k"], info["full_join_size"])


ALGORITHMS: Dict[str, Algorithm] = {
    a.name: a for a in [
        Algorithm("two-path", "star", "|D|^2/|OUT⋈|", _run_two_path, _bound_two_path, (2,)),
        Algorithm("star", "star", "Delta", lambda r, p: enum_star(r), _bound_star),
        Algorithm("star-alt", "star", "|OUT⋈|/J", lambda r, p: enum_star_alternate(r), _bound_alt),
        Algorithm("fmm", "star", "delta", _run_fmm, lambda i: i["delta"], (2,)),
        Algorithm("leftdeep", "leftdeep", "|D|^k/|OUT⋈|", lambda r, p: enum_leftdeep(r), _bound_leftdeep, (2, 3)),
        Algorithm("path", "path", "Delta^(k-1)", _run_path, lambda i: i["delta"] ** (i["k"] - 1)),
        Algorithm("selfjoin", "star", "|OUT⋈|/J", _run_selfjoin, _bound_alt),
    ]
}


def oracle_inputs(algo: str, relations: Sequence[Relation], k: int):
    """Relations and free variables the oracle should evaluate for ``algo``."""
    if algo == "selfjoin":
        r = relations[0]
        return [Relation(f"R{i}", (f"x{i}", "y"), r.rows) for i in range(1, k + 1)], shape_free_vars("star", k)
    a = ALGORITHMS[algo]
    return list(relations), shape_free_vars(a.shape, k)


# ---------------------------------------------------------------------------
# descriptors and reports
# ---------------------------------------------------------------------------

@dataclass
class QueryDescriptor:
    """A query shape plus where its relations come from (a directory or a generator spec)."""

    shape: str
    k: int
    inputs: Optional[str] = None
    generator: Optional[dict] = None

    def __post_init__(self):
        shape_schemas(self.shape, self.k)

    @property
    def free_vars(self):
        return shape_free_vars(self.shape, self.k)

    def load(self) -> List[Relation]:
        if self.inputs is not None:
            return load_relations(self.inputs, self.shape, self.k)
        if self.generator is not None:
            from .generators import gen_instance

            params = dict(self.generator)
            kind = params.pop("kind")
            return gen_instance(kind, **params)
        raise ValueError("descriptor has neither inputs nor a generator")


def load_relations(directory: str, shape: str, k: int) -> List[Relation]:
    """Read ``R1.csv .. Rk.csv`` and check their headers against the shape."""
    rels = []
    for i, schema in enumerate(shape_schemas(shape, k), start=1):
        path = os.path.join(directory, f"R{i}.csv")
        rel = load_csv(path, name=f"R{i}")
        if rel.schema != schema:
            raise SchemaError(f"{path}: header {list(rel.schema)} does not match {shape} schema {list(schema)}")
        rels.append(rel)
    return rels


@dataclass
class BenchReport:
    instance: str
    seed: Optional[int]
    algorithm: str
    k: int
    input_size: int
    full_join_size: int
    projection_size: int
    parameter: Optional[float]
    delay: dict
    bound: float
    ratio: float
    correct: bool
    mode: Optional[str] = None
    c_measured: Optional[float] = None
    passed: Optional[bool] = None
    extra: dict = field(default_factory=dict)

    def judge(self, c: float) -> "BenchReport":
        self.c_measured = c
        self.passed = self.ratio <= c
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    def flat(self) -> dict:
        d = {k: v for k, v in self.to_dict().items() if k not in ("delay", "extra")}
        d.update({f"delay_{k}": v for k, v in self.delay.items() if k not in ("bound", "bound_satisfied")})
        return d


def verify_delay(relations: Sequence[Relation], algo: str, k: int, params: Optional[dict] = None,
                 instance: str = "", seed: Optional[int] = None, check: bool = True) -> BenchReport:
    """Run ``algo`` under the tick counter, compare with the oracle and evaluate the delay formula."""
    params = dict(params or {})
    params.setdefault("k", k)
    a = ALGORITHMS[algo]
    if k not in a.ks:
        raise ValueError(f"{algo} supports k in {a.ks}, got {k}")
    e = a.run(list(relations), params)
    got: list = []
    rep = measure_delay(e, sink=got)
    info = e.info
    bound = max(1.0, float(a.bound(info)))
    rep.check(bound)
    proj = len(got)
    correct = len(set(got)) == len(got)
    if check:
        orels, free = oracle_inputs(algo, relations, k)
        ref = oracle_project_join(orels, free)
        s = set(got)
        if s != ref.tuples or not correct:
            missing = sorted(ref.tuples - s, key=repr)[:10]
            extra = sorted(s - ref.tuples, key=repr)[:10]
            dups = len(got) - len(s)
            raise OracleMismatch(f"{algo} on {instance or 'instance'}: missing {missing}, unexpected {extra}, "
                                 f"{dups} duplicates")
        proj = ref.projection_size
    param = info.get("delta", info.get("epsilon"))
    if algo == "path":
        param = params.get("epsilon", 0.5)
    return BenchReport(instance, seed, algo, k, info.get("input_size", 0), info.get("full_join_size", 0),
                       proj, param, rep.to_dict(), bound, rep.max_gap / bound, correct, info.get("mode"),
                       extra={"flags": list(e.flags)})


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SuiteCase:
    """One (algorithm, k) suite with its random-instance recipe."""

    algo: str
    k: int
    shape: str
    size: int
    domain: int
    join_domain: Optional[int] = None
    skew: float = 0.0
    params: tuple = ()

    @property
    def name(self) -> str:
        extra = "".join(f",{k}={v}" for k, v in self.params)
        return f"{self.algo}[k={self.k}{extra}]"

    def instance(self, seed: int) -> List[Relation]:
        return random_instance(self.shape, self.k, self.size, self.domain, seed, self.skew, self.join_domain)

    def run(self, seed: int, check: bool = True) -> BenchReport:
        return verify_delay(self.instance(seed), self.algo, self.k, dict(self.params),
                            instance=f"{self.name}#{seed}", seed=seed, check=check)


SUITES: Dict[str, List[SuiteCase]] = {
    "default": [
        SuiteCase("two-path", 2, "star", 120, 60, 6, 1.0),
        SuiteCase("star", 2, "star", 120, 60, 6, 1.0),
        SuiteCase("star", 3, "star", 60, 25, 5, 0.8),
        SuiteCase("star", 4, "star", 30, 12, 4, 0.5),
        SuiteCase("star-alt", 2, "star", 100, 40, 8, 1.0),
        SuiteCase("star-alt", 3, "star", 60, 20, 6, 0.8),
        SuiteCase("fmm", 2, "star", 120, 40, 12, 1.0, (("delta", 4),)),
        SuiteCase("leftdeep", 2, "leftdeep", 100, 40, 6, 1.0),
        SuiteCase("leftdeep", 3, "leftdeep", 60, 20, 3, 0.5),
        SuiteCase("path", 2, "path", 80, 20, None, 1.0, (("epsilon", 0.5),)),
        SuiteCase("path", 3, "path", 70, 15, None, 0.8, (("epsilon", 0.5),)),
        SuiteCase("path", 4, "path", 60, 12, None, 0.5, (("epsilon", 0.5),)),
        SuiteCase("selfjoin", 2, "star", 100, 40, 8, 1.0),
    ],
}
SUITES["smoke"] = [c for c in SUITES["default"] if c.k == 2]

CALIBRATION_SEED_OFFSET = 10_000


def calibrate(case: SuiteCase, seeds: Sequence[int]) -> float:
    """Largest gap/bound ratio over the calibration seeds."""
    return max(case.run(s, check=False).ratio for s in seeds)


@dataclass
class SuiteResult:
    suite: str
    c_measured: float
    reports: List[BenchReport]

    @property
    def within(self) -> float:
        return sum(r.passed for r in self.reports) / len(self.reports) if self.reports else 1.0

    @property
    def worst_excess(self) -> float:
        return max((r.ratio / self.c_measured for r in self.reports), default=0.0)

    @property
    def passed(self) -> bool:
        return self.within >= 0.95 and self.worst_excess <= 2.0

    def summary(self) -> dict:
        return {"suite": self.suite, "c_measured": self.c_measured, "instances": len(self.reports),
                "within": self.within, "worst_excess": self.worst_excess, "passed": self.passed}


def run_case(case: SuiteCase, seeds: Sequence[int], calibration_seeds: Sequence[int],
             workers: int = 1) -> SuiteResult:
    c = calibrate(case, calibration_seeds)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(case.run, seeds))
    else:
        reports = [case.run(s) for s in seeds]
    for r in reports:
        r.judge(c)
    return SuiteResult(case.name, c, reports)


def run_suite(name: str = "default", seeds: int = 30, calibration: int = 100, workers: int = 1) -> List[SuiteResult]:
    try:
        cases = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; expected one of {sorted(SUITES)}") from None
    cal = range(CALIBRATION_SEED_OFFSET, CALIBRATION_SEED_OFFSET + calibration)
    return [run_case(c, range(seeds), cal, workers) for c in cases]


def reports_csv(results: Sequence[SuiteResult]) -> str:
    rows = [dict(suite=res.suite, **r.flat()) for res in results for r in res.reports]
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]))
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()

