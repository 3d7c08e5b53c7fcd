"""Command line entry point: ``qenum gen | run | oracle | bench | update``."""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys

from .bench import ALGORITHMS, SUITES, load_relations, oracle_inputs, reports_csv, run_suite, verify_delay
from .core import measure_delay
from .dynamic import SelfJoinIndex, apply_updates, enum_selfjoin_star, parse_update_script
from .generators import KINDS, gen_instance
from .oracle import oracle_project_join
from .relation import SHAPES, RelationError, shape_free_vars, write_csv

log = logging.getLogger("qenum")


def _jsonable(o):
    if dataclasses.is_dataclass(o):
        return dataclasses.asdict(o)
    if isinstance(o, (set, frozenset)):
        return sorted(o, key=repr)
    return str(o)


def _dump(obj, path):
    text = json.dumps(obj, indent=2, default=_jsonable)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def cmd_gen(args) -> int:
    params = {"n": args.n, "k": args.k}
    if args.kind == "d_alpha":
        params["alpha"] = args.alpha
    if args.kind == "quadratic_family":
        params = {"n": args.n}
    if args.kind == "random":
        params = {"shape": args.shape, "k": args.k, "size": args.n, "domain": args.domain,
                  "seed": args.seed, "skew": args.skew, "join_domain": args.join_domain}
    rels = gen_instance(args.kind, **params)
    os.makedirs(args.out, exist_ok=True)
    for r in rels:
        write_csv(r, os.path.join(args.out, f"{r.name}.csv"))
    print(f"wrote {len(rels)} relations, {sum(len(r) for r in rels)} tuples to {args.out}")
    return 0


def cmd_run(args) -> int:
    algo = ALGORITHMS[args.algo]
    if algo.shape != args.shape:
        raise SystemExit(f"algorithm {args.algo} needs shape {algo.shape}, not {args.shape}")
    rels = load_relations(args.inputs, args.shape, args.k)
    params = {"k": args.k}
    if args.delta is not None:
        params["delta"] = args.delta
    if args.epsilon is not None:
        params["epsilon"] = args.epsilon
    if args.check:
        report = verify_delay(rels, args.algo, args.k, params, instance=args.inputs)
        out = report.to_dict()
    else:
        e = algo.run(rels, params)
        got = []
        rep = measure_delay(e, sink=got)
        rep.check(max(1.0, float(algo.bound(e.info))))
        out = {"algorithm": args.algo, "k": args.k, "delay": rep.to_dict(), "info": e.info, "flags": e.flags}
        if args.emit:
            for t in got:
                print(",".join(map(str, t)))
    _dump(out, args.report)
    return 0


def cmd_oracle(args) -> int:
    rels = load_relations(args.inputs, args.shape, args.k)
    if args.selfjoin:
        orels, free = oracle_inputs("selfjoin", rels, args.k)
    else:
        orels, free = rels, shape_free_vars(args.shape, args.k)
    res = oracle_project_join(orels, free)
    if args.emit:
        for t in sorted(res.tuples):
            print(",".join(map(str, t)))
    print(json.dumps({"full_join_size": res.full_join_size, "projection_size": res.projection_size}),
          file=sys.stderr if args.emit else sys.stdout)
    return 0


def cmd_bench(args) -> int:
    results = run_suite(args.suite, seeds=args.seeds, calibration=args.calibration, workers=args.workers)
    ok = True
    for res in results:
        s = res.summary()
        ok &= s["passed"]
        log.info("%s c=%.3f within=%.2f worst=%.2f %s", s["suite"], s["c_measured"], s["within"],
                 s["worst_excess"], "PASS" if s["passed"] else "FAIL")
    _dump({"suite": args.suite, "summaries": [r.summary() for r in results],
           "reports": [rep.to_dict() for r in results for rep in r.reports]}, args.report)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(reports_csv(results))
    return 0 if ok else 1


def cmd_update(args) -> int:
    with open(args.script, encoding="utf-8") as fh:
        ops = parse_update_script(fh.read())
    idx = SelfJoinIndex(args.k)
    reports = apply_updates(idx, ops)
    for r in reports:
        if r.flag:
            log.warning("%s %s: %s", r.op, " ".join(map(str, r.row)), r.flag)
    e = enum_selfjoin_star(idx)
    got = []
    rep = measure_delay(e, sink=got)
    if args.emit:
        for t in got:
            print(",".join(map(str, t)))
    summary = {"updates": len(reports), "applied": sum(r.applied for r in reports),
               "update_ticks": sum(r.ticks for r in reports), "tuples": len(idx), "diagonal": len(idx.diag),
               "answers": len(got), "delay": rep.to_dict()}
    _dump(summary, args.report)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qenum", description="Enumerate projected join queries with bounded delay.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance as R1.csv..Rk.csv")
    g.add_argument("--kind", choices=KINDS, required=True)
    g.add_argument("--n", type=int, required=True, help="size parameter (tuples per relation for random)")
    g.add_argument("--k", type=int, default=2)
    g.add_argument("--alpha", type=float, default=0.5)
    g.add_argument("--shape", choices=SHAPES, default="star")
    g.add_argument("--domain", type=int, default=20)
    g.add_argument("--join-domain", type=int, default=None)
    g.add_argument("--skew", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run one enumerator and report its delay")
    r.add_argument("--shape", choices=SHAPES, required=True)
    r.add_argument("--k", type=int, required=True)
    r.add_argument("--algo", choices=sorted(ALGORITHMS), required=True)
    r.add_argument("--inputs", required=True)
    r.add_argument("--report", default=None, help="JSON output path (default stdout)")
    r.add_argument("--delta", type=int, default=None, help="threshold for fmm")
    r.add_argument("--epsilon", type=float, default=None, help="tradeoff parameter for path")
    r.add_argument("--check", action="store_true", help="also compare with the oracle")
    r.add_argument("--emit", action="store_true", help="print result tuples as CSV")
    r.set_defaults(func=cmd_run)

    o = sub.add_parser("oracle", help="brute-force join sizes (and tuples with --emit)")
    o.add_argument("--shape", choices=SHAPES, required=True)
    o.add_argument("--k", type=int, required=True)
    o.add_argument("--inputs", required=True)
    o.add_argument("--selfjoin", action="store_true", help="join k copies of R1")
    o.add_argument("--emit", action="store_true")
    o.set_defaults(func=cmd_oracle)

    b = sub.add_parser("bench", help="calibrate and check delay bounds on a suite")
    b.add_argument("--suite", choices=sorted(SUITES), default="default")
    b.add_argument("--seeds", type=int, default=30)
    b.add_argument("--calibration", type=int, default=100, help="number of calibration seeds")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--report", default=None)
    b.add_argument("--csv", default=None)
    b.set_defaults(func=cmd_bench)

    u = sub.add_parser("update", help="apply an update script to a self-join index, then enumerate")
    u.add_argument("--script", required=True)
    u.add_argument("--k", type=int, default=2)
    u.add_argument("--report", default=None)
    u.add_argument("--emit", action="store_true")
    u.set_defaults(func=cmd_update)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(message)s")
    try:
        return args.func(args)
    except (RelationError, ValueError, FileNotFoundError) as exc:
        log.error("error: %s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
