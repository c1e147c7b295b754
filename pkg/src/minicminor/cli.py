"""Command-line interface.

Exit codes: 0 success, 1 property violation, 2 usage error, 3 harness
error (unreadable input, parse error, exhausted oracle).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import analysis, behavior, bigstep, smallstep
from .difftest import GenConfig, case_oracles, fuzz_pass
from .oracle import Oracle, OracleExhausted
from .syntax import ParseError, Seq, parse_program, pretty, pretty_program
from .transform import MAX_UNROLL, get_passes, run_pipeline

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_HARNESS = 0, 1, 2, 3


def default_fuel() -> int:
    return int(os.environ.get("MINICMINOR_FUEL", "10000"))


def _read(path: str):
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return parse_program(text)


def _print(obj) -> None:
    print(json.dumps(obj, indent=2))


def cmd_run(args) -> int:
    p = _read(args.file)
    oracle = Oracle.from_spec(args.oracle)
    if args.semantics == "small":
        r = smallstep.run(p, oracle.fresh(), args.fuel)
        out = r.to_json()
        beh = behavior.from_run(r)
    else:
        r = bigstep.exec_program(p, oracle.fresh(), args.fuel)
        out = r.to_json()
        beh = bigstep.behavior_big(p, oracle.fresh(), args.fuel)
    out["behavior"] = behavior.behavior_name(beh)
    rc = EXIT_OK
    if args.check_agreement:
        v = behavior.agreement(behavior.classify(p, oracle.fresh(), args.fuel),
                               bigstep.behavior_big(p, oracle.fresh(), args.fuel))
        out["agreement"] = v.to_json()
        rc = EXIT_OK if v else EXIT_VIOLATION
    if args.json:
        _print(out)
    else:
        print(f"status: {out['status']}" + (" (wrong)" if out.get("wrong") else ""))
        print(f"behavior: {out['behavior']}")
        for e in out["trace"]:
            print(f"  {e['fn']}({e['arg']}) -> {e['ret']}")
        if out.get("final") is not None:
            print("final: " + ", ".join(f"{k}={v}" for k, v in out["final"].items()))
        if "agreement" in out:
            print("agreement: " + ("ok" if out["agreement"]["holds"] else out["agreement"]["reason"]))
    return rc


def cmd_transform(args) -> int:
    p = _read(args.file)
    res = run_pipeline(get_passes(args.passes, args.max_unroll), p)
    if args.emit_stages:
        d = Path(args.emit_stages)
        d.mkdir(parents=True, exist_ok=True)
        for k, (name, before, after) in enumerate(res.stages):
            (d / f"{k:02d}_{name}.before.cmin").write_text(pretty_program(before))
            (d / f"{k:02d}_{name}.after.cmin").write_text(pretty_program(after))
    text = pretty_program(res.program)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_diff(args) -> int:
    p = _read(args.file)
    res = run_pipeline(get_passes(args.passes, args.max_unroll), p)
    oracles = case_oracles(args.seed, args.oracles, args.fuel)
    out = {"stages": []}
    ok = True
    pairs = [(name, before, after) for name, before, after in res.stages]
    if len(pairs) > 1:
        pairs.append(("pipeline", p, res.program))
    for name, before, after in pairs:
        verdicts = {
            "forward": behavior.check_forward(before, after, oracles, args.fuel),
            "backward": behavior.check_backward(before, after, oracles, args.fuel),
            "equiv": behavior.check_equiv(before, after, oracles, args.fuel),
        }
        # going wrong may legitimately be refined, so only forward and
        # backward preservation are required
        ok &= bool(verdicts["forward"]) and bool(verdicts["backward"])
        out["stages"].append({"pass": name, "changed": before != after,
                              **{k: v.to_json() for k, v in verdicts.items()}})
    if args.json:
        _print(out)
    else:
        for st in out["stages"]:
            marks = " ".join(f"{k}={'holds' if st[k]['holds'] else 'FAILS'}"
                             for k in ("forward", "backward", "equiv"))
            print(f"{st['pass']}: {marks}" + ("" if st["changed"] else " (unchanged)"))
            for k in ("forward", "backward", "equiv"):
                if not st[k]["holds"]:
                    print(f"  {k}: {st[k]['reason']}")
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_fuzz(args) -> int:
    cfg = GenConfig(seed=args.seed, max_depth=args.max_depth)
    report = fuzz_pass(args.passes, cfg, args.count, args.oracles, args.fuel,
                       shrink_failures=not args.no_shrink, workers=args.workers)
    _print(report.to_json())
    return EXIT_VIOLATION if report.cases_failed else EXIT_OK


def cmd_analyze(args) -> int:
    p = _read(args.file)
    stmts = []
    s = p.body
    while isinstance(s, Seq):
        stmts.append(s.first)
        s = s.second
    stmts.append(s)
    out = {"program": analysis.analyze(p.body),
           "statements": [{"stmt": pretty(t).splitlines()[0], **analysis.analyze(t)}
                          for t in stmts]}
    _print(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="minicminor", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    fuel = dict(type=int, default=default_fuel(), help="step budget (default $MINICMINOR_FUEL or 10000)")

    r = sub.add_parser("run", help="execute a program")
    r.add_argument("file")
    r.add_argument("--semantics", choices=["small", "big"], default="small")
    r.add_argument("--fuel", **fuel)
    r.add_argument("--oracle", default="const:0", help="const:N, seed:N or script:FILE.json")
    r.add_argument("--json", action="store_true")
    r.add_argument("--check-agreement", action="store_true")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("transform", help="apply passes and print the result")
    t.add_argument("file")
    t.add_argument("--pass", dest="passes", required=True, help="comma-separated pass list")
    t.add_argument("--max-unroll", type=int, default=MAX_UNROLL)
    t.add_argument("--emit-stages", metavar="DIR")
    t.add_argument("-o", "--output")
    t.set_defaults(func=cmd_transform)

    d = sub.add_parser("diff", help="check behavior preservation of passes on a program")
    d.add_argument("file")
    d.add_argument("--pass", dest="passes", required=True)
    d.add_argument("--fuel", **fuel)
    d.add_argument("--oracles", type=int, default=3)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--max-unroll", type=int, default=MAX_UNROLL)
    d.add_argument("--json", action="store_true")
    d.set_defaults(func=cmd_diff)

    f = sub.add_parser("fuzz", help="differential fuzzing of one pass")
    f.add_argument("--pass", dest="passes", required=True)
    f.add_argument("--count", type=int, default=1000)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--fuel", **fuel)
    f.add_argument("--oracles", type=int, default=3)
    f.add_argument("--max-depth", type=int, default=4)
    f.add_argument("--workers", type=int, default=1)
    f.add_argument("--no-shrink", action="store_true")
    f.set_defaults(func=cmd_fuzz)

    a = sub.add_parser("analyze", help="print static facts per top-level statement")
    a.add_argument("file")
    a.set_defaults(func=cmd_analyze)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, OracleExhausted, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HARNESS
    except (KeyError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
