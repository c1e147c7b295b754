"""Acceptance criteria, each at its stated scale and tolerance.

Every test records one PASS/FAIL line; the lines are repeated in the
pytest terminal summary.
"""
import itertools
import random
import time

import pytest

from minicminor import corpus
from minicminor.analysis import contains_exit, indep, silent
from minicminor.behavior import (INF, DivergesSilently, GoesWrong, Terminates,
                                 Unresolved, agreement, check_backward,
                                 check_forward, classify, guard,
                                 probe_determinacy, probe_receptiveness,
                                 refines)
from minicminor.bigstep import (PARTIAL, ExitN, Normal, behavior_big, exec,
                                exec_loop_counted, exec_program)
from minicminor.cli import main
from minicminor.difftest import (GenConfig, _Gen, case_config, case_oracles,
                                 fuzz_pass, gen_program, mutant_for)
from minicminor.oracle import Event, Oracle, is_prefix
from minicminor.smallstep import run
from minicminor.state import Env, EvalError, eval_expr
from minicminor.syntax import Loop, Program, Seq, parse_program, walk
from minicminor.transform import PASSES, counted_body, get_passes, unroll_candidate

PASSES3 = ("unswitch", "unroll", "silentloop")
LEMMA_INSTANCES = 500


def _eval(e, env):
    try:
        return eval_expr(e, env)
    except EvalError as exc:
        return type(exc)


def _gen(seed, **kw):
    cfg = case_config(GenConfig(**kw), seed)
    g = _Gen(cfg)
    env = Env({r: g.rng.randint(-3, 8) for r in cfg.reg_pool + cfg.counters})
    return g, env


# -- 1 ---------------------------------------------------------------------

def test_factorial_example(criterion, capsys):
    t0 = time.perf_counter()
    p = corpus.load("factorial")
    fails = []
    small = run(p, Oracle.constant(0), 10_000)
    big = exec_program(p, Oracle.constant(0), 10_000)
    if not (small.status == "terminated" and small.trace == () and small.env["x"] == 3628800):
        fails.append(f"small-step {small.status} x={small.env and small.env.get('x')}")
    if not (isinstance(big.outcome, Normal) and big.trace == () and big.outcome.env["x"] == 3628800):
        fails.append("big-step result")
    path = str(corpus.path("factorial"))
    capsys.readouterr()
    rc = main(["transform", path, "--pass", "unroll"])
    out = capsys.readouterr().out
    p2 = parse_program(out)
    if rc != 0 or any(isinstance(n, Loop) for n in walk(p2.body)):
        fails.append("unrolled output still has a loop")
    rc = main(["diff", path, "--pass", "unroll", "--json"])
    import json
    st = json.loads(capsys.readouterr().out)["stages"][0]
    if rc != 0 or not (st["changed"] and st["equiv"]["holds"]):
        fails.append("diff does not report equivalence")
    dt = time.perf_counter() - t0
    if dt >= 1.0:
        fails.append(f"took {dt:.2f}s")
    ok = criterion("1 factorial example", not fails,
                   "; ".join(fails) or f"x = 3628800 under both semantics, unroll equivalent ({dt:.2f}s)")
    assert ok


# -- 2 ---------------------------------------------------------------------

def test_semantics_agreement(criterion):
    t0 = time.perf_counter()
    cfg = GenConfig(seed=2024)
    bad = []
    n = 0
    for k in range(1000):
        ccfg = case_config(cfg, k)
        p = gen_program(ccfg)
        oracles = case_oracles(ccfg.seed, 3, 10_000)
        assert {o.mode for o in oracles} == {"const", "seed", "script"}
        for fuel in (1000, 10_000):
            for o in oracles:
                n += 1
                v = agreement(classify(p, o.fresh(), fuel), behavior_big(p, o.fresh(), fuel))
                if not v:
                    bad.append((k, o.spec()[:30], fuel, v.reason))
    dt = time.perf_counter() - t0
    ok = criterion("2 semantics agreement", not bad and dt < 60,
                   f"{n} comparisons, {len(bad)} disagreements, {dt:.1f}s"
                   + (f"; first: {bad[0]}" if bad else ""))
    assert ok


# -- 3 ---------------------------------------------------------------------

def test_pass_preservation(criterion):
    t0 = time.perf_counter()
    parts, ok = [], True
    for name in PASSES3:
        rep = fuzz_pass(name, GenConfig(seed=7), 1000, oracles_per_case=3, fuel=10_000)
        ok &= rep.cases_run == 1000 and rep.cases_failed == 0
        parts.append(f"{name} {rep.cases_failed}/{rep.cases_run} failed "
                     f"({rep.cases_transformed} transformed)")
        mut = fuzz_pass(mutant_for(name), GenConfig(seed=7), 1000, oracles_per_case=3,
                        fuel=10_000, max_failures=1)
        caught = mut.cases_failed >= 1 and bool(mut.failures[0].minimized)
        ok &= caught
        parts.append(f"{mutant_for(name)} caught after {mut.cases_run} cases"
                     if caught else f"{mutant_for(name)} NOT caught")
    dt = time.perf_counter() - t0
    ok &= dt < 300
    assert criterion("3 pass preservation", ok, "; ".join(parts) + f" ({dt:.0f}s)")


# -- 4 ---------------------------------------------------------------------

def _indep_spec():
    seen = checked = 0
    while checked < LEMMA_INSTANCES:
        seen += 1
        g, env = _gen(seen)
        s, e = g.stmt(3), g.expr(2)
        if not indep(e, s):
            continue
        r = exec(s, env, Oracle.seeded(seen), g.rng.randint(1, 400))
        if not isinstance(r.outcome, Normal):
            continue
        checked += 1
        if _eval(e, env) != _eval(e, r.outcome.env):
            return f"violated at instance {seen}"
    return None


def _silent_spec():
    checked = 0
    for k in itertools.count():
        g, env = _gen(k, extcall_prob=0.5)
        s = g.stmt(4)
        if not silent(s):
            continue
        checked += 1
        fuel = g.rng.randint(0, 2000)
        if exec(s, env, Oracle.seeded(k), fuel).trace:
            return "big-step trace not empty"
        if run(Program(s, env), Oracle.seeded(k), fuel).trace:
            return "small-step trace not empty"
        if checked >= LEMMA_INSTANCES:
            return None


def _noexit_spec():
    checked = 0
    for k in itertools.count():
        g, env = _gen(k)
        s = g.stmt(3)
        if contains_exit(s):
            continue
        checked += 1
        r = exec(Loop(s), env, Oracle.seeded(k), g.rng.randint(0, 3000))
        if r.outcome != PARTIAL:
            return f"exit-free loop gave {r.outcome}"
        if checked >= LEMMA_INSTANCES:
            return None


def _loop_never_normal():
    for k in range(LEMMA_INSTANCES):
        g, env = _gen(k)
        r = exec(Loop(g.stmt(3)), env, Oracle.seeded(k), g.rng.randint(0, 3000))
        if isinstance(r.outcome, Normal):
            return "a loop terminated normally"
    return None


def _iteration_count():
    exits = truncs = 0
    for k in itertools.count():
        g, env = _gen(k, invalid_site_prob=0.0)
        c = unroll_candidate(g.counted(3))
        if c is None:
            continue
        body = counted_body(c.counter, c.bound, c.inner)
        lc = exec_loop_counted(body, env.update(c.counter, 0), Oracle.seeded(k),
                               g.rng.randint(0, 400))
        if isinstance(lc.outcome, ExitN) and lc.outcome.n == 0:
            exits += 1
            if lc.iterations != c.bound:
                return f"exit after {lc.iterations} iterations, bound {c.bound}"
        elif lc.outcome == PARTIAL:
            truncs += 1
            if lc.iterations > c.bound:
                return f"truncated after {lc.iterations} > {c.bound} iterations"
        if exits >= LEMMA_INSTANCES and truncs >= LEMMA_INSTANCES:
            return None


@pytest.mark.parametrize("lemma,check", [
    ("indep_spec", _indep_spec), ("silent_spec", _silent_spec),
    ("noexit_spec", _noexit_spec), ("loop_never_normal", _loop_never_normal),
    ("iteration_count", _iteration_count),
])
def test_lemma_suites(criterion, lemma, check):
    err = check()
    assert criterion(f"4 lemma {lemma}", err is None,
                     err or f"0 violations over >= {LEMMA_INSTANCES} instances")


# -- 5 ---------------------------------------------------------------------

def test_behavioral_properties(criterion):
    errs = []
    e1, e2, e3 = Event("f", 0, 1), Event("f", 0, 2), Event("g", 1, 0)
    traces = [(), (e1,), (e2,), (e1, e3)]
    envs = [Env({"x": 0}), Env({"x": 1})]
    universe = ([Terminates(t, v) for t in traces for v in envs]
                + [GoesWrong(t) for t in traces] + [DivergesSilently(t) for t in traces])
    # behaviors observed on real runs join the exhaustive universe
    for k in range(60):
        p = gen_program(case_config(GenConfig(seed=5), k))
        b = classify(p, Oracle.constant(1), 2000)
        if not isinstance(b, Unresolved):
            universe.append(b)
    if not all(refines(b, b) for b in universe):
        errs.append("reflexivity")
    for a, b, c in itertools.product(universe, repeat=3):
        if refines(a, b) and refines(b, c) and not refines(a, c):
            errs.append("transitivity")
            break
    # the going-wrong clause
    if not refines(Terminates((e1, e3), envs[0]), GoesWrong((e1,))):
        errs.append("wrong clause: extension")
    if not refines(GoesWrong((e1,)), GoesWrong((e1,))):
        errs.append("wrong clause: equal")
    if refines(Terminates((e2,), envs[0]), GoesWrong((e1,))):
        errs.append("wrong clause: non-prefix accepted")
    if refines(DivergesSilently((e1,)), Terminates((e1,), envs[0])):
        errs.append("status mismatch accepted")
    # fuel monotonicity and the fuel-0 axiom
    rng = random.Random(9)
    for k in range(500):
        p = gen_program(case_config(GenConfig(seed=6), k))
        f = rng.randint(0, 3000)
        o = Oracle.seeded(k)
        if not is_prefix(run(p, o.fresh(), f).trace, run(p, o.fresh(), f + rng.randint(1, 500)).trace):
            errs.append(f"small-step monotonicity, case {k}")
        r1 = exec_program(p, o.fresh(), f)
        r2 = exec_program(p, o.fresh(), f + rng.randint(1, 500))
        if not is_prefix(r1.trace, r2.trace) or (r1.outcome != PARTIAL and r1 != r2):
            errs.append(f"big-step monotonicity, case {k}")
        z = exec(p.body, Env(p.initial_regs), o.fresh(), 0)
        if z.outcome != PARTIAL or z.trace:
            errs.append(f"fuel-0 axiom, case {k}")
    rows = [((0, 0, 0, 5), True), ((INF, 3, 0, 2), True),
            ((INF, 2, 0, 5), False), ((INF, 0, 1, 99), True)]
    for args, want in rows:
        if guard(*args) is not want:
            errs.append(f"guard{args}")
    assert criterion("5 behavioral properties", not errs,
                     "; ".join(errs[:5]) or f"refinement over {len(universe)} behaviors, "
                     "500 fuel-monotonicity cases, 4 guard rows exact")


# -- 6 ---------------------------------------------------------------------

def test_probes_and_fw_to_bw(criterion):
    programs = list(corpus.load_all().values())
    programs += [gen_program(case_config(GenConfig(seed=31), k)) for k in range(200)]
    errs, forward_cases = [], 0
    # receptiveness reruns the program once per event and alternative value,
    # so the fuel bounds the cost
    fuel = 500
    for idx, p in enumerate(programs):
        oracles = case_oracles(idx, 3, fuel)
        for o in oracles[:2]:
            for runner in (classify, behavior_big):
                if not probe_determinacy(p, o, 6, fuel, runner):
                    errs.append(f"determinacy, program {idx}")
                if not probe_receptiveness(p, o, fuel, runner):
                    errs.append(f"receptiveness, program {idx}")
        for name in PASSES3 + tuple(mutant_for(n) for n in PASSES3):
            p2 = get_passes([name])[0](p)
            if p2 == p:
                continue
            if not (probe_determinacy(p2, oracles[1], 6, fuel)
                    and probe_receptiveness(p2, oracles[1], fuel)):
                continue
            if check_forward(p, p2, oracles, fuel):
                forward_cases += 1
                if not check_backward(p, p2, oracles, fuel):
                    errs.append(f"forward without backward: program {idx}, {name}")
    assert criterion("6 probes and fw-to-bw", not errs,
                     "; ".join(errs[:5]) or f"{len(programs)} programs probed under both "
                     f"semantics, {forward_cases} forward cases all backward")


# -- 7 ---------------------------------------------------------------------

def _silent_tail_programs(n, fuel):
    """``prefix; loop { body }`` with a silent, exit-free body and a prefix
    that terminates within ``fuel / 2`` steps: inputs that diverge unless the
    body goes wrong."""
    k = 0
    while n:
        k += 1
        g, env = _gen(k, extcall_prob=0.4)
        prefix, body = g.stmt(2), g.stmt(2)
        if contains_exit(body) or not silent(body):
            continue
        o = Oracle.seeded(k)
        if not isinstance(classify(Program(prefix, dict(env)), o, fuel // 2), Terminates):
            continue
        n -= 1
        yield Program(Seq(prefix, Loop(body)), dict(env)), o


def test_silent_loop_certification(criterion):
    fuel = 1000
    silentloop = PASSES["silentloop"]
    cases = [("loop skip", parse_program("loop { skip }"), Oracle.constant(0)),
             ("silent_loop", silentloop(corpus.load("silent_loop")), Oracle.constant(0))]
    for p, o in _silent_tail_programs(500, fuel):
        cases.append(("prefix; silent loop", silentloop(p), o))
    errs = []
    for name, p, o in cases:
        b = classify(p, o, fuel)
        if not isinstance(b, DivergesSilently):
            errs.append(f"{name}: {type(b).__name__}")
    # fuzz inputs certified diverging at 10^4, their outputs at 10^3
    diverging = 0
    for k in range(1000):
        p = gen_program(case_config(GenConfig(seed=7), k))
        p2 = silentloop(p)
        if p2 == p:
            continue
        for o in case_oracles(k, 3, 10_000):
            if isinstance(classify(p, o.fresh(), 10_000), DivergesSilently):
                diverging += 1
                b = classify(p2, o.fresh(), fuel)
                if not isinstance(b, DivergesSilently):
                    errs.append(f"fuzz case {k}: {type(b).__name__}")
    assert criterion("7 silent-loop certification", not errs,
                     "; ".join(errs[:5]) or f"{len(cases)} constructed outputs and "
                     f"{diverging} diverging fuzz inputs certified at fuel {fuel}")
