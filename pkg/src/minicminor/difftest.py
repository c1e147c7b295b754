"""Random program generation, shrinking and the differential fuzz harness."""
from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Iterator, Optional, Sequence

from .analysis import written_regs
from .behavior import check_forward
from .oracle import Oracle
from .syntax import (ADD, DIV, EQ, LT, MUL, SKIP, SUB, BinOp, Block, Const,
                     Exit, Expr, ExtCall, If, Loop, Program, Reg, Seq, Skip,
                     Stmt, Store, pretty_program)
from .transform import MUTANT_OF, Pass, counted_loop, get_passes

DEFAULT_WEIGHTS = {
    "skip": 1, "store": 6, "extcall": 2, "if": 3, "seq": 5, "block": 1,
    "exit": 1, "loop": 1, "while": 2,
    # shapes the passes act on
    "counted": 2, "relevant": 2, "silent": 2,
}

FUNCTIONS = ("read", "write", "f")


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    max_depth: int = 4
    max_consts: tuple[int, int] = (-4, 12)
    reg_pool: tuple[str, ...] = ("a", "b", "c", "x", "y")
    counters: tuple[str, ...] = ("i", "j", "k")
    weights: dict = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    extcall_prob: float = 0.2
    # chance that a generated pass site is deliberately invalid (dependent
    # branch condition, counter written by the payload, escaping exit)
    invalid_site_prob: float = 0.3
    max_unroll_bound: int = 8

    def __post_init__(self):
        if any(w < 0 for w in self.weights.values()) or not any(self.weights.values()):
            raise ValueError("weights must be non-negative and not all zero")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")


class _Gen:
    def __init__(self, cfg: GenConfig):
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.forms = [f for f, w in cfg.weights.items() if w > 0]
        self.wts = [cfg.weights[f] for f in self.forms]
        self.leaf_forms = [f for f in self.forms if f in ("skip", "store", "extcall", "exit")]
        self.leaf_wts = [cfg.weights[f] for f in self.leaf_forms]

    def const(self) -> Const:
        lo, hi = self.cfg.max_consts
        return Const(self.rng.randint(lo, hi))

    def expr(self, depth: int, regs: Sequence[str] | None = None) -> Expr:
        regs = self.cfg.reg_pool if regs is None else regs
        r = self.rng.random()
        if depth <= 0 or r < 0.4:
            if regs and self.rng.random() < 0.6:
                return Reg(self.rng.choice(regs))
            return self.const()
        op = self.rng.choices([ADD, SUB, MUL, LT, EQ, DIV], [4, 3, 2, 3, 2, 1])[0]
        return BinOp(op, self.expr(depth - 1, regs), self.expr(depth - 1, regs))

    def cond(self, regs: Sequence[str] | None = None) -> Expr:
        regs = self.cfg.reg_pool if regs is None else regs
        if not regs:
            return self.const()
        op = self.rng.choice([LT, LT, EQ])
        return BinOp(op, Reg(self.rng.choice(regs)), self.expr(1, regs))

    def reg(self) -> str:
        return self.rng.choice(self.cfg.reg_pool)

    def leaf(self) -> Stmt:
        if not self.leaf_forms:
            return SKIP
        return self.form(self.rng.choices(self.leaf_forms, self.leaf_wts)[0], 0)

    def stmt(self, depth: int) -> Stmt:
        if depth <= 0:
            return self.leaf()
        return self.form(self.rng.choices(self.forms, self.wts)[0], depth)

    def form(self, f: str, depth: int) -> Stmt:
        rng = self.rng
        if f == "skip":
            return SKIP
        if f == "store":
            if rng.random() < self.cfg.extcall_prob:
                return self.extcall()
            return Store(self.reg(), self.expr(2))
        if f == "extcall":
            return self.extcall()
        if f == "exit":
            return Exit(rng.choices([0, 1, 2], [6, 2, 1])[0])
        if f == "if":
            return If(self.cond(), self.stmt(depth - 1), self.stmt(depth - 1))
        if f == "seq":
            return Seq(self.stmt(depth - 1), self.stmt(depth - 1))
        if f == "block":
            return Block(self.stmt(depth - 1))
        if f == "loop":
            return Loop(self.stmt(depth - 1))
        if f == "while":
            r = self.reg()
            bound = Const(rng.randint(0, 6))
            incr = Store(r, BinOp(ADD, Reg(r), Const(rng.choice([1, 1, 2]))))
            guard = If(BinOp(LT, Reg(r), bound), SKIP, Exit(0))
            return Block(Loop(Seq(guard, Seq(self.stmt(depth - 1), incr))))
        if f == "counted":
            return self.counted(depth)
        if f == "relevant":
            return self.relevant(depth)
        if f == "silent":
            return self.silent_loop(depth)
        raise ValueError(f"unknown form {f!r}")

    def extcall(self) -> Stmt:
        return ExtCall(self.rng.choice(FUNCTIONS), self.expr(1), self.reg())

    def counted(self, depth: int) -> Stmt:
        i = self.rng.choice(self.cfg.counters)
        m = self.rng.randint(0, self.cfg.max_unroll_bound)
        inner = self.stmt(max(depth - 2, 0))
        if self.rng.random() < self.cfg.invalid_site_prob:
            bad = self.rng.choice([
                Store(i, BinOp(ADD, Reg(i), Const(1))),
                If(BinOp(LT, Reg(self.reg()), self.const()), Exit(0), SKIP),
                ExtCall(self.rng.choice(FUNCTIONS), Reg(i), i),
            ])
            inner = Seq(inner, bad) if self.rng.random() < 0.5 else Seq(bad, inner)
        return counted_loop(i, m, inner)

    def relevant(self, depth: int) -> Stmt:
        rng = self.rng
        branches = []
        for _ in range(2):
            payload = self.stmt(max(depth - 2, 0))
            if rng.random() < 0.7:
                j = rng.choice(self.cfg.counters)
                stop = Seq(Store(j, BinOp(ADD, Reg(j), Const(1))),
                           If(BinOp(LT, Reg(j), Const(rng.randint(1, 6))), SKIP, Exit(0)))
                payload = Seq(payload, stop)
            branches.append(payload)
        written = written_regs(branches[0]) | written_regs(branches[1])
        pool = self.cfg.reg_pool + self.cfg.counters
        if rng.random() < self.cfg.invalid_site_prob and written:
            c = self.cond(sorted(written))
        else:
            c = self.cond([r for r in pool if r not in written])
        return Block(Loop(If(c, branches[0], branches[1])))

    def silent_loop(self, depth: int) -> Stmt:
        rng = self.rng
        r = self.reg()
        body = rng.choice([
            Store(r, self.const()),
            Store(r, BinOp(ADD, Reg(r), Const(1))),
            Store(r, BinOp(MUL, Reg(r), Const(0))),
            If(self.cond(), Store(r, self.const()), SKIP),
            Store(r, BinOp(DIV, Const(1), Reg(self.reg()))),
        ])
        if rng.random() < self.cfg.invalid_site_prob:
            # exits out of the loop: must not be eliminated
            body = Seq(body, If(BinOp(LT, Reg(r), self.const()), SKIP, Exit(0)))
            return Block(Loop(body))
        return Loop(body)


def gen_program(cfg: GenConfig) -> Program:
    """A well-formed random program; a pure function of ``cfg``."""
    g = _Gen(cfg)
    body = g.stmt(cfg.max_depth)
    regs = {r: g.rng.randint(-2, 6) for r in cfg.reg_pool}
    regs.update({i: 0 for i in cfg.counters})
    return Program(body, regs)


def case_config(cfg: GenConfig, k: int) -> GenConfig:
    return replace(cfg, seed=random.Random(f"{cfg.seed}/{k}").getrandbits(63))


def case_oracles(seed: int, n: int, fuel: int) -> list[Oracle]:
    """``n`` oracles cycling through the constant, seeded and scripted modes."""
    rng = random.Random(f"oracles/{seed}")
    out = []
    for k in range(n):
        mode = k % 3
        if mode == 0:
            out.append(Oracle.constant(rng.randint(-3, 5)))
        elif mode == 1:
            out.append(Oracle.seeded(rng.getrandbits(32)))
        else:
            # a small-step run makes at most one call per step
            out.append(Oracle.scripted([b % 17 - 8 for b in rng.randbytes(fuel + 1)]))
    return out


# -- shrinking -------------------------------------------------------------

def _expr_shrinks(e: Expr) -> Iterator[Expr]:
    if isinstance(e, Const):
        if e.value != 0:
            yield Const(0)
            if abs(e.value) > 1:
                yield Const(e.value // 2 if e.value > 0 else -((-e.value) // 2))
    elif isinstance(e, BinOp):
        yield e.lhs
        yield e.rhs
        for l2 in _expr_shrinks(e.lhs):
            yield BinOp(e.op, l2, e.rhs)
        for r2 in _expr_shrinks(e.rhs):
            yield BinOp(e.op, e.lhs, r2)


def _shrinks(s: Stmt) -> Iterator[Stmt]:
    """Candidate replacements for ``s``, roughly smallest first."""
    if not isinstance(s, Skip):
        yield SKIP
    if isinstance(s, Seq):
        yield s.first
        yield s.second
        for a in _shrinks(s.first):
            yield Seq(a, s.second)
        for b in _shrinks(s.second):
            yield Seq(s.first, b)
    elif isinstance(s, If):
        yield s.then_s
        yield s.else_s
        for a in _shrinks(s.then_s):
            yield If(s.cond, a, s.else_s)
        for b in _shrinks(s.else_s):
            yield If(s.cond, s.then_s, b)
        for c in _expr_shrinks(s.cond):
            yield If(c, s.then_s, s.else_s)
    elif isinstance(s, (Loop, Block)):
        yield s.body
        for b in _shrinks(s.body):
            yield type(s)(b)
    elif isinstance(s, Exit):
        if s.n > 0:
            yield Exit(s.n - 1)
    elif isinstance(s, Store):
        for e in _expr_shrinks(s.e):
            yield Store(s.reg, e)
    elif isinstance(s, ExtCall):
        yield Store(s.ret_reg, s.arg)
        for e in _expr_shrinks(s.arg):
            yield ExtCall(s.fn, e, s.ret_reg)


def shrink(p: Program, failing: Callable[[Program], bool], max_tries: int = 3000) -> Program:
    """Greedily minimise ``p`` while ``failing`` keeps holding.

    Tried in order: replacing subtrees by ``skip``, dropping one side of a
    sequence or branch, unwrapping blocks and loops, shrinking constants and
    exit depths.  The result is a local minimum under these rewrites (or the
    best found within ``max_tries`` predicate calls).
    """
    tries = 0
    improved = True
    while improved:
        improved = False
        for cand in _shrinks(p.body):
            if tries >= max_tries:
                return p
            tries += 1
            q = Program(cand, p.initial_regs)
            if failing(q):
                p = q
                improved = True
                break
    return p


# -- fuzzing ---------------------------------------------------------------

@dataclass
class Failure:
    program: str
    oracle: str
    fuel: int
    pass_name: str
    reason: str
    minimized: str


@dataclass
class DiffReport:
    pass_name: str
    cases_run: int = 0
    cases_failed: int = 0
    cases_transformed: int = 0
    failures: list[Failure] = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


def fuel_ladder(fuel: int) -> list[int]:
    return sorted({min(1000, fuel), fuel})


def _trim(o: Oracle, calls: int) -> Oracle:
    if o.mode != "script":
        return o
    return Oracle.scripted(o.script[:calls])


def _run_case(pass_: Pass, cfg: GenConfig, k: int, n_oracles: int, fuel: int,
              shrink_failures: bool) -> tuple[bool, Optional[Failure]]:
    ccfg = case_config(cfg, k)
    p = gen_program(ccfg)
    p2 = pass_(p)
    if p2 == p:
        return False, None
    oracles = case_oracles(ccfg.seed, n_oracles, fuel)
    for f in fuel_ladder(fuel):
        for o in oracles:
            v = check_forward(p, p2, [o], f, strict=True)
            if v:
                continue
            traces = v.counterexample["traces"]
            used = max(len(traces["source"]["trace"]), len(traces["target"]["trace"]))
            o_rep = _trim(o, used)
            minimized = p
            if shrink_failures:
                minimized = shrink(
                    p, lambda q: not check_forward(q, pass_(q), [o], f, strict=True))
            return True, Failure(pretty_program(p), o_rep.spec(), f, pass_.name,
                                 v.reason, pretty_program(minimized))
    return True, None


def _run_named(args):
    name, cfg, k, n_oracles, fuel, shrink_failures = args
    return _run_case(get_passes([name])[0], cfg, k, n_oracles, fuel, shrink_failures)


def fuzz_pass(pass_: Pass | str, cfg: GenConfig, n_cases: int, oracles_per_case: int = 3,
              fuel: int = 10_000, shrink_failures: bool = True, workers: int = 1,
              max_failures: Optional[int] = None) -> DiffReport:
    """Generate, transform and check ``n_cases`` programs.

    Deterministic in ``cfg``: results are aggregated in case order whatever
    the number of workers.  With ``max_failures`` the run stops once that
    many failures are recorded.
    """
    if isinstance(pass_, str):
        pass_ = get_passes([pass_])[0]
    report = DiffReport(pass_.name)
    if workers > 1:
        if not (pass_.name in _named_passes()):
            raise ValueError("parallel fuzzing needs a registered pass name")
        jobs = [(pass_.name, cfg, k, oracles_per_case, fuel, shrink_failures)
                for k in range(n_cases)]
        with ProcessPoolExecutor(workers) as ex:
            results = ex.map(_run_named, jobs, chunksize=max(1, n_cases // (workers * 8)))
            for res in results:
                if _record(report, res, max_failures):
                    break
    else:
        for k in range(n_cases):
            res = _run_case(pass_, cfg, k, oracles_per_case, fuel, shrink_failures)
            if _record(report, res, max_failures):
                break
    return report


def _record(report: DiffReport, res, max_failures) -> bool:
    transformed, failure = res
    report.cases_run += 1
    report.cases_transformed += transformed
    if failure is not None:
        report.failures.append(failure)
        report.cases_failed += 1
    return max_failures is not None and report.cases_failed >= max_failures


def _named_passes() -> set[str]:
    from .transform import MUTANTS, PASSES
    return set(PASSES) | set(MUTANTS)


def replay(failure: Failure) -> bool:
    """Re-run a recorded failure; True iff the violation reproduces."""
    from .syntax import parse_program
    p = parse_program(failure.program)
    pass_ = get_passes([failure.pass_name])[0]
    o = oracle_from_report(failure.oracle)
    return not check_forward(p, pass_(p), [o], failure.fuel, strict=True)


def oracle_from_report(spec: str) -> Oracle:
    import json
    base, _, ov = spec.partition(" overrides=")
    kind, _, arg = base.partition(":")
    o = Oracle.scripted(json.loads(arg)) if kind == "script" else Oracle.from_spec(base)
    for k, v in (json.loads(ov) if ov else {}).items():
        o = o.with_override(int(k), v)
    return o


def mutant_for(pass_name: str) -> str:
    return MUTANT_OF[pass_name]


def transformable(p: Program) -> bool:
    """Does at least one of the three passes change ``p``?"""
    from .transform import PASSES
    return any(PASSES[n](p) != p for n in ("unswitch", "unroll", "silentloop"))
