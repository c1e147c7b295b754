"""Loop transformations and a minimal pass manager.

* ``unswitch`` hoists a loop-invariant branch out of a loop whose body is
  exactly that branch.
* ``unroll`` fully unrolls counted loops of the canonical shape
  ``i := 0; block { loop { if i < m { skip } else { exit 0 }; stmt; i := i + 1 } }``.
* ``eliminate_silent_loops`` replaces the body of a loop that can neither
  exit nor emit an event with ``skip``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .analysis import contains_exit, escaping_exit, indep, silent
from .syntax import (ADD, LT, SKIP, BinOp, Block, Const, Exit, If, Loop,
                     Program, Reg, Seq, Stmt, Store, seq)

MAX_UNROLL = 64


def _map_children(s: Stmt, f: Callable[[Stmt], Stmt]) -> Stmt:
    if isinstance(s, Seq):
        return Seq(f(s.first), f(s.second))
    if isinstance(s, If):
        return If(s.cond, f(s.then_s), f(s.else_s))
    if isinstance(s, Loop):
        return Loop(f(s.body))
    if isinstance(s, Block):
        return Block(f(s.body))
    return s


# -- unswitching -----------------------------------------------------------

def is_relevant_loop(s: Stmt) -> bool:
    return (isinstance(s, Loop) and isinstance(s.body, If)
            and indep(s.body.cond, s.body.then_s)
            and indep(s.body.cond, s.body.else_s))


def unswitch(s: Stmt) -> Stmt:
    if is_relevant_loop(s):
        br = s.body
        return If(br.cond, Loop(unswitch(br.then_s)), Loop(unswitch(br.else_s)))
    return _map_children(s, unswitch)


# -- unrolling -------------------------------------------------------------

def rep(n: int, s: Stmt) -> Stmt:
    out: Stmt = SKIP
    for _ in range(n):
        out = Seq(s, out)
    return out


def counted_body(i: str, m: int, inner: Stmt) -> Stmt:
    """The canonical body of a loop running ``inner`` for ``i = 0 .. m-1``."""
    guard = If(BinOp(LT, Reg(i), Const(m)), SKIP, Exit(0))
    return Seq(guard, Seq(inner, Store(i, BinOp(ADD, Reg(i), Const(1)))))


def counted_loop(i: str, m: int, inner: Stmt) -> Stmt:
    return Seq(Store(i, Const(0)), Block(Loop(counted_body(i, m, inner))))


@dataclass(frozen=True)
class UnrollCandidate:
    counter: str
    bound: int
    inner: Stmt
    site: tuple[int, ...] = ()


def match_counted_loop(s: Stmt) -> Optional[tuple[str, int, Stmt]]:
    """``(counter, bound, inner)`` if ``s`` has the exact counted-loop shape."""
    if not (isinstance(s, Seq) and isinstance(s.first, Store)
            and s.first.e == Const(0) and isinstance(s.second, Block)
            and isinstance(s.second.body, Loop)):
        return None
    i = s.first.reg
    body = s.second.body.body
    if not (isinstance(body, Seq) and isinstance(body.first, If)
            and isinstance(body.second, Seq)):
        return None
    g = body.first
    if not (isinstance(g.cond, BinOp) and g.cond.op == LT and g.cond.lhs == Reg(i)
            and isinstance(g.cond.rhs, Const) and g.then_s == SKIP and g.else_s == Exit(0)):
        return None
    incr = Store(i, BinOp(ADD, Reg(i), Const(1)))
    inner = body.second.first
    if body.second.second != incr:
        # a parsed payload `a; b; i := i + 1` nests as Seq(a, Seq(b, incr))
        parts = _flatten(body.second)
        if len(parts) < 2 or parts[-1] != incr:
            return None
        inner = seq(*parts[:-1])
    return i, g.cond.rhs.value, inner


def _flatten(s: Stmt) -> list[Stmt]:
    out = []
    while isinstance(s, Seq):
        out.append(s.first)
        s = s.second
    out.append(s)
    return out


def unroll_candidate(s: Stmt, max_unroll: int = MAX_UNROLL,
                     check: bool = True) -> Optional[UnrollCandidate]:
    m = match_counted_loop(s)
    if m is None:
        return None
    i, bound, inner = m
    if not 0 <= bound <= max_unroll:
        return None
    if check:
        # the counter must be untouched by the payload, and the payload must
        # not exit out of the loop
        if not indep(BinOp(LT, Reg(i), Const(bound)), inner):
            return None
        if escaping_exit(inner, 0):
            return None
    return UnrollCandidate(i, bound, inner)


def find_unroll_candidates(s: Stmt, max_unroll: int = MAX_UNROLL) -> list[UnrollCandidate]:
    out = []

    def go(node: Stmt, path: tuple[int, ...]):
        c = unroll_candidate(node, max_unroll)
        if c is not None:
            out.append(UnrollCandidate(c.counter, c.bound, c.inner, path))
            return
        split = _split_site(node)
        if split is not None:
            c = unroll_candidate(split[0], max_unroll)
            if c is not None:
                out.append(UnrollCandidate(c.counter, c.bound, c.inner, path))
                go(split[1], path + (1, 1))
                return
        for k, child in enumerate(_children(node)):
            go(child, path + (k,))

    go(s, ())
    return out


def _children(s: Stmt) -> tuple[Stmt, ...]:
    if isinstance(s, Seq):
        return (s.first, s.second)
    if isinstance(s, If):
        return (s.then_s, s.else_s)
    if isinstance(s, (Loop, Block)):
        return (s.body,)
    return ()


def unrolled(c: UnrollCandidate) -> Stmt:
    i = c.counter
    step = Seq(c.inner, Store(i, BinOp(ADD, Reg(i), Const(1))))
    return Seq(Store(i, Const(0)), rep(c.bound, step))


def unroll(s: Stmt, max_unroll: int = MAX_UNROLL) -> Stmt:
    """Unroll every candidate site; unrolled payloads are not rescanned."""
    c = unroll_candidate(s, max_unroll)
    if c is not None:
        return unrolled(c)
    split = _split_site(s)
    if split is not None:
        c = unroll_candidate(split[0], max_unroll)
        if c is not None:
            return Seq(unrolled(c), unroll(split[1], max_unroll))
    return _map_children(s, lambda t: unroll(t, max_unroll))


def _split_site(s: Stmt) -> Optional[tuple[Stmt, Stmt]]:
    # `i := 0; block {...}; rest` parses as Seq(store, Seq(block, rest));
    # regroup it as Seq(Seq(store, block), rest)
    if isinstance(s, Seq) and isinstance(s.second, Seq) and isinstance(s.second.first, Block):
        return Seq(s.first, s.second.first), s.second.second
    return None


# -- silent loops ----------------------------------------------------------

def eliminate_silent_loops(s: Stmt) -> Stmt:
    s = _map_children(s, eliminate_silent_loops)
    if isinstance(s, Loop) and not contains_exit(s.body) and silent(s.body):
        return Loop(SKIP)
    return s


# -- pass manager ----------------------------------------------------------

@dataclass(frozen=True)
class Pass:
    name: str
    apply: Callable[[Stmt], Stmt]

    def __call__(self, p: Program) -> Program:
        return Program(self.apply(p.body), dict(p.initial_regs))


@dataclass
class PipelineResult:
    program: Program
    stages: list[tuple[str, Program, Program]] = field(default_factory=list)


def run_pipeline(passes: Sequence[Pass], p: Program) -> PipelineResult:
    """Apply ``passes`` left to right, keeping every stage's input and output."""
    res = PipelineResult(p)
    for ps in passes:
        out = ps(res.program)
        res.stages.append((ps.name, res.program, out))
        res.program = out
    return res


def make_unroll_pass(max_unroll: int = MAX_UNROLL) -> Pass:
    return Pass("unroll", lambda s: unroll(s, max_unroll))


PASSES = {
    "unswitch": Pass("unswitch", unswitch),
    "unroll": make_unroll_pass(),
    "silentloop": Pass("silentloop", eliminate_silent_loops),
    "identity": Pass("identity", lambda s: s),
}


def get_passes(names: str | Sequence[str], max_unroll: int = MAX_UNROLL) -> list[Pass]:
    if isinstance(names, str):
        names = [n for n in names.split(",") if n]
    out = []
    for n in names:
        if n == "unroll":
            out.append(make_unroll_pass(max_unroll))
        elif n in PASSES:
            out.append(PASSES[n])
        elif n in MUTANTS:
            out.append(MUTANTS[n])
        else:
            raise KeyError(f"unknown pass {n!r}")
    return out


# -- deliberately broken variants, used as negative controls ---------------

def _unswitch_no_indep(s: Stmt) -> Stmt:
    if isinstance(s, Loop) and isinstance(s.body, If):
        br = s.body
        return If(br.cond, Loop(_unswitch_no_indep(br.then_s)),
                  Loop(_unswitch_no_indep(br.else_s)))
    return _map_children(s, _unswitch_no_indep)


def _unroll_no_precondition(s: Stmt) -> Stmt:
    c = unroll_candidate(s, MAX_UNROLL, check=False)
    if c is not None:
        return unrolled(c)
    split = _split_site(s)
    if split is not None:
        c = unroll_candidate(split[0], MAX_UNROLL, check=False)
        if c is not None:
            return Seq(unrolled(c), _unroll_no_precondition(split[1]))
    return _map_children(s, _unroll_no_precondition)


def _silent_ignoring_exits(s: Stmt) -> Stmt:
    s = _map_children(s, _silent_ignoring_exits)
    if isinstance(s, Loop) and silent(s.body):
        return Loop(SKIP)
    return s


MUTANTS = {
    "unswitch-noindep": Pass("unswitch-noindep", _unswitch_no_indep),
    "unroll-nocheck": Pass("unroll-nocheck", _unroll_no_precondition),
    "silentloop-ignore-exit": Pass("silentloop-ignore-exit", _silent_ignoring_exits),
}

MUTANT_OF = {"unswitch": "unswitch-noindep", "unroll": "unroll-nocheck",
             "silentloop": "silentloop-ignore-exit"}
