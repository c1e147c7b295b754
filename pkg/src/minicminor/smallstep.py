"""Continuation-based small-step machine.

A machine state is ``(stmt, cont, env)``.  ``step`` applies exactly one
transition rule and emits at most one event; ``run`` iterates it under a
step budget and certifies silent divergence by exact state recurrence.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .oracle import Event, Oracle, Trace
from .state import Env, EvalError, eval_expr
from .syntax import (SKIP, Block, Exit, ExtCall, If, Loop, Program, Seq, Skip,
                     Stmt, Store, _node, _Node)


@_node
class Stop(_Node):
    pass


@_node
class Kseq(_Node):
    s: Stmt
    k: "Cont"


@_node
class Kblock(_Node):
    k: "Cont"


Cont = Union[Stop, Kseq, Kblock]
STOP = Stop()


@dataclass(frozen=True)
class SmallState:
    s: Stmt
    k: Cont
    env: Env

    def is_final(self) -> bool:
        return isinstance(self.s, Skip) and isinstance(self.k, Stop)


@dataclass(frozen=True)
class Next:
    state: SmallState
    emitted: Trace = ()


@dataclass(frozen=True)
class Final:
    env: Env


@dataclass(frozen=True)
class Stuck:
    reason: str


StepResult = Union[Next, Final, Stuck]

TERMINATED = "terminated"
WENT_WRONG = "went_wrong"
FUEL_EXHAUSTED = "fuel_exhausted"
SILENT_CYCLE = "silent_cycle"

MAX_HISTORY = 2**16


@dataclass(frozen=True)
class BoundedRun:
    status: str
    trace: Trace
    steps_used: int
    final_state: Optional[SmallState]
    reason: str = ""

    @property
    def env(self) -> Optional[Env]:
        return self.final_state.env if self.final_state is not None else None

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "trace": [e.to_json() for e in self.trace],
            "steps": self.steps_used,
            "final": self.env.to_json() if self.env is not None else None,
        }


def initial_state(p: Program) -> SmallState:
    return SmallState(p.body, STOP, Env(p.initial_regs))


def step(st: SmallState, oracle: Oracle) -> StepResult:
    """One transition.  Advances ``oracle`` on an external call."""
    s, k, env = st.s, st.k, st.env
    if isinstance(s, Skip):
        if isinstance(k, Kseq):
            return Next(SmallState(k.s, k.k, env))
        if isinstance(k, Kblock):
            return Next(SmallState(SKIP, k.k, env))
        return Final(env)
    if isinstance(s, Seq):
        return Next(SmallState(s.first, Kseq(s.second, k), env))
    if isinstance(s, Store):
        try:
            v = eval_expr(s.e, env)
        except EvalError as exc:
            return Stuck(f"store {s.reg}: {exc}")
        return Next(SmallState(SKIP, k, env.update(s.reg, v)))
    if isinstance(s, If):
        try:
            c = eval_expr(s.cond, env)
        except EvalError as exc:
            return Stuck(f"if condition: {exc}")
        return Next(SmallState(s.then_s if c != 0 else s.else_s, k, env))
    if isinstance(s, Loop):
        return Next(SmallState(s.body, Kseq(s, k), env))
    if isinstance(s, Block):
        return Next(SmallState(s.body, Kblock(k), env))
    if isinstance(s, Exit):
        if isinstance(k, Kseq):
            return Next(SmallState(s, k.k, env))
        if isinstance(k, Kblock):
            if s.n == 0:
                return Next(SmallState(SKIP, k.k, env))
            return Next(SmallState(Exit(s.n - 1), k.k, env))
        return Stuck(f"exit {s.n} with no enclosing block")
    if isinstance(s, ExtCall):
        try:
            arg = eval_expr(s.arg, env)
        except EvalError as exc:
            return Stuck(f"extcall {s.fn} argument: {exc}")
        ret = oracle.call(s.fn, arg)
        return Next(SmallState(SKIP, k, env.update(s.ret_reg, ret)),
                    (Event(s.fn, arg, ret),))
    raise TypeError(f"not a statement: {s!r}")


def run_state(st: SmallState, oracle: Oracle, fuel: int,
              detect_cycles: bool = True) -> BoundedRun:
    """Iterate ``step`` from ``st`` at most ``fuel`` times."""
    trace: list[Event] = []
    seen: dict[SmallState, int] = {}
    steps = 0
    while True:
        if st.is_final():
            return BoundedRun(TERMINATED, tuple(trace), steps, st)
        if detect_cycles:
            if st in seen:
                return BoundedRun(SILENT_CYCLE, tuple(trace), steps, st)
            seen[st] = steps
            if len(seen) > MAX_HISTORY:
                del seen[next(iter(seen))]
        if steps >= fuel:
            return BoundedRun(FUEL_EXHAUSTED, tuple(trace), steps, st)
        r = step(st, oracle)
        if isinstance(r, Stuck):
            return BoundedRun(WENT_WRONG, tuple(trace), steps, st, r.reason)
        steps += 1
        st = r.state
        if r.emitted:
            trace.extend(r.emitted)
            seen.clear()


def run(p: Program, oracle: Oracle, fuel: int) -> BoundedRun:
    return run_state(initial_state(p), oracle, fuel)


def history(p: Program, oracle: Oracle, fuel: int) -> list[SmallState]:
    """States visited by the first ``fuel`` steps (for inspection and tests)."""
    st = initial_state(p)
    out = [st]
    for _ in range(fuel):
        r = step(st, oracle)
        if not isinstance(r, Next):
            break
        st = r.state
        out.append(st)
    return out


def detect_silent_cycle(hist: Iterable[SmallState]) -> bool:
    """True iff some state occurs twice.

    The machine is deterministic for a fixed oracle, so a repeated state
    reached without intervening events repeats forever.
    """
    seen = set()
    for st in hist:
        if st in seen:
            return True
        seen.add(st)
    return False
