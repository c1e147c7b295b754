"""Fuel-indexed big-step evaluator with partial outcomes.

``exec`` realises the inductive judgment that combines full and partial
evaluation: when the budget runs out the evaluation is truncated with a
``Partial`` outcome that still carries every event produced so far.

Fuel is spent once on entry to each ``Seq``, ``If`` and ``Block`` node and
once per loop iteration.  Any node entered with an empty budget is
truncated, so ``exec(s, env, o, 0)`` is ``Partial`` with an empty trace.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .behavior import GoesWrong, Terminates, Unresolved, BoundedBehavior
from .oracle import Event, Oracle, Trace
from .state import Env, EvalError, eval_expr
from .syntax import (Block, Exit, ExtCall, If, Loop, Program, Seq, Skip, Stmt,
                     Store)


@dataclass(frozen=True)
class Normal:
    env: Env


@dataclass(frozen=True)
class ExitN:
    n: int
    env: Env


@dataclass(frozen=True)
class Partial:
    pass


PARTIAL = Partial()
Outcome = Union[Normal, ExitN, Partial]


@dataclass(frozen=True)
class BigResult:
    trace: Trace
    outcome: Outcome
    wrong: bool = False
    reason: str = ""

    def to_json(self) -> dict:
        o = self.outcome
        d: dict = {"trace": [e.to_json() for e in self.trace]}
        if isinstance(o, Normal):
            d.update(status="terminated", final=o.env.to_json())
        elif isinstance(o, ExitN):
            d.update(status="exit", exit=o.n, final=o.env.to_json())
        else:
            d.update(status="partial", wrong=self.wrong, final=None)
        return d


@dataclass(frozen=True)
class LoopCount:
    iterations: int
    trace: Trace
    outcome: Outcome


class _Wrong(Exception):
    pass


@dataclass
class _Eval:
    oracle: Oracle
    fuel: int
    trace: list[Event] = field(default_factory=list)

    def spend(self) -> bool:
        if self.fuel <= 0:
            return False
        self.fuel -= 1
        return True

    def cond(self, e, env: Env) -> int:
        try:
            return eval_expr(e, env)
        except EvalError as exc:
            raise _Wrong(str(exc)) from None

    def exec(self, s: Stmt, env: Env) -> Outcome:
        if self.fuel <= 0:
            return PARTIAL
        t = type(s)
        if t is Store:
            return Normal(env.update(s.reg, self.cond(s.e, env)))
        if t is Skip:
            return Normal(env)
        if t is Exit:
            return ExitN(s.n, env)
        if t is ExtCall:
            arg = self.cond(s.arg, env)
            ret = self.oracle.call(s.fn, arg)
            self.trace.append(Event(s.fn, arg, ret))
            return Normal(env.update(s.ret_reg, ret))
        if t is Loop:
            # iterative form of the two loop rules: continue on Normal
            while True:
                if self.fuel <= 0:
                    return PARTIAL
                self.fuel -= 1
                o = self.exec(s.body, env)
                if type(o) is not Normal:
                    return o
                env = o.env
        self.fuel -= 1
        if t is Seq:
            o = self.exec(s.first, env)
            if type(o) is not Normal:
                return o
            return self.exec(s.second, o.env)
        if t is If:
            return self.exec(s.then_s if self.cond(s.cond, env) != 0 else s.else_s, env)
        if t is Block:
            o = self.exec(s.body, env)
            if type(o) is ExitN:
                return Normal(o.env) if o.n == 0 else ExitN(o.n - 1, o.env)
            return o
        raise TypeError(f"not a statement: {s!r}")


def exec(s: Stmt, env: Env, oracle: Oracle, fuel: int) -> BigResult:  # noqa: A001
    """Evaluate ``s`` from ``env``; advances ``oracle`` as calls happen."""
    ev = _Eval(oracle, fuel)
    try:
        o = ev.exec(s, env)
    except _Wrong as exc:
        return BigResult(tuple(ev.trace), PARTIAL, True, str(exc))
    return BigResult(tuple(ev.trace), o)


def exec_program(p: Program, oracle: Oracle, fuel: int) -> BigResult:
    """Like ``exec`` on the program body, but an exit escaping the whole
    program is reported as going wrong."""
    r = exec(p.body, Env(p.initial_regs), oracle, fuel)
    if isinstance(r.outcome, ExitN):
        return BigResult(r.trace, PARTIAL, True,
                         f"exit {r.outcome.n} with no enclosing block")
    return r


def exec_loop_counted(body: Stmt, env: Env, oracle: Oracle, fuel: int) -> LoopCount:
    """Evaluate ``loop { body }`` counting completed iterations.

    Stops at the first iteration whose outcome is not ``Normal``.  Fuel is
    charged exactly as ``exec`` charges a loop, so the recorded outcome
    agrees with ``exec(Loop(body), ...)``.
    """
    ev = _Eval(oracle, fuel)
    n = 0
    try:
        while True:
            if not ev.spend():
                return LoopCount(n, tuple(ev.trace), PARTIAL)
            o = ev.exec(body, env)
            if not isinstance(o, Normal):
                return LoopCount(n, tuple(ev.trace), o)
            n += 1
            env = o.env
    except _Wrong:
        return LoopCount(n, tuple(ev.trace), PARTIAL)


def behavior_big(p: Program, oracle: Oracle, fuel: int) -> BoundedBehavior:
    r = exec_program(p, oracle, fuel)
    if isinstance(r.outcome, Normal):
        return Terminates(r.trace, r.outcome.env)
    if r.wrong:
        return GoesWrong(r.trace)
    return Unresolved(r.trace)
