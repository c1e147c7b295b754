"""Register environments and expression evaluation.

Values are wrapping signed 64-bit integers; booleans are 0/1 and any
non-zero value counts as true.
"""
from __future__ import annotations

from typing import Iterator, Mapping

from .syntax import ADD, DIV, EQ, LT, MUL, SUB, Const, Expr, Reg

INT_MIN = -2**63
INT_MAX = 2**63 - 1


class EvalError(Exception):
    """Expression evaluation failed; the program goes wrong."""


class DivByZero(EvalError):
    pass


class UnboundRegisterError(EvalError):
    def __init__(self, reg: str):
        super().__init__(f"unbound register {reg!r}")
        self.reg = reg


def wrap(v: int) -> int:
    return ((v - INT_MIN) & 0xFFFFFFFFFFFFFFFF) + INT_MIN


class Env(Mapping[str, int]):
    """Persistent register map; ``update`` returns a new environment."""

    __slots__ = ("_regs", "_h")

    def __init__(self, regs: Mapping[str, int] | None = None):
        self._regs = dict(regs or {})
        self._h = None

    def __getitem__(self, r: str) -> int:
        return self._regs[r]

    def __iter__(self) -> Iterator[str]:
        return iter(self._regs)

    def __len__(self) -> int:
        return len(self._regs)

    def __hash__(self):
        if self._h is None:
            self._h = hash(frozenset(self._regs.items()))
        return self._h

    def __eq__(self, other):
        if isinstance(other, Env):
            return self is other or self._regs == other._regs
        return NotImplemented

    def __repr__(self):
        return f"Env({self._regs!r})"

    def update(self, r: str, v: int) -> Env:
        regs = dict(self._regs)
        regs[r] = v
        return Env(regs)

    def to_json(self) -> dict[str, int]:
        return dict(sorted(self._regs.items()))


def update(env: Env, r: str, v: int) -> Env:
    return env.update(r, v)


def istrue(v: int) -> bool:
    return v != 0


def _div(a: int, b: int) -> int:
    if b == 0:
        raise DivByZero("division by zero")
    q = abs(a) // abs(b)
    return wrap(q if (a < 0) == (b < 0) else -q)


def _arith(f):
    def op(a: int, b: int) -> int:
        r = f(a, b)
        return r if INT_MIN <= r <= INT_MAX else wrap(r)
    return op


_OPS = {
    ADD: _arith(lambda a, b: a + b),
    SUB: _arith(lambda a, b: a - b),
    MUL: _arith(lambda a, b: a * b),
    LT: lambda a, b: int(a < b),
    EQ: lambda a, b: int(a == b),
    DIV: _div,
}


def eval_expr(e: Expr, env: Env) -> int:
    """Evaluate ``e`` under ``env``.

    Raises DivByZero or UnboundRegisterError; never mutates ``env``.
    Division truncates toward zero as in C.
    """
    t = type(e)
    if t is Const:
        return e.value
    if t is Reg:
        try:
            return env._regs[e.name]
        except KeyError:
            raise UnboundRegisterError(e.name) from None
    return _OPS[e.op](eval_expr(e.lhs, env), eval_expr(e.rhs, env))
