"""Abstract syntax, parser and printer for the Cminor subset.

Statements and expressions are immutable, hashable trees.  Hashes are cached
at construction so that machine states built from them can be put in sets
cheaply (the small-step cycle detector relies on this).

Concrete syntax::

    init x = 1, i = 0;            // optional header
    x := 1; block { loop { if i < 10 { skip } else { exit 0 }; x := x * i } }

``;`` is right-associative.  A bare ``{ ... }`` only groups statements, it
has no meaning of its own; the printer uses it for left-nested sequences.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, fields
from typing import Iterator, Mapping, Union


class ParseError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.msg = msg
        self.line = line
        self.col = col


class UnboundRegister(ParseError):
    def __init__(self, reg: str):
        super().__init__(f"register {reg!r} may be read before it is written")
        self.reg = reg


class _Node:
    """Mixin giving frozen dataclasses a cached structural hash."""

    def __post_init__(self):
        vals = tuple(getattr(self, f.name) for f in fields(self) if f.compare)
        object.__setattr__(self, "_h", hash((type(self).__name__,) + vals))


def _node(cls):
    cls = dataclass(frozen=True)(cls)
    cls.__hash__ = lambda self: self._h
    return cls


# -- expressions -----------------------------------------------------------

ADD, SUB, MUL, DIV, LT, EQ = "+", "-", "*", "/", "<", "=="
BINOPS = (ADD, SUB, MUL, DIV, LT, EQ)


@_node
class Const(_Node):
    value: int


@_node
class Reg(_Node):
    name: str


@_node
class BinOp(_Node):
    op: str
    lhs: "Expr"
    rhs: "Expr"


Expr = Union[Const, Reg, BinOp]


# -- statements ------------------------------------------------------------

@_node
class Skip(_Node):
    pass


@_node
class Store(_Node):
    reg: str
    e: Expr


@_node
class If(_Node):
    cond: Expr
    then_s: "Stmt"
    else_s: "Stmt"


@_node
class Seq(_Node):
    first: "Stmt"
    second: "Stmt"


@_node
class Loop(_Node):
    body: "Stmt"


@_node
class Block(_Node):
    body: "Stmt"


@_node
class Exit(_Node):
    n: int


@_node
class ExtCall(_Node):
    fn: str
    arg: Expr
    ret_reg: str


Stmt = Union[Skip, Store, If, Seq, Loop, Block, Exit, ExtCall]

SKIP = Skip()


@dataclass(frozen=True)
class Program:
    body: Stmt
    initial_regs: Mapping[str, int] = field(default_factory=dict)

    def __hash__(self):
        return hash((self.body, tuple(sorted(self.initial_regs.items()))))


def seq(*stmts: Stmt) -> Stmt:
    """Right-nested sequence of ``stmts`` (``Skip`` when empty)."""
    if not stmts:
        return SKIP
    out = stmts[-1]
    for s in reversed(stmts[:-1]):
        out = Seq(s, out)
    return out


def walk(s: Stmt) -> Iterator[Stmt]:
    """Pre-order iteration over all statement nodes of ``s``."""
    stack = [s]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Seq):
            stack.append(node.second)
            stack.append(node.first)
        elif isinstance(node, If):
            stack.append(node.else_s)
            stack.append(node.then_s)
        elif isinstance(node, (Loop, Block)):
            stack.append(node.body)


def size(s: Stmt) -> int:
    return sum(1 for _ in walk(s))


# -- printer ---------------------------------------------------------------

_PREC = {EQ: 1, LT: 2, ADD: 3, SUB: 3, MUL: 4, DIV: 4}


def pretty_expr(e: Expr) -> str:
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, Reg):
        return e.name
    p = _PREC[e.op]
    lhs = pretty_expr(e.lhs)
    rhs = pretty_expr(e.rhs)
    # operators are left-associative
    if isinstance(e.lhs, BinOp) and _PREC[e.lhs.op] < p:
        lhs = f"({lhs})"
    if isinstance(e.rhs, BinOp) and _PREC[e.rhs.op] <= p:
        rhs = f"({rhs})"
    return f"{lhs} {e.op} {rhs}"


def pretty(s: Stmt, indent: int = 0) -> str:
    """Canonical text of ``s``; ``parse_stmt(pretty(s)) == s``."""
    pad = "  " * indent
    return pad + _pretty(s, indent)


def _pretty(s: Stmt, ind: int) -> str:
    pad = "  " * ind
    inner = "  " * (ind + 1)
    if isinstance(s, Skip):
        return "skip"
    if isinstance(s, Store):
        return f"{s.reg} := {pretty_expr(s.e)}"
    if isinstance(s, ExtCall):
        return f"{s.ret_reg} := extcall {s.fn}({pretty_expr(s.arg)})"
    if isinstance(s, Exit):
        return f"exit {s.n}"
    if isinstance(s, Seq):
        first = _pretty(s.first, ind)
        if isinstance(s.first, Seq):
            first = "{\n" + inner + _pretty(s.first, ind + 1) + "\n" + pad + "}"
        return first + ";\n" + pad + _pretty(s.second, ind)
    if isinstance(s, If):
        return (f"if {pretty_expr(s.cond)} {{\n{inner}{_pretty(s.then_s, ind + 1)}\n"
                f"{pad}}} else {{\n{inner}{_pretty(s.else_s, ind + 1)}\n{pad}}}")
    if isinstance(s, (Loop, Block)):
        kw = "loop" if isinstance(s, Loop) else "block"
        return f"{kw} {{\n{inner}{_pretty(s.body, ind + 1)}\n{pad}}}"
    raise TypeError(f"not a statement: {s!r}")


def pretty_program(p: Program) -> str:
    body = pretty(p.body)
    if not p.initial_regs:
        return body + "\n"
    header = ", ".join(f"{r} = {v}" for r, v in sorted(p.initial_regs.items()))
    return f"init {header};\n{body}\n"


# -- parser ----------------------------------------------------------------

KEYWORDS = {"skip", "if", "else", "loop", "block", "exit", "extcall", "init"}

_TOKEN = re.compile(r"""
    (?P<ws>\s+|//[^\n]*|\#[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>:=|==|[-+*/<;{}(),=])
""", re.VERBOSE)


class _Parser:
    def __init__(self, text: str):
        self.toks: list[tuple[str, str, int, int]] = []
        pos, line, line_start = 0, 1, 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                raise ParseError(f"unexpected character {text[pos]!r}",
                                 line, pos - line_start + 1)
            kind = m.lastgroup
            if kind != "ws":
                val = m.group()
                if kind == "ident" and val in KEYWORDS:
                    kind = "kw"
                self.toks.append((kind, val, line, pos - line_start + 1))
            nl = m.group().count("\n")
            if nl:
                line += nl
                line_start = m.start() + m.group().rindex("\n") + 1
            pos = m.end()
        self.toks.append(("eof", "", line, pos - line_start + 1))
        self.i = 0

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str):
        _, val, line, col = self.peek()
        raise ParseError(f"{msg}, got {val or 'end of input'!r}", line, col)

    def accept(self, val: str) -> bool:
        if self.peek()[1] == val and self.peek()[0] in ("op", "kw"):
            self.i += 1
            return True
        return False

    def expect(self, val: str):
        if not self.accept(val):
            self.error(f"expected {val!r}")

    def ident(self) -> str:
        kind, val, *_ = self.peek()
        if kind != "ident":
            self.error("expected identifier")
        self.i += 1
        return val

    def nat(self) -> int:
        kind, val, *_ = self.peek()
        if kind != "int":
            self.error("expected natural number")
        self.i += 1
        return int(val)

    def integer(self) -> int:
        neg = self.accept("-")
        v = -self.nat() if neg else self.nat()
        if not -2**63 <= v < 2**63:
            self.error("integer literal out of 64-bit range")
        return v

    # program := ["init" reg "=" int ("," reg "=" int)* [";"]] stmt
    def program(self) -> Program:
        regs: dict[str, int] = {}
        if self.accept("init"):
            while True:
                r = self.ident()
                self.expect("=")
                regs[r] = self.integer()
                if not self.accept(","):
                    break
            self.accept(";")
        body = self.stmt()
        if self.peek()[0] != "eof":
            self.error("expected end of input")
        return Program(body, regs)

    def stmt(self) -> Stmt:
        first = self.simple()
        if self.accept(";"):
            return Seq(first, self.stmt())
        return first

    def braced(self) -> Stmt:
        self.expect("{")
        s = self.stmt()
        self.expect("}")
        return s

    def simple(self) -> Stmt:
        kind, val, *_ = self.peek()
        if kind == "kw":
            if self.accept("skip"):
                return SKIP
            if self.accept("exit"):
                return Exit(self.nat())
            if self.accept("loop"):
                return Loop(self.braced())
            if self.accept("block"):
                return Block(self.braced())
            if self.accept("if"):
                cond = self.expr()
                then_s = self.braced()
                self.expect("else")
                return If(cond, then_s, self.braced())
            self.error("unexpected keyword")
        if kind == "op" and val == "{":
            return self.braced()
        reg = self.ident()
        self.expect(":=")
        if self.accept("extcall"):
            fn = self.ident()
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return ExtCall(fn, arg, reg)
        return Store(reg, self.expr())

    def expr(self, min_prec: int = 1) -> Expr:
        lhs = self.primary()
        while True:
            kind, val, *_ = self.peek()
            if kind != "op" or val not in _PREC or _PREC[val] < min_prec:
                return lhs
            self.i += 1
            rhs = self.expr(_PREC[val] + 1)
            lhs = BinOp(val, lhs, rhs)

    def primary(self) -> Expr:
        kind, val, *_ = self.peek()
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if kind == "int" or (kind == "op" and val == "-"):
            return Const(self.integer())
        if kind == "ident":
            self.i += 1
            return Reg(val)
        self.error("expected expression")


def parse_stmt(text: str) -> Stmt:
    p = _Parser(text)
    s = p.stmt()
    if p.peek()[0] != "eof":
        p.error("expected end of input")
    return s


def parse_program(text: str, check: bool = True) -> Program:
    """Parse program text; with ``check``, reject possibly-unbound reads."""
    prog = _Parser(text).program()
    if check:
        check_bound(prog)
    return prog


# -- definite assignment ---------------------------------------------------

def expr_regs(e: Expr) -> frozenset[str]:
    if isinstance(e, Reg):
        return frozenset((e.name,))
    if isinstance(e, BinOp):
        return expr_regs(e.lhs) | expr_regs(e.rhs)
    return frozenset()


def check_bound(p: Program) -> None:
    """Raise UnboundRegister unless every read is definitely initialised.

    Conservative: registers written inside a loop or block are not
    considered defined after it, and an ``if`` defines only what both
    branches define.
    """
    _defined(p.body, frozenset(p.initial_regs))


def _use(e: Expr, defined: frozenset[str]) -> None:
    missing = expr_regs(e) - defined
    if missing:
        raise UnboundRegister(min(missing))


def _defined(s: Stmt, d: frozenset[str]) -> frozenset[str]:
    if isinstance(s, Store):
        _use(s.e, d)
        return d | {s.reg}
    if isinstance(s, ExtCall):
        _use(s.arg, d)
        return d | {s.ret_reg}
    if isinstance(s, Seq):
        return _defined(s.second, _defined(s.first, d))
    if isinstance(s, If):
        _use(s.cond, d)
        return _defined(s.then_s, d) & _defined(s.else_s, d)
    if isinstance(s, (Loop, Block)):
        _defined(s.body, d)
    return d
