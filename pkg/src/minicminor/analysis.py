"""Syntactic predicates used as transformation side conditions."""
from __future__ import annotations

from .syntax import Block, Exit, ExtCall, Expr, If, Loop, Seq, Stmt, Store, expr_regs, walk

RegSet = frozenset


def used_regs(e: Expr) -> frozenset[str]:
    return expr_regs(e)


def written_regs(s: Stmt) -> frozenset[str]:
    """Store targets and external-call return registers anywhere in ``s``."""
    out = set()
    for node in walk(s):
        if isinstance(node, Store):
            out.add(node.reg)
        elif isinstance(node, ExtCall):
            out.add(node.ret_reg)
    return frozenset(out)


def indep(e: Expr, s: Stmt) -> bool:
    """``s`` writes no register that ``e`` reads."""
    return used_regs(e).isdisjoint(written_regs(s))


def contains_exit(s: Stmt) -> bool:
    return any(isinstance(node, Exit) for node in walk(s))


def escaping_exit(s: Stmt, depth: int = 0) -> bool:
    """Can an ``exit`` in ``s`` leave ``s`` and ``depth`` further blocks?

    An ``exit n`` nested under ``b`` blocks inside ``s`` escapes iff
    ``n >= b + depth``.
    """
    stack = [(s, 0)]
    while stack:
        node, b = stack.pop()
        if isinstance(node, Exit):
            if node.n >= b + depth:
                return True
        elif isinstance(node, Seq):
            stack += [(node.first, b), (node.second, b)]
        elif isinstance(node, If):
            stack += [(node.then_s, b), (node.else_s, b)]
        elif isinstance(node, Loop):
            stack.append((node.body, b))
        elif isinstance(node, Block):
            stack.append((node.body, b + 1))
    return False


def silent(s: Stmt) -> bool:
    return not any(isinstance(node, ExtCall) for node in walk(s))


def analyze(s: Stmt) -> dict:
    used = set()
    for node in walk(s):
        if isinstance(node, Store):
            used |= used_regs(node.e)
        elif isinstance(node, ExtCall):
            used |= used_regs(node.arg)
        elif isinstance(node, If):
            used |= used_regs(node.cond)
    return {"used": sorted(used), "written": sorted(written_regs(s)),
            "silent": silent(s), "contains_exit": contains_exit(s)}
