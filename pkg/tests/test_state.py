import pytest
from hypothesis import given, strategies as st

from minicminor.state import (INT_MAX, INT_MIN, DivByZero, Env, EvalError,
                              UnboundRegisterError, eval_expr, istrue, update)
from minicminor.syntax import BinOp, Const, Reg

from conftest import envs, exprs


def test_const():
    assert eval_expr(Const(5), Env()) == 5


def test_factorial_guard():
    assert eval_expr(BinOp("<", Reg("i"), Const(11)), Env({"i": 1})) == 1
    assert eval_expr(BinOp("<", Reg("i"), Const(11)), Env({"i": 11})) == 0


def test_div_by_zero():
    with pytest.raises(DivByZero):
        eval_expr(BinOp("/", Const(1), Const(0)), Env())


def test_unbound():
    with pytest.raises(UnboundRegisterError):
        eval_expr(Reg("q"), Env({"x": 1}))


@pytest.mark.parametrize("a,b,q", [(7, 2, 3), (-7, 2, -3), (7, -2, -3), (-7, -2, 3),
                                   (INT_MIN, -1, INT_MIN)])
def test_division_truncates(a, b, q):
    assert eval_expr(BinOp("/", Const(a), Const(b)), Env()) == q


def test_wrapping():
    assert eval_expr(BinOp("+", Const(INT_MAX), Const(1)), Env()) == INT_MIN
    assert eval_expr(BinOp("-", Const(INT_MIN), Const(1)), Env()) == INT_MAX
    assert eval_expr(BinOp("*", Const(2**62), Const(4)), Env()) == 0


def test_update():
    assert update(Env(), "x", 3)["x"] == 3
    assert update(Env({"x": 1}), "x", 2)["x"] == 2
    s = Env({"x": 1, "y": 7})
    s2 = update(s, "x", 9)
    assert s2["y"] == 7 and s["x"] == 1


@given(exprs, envs)
def test_eval_deterministic_and_pure(e, regs):
    env = Env(regs)
    before = dict(env)

    def result():
        try:
            return eval_expr(e, env)
        except EvalError as exc:
            return type(exc)

    r = result()
    assert result() == r
    assert dict(env) == before
    if isinstance(r, int):
        assert INT_MIN <= r <= INT_MAX
        assert istrue(r) != (r == 0)


@given(st.integers(INT_MIN, INT_MAX), st.integers(INT_MIN, INT_MAX))
def test_comparisons_are_boolean(a, b):
    for op in ("<", "=="):
        assert eval_expr(BinOp(op, Const(a), Const(b)), Env()) in (0, 1)


def test_env_hash_and_eq():
    assert Env({"a": 1, "b": 2}) == Env({"b": 2, "a": 1})
    assert hash(Env({"a": 1, "b": 2})) == hash(Env({"b": 2, "a": 1}))
    assert Env({"a": 1}).to_json() == {"a": 1}
