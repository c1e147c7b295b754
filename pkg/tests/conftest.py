import pytest
from hypothesis import HealthCheck, settings, strategies as st

from minicminor.difftest import GenConfig, case_config, gen_program
from minicminor.syntax import (BINOPS, BinOp, Block, Const, Exit, ExtCall, If,
                               Loop, Program, Reg, Seq, Skip, Store)

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

REGS = ["a", "b", "i", "x"]

idents = st.sampled_from(REGS)
int64 = st.integers(min_value=-2**63, max_value=2**63 - 1)

exprs = st.recursive(
    st.one_of(st.builds(Const, st.one_of(st.integers(-20, 20), int64)),
              st.builds(Reg, idents)),
    lambda sub: st.builds(BinOp, st.sampled_from(BINOPS), sub, sub),
    max_leaves=8,
)

stmts = st.recursive(
    st.one_of(
        st.just(Skip()),
        st.builds(Store, idents, exprs),
        st.builds(ExtCall, st.sampled_from(["read", "write"]), exprs, idents),
        st.builds(Exit, st.integers(0, 3)),
    ),
    lambda sub: st.one_of(
        st.builds(Seq, sub, sub),
        st.builds(If, exprs, sub, sub),
        st.builds(Loop, sub),
        st.builds(Block, sub),
    ),
    max_leaves=12,
)

envs = st.fixed_dictionaries({r: st.integers(-10, 10) for r in REGS})


def programs_from_stmts():
    return st.builds(Program, stmts, envs)


def generated(seed: int, **kw) -> Program:
    return gen_program(case_config(GenConfig(**kw), seed))


generated_programs = st.integers(0, 2**32).map(generated)


@pytest.fixture
def factorial_src():
    return ("x := 1; i := 0; block { loop { if i < 10 { skip } else { exit 0 }; "
            "x := x * (i + 1); i := i + 1 } }")


ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(name, ok, detail)``."""
    def record(name: str, ok: bool, detail: str = "") -> bool:
        ACCEPTANCE.append((name, ok, detail))
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
