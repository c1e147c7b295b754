"""Executable semantics and loop transformations for a small Cminor subset."""
from .behavior import (DivergesSilently, GoesWrong, Terminates, Unresolved,
                       check_backward, check_equiv, check_forward, classify,
                       refines)
from .bigstep import behavior_big, exec, exec_loop_counted
from .oracle import Event, Oracle, match_events, match_traces
from .smallstep import run, step
from .state import Env, eval_expr
from .syntax import Program, parse_program, pretty, pretty_program
from .transform import eliminate_silent_loops, rep, unroll, unswitch

__all__ = [
    "DivergesSilently", "Env", "Event", "GoesWrong", "Oracle", "Program",
    "Terminates", "Unresolved", "behavior_big", "check_backward",
    "check_equiv", "check_forward", "classify", "eliminate_silent_loops",
    "eval_expr", "exec", "exec_loop_counted", "match_events", "match_traces",
    "parse_program", "pretty", "pretty_program", "refines", "rep", "run",
    "step", "unroll", "unswitch",
]
