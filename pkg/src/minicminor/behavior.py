"""Bounded behaviors, refinement and preservation checking.

A behavior is a trace paired with a status.  Infinite traces cannot be
observed at finite fuel, so a run that neither finishes, goes wrong, nor
certifies a silent cycle is ``Unresolved`` with the prefix produced so far.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Union

from . import smallstep
from .oracle import (Oracle, Trace, is_prefix, match_events,
                     prefix_comparable)
from .state import Env
from .syntax import Program, pretty_program


@dataclass(frozen=True)
class Terminates:
    trace: Trace
    env: Env


@dataclass(frozen=True)
class GoesWrong:
    trace: Trace


@dataclass(frozen=True)
class DivergesSilently:
    trace: Trace


@dataclass(frozen=True)
class Unresolved:
    trace: Trace


BoundedBehavior = Union[Terminates, GoesWrong, DivergesSilently, Unresolved]


def behavior_name(b: BoundedBehavior) -> str:
    return {Terminates: "terminates", GoesWrong: "goes_wrong",
            DivergesSilently: "diverges_silently", Unresolved: "unresolved"}[type(b)]


def behavior_json(b: BoundedBehavior) -> dict:
    d = {"status": behavior_name(b), "trace": [e.to_json() for e in b.trace]}
    if isinstance(b, Terminates):
        d["final"] = b.env.to_json()
    return d


def is_resolved(b: BoundedBehavior) -> bool:
    return not isinstance(b, Unresolved)


@dataclass(frozen=True)
class RefinementVerdict:
    holds: bool
    reason: str = ""
    counterexample: Optional[dict] = None

    def __bool__(self):
        return self.holds

    def to_json(self) -> dict:
        return {"holds": self.holds, "reason": self.reason,
                "counterexample": self.counterexample}


OK = RefinementVerdict(True, "")


def from_run(r: smallstep.BoundedRun) -> BoundedBehavior:
    if r.status == smallstep.TERMINATED:
        return Terminates(r.trace, r.env)
    if r.status == smallstep.WENT_WRONG:
        return GoesWrong(r.trace)
    if r.status == smallstep.SILENT_CYCLE:
        return DivergesSilently(r.trace)
    return Unresolved(r.trace)


def classify(p: Program, oracle: Oracle, fuel: int) -> BoundedBehavior:
    """Behavior of ``p`` read off a small-step run.  Uses ``oracle`` as is."""
    return from_run(smallstep.run(p, oracle, fuel))


def agreement(b_small: BoundedBehavior, b_big: BoundedBehavior) -> RefinementVerdict:
    """Do a small-step and a big-step classification of one run agree?

    Resolved results must coincide.  An unresolved side only saw part of
    the run, so its trace must be a prefix of the other side's (or, if
    both are unresolved, the two traces must be prefix-comparable).
    """
    r1, r2 = is_resolved(b_small), is_resolved(b_big)
    if r1 and r2:
        if b_small == b_big:
            return OK
        return RefinementVerdict(False, f"small-step {behavior_name(b_small)}, "
                                        f"big-step {behavior_name(b_big)}: "
                                        + _trace_diff(b_small.trace, b_big.trace))
    if not r1 and not r2:
        ok = prefix_comparable(b_small.trace, b_big.trace)
    elif r1:
        ok = is_prefix(b_big.trace, b_small.trace)
    else:
        ok = is_prefix(b_small.trace, b_big.trace)
    if ok:
        return OK
    return RefinementVerdict(False, "traces not prefix-consistent: "
                             + _trace_diff(b_small.trace, b_big.trace))


# -- refinement ------------------------------------------------------------

def refines(b1: BoundedBehavior, b2: BoundedBehavior) -> RefinementVerdict:
    """Does ``b1`` refine ``b2``?

    Either the behaviors are equal, or ``b2`` goes wrong after a prefix of
    ``b1``'s trace.  Both sides must be resolved.
    """
    if not (is_resolved(b1) and is_resolved(b2)):
        raise ValueError("refines() needs resolved behaviors")
    if isinstance(b2, GoesWrong) and is_prefix(b2.trace, b1.trace):
        return OK
    if type(b1) is not type(b2):
        return RefinementVerdict(False, f"status mismatch: {behavior_name(b1)} vs {behavior_name(b2)}")
    if b1.trace != b2.trace:
        return RefinementVerdict(False, _trace_diff(b1.trace, b2.trace))
    if isinstance(b1, Terminates) and b1.env != b2.env:
        return RefinementVerdict(False, f"final state mismatch: {b1.env.to_json()} vs {b2.env.to_json()}")
    return OK


def refines_bounded(b1: BoundedBehavior, b2: BoundedBehavior,
                    strict: bool = False) -> RefinementVerdict:
    """``refines`` with the finite-fuel weakening for unresolved sides.

    An unresolved side only shows a prefix of its real trace, so the two
    traces must be prefix-comparable.  A resolved side has a complete trace
    that the other side may not run past, except that ``b1`` may continue
    past a ``b2`` that goes wrong.
    With ``strict``, a refinement that is not an equality is rejected unless
    ``b2`` goes wrong.
    """
    if not (is_resolved(b1) and is_resolved(b2)):
        t1, t2 = b1.trace, b2.trace
        if is_resolved(b2) and not isinstance(b2, GoesWrong):
            ok = is_prefix(t1, t2)
        elif is_resolved(b1):
            ok = is_prefix(t2, t1)
        else:
            ok = prefix_comparable(t1, t2)
        if ok:
            return OK
        return RefinementVerdict(False, "unresolved traces disagree: " + _trace_diff(t1, t2))
    v = refines(b1, b2)
    if v and strict and not isinstance(b2, GoesWrong) and b1 != b2:
        return RefinementVerdict(False, "refinement is not an equality")
    return v


def _trace_diff(t1: Trace, t2: Trace) -> str:
    for i, (a, b) in enumerate(zip(t1, t2)):
        if a != b:
            return f"trace mismatch at event {i}: {a} vs {b}"
    return f"trace length mismatch: {len(t1)} vs {len(t2)}"


# -- preservation ----------------------------------------------------------

def _cex(p, p2, o: Oracle, fuel, b_src, b_tgt) -> dict:
    return {"program": pretty_program(p), "transformed": pretty_program(p2),
            "oracle": o.spec(), "fuel": fuel,
            "traces": {"source": behavior_json(b_src), "target": behavior_json(b_tgt)}}


def _preserves(p: Program, p2: Program, oracles: Sequence[Oracle], fuel: int,
               forward: bool, strict: bool) -> RefinementVerdict:
    # forward: every behavior of p is refined by some behavior of p2;
    # backward: every behavior of p2 refines some behavior of p.
    # The oracle set stands in for the nondeterminism; the same oracle is
    # tried first, and under ``strict`` it is the only candidate.
    cache: dict[tuple[int, int], BoundedBehavior] = {}

    def beh(which: int, i: int) -> BoundedBehavior:
        if (which, i) not in cache:
            cache[which, i] = classify((p, p2)[which], oracles[i].fresh(), fuel)
        return cache[which, i]

    for i, o in enumerate(oracles):
        others = [] if strict else [j for j in range(len(oracles)) if j != i]
        failure = None
        for j in [i] + others:
            b_src, b_tgt = (beh(0, i), beh(1, j)) if forward else (beh(0, j), beh(1, i))
            v = refines_bounded(b_tgt, b_src, strict)
            if v:
                break
            failure = failure or (v, b_src, b_tgt)
        else:
            v, b_src, b_tgt = failure
            return RefinementVerdict(False, f"oracle {o.spec()}: {v.reason}",
                                     _cex(p, p2, o, fuel, b_src, b_tgt))
    return OK


def check_forward(p: Program, p2: Program, oracles: Sequence[Oracle], fuel: int,
                  strict: bool = False) -> RefinementVerdict:
    """Every behavior of ``p`` is refined by a behavior of ``p2``."""
    return _preserves(p, p2, list(oracles), fuel, True, strict)


def check_backward(p: Program, p2: Program, oracles: Sequence[Oracle], fuel: int,
                   strict: bool = False) -> RefinementVerdict:
    """Every behavior of ``p2`` refines some behavior of ``p``."""
    return _preserves(p, p2, list(oracles), fuel, False, strict)


def check_equiv(p: Program, p2: Program, oracles: Sequence[Oracle], fuel: int) -> RefinementVerdict:
    v = check_forward(p, p2, oracles, fuel)
    if not v:
        return v
    v = check_forward(p2, p, oracles, fuel)
    if not v:
        return RefinementVerdict(False, "reverse direction: " + v.reason, v.counterexample)
    return OK


# -- determinacy and receptiveness -----------------------------------------

Runner = Callable[[Program, Oracle, int], BoundedBehavior]


def _alternatives(ret: int) -> list[int]:
    return sorted({ret + 1, ret - 1, 0, 1, -ret, 2**31} - {ret})


def probe_determinacy(p: Program, base: Oracle, variants: int, fuel: int,
                      runner: Runner = classify) -> RefinementVerdict:
    """Check that external calls are the only nondeterminism of ``p``.

    Reruns with the identical oracle must give identical behaviors.  A run
    whose ``i``-th return value is perturbed must reproduce the base trace
    before position ``i`` and perform a matching call at ``i``; what
    happens afterwards is unconstrained.
    """
    b0 = runner(p, base.fresh(), fuel)
    for _ in range(2):
        again = runner(p, base.fresh(), fuel)
        if again != b0:
            return RefinementVerdict(False, "identical oracle gave a different behavior")
    t0 = b0.trace
    for i in range(min(len(t0), variants)):
        for alt in _alternatives(t0[i].ret)[:2]:
            b = runner(p, base.with_override(i, alt), fuel)
            t = b.trace
            if t[:i] != t0[:i]:
                return RefinementVerdict(False, f"perturbing call {i} changed earlier events")
            if len(t) <= i or not match_events(t[i], t0[i]):
                got = t[i] if len(t) > i else "no event"
                return RefinementVerdict(False, f"call {i} does not match: {got} vs {t0[i]}")
    return OK


def probe_receptiveness(p: Program, base: Oracle, fuel: int,
                        runner: Runner = classify) -> RefinementVerdict:
    """Every event position accepts any alternative return value.

    For each event of the base run and each alternative return value, the
    perturbed run must still perform a matching event at that position,
    and the event must carry the substituted value.
    """
    t0 = runner(p, base.fresh(), fuel).trace
    for i, ev in enumerate(t0):
        for alt in _alternatives(ev.ret):
            t = runner(p, base.with_override(i, alt), fuel).trace
            if len(t) <= i or not match_events(t[i], ev) or t[i].ret != alt:
                return RefinementVerdict(False, f"call {i} cannot return {alt}")
    return OK


# -- guarded divergence ----------------------------------------------------

INF = None  # an infinite (or unknown-length) remaining trace


def guard(tau_remaining: Optional[int], n: int, t_len: int, m: int) -> bool:
    """``(tau is empty) or (t is empty => m < n)``.

    ``tau_remaining`` is the length of the trace still to be produced, or
    ``INF``.  ``t_len`` is the length of the trace emitted by the rule.
    """
    if tau_remaining == 0:
        return True
    return t_len != 0 or m < n


def validate_divergence_schedule(schedule: Iterable[tuple[int, int]],
                                 tau_len: Optional[int] = INF) -> bool:
    """Check a finite divergence certificate against ``guard``.

    ``schedule`` lists, per rule application, the number of events the rule
    emits (0 or 1) and the index claimed for its conclusion; the premise
    index is the claim of the next entry.  ``tau_len`` is the length of the
    trace the derivation still has to produce, ``INF`` for an infinite one.
    Once that trace is exhausted every rule is admissible (silent
    divergence); before, a silent rule must strictly decrease the index.
    A finite claim that the schedule never emits in full is rejected.
    """
    sched = list(schedule)
    if any(e not in (0, 1) for e, _ in sched):
        return False
    remaining = tau_len
    for (emitted, n), (_, m) in zip(sched, sched[1:]):
        if not guard(remaining, n, emitted, m):
            return False
        if remaining is not INF and remaining > 0:
            remaining -= emitted
    if sched and remaining is not INF and remaining > 0:
        remaining -= sched[-1][0]
    return remaining is INF or remaining <= 0
