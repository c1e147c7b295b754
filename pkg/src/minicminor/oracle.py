"""External-call oracles, events and traces.

External calls are the only nondeterminism in the language.  An ``Oracle``
fixes that nondeterminism: each return value is a deterministic function of
the oracle's mode, the call index and the call's ``(fn, arg)``.  Oracles
carry a cursor and are owned by a single run; use ``fresh()`` to replay.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence


class OracleExhausted(Exception):
    """A scripted oracle ran out of values (a harness error, not going wrong)."""


@dataclass(frozen=True)
class Event:
    fn: str
    arg: int
    ret: int

    def to_json(self):
        return {"fn": self.fn, "arg": self.arg, "ret": self.ret}


Trace = tuple[Event, ...]


def match_events(e1: Event, e2: Event) -> bool:
    """Same function and argument; return values may differ."""
    return e1.fn == e2.fn and e1.arg == e2.arg


def match_traces(t1: Sequence[Event], t2: Sequence[Event]) -> bool:
    return len(t1) == len(t2) and all(map(match_events, t1, t2))


def is_prefix(t1: Sequence[Event], t2: Sequence[Event]) -> bool:
    return len(t1) <= len(t2) and tuple(t2[:len(t1)]) == tuple(t1)


def prefix_comparable(t1: Sequence[Event], t2: Sequence[Event]) -> bool:
    return is_prefix(t1, t2) or is_prefix(t2, t1)


SEED_RANGE = 16


@dataclass
class Oracle:
    """Return-value supplier for external calls.

    ``mode`` is ``"const"``, ``"seed"`` or ``"script"``.  ``overrides``
    replaces the return value of individual call indices; the determinacy
    and receptiveness probes use it to perturb one call at a time.
    """

    mode: str
    value: int = 0
    script: tuple[int, ...] = ()
    overrides: Mapping[int, int] = field(default_factory=dict)
    cursor: int = 0

    @classmethod
    def constant(cls, v: int) -> Oracle:
        return cls("const", value=v)

    @classmethod
    def seeded(cls, seed: int) -> Oracle:
        return cls("seed", value=seed)

    @classmethod
    def scripted(cls, returns: Sequence[int]) -> Oracle:
        return cls("script", script=tuple(returns))

    @classmethod
    def from_spec(cls, spec: str) -> Oracle:
        """Parse ``const:7``, ``seed:42`` or ``script:path.json``."""
        kind, _, arg = spec.partition(":")
        if kind == "const":
            return cls.constant(int(arg))
        if kind == "seed":
            return cls.seeded(int(arg))
        if kind == "script":
            with open(arg) as f:
                vals = json.load(f)
            if not isinstance(vals, list) or not all(isinstance(v, int) for v in vals):
                raise ValueError(f"{arg}: expected a JSON array of integers")
            return cls.scripted(vals)
        raise ValueError(f"bad oracle spec {spec!r}")

    def spec(self) -> str:
        if self.mode == "script":
            base = "script:" + json.dumps(list(self.script))
        else:
            base = f"{self.mode}:{self.value}"
        if self.overrides:
            base += " overrides=" + json.dumps({str(k): v for k, v in sorted(self.overrides.items())})
        return base

    def fresh(self) -> Oracle:
        """Same mode and overrides, cursor reset to 0."""
        return Oracle(self.mode, self.value, self.script, dict(self.overrides))

    def with_override(self, index: int, ret: int) -> Oracle:
        ov = dict(self.overrides)
        ov[index] = ret
        return Oracle(self.mode, self.value, self.script, ov)

    def peek(self, fn: str, arg: int, index: int) -> int:
        if index in self.overrides:
            return self.overrides[index]
        if self.mode == "const":
            return self.value
        if self.mode == "seed":
            h = hashlib.blake2b(f"{self.value}:{index}:{fn}:{arg}".encode(), digest_size=8)
            return int.from_bytes(h.digest(), "little") % (2 * SEED_RANGE + 1) - SEED_RANGE
        if self.mode == "script":
            if index >= len(self.script):
                raise OracleExhausted(f"script exhausted at call {index}")
            return self.script[index]
        raise ValueError(f"unknown oracle mode {self.mode!r}")

    def call(self, fn: str, arg: int) -> int:
        ret = self.peek(fn, arg, self.cursor)
        self.cursor += 1
        return ret
