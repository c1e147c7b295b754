"""Hoist a loop-invariant branch out of a loop, and watch the broken
variant that skips the independence check get caught."""
from minicminor.behavior import check_forward
from minicminor.difftest import case_oracles
from minicminor.syntax import parse_program, pretty_program
from minicminor.transform import MUTANTS, PASSES

ORACLES = case_oracles(1, 3, 5_000)

invariant = parse_program("""
init mode = 1, n = 0;
block {
  loop {
    if mode < 2 {
      n := n + 1;
      r := extcall write(n);
      if n < 3 { skip } else { exit 0 }
    } else {
      exit 0
    }
  }
}
""")
print(pretty_program(PASSES["unswitch"](invariant)))
print("forward preservation:",
      bool(check_forward(invariant, PASSES["unswitch"](invariant), ORACLES, 5_000, strict=True)))

# here the branch reads `m`, which the loop writes
dependent = parse_program("""
init m = 0;
block {
  loop {
    if m < 2 { m := m + 1; r := extcall write(m) } else { exit 0 }
  }
}
""")
print("\nsound pass leaves it alone:", PASSES["unswitch"](dependent) == dependent)
bad = MUTANTS["unswitch-noindep"](dependent)
v = check_forward(dependent, bad, ORACLES, 5_000, strict=True)
print("mutant output preserves behavior:", bool(v))
print("reason:", v.reason)
