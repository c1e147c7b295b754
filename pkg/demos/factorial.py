"""Run the factorial program under both semantics, then unroll it."""
from minicminor import corpus
from minicminor.behavior import check_equiv, classify
from minicminor.bigstep import exec_program
from minicminor.difftest import case_oracles
from minicminor.oracle import Oracle
from minicminor.smallstep import run
from minicminor.syntax import pretty_program
from minicminor.transform import PASSES

p = corpus.load("factorial")
print(pretty_program(p))

small = run(p, Oracle.constant(0), 10_000)
print(f"small-step: {small.status} after {small.steps_used} steps, x = {small.env['x']}")
big = exec_program(p, Oracle.constant(0), 10_000)
print(f"big-step:   x = {big.outcome.env['x']}")

# the loop has the counted shape with a literal bound, so it unrolls fully
q = PASSES["unroll"](p)
print(f"\nunrolled program is {len(pretty_program(q).splitlines())} lines, first few:")
print("\n".join(pretty_program(q).splitlines()[:8]))

oracles = case_oracles(0, 3, 10_000)
print("\nequivalent:", bool(check_equiv(p, q, oracles, 10_000)))
print("behavior after unrolling:", classify(q, Oracle.constant(0), 10_000))
