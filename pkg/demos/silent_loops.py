"""Silent loops: a run that diverges without output is only certified once
the machine state recurs.  Replacing the loop body by `skip` makes that
happen immediately."""
from minicminor import corpus
from minicminor.behavior import classify
from minicminor.oracle import Oracle
from minicminor.syntax import pretty_program
from minicminor.transform import PASSES

p = corpus.load("silent_loop")
print(pretty_program(p))
for fuel in (100, 10_000):
    print(f"fuel {fuel:>6}: {classify(p, Oracle.constant(0), fuel)}")

q = PASSES["silentloop"](p)
print("\nafter silentloop:\n" + pretty_program(q))
print(f"fuel    100: {classify(q, Oracle.constant(0), 100)}")

# a loop that can exit is not touched
e = corpus.load("five_times")
print("\nexiting loop unchanged:", PASSES["silentloop"](e) == e)
