"""Fuzz each pass and its mutant, and show one shrunk counterexample."""
import time

from minicminor.difftest import GenConfig, fuzz_pass, mutant_for

cfg = GenConfig(seed=3)
for name in ("unswitch", "unroll", "silentloop"):
    t0 = time.perf_counter()
    rep = fuzz_pass(name, cfg, 200, fuel=2_000)
    print(f"{name:>11}: {rep.cases_failed} failures in {rep.cases_run} cases "
          f"({rep.cases_transformed} transformed, {time.perf_counter() - t0:.1f}s)")

rep = fuzz_pass(mutant_for("unroll"), cfg, 1000, fuel=2_000, max_failures=1)
f = rep.failures[0]
print(f"\n{f.pass_name} fails after {rep.cases_run} cases: {f.reason}")
print(f"original program: {len(f.program.splitlines())} lines; shrunk to:")
print(f.minimized)
print("oracle:", f.oracle)
