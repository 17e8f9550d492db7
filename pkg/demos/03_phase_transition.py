"""Empirical phase transition of Basis Pursuit with random windows.

Sweeps the sparsity S at n=32 and prints the recovery rate with a 95%
Wilson interval; the rule of thumb ``S ~ n / (2 log n)`` is marked. Pass
``--full`` for n=64 and 100 trials per point (several minutes).
"""

import math
import sys

from gaborcs.harness import ExperimentSpec, run_phase_transition

full = "--full" in sys.argv
n, trials = (64, 100) if full else (32, 20)
grid = tuple(range(1, n // 2 + 1, 2 if full else 1))
spec = ExperimentSpec("phase_transition", n, "steinhaus", grid, trials, master_seed=42)
rows = run_phase_transition(spec)

mark = n / (2 * math.log(n))
print(f"n={n}, {trials} trials per S, n/(2 log n) = {mark:.2f}\n")
print(f"{'S':>3}  {'rate':>5}  {'95% interval':>15}")
for r in rows:
    bar = "#" * round(20 * r.rate)
    flag = " <- n/(2 log n)" if r.S == round(mark) else ""
    print(f"{r.S:3d}  {r.rate:5.2f}  [{r.wilson_lo:.2f}, {r.wilson_hi:.2f}]  {bar}{flag}")
