"""Evaluate the closed-form probability bounds and compare with simulation.

Shows how quickly the associated Stirling numbers grow, checks the
conditioning bound against a Monte-Carlo estimate at n=1024, and tabulates
the recovery-condition constants.
"""

from gaborcs.bounds import (C_CONDITIONING, minimize_lemma51, stirling_table,
                            thm12b_sparsity_threshold, thm21_failure_probability,
                            thm22_constants, thm31_probability)
from gaborcs.gram import conditioning_failure_rate

table = stirling_table(200)
print("d2(m, s): permutations of m points into s cycles, none of length 1")
for m in range(2, 9):
    print(f"  m={m}: {list(table.row(m))[1:]}")
print(f"  d2(200, 100) has {len(str(table(200, 100)))} digits\n")

n, S, delta = 1024, 4, 0.5
rep = thm31_probability(n, S, delta)
mc = conditioning_failure_rate(n, S, delta, trials=300, master_seed=1)
print(f"P(||H|| > {delta}) at n={n}, S={S}:")
print(f"  closed form (C = {C_CONDITIONING:.4f})  {rep.value:.4g}")
print(f"  best moment bound (m={rep.terms['markov_m']})    {rep.terms['markov_min']:.3g}")
print(f"  Monte Carlo, 300 draws         {mc.rate:.3f}  (95% up to {mc.wilson_hi:.3f})\n")

c1, c2, c3 = thm22_constants()
print(f"recovery-condition constants: C1={c1:.1f}  C2={c2:.1f}  C3={c3:.2f}")
print(f"sparsity threshold for a random window, n={n}, t=1: S <= {thm12b_sparsity_threshold(n, 1):.3f}\n")

print("random-phase failure bound and optimised moment bound, S=4:")
for k in (10, 14, 18, 22):
    nn = 2 ** k
    t21 = thm21_failure_probability(nn, 4, 9.0).value
    l51 = minimize_lemma51(nn, 4, m_max=60)
    print(f"  n=2^{k:<2d}  random-phase {t21:10.3g}   moment {l51.value:10.3g} (m={l51.params_used.m})")
