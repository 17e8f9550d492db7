"""Tour of a finite Gabor system.

Builds the Alltop and Steinhaus windows, checks the tight-frame identity
``||Psi^* y||^2 = n ||y||^2`` and compares their coherence with the
``1/sqrt(n)`` floor. Run with ``python3 demos/01_gabor_system.py``.
"""

import numpy as np

from gaborcs import GaborOperator, alltop_window, coherence, steinhaus_window, tf_shift

n = 13
alltop = GaborOperator(alltop_window(n))
print(f"Alltop window, n={n}: |g_q| = {abs(alltop.window.values[0]):.4f} for every q")

# A column of the synthesis matrix is a time-frequency shift of the window.
lam = (3, 5)
assert np.allclose(alltop.column(lam), tf_shift(alltop.window.values, lam))
print(f"column {lam} = M_5 T_3 g, norm {np.linalg.norm(alltop.column(lam)):.6f}")

# Tight frame: the analysis operator scales energy by exactly n.
y = np.random.default_rng(0).standard_normal(n) + 0j
print(f"||Psi^* y||^2 / ||y||^2 = {np.linalg.norm(alltop.analyze(y)) ** 2 / np.linalg.norm(y) ** 2:.10f}")

# Coherence: Alltop hits 1/sqrt(n) exactly; random windows sit a log factor above.
print(f"\n{'n':>5} {'1/sqrt(n)':>10} {'alltop':>10} {'steinhaus':>10}")
for n in (5, 11, 31, 61, 127):
    mu_a = coherence(GaborOperator(alltop_window(n)))
    mu_s = coherence(GaborOperator(steinhaus_window(n, seed=n)))
    print(f"{n:5d} {n ** -0.5:10.4f} {mu_a:10.4f} {mu_s:10.4f}")
