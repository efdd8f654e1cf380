"""
How big does a parity code need to be?
======================================

For a link that delivers each photon with probability ``p`` we look for the
smallest (m, n) code whose failure probability stays under a target.
"""

import numpy as np

from parityrepeater import analytic as an
from parityrepeater.analytic import CodeParams

###############################################################################
# A single block of m qubits is useless only if every photon is lost. The
# whole code fails when some block is wiped out or no block arrives complete.

for p in (0.95, 0.9, 0.82, 0.67):
    code = an.optimize_code(p, 1.2e-3)
    pf = an.failure_probability(p, code)
    print(f"p={p:.2f}  m={code.m:2d}  n={code.n:5d}  qubits={code.total:6d}  p_f={pf:.3e}")

###############################################################################
# At fixed m the failure first falls and then rises with n: more blocks give
# more chances of a complete one, but also more chances that one is wiped out.

p, m = 0.82, 6
for n in (5, 10, 22, 60, 200, 2000):
    print(f"  n={n:5d}  p_f={an.failure_probability(p, CodeParams(m, n)):.3e}")
print("feasible n at m=6:", an.feasible_n_range(p, m, 1.2e-3))

###############################################################################
# Below half transmission no code helps.

try:
    an.optimize_code(0.45, 1.2e-3)
except an.Infeasible as exc:
    print("p=0.45:", exc)

###############################################################################
# Loss per hop comes from hardware efficiencies and fibre length.

budget = an.LinkBudget(p_s=0.97, p_d=0.97, p_c=0.97, L=10, L0=25)
print(f"p at 10 km with 97% parts: {an.link_probability(budget):.4f}")
for L in np.arange(2, 12, 2):
    print(f"  L={L:4.1f} km  p={an.link_probability(an.LinkBudget(0.97, 0.97, 0.97, L, 25)):.3f}")
