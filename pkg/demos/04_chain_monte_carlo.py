"""
Sending a qubit down a chain of repeaters
=========================================

Pattern-level Monte Carlo against the closed form, then with noisy gates and
readouts switched on.
"""

import math

from parityrepeater import analytic as an
from parityrepeater import netsim as ns
from parityrepeater.analytic import CodeParams, LinkBudget

p = 0.82
budget = LinkBudget(L=-25 * math.log(p))
code = CodeParams(6, 22)

cfg = ns.ChainConfig(hops=10, budget=budget, code=code, trials=100_000, seed=1)
stats = ns.run_chain(cfg)
expect = an.chain_success(an.failure_probability(p, code), cfg.hops)
print(f"simulated {stats.success_rate:.4f} +/- {stats.success_stderr:.4f}, closed form {expect:.4f}")

###############################################################################
# Thread count does not change a single count.

print("identical with 4 threads:", ns.run_chain(cfg, threads=4) == stats)

###############################################################################
# Flip each received qubit with probability eps and each readout with q.

for eps in (1e-3, 1e-2, 5e-2):
    noisy = ns.ChainConfig(hops=10, budget=budget, code=code, trials=20_000, seed=2,
                           gate_error_rate=eps, meas_error_rate=eps)
    s = ns.run_chain(noisy)
    print(f"eps={eps:g}: success {s.success_rate:.4f}  logical errors {s.logical_errors}")

###############################################################################
# A tiny chain run through the full state-vector engine agrees.

small = ns.ChainConfig(hops=2, budget=LinkBudget(L=-25 * math.log(0.9)),
                       code=CodeParams(2, 2), trials=200, seed=3)
exact = ns.run_chain_exact_small(small)
print(f"exact engine: success {exact.success_rate:.3f}, logical errors {exact.logical_errors}, "
      f"closed form {an.chain_success(0.0523, 2):.3f}")

###############################################################################
# An 80-hop, 800 km report.

rep = an.rate_report(LinkBudget(0.97, 0.97, 0.97, 10, 25), CodeParams(8, 25), hops=80,
                     per_hop_fidelity=0.999)
print(rep)
