"""
Entanglement from the middle outwards
=====================================

A parity-encoded Bell pair is made at a central node and each half travels
its own chain. Both directions must succeed.
"""

import math

from parityrepeater import analytic as an
from parityrepeater import netsim as ns
from parityrepeater.analytic import CodeParams, LinkBudget

p, code, hops = 0.9, CodeParams(4, 8), 5
cfg = ns.ChainConfig(hops=hops, budget=LinkBudget(L=-25 * math.log(p)), code=code,
                     trials=100_000, seed=4, mode="Butterfly")
stats = ns.run_butterfly(cfg)
s = an.chain_success(an.failure_probability(p, code), hops)
print(f"pair success {stats.success_rate:.4f} +/- {stats.success_stderr:.4f}, s^2 = {s * s:.4f}")

###############################################################################
# The same flip on both halves leaves the Bell pair untouched, so only
# mismatched logical errors count.

noisy = ns.ChainConfig(**{**cfg.__dict__, "gate_error_rate": 0.02, "trials": 20_000})
print("logical errors with eps=0.02:", ns.run_butterfly(noisy).logical_errors)

###############################################################################
# Check the whole thing in the state-vector engine on a small instance.

small = ns.ChainConfig(hops=1, budget=LinkBudget(L=-25 * math.log(0.9)), code=CodeParams(2, 2),
                       trials=100, seed=5, mode="Butterfly")
exact = ns.run_chain_exact_small(small)
print(f"exact: {exact.successes} good pairs, {exact.logical_errors} bad, "
      f"{exact.heralded_failures} heralded")
