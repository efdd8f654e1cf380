"""
Surviving photon loss with a parity code
========================================

Encode a qubit into a (3, 2) code, lose some photons, and decode.
"""

import numpy as np

from parityrepeater import paritycode as pc
from parityrepeater import verify
from parityrepeater.analytic import CodeParams

code = CodeParams(3, 2)
a, b = 0.6, 0.8j
enc = pc.encode(a, b, code)
print("register:", enc.state.num_sites, "qubits")

###############################################################################
# One lost qubit in block 1: block 0 is still complete, so recovery works on
# every erasure and measurement branch.

pattern = pc.LossPattern.from_lost(code, [(1, 0)])
for w, damaged in pc.apply_loss_branches(enc, pattern):
    for w2, out in pc.recover_branches(damaged, pattern):
        print(f"branch weight {w * w2:.3f}  fidelity {pc.logical_fidelity(a, b, out):.12f}")

###############################################################################
# Lose a whole block and the information is gone, not merely hard to reach:
# the survivors look the same for two orthogonal inputs.

wiped = pc.LossPattern.from_lost(code, [(0, 0), (0, 1), (0, 2)])
print("success condition:", pc.success_condition(wiped))
print("indistinguishable input pair:", verify.information_lost(code, wiped))
try:
    pc.recover(pc.apply_loss(enc, wiped, np.random.default_rng(0)), wiped)
except pc.HeraldedFailure as exc:
    print("heralded failure, lost", exc)

###############################################################################
# The same code also votes out bit and sign flips.

big = CodeParams(3, 3)
e3 = pc.encode(a, b, big)
fixed = pc.correct_errors(pc.inject_paulis(e3, x_sites=[(0, 1)], z_sites=[(2, 2)]))
print("after one X and one Z:", abs(np.vdot(pc.logical_ket(a, b, big), fixed.state.amplitudes)) ** 2)
