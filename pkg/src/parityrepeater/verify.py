"""Exhaustive protocol checks shared by the CLI ``verify`` command and the tests.

Every suite returns a :class:`SuiteResult` with pass/fail counts and the first
few failure descriptions.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import analytic as an
from . import paritycode as pc
from . import statevec as sv
from . import transfer as tr
from .analytic import CodeParams

TOL = 1e-10
ORACLE_PS = (0.5, 0.6, 0.82, 0.9, 0.95, 0.99)
RECOVERY_CODES = (CodeParams(2, 2), CodeParams(3, 2), CodeParams(2, 3), CodeParams(3, 3))


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    failed: int = 0
    failures: list = field(default_factory=list)

    def check(self, ok: bool, what) -> None:
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if len(self.failures) < 20:
                self.failures.append(what)

    @property
    def ok(self) -> bool:
        return self.failed == 0 and self.passed > 0


def random_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def verify_transfer(n_states: int = 100, seed: int = 0) -> SuiteResult:
    """Round trips on every forced outcome branch for random inputs."""
    res = SuiteResult("transfer")
    rng = np.random.default_rng(seed)
    for trial in range(n_states):
        ab = random_state(rng, 2)
        for s, d in itertools.product((0, 1), repeat=2):
            st = sv.PureState(ab, ("tx",))
            st, rec = tr.matter_to_photon(st, "tx", outcome=s)
            st, _ = tr.photon_to_matter(st, ("r0", "r1"), "rx", rec, sender_site="tx", outcome=d)
            f = abs(np.vdot(ab, sv.apply_frame(st).amplitudes)) ** 2
            res.check(abs(f - 1) <= TOL, ("1q", trial, s, d, f))
        alphas = random_state(rng, 4)
        for o in itertools.product((0, 1), repeat=2):
            modes, rec = tr.two_qubit_to_four_mode(alphas, o)
            for j in range(4):
                out = tr.four_mode_to_two_qubit(modes, rec, outcome=j)
                f = abs(np.vdot(alphas, out)) ** 2
                res.check(abs(f - 1) <= TOL, ("2q", trial, o, j, f))
    return res


def _survivor_rho(encoded, pattern):
    branches = pc.apply_loss_branches(encoded, pattern)
    labels = branches[0][1].state.labels
    return sv.reduced_density_matrix([(w, e.state) for w, e in branches], labels)


_PAIRS = {
    "amplitude": ((1, 0), (0, 1)),
    "phase": ((2**-0.5, 2**-0.5), (2**-0.5, -(2**-0.5))),
}


def information_lost(code: CodeParams, pattern: pc.LossPattern) -> str | None:
    """Name of an orthogonal input pair the survivors cannot tell apart, if any."""
    for name, (u, v) in _PAIRS.items():
        ru = _survivor_rho(pc.encode(*u, code), pattern)
        rv = _survivor_rho(pc.encode(*v, code), pattern)
        if np.allclose(ru, rv, atol=TOL):
            return name
    return None


def verify_recovery(codes=RECOVERY_CODES, seed: int = 0) -> SuiteResult:
    """Every loss pattern: exact recovery on all branches iff the success condition holds.

    For failing patterns the survivors' reduced state is shown to be identical
    for two orthogonal logical inputs, so no decoder could succeed.
    """
    res = SuiteResult("recovery")
    rng = np.random.default_rng(seed)
    for code in codes:
        ab = random_state(rng, 2)
        enc = pc.encode(ab[0], ab[1], code)
        for pattern in pc.iter_patterns(code):
            tag = ((code.m, code.n), tuple(pattern.lost()))
            if pc.success_condition(pattern):
                fids = [
                    pc.logical_fidelity(ab[0], ab[1], st)
                    for _, e in pc.apply_loss_branches(enc, pattern)
                    for _, st in pc.recover_branches(e, pattern)
                ]
                ok = all(abs(f - 1) <= TOL for f in fids)
                res.check(ok and information_lost(code, pattern) is None, tag)
            else:
                try:
                    pc.recover_branches(enc, pattern)
                    heralded = False
                except pc.HeraldedFailure:
                    heralded = True
                res.check(heralded and information_lost(code, pattern) is not None, tag)
    return res


def verify_oracle(max_total: int = 16, ps=ORACLE_PS, rel_tol: float = 1e-9) -> SuiteResult:
    """Closed form against full enumeration, plus the one-qubit-per-photon enumerator."""
    res = SuiteResult("oracle")
    for m in range(1, max_total + 1):
        for n in range(1, max_total // m + 1):
            code = CodeParams(m, n)
            for p in ps:
                exact = pc.brute_force_failure_prob(p, code)
                formula = an.failure_probability(p, code)
                rel = abs(formula - exact) / exact if exact else abs(formula)
                res.check(rel <= rel_tol, ("formula", m, n, p, formula, exact))
                if code.total <= 12:
                    mux, _ = an.multiplexed_failure_probability(p, tr.identity_assignment(code))
                    res.check(abs(mux - formula) <= 1e-12, ("identity", m, n, p, mux, formula))
    return res


def verify_ecc(code: CodeParams = CodeParams(3, 3), seed: int = 0) -> SuiteResult:
    """Correctable Pauli sets decode exactly; a heavier one produces a logical error."""
    res = SuiteResult("ecc")
    rng = np.random.default_rng(seed)
    ab = random_state(rng, 2)
    enc = pc.encode(ab[0], ab[1], code)
    full = pc.LossPattern.all_arrived(code)

    def fid(x_sites=(), z_sites=()):
        bad = pc.inject_paulis(enc, x_sites, z_sites)
        return [pc.logical_fidelity(ab[0], ab[1], st) for _, st in pc.recover_branches(bad, full)]

    for xs in pc.error_sets_one_per_block(code):
        res.check(all(abs(f - 1) <= TOL for f in fid(x_sites=xs)), ("X", xs))
    for b, j in itertools.product(range(code.n), range(code.m)):
        res.check(all(abs(f - 1) <= TOL for f in fid(z_sites=[(b, j)])), ("Z", (b, j)))
    # two bit flips in one block exceed the (m-1)/2 bound
    heavy = fid(x_sites=[(0, 0), (0, 1)])
    res.check(all(f < 1 - 1e-6 for f in heavy), ("X weight 2 not flagged", heavy))
    return res


SUITES = {
    "transfer": verify_transfer,
    "recovery": verify_recovery,
    "oracle": verify_oracle,
    "ecc": verify_ecc,
}
