"""One test per acceptance criterion, each at its stated tolerance and time limit.

Every test prints a single ``CRITERION n: PASS|FAIL`` line (also collected into
the terminal summary) before asserting.
"""
import math
import os
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from parityrepeater import analytic as an
from parityrepeater import netsim as ns
from parityrepeater import verify
from parityrepeater.analytic import CodeParams, LinkBudget

THREADS = max(4, os.cpu_count() or 1)


def report(n, ok, detail, elapsed, limit=None):
    within = limit is None or elapsed < limit
    passed = bool(ok and within)
    budget = "" if limit is None else f" (limit {limit:g} s)"
    line = f"CRITERION {n}: {'PASS' if passed else 'FAIL'}  {detail}  [{elapsed:.2f} s{budget}]"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line
    assert within, line


def test_criterion_1_table_reproduction():
    t0 = time.perf_counter()
    want = {0.95: (3, 4), 0.90: (4, 8), 0.82: (6, 22)}
    got = {p: an.optimize_code(p, 1.2e-3) for p in (*want, 0.67)}
    ok = all((got[p].m, got[p].n) == mn for p, mn in want.items())
    c67 = got[0.67]
    ok &= c67.m == 13 and c67.n <= 1500 and an.failure_probability(0.67, c67) <= 1.2e-3
    reference = [(0.95, 3, 4), (0.90, 4, 8), (0.82, 6, 22), (0.67, 13, 1500)]
    pfs = [an.failure_probability(p, CodeParams(m, n)) for p, m, n in reference]
    ok &= all(1e-4 < pf <= 1.2e-3 for pf in pfs)
    detail = ", ".join(f"p={p}:({c.m},{c.n})" for p, c in got.items())
    detail += "; reference-pair p_f " + ", ".join(f"{pf:.3e}" for pf in pfs)
    report(1, ok, detail, time.perf_counter() - t0, 10)


def test_criterion_2_formula_vs_oracle():
    t0 = time.perf_counter()
    worst = 0.0
    count = 0
    for m in range(1, 17):
        for n in range(1, 16 // m + 1):
            for p in (0.5, 0.6, 0.82, 0.9, 0.95, 0.99):
                code = CodeParams(m, n)
                exact = verify.pc.brute_force_failure_prob(p, code)
                rel = abs(an.failure_probability(p, code) - exact) / exact
                worst = max(worst, rel)
                count += 1
    report(2, worst <= 1e-9, f"{count} (code, p) cases, worst relative error {worst:.2e}",
           time.perf_counter() - t0, 60)


def test_criterion_3_link_budget():
    t0 = time.perf_counter()
    p = an.link_probability(LinkBudget(0.97, 0.97, 0.97, L=10, L0=25))
    report(3, abs(p - 0.6118) <= 5e-4, f"link_probability = {p:.4f}, expected 0.6118 +/- 0.0005",
           time.perf_counter() - t0)


def test_criterion_4_worked_example():
    t0 = time.perf_counter()
    rep = an.rate_report(
        LinkBudget(0.97, 0.97, 0.97, L=10, L0=25), CodeParams(8, 25), hops=80,
        cycle_time=100e-9, per_hop_fidelity=0.999,
    )
    ok = abs(rep.end_to_end_fidelity - 0.9231) <= 1e-4 and rep.raw_rate == pytest.approx(1e7)
    detail = (f"fidelity {rep.end_to_end_fidelity:.4f}, raw rate {rep.raw_rate:.3g} Hz "
              f"(end-to-end success {rep.end_to_end_success:.3g}, reported only)")
    report(4, ok, detail, time.perf_counter() - t0)


def test_criterion_5_transfer_round_trips():
    t0 = time.perf_counter()
    res = verify.verify_transfer(n_states=100, seed=2024)
    report(5, res.ok and res.passed == 100 * (4 + 16),
           f"{res.passed} branches at fidelity 1 within 1e-10, {res.failed} failed",
           time.perf_counter() - t0, 10)


def test_criterion_6_recovery_exhaustive():
    t0 = time.perf_counter()
    res = verify.verify_recovery(codes=verify.RECOVERY_CODES, seed=2024)
    expected = sum(2**c.total for c in verify.RECOVERY_CODES)
    report(6, res.ok and res.passed == expected,
           f"{res.passed}/{expected} loss patterns behave as the success condition predicts",
           time.perf_counter() - t0, 120)


def test_criterion_7_error_correction_bounds():
    t0 = time.perf_counter()
    res = verify.verify_ecc(CodeParams(3, 3), seed=2024)
    report(7, res.ok, f"{res.passed} injections checked (incl. weight-2 logical error), "
           f"{res.failed} failed", time.perf_counter() - t0, 60)


def test_criterion_8_monte_carlo_consistency():
    t0 = time.perf_counter()
    cases = [(0.95, 3, 4, 1), (0.82, 6, 22, 3), (0.9, 4, 8, 10)]
    ok = True
    parts = []
    for i, (p, m, n, hops) in enumerate(cases):
        cfg = ns.ChainConfig(
            hops=hops, budget=LinkBudget(L=-25 * math.log(p)), code=CodeParams(m, n),
            trials=100_000, seed=1000 + i,
        )
        one = ns.run_chain(cfg, threads=1)
        many = ns.run_chain(cfg, threads=THREADS)
        expect = (1 - an.failure_probability(p, cfg.code)) ** hops
        sigma = math.sqrt(expect * (1 - expect) / cfg.trials)
        z = abs(one.success_rate - expect) / sigma
        ok &= z <= 3 and one == many
        parts.append(f"({m},{n})x{hops}: {z:.2f} sigma, identical@{THREADS}t={one == many}")
    report(8, ok, "; ".join(parts), time.perf_counter() - t0, 60)


def test_criterion_9_majority_vote():
    t0 = time.perf_counter()
    rate, err = ns.simulate_majority_vote(3, 0.01, 1_000_000, seed=2024)
    closed = ns.majority_vote_logical_error(3, 0.01)
    ok = abs(rate - 2.98e-4) <= 3 * err and closed == pytest.approx(2.98e-4, rel=1e-9)
    report(9, ok, f"simulated {rate:.3e} +/- {err:.1e} vs 2.98e-4", time.perf_counter() - t0, 30)
