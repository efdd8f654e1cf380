import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parityrepeater import analytic as an
from parityrepeater import paritycode as pc
from parityrepeater import statevec as sv
from parityrepeater import verify
from parityrepeater.analytic import CodeParams

S = 1 / np.sqrt(2)


def rand_ab(seed):
    v = verify.random_state(np.random.default_rng(seed), 2)
    return complex(v[0]), complex(v[1])


def overlap(a, b):
    return abs(np.vdot(a, b)) ** 2


def test_encode_unit_code_is_hadamard_image():
    enc = pc.encode(1, 0, CodeParams(1, 1))
    assert np.allclose(enc.state.amplitudes, [S, S])
    assert pc.recover(enc, pc.LossPattern.all_arrived(CodeParams(1, 1))) == pytest.approx((1, 0))


def test_encode_single_block_pair():
    a, b = 0.6, 0.8j
    enc = pc.encode(a, b, CodeParams(2, 1))
    expected = a * np.array([S, 0, 0, S]) + b * np.array([S, 0, 0, -S])
    assert np.allclose(enc.state.amplitudes, expected)


def test_encode_equal_weights_matches_direct_ket():
    code = CodeParams(2, 3)
    enc = pc.encode(S, S, code)
    assert overlap(enc.state.amplitudes, pc.logical_ket(S, S, code)) == pytest.approx(1)


def test_encode_rejects_unnormalised():
    with pytest.raises(ValueError):
        pc.encode(1, 1, CodeParams(2, 2))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 3))
def test_encode_matches_direct_ket(seed, m, n):
    a, b = rand_ab(seed)
    code = CodeParams(m, n)
    enc = pc.encode(a, b, code)
    assert enc.state.labels == tuple(pc.code_labels(code))
    assert overlap(enc.state.amplitudes, pc.logical_ket(a, b, code)) == pytest.approx(1, abs=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_encode_is_isometric(seed):
    # inner products of two logical states survive encoding
    u = verify.random_state(np.random.default_rng(seed), 2)
    v = verify.random_state(np.random.default_rng(seed + 1), 2)
    code = CodeParams(3, 2)
    eu = pc.encode(*u, code).state.amplitudes
    ev = pc.encode(*v, code).state.amplitudes
    assert np.vdot(eu, ev) == pytest.approx(np.vdot(u, v), abs=1e-12)


def test_success_condition_examples():
    code = CodeParams(2, 2)
    assert pc.success_condition(pc.LossPattern.all_arrived(code))
    assert not pc.success_condition(pc.LossPattern.from_lost(code, [(0, 0), (0, 1)]))
    assert pc.success_condition(pc.LossPattern.from_lost(code, [(1, 0)]))
    # every block damaged: no intact block left
    assert not pc.success_condition(pc.LossPattern.from_lost(code, [(0, 0), (1, 1)]))


@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_success_mask_matches_definition(m, n, data):
    bits = data.draw(st.lists(st.booleans(), min_size=m * n, max_size=m * n))
    grid = np.array(bits).reshape(m, n)
    expected = grid.all(axis=0).any() and grid.any(axis=0).all()
    assert pc.success_condition(pc.LossPattern(grid)) == expected


def test_loss_pattern_indexing():
    pat = pc.LossPattern.from_lost(CodeParams(3, 2), [(1, 2)])
    assert pat.arrived.shape == (3, 2)
    assert not pat.arrived[2, 1]
    assert pat.lost() == [(1, 2)]
    with pytest.raises(ValueError):
        pc.LossPattern(np.ones(3, dtype=bool))


def test_brute_force_examples():
    assert pc.brute_force_failure_prob(0.9, CodeParams(2, 2)) == pytest.approx(0.0523, rel=1e-12)
    assert pc.brute_force_failure_prob(1.0, CodeParams(3, 3)) == 0.0
    assert pc.brute_force_failure_prob(0.95, CodeParams(3, 4)) == pytest.approx(
        9.122500468747575e-4, rel=1e-12
    )
    with pytest.raises(ValueError):
        pc.brute_force_failure_prob(0.9, CodeParams(5, 5))


@pytest.mark.parametrize("m, n", [(1, 1), (2, 2), (3, 3), (2, 5), (4, 4), (1, 12)])
@pytest.mark.parametrize("p", verify.ORACLE_PS)
def test_brute_force_matches_formula(m, n, p):
    code = CodeParams(m, n)
    exact = pc.brute_force_failure_prob(p, code)
    assert an.failure_probability(p, code) == pytest.approx(exact, rel=1e-9, abs=1e-300)


def test_recover_no_loss():
    a, b = rand_ab(1)
    code = CodeParams(3, 2)
    got = pc.recover(pc.encode(a, b, code), pc.LossPattern.all_arrived(code))
    assert overlap(got, [a, b]) == pytest.approx(1, abs=1e-10)


def test_recover_after_single_loss_every_branch():
    a, b = rand_ab(2)
    code = CodeParams(2, 2)
    pat = pc.LossPattern.from_lost(code, [(1, 0)])
    branches = pc.apply_loss_branches(pc.encode(a, b, code), pat)
    assert len(branches) == 2
    assert sum(w for w, _ in branches) == pytest.approx(1)
    for _, enc in branches:
        out = pc.recover_branches(enc, pat)
        assert sum(w for w, _ in out) == pytest.approx(1)
        for _, st_ in out:
            assert pc.logical_fidelity(a, b, st_) == pytest.approx(1, abs=1e-10)


def test_recover_heralds_failure():
    code = CodeParams(2, 2)
    pat = pc.LossPattern.from_lost(code, [(0, 0), (0, 1)])
    enc = pc.apply_loss(pc.encode(1, 0, code), pat, np.random.default_rng(0))
    with pytest.raises(pc.HeraldedFailure):
        pc.recover(enc, pat)


def test_failed_pattern_loses_information():
    code = CodeParams(2, 2)
    bad = pc.LossPattern.from_lost(code, [(0, 0), (0, 1)])
    good = pc.LossPattern.from_lost(code, [(0, 0)])
    assert verify.information_lost(code, bad) is not None
    assert verify.information_lost(code, good) is None


@pytest.mark.parametrize("code", verify.RECOVERY_CODES[:3], ids=str)
def test_recovery_iff_success_condition(code):
    res = verify.verify_recovery(codes=(code,))
    assert res.ok, res.failures
    assert res.passed == 2**code.total


def test_reencode_round_trip():
    a, b = rand_ab(3)
    code = CodeParams(3, 2)
    pat = pc.LossPattern.from_lost(code, [(0, 2)])
    rng = np.random.default_rng(4)
    enc = pc.apply_loss(pc.encode(a, b, code), pat, rng)
    again = pc.reencode(*pc.recover(enc, pat, rng), code)
    assert overlap(again.state.amplitudes, pc.logical_ket(a, b, code)) == pytest.approx(1, abs=1e-10)


def test_encode_site_keeps_entanglement():
    # half of a Bell pair encoded, recovered, still maximally entangled
    bell = sv.PureState(np.array([S, 0, 0, S], dtype=complex), ("keep", "in"))
    code = CodeParams(2, 2)
    enc = pc.encode_site(bell, "in", code)
    pat = pc.LossPattern.from_lost(code, [(0, 1)])
    ideal = sv.PureState(np.array([S, 0, 0, S], dtype=complex), ("keep", ("q", "logical")))
    for _, e in pc.apply_loss_branches(enc, pat):
        for _, st_ in pc.recover_branches(e, pat):
            assert sv.fidelity(st_, ideal) == pytest.approx(1, abs=1e-10)


def test_majority():
    assert pc.majority([1, 1, 0]) == 1
    assert pc.majority([0]) == 0
    assert pc.majority([1, 0]) == 1  # ties follow the first readout
    assert pc.majority([0, 1]) == 0


def test_vote_uses_every_survivor():
    # one flipped readout among three survivors is outvoted
    a, b = rand_ab(5)
    code = CodeParams(4, 2)
    pat = pc.LossPattern.from_lost(code, [(1, 0)])
    enc = pc.apply_loss(pc.encode(a, b, code), pat, np.random.default_rng(1))
    for j in (1, 2, 3):
        got = pc.recover(enc, pat, np.random.default_rng(2), meas_flips={(1, j): 1})
        assert overlap(got, [a, b]) == pytest.approx(1, abs=1e-10)
    two = {(1, 1): 1, (1, 2): 1}
    got = pc.recover(enc, pat, np.random.default_rng(2), meas_flips=two)
    # outvoted readouts leave a logical phase flip
    assert overlap(got, [a, -b]) == pytest.approx(1, abs=1e-10)


def test_correct_errors_single_flips():
    a, b = rand_ab(6)
    code = CodeParams(3, 3)
    enc = pc.encode(a, b, code)
    for x, z in [([(1, 2)], []), ([], [(2, 0)]), ([(0, 0), (2, 1)], [(1, 1)])]:
        fixed = pc.correct_errors(pc.inject_paulis(enc, x, z), intact_blocks=3)
        assert overlap(fixed.state.amplitudes, pc.logical_ket(a, b, code)) == pytest.approx(1, abs=1e-10)


def test_correct_errors_weight_two_miscorrects():
    a, b = rand_ab(7)
    code = CodeParams(3, 3)
    bad = pc.inject_paulis(pc.encode(a, b, code), [(0, 0), (0, 1)])
    fixed = pc.correct_errors(bad)
    # a full block of X is the logical phase flip
    flipped = pc.logical_ket(a, -b, code)
    assert overlap(fixed.state.amplitudes, flipped) == pytest.approx(1, abs=1e-10)


def test_correct_errors_after_loss_shrinks_code():
    code = CodeParams(3, 3)
    pat = pc.LossPattern.from_lost(code, [(2, 1)])
    enc = pc.apply_loss(pc.encode(S, S, code), pat, np.random.default_rng(0))
    out = pc.correct_errors(enc, intact_blocks=2)
    assert out.code == CodeParams(3, 2)
    with pytest.raises(ValueError):
        pc.correct_errors(enc, intact_blocks=3)


def test_ecc_suite():
    res = verify.verify_ecc()
    assert res.ok, res.failures


def test_error_sets_one_per_block_count():
    code = CodeParams(3, 3)
    sets = list(pc.error_sets_one_per_block(code))
    assert len(sets) == (code.m + 1) ** code.n
    assert all(len({b for b, _ in s}) == len(s) for s in sets)
