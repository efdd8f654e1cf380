"""Monte Carlo simulation of repeater chains and butterfly entanglement distribution.

Two engines share one configuration:

* :func:`run_chain` / :func:`run_butterfly` work at the level of loss patterns
  and Pauli error bits, vectorised over trials.
* :func:`run_chain_exact_small` pushes every trial through the state-vector
  pipeline (encode, transfer, loss, recover, re-encode) for tiny codes.

Error model (both engines): after each hop every received code qubit carries
an independent X flip and an independent Z flip, each with probability
``gate_error_rate``, and every Z readout of a loss-affected block is flipped
with probability ``meas_error_rate``.

Trials are grouped into fixed chunks of ``CHUNK`` trials. Chunk ``c`` draws from
``Philox`` keyed by ``SeedSequence(seed, spawn_key=(c,))``, so results do not
depend on how many threads process the chunks.
"""
from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import paritycode as pc
from . import statevec as sv
from . import transfer as tr
from .analytic import CodeParams, LinkBudget, link_probability

CHUNK = 4096
MODES = ("Direct", "Butterfly")


@dataclass(frozen=True)
class ChainConfig:
    hops: int
    budget: LinkBudget
    code: CodeParams
    qubits_per_photon: int = 1
    gate_error_rate: float = 0.0
    meas_error_rate: float = 0.0
    per_hop_transfer_fidelity: float = 1.0
    trials: int = 10_000
    seed: int = 0
    mode: str = "Direct"

    def __post_init__(self) -> None:
        if self.hops < 1:
            raise ValueError("hops must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for name in ("gate_error_rate", "meas_error_rate", "per_hop_transfer_fidelity"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        self.assignment()  # validates qubits_per_photon

    @property
    def p(self) -> float:
        return link_probability(self.budget)

    def assignment(self) -> tr.PhotonAssignment:
        return tr.default_assignment(self.code, self.qubits_per_photon)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["budget"] = asdict(self.budget)
        d["code"] = {"m": self.code.m, "n": self.code.n}
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class TrialStats:
    trials: int
    successes: int
    heralded_failures: int
    logical_errors: int
    success_rate: float
    success_stderr: float
    delivery_rate: float
    estimated_fidelity: float | None
    wall_clock: float = field(default=0.0, compare=False)

    @classmethod
    def from_counts(cls, trials, successes, heralded, logical, hop_fidelity=1.0, fid_sum=None):
        rate = successes / trials
        delivered = trials - heralded
        if delivered:
            mean_f = (successes / delivered) if fid_sum is None else fid_sum / delivered
            fid = mean_f * hop_fidelity
        else:
            fid = None
        return cls(
            trials=trials,
            successes=successes,
            heralded_failures=heralded,
            logical_errors=logical,
            success_rate=rate,
            success_stderr=math.sqrt(rate * (1 - rate) / trials),
            delivery_rate=delivered / trials,
            estimated_fidelity=fid,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("wall_clock")
        return d


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(chunk,))
    return np.random.Generator(np.random.Philox(ss))


def _chunks(trials: int) -> list[tuple[int, int]]:
    return [(c, min(CHUNK, trials - c * CHUNK)) for c in range(math.ceil(trials / CHUNK))]


# -- pattern-level decoding --------------------------------------------------


def _vote(bits: np.ndarray, present: np.ndarray, axis: int) -> np.ndarray:
    """Majority over ``present`` entries; ties keep the first present entry."""
    ones = (bits & present).sum(axis=axis)
    count = present.sum(axis=axis)
    first_idx = np.expand_dims(np.argmax(present, axis=axis), axis)
    first = np.squeeze(np.take_along_axis(bits, first_idx, axis=axis), axis=axis)
    return (2 * ones > count) | ((2 * ones == count) & first)


def hop_logical_error(
    arrived: np.ndarray,
    x_err: np.ndarray | None = None,
    z_err: np.ndarray | None = None,
    meas_flip: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Residual logical (X, Z) flips after one recovered hop.

    All arrays have shape ``(..., m, n)``. Only meaningful where the success
    condition holds. Mirrors :func:`paritycode.recover`: survivors of
    loss-affected blocks vote on the block's parity bit, intact blocks vote
    out bit flips internally and then vote across blocks on sign flips, led by
    the first intact block.
    """
    shape = arrived.shape
    zeros = np.zeros(shape, dtype=bool)
    x_err = zeros if x_err is None else x_err
    z_err = zeros if z_err is None else z_err
    meas_flip = zeros if meas_flip is None else meas_flip
    m = shape[-2]
    intact = arrived.all(axis=-2)  # (..., n)
    affected = ~intact

    # loss-affected blocks: wrong vote => logical phase flip
    reported = x_err ^ meas_flip
    wrong_vote = _vote(reported, arrived, axis=-2) & affected
    logical_z = np.logical_xor.reduce(wrong_vote, axis=-1)

    # intact blocks: bit-flip majority inside the block; a miscorrected block
    # carries X on every qubit, which is a logical phase flip
    lead_x = x_err[..., 0, :]
    disagree = (x_err != lead_x[..., None, :]).sum(axis=-2)
    residual_x = lead_x ^ (2 * disagree > m)
    logical_z ^= np.logical_xor.reduce(residual_x & intact, axis=-1)

    # sign flips: parity of Z errors per intact block, voted across intact blocks
    block_flip = (z_err.sum(axis=-2) % 2).astype(bool)
    lead_idx = np.argmax(intact, axis=-1)
    lead_flip = np.take_along_axis(block_flip, lead_idx[..., None], axis=-1)[..., 0]
    q = intact.sum(axis=-1)
    d = ((block_flip != lead_flip[..., None]) & intact).sum(axis=-1)
    logical_x = lead_flip ^ (2 * d > q)
    return logical_x, logical_z


def _side_hops(rng, cfg: ChainConfig, photon_of, size):
    """Simulate one direction of ``cfg.hops`` hops for ``size`` trials."""
    p = cfg.p
    m, n = cfg.code.m, cfg.code.n
    k = int(photon_of.max()) + 1
    delivered = np.ones(size, dtype=bool)
    lx = np.zeros(size, dtype=bool)
    lz = np.zeros(size, dtype=bool)
    noisy = cfg.gate_error_rate > 0 or cfg.meas_error_rate > 0
    for _ in range(cfg.hops):
        photons = rng.random((size, k)) < p
        arrived = photons[:, photon_of]
        delivered &= pc.success_mask(arrived)
        if noisy:
            x = rng.random((size, m, n)) < cfg.gate_error_rate
            z = rng.random((size, m, n)) < cfg.gate_error_rate
            f = rng.random((size, m, n)) < cfg.meas_error_rate
            hx, hz = hop_logical_error(arrived, x, z, f)
            lx ^= hx
            lz ^= hz
    return delivered, lx, lz


def _chunk_direct(cfg: ChainConfig, photon_of, chunk: int, size: int):
    rng = chunk_rng(cfg.seed, chunk)
    ok, lx, lz = _side_hops(rng, cfg, photon_of, size)
    err = ok & (lx | lz)
    return int((ok & ~err).sum()), int((~ok).sum()), int(err.sum())


def _chunk_butterfly(cfg: ChainConfig, photon_of, chunk: int, size: int):
    rng = chunk_rng(cfg.seed, chunk)
    ok_l, lx_l, lz_l = _side_hops(rng, cfg, photon_of, size)
    ok_r, lx_r, lz_r = _side_hops(rng, cfg, photon_of, size)
    ok = ok_l & ok_r
    # XX and ZZ leave the Bell pair unchanged
    err = ok & ((lx_l ^ lx_r) | (lz_l ^ lz_r))
    return int((ok & ~err).sum()), int((~ok).sum()), int(err.sum())


def _run(cfg: ChainConfig, worker, threads: int, hop_count: int) -> TrialStats:
    t0 = time.perf_counter()
    photon_of = cfg.assignment().photon_grid()
    jobs = _chunks(cfg.trials)
    if threads <= 1:
        parts = [worker(cfg, photon_of, c, s) for c, s in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda cs: worker(cfg, photon_of, *cs), jobs))
    succ, her, log = (sum(col) for col in zip(*parts))
    stats = TrialStats.from_counts(
        cfg.trials, succ, her, log, cfg.per_hop_transfer_fidelity**hop_count
    )
    stats.wall_clock = time.perf_counter() - t0
    return stats


def run_chain(cfg: ChainConfig, threads: int = 1) -> TrialStats:
    """End-to-end transmission of one logical qubit over ``cfg.hops`` hops.

    A trial is a heralded failure if any hop violates the success condition;
    otherwise it counts as a logical error when residual Pauli flips remain.
    """
    return _run(cfg, _chunk_direct, threads, cfg.hops)


def run_butterfly(cfg: ChainConfig, threads: int = 1) -> TrialStats:
    """Encoded Bell pair from a central node, ``cfg.hops`` hops in each direction."""
    return _run(cfg, _chunk_butterfly, threads, 2 * cfg.hops)


def majority_vote_logical_error(m_survivors: int, meas_error_rate: float) -> float:
    """Probability that the block vote returns the wrong parity bit.

    More than half the readouts flipped, or exactly half with the first one
    among them (ties trust the first survivor).
    """
    s, q = m_survivors, meas_error_rate
    if s < 1:
        raise ValueError("need at least one survivor")
    if not 0 <= q <= 1:
        raise ValueError(f"meas_error_rate={q} outside [0, 1]")
    total = sum(math.comb(s, k) * q**k * (1 - q) ** (s - k) for k in range(s // 2 + 1, s + 1))
    if s % 2 == 0:
        total += math.comb(s - 1, s // 2 - 1) * q ** (s // 2) * (1 - q) ** (s // 2)
    return total


def simulate_majority_vote(
    m_survivors: int, meas_error_rate: float, trials: int, seed: int = 0
) -> tuple[float, float]:
    """Monte Carlo of :func:`majority_vote_logical_error`: ``(rate, stderr)``."""
    wrong = 0
    for c, size in _chunks(trials):
        rng = chunk_rng(seed, c)
        flips = rng.random((size, m_survivors, 1)) < meas_error_rate
        present = np.ones_like(flips)
        wrong += int(_vote(flips, present, axis=-2).sum())
    rate = wrong / trials
    return rate, math.sqrt(rate * (1 - rate) / trials)


# -- exact state-vector engine -------------------------------------------------


def _exact_hop(state, name, nxt, cfg, assignment, rng):
    """Transmit the code named ``name`` one hop; returns the state with the
    decoded logical qubit re-encoded under ``nxt``."""
    code = cfg.code
    p = cfg.p
    arrived = np.zeros((code.m, code.n), dtype=bool)
    rx = ("rx", name)
    for t, qubits in enumerate(assignment.photons()):
        matter = [(name, b, j) for b, j in qubits]
        modes = [("mode", name, t, i) for i in range(2 ** len(qubits))]
        state, rec = tr.matter_to_photon_multi(state, matter, modes, rng=rng)
        if rng.random() < p:
            recv = [(rx, b, j) for b, j in qubits]
            state, _ = tr.photon_to_matter_multi(
                state, modes, recv, rec, sender=matter, rng=rng
            )
            for b, j in qubits:
                arrived[j, b] = True
        else:
            for lab in modes:
                _, _, state = sv.measure(state, lab, "Z", rng=rng)
    pattern = pc.LossPattern(arrived)
    if not pc.success_condition(pattern):
        raise pc.HeraldedFailure(str(pattern.lost()))
    state = sv.apply_frame(state)
    flips = {}
    for b in range(code.n):
        for j in range(code.m):
            if not arrived[j, b]:
                continue
            if rng.random() < cfg.gate_error_rate:
                state = sv.apply_1q(state, (rx, b, j), "X")
            if rng.random() < cfg.gate_error_rate:
                state = sv.apply_1q(state, (rx, b, j), "Z")
            if rng.random() < cfg.meas_error_rate:
                flips[(b, j)] = 1
    enc = pc.EncodedState(code, state, rx, frozenset(pattern.lost()))
    state = pc.recover_state(enc, pattern, rng, flips)
    return pc.encode_site(state, (rx, "logical"), code, nxt).state


def _random_qubit(rng) -> np.ndarray:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


def run_chain_exact_small(cfg: ChainConfig) -> TrialStats:
    """State-vector version of :func:`run_chain` (or :func:`run_butterfly`).

    Limited to ``m*n <= 9`` and ``hops <= 3``. Each trial sends a random
    input qubit (or one half of a Bell pair per direction), and the trial is
    a logical error when the output fidelity falls below ``1 - 1e-6``.
    """
    if cfg.code.total > 9 or cfg.hops > 3:
        raise ValueError("exact engine limited to m*n <= 9 and hops <= 3")
    t0 = time.perf_counter()
    assignment = cfg.assignment()
    sides = ["L", "R"] if cfg.mode == "Butterfly" else ["L"]
    succ = her = log = 0
    fid_sum = 0.0
    for trial in range(cfg.trials):
        rng = chunk_rng(cfg.seed, trial)
        if cfg.mode == "Butterfly":
            target = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
        else:
            target = _random_qubit(rng)
        state = sv.PureState(target, tuple((s, "in") for s in sides))
        for s in sides:
            state = pc.encode_site(state, (s, "in"), cfg.code, (s, 0)).state
        try:
            for s in sides:
                for h in range(cfg.hops):
                    state = _exact_hop(state, (s, h), (s, h + 1), cfg, assignment, rng)
        except pc.HeraldedFailure:
            her += 1
            continue
        # decode the final encodings without loss
        for s in sides:
            enc = pc.EncodedState(cfg.code, state, (s, cfg.hops))
            state = pc.recover_state(enc, pc.LossPattern.all_arrived(cfg.code), rng)
        out = sv.reorder(state, [((s, cfg.hops), "logical") for s in sides])
        f = float(abs(np.vdot(target, out.amplitudes)) ** 2)
        fid_sum += f
        if f < 1 - 1e-6:
            log += 1
        else:
            succ += 1
    hop_count = cfg.hops * len(sides)
    stats = TrialStats.from_counts(
        cfg.trials, succ, her, log, cfg.per_hop_transfer_fidelity**hop_count, fid_sum
    )
    stats.wall_clock = time.perf_counter() - t0
    return stats
