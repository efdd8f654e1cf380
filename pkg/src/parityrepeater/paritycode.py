"""Redundant quantum parity code.

A logical qubit ``alpha|0> + beta|1>`` is stored as::

    alpha |+>_1 ... |+>_n + beta |->_1 ... |->_n,   |+-> = (|0...0> +- |1...1>)/sqrt(2)

over ``n`` blocks of ``m`` physical qubits. Physical qubit ``j`` of block ``b``
lives on the site labelled ``(name, b, j)``; ``(b, j)`` also indexes the
``m x n`` arrival grid of a :class:`LossPattern` as ``arrived[j, b]``.

Majority votes on an even number of bits that tie keep the value of the
lowest-indexed qubit.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable

import numpy as np

from . import statevec as sv
from .analytic import CodeParams


class HeraldedFailure(RuntimeError):
    """The loss pattern is known to be unrecoverable."""


@dataclass(frozen=True)
class LossPattern:
    arrived: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.arrived, dtype=bool)
        if arr.ndim != 2:
            raise ValueError("loss pattern must be an m x n grid")
        object.__setattr__(self, "arrived", arr)

    @property
    def code(self) -> CodeParams:
        return CodeParams(*self.arrived.shape)

    @classmethod
    def all_arrived(cls, code: CodeParams) -> "LossPattern":
        return cls(np.ones((code.m, code.n), dtype=bool))

    @classmethod
    def from_lost(cls, code: CodeParams, lost) -> "LossPattern":
        """Pattern with the ``(block, position)`` pairs in ``lost`` missing."""
        arr = np.ones((code.m, code.n), dtype=bool)
        for b, j in lost:
            arr[j, b] = False
        return cls(arr)

    def lost(self) -> list[tuple[int, int]]:
        js, bs = np.nonzero(~self.arrived)
        return sorted(zip(bs.tolist(), js.tolist()))


@dataclass
class EncodedState:
    code: CodeParams
    state: sv.PureState
    name: Hashable = "q"
    lost: frozenset = field(default_factory=frozenset)

    def site(self, block: int, pos: int) -> tuple:
        return (self.name, block, pos)

    @property
    def frame(self) -> sv.PauliFrame:
        return self.state.frame


def all_patterns(code: CodeParams) -> np.ndarray:
    """Every arrival grid, shape ``(2**(m*n), m, n)``; bit ``b*m+j`` is qubit (b, j)."""
    k = code.total
    idx = np.arange(2**k, dtype=np.int64)[:, None]
    bits = ((idx >> np.arange(k)) & 1).astype(bool)
    return bits.reshape(-1, code.n, code.m).transpose(0, 2, 1)


def success_mask(arrived: np.ndarray) -> np.ndarray:
    """Vectorised success condition over grids of shape ``(..., m, n)``."""
    full = arrived.all(axis=-2)
    some = arrived.any(axis=-2)
    return full.any(axis=-1) & some.all(axis=-1)


def success_condition(pattern: LossPattern) -> bool:
    """At least one block fully arrived and at least one qubit of every block."""
    return bool(success_mask(pattern.arrived))


def brute_force_failure_prob(p: float, code: CodeParams) -> float:
    """Failure probability by summing over every independent-loss pattern."""
    if code.total > 20:
        raise ValueError("brute force limited to m*n <= 20")
    if not 0 <= p <= 1:
        raise ValueError(f"p={p} outside [0, 1]")
    grids = all_patterns(code)
    arrived = grids.reshape(len(grids), -1).sum(axis=1)
    weights = p**arrived * (1 - p) ** (code.total - arrived)
    return float(np.sort(weights[~success_mask(grids)]).sum())


# -- encoding ---------------------------------------------------------------


def encode_site(
    state: sv.PureState, site: Hashable, code: CodeParams, name: Hashable = "q"
) -> EncodedState:
    """Expand the qubit on ``site`` into the (m, n) code, in place.

    Fan out across the block leaders, rotate each leader to the +/- basis,
    then fan out within every block. Linear, so it works on entangled inputs.
    """
    leaders = [(name, b, 0) for b in range(code.n)]
    others = [(name, b, j) for b in range(code.n) for j in range(1, code.m)]
    state = sv.add_sites(state, leaders[1:] + others)
    state = _relabel(state, site, leaders[0])
    for lab in leaders[1:]:
        state = sv.apply_cnot(state, leaders[0], lab)
    for lab in leaders:
        state = sv.apply_1q(state, lab, "H")
    for b in range(code.n):
        for j in range(1, code.m):
            state = sv.apply_cnot(state, (name, b, 0), (name, b, j))
    ours = code_labels(code, name)
    rest = [lab for lab in state.labels if lab not in set(ours)]
    return EncodedState(code, sv.reorder(state, rest + ours), name)


def encode(alpha: complex, beta: complex, code: CodeParams, name: Hashable = "q") -> EncodedState:
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1) > sv.ATOL:
        raise ValueError("|alpha|^2 + |beta|^2 must equal 1")
    seed = sv.PureState(np.array([alpha, beta], dtype=complex), ("in",))
    return encode_site(seed, "in", code, name)


def reencode(alpha: complex, beta: complex, code: CodeParams, name: Hashable = "q") -> EncodedState:
    """Fresh full-size encoding of a recovered logical state."""
    return encode(alpha, beta, code, name)


def logical_ket(alpha: complex, beta: complex, code: CodeParams) -> np.ndarray:
    """The codeword amplitude vector built directly from its definition."""
    zeros = np.zeros(2**code.m, dtype=complex)
    zeros[0] = zeros[-1] = 1 / np.sqrt(2)
    plus = zeros.copy()
    minus = zeros.copy()
    minus[-1] *= -1
    plus_n = np.ones(1, dtype=complex)
    minus_n = np.ones(1, dtype=complex)
    for _ in range(code.n):
        plus_n = np.kron(plus_n, plus)
        minus_n = np.kron(minus_n, minus)
    return alpha * plus_n + beta * minus_n


def code_labels(code: CodeParams, name: Hashable = "q") -> list[tuple]:
    return [(name, b, j) for b in range(code.n) for j in range(code.m)]


def _relabel(state: sv.PureState, old: Hashable, new: Hashable) -> sv.PureState:
    labels = tuple(new if lab == old else lab for lab in state.labels)
    frame = state.frame.copy()
    if old in frame.flags:
        frame.flags[new] = frame.flags.pop(old)
    return sv.PureState(state.amplitudes, labels, state.roles, frame)


# -- loss --------------------------------------------------------------------


def apply_loss_branches(encoded: EncodedState, pattern: LossPattern) -> list[tuple[float, EncodedState]]:
    """Erase every lost qubit; returns all environment-outcome branches."""
    if pattern.arrived.shape != (encoded.code.m, encoded.code.n):
        raise ValueError("pattern shape does not match the code")
    branches = [(1.0, encoded.state)]
    for b, j in pattern.lost():
        lab = encoded.site(b, j)
        branches = [(w * pr, st) for w, s in branches for pr, st in sv.erase(s, lab)]
    lost = frozenset(pattern.lost()) | encoded.lost
    return [(w, EncodedState(encoded.code, st, encoded.name, lost)) for w, st in branches]


def apply_loss(
    encoded: EncodedState, pattern: LossPattern, rng: np.random.Generator
) -> EncodedState:
    """Sampled version of :func:`apply_loss_branches`."""
    state = encoded.state
    for b, j in pattern.lost():
        _, _, state = sv.measure(state, encoded.site(b, j), "Z", rng=rng)
    lost = frozenset(pattern.lost()) | encoded.lost
    return EncodedState(encoded.code, state, encoded.name, lost)


# -- recovery ----------------------------------------------------------------


def majority(bits, tie_first: bool = True) -> int:
    """Majority of ``bits``; an even split returns ``bits[0]``."""
    bits = list(bits)
    ones = sum(bits)
    if 2 * ones == len(bits):
        return bits[0] if tie_first else 0
    return int(2 * ones > len(bits))


class _Branches:
    """Tracks every measurement branch of a recovery, or one sampled branch."""

    def __init__(self, state: sv.PureState, rng: np.random.Generator | None):
        self.items = [(1.0, state, {})]
        self.rng = rng

    def map(self, fn) -> None:
        self.items = [(w, fn(st), info) for w, st, info in self.items]

    def measure(self, site, basis, key) -> None:
        out = []
        for w, st, info in self.items:
            if self.rng is None:
                results = sv.measure_branches(st, site, basis)
            else:
                results = [sv.measure(st, site, basis, rng=self.rng)]
            for bit, pr, post in results:
                out.append((w * pr, post, {**info, key: bit}))
        self.items = out

    def classical(self, fn) -> None:
        """``fn(state, info) -> state`` applied per branch using its record."""
        self.items = [(w, fn(st, info), info) for w, st, info in self.items]


def _decode_repetition(br: _Branches, sites: list, tag) -> None:
    """Collapse a bit-repetition register onto ``sites[0]`` with majority voting.

    Reverse fan-out turns the other sites into syndrome bits (disagreement
    with the leader); the leader is flipped when a strict majority of the
    register disagrees with it.
    """
    lead = sites[0]
    for s in sites[1:]:
        br.map(lambda st, s=s: sv.apply_cnot(st, lead, s))
    for k, s in enumerate(sites[1:]):
        br.measure(s, "Z", (tag, k))

    def fix(st, info):
        syn = [info[(tag, k)] for k in range(len(sites) - 1)]
        if 2 * sum(syn) > len(sites):
            st = sv.apply_1q(st, lead, "X")
        return st

    br.classical(fix)


def _run_recovery(
    encoded: EncodedState,
    pattern: LossPattern,
    rng: np.random.Generator | None,
    meas_flips: dict | None = None,
) -> tuple[_Branches, Hashable]:
    if not success_condition(pattern):
        raise HeraldedFailure(f"unrecoverable loss pattern {pattern.lost()}")
    code, name = encoded.code, encoded.name
    arrived = pattern.arrived
    intact = [b for b in range(code.n) if arrived[:, b].all()]
    affected = [b for b in range(code.n) if not arrived[:, b].all()]
    meas_flips = meas_flips or {}

    br = _Branches(encoded.state, rng)
    # disentangle loss-affected blocks: Z-measure every survivor, vote on the parity bit
    for b in affected:
        survivors = [j for j in range(code.m) if arrived[j, b]]
        for j in survivors:
            br.measure((name, b, j), "Z", ("aff", b, j))
    out = (name, "logical")
    lead = (name, intact[0], 0)

    def vote(st, info):
        z = 0
        for b in affected:
            bits = [
                info[("aff", b, j)] ^ meas_flips.get((b, j), 0)
                for j in range(code.m)
                if arrived[j, b]
            ]
            z ^= majority(bits)
        if z:
            # X on a whole block is the logical phase flip
            for j in range(code.m):
                st = sv.apply_1q(st, (name, intact[0], j), "X")
        return st

    br.classical(vote)
    # intact blocks: bit-flip majority inside each block
    for b in intact:
        _decode_repetition(br, [(name, b, j) for j in range(code.m)], ("blk", b))
    # sign-flip majority across blocks
    leaders = [(name, b, 0) for b in intact]
    for lab in leaders:
        br.map(lambda st, lab=lab: sv.apply_1q(st, lab, "H"))
    _decode_repetition(br, leaders, "across")
    br.map(lambda st: sv.apply_frame(_relabel(st, lead, out)))
    return br, out


def recover_branches(
    encoded: EncodedState, pattern: LossPattern, meas_flips: dict | None = None
) -> list[tuple[float, sv.PureState]]:
    """Every measurement branch of :func:`recover` with its probability.

    Each returned state holds the decoded logical qubit on ``(name, "logical")``
    plus any sites outside this code (for example the other half of a Bell pair).
    ``meas_flips`` maps ``(block, pos)`` to a classical readout error bit.
    """
    br, _ = _run_recovery(encoded, pattern, None, meas_flips)
    return [(w, st) for w, st, _ in br.items]


def recover_state(
    encoded: EncodedState,
    pattern: LossPattern,
    rng: np.random.Generator,
    meas_flips: dict | None = None,
) -> sv.PureState:
    """One sampled recovery branch (see :func:`recover_branches`)."""
    br, _ = _run_recovery(encoded, pattern, rng, meas_flips)
    return br.items[0][1]


def recover(
    encoded: EncodedState,
    pattern: LossPattern,
    rng: np.random.Generator | None = None,
    meas_flips: dict | None = None,
) -> tuple[complex, complex]:
    """Decode to ``(alpha, beta)``; raises :class:`HeraldedFailure` when impossible.

    Only valid when the code is the whole register. Global phase is fixed so
    that the first non-zero amplitude is real and positive.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    st = recover_state(encoded, pattern, rng, meas_flips)
    if st.num_sites != 1:
        raise ValueError("register holds sites outside the code; use recover_branches")
    a, b = st.amplitudes
    ref = a if abs(a) > sv.ATOL else b
    phase = np.conj(ref) / abs(ref)
    return complex(a * phase), complex(b * phase)


def correct_errors(
    encoded: EncodedState, intact_blocks: int | None = None, rng: np.random.Generator | None = None
) -> EncodedState:
    """Majority-correct bit flips inside blocks and sign flips across blocks.

    The surviving ``q`` intact blocks are decoded and re-encoded as a clean
    (m, q) code. Up to ``(m-1)//2`` X errors per block and Z errors on up to
    ``(q-1)//2`` blocks are removed; heavier errors can leave a logical error.
    """
    code = encoded.code
    lost = set(encoded.lost)
    lost_blocks = {b for b, _ in lost}
    q = code.n - len(lost_blocks)
    if intact_blocks is not None and intact_blocks != q:
        raise ValueError(f"expected {intact_blocks} intact blocks, found {q}")
    pattern = LossPattern.from_lost(code, lost)
    alpha, beta = recover(encoded, pattern, rng)
    return encode(alpha, beta, CodeParams(code.m, q), encoded.name)


def inject_paulis(encoded: EncodedState, x_sites=(), z_sites=()) -> EncodedState:
    """Apply X on ``x_sites`` and Z on ``z_sites`` given as (block, pos)."""
    st = encoded.state
    for b, j in x_sites:
        st = sv.apply_1q(st, encoded.site(b, j), "X")
    for b, j in z_sites:
        st = sv.apply_1q(st, encoded.site(b, j), "Z")
    return EncodedState(encoded.code, st, encoded.name, encoded.lost)


def logical_fidelity(alpha: complex, beta: complex, st: sv.PureState) -> float:
    """Overlap of a single decoded site with ``alpha|0> + beta|1>``."""
    return float(abs(np.vdot([alpha, beta], st.amplitudes)) ** 2)


def iter_patterns(code: CodeParams):
    for grid in all_patterns(code):
        yield LossPattern(grid)


def error_sets_one_per_block(code: CodeParams):
    """Every choice of at most one qubit per block."""
    per_block = [[None] + list(range(code.m))] * code.n
    for choice in itertools.product(*per_block):
        yield [(b, j) for b, j in enumerate(choice) if j is not None]
