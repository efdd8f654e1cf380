"""Matter <-> photon state transfer and multi-qubit-per-photon layouts.

Each photon is a group of two-level mode sites holding a single excitation.
A dual-rail photon has modes ``(r0, r1)``; a ``k``-qubit spatial-mode photon
has ``2**k`` modes. The ideal cavity interaction is a CPhase between a matter
qubit and one mode's occupation.

Mode ``i`` of a ``2**k``-mode photon interacts with matter qubit ``t`` iff bit
``t`` (least significant first) of ``i`` is set; for two qubits the first
matter qubit touches modes 1 and 3 and the second touches modes 2 and 3
(zero-based). The sign pattern is a Hadamard matrix, so the mode amplitudes
are an invertible transform of the matter amplitudes. Interacting with modes
1 and 3 only would leave modes 0 and 2 identical and lose half the state.
For ``k = 1`` this is the dual-rail scheme: only the second rail interacts.

The receiver's interferometer (a 50/50 beamsplitter for ``k = 1``) is modelled
as a unitary mapping the Hadamard mode basis onto single modes, followed by
detection of which mode clicked. Outcome bits map onto X corrections of the
receiving matter qubits; the sender's +/- readouts map onto Z corrections.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from . import statevec as sv
from .analytic import CodeParams


@dataclass
class TransferRecord:
    outcomes: tuple = ()
    corrections: dict = field(default_factory=dict)  # label -> (x, z)

    def merge(self, other: "TransferRecord") -> "TransferRecord":
        corr = dict(self.corrections)
        for lab, (x, z) in other.corrections.items():
            ox, oz = corr.get(lab, (0, 0))
            corr[lab] = (ox ^ x, oz ^ z)
        return TransferRecord(self.outcomes + other.outcomes, corr)


def hadamard_signs(k: int) -> np.ndarray:
    """``signs[i, a] = (-1)**popcount(i & a)`` over ``2**k`` modes / matter states."""
    idx = np.arange(2**k)
    return np.array(
        [[(-1) ** bin(i & a).count("1") for a in idx] for i in idx], dtype=float
    )


def _single_excitation_unitary(k: int) -> np.ndarray:
    """Interferometer on ``2**k`` mode sites: Hadamard on the one-photon subspace."""
    modes = 2**k
    dim = 2**modes
    u = np.eye(dim, dtype=complex)
    one_hot = [1 << (modes - 1 - i) for i in range(modes)]
    h = hadamard_signs(k) / math.sqrt(modes)
    for r, row in enumerate(one_hot):
        for c, col in enumerate(one_hot):
            u[row, col] = h[r, c]
    return u


def mode_signs(k: int) -> np.ndarray:
    """``signs[i, a]``: phase picked up by mode ``i`` for matter basis state ``a``.

    ``a`` is read with matter qubit 0 as its most significant bit.
    """
    out = np.empty((2**k, 2**k))
    for i in range(2**k):
        for a in range(2**k):
            hits = sum((i >> t) & (a >> (k - 1 - t)) & 1 for t in range(k))
            out[i, a] = (-1) ** hits
    return out


def _interacting_modes(k: int, t: int) -> list[int]:
    return [i for i in range(2**k) if (i >> t) & 1]


def _uniform_photon(modes: int) -> np.ndarray:
    amps = np.zeros(2**modes, dtype=complex)
    for i in range(modes):
        amps[1 << (modes - 1 - i)] = 1 / math.sqrt(modes)
    return amps


def _pick(outcome, rng):
    if outcome is None and rng is None:
        raise ValueError("either rng or a forced outcome must be given")
    return outcome


def matter_to_photon_multi(
    state: sv.PureState,
    matter: Sequence[Hashable],
    modes: Sequence[Hashable],
    *,
    outcomes: Sequence[int] | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[sv.PureState, TransferRecord]:
    """Move ``k`` matter qubits onto one photon spread over ``2**k`` modes.

    The matter sites are read out in the +/- basis and removed. Their
    outcomes are stored as Z corrections keyed by the matter labels, to be
    re-attached to the receiving matter qubits by :func:`photon_to_matter_multi`.
    """
    k = len(matter)
    if len(modes) != 2**k:
        raise ValueError(f"{k} matter qubits need {2**k} modes, got {len(modes)}")
    state = sv.add_sites(state, modes, _uniform_photon(2**k), role="photon")
    for t, lab in enumerate(matter):
        for i in _interacting_modes(k, t):
            state = sv.apply_cphase(state, lab, modes[i])
    got = []
    corr = {}
    for t, lab in enumerate(matter):
        forced = None if outcomes is None else outcomes[t]
        _pick(forced, rng)
        bit, _, state = sv.measure(state, lab, "X", rng=rng, forced=forced)
        got.append(bit)
        corr[lab] = (0, bit)
    return state, TransferRecord(tuple(got), corr)


def photon_to_matter_multi(
    state: sv.PureState,
    modes: Sequence[Hashable],
    matter: Sequence[Hashable],
    record: TransferRecord | None = None,
    *,
    sender: Sequence[Hashable] | None = None,
    outcome: int | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[sv.PureState, TransferRecord]:
    """Move a ``2**k``-mode photon onto ``k`` fresh matter qubits.

    The receivers start in ``|g>+|e>``, interact with the same modes as on the
    sending side, and the photon is detected after the interferometer. The
    detected mode index supplies X corrections; the sender's Z corrections
    from ``record`` (matched positionally via ``sender``) are carried over.
    Corrections are written into the state's Pauli frame.
    """
    k = int(round(math.log2(len(modes))))
    if 2**k != len(modes) or len(matter) != k:
        raise ValueError("need 2**k modes for k matter qubits")
    plus = np.full(2**k, 1 / math.sqrt(2**k), dtype=complex)
    state = sv.add_sites(state, matter, plus)
    for t, lab in enumerate(matter):
        for i in _interacting_modes(k, t):
            state = sv.apply_cphase(state, lab, modes[i])
    state = sv.apply_unitary(state, modes, _single_excitation_unitary(k))
    click, state = _detect(state, modes, outcome, rng)
    corr = {}
    for t, lab in enumerate(matter):
        corr[lab] = ((click >> t) & 1, 0)
    if record is not None:
        sender = list(sender) if sender is not None else list(record.corrections)
        for src, lab in zip(sender, matter):
            x, z = record.corrections.get(src, (0, 0))
            ox, oz = corr[lab]
            corr[lab] = (ox ^ x, oz ^ z)
    for lab, (x, z) in corr.items():
        state.frame.add(lab, x, z)
    return state, TransferRecord((click,), corr)


def _detect(state, modes, outcome, rng):
    """Which-mode detection; removes the mode sites."""
    n = len(modes)
    probs = []
    for i in range(n):
        st = state
        p = 1.0
        ok = True
        for j, lab in enumerate(modes):
            try:
                _, pr, st = sv.measure(st, lab, "Z", forced=int(i == j))
            except sv.ZeroProbabilityOutcome:
                ok = False
                break
            p *= pr
        probs.append((p if ok else 0.0, st if ok else None))
    if outcome is None:
        if rng is None:
            raise ValueError("either rng or a forced outcome must be given")
        w = np.array([p for p, _ in probs])
        outcome = int(rng.choice(n, p=w / w.sum()))
    p, st = probs[outcome]
    if st is None or p <= sv.ATOL**2:
        raise sv.ZeroProbabilityOutcome(f"detector {outcome} cannot click")
    return outcome, st


def matter_to_photon(
    state: sv.PureState,
    matter_site: Hashable,
    rails: Sequence[Hashable] = ("r0", "r1"),
    *,
    outcome: int | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[sv.PureState, TransferRecord]:
    """Dual-rail transmitter: photon starts in ``|01>+|10>``; matter is read out in +/-."""
    return matter_to_photon_multi(
        state, [matter_site], list(rails),
        outcomes=None if outcome is None else [outcome], rng=rng,
    )


def photon_to_matter(
    state: sv.PureState,
    rails: Sequence[Hashable],
    matter_site: Hashable,
    record: TransferRecord | None = None,
    *,
    sender_site: Hashable | None = None,
    outcome: int | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[sv.PureState, TransferRecord]:
    """Dual-rail receiver: CPhase, beamsplitter, which-detector readout."""
    return photon_to_matter_multi(
        state, list(rails), [matter_site], record,
        sender=None if sender_site is None else [sender_site],
        outcome=outcome, rng=rng,
    )


def two_qubit_to_four_mode(
    alphas: Sequence[complex],
    outcomes: tuple[int, int] | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, TransferRecord]:
    """Load a two-qubit matter state onto one photon over four spatial modes.

    ``alphas`` are the amplitudes of ``|gg>, |ge>, |eg>, |ee>``. Returns the
    normalised four-mode amplitude vector and the transfer record.
    """
    alphas = np.asarray(alphas, dtype=complex)
    if alphas.shape != (4,) or abs(np.linalg.norm(alphas) - 1) > sv.ATOL:
        raise ValueError("need four normalised amplitudes")
    st = sv.PureState(alphas, ("m0", "m1"))
    modes = [("mode", i) for i in range(4)]
    st, rec = matter_to_photon_multi(st, ["m0", "m1"], modes, outcomes=outcomes, rng=rng)
    return mode_amplitudes(st, modes), rec


def four_mode_to_two_qubit(
    mode_amps: Sequence[complex],
    record: TransferRecord | None = None,
    outcome: int | None = None,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Receive a four-mode photon onto two matter qubits, frame applied.

    ``record`` is the sender's; without it the sender's Z corrections are not
    undone. Returns the amplitudes of ``|gg>, |ge>, |eg>, |ee>``.
    """
    mode_amps = np.asarray(mode_amps, dtype=complex)
    if mode_amps.shape != (4,):
        raise ValueError("need four mode amplitudes")
    norm = np.linalg.norm(mode_amps)
    if norm < sv.ATOL:
        raise ValueError("photon state is empty")
    modes = [("mode", i) for i in range(4)]
    st = photon_state(mode_amps / norm, modes)
    sender = None
    if record is not None:
        sender = list(record.corrections)
    st, _ = photon_to_matter_multi(
        st, modes, ["m0", "m1"], record, sender=sender, outcome=outcome, rng=rng
    )
    return sv.reorder(sv.apply_frame(st), ["m0", "m1"]).amplitudes


def photon_state(mode_amps: Sequence[complex], modes: Sequence[Hashable]) -> sv.PureState:
    """Single-photon register with amplitude ``mode_amps[i]`` on mode ``i``."""
    n = len(modes)
    amps = np.zeros(2**n, dtype=complex)
    for i, a in enumerate(mode_amps):
        amps[1 << (n - 1 - i)] = a
    return sv.PureState(amps, tuple(modes), ("photon",) * n)


def mode_amplitudes(state: sv.PureState, modes: Sequence[Hashable]) -> np.ndarray:
    """Amplitudes of the one-excitation components, when the photon is unentangled."""
    st = sv.reorder(state, list(modes) + [l for l in state.labels if l not in modes])
    n = len(modes)
    block = st.amplitudes.reshape(2**n, -1)
    rows = block[[1 << (n - 1 - i) for i in range(n)]]
    # pick the column carrying the photon (rest of register is a product factor)
    col = int(np.argmax(np.linalg.norm(rows, axis=0)))
    vec = rows[:, col]
    return vec / np.linalg.norm(vec)


def expected_four_mode(alphas: Sequence[complex], outcomes: tuple[int, int]) -> np.ndarray:
    """Closed form of :func:`two_qubit_to_four_mode` for given +/- outcomes."""
    a = np.asarray(alphas, dtype=complex)
    s0, s1 = (-1) ** outcomes[0], (-1) ** outcomes[1]
    signed = a * np.array([1, s1, s0, s0 * s1])
    vec = mode_signs(2) @ signed
    return vec / np.linalg.norm(vec)


# -- photon assignments ------------------------------------------------------


@dataclass(frozen=True)
class PhotonAssignment:
    """Which photon carries each code qubit, keyed by ``(block, position)``."""

    code: CodeParams
    mapping: dict
    photon_count: int

    @property
    def qubits_per_photon(self) -> int:
        counts = np.bincount(list(self.mapping.values()), minlength=self.photon_count)
        return int(counts.max())

    @property
    def modes_per_photon(self) -> int:
        return 2**self.qubits_per_photon

    def validate(self) -> None:
        want = {(b, j) for b in range(self.code.n) for j in range(self.code.m)}
        if set(self.mapping) != want:
            raise ValueError("every code qubit must be mapped to exactly one photon")
        seen = set()
        for (b, _), t in self.mapping.items():
            if not 0 <= t < self.photon_count:
                raise ValueError(f"photon index {t} out of range")
            if (b, t) in seen:
                raise ValueError(f"photon {t} carries two qubits of block {b}")
            seen.add((b, t))

    def photon_grid(self) -> np.ndarray:
        grid = np.empty((self.code.m, self.code.n), dtype=np.int64)
        for (b, j), t in self.mapping.items():
            grid[j, b] = t
        return grid

    def photons(self) -> list[list[tuple[int, int]]]:
        out = [[] for _ in range(self.photon_count)]
        for q in sorted(self.mapping, key=lambda bj: (bj[1], bj[0])):
            out[self.mapping[q]].append(q)
        return out


def default_assignment(code: CodeParams, qubits_per_photon: int) -> PhotonAssignment:
    """Round-robin layout: walk qubits position-major and fill photons ``k`` at a time.

    Consecutive entries of a position row are distinct blocks, and a photon
    straddling two rows takes the tail of one and the head of the next, which
    are distinct whenever ``k <= n``.
    """
    k = qubits_per_photon
    if not 1 <= k <= code.n:
        raise ValueError(f"qubits_per_photon must be in [1, n={code.n}], got {k}")
    order = [(b, j) for j in range(code.m) for b in range(code.n)]
    mapping = {q: i // k for i, q in enumerate(order)}
    out = PhotonAssignment(code, mapping, math.ceil(code.total / k))
    out.validate()
    return out


def identity_assignment(code: CodeParams) -> PhotonAssignment:
    return default_assignment(code, 1)
