"""Dense pure-state simulator for small registers of two-level sites.

Sites are addressed by hashable labels rather than positions, so removing a
measured or erased site never invalidates references held by the caller.
Site 0 is the most significant bit of the amplitude index.

Photonic modes are stored as ordinary two-level sites (occupied / empty); the
protocols built on top keep exactly one excitation per photon by construction.

All operations return new :class:`PureState` objects and leave their input
untouched, which makes branch enumeration for exhaustive verification simple.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

MAX_SITES = 22
ATOL = 1e-10

_SQRT1_2 = 1 / np.sqrt(2)

GATES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT1_2,
}
# maps |g>+|e> -> |0> and |g>-|e> -> |1>, so a Z readout afterwards is a +/- readout
GATES["PlusMinusBasisRotation"] = GATES["H"]

CPHASE = np.diag([1, 1, 1, -1]).astype(complex)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


class CapacityError(ValueError):
    """Register would exceed :data:`MAX_SITES`."""


class ZeroProbabilityOutcome(ValueError):
    """A forced measurement outcome has (numerically) zero probability."""


@dataclass
class PauliFrame:
    """Pending X / Z corrections keyed by site label.

    The physical state equals the ideal state with ``X**x`` and ``Z**z``
    applied to each listed site (up to a global phase).
    """

    flags: dict = field(default_factory=dict)

    def add(self, label: Hashable, x: int = 0, z: int = 0) -> None:
        ox, oz = self.flags.get(label, (0, 0))
        nx, nz = (ox ^ (x & 1), oz ^ (z & 1))
        if nx or nz:
            self.flags[label] = (nx, nz)
        else:
            self.flags.pop(label, None)

    def get(self, label: Hashable) -> tuple[int, int]:
        return self.flags.get(label, (0, 0))

    def pop(self, label: Hashable) -> tuple[int, int]:
        return self.flags.pop(label, (0, 0))

    def copy(self) -> "PauliFrame":
        return PauliFrame(dict(self.flags))

    def __bool__(self) -> bool:
        return bool(self.flags)


@dataclass
class PureState:
    amplitudes: np.ndarray
    labels: tuple
    roles: tuple = ()
    frame: PauliFrame = field(default_factory=PauliFrame)

    def __post_init__(self) -> None:
        self.labels = tuple(self.labels)
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate site labels: {self.labels}")
        if len(self.labels) > MAX_SITES:
            raise CapacityError(
                f"{len(self.labels)} sites requested, limit is {MAX_SITES}"
            )
        if not self.roles:
            self.roles = ("matter",) * len(self.labels)
        self.roles = tuple(self.roles)
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.amplitudes.size != 2 ** len(self.labels):
            raise ValueError(
                f"amplitude vector of length {self.amplitudes.size} does not "
                f"match {len(self.labels)} sites"
            )

    @property
    def num_sites(self) -> int:
        return len(self.labels)

    def index(self, label: Hashable) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no site labelled {label!r}") from None

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape([2] * self.num_sites)

    def _replace(self, amplitudes, labels=None, roles=None, frame=None) -> "PureState":
        return PureState(
            amplitudes,
            self.labels if labels is None else labels,
            self.roles if roles is None else roles,
            self.frame.copy() if frame is None else frame,
        )

    def __repr__(self) -> str:
        return f"PureState(labels={self.labels}, frame={self.frame.flags})"


def new_basis_state(
    num_sites: int,
    bitstring: str,
    labels: Sequence[Hashable] | None = None,
    roles: Sequence[str] | None = None,
) -> PureState:
    if len(bitstring) != num_sites or set(bitstring) - {"0", "1"}:
        raise ValueError(f"bitstring {bitstring!r} does not describe {num_sites} sites")
    if num_sites > MAX_SITES:
        raise CapacityError(f"{num_sites} sites requested, limit is {MAX_SITES}")
    amps = np.zeros(2**num_sites, dtype=complex)
    amps[int(bitstring, 2) if bitstring else 0] = 1.0
    labels = tuple(range(num_sites)) if labels is None else tuple(labels)
    return PureState(amps, labels, tuple(roles or ()))


def from_amplitudes(amplitudes, labels: Sequence[Hashable], roles=None) -> PureState:
    """Wrap ``amplitudes`` after checking normalisation."""
    state = PureState(np.array(amplitudes, dtype=complex), tuple(labels), tuple(roles or ()))
    if abs(state.norm() - 1) > ATOL:
        raise ValueError(f"state is not normalised (norm {state.norm():.3g})")
    return state


def add_sites(
    state: PureState,
    labels: Sequence[Hashable],
    amplitudes=None,
    role: str = "matter",
) -> PureState:
    """Append fresh sites in ``amplitudes`` (default all |0>) as a product factor."""
    labels = tuple(labels)
    if amplitudes is None:
        amplitudes = np.zeros(2 ** len(labels), dtype=complex)
        amplitudes[0] = 1
    amplitudes = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if amplitudes.size != 2 ** len(labels):
        raise ValueError("amplitudes do not match the number of new sites")
    if state.num_sites + len(labels) > MAX_SITES:
        raise CapacityError(
            f"{state.num_sites + len(labels)} sites requested, limit is {MAX_SITES}"
        )
    return state._replace(
        np.kron(state.amplitudes, amplitudes),
        state.labels + labels,
        state.roles + (role,) * len(labels),
    )


def _materialize(state: PureState, labels: Iterable[Hashable]) -> PureState:
    """Apply and clear any pending frame entries on ``labels``."""
    pending = [(lab, state.frame.get(lab)) for lab in labels if lab in state.frame.flags]
    if not pending:
        return state
    frame = state.frame.copy()
    amps = state.amplitudes
    for lab, (x, z) in pending:
        frame.pop(lab)
        if x:
            amps = _apply_matrix(amps, state.num_sites, [state.index(lab)], GATES["X"])
        if z:
            amps = _apply_matrix(amps, state.num_sites, [state.index(lab)], GATES["Z"])
    return state._replace(amps, frame=frame)


def _apply_matrix(amps: np.ndarray, n: int, idx: Sequence[int], matrix: np.ndarray) -> np.ndarray:
    k = len(idx)
    psi = amps.reshape([2] * n)
    psi = np.moveaxis(psi, idx, range(k))
    shape = psi.shape
    psi = (matrix @ psi.reshape(2**k, -1)).reshape(shape)
    return np.moveaxis(psi, range(k), idx).reshape(-1)


def apply_unitary(state: PureState, sites: Sequence[Hashable], matrix: np.ndarray) -> PureState:
    """Apply a ``2**k x 2**k`` unitary to the listed sites (first site = MSB)."""
    sites = list(sites)
    if len(set(sites)) != len(sites):
        raise ValueError("sites must be distinct")
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape != (2 ** len(sites),) * 2:
        raise ValueError(f"matrix shape {matrix.shape} does not fit {len(sites)} sites")
    state = _materialize(state, sites)
    idx = [state.index(s) for s in sites]
    return state._replace(_apply_matrix(state.amplitudes, state.num_sites, idx, matrix))


def apply_1q(state: PureState, site: Hashable, gate: str) -> PureState:
    try:
        matrix = GATES[gate]
    except KeyError:
        raise ValueError(f"unknown gate {gate!r}") from None
    return apply_unitary(state, [site], matrix)


def apply_cphase(state: PureState, control_site: Hashable, target_site: Hashable) -> PureState:
    """Phase -1 on the |1>|1> component: the ideal pi-phase cavity interaction."""
    if control_site == target_site:
        raise ValueError("control and target must differ")
    return apply_unitary(state, [control_site, target_site], CPHASE)


def apply_cnot(state: PureState, control_site: Hashable, target_site: Hashable) -> PureState:
    if control_site == target_site:
        raise ValueError("control and target must differ")
    return apply_unitary(state, [control_site, target_site], CNOT)


def _project(state: PureState, i: int, bit: int) -> tuple[float, np.ndarray]:
    psi = np.take(state.tensor(), bit, axis=i).reshape(-1)
    return float(np.vdot(psi, psi).real), psi


def _drop(state: PureState, i: int, amps: np.ndarray) -> PureState:
    frame = state.frame.copy()
    frame.pop(state.labels[i])
    return state._replace(
        amps,
        state.labels[:i] + state.labels[i + 1 :],
        state.roles[:i] + state.roles[i + 1 :],
        frame,
    )


def measure(
    state: PureState,
    site: Hashable,
    basis: str = "Z",
    *,
    rng: np.random.Generator | None = None,
    forced: int | None = None,
) -> tuple[int, float, PureState]:
    """Projectively measure ``site`` and remove it from the register.

    Returns ``(outcome, probability, collapsed_state)``. In the X basis outcome
    0 means ``+``. Pending frame corrections on the site are applied first, so
    the outcome is the corrected one. Pass ``forced`` to select a branch for
    exhaustive verification; otherwise the outcome is drawn from ``rng``.
    """
    if basis not in ("Z", "X"):
        raise ValueError(f"unknown basis {basis!r}")
    state = _materialize(state, [site])
    if basis == "X":
        state = apply_1q(state, site, "H")
    i = state.index(site)
    p0, psi0 = _project(state, i, 0)
    p1, psi1 = _project(state, i, 1)
    total = p0 + p1
    p0, p1 = p0 / total, p1 / total
    if forced is None:
        if rng is None:
            raise ValueError("either rng or forced must be given")
        outcome = int(rng.random() >= p0)
    else:
        outcome = int(forced)
    prob, psi = (p0, psi0) if outcome == 0 else (p1, psi1)
    if prob <= ATOL**2:
        raise ZeroProbabilityOutcome(f"outcome {outcome} on {site!r} has probability {prob:.3g}")
    return outcome, prob, _drop(state, i, psi / np.sqrt(prob * total))


def measure_branches(
    state: PureState, site: Hashable, basis: str = "Z"
) -> list[tuple[int, float, PureState]]:
    """All non-vanishing outcomes of :func:`measure`."""
    out = []
    for bit in (0, 1):
        try:
            out.append(measure(state, site, basis, forced=bit))
        except ZeroProbabilityOutcome:
            pass
    return out


def erase(state: PureState, site: Hashable) -> list[tuple[float, PureState]]:
    """Loss of ``site``: an environment Z measurement whose outcome nobody sees.

    Both branches are returned (zero-probability ones are dropped); the
    reduced state of the remaining sites is their probability-weighted mixture.
    """
    return [(prob, post) for _, prob, post in measure_branches(state, site, "Z")]


def fidelity(a: PureState, b: PureState) -> float:
    if a.labels != b.labels:
        b = reorder(b, a.labels)
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def reorder(state: PureState, labels: Sequence[Hashable]) -> PureState:
    labels = tuple(labels)
    if set(labels) != set(state.labels) or len(labels) != state.num_sites:
        raise ValueError("label sets differ")
    perm = [state.index(lab) for lab in labels]
    amps = np.transpose(state.tensor(), perm).reshape(-1)
    roles = tuple(state.roles[i] for i in perm)
    return state._replace(amps, labels, roles)


def apply_frame(state: PureState) -> PureState:
    """Apply every pending correction and return a frame-free state."""
    return _materialize(state, list(state.frame.flags))


def reduced_density_matrix(
    branches: Iterable[tuple[float, PureState]], labels: Sequence[Hashable]
) -> np.ndarray:
    """Mixture of branch states traced down to ``labels``.

    Branch weights need not be normalised; sites outside ``labels`` are
    traced out.
    """
    rho = None
    labels = tuple(labels)
    for weight, st in branches:
        st = apply_frame(st)
        keep = [st.index(lab) for lab in labels]
        rest = [i for i in range(st.num_sites) if i not in keep]
        psi = np.transpose(st.tensor(), keep + rest).reshape(2 ** len(keep), -1)
        contrib = weight * (psi @ psi.conj().T)
        rho = contrib if rho is None else rho + contrib
    if rho is None:
        raise ValueError("no branches")
    return rho
