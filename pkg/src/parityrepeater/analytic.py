"""Closed-form loss, failure, link-budget and rate calculations.

Everything here is a pure function of its arguments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .transfer import PhotonAssignment

# Default failure target; the reference code sizes sit just above 1e-3
DEFAULT_PF_TARGET = 1.2e-3
M_MAX = 64
N_MAX = 100_000
MAX_EXACT_PHOTONS = 24


class Infeasible(ValueError):
    """No code within the search bounds meets the failure target."""


class Cost(str, Enum):
    TOTAL_QUBITS = "TotalQubits"
    MIN_BLOCKS = "MinBlocks"


@dataclass(frozen=True, order=True)
class CodeParams:
    m: int
    n: int

    def __post_init__(self) -> None:
        if int(self.m) != self.m or int(self.n) != self.n or self.m < 1 or self.n < 1:
            raise ValueError(f"code sizes must be positive integers, got m={self.m}, n={self.n}")

    @property
    def total(self) -> int:
        return self.m * self.n


@dataclass(frozen=True)
class LinkBudget:
    p_s: float = 1.0
    p_d: float = 1.0
    p_c: float = 1.0
    L: float = 0.0
    L0: float = 25.0

    def __post_init__(self) -> None:
        for name in ("p_s", "p_d", "p_c"):
            _check_prob(getattr(self, name), name)
        if self.L < 0:
            raise ValueError(f"L must be non-negative, got {self.L}")
        if self.L0 <= 0:
            raise ValueError(f"L0 must be positive, got {self.L0}")


@dataclass(frozen=True)
class ChainBudget:
    hops: int
    per_hop_failure: float
    per_hop_fidelity: float = 1.0
    cycle_time: float = 100e-9

    def __post_init__(self) -> None:
        if self.hops < 1:
            raise ValueError("hops must be >= 1")
        _check_prob(self.per_hop_failure, "per_hop_failure")
        _check_prob(self.per_hop_fidelity, "per_hop_fidelity")
        if self.cycle_time <= 0:
            raise ValueError("cycle_time must be positive")


def _check_prob(x: float, name: str = "p") -> None:
    if not 0.0 <= x <= 1.0 or math.isnan(x):
        raise ValueError(f"{name}={x} outside [0, 1]")


def block_total_loss_prob(p: float, m: int) -> float:
    """Probability that every photon of an ``m``-qubit block is lost."""
    _check_prob(p)
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return (1.0 - p) ** m


def _block_logs(p: float, m: int) -> tuple[float, float]:
    """``log`` of P(block keeps a photon) and P(block partially arrived).

    Either is ``-inf`` when the probability is zero.
    """
    lost_all = (1.0 - p) ** m
    ln_any = math.log1p(-lost_all) if lost_all < 1.0 else -math.inf
    not_partial = p**m + lost_all
    ln_partial = math.log1p(-not_partial) if not_partial < 1.0 else -math.inf
    return ln_any, ln_partial


def failure_probability(p: float, code: CodeParams) -> float:
    """Probability that an (m, n) code cannot be recovered after independent loss.

    ``1 - (1 - (1-p)^m)^n + (1 - p^m - (1-p)^m)^n``: either some block lost
    every photon, or no block arrived intact. Both powers go through
    ``log1p``/``expm1`` so that small results keep their relative accuracy.
    """
    _check_prob(p)
    ln_any, ln_partial = _block_logs(p, code.m)
    some_block_lost = -math.expm1(code.n * ln_any)
    none_intact = math.exp(code.n * ln_partial)
    return min(max(some_block_lost + none_intact, 0.0), 1.0)


def _best_n(p: float, m: int, target: float, n_max: int) -> int | None:
    """Smallest n with failure <= target for fixed m, or None.

    In n the failure is ``1 - A**n + B**n`` with ``0 <= B < A <= 1``; its
    derivative changes sign once, so it falls to a single minimum and then
    rises. Bisect on the falling side.
    """
    ln_a, ln_b = _block_logs(p, m)

    def f(n: int) -> float:
        return failure_probability(p, CodeParams(m, n))

    if ln_b == -math.inf or ln_a == -math.inf:
        n_star = 1
    elif ln_a == 0.0:
        n_star = n_max
    elif ln_b >= ln_a:
        return None  # both terms cancel: failure stays at 1
    else:
        n_star = math.log(ln_b / ln_a) / (ln_a - ln_b)
        n_star = int(min(max(math.floor(n_star), 1), n_max))
    candidates = {n_star, min(n_star + 1, n_max)}
    n_min = min(candidates, key=f)
    if f(n_min) > target:
        return None
    lo, hi = 1, n_min
    while lo < hi:
        mid = (lo + hi) // 2
        if f(mid) <= target:
            hi = mid
        else:
            lo = mid + 1
    return lo


def feasible_n_range(
    p: float, m: int, pf_target: float = DEFAULT_PF_TARGET, n_max: int = N_MAX
) -> tuple[int, int] | None:
    """Inclusive range of block counts meeting ``pf_target`` for fixed ``m``."""
    lo = _best_n(p, m, pf_target, n_max)
    if lo is None:
        return None
    hi_lo, hi_hi = lo, n_max
    f = lambda n: failure_probability(p, CodeParams(m, n))
    if f(n_max) <= pf_target:
        return lo, n_max
    while hi_lo + 1 < hi_hi:
        mid = (hi_lo + hi_hi) // 2
        if f(mid) <= pf_target:
            hi_lo = mid
        else:
            hi_hi = mid
    return lo, hi_lo


def optimize_code(
    p: float,
    pf_target: float = DEFAULT_PF_TARGET,
    cost: Cost | str = Cost.TOTAL_QUBITS,
    m_max: int = M_MAX,
    n_max: int = N_MAX,
) -> CodeParams:
    """Cheapest code with ``failure_probability(p, code) <= pf_target``.

    ``TotalQubits`` minimises ``m*n``; ``MinBlocks`` minimises ``n``. Ties go
    to the smaller ``m``. Raises :class:`Infeasible` if nothing within
    ``m <= m_max`` and ``n <= n_max`` works, which is always the case for
    ``p <= 0.5``.
    """
    if not 0.0 < p < 1.0:
        if p == 1.0:
            return CodeParams(1, 1)
        raise ValueError(f"p={p} must lie in (0, 1]")
    if not 0.0 < pf_target < 1.0:
        raise ValueError(f"pf_target={pf_target} must lie in (0, 1)")
    cost = Cost(cost)
    best = None
    for m in range(1, m_max + 1):
        n = _best_n(p, m, pf_target, n_max)
        if n is None:
            continue
        key = (m * n, m) if cost is Cost.TOTAL_QUBITS else (n, m)
        if best is None or key < best[0]:
            best = (key, CodeParams(m, n))
    if best is None:
        raise Infeasible(
            f"no (m <= {m_max}, n <= {n_max}) code reaches p_f <= {pf_target:g} at p={p:g}"
        )
    return best[1]


def link_probability(budget: LinkBudget) -> float:
    """Single-photon arrival probability ``p_s * p_d * p_c**2 * exp(-L/L0)``."""
    return budget.p_s * budget.p_d * budget.p_c**2 * math.exp(-budget.L / budget.L0)


def multiplexed_failure_probability(
    p: float,
    assignment: "PhotonAssignment",
    *,
    max_exact_photons: int = MAX_EXACT_PHOTONS,
    trials: int = 200_000,
    rng: np.random.Generator | None = None,
) -> tuple[float, float]:
    """Failure probability when several code qubits share a photon.

    Returns ``(value, standard_error)``. With at most ``max_exact_photons``
    photons every arrival subset is enumerated and the error is 0; otherwise
    ``trials`` photon-arrival samples are drawn from ``rng``.
    """
    from .paritycode import success_mask

    _check_prob(p)
    assignment.validate()
    code = assignment.code
    photon_of = assignment.photon_grid()  # (m, n) -> photon index
    k = assignment.photon_count
    if p == 1.0:
        return 0.0, 0.0
    if k <= max_exact_photons:
        total = []
        chunk = 1 << 16
        shifts = np.arange(k, dtype=np.int64)
        for start in range(0, 1 << k, chunk):
            idx = np.arange(start, min(start + chunk, 1 << k), dtype=np.int64)
            photons = ((idx[:, None] >> shifts) & 1).astype(bool)
            grids = photons[:, photon_of]
            fails = ~success_mask(grids)
            n_arr = photons.sum(axis=1)
            w = p ** n_arr[fails] * (1 - p) ** (k - n_arr[fails])
            total.append(np.sort(w).sum())
        return float(math.fsum(total)), 0.0
    rng = np.random.default_rng() if rng is None else rng
    photons = rng.random((trials, k)) < p
    fails = ~success_mask(photons[:, photon_of])
    est = float(fails.mean())
    return est, math.sqrt(est * (1 - est) / trials)


def chain_success(per_hop_failure: float, hops: int) -> float:
    _check_prob(per_hop_failure, "per_hop_failure")
    if hops < 1:
        raise ValueError("hops must be >= 1")
    return (1.0 - per_hop_failure) ** hops


def chain_fidelity(per_hop_fidelity: float, hops: int) -> float:
    _check_prob(per_hop_fidelity, "per_hop_fidelity")
    if hops < 1:
        raise ValueError("hops must be >= 1")
    return per_hop_fidelity**hops


@dataclass(frozen=True)
class RateReport:
    link_probability: float
    per_hop_failure: float
    raw_rate: float
    qubits_per_node: int
    total_qubits: int
    end_to_end_success: float
    end_to_end_fidelity: float
    rate_per_total_qubit: float


def rate_report(
    budget: LinkBudget,
    code: CodeParams,
    hops: int,
    cycle_time: float = 100e-9,
    per_hop_fidelity: float = 1.0,
    reencode_buffers: bool = False,
    per_hop_failure: float | None = None,
) -> RateReport:
    """Throughput and end-to-end figures for a chain of identical hops.

    One node per hop holds ``m*n`` matter qubits (twice that when separate
    re-encoding buffers are counted). The delivered rate is the raw gate
    rate times the end-to-end success. ``per_hop_failure`` overrides the
    single-qubit-per-photon formula, e.g. with a multiplexed estimate.
    """
    chain = ChainBudget(hops, 0.0, per_hop_fidelity, cycle_time)
    p = link_probability(budget)
    pf = failure_probability(p, code) if per_hop_failure is None else per_hop_failure
    raw = 1.0 / chain.cycle_time
    per_node = code.total * (2 if reencode_buffers else 1)
    total = per_node * hops
    success = chain_success(pf, hops)
    return RateReport(
        link_probability=p,
        per_hop_failure=pf,
        raw_rate=raw,
        qubits_per_node=per_node,
        total_qubits=total,
        end_to_end_success=success,
        end_to_end_fidelity=chain_fidelity(per_hop_fidelity, hops),
        rate_per_total_qubit=raw * success / total,
    )
