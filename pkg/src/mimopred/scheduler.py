"""Proportional-fair, modified proportional-fair and hard-fairness
scheduling on top of equal-power zero-forcing.

All selectors work on one scheduling slot: a matrix of channels as known
at the BS (one row per user), per-user weights 1 / T_k from the throughput
ledger and, for the class-aware schedulers, the predictability partition.
"""
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from . import kernels
from .analytics import alpha_balance

__all__ = ["ThroughputLedger", "ClassPartition", "HfsState",
           "ScheduleDecision", "pfs_select", "mpfs_select", "hfs_step",
           "hfs_alpha", "update_throughputs", "exhaustive_select"]


@dataclass
class ThroughputLedger:
    """Exponentially averaged throughputs and service counters."""

    num_users: int
    beta: float = 0.01
    floor: float = 1e-3
    T: np.ndarray = None
    served: np.ndarray = None
    slots: int = 0
    served_total: int = 0

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise ValueError("beta must be in (0, 1]")
        if self.floor <= 0:
            raise ValueError("floor must be > 0")
        if self.T is None:
            self.T = np.full(self.num_users, self.floor)
        if self.served is None:
            self.served = np.zeros(self.num_users, dtype=int)

    @property
    def weights(self):
        return 1.0 / self.T

    def record_slot(self, users):
        self.slots += 1
        for k in users:
            self.served[k] += 1
        self.served_total += len(users)

    def activity(self):
        if self.slots == 0:
            return np.zeros(self.num_users)
        return self.served / self.slots


def update_throughputs(ledger: ThroughputLedger, mean_rates):
    """T_k <- (1 - beta) T_k + beta * rate_k, floored; rates are the
    per-user actual rates averaged over subcarriers (0 when unserved)."""
    r = np.asarray(mean_rates, dtype=float)
    if r.shape != ledger.T.shape:
        raise ValueError("one rate per user")
    if np.any(r < 0):
        raise ValueError("rates must be non-negative")
    ledger.T = np.maximum((1.0 - ledger.beta) * ledger.T + ledger.beta * r,
                          ledger.floor)
    return ledger


@dataclass(frozen=True)
class ClassPartition:
    predictable: np.ndarray  # bool mask, length K

    @classmethod
    def from_flags(cls, flags):
        return cls(np.asarray(flags, dtype=bool).copy())

    @property
    def non_predictable(self):
        return ~self.predictable

    @property
    def K_p(self):
        return int(np.count_nonzero(self.predictable))

    @property
    def K_np(self):
        return int(self.predictable.size - self.K_p)


@dataclass(frozen=True)
class ScheduleDecision:
    users: tuple
    mode: str  # "zf", "td" or "idle"
    objective: float = 0.0


def _as_weights(ledger_or_weights):
    if isinstance(ledger_or_weights, ThroughputLedger):
        return ledger_or_weights.weights
    return np.asarray(ledger_or_weights, dtype=float)


def pfs_select(h_hat, ledger, M, power, mask=None):
    """Greedy maximization of sum_k R_k / T_k over ZF user sets.

    Starts from the best single user and keeps adding the user that most
    increases the weighted nominal rate sum, until no addition helps or M
    users are selected.
    """
    h_hat = np.asarray(h_hat, dtype=complex)
    K = h_hat.shape[0]
    w = _as_weights(ledger)
    mask = np.ones(K, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    sel, obj = kernels.greedy_zf(h_hat, w, mask, float(power), int(M))
    if not sel:
        return ScheduleDecision((), "idle", 0.0)
    return ScheduleDecision(tuple(sel), "zf", obj)


def exhaustive_select(h_hat, ledger, M, power, mask=None):
    """Best ZF set of size <= M by enumeration; reference for the greedy."""
    from .phy import zf_beams

    h_hat = np.asarray(h_hat, dtype=complex)
    K = h_hat.shape[0]
    w = _as_weights(ledger)
    cand = [k for k in range(K) if mask is None or mask[k]]
    best, best_set = -np.inf, ()
    for s in range(1, min(M, len(cand)) + 1):
        for subset in combinations(cand, s):
            sub = h_hat[list(subset)]
            if np.linalg.matrix_rank(sub) < s:
                continue
            v = zf_beams(sub)
            g = np.abs(np.sum(sub.conj() * v.T, axis=1)) ** 2
            val = float(np.sum(w[list(subset)] * np.log1p(g * power / s)))
            if val > best:
                best, best_set = val, subset
    return ScheduleDecision(tuple(best_set), "zf" if best_set else "idle",
                            best if best_set else 0.0)


def _best_singleton_td(norm2, weights, members, power, M):
    if not np.any(members):
        return None
    val = weights * np.log1p(power / M * np.asarray(norm2, dtype=float))
    val = np.where(members, val, -np.inf)
    k = int(np.argmax(val))
    return ScheduleDecision((k,), "td", float(val[k]))


def mpfs_select(h_hat, norm2, ledger, partition: ClassPartition, M, power):
    """PFS with the constraint that a non-predictable user is served alone
    with transmit diversity.

    The greedy ZF decision over predictable users competes with the best
    non-predictable singleton; the larger weighted objective wins.
    """
    w = _as_weights(ledger)
    zf = None
    if partition.K_p > 0:
        zf = pfs_select(h_hat, w, M, power, partition.predictable)
    td = _best_singleton_td(norm2, w, partition.non_predictable, power, M)
    if td is None:
        return zf if zf is not None else ScheduleDecision((), "idle")
    if zf is None or zf.mode == "idle" or td.objective > zf.objective:
        return td
    return zf


def hfs_alpha(T_p, T_np):
    """Balanced predictable share; 0 when non-predictable users get nothing."""
    if T_np <= 0:
        return 0.0
    return alpha_balance(T_p, T_np)


@dataclass
class HfsState:
    """Deterministic slot interleaving between the two classes."""

    alpha_p: float
    credit: float = 0.0
    cursor: int = 0
    adaptive: bool = False
    step: float = 0.01  # adaptive nudge per window
    history: list = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 <= self.alpha_p <= 1.0:
            raise ValueError("alpha_p must be in [0, 1]")

    @property
    def alpha_np(self):
        return 1.0 - self.alpha_p

    def next_class(self):
        """True for a predictable-class slot."""
        self.credit += self.alpha_p
        if self.credit >= 1.0 - 1e-12:
            self.credit -= 1.0
            self.history.append(True)
            return True
        self.history.append(False)
        return False

    def adapt(self, realized_p, realized_np):
        """Nudge alpha_p toward equal realized per-user throughput."""
        if not self.adaptive:
            return self.alpha_p
        self.alpha_p = float(np.clip(
            self.alpha_p + self.step * np.sign(realized_np - realized_p), 0.0, 1.0))
        return self.alpha_p


def hfs_step(state: HfsState, h_hat, norm2, ledger, partition: ClassPartition,
             M, power):
    """One hard-fairness slot: PFS over the predictable class or the next
    non-predictable user in round robin with transmit diversity."""
    w = _as_weights(ledger)
    want_p = state.next_class()
    if want_p and partition.K_p == 0:
        want_p = False
    if not want_p and partition.K_np == 0:
        want_p = partition.K_p > 0
    if want_p:
        return pfs_select(h_hat, w, M, power, partition.predictable)
    np_users = np.flatnonzero(partition.non_predictable)
    if np_users.size == 0:
        return ScheduleDecision((), "idle")
    k = int(np_users[state.cursor % np_users.size])
    state.cursor += 1
    val = float(w[k] * np.log1p(power / M * norm2[k]))
    return ScheduleDecision((k,), "td", val)
