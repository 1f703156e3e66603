"""Zero-forcing beamforming and rate accounting.

Noise power is normalized to one, so the total transmit power ``P`` is the
SNR. Rates are in nats per channel use.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

__all__ = ["BeamformingDecision", "RateReport", "zf_beamformer",
           "zf_beams", "nominal_rate", "actual_rate", "actual_rates",
           "transmit_diversity_rate"]

log = logging.getLogger(__name__)

MAX_CONDITION = 1e8


@dataclass(frozen=True, eq=False)
class BeamformingDecision:
    users: tuple
    beams: np.ndarray  # (M, |S|), unit-norm columns
    powers: np.ndarray  # (|S|,)
    dropped: tuple = ()

    def __post_init__(self):
        if self.beams.shape[1] != len(self.users):
            raise ValueError("one beam per user")
        if len(self.users) > self.beams.shape[0]:
            raise ValueError("more users than antennas")

    @property
    def total_power(self):
        return float(np.sum(self.powers))


@dataclass(frozen=True, eq=False)
class RateReport:
    users: tuple
    nominal: np.ndarray
    actual: np.ndarray
    interference: np.ndarray = field(default_factory=lambda: np.zeros(0))


def zf_beams(h_hat):
    """Unit-norm ZF beams for the rows of ``h_hat``.

    ``h_hat`` is (..., S, M), one predicted channel per row; the result is
    (..., M, S) with column k orthogonal to every other row.
    """
    h_hat = np.asarray(h_hat, dtype=complex)
    # pinv of the (S, M) matrix with rows h_k^H
    w = np.linalg.pinv(h_hat.conj())
    return w / np.linalg.norm(w, axis=-2, keepdims=True)


def zf_beamformer(h_hat, users=None, power=1.0):
    """ZF decision with equal power for the users whose predicted channels
    are the rows of ``h_hat``.

    Users are dropped weakest first while the stacked matrix is
    ill-conditioned; the dropped ids are reported in ``dropped``.
    """
    h_hat = np.atleast_2d(np.asarray(h_hat, dtype=complex))
    users = list(range(h_hat.shape[0])) if users is None else list(users)
    if len(users) != h_hat.shape[0]:
        raise ValueError("one channel row per user")
    if len(users) > h_hat.shape[1]:
        raise ValueError("cannot serve more users than antennas")
    keep = list(range(len(users)))
    dropped = []
    while keep:
        sub = h_hat[keep]
        s = np.linalg.svd(sub, compute_uv=False)
        if s[-1] > 0 and s[0] / s[-1] <= MAX_CONDITION:
            break
        weakest = min(keep, key=lambda i: np.linalg.norm(h_hat[i]))
        keep.remove(weakest)
        dropped.append(users[weakest])
        log.debug("dropped user %s from ZF set", users[weakest])
    if not keep:
        M = h_hat.shape[1]
        return BeamformingDecision((), np.zeros((M, 0), dtype=complex),
                                   np.zeros(0), tuple(dropped))
    beams = zf_beams(h_hat[keep])
    powers = np.full(len(keep), power / len(keep))
    return BeamformingDecision(tuple(users[i] for i in keep), beams, powers,
                               tuple(dropped))


def nominal_rate(h_hat, v, p):
    """log(1 + |h_hat^H v|^2 p)."""
    g = np.abs(np.vdot(h_hat, v)) ** 2
    return float(np.log1p(g * p))


def actual_rates(h, beams, powers):
    """Per-user rate under possibly mismatched beams, batched.

    ``h`` is (..., S, M) true channels of the scheduled users (row k for the
    user of beam k), ``beams`` is (..., M, S), ``powers`` is (S,). Returns
    rates and interference powers, both (..., S).
    """
    gains = np.abs(np.conj(h) @ beams) ** 2 * powers  # (..., S, S)
    signal = np.diagonal(gains, axis1=-2, axis2=-1)
    interf = np.sum(gains, axis=-1) - signal
    return np.log1p(signal / (1.0 + interf)), interf


def actual_rate(h_true, decision: BeamformingDecision, h_hat=None):
    """Rate report for a decision given the true channels of its users
    (rows of ``h_true`` in decision order). Nominal rates need ``h_hat``."""
    h_true = np.atleast_2d(np.asarray(h_true, dtype=complex))
    rates, interf = actual_rates(h_true, decision.beams, decision.powers)
    if h_hat is None:
        nominal = np.full(len(decision.users), np.nan)
    else:
        h_hat = np.atleast_2d(np.asarray(h_hat, dtype=complex))
        nominal = np.array([nominal_rate(h_hat[i], decision.beams[:, i],
                                         decision.powers[i])
                            for i in range(len(decision.users))])
    return RateReport(decision.users, nominal, rates, interf)


def transmit_diversity_rate(h, P, M, norm2_feedback=None):
    """Nominal and actual rate of a user served alone without beamforming.

    The nominal rate uses the fed-back squared norm when given, the actual
    rate uses the true channel ``h`` (one or more M-vectors along the last
    axis).
    """
    if P <= 0 or M <= 0:
        raise ValueError("P and M must be > 0")
    true_norm2 = np.sum(np.abs(np.asarray(h)) ** 2, axis=-1)
    fb = true_norm2 if norm2_feedback is None else norm2_feedback
    return np.log1p(P / M * fb), np.log1p(P / M * true_norm2)
