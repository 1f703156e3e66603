"""Terminal-side prediction-error tracking and predictability state.

The terminal smooths the NMSE of its predictions against the realized
channel and flips its predictability flag with hysteresis at block
boundaries. Non-predictable terminals only report a channel-norm scalar.
"""
import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Predictability", "PredictabilityState", "FeedbackPayload",
           "nmse", "record_error", "classify", "feedback_payload",
           "blocks_to_predictable"]


class Predictability(enum.IntEnum):
    NON_PREDICTABLE = 0
    PREDICTABLE = 1


@dataclass
class PredictabilityState:
    theta_high: float = 0.2
    theta_low: float = 0.1
    gamma: float = 0.05
    smoothed: float = 0.0
    flag: Predictability = Predictability.PREDICTABLE
    samples: int = 0
    skipped: int = 0

    def __post_init__(self):
        if not self.theta_high > self.theta_low > 0:
            raise ValueError("need theta_high > theta_low > 0")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must be in (0, 1]")

    @property
    def predictable(self):
        return self.flag is Predictability.PREDICTABLE


def nmse(predicted, actual):
    """||predicted - actual||^2 / ||actual||^2 over all entries; NaN if the
    actual channel is zero."""
    p = np.asarray(predicted)
    a = np.asarray(actual)
    den = float(np.sum(np.abs(a) ** 2))
    if den == 0:
        return math.nan
    return float(np.sum(np.abs(p - a) ** 2)) / den


def record_error(state: PredictabilityState, predicted, actual):
    """Fold one prediction-error sample into the smoothed NMSE.

    Any matching array shapes are accepted; the error is pooled over all
    entries. Samples with a zero actual channel are skipped.
    """
    e = nmse(predicted, actual)
    if math.isnan(e):
        state.skipped += 1
        return state
    state.smoothed = (1.0 - state.gamma) * state.smoothed + state.gamma * e
    state.samples += 1
    return state


def classify(state: PredictabilityState):
    """Update and return the flag; call at block boundaries only."""
    if state.flag is Predictability.PREDICTABLE and state.smoothed > state.theta_high:
        state.flag = Predictability.NON_PREDICTABLE
    elif (state.flag is Predictability.NON_PREDICTABLE
          and state.smoothed < state.theta_low):
        state.flag = Predictability.PREDICTABLE
    return state.flag


@dataclass(frozen=True)
class FeedbackPayload:
    predictable: bool
    trajectory: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    norm2: float = math.nan

    @property
    def reals(self):
        """Number of real values carried by this payload."""
        if self.predictable:
            return 2 * int(self.trajectory.size)
        return 1


def feedback_payload(state: PredictabilityState, prediction, channel_norm_est):
    """Predictable terminals send their predicted trajectory (one M-vector
    per fed-back slot); the others send only a squared-norm estimate."""
    if state.predictable:
        traj = np.atleast_2d(np.asarray(prediction, dtype=complex))
        return FeedbackPayload(True, traj)
    return FeedbackPayload(False, norm2=float(channel_norm_est))


def blocks_to_predictable(eps0, theta_low, gamma):
    """Blocks of zero error needed to bring ``eps0`` below ``theta_low``."""
    if eps0 < theta_low:
        return 0
    return math.ceil(math.log(theta_low / eps0) / math.log(1.0 - gamma))
