"""MMSE one-step tap prediction with recursively tracked correlations.

Each (tap, antenna) pair is an independent stationary process sampled once
per pilot symbol. With s = [x[now], x[now-1], ..., x[now-Q]] the state keeps
the exponentially weighted snapshot covariance

    C <- lam C + (1 - lam) s s^H

whose first row holds the lag estimates r[d] = <conj(x[now-d]) x[now]>.
The default ``covariance`` solver uses the full matrix (positive
semidefinite by construction, as in RLS); the ``toeplitz`` solver builds a
Toeplitz system from r[0..Q] alone. All channels of a user are solved in
one batch.
"""
from dataclasses import dataclass

import numpy as np

__all__ = ["WienerConfig", "WienerState", "update", "coefficients",
           "predict", "predict_freq"]


@dataclass(frozen=True)
class WienerConfig:
    order: int = 8  # Q
    forgetting: float = 0.99  # lambda
    loading: float = 1e-4  # delta = loading * r[0]
    solver: str = "covariance"

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if not 0.0 <= self.forgetting < 1.0:
            raise ValueError("forgetting must be in [0, 1)")
        if self.loading < 0:
            raise ValueError("loading must be >= 0")
        if self.solver not in ("covariance", "toeplitz"):
            raise ValueError("solver must be 'covariance' or 'toeplitz'")


class WienerState:
    """Predictor state for an array of independent channels.

    ``shape`` is the shape of one observation, e.g. (L, M) for L taps on M
    antennas.
    """

    def __init__(self, shape, config: WienerConfig = WienerConfig()):
        self.config = config
        self.shape = tuple(int(s) for s in np.atleast_1d(shape))
        Q = config.order
        size = int(np.prod(self.shape))
        # newest sample first
        self.buffer = np.zeros((size, Q + 1), dtype=complex)
        self.cov = np.zeros((size, Q + 1, Q + 1), dtype=complex)
        self.count = 0
        self.fallbacks = 0

    @property
    def acf(self):
        """Lag estimates r[0..Q] per channel, (C, Q + 1)."""
        # C[0, d] = x[now] conj(x[now - d])
        return self.cov[:, 0, :]

    @property
    def ready(self):
        return self.count >= self.config.order

    def copy(self):
        new = WienerState(self.shape, self.config)
        new.buffer = self.buffer.copy()
        new.cov = self.cov.copy()
        new.count = self.count
        new.fallbacks = self.fallbacks
        return new


def update(state: WienerState, new_taps):
    """Push one observation and refresh the correlation estimates."""
    x = np.asarray(new_taps, dtype=complex).reshape(-1)
    if x.size != state.buffer.shape[0]:
        raise ValueError("observation shape does not match the state")
    state.buffer = np.roll(state.buffer, 1, axis=1)
    state.buffer[:, 0] = x
    lam = state.config.forgetting
    s = state.buffer
    state.cov *= lam
    state.cov += (1.0 - lam) * s[:, :, None] * s[:, None, :].conj()
    # powers on the diagonal are real by construction; drop rounding residue
    d = np.arange(s.shape[1])
    state.cov[:, d, d] = state.cov[:, d, d].real
    state.count += 1
    return state


def _toeplitz_system(state):
    Q = state.config.order
    r = state.acf
    j = np.arange(Q)
    lag = j[:, None] - j[None, :]
    # T[j, i] = r[j - i], r[-d] = conj(r[d])
    T = np.where(lag >= 0, r[:, np.abs(lag)], r[:, np.abs(lag)].conj())
    return T, r[:, 1:Q + 1]


def _covariance_system(state):
    # predict x[now] from x[now-1..now-Q]; the same weights then slide
    # forward one step
    C = state.cov
    return C[:, 1:, 1:].conj(), C[:, 1:, 0].conj()


def coefficients(state: WienerState):
    """Predictor coefficients a (C, Q) and a mask of failed solves.

    The next sample is predicted as sum_i a[i] x[now - i].
    """
    Q = state.config.order
    if state.config.solver == "toeplitz":
        T, rhs = _toeplitz_system(state)
    else:
        T, rhs = _covariance_system(state)
    r0 = state.cov[:, 0, 0].real
    T = T + (state.config.loading * r0)[:, None, None] * np.eye(Q)
    a = np.zeros((T.shape[0], Q), dtype=complex)
    bad = np.zeros(T.shape[0], dtype=bool)
    live = r0 > 0
    try:
        a[live] = np.linalg.solve(T[live], rhs[live][..., None])[..., 0]
    except np.linalg.LinAlgError:
        for i in np.flatnonzero(live):
            try:
                a[i] = np.linalg.solve(T[i], rhs[i])
            except np.linalg.LinAlgError:
                bad[i] = True
    bad |= ~np.all(np.isfinite(a), axis=1)
    a[bad] = 0.0
    return a, bad


def predict(state: WienerState):
    """Predicted observation one pilot step ahead, shaped like one update.

    Before warm-up, or where the normal equations are singular, the last
    observation is held instead and ``state.fallbacks`` is incremented.
    """
    last = state.buffer[:, 0]
    if not state.ready:
        return last.reshape(state.shape).copy()
    a, bad = coefficients(state)
    Q = state.config.order
    pred = np.sum(a * state.buffer[:, :Q], axis=1)
    if np.any(bad):
        pred[bad] = last[bad]
        state.fallbacks += int(np.count_nonzero(bad))
    return pred.reshape(state.shape)


def predict_freq(state: WienerState, n, fft_size):
    """Predicted taps mapped to subcarriers ``n``: (len(n), M)."""
    from .channel import taps_to_freq

    return taps_to_freq(predict(state), n, fft_size)
