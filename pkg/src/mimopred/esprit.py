"""Parametric channel prediction by two-stage ESPRIT.

Delays are estimated first from the frequency rows of the pilot grid. Each
path is then isolated by a projection over frequency and its
Dopplers are estimated along time. Amplitudes are fit jointly by least
squares and the resulting 2D sinusoid model is extrapolated.
"""
import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from . import kernels

__all__ = ["EspritConfig", "SinusoidEstimate", "esprit_1d", "model_order",
           "estimate_delays", "estimate_dopplers", "fit_amplitudes",
           "estimate", "extrapolate"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EspritConfig:
    L_f: Optional[int] = None  # defaults to N_f // 2
    L_t: Optional[int] = None  # defaults to N_t // 2
    delay_order: Optional[int] = None  # fixed order; None -> threshold rule
    doppler_order: Optional[int] = None
    rho: float = 10.0
    solver: str = "ls"  # or "tls"
    # pool the covariance over all antennas (frequencies are shared)
    joint_antennas: bool = True
    # "ls" separates paths by least squares over all estimated delays,
    # "matched" correlates with one delay at a time
    projection: str = "ls"
    # delay frequencies are wrapped into [-2 pi margin, 2 pi (1 - margin))
    delay_wrap_margin: float = 0.005
    merge_tol: float = 1e-9

    def __post_init__(self):
        if self.solver not in ("ls", "tls"):
            raise ValueError("solver must be 'ls' or 'tls'")
        if self.projection not in ("ls", "matched"):
            raise ValueError("projection must be 'ls' or 'matched'")
        if self.rho <= 1:
            raise ValueError("rho must be > 1")

    def windows(self, N_t, N_f):
        L_f = self.L_f or max(2, N_f // 2)
        L_t = self.L_t or max(2, N_t // 2)
        if not 1 < L_f <= N_f // 2 + 1:
            raise ValueError(f"L_f={L_f} outside (1, N_f/2 + 1]")
        if not 1 < L_t <= N_t // 2 + 1:
            raise ValueError(f"L_t={L_t} outside (1, N_t/2 + 1]")
        return L_f, L_t


@dataclass(frozen=True, eq=False)
class SinusoidEstimate:
    """Estimated 2D sinusoid model of one user's pilot window.

    Component i has Doppler frequency ``doppler_freqs[i]`` (radians per
    pilot-time step), delay frequency ``delay_freqs[i]`` (radians per
    pilot-tone step, principal branch) and per-antenna amplitude
    ``amplitudes[i]``. ``t0`` is the symbol of pilot time index 0.
    """

    doppler_freqs: np.ndarray
    delay_freqs: np.ndarray
    amplitudes: np.ndarray  # (I, M)
    path_index: np.ndarray
    D_t: int
    D_f: int
    t0: int = 0
    delay_wrap_margin: float = 0.005
    residual: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def num_components(self):
        return self.doppler_freqs.size

    @property
    def dopplers(self):
        """Doppler in cycles per OFDM symbol."""
        return self.doppler_freqs / (2 * np.pi * self.D_t)

    @property
    def delays(self):
        """Delay in cycles per subcarrier, unwrapped to the causal branch."""
        lo = -2 * np.pi * self.delay_wrap_margin
        v = np.mod(self.delay_freqs - lo, 2 * np.pi) + lo
        return v / (2 * np.pi * self.D_f)


def _principal(x):
    return np.angle(np.exp(1j * np.asarray(x)))


def model_order(eigvals, rho=10.0, fixed=None, max_order=None):
    """Signal-subspace dimension from descending eigenvalues.

    Counts eigenvalues above ``rho`` times the noise floor, estimated as the
    median of the lower half. The floor is never below 1e-10 of the largest
    eigenvalue so exact data is not over-counted.
    """
    ev = np.asarray(eigvals, dtype=float)
    cap = ev.size - 1 if max_order is None else min(max_order, ev.size - 1)
    if fixed is not None:
        return int(min(fixed, cap))
    if ev.size == 0 or ev[0] <= 0:
        return 0
    floor = max(float(np.median(ev[ev.size // 2:])), 1e-10 * ev[0])
    return int(min(np.count_nonzero(ev > rho * floor), cap))


def esprit_1d(rows, window, rho=10.0, order=None, solver="ls"):
    """Frequencies (radians per sample) of complex exponentials in ``rows``.

    Parameters
    ----------
    rows : (R, N) complex ndarray
        Independent realizations sharing the same frequencies.
    window : int
        Snapshot length of the smoothed covariance.
    rho, order :
        Model-order rule, see ``model_order``.
    solver : {"ls", "tls"}
        Shift-invariance solver.
    """
    cov = kernels.smoothed_covariance(rows, window)
    ev, vec = linalg.eigh(cov)
    ev, vec = ev[::-1], vec[:, ::-1]
    k = model_order(ev, rho, order)
    if k == 0:
        return np.zeros(0)
    es = vec[:, :k]
    e1, e2 = es[:-1], es[1:]
    if solver == "ls":
        psi = linalg.lstsq(e1, e2)[0]
    else:
        _, _, vh = linalg.svd(np.hstack([e1, e2]))
        v = vh.conj().T
        v12, v22 = v[:k, k:], v[k:, k:]
        psi = -v12 @ linalg.inv(v22)
    return np.angle(linalg.eigvals(psi))


def _rows(obs, antenna):
    g = obs.grid
    if antenna is None:
        # stack antennas as extra rows: (M * N_t, N_f)
        return np.concatenate([g[:, :, m] for m in range(g.shape[2])], axis=0)
    return g[:, :, antenna]


def estimate_delays(obs, cfg: EspritConfig = EspritConfig(), antenna=None):
    """Delay frequencies v_p (radians per pilot-tone step, principal branch).

    ``antenna=None`` pools all antennas.
    """
    if obs.mode != "freq":
        raise ValueError("delay estimation needs frequency-mode pilots")
    L_f, _ = cfg.windows(obs.pattern.N_t, obs.pattern.N_f)
    phi = esprit_1d(_rows(obs, antenna), L_f, cfg.rho, cfg.delay_order,
                    cfg.solver)
    # rows vary as e^{-j v m}
    return np.sort(_principal(-phi))


def path_series(obs, delay_freqs, antenna=None, projection="ls"):
    """Per-path time series isolated from the pilot grid.

    ``matched`` correlates every pilot-time row with e^{-j v m} / N_f for each
    delay on its own; ``ls`` solves for all paths jointly, which removes
    leakage between paths. Returns (P, K, N_t) with K the number of antennas
    pooled (1 when ``antenna`` is given).
    """
    v = np.atleast_1d(np.asarray(delay_freqs, dtype=float))
    m = np.arange(obs.pattern.N_f)
    steer = np.exp(-1j * np.outer(m, v))  # (N_f, P)
    if projection == "ls":
        proj = np.linalg.pinv(steer)  # (P, N_f)
    else:
        proj = steer.conj().T / obs.pattern.N_f
    g = obs.grid if antenna is None else obs.grid[:, :, antenna:antenna + 1]
    return np.einsum("pm,qmk->pkq", proj, g)


def estimate_dopplers(obs, delay_freqs, cfg: EspritConfig = EspritConfig(),
                      antenna=None):
    """Doppler frequencies per path, as a list aligned with ``delay_freqs``."""
    _, L_t = cfg.windows(obs.pattern.N_t, obs.pattern.N_f)
    delay_freqs = np.atleast_1d(delay_freqs)
    if delay_freqs.size == 0:
        return []
    series = path_series(obs, delay_freqs, antenna, cfg.projection)
    return [np.sort(esprit_1d(rows, L_t, cfg.rho, cfg.doppler_order, cfg.solver))
            for rows in series]


def _merge(pairs, tol):
    kept = []
    kw, kv = np.zeros(0), np.zeros(0)
    for w, v, p in pairs:
        if kw.size:
            dw = np.abs(np.mod(w - kw + np.pi, 2 * np.pi) - np.pi)
            dv = np.abs(np.mod(v - kv + np.pi, 2 * np.pi) - np.pi)
            if np.any((dw <= tol) & (dv <= tol)):
                continue
        kept.append((w, v, p))
        kw = np.append(kw, w)
        kv = np.append(kv, v)
    if len(kept) < len(pairs):
        warnings.warn(f"merged {len(pairs) - len(kept)} duplicate frequency pairs",
                      RuntimeWarning, stacklevel=3)
    return kept


def fit_amplitudes(obs, doppler_freqs, delay_freqs, path_index=None,
                   merge_tol=1e-9, delay_wrap_margin=0.005):
    """Least-squares amplitudes for the dictionary e^{j(w q - v m)}.

    Returns a ``SinusoidEstimate`` whose ``residual`` holds the per-antenna
    residual energy of the fit.
    """
    w = np.atleast_1d(np.asarray(doppler_freqs, dtype=float))
    v = np.atleast_1d(np.asarray(delay_freqs, dtype=float))
    if w.shape != v.shape:
        raise ValueError("frequency lists must pair up")
    pidx = np.zeros(w.size, dtype=int) if path_index is None else np.asarray(path_index)
    pairs = _merge(list(zip(w, v, pidx)), merge_tol)
    pat = obs.pattern
    g = obs.grid.reshape(pat.N_t * pat.N_f, -1)
    if pairs:
        w, v, pidx = (np.array(x) for x in zip(*pairs))
        q = np.arange(pat.N_t)
        m = np.arange(pat.N_f)
        dt = np.exp(1j * np.outer(q, w))  # (N_t, I)
        df = np.exp(-1j * np.outer(m, v))  # (N_f, I)
        dic = (dt[:, None, :] * df[None, :, :]).reshape(pat.N_t * pat.N_f, -1)
        amps = linalg.lstsq(dic, g, lapack_driver="gelsy")[0]
        resid = np.sum(np.abs(g - dic @ amps) ** 2, axis=0)
    else:
        w = v = np.zeros(0)
        pidx = np.zeros(0, dtype=int)
        amps = np.zeros((0, g.shape[1]), dtype=complex)
        resid = np.sum(np.abs(g) ** 2, axis=0)
    return SinusoidEstimate(w, v, amps, pidx, pat.D_t, pat.D_f, obs.t0,
                            delay_wrap_margin, resid)


def estimate(obs, cfg: EspritConfig = EspritConfig()):
    """Full estimation pipeline on one user's frequency-mode pilots.

    With ``cfg.joint_antennas`` the frequencies are estimated once from all
    antennas; otherwise each antenna is estimated separately and the
    union of frequency pairs is fit.
    """
    antennas = [None] if cfg.joint_antennas else range(obs.num_antennas)
    ws, vs, ps = [], [], []
    path = 0
    for ant in antennas:
        delays = estimate_delays(obs, cfg, ant)
        for v, dops in zip(delays, estimate_dopplers(obs, delays, cfg, ant)):
            ws.extend(dops)
            vs.extend([v] * len(dops))
            ps.extend([path] * len(dops))
            path += 1
    return fit_amplitudes(obs, ws, vs, ps, cfg.merge_tol, cfg.delay_wrap_margin)


def extrapolate(est: SinusoidEstimate, t, n):
    """Channel predicted by the estimated model at symbol(s) ``t`` and
    subcarrier(s) ``n``. Scalars give (M,), arrays give (T, F, M)."""
    scalar = np.ndim(t) == 0 and np.ndim(n) == 0
    tt = np.atleast_1d(np.asarray(t, dtype=float)) - est.t0
    nn = np.atleast_1d(np.asarray(n, dtype=float))
    if est.num_components == 0:
        out = np.zeros((tt.size, nn.size, est.amplitudes.shape[1]), dtype=complex)
    else:
        out = kernels.synth_grid(est.amplitudes, est.dopplers, est.delays, tt, nn)
    return out[0, 0] if scalar else out
