"""Sum-of-sinusoids multipath channels and mobility constants.

A user's channel toward antenna m of a half-wavelength ULA is

    H_m[t, n] = sum_p sum_r A_rp e^{j pi m 2d sin(theta_rp)}
                e^{-j 2 pi tau_p n} e^{j 2 pi zeta_rp t}

with t the OFDM symbol index, n the subcarrier index, ``zeta`` the Doppler
normalized to cycles per symbol and ``tau`` the delay normalized to cycles
per subcarrier (delay times subcarrier spacing).
"""
import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import kernels
from .errors import ConfigurationError

__all__ = [
    "ScenarioKind",
    "MobilityProfile",
    "Subpath",
    "PathCluster",
    "UserChannelModel",
    "ChannelConfig",
    "ValidityHorizon",
    "kmh",
    "max_doppler",
    "validity_horizon",
    "generate_user",
    "eval_freq",
    "eval_taps",
    "doppler_span_bound",
]

LIGHT_SPEED = 3e8


def kmh(speed):
    """km/h to m/s."""
    return speed / 3.6


class ScenarioKind(str, enum.Enum):
    WELL_SEPARATED = "separated"
    PACKED = "packed"


@dataclass(frozen=True)
class MobilityProfile:
    speed: float  # m/s
    carrier: float = 2.6e9
    r_min: float = 600.0
    light_speed: float = LIGHT_SPEED

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError("speed must be >= 0")
        if self.carrier <= 0 or self.r_min <= 0 or self.light_speed <= 0:
            raise ValueError("carrier, r_min and light_speed must be > 0")


class ValidityHorizon(NamedTuple):
    seconds: float
    symbols: Optional[int]


def max_doppler(profile: MobilityProfile) -> float:
    """Maximum Doppler shift in Hz, f_c v / c."""
    return profile.carrier * profile.speed / profile.light_speed


def validity_horizon(profile: MobilityProfile, t_sym=None):
    """Time over which sinusoid parameters stay valid.

    Returns ``None`` for a static user (unbounded horizon), otherwise a
    ``ValidityHorizon`` whose ``symbols`` field is floor(T_valid / t_sym)
    when ``t_sym`` is given.
    """
    if profile.speed == 0:
        return None
    secs = math.sqrt(profile.light_speed * profile.r_min
                     / (3.0 * profile.carrier * profile.speed ** 2))
    syms = None if t_sym is None else int(math.floor(secs / t_sym))
    return ValidityHorizon(secs, syms)


@dataclass(frozen=True)
class Subpath:
    amplitude: complex
    doppler_norm: float
    angle_of_departure: float


@dataclass(frozen=True)
class PathCluster:
    delay_norm: float
    subpaths: tuple


@dataclass(frozen=True, eq=False)
class UserChannelModel:
    """Flat per-subpath arrays; ``paths`` rebuilds the nested view."""

    amplitude: np.ndarray  # (S,) complex
    doppler: np.ndarray  # (S,) cycles per symbol
    angle: np.ndarray  # (S,) radians
    delay: np.ndarray  # (S,) cycles per subcarrier
    path_index: np.ndarray  # (S,) int
    num_antennas: int
    antenna_spacing: float = 0.5

    @property
    def num_paths(self):
        return int(self.path_index.max()) + 1 if self.path_index.size else 0

    @property
    def paths(self):
        out = []
        for p in range(self.num_paths):
            idx = np.flatnonzero(self.path_index == p)
            subs = tuple(Subpath(complex(self.amplitude[i]),
                                 float(self.doppler[i]),
                                 float(self.angle[i])) for i in idx)
            out.append(PathCluster(float(self.delay[idx[0]]), subs))
        return out

    def antenna_amplitudes(self):
        """(S, M) amplitudes including the array phase progression."""
        m = np.arange(self.num_antennas)
        phase = np.pi * 2.0 * self.antenna_spacing * np.outer(np.sin(self.angle), m)
        return self.amplitude[:, None] * np.exp(1j * phase)

    @classmethod
    def from_paths(cls, paths, num_antennas, antenna_spacing=0.5):
        amp, dop, ang, dl, pi = [], [], [], [], []
        for p, path in enumerate(paths):
            if not path.subpaths:
                raise ValueError("every path needs at least one subpath")
            for sp in path.subpaths:
                amp.append(sp.amplitude)
                dop.append(sp.doppler_norm)
                ang.append(sp.angle_of_departure)
                dl.append(path.delay_norm)
                pi.append(p)
        return cls(np.array(amp, dtype=complex), np.array(dop, dtype=float),
                   np.array(ang, dtype=float), np.array(dl, dtype=float),
                   np.array(pi, dtype=int), num_antennas, antenna_spacing)

    def __eq__(self, other):
        if not isinstance(other, UserChannelModel):
            return NotImplemented
        return (self.num_antennas == other.num_antennas
                and self.antenna_spacing == other.antenna_spacing
                and all(np.array_equal(getattr(self, f), getattr(other, f))
                        for f in ("amplitude", "doppler", "angle", "delay",
                                  "path_index")))


@dataclass(frozen=True)
class ChannelConfig:
    num_antennas: int = 4
    num_paths: int = 6
    subpaths_per_path: int = 20
    antenna_spacing: float = 0.5
    tau_max_norm: float = 0.25  # tau_max * subcarrier spacing
    t_sym: float = 83.33e-6
    cone_width_deg: float = 10.0
    # "path": every path is its own cluster with its own cone center;
    # "user": one cone shared by all paths of the user
    cone_scope: str = "path"
    # well-separated users keep subpath Dopplers of one path at least this
    # fraction of zeta_max apart
    min_doppler_sep: float = 0.05
    # path delays at least this fraction of tau_max apart
    min_delay_sep: float = 0.08
    # time-domain mode snaps path delays to integer taps l / fft_size
    time_domain: bool = False
    fft_size: int = 256
    num_taps: Optional[int] = None

    def tap_count(self):
        if self.num_taps is not None:
            return self.num_taps
        return int(math.floor(self.tau_max_norm * self.fft_size)) + 1


def doppler_span_bound(zeta_max_norm, cone_width):
    """Largest spread of zeta_max cos(theta) over any angular cone of the
    given width (radians)."""
    half = min(cone_width, 2 * np.pi) / 2.0
    return zeta_max_norm * 2.0 * math.sin(min(half, np.pi / 2))


def generate_user(scenario, profile: MobilityProfile, rng: np.random.Generator,
                  config: ChannelConfig = ChannelConfig()):
    """Draw one user's channel.

    Well-separated users draw subpath angles uniformly on [0, 2 pi), redrawing
    any angle whose Doppler lands within ``min_doppler_sep * zeta_max`` of
    another subpath of the same path. Packed users draw all angles inside one
    cone of ``cone_width_deg`` around a uniform random center, either one
    cone per path (``cone_scope="path"``) or one for the whole user. Path delays are
    uniform on [0, tau_max] (or on the tap grid) with ``min_delay_sep``
    spacing. Amplitudes are complex Gaussian with equal mean power per path,
    rescaled so that the total power is exactly one.
    """
    scenario = ScenarioKind(scenario)
    P, R = config.num_paths, config.subpaths_per_path
    if P < 1 or R < 1:
        raise ConfigurationError("need at least one path and one subpath")
    zmax = max_doppler(profile) * config.t_sym
    S = P * R
    if scenario is ScenarioKind.WELL_SEPARATED:
        angle = np.concatenate([
            _spaced(rng, R, lambda r, k: r.uniform(0.0, 2 * np.pi, k),
                    np.cos, config.min_doppler_sep)
            for _ in range(P)])
    else:
        width = np.deg2rad(config.cone_width_deg)
        if config.cone_scope == "user":
            center = np.full(S, rng.uniform(0.0, 2 * np.pi))
        elif config.cone_scope == "path":
            center = np.repeat(rng.uniform(0.0, 2 * np.pi, P), R)
        else:
            raise ConfigurationError(f"unknown cone_scope {config.cone_scope!r}")
        angle = center + rng.uniform(-width / 2, width / 2, S)
    if config.time_domain:
        L = config.tap_count()
        sep = config.min_delay_sep * (L - 1)
        taps = _spaced(rng, P, lambda r, k: r.integers(0, L, k),
                       lambda x: x / max(L - 1, 1), sep / max(L - 1, 1))
        path_delay = taps / config.fft_size
    else:
        path_delay = _spaced(
            rng, P, lambda r, k: r.uniform(0.0, config.tau_max_norm, k),
            lambda x: x / config.tau_max_norm, config.min_delay_sep)
    amp = (rng.standard_normal(S) + 1j * rng.standard_normal(S)) / np.sqrt(2 * S)
    amp /= np.sqrt(np.sum(np.abs(amp) ** 2))
    path_index = np.repeat(np.arange(P), R)
    return UserChannelModel(amp, zmax * np.cos(angle), np.mod(angle, 2 * np.pi),
                            path_delay[path_index], path_index,
                            config.num_antennas, config.antenna_spacing)


def _spaced(rng, count, draw, key, min_sep, max_tries=200):
    """Draw ``count`` values one at a time, redrawing any whose ``key``
    lies within ``min_sep`` of an accepted one. Gives up on spacing (keeps
    the last draw) after ``max_tries`` attempts for one value."""
    out = []
    keys = []
    for _ in range(count):
        for _ in range(max_tries):
            x = draw(rng, 1)[0]
            kx = key(x)
            if all(abs(kx - k) >= min_sep for k in keys):
                break
        out.append(x)
        keys.append(kx)
    return np.array(out)


def eval_freq(model: UserChannelModel, t, n):
    """Frequency response at symbol(s) ``t`` and subcarrier(s) ``n``.

    Scalars give an (M,) vector; arrays give (len(t), len(n), M).
    """
    scalar = np.ndim(t) == 0 and np.ndim(n) == 0
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    nn = np.atleast_1d(np.asarray(n, dtype=float))
    out = kernels.synth_grid(model.antenna_amplitudes(), model.doppler,
                             model.delay, tt, nn)
    return out[0, 0] if scalar else out


def tap_indices(model: UserChannelModel, fft_size):
    """Integer tap index per subpath; raises if any delay is off-grid."""
    lf = model.delay * fft_size
    li = np.rint(lf)
    if np.any(np.abs(lf - li) > 1e-9):
        raise ConfigurationError("path delays are not on the tap grid")
    return li.astype(int)


def eval_taps(model: UserChannelModel, t, fft_size, num_taps):
    """Time-domain taps h(t, l) for l < num_taps.

    Scalar ``t`` gives (L, M); array gives (len(t), L, M).
    """
    li = tap_indices(model, fft_size)
    if np.any(li >= num_taps) or np.any(li < 0):
        raise ConfigurationError("path delay beyond the tap window")
    scalar = np.ndim(t) == 0
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    rot = np.exp(2j * np.pi * np.outer(tt, model.doppler))  # (T, S)
    amps = model.antenna_amplitudes()  # (S, M)
    onehot = np.zeros((li.size, num_taps))
    onehot[np.arange(li.size), li] = 1.0
    # (T, S) x (S, L) x (S, M) -> (T, L, M)
    out = np.einsum("ts,sl,sm->tlm", rot, onehot, amps, optimize=True)
    return out[0] if scalar else out


def taps_to_freq(taps, n, fft_size):
    """DFT of taps along their second-to-last axis onto subcarriers ``n``."""
    taps = np.asarray(taps)
    L = taps.shape[-2]
    nn = np.atleast_1d(np.asarray(n, dtype=float))
    dft = np.exp(-2j * np.pi * np.outer(nn, np.arange(L)) / fft_size)  # (F, L)
    return np.einsum("fl,...lm->...fm", dft, taps)
