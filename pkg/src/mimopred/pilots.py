"""Downlink pilot grid: aliasing checks and noisy observations.

Frequency mode samples the channel at symbols ``t0 + q D_t`` and subcarriers
``m D_f``. Time mode sends one impulse of N_f-fold power per pilot symbol,
which yields every channel tap with noise variance reduced by N_f.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel import eval_freq, eval_taps

__all__ = ["PilotPattern", "PilotObservations", "NyquistReport",
           "check_nyquist", "observe_freq", "observe_time"]


@dataclass(frozen=True)
class PilotPattern:
    D_t: int = 20
    D_f: int = 4
    N_t: int = 100
    N_f: int = 50

    def __post_init__(self):
        for name in ("D_t", "D_f", "N_t", "N_f"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")

    def check_fits(self, num_subcarriers):
        if self.N_f * self.D_f > num_subcarriers:
            raise ValueError("pilot grid exceeds the number of subcarriers")

    @property
    def window(self):
        """Symbols spanned by one observation window."""
        return self.N_t * self.D_t

    def pilot_times(self, t0=0):
        return t0 + self.D_t * np.arange(self.N_t)

    def pilot_tones(self):
        return self.D_f * np.arange(self.N_f)


@dataclass(frozen=True, eq=False)
class PilotObservations:
    """``grid`` is (N_t, N_f, M) in frequency mode or (N_t, L, M) in time mode."""

    grid: np.ndarray
    noise_variance: float
    pattern: PilotPattern
    mode: str = "freq"
    t0: int = 0

    def __post_init__(self):
        nt = self.grid.shape[0]
        if nt != self.pattern.N_t:
            raise ValueError("grid time dimension does not match N_t")
        if self.mode == "freq" and self.grid.shape[1] != self.pattern.N_f:
            raise ValueError("grid frequency dimension does not match N_f")
        if self.mode == "time" and self.grid.shape[1] > self.pattern.N_f:
            raise ValueError("more taps than N_f")

    @property
    def num_antennas(self):
        return self.grid.shape[2]

    def pilot_symbol_count(self):
        """Resource elements reserved for pilots per antenna in this window.

        Time mode reserves the impulse plus its N_f - 1 guard zeros.
        """
        if self.mode == "time":
            return self.pattern.N_t * (1 + (self.pattern.N_f - 1))
        return self.pattern.N_t * self.pattern.N_f

    def pilot_energy(self, power):
        """Total pilot energy per antenna in this window at data power ``power``."""
        if self.mode == "time":
            return self.pattern.N_t * (self.pattern.N_f * power)
        return self.pattern.N_t * self.pattern.N_f * power


class NyquistReport(NamedTuple):
    freq_product: float  # D_f * tau_max_norm
    time_product: float  # 2 D_t * zeta_max_norm

    # the published grid sits exactly at the frequency limit; the slack
    # absorbs the rounding of tau_max to 16.67 us
    TOLERANCE = 1e-3

    @property
    def freq_ok(self):
        return self.freq_product <= 1.0 + self.TOLERANCE

    @property
    def time_ok(self):
        return self.time_product <= 1.0 + self.TOLERANCE

    @property
    def passed(self):
        return self.freq_ok and self.time_ok


def check_nyquist(pattern: PilotPattern, tau_max_norm, zeta_max_norm):
    """Aliasing margins of the pilot grid; pass iff both products are <= 1."""
    return NyquistReport(pattern.D_f * tau_max_norm,
                         2.0 * pattern.D_t * zeta_max_norm)


def _noise(rng, shape, var):
    if var == 0:
        return np.zeros(shape, dtype=complex)
    return np.sqrt(var / 2) * (rng.standard_normal(shape)
                               + 1j * rng.standard_normal(shape))


def _noise_var(pilot_snr):
    return 0.0 if np.isinf(pilot_snr) else 1.0 / pilot_snr


def observe_freq(model, pattern: PilotPattern, pilot_snr, rng, t0=0):
    """Noisy channel samples on the pilot grid starting at symbol ``t0``."""
    var = _noise_var(pilot_snr)
    clean = eval_freq(model, pattern.pilot_times(t0), pattern.pilot_tones())
    return PilotObservations(clean + _noise(rng, clean.shape, var), var,
                             pattern, "freq", t0)


def observe_time(model, pattern: PilotPattern, pilot_snr, rng, t0=0,
                 fft_size=256, num_taps=None):
    """Noisy taps from an impulse pilot of N_f-fold power per pilot symbol."""
    L = pattern.N_f if num_taps is None else num_taps
    if L > pattern.N_f:
        raise ValueError("time-domain pilots need N_f >= L")
    var = _noise_var(pilot_snr) / pattern.N_f
    clean = eval_taps(model, pattern.pilot_times(t0), fft_size, L)
    return PilotObservations(clean + _noise(rng, clean.shape, var), var,
                             pattern, "time", t0)
