"""Scenario presets, the per-block simulation loop and metric output.

One run draws every user's channel, predicts it (batch ESPRIT or
frame-by-frame Wiener), tracks predictability at the terminals and then
lets one or more schedulers serve the same channel and prediction stream.
Each scheduler keeps its own throughput ledger, so schedulers compared on
one seed see identical channels.
"""
import csv
import dataclasses
import io
import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import esprit, wiener
from .analytics import HfsAnalyticsInput, alpha_balance, t_np, t_p_lower
from .channel import (ChannelConfig, MobilityProfile, eval_freq, generate_user,
                      kmh, max_doppler, validity_horizon)
from .errors import ConfigurationError
from .phy import actual_rates, zf_beams
from .pilots import PilotPattern, check_nyquist, observe_freq, observe_time
from .scheduler import (ClassPartition, HfsState, ThroughputLedger, hfs_step,
                        mpfs_select, pfs_select, update_throughputs)
from .tracker import PredictabilityState, classify, nmse, record_error

__all__ = ["UserSpec", "ScenarioConfig", "MetricsRecord", "PRESETS", "preset",
           "run", "run_schedulers", "summarize", "write_outputs",
           "esprit_decimation", "prediction_nmse", "CSV_COLUMNS"]

log = logging.getLogger(__name__)

SCHEDULERS = ("pfs", "mpfs", "hfs")
PREDICTORS = ("esprit", "wiener")
CSV_COLUMNS = ("block", "user", "T_k", "served", "nominal_rate",
               "actual_rate", "nmse", "predictable_flag")


@dataclass(frozen=True)
class UserSpec:
    scenario: str = "separated"
    speed_kmh: float = 75.0

    def profile(self, config):
        return MobilityProfile(kmh(self.speed_kmh), config.carrier,
                               config.r_min)


@dataclass(frozen=True)
class ScenarioConfig:
    """Every knob of one simulation run.

    ``horizon`` is in OFDM symbols and is rounded down to whole pilot
    blocks of ``D_t`` symbols. Scheduling happens once per block on each of
    ``subcarrier_groups`` representative subcarriers spread over the
    active band.
    """

    M: int = 4
    K: int = 8
    N: int = 256
    N_a: int = 200
    delta_f: float = 15e3
    t_sym: float = 83.33e-6
    cp: int = 64
    sampling_rate: float = 3.84e6
    carrier: float = 2.6e9
    tau_max: float = 16.67e-6
    r_min: float = 600.0
    D_t: int = 20
    D_f: int = 4
    N_t: int = 100
    N_f: int = 50
    users: tuple = tuple(UserSpec() for _ in range(8))
    snr_db: float = 20.0
    pilot_snr_db: Optional[float] = None  # None -> snr_db; inf -> noiseless
    predictor: str = "esprit"
    scheduler: str = "mpfs"
    beta: float = 0.01
    eps0: float = 1e-3
    theta_high: float = 0.2
    theta_low: float = 0.1
    gamma: float = 0.05
    horizon: int = 40000
    seed: int = 0
    subcarrier_groups: int = 4
    num_paths: int = 6
    subpaths_per_path: int = 20
    cone_width_deg: float = 10.0
    cone_scope: str = "path"
    min_doppler_sep: float = 0.05
    min_delay_sep: float = 0.08
    esprit_rho: float = 10.0
    esprit_decimation: object = "auto"  # "auto" or a positive int
    wiener_order: int = 8
    wiener_forgetting: float = 0.99
    wiener_solver: str = "covariance"
    hfs_alpha: Optional[float] = None  # None -> closed-form balance point
    hfs_adaptive: bool = False
    burn_in: Optional[int] = None  # blocks; None -> 3 / beta

    def __post_init__(self):
        users = tuple(u if isinstance(u, UserSpec) else UserSpec(**u)
                      for u in self.users)
        object.__setattr__(self, "users", users)
        if len(users) != self.K:
            raise ConfigurationError(f"K={self.K} but {len(users)} users given")
        if self.N_a > self.N:
            raise ConfigurationError("N_a must not exceed N")
        if self.M < 1 or self.K < 1:
            raise ConfigurationError("M and K must be >= 1")
        if self.predictor not in PREDICTORS:
            raise ConfigurationError(f"unknown predictor {self.predictor!r}")
        if self.scheduler not in SCHEDULERS:
            raise ConfigurationError(f"unknown scheduler {self.scheduler!r}")
        if self.horizon < self.D_t:
            raise ConfigurationError("horizon shorter than one pilot block")
        if self.subcarrier_groups < 1:
            raise ConfigurationError("need at least one subcarrier group")
        for u in users:
            if u.scenario not in ("separated", "packed"):
                raise ConfigurationError(f"unknown scenario {u.scenario!r}")
            if u.speed_kmh < 0:
                raise ConfigurationError("speeds must be >= 0")

    # derived quantities

    @property
    def pattern(self):
        return PilotPattern(self.D_t, self.D_f, self.N_t, self.N_f)

    @property
    def power(self):
        return 10.0 ** (self.snr_db / 10.0)

    @property
    def pilot_snr(self):
        db = self.snr_db if self.pilot_snr_db is None else self.pilot_snr_db
        return math.inf if math.isinf(db) and db > 0 else 10.0 ** (db / 10.0)

    @property
    def tau_max_norm(self):
        return self.tau_max * self.delta_f

    @property
    def num_blocks(self):
        return self.horizon // self.D_t

    @property
    def group_tones(self):
        G = self.subcarrier_groups
        return np.floor((np.arange(G) + 0.5) * self.N_a / G)

    def channel_config(self):
        td = self.predictor == "wiener"
        taps = int(math.floor(self.tau_max_norm * self.N)) + 1
        return ChannelConfig(
            num_antennas=self.M, num_paths=self.num_paths,
            subpaths_per_path=self.subpaths_per_path,
            tau_max_norm=self.tau_max_norm, t_sym=self.t_sym,
            cone_width_deg=self.cone_width_deg, cone_scope=self.cone_scope,
            min_doppler_sep=self.min_doppler_sep,
            min_delay_sep=self.min_delay_sep, time_domain=td, fft_size=self.N,
            num_taps=min(taps, self.N_f) if td else None)

    def nyquist(self):
        zmax = max(max_doppler(u.profile(self)) for u in self.users) * self.t_sym
        return check_nyquist(self.pattern, self.tau_max_norm, zmax)

    def validate(self):
        """Raise ConfigurationError when the pilot grid aliases."""
        report = self.nyquist()
        if not report.passed:
            raise ConfigurationError(
                f"pilot grid violates Nyquist: D_f*tau_max*df = "
                f"{report.freq_product:.4f}, 2*D_t*zeta_max*T_sym = "
                f"{report.time_product:.4f} (both must be <= 1)")
        try:
            self.pattern.check_fits(self.N_a)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from None
        return report

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["users"] = [dataclasses.asdict(u) for u in self.users]
        return d

    @classmethod
    def from_dict(cls, data, base=None):
        """Build from a mapping; keys absent from ``data`` come from
        ``base`` (or the defaults)."""
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        if "users" in data:
            data["users"] = tuple(UserSpec(**u) if isinstance(u, dict) else u
                                  for u in data["users"])
            data.setdefault("K", len(data["users"]))
        if base is None:
            return cls(**data)
        return dataclasses.replace(base, **data)


def _users(*groups):
    out = []
    for count, scenario, speed in groups:
        out.extend(UserSpec(scenario, speed) for _ in range(count))
    return tuple(out)


PRESETS = {
    "table1_base": dict(K=8, users=_users((8, "separated", 75.0))),
    "table5": dict(K=8, users=_users((2, "packed", 75.0),
                                     (6, "separated", 75.0))),
    "taxonomy_lo_separated": dict(K=1, users=_users((1, "separated", 5.0))),
    "taxonomy_lo_packed": dict(K=1, users=_users((1, "packed", 5.0))),
    "taxonomy_hi_separated": dict(K=1, users=_users((1, "separated", 75.0))),
    "taxonomy_hi_packed": dict(K=1, users=_users((1, "packed", 75.0))),
}


def preset(name):
    """Named scenario with the published system parameters."""
    try:
        return ScenarioConfig(**PRESETS[name])
    except KeyError:
        raise ConfigurationError(
            f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def esprit_decimation(config: ScenarioConfig, user: UserSpec):
    """Pilot-time decimation for the ESPRIT window of one user.

    Slow users barely rotate over one N_t D_t window, so their Dopplers
    cannot be resolved. ``"auto"`` stretches the window by the largest
    integer k that keeps it within the validity horizon and keeps the
    decimated grid free of time aliasing.
    """
    if config.esprit_decimation != "auto":
        k = int(config.esprit_decimation)
        if k < 1:
            raise ConfigurationError("esprit_decimation must be >= 1")
        return k
    prof = user.profile(config)
    vh = validity_horizon(prof, config.t_sym)
    if vh is None:
        return 1
    zmax = max_doppler(prof) * config.t_sym
    k_valid = vh.symbols // config.pattern.window
    k_alias = math.floor(1.0 / (2.0 * config.D_t * zmax))
    return max(1, min(k_valid, k_alias))


@dataclass
class MetricsRecord:
    """Per-block, per-user series of one scheduler run."""

    scheduler: str
    predictor: str
    groups: int
    T: np.ndarray  # (B, K)
    served: np.ndarray  # (B, K) groups served in the block
    nominal: np.ndarray  # (B, K) mean over groups and symbols
    actual: np.ndarray  # (B, K)
    nmse: np.ndarray  # (B, K)
    flags: np.ndarray  # (B, K) 1 = predictable
    fallbacks: np.ndarray  # (K,) predictor fallbacks
    payloads: np.ndarray  # (K,) feedback messages
    payload_reals: np.ndarray  # (K,) real numbers fed back
    alpha_p: list = field(default_factory=list)
    burn_in: int = 0

    @property
    def num_blocks(self):
        return self.T.shape[0]

    @property
    def num_users(self):
        return self.T.shape[1]


class _Stream:
    """Channels, predictions and terminal-side tracking for one seed."""

    def __init__(self, config: ScenarioConfig):
        self.cfg = config
        config.validate()
        ss = np.random.SeedSequence(config.seed)
        chan_ss, noise_ss = ss.spawn(2)
        ccfg = config.channel_config()
        self.ccfg = ccfg
        self.models = [generate_user(u.scenario, u.profile(config),
                                     np.random.default_rng(s), ccfg)
                       for u, s in zip(config.users, chan_ss.spawn(config.K))]
        self.noise = [np.random.default_rng(s) for s in noise_ss.spawn(config.K)]
        self.trackers = [PredictabilityState(config.theta_high, config.theta_low,
                                             config.gamma)
                         for _ in range(config.K)]
        self.tones = config.group_tones
        self.fallbacks = np.zeros(config.K, dtype=int)
        self.payloads = np.zeros(config.K, dtype=int)
        self.payload_reals = np.zeros(config.K, dtype=int)
        K = config.K
        if config.predictor == "esprit":
            self.k_dec = [esprit_decimation(config, u) for u in config.users]
            self.patterns = [PilotPattern(config.D_t * k, config.D_f,
                                          config.N_t, config.N_f)
                             for k in self.k_dec]
            self.estimates = [None] * K
            self.hold = [None] * K
            self.ecfg = esprit.EspritConfig(rho=config.esprit_rho)
        else:
            L = ccfg.num_taps
            wcfg = wiener.WienerConfig(order=config.wiener_order,
                                       forgetting=config.wiener_forgetting,
                                       solver=config.wiener_solver)
            self.wstates = [wiener.WienerState((L, config.M), wcfg)
                            for _ in range(K)]
            pat = config.pattern
            for k in range(K):
                for t in pat.pilot_times(-pat.window):
                    self._wiener_observe(k, t)
        # norm feedback for block 0 comes from the block before it
        t_prev = np.arange(-config.D_t, 0)
        self.norm2 = np.array([
            float(np.mean(np.sum(np.abs(eval_freq(m, t_prev, self.tones)) ** 2,
                                 axis=-1)))
            for m in self.models])

    def _wiener_observe(self, k, t):
        cfg = self.cfg
        one = PilotPattern(1, cfg.D_f, 1, cfg.N_f)
        obs = observe_time(self.models[k], one, cfg.pilot_snr, self.noise[k],
                           t0=t, fft_size=cfg.N, num_taps=self.ccfg.num_taps)
        wiener.update(self.wstates[k], obs.grid[0])

    def _esprit_refresh(self, k, t0):
        pat = self.patterns[k]
        obs = observe_freq(self.models[k], pat, self.cfg.pilot_snr,
                           self.noise[k], t0=t0 - pat.window)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                est = esprit.estimate(obs, self.ecfg)
            if not np.all(np.isfinite(est.amplitudes)):
                raise np.linalg.LinAlgError("non-finite amplitudes")
            self.estimates[k] = est
        except (np.linalg.LinAlgError, ValueError) as exc:
            log.warning("ESPRIT failed for user %d at %d: %s", k, t0, exc)
            self.fallbacks[k] += 1
            # hold the previous fit; without one, hold the latest pilots at
            # the nearest pilot tones
            if self.estimates[k] is None:
                near = np.clip(np.rint(self.tones / pat.D_f).astype(int), 0,
                               pat.N_f - 1)
                self.hold[k] = obs.grid[-1][near]
        return obs

    def blocks(self):
        """Yield (j, flags, H, H_hat, norm2) per pilot block.

        ``H`` and ``H_hat`` are lists of (D_t, G, M) arrays; ``flags`` are
        the predictability flags in force during the block.
        """
        cfg = self.cfg
        D = cfg.D_t
        for j in range(cfg.num_blocks):
            t0 = j * D
            ts = np.arange(t0, t0 + D)
            flags = np.array([tr.predictable for tr in self.trackers])
            H, Hh = [], []
            for k, m in enumerate(self.models):
                H.append(eval_freq(m, ts, self.tones))
                if cfg.predictor == "esprit":
                    W = self.patterns[k].window
                    new_batch = t0 % W == 0
                    if new_batch:
                        self._esprit_refresh(k, t0)
                    if self.estimates[k] is None:
                        Hh.append(np.broadcast_to(self.hold[k], (D,) + self.hold[k].shape))
                    else:
                        Hh.append(esprit.extrapolate(self.estimates[k], ts,
                                                     self.tones))
                    if flags[k] and new_batch:
                        self.payloads[k] += 1
                        self.payload_reals[k] += 2 * min(W, cfg.horizon - t0) \
                            // D * self.tones.size * cfg.M
                else:
                    before = self.wstates[k].fallbacks
                    pred = wiener.predict_freq(self.wstates[k], self.tones, cfg.N)
                    self.fallbacks[k] += self.wstates[k].fallbacks - before
                    Hh.append(np.broadcast_to(pred, (D,) + pred.shape))
                    if flags[k]:
                        self.payloads[k] += 1
                        self.payload_reals[k] += 2 * pred.size
                if not flags[k]:
                    self.payloads[k] += 1
                    self.payload_reals[k] += 1
            yield j, flags, H, Hh, self.norm2.copy()
            # terminals observe the realized block
            for k in range(cfg.K):
                record_error(self.trackers[k], Hh[k], H[k])
                classify(self.trackers[k])
                if cfg.predictor == "wiener":
                    self._wiener_observe(k, t0)
            self.norm2 = np.array([float(np.mean(np.sum(np.abs(h) ** 2, axis=-1)))
                                   for h in H])


def _hfs_alpha(cfg, partition):
    if cfg.hfs_alpha is not None:
        return float(cfg.hfs_alpha)
    if partition.K_np == 0:
        return 1.0
    if partition.K_p == 0:
        return 0.0
    inp = HfsAnalyticsInput(cfg.M, cfg.power, partition.K_p, partition.K_np)
    return alpha_balance(t_p_lower(inp), t_np(inp))


class _SchedulerRun:
    def __init__(self, name, cfg):
        self.name = name
        self.cfg = cfg
        B, K = cfg.num_blocks, cfg.K
        self.ledger = ThroughputLedger(K, cfg.beta, cfg.eps0)
        self.T = np.zeros((B, K))
        self.served = np.zeros((B, K), dtype=int)
        self.nominal = np.zeros((B, K))
        self.actual = np.zeros((B, K))
        self.hfs = None
        self.alpha_log = []
        self._counts = None
        self._window = np.zeros(2)

    def step(self, j, flags, H, Hh, norm2):
        cfg = self.cfg
        P, M, K = cfg.power, cfg.M, cfg.K
        G = cfg.subcarrier_groups
        part = ClassPartition.from_flags(flags)
        if self.name == "hfs":
            counts = (part.K_p, part.K_np)
            if self.hfs is None:
                self.hfs = HfsState(_hfs_alpha(cfg, part), adaptive=cfg.hfs_adaptive)
                self._counts = counts
                self.alpha_log.append((j, self.hfs.alpha_p))
            elif counts != self._counts and not cfg.hfs_adaptive:
                self.hfs.alpha_p = _hfs_alpha(cfg, part)
                self._counts = counts
                self.alpha_log.append((j, self.hfs.alpha_p))
        rate = np.zeros(K)
        nom = np.zeros(K)
        for g in range(G):
            h_start = np.stack([Hh[k][0, g] for k in range(K)])
            if self.name == "pfs":
                dec = pfs_select(h_start, self.ledger, M, P)
            elif self.name == "mpfs":
                dec = mpfs_select(h_start, norm2, self.ledger, part, M, P)
            else:
                dec = hfs_step(self.hfs, h_start, norm2, self.ledger, part, M, P)
            users = list(dec.users)
            self.ledger.record_slot(users)
            if dec.mode == "zf":
                hh = np.stack([Hh[k][:, g] for k in users], axis=1)  # (T, S, M)
                ht = np.stack([H[k][:, g] for k in users], axis=1)
                beams = zf_beams(hh)
                p = np.full(len(users), P / len(users))
                act, _ = actual_rates(ht, beams, p)
                gain = np.abs(np.sum(hh.conj() * np.swapaxes(beams, -1, -2),
                                     axis=-1)) ** 2
                nominal = np.log1p(gain * p)
                for i, k in enumerate(users):
                    rate[k] += act[:, i].mean()
                    nom[k] += nominal[:, i].mean()
            elif dec.mode == "td":
                k = users[0]
                n2 = np.sum(np.abs(H[k][:, g]) ** 2, axis=-1)
                rate[k] += np.log1p(P / M * n2).mean()
                nom[k] += math.log1p(P / M * norm2[k])
            for k in users:
                self.served[j, k] += 1
        rate /= G
        nom /= G
        update_throughputs(self.ledger, rate)
        self.T[j] = self.ledger.T
        self.nominal[j] = nom
        self.actual[j] = rate
        if self.hfs is not None and cfg.hfs_adaptive:
            window = max(1, int(round(1.0 / cfg.beta)))
            if (j + 1) % window == 0:
                lo = j + 1 - window
                r = self.actual[lo:j + 1].mean(axis=0)
                if part.K_p and part.K_np:
                    self.hfs.adapt(r[part.predictable].mean(),
                                   r[part.non_predictable].mean())
                    self.alpha_log.append((j + 1, self.hfs.alpha_p))


def run_schedulers(config: ScenarioConfig, schedulers=None):
    """Run several schedulers on one shared channel/prediction stream.

    Returns a dict scheduler name -> MetricsRecord.
    """
    names = [config.scheduler] if schedulers is None else list(schedulers)
    for n in names:
        if n not in SCHEDULERS:
            raise ConfigurationError(f"unknown scheduler {n!r}")
    stream = _Stream(config)
    runs = {n: _SchedulerRun(n, config) for n in names}
    B, K = config.num_blocks, config.K
    err = np.zeros((B, K))
    flags_log = np.zeros((B, K), dtype=int)
    for j, flags, H, Hh, norm2 in stream.blocks():
        flags_log[j] = flags
        err[j] = [nmse(Hh[k], H[k]) for k in range(K)]
        for r in runs.values():
            r.step(j, flags, H, Hh, norm2)
    burn = config.burn_in
    if burn is None:
        burn = int(round(3.0 / config.beta))
    burn = min(burn, B - 1)
    return {n: MetricsRecord(n, config.predictor, config.subcarrier_groups,
                             r.T, r.served, r.nominal, r.actual, err.copy(),
                             flags_log.copy(), stream.fallbacks.copy(),
                             stream.payloads.copy(),
                             stream.payload_reals.copy(), r.alpha_log, burn)
            for n, r in runs.items()}


def run(config: ScenarioConfig):
    """Run ``config.scheduler`` and return its MetricsRecord."""
    return run_schedulers(config)[config.scheduler]


def summarize(record: MetricsRecord):
    """Aggregate one run into plain Python types.

    Sums of throughputs are averaged over the blocks after the burn-in, when
    the exponential averages have forgotten their initial value. Class
    throughputs assign every user to the class it held in most blocks.
    """
    if record.num_blocks == 0:
        raise ValueError("empty record")
    slots = record.num_blocks * record.groups
    activity = record.served.sum(axis=0) / slots
    tail = record.T[record.burn_in:]
    mean_rate = record.actual.mean(axis=0)
    majority = record.flags.mean(axis=0) >= 0.5
    cls = {}
    for key, mask in (("predictable", majority), ("non_predictable", ~majority)):
        cls[key] = float(mean_rate[mask].mean()) if mask.any() else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        mean_nmse = np.nanmean(record.nmse, axis=0)
    return {
        "scheduler": record.scheduler,
        "predictor": record.predictor,
        "blocks": int(record.num_blocks),
        "slots": int(slots),
        "burn_in": int(record.burn_in),
        "activity": [float(a) for a in activity],
        "sum_throughput": float(tail.sum(axis=1).mean()),
        "sum_log_throughput": float(np.log(tail).sum(axis=1).mean()),
        "final_sum_throughput": float(record.T[-1].sum()),
        "final_sum_log_throughput": float(np.log(record.T[-1]).sum()),
        "mean_rate": [float(r) for r in mean_rate],
        "mean_nmse": [float(e) for e in mean_nmse],
        "predictable_majority": [bool(m) for m in majority],
        "class_throughput": cls,
        "alpha_p": [[int(j), float(a)] for j, a in record.alpha_p],
        "predictor_fallbacks": [int(x) for x in record.fallbacks],
        "feedback_payloads": [int(x) for x in record.payloads],
        "feedback_reals": [int(x) for x in record.payload_reals],
    }


def _fmt(x):
    return format(float(x), ".10g")


def metrics_csv(record: MetricsRecord):
    """CSV text with one row per block per user in CSV_COLUMNS order."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for j in range(record.num_blocks):
        for k in range(record.num_users):
            w.writerow([j, k, _fmt(record.T[j, k]), int(record.served[j, k]),
                        _fmt(record.nominal[j, k]), _fmt(record.actual[j, k]),
                        _fmt(record.nmse[j, k]), int(record.flags[j, k])])
    return buf.getvalue()


def write_outputs(record: MetricsRecord, out_dir, config=None):
    """Write metrics.csv and summary.json into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "metrics.csv").write_text(metrics_csv(record))
    summary = summarize(record)
    if config is not None:
        summary["config"] = config.to_dict()
    (out / "summary.json").write_text(json.dumps(summary, indent=2,
                                                 sort_keys=True) + "\n")
    return summary


def prediction_nmse(config: ScenarioConfig, predictor=None, user=0):
    """Prediction NMSE of one user over its validity horizon.

    ESPRIT fits the pilot window just before symbol 0 and extrapolates
    over min(T_valid, window). Wiener warms up on the same window and then
    predicts one pilot block ahead at a time over min(T_valid, N_t D_t),
    holding each prediction for the block. The NMSE pools all symbols,
    subcarrier groups and antennas.
    """
    predictor = predictor or config.predictor
    cfg = config.replace(predictor=predictor)
    cfg.validate()
    spec = cfg.users[user]
    ss = np.random.SeedSequence(cfg.seed)
    chan_ss, noise_ss = ss.spawn(2)
    rng_c = np.random.default_rng(chan_ss.spawn(cfg.K)[user])
    rng_n = np.random.default_rng(noise_ss.spawn(cfg.K)[user])
    ccfg = cfg.channel_config()
    model = generate_user(spec.scenario, spec.profile(cfg), rng_c, ccfg)
    vh = validity_horizon(spec.profile(cfg), cfg.t_sym)
    tones = cfg.group_tones
    if predictor == "esprit":
        k = esprit_decimation(cfg, spec)
        pat = PilotPattern(cfg.D_t * k, cfg.D_f, cfg.N_t, cfg.N_f)
        hz = pat.window if vh is None else min(vh.symbols, pat.window)
        obs = observe_freq(model, pat, cfg.pilot_snr, rng_n, t0=-pat.window)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            est = esprit.estimate(obs, esprit.EspritConfig(rho=cfg.esprit_rho))
        t = np.arange(0, hz, max(1, cfg.D_t * k // 2))
        return nmse(esprit.extrapolate(est, t, tones), eval_freq(model, t, tones))
    pat = cfg.pattern
    hz = pat.window if vh is None else min(vh.symbols, pat.window)
    L = ccfg.num_taps
    st = wiener.WienerState((L, cfg.M), wiener.WienerConfig(
        order=cfg.wiener_order, forgetting=cfg.wiener_forgetting,
        solver=cfg.wiener_solver))
    one = PilotPattern(1, cfg.D_f, 1, cfg.N_f)

    def observe(t):
        obs = observe_time(model, one, cfg.pilot_snr, rng_n, t0=t,
                           fft_size=cfg.N, num_taps=L)
        wiener.update(st, obs.grid[0])

    for t in pat.pilot_times(-pat.window):
        observe(t)
    err = den = 0.0
    for t0 in range(0, hz - cfg.D_t + 1, cfg.D_t):
        pred = wiener.predict_freq(st, tones, cfg.N)
        H = eval_freq(model, np.arange(t0, t0 + cfg.D_t), tones)
        err += float(np.sum(np.abs(H - pred[None]) ** 2))
        den += float(np.sum(np.abs(H) ** 2))
        observe(t0)
    return err / den
