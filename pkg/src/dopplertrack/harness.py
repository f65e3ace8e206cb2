"""Monte-Carlo experiment runner.

Wires channel -> frontend -> tracker for configured scenario grids,
computes per-trial error metrics, and writes per-symbol and summary CSV
files. Scenarios come from YAML config files or built-in presets.
"""

import math
import os
import warnings
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from . import frontend, tracker
from .channel import ChannelProfile, OfdmGeometry, make_fading, time_avg_cfr

# convergence metric: first symbol where the rolling median (window 50)
# of normalized error stays below the threshold for 100 symbols
CONV_WINDOW = 50
CONV_THRESHOLD = 0.25
CONV_HOLD = 100
FINAL_WINDOW = 50


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class Scenario:
    scenario_id: str
    profile: ChannelProfile
    f_d: float
    snr_db: float
    duration_ms: float
    trials: int = 20
    master_seed: int = 12345
    geo: OfdmGeometry = field(default_factory=OfdmGeometry)
    tracker_cfg: tracker.TrackerConfig = None
    m_avg: int = 64
    n_oscillators: int = 64
    delay_drift_ns_per_s: float = 0.0

    def __post_init__(self):
        if self.duration_ms <= 0:
            raise ConfigError("duration_ms must be positive")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.f_d < 0:
            raise ConfigError("f_d must be non-negative")
        if self.tracker_cfg is None:
            object.__setattr__(self, "tracker_cfg",
                               tracker.TrackerConfig(geo=self.geo))
        self.profile.normalized_delays(self.geo)  # validates CP fit
        if self.f_d * self.geo.symbol_duration > 0.1:
            warnings.warn(
                "f_d*T_s = %.3f exceeds 0.1; outside the model's validity region"
                % (self.f_d * self.geo.symbol_duration), stacklevel=2)

    @property
    def n_symbols(self):
        return int(self.duration_ms * 1e-3 / self.geo.symbol_duration)


@dataclass(frozen=True)
class TrialResult:
    scenario: Scenario
    trial: int
    estimates: tuple  # of tracker.DopplerEstimate

    @property
    def fd_series(self):
        return np.array([e.fd_hat for e in self.estimates])

    @property
    def final_fd_hat(self):
        """Median of the trailing window of per-symbol estimates."""
        s = self.fd_series
        return float(np.median(s[-min(FINAL_WINDOW, len(s)):]))

    @property
    def median_fd_hat(self):
        return float(np.median(self.fd_series))

    @property
    def norm_err(self):
        if self.scenario.f_d == 0:
            return math.nan
        return abs(self.final_fd_hat - self.scenario.f_d) / self.scenario.f_d

    @property
    def convergence_symbol(self):
        """First index where the rolling-median error holds below threshold.

        None if the trial never converges (or f_d is zero, where the
        normalized error is undefined).
        """
        fd = self.scenario.f_d
        if fd == 0:
            return None
        err = np.abs(self.fd_series - fd) / fd
        n = len(err)
        if n < CONV_WINDOW:
            return None
        med = np.array([np.median(err[max(0, i - CONV_WINDOW + 1):i + 1])
                        for i in range(n)])
        below = med < CONV_THRESHOLD
        run = 0
        for i in range(n):
            run = run + 1 if below[i] else 0
            if run >= CONV_HOLD:
                return i - run + 1
        return None

    @property
    def flag_counts(self):
        counts = {"warmup": 0, "eta_clamped": 0, "not_converged": 0}
        for e in self.estimates:
            for label in e.flags.labels():
                counts[label] += 1
        return counts


def _trial_seed_words(scenario, trial_index):
    sc_hash = zlib.crc32(scenario.scenario_id.encode("utf-8"))
    ss = np.random.SeedSequence((scenario.master_seed, sc_hash, trial_index))
    return [int(w) for w in ss.generate_state(2, dtype=np.uint64)]


def run_trial(scenario, trial_index):
    """Run one end-to-end trial, deterministic in (scenario, trial_index)."""
    fading_seed, noise_seed = _trial_seed_words(scenario, trial_index)
    fad = make_fading(scenario.profile, scenario.f_d, fading_seed,
                      scenario.n_oscillators)
    noise_rng = np.random.default_rng(noise_seed)
    cfg = scenario.tracker_cfg
    state = tracker.TrackerState(scenario.geo.n_pilots, cfg)
    estimates = []
    for n in range(scenario.n_symbols):
        cfr = time_avg_cfr(fad, scenario.geo, scenario.profile, n,
                           m_avg=scenario.m_avg,
                           drift_ns_per_s=scenario.delay_drift_ns_per_s)
        snap = frontend.ls_observe(cfr, scenario.snr_db, noise_rng, n=n)
        estimates.append(tracker.step(state, snap, cfg))
    return TrialResult(scenario=scenario, trial=trial_index,
                       estimates=tuple(estimates))


def _run_trial_packed(args):
    return run_trial(*args)


def run_grid(scenarios, parallelism=1):
    """Run every (scenario, trial) pair; failures are recorded, not fatal.

    Returns (results, errors): results sorted by (scenario_id, trial),
    errors as (scenario_id, trial, message) tuples.
    """
    jobs = [(s, t) for s in scenarios for t in range(s.trials)]
    results, errors = [], []
    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            futures = [(s, t, pool.submit(run_trial, s, t)) for s, t in jobs]
            for s, t, fut in futures:
                try:
                    results.append(fut.result())
                except Exception as exc:
                    errors.append((s.scenario_id, t, str(exc)))
    else:
        for s, t in jobs:
            try:
                results.append(run_trial(s, t))
            except Exception as exc:  # grid keeps going
                errors.append((s.scenario_id, t, str(exc)))
    results.sort(key=lambda r: (r.scenario.scenario_id, r.trial))
    return results, errors


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return repr(x) if isinstance(x, float) else str(x)


def emit_csv(results, out_dir):
    """Write per_symbol.csv and summary.csv into out_dir.

    Rows are sorted by (scenario_id, fd_true, snr_db, trial, n) so byte
    output is stable regardless of execution order.
    """
    os.makedirs(out_dir, exist_ok=True)
    results = sorted(results, key=lambda r: (r.scenario.scenario_id,
                                             r.scenario.f_d,
                                             r.scenario.snr_db, r.trial))
    per_path = os.path.join(out_dir, "per_symbol.csv")
    with open(per_path, "w", encoding="utf-8", newline="\n") as f:
        f.write("scenario_id,trial,n,fd_hat_hz,eta_hat,L_hat,"
                "sigma_n2_hat,newton_iters,flags\n")
        for r in results:
            sid = r.scenario.scenario_id
            for e in r.estimates:
                f.write("%s,%d,%d,%s,%s,%d,%s,%d,%s\n" % (
                    sid, r.trial, e.n, _fmt(e.fd_hat), _fmt(e.eta_hat),
                    e.L_hat, _fmt(e.sigma_n2_hat), e.newton_iters,
                    "|".join(e.flags.labels())))

    groups = {}
    for r in results:
        groups.setdefault(r.scenario.scenario_id, []).append(r)
    summary_path = os.path.join(out_dir, "summary.csv")
    with open(summary_path, "w", encoding="utf-8", newline="\n") as f:
        f.write("scenario_id,fd_true,snr_db,duration_ms,median_fd_hat,"
                "mean_norm_err,p10_fd_hat,p90_fd_hat,convergence_symbol\n")
        for sid in sorted(groups):
            rs = groups[sid]
            s = rs[0].scenario
            finals = np.array([r.final_fd_hat for r in rs])
            errs = np.array([r.norm_err for r in rs])
            conv = [r.convergence_symbol for r in rs]
            conv_known = [c for c in conv if c is not None]
            f.write("%s,%s,%s,%s,%s,%s,%s,%s,%s\n" % (
                sid, _fmt(float(s.f_d)), _fmt(float(s.snr_db)),
                _fmt(float(s.duration_ms)),
                _fmt(float(np.median(finals))),
                _fmt(float(np.mean(errs))),
                _fmt(float(np.percentile(finals, 10))),
                _fmt(float(np.percentile(finals, 90))),
                _fmt(float(np.median(conv_known))) if conv_known else ""))
    return per_path, summary_path


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def scenarios_from_config(doc, seed_override=None):
    """Expand a config mapping into a scenario list.

    fd_hz, snr_db, duration_ms and profile may be lists; the cartesian
    product over those axes defines the grid.
    """
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a mapping")
    geo_cfg = doc.get("geometry", {})
    try:
        geo = OfdmGeometry(
            n_tones=int(geo_cfg.get("tones", 1024)),
            cp_len=int(geo_cfg.get("cp_length", 128)),
            t_sample=float(geo_cfg.get("sample_period_ns", 1e9 / 12e6)) * 1e-9,
            n_pilots=int(geo_cfg.get("pilots", 128)),
        )
    except Exception as exc:
        raise ConfigError("bad geometry section: %s" % exc) from exc
    trk_cfg = doc.get("tracker", {})
    try:
        trk = tracker.TrackerConfig(
            alpha=float(trk_cfg.get("alpha", 0.995)),
            beta=int(trk_cfg.get("lag", 1)),
            max_rank=int(trk_cfg.get("max_rank", 10)),
            series_order=int(trk_cfg.get("series_order", 8)),
            geo=geo,
        )
    except Exception as exc:
        raise ConfigError("bad tracker section: %s" % exc) from exc

    profiles = []
    for p in _as_list(doc.get("profile", "eva")):
        try:
            if isinstance(p, str):
                profiles.append(ChannelProfile.preset(p))
            else:
                profiles.append(ChannelProfile.from_dict(p))
        except Exception as exc:
            raise ConfigError("bad profile entry %r: %s" % (p, exc)) from exc

    seed = int(seed_override if seed_override is not None
               else doc.get("master_seed", 12345))
    scenarios = []
    try:
        fds = [float(x) for x in _as_list(doc.get("fd_hz", 400.0))]
        snrs = [float(x) for x in _as_list(doc.get("snr_db", 15.0))]
        durs = [float(x) for x in _as_list(doc.get("duration_ms", 40.0))]
        trials = int(doc.get("trials", 20))
        drift = float(doc.get("delay_drift_ns_per_s", 0.0))
        m_avg = int(doc.get("m_avg", 64))
    except (TypeError, ValueError) as exc:
        raise ConfigError("bad scalar field: %s" % exc) from exc
    for prof in profiles:
        for fd in fds:
            for snr in snrs:
                for dur in durs:
                    sid = "%s_fd%g_snr%g_dur%g" % (prof.name, fd, snr, dur)
                    try:
                        scenarios.append(Scenario(
                            scenario_id=sid, profile=prof, f_d=fd, snr_db=snr,
                            duration_ms=dur, trials=trials, master_seed=seed,
                            geo=geo, tracker_cfg=trk, m_avg=m_avg,
                            delay_drift_ns_per_s=drift))
                    except ConfigError:
                        raise
                    except Exception as exc:
                        raise ConfigError("bad scenario %s: %s" % (sid, exc)) from exc
    if not scenarios:
        raise ConfigError("config expands to zero scenarios")
    return scenarios


def load_config(path, seed_override=None):
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = yaml.safe_load(f)
    except OSError as exc:
        raise ConfigError("cannot read config %s: %s" % (path, exc)) from exc
    except yaml.YAMLError as exc:
        raise ConfigError("config parse error in %s: %s" % (path, exc)) from exc
    return scenarios_from_config(doc, seed_override=seed_override)


PRESETS = {
    "eva": {"profile": "eva", "fd_hz": 400.0, "snr_db": 15.0,
            "duration_ms": 40.0, "trials": 20},
    "etu": {"profile": "etu", "fd_hz": 400.0, "snr_db": 15.0,
            "duration_ms": 40.0, "trials": 20},
    # full accuracy grid: both profiles, three Doppler spreads, SNR sweep
    "snr-sweep": {"profile": ["eva", "etu"],
                  "fd_hz": [200.0, 400.0, 600.0],
                  "snr_db": [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
                  "duration_ms": [20.0, 40.0], "trials": 20},
    # long observations at fixed SNR for per-symbol convergence traces
    "convergence": {"profile": ["eva", "etu"],
                    "fd_hz": [200.0, 400.0, 600.0],
                    "snr_db": 15.0, "duration_ms": 100.0, "trials": 20},
}


def preset_scenarios(name, seed_override=None):
    if name not in PRESETS:
        raise ConfigError("unknown preset %r (have %s)"
                          % (name, ", ".join(sorted(PRESETS))))
    return scenarios_from_config(dict(PRESETS[name]), seed_override=seed_override)
