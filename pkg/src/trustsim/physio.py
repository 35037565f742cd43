"""Skin-conductance synthesis, acquisition simulation, SCR processing, features.

The processing chain mirrors the acquisition protocol: raw conductance at
256 Hz, band-pass filtered phasic response (0.16-2.1 Hz, zero-phase), z-scored
tonic view, per-event ±10 s windows rebased to their first sample, and the
four pre/post difference features per event.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from . import _kernels
from .config import PhysioConfig

log = logging.getLogger(__name__)


class CalibrationError(ValueError):
    pass


class DegenerateSignalError(ValueError):
    pass


class WindowError(ValueError):
    """Event too close to a trace edge for a full ±window extraction."""


@dataclass(frozen=True)
class GsrTrace:
    subject_id: str
    sample_rate: float
    samples: np.ndarray
    event_markers: tuple[tuple[str, float], ...]
    baseline_span: tuple[float, float]

    def __post_init__(self):
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("trace samples must be finite")
        duration = len(self.samples) / self.sample_rate
        for event_id, t in self.event_markers:
            if not 0.0 <= t <= duration:
                raise ValueError(f"marker {event_id} at {t}s outside trace [0, {duration:.1f}]s")

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass
class SubjectProfile:
    tonic_level: float
    drift_per_s: float
    event_amplitudes: dict[str, float]
    latency_s: float
    noise_sd: float

    def __post_init__(self):
        if not 1.0 <= self.latency_s <= 5.0:
            raise ValueError("response latency must lie in [1, 5] s")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be >= 0")


def bateman_peak_time(tau_fast: float, tau_slow: float) -> float:
    """Time to peak of the bi-exponential response kernel."""
    return math.log(tau_slow / tau_fast) * tau_fast * tau_slow / (tau_slow - tau_fast)


def synth_gsr(schedule, duration_s: float, profile: SubjectProfile, seed: int,
              subject_id: str = "s00", cfg: PhysioConfig | None = None,
              baseline_s: float | None = None) -> GsrTrace:
    """Synthetic analog conductance trace for one subject.

    `schedule` is an iterable of (event_id, t_s) markers (a recorded run's
    events.csv or the scenario's trigger schedule). The trace is tonic level
    plus drift, one peak-normalized bi-exponential response per event at the
    subject's latency, and white noise; deterministic per seed.
    """
    cfg = cfg or PhysioConfig()
    if baseline_s is None:
        baseline_s = cfg.baseline_s
    rate = cfg.sample_rate_hz
    markers = tuple((eid, float(t)) for eid, t in schedule)
    n = int(round(duration_s * rate))
    t = np.arange(n) / rate
    trace = profile.tonic_level + profile.drift_per_s * t

    onsets = np.array([t_j + profile.latency_s for _, t_j in markers])
    amps = np.array([profile.event_amplitudes.get(eid, 0.0) for eid, _ in markers])
    if len(onsets):
        trace = trace + _kernels.scr_superpose(n, rate, onsets, amps,
                                               cfg.bateman_tau_fast, cfg.bateman_tau_slow)
    if profile.noise_sd > 0:
        rng = np.random.default_rng(seed)
        trace = trace + profile.noise_sd * rng.standard_normal(n)
    return GsrTrace(subject_id=subject_id, sample_rate=rate, samples=trace,
                    event_markers=markers, baseline_span=(0.0, float(baseline_s)))


@dataclass(frozen=True)
class AdcResult:
    trace: GsrTrace
    gain: float
    offset: float
    saturation_fraction: float


def adc_quantize(trace: GsrTrace, gain: float | None = None, offset: float = 0.0,
                 cfg: PhysioConfig | None = None) -> AdcResult:
    """Digitize to integer a.u. with clamping; auto mode calibrates the gain
    so the baseline mean lands mid-band (200-512 a.u.)."""
    cfg = cfg or PhysioConfig()
    rate = trace.sample_rate
    b0, b1 = trace.baseline_span
    baseline = slice(int(b0 * rate), max(int(b1 * rate), 1))
    auto = gain is None
    if auto:
        mean = float(np.mean(trace.samples[baseline]))
        if mean <= 0:
            raise CalibrationError("baseline mean is not positive; cannot auto-calibrate")
        gain = (cfg.adc_target_au - offset) / mean
    digital = np.clip(np.rint(gain * trace.samples + offset), 0, cfg.adc_full_scale)
    sat = float(np.mean((digital == 0) | (digital == cfg.adc_full_scale)))
    if auto:
        mean_au = float(np.mean(digital[baseline]))
        lo, hi = cfg.adc_band
        if not lo <= mean_au <= hi:
            raise CalibrationError(f"baseline output {mean_au:.0f} a.u. outside {lo:.0f}-{hi:.0f}")
    quantized = GsrTrace(subject_id=trace.subject_id, sample_rate=rate,
                         samples=digital, event_markers=trace.event_markers,
                         baseline_span=trace.baseline_span)
    return AdcResult(trace=quantized, gain=float(gain), offset=float(offset),
                     saturation_fraction=sat)


def design_scr_filter(rate: float, cfg: PhysioConfig | None = None) -> np.ndarray:
    cfg = cfg or PhysioConfig()
    return signal.butter(cfg.filter_order, [cfg.band_low_hz, cfg.band_high_hz],
                         btype="bandpass", fs=rate, output="sos")


def bandpass_scr(samples, rate: float, cfg: PhysioConfig | None = None) -> np.ndarray:
    """Phasic component: zero-phase 3rd-order Butterworth band-pass.

    Forward-backward application doubles the effective order; offline traces
    allow it and it keeps response peaks where they happened.
    """
    cfg = cfg or PhysioConfig()
    x = np.asarray(samples, dtype=np.float64)
    if len(x) <= 10.0 * rate:
        raise DegenerateSignalError("trace shorter than the 10 s filter warm-up")
    sos = design_scr_filter(rate, cfg)
    return signal.sosfiltfilt(sos, x)


def normalize(samples, mode: str) -> np.ndarray:
    x = np.asarray(samples, dtype=np.float64)
    if mode == "zscore":
        sd = float(np.std(x))
        if sd == 0.0:
            raise DegenerateSignalError("constant trace: z-score undefined")
        return (x - np.mean(x)) / sd
    if mode == "minmax":
        lo, hi = float(np.min(x)), float(np.max(x))
        if hi == lo:
            raise DegenerateSignalError("constant trace: min-max undefined")
        return (x - lo) / (hi - lo)
    raise ValueError(f"mode must be zscore or minmax, got {mode!r}")


@dataclass(frozen=True)
class EventWindow:
    event_id: str
    gsr_pre: np.ndarray   # rebased: divided by the window's first sample
    gsr_post: np.ndarray
    scr_pre: np.ndarray   # rebased: first sample subtracted (crosses zero)
    scr_post: np.ndarray

    @property
    def half_samples(self) -> int:
        return len(self.gsr_pre)


def extract_window(gsr_hat: np.ndarray, scr: np.ndarray, rate: float, event_id: str,
                   t_event: float, window_s: float = 10.0) -> EventWindow:
    """±window_s around the event: pre = [t-w, t), post = [t, t+w)."""
    L = int(round(window_s * rate))
    i = int(round(t_event * rate))
    if i - L < 0 or i + L > len(gsr_hat):
        raise WindowError(f"event {event_id} at {t_event:.1f}s lacks a ±{window_s:.0f}s margin")
    g = gsr_hat[i - L:i + L]
    s = scr[i - L:i + L]
    g0 = g[0]
    if g0 == 0.0:
        raise DegenerateSignalError(f"event {event_id}: window starts at exactly zero")
    g = g / g0
    s = s - s[0]
    return EventWindow(event_id=event_id, gsr_pre=g[:L], gsr_post=g[L:],
                       scr_pre=s[:L], scr_post=s[L:])


@dataclass(frozen=True)
class FeatureRow:
    subject: str
    event: str
    d_p2p: float
    d_max: float
    d_mean: float
    d_acc: float

    def __post_init__(self):
        for name in ("d_p2p", "d_max", "d_mean", "d_acc"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


def _half_features(g: np.ndarray, s: np.ndarray) -> tuple[float, float, float, float]:
    L = len(g)
    total = float(np.sum(g))
    return (float(np.max(s) - np.min(s)),  # p2p on the phasic view
            float(np.max(g)),
            total / L,
            total)


def extract_features(window: EventWindow, subject: str = "s00") -> FeatureRow:
    """Post-minus-pre differences of p2p, max, mean and accumulated values."""
    p2p_pre, max_pre, mean_pre, acc_pre = _half_features(window.gsr_pre, window.scr_pre)
    p2p_post, max_post, mean_post, acc_post = _half_features(window.gsr_post, window.scr_post)
    return FeatureRow(subject=subject, event=window.event_id,
                      d_p2p=p2p_post - p2p_pre, d_max=max_post - max_pre,
                      d_mean=mean_post - mean_pre, d_acc=acc_post - acc_pre)


def subject_features(trace: GsrTrace, cfg: PhysioConfig | None = None) -> list[FeatureRow]:
    """Full per-subject pipeline: filter, z-score over the in-simulation span,
    window every marker, extract features. Events without margin are skipped."""
    cfg = cfg or PhysioConfig()
    rate = trace.sample_rate
    x = trace.samples
    start = int(trace.baseline_span[1] * rate)
    segment = x[start:]
    sd = float(np.std(segment))
    if sd == 0.0:
        raise DegenerateSignalError("in-simulation span is constant")
    gsr_hat = (x - float(np.mean(segment))) / sd
    # phasic view of the standardized signal: keeps features comparable
    # across subjects regardless of electrode gain and ADC calibration
    scr = bandpass_scr(gsr_hat, rate, cfg)

    rows: list[FeatureRow] = []
    for event_id, t_event in trace.event_markers:
        try:
            window = extract_window(gsr_hat, scr, rate, event_id, t_event, cfg.window_s)
        except WindowError as exc:
            log.warning("subject %s: %s (event excluded)", trace.subject_id, exc)
            continue
        rows.append(extract_features(window, subject=trace.subject_id))
    return rows


# ---------------------------------------------------------------------------
# signal file round-trip (recorded data uses the same format)


def write_signal_csv(trace: GsrTrace, signal_path: str, marker_path: str) -> None:
    rate = trace.sample_rate
    with open(signal_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_s", "gsr_au"])
        for i, v in enumerate(trace.samples):
            w.writerow([f"{i / rate:.6f}", f"{v:.6f}"])
    with open(marker_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["event_id", "t_s"])
        for event_id, t in trace.event_markers:
            w.writerow([event_id, f"{t:.6f}"])


def read_signal_csv(signal_path: str, marker_path: str, subject_id: str = "s00",
                    baseline_s: float = 60.0) -> GsrTrace:
    times, values = [], []
    with open(signal_path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            times.append(float(row["t_s"]))
            values.append(float(row["gsr_au"]))
    if len(times) < 2:
        raise ValueError(f"{signal_path}: need at least two samples")
    rate = 1.0 / (times[1] - times[0])
    markers = []
    with open(marker_path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            markers.append((row["event_id"], float(row["t_s"])))
    return GsrTrace(subject_id=subject_id, sample_rate=round(rate, 6),
                    samples=np.asarray(values, dtype=np.float64),
                    event_markers=tuple(markers), baseline_span=(0.0, baseline_s))
