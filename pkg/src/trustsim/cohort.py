"""Synthetic cohorts: per-subject conductance traces through the full pipeline.

A cohort draws one response profile per subject (group-dependent event
amplitudes), synthesizes and digitizes each trace, runs feature extraction,
and emits the long-format feature table used by the analysis protocol.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .config import PhysioConfig
from .physio import (FeatureRow, SubjectProfile, adc_quantize, subject_features,
                     synth_gsr, write_signal_csv)
from .scenario import ScenarioDef

FEATURE_TABLE_HEADER = ("subject", "group", "event", "dP2P", "dMax", "dMean", "dAcc")

# amplitudes that elicit a response only for the arousing encounters
DEFAULT_AMPLITUDES = {
    "Dog": 0.55,
    "Ball": 0.45,
    "Scooter": 0.0,
    "Car1": 0.60,
    "Man1": 0.0,
    "Car2": 0.80,
    "Man2": 0.65,
}


@dataclass
class CohortSpec:
    n_omn: int = 15
    n_sel: int = 15
    base_amplitudes: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_AMPLITUDES))
    sel_scale: float = 1.5
    amp_jitter: float = 0.2
    tonic_range: tuple[float, float] = (2.0, 4.0)
    drift_range: tuple[float, float] = (0.0004, 0.0012)
    latency_range: tuple[float, float] = (1.2, 3.5)
    noise_sd: float = 0.02

    def __post_init__(self):
        if self.n_omn < 1 or self.n_sel < 1:
            raise ValueError("cohorts need at least one subject per group")


@dataclass(frozen=True)
class CohortRow:
    subject: str
    group: str
    event: str
    d_p2p: float
    d_max: float
    d_mean: float
    d_acc: float


def event_schedule(scenario: ScenarioDef, baseline_s: float) -> tuple[tuple[str, float], ...]:
    """Trace-relative event markers from the scenario's trigger schedule."""
    return tuple((ev.event_id, baseline_s + ev.trigger_time_s) for ev in scenario.events)


def draw_profile(rng: np.random.Generator, spec: CohortSpec, group: str) -> SubjectProfile:
    scale = spec.sel_scale if group == "SEL" else 1.0
    jitter = 1.0 + spec.amp_jitter * (2.0 * rng.random() - 1.0)
    amps = {eid: a * scale * jitter for eid, a in spec.base_amplitudes.items()}
    return SubjectProfile(
        tonic_level=rng.uniform(*spec.tonic_range),
        drift_per_s=rng.uniform(*spec.drift_range),
        event_amplitudes=amps,
        latency_s=rng.uniform(*spec.latency_range),
        noise_sd=spec.noise_sd)


def synthesize_subject(subject_id: str, group: str, schedule, duration_s: float,
                       profile: SubjectProfile, seed: int,
                       cfg: PhysioConfig | None = None):
    cfg = cfg or PhysioConfig()
    analog = synth_gsr(schedule, duration_s, profile, seed, subject_id=subject_id, cfg=cfg)
    digital = adc_quantize(analog, cfg=cfg).trace
    return digital


def make_cohort(scenario: ScenarioDef, spec: CohortSpec, seed: int,
                cfg: PhysioConfig | None = None,
                signals_dir: str | None = None) -> list[CohortRow]:
    """Feature rows for n_omn + n_sel synthetic subjects; deterministic per seed."""
    cfg = cfg or PhysioConfig()
    schedule = event_schedule(scenario, cfg.baseline_s)
    duration = cfg.baseline_s + scenario.duration_s
    members = ([("OMN", f"omn{i:02d}") for i in range(spec.n_omn)]
               + [("SEL", f"sel{i:02d}") for i in range(spec.n_sel)])
    children = np.random.SeedSequence(seed).spawn(len(members))
    rows: list[CohortRow] = []
    for (group, subject), child in zip(members, children):
        rng = np.random.default_rng(child)
        profile = draw_profile(rng, spec, group)
        noise_seed = int(rng.integers(0, 2**63 - 1))
        trace = synthesize_subject(subject, group, schedule, duration, profile,
                                   noise_seed, cfg)
        if signals_dir is not None:
            os.makedirs(signals_dir, exist_ok=True)
            write_signal_csv(trace, os.path.join(signals_dir, f"{subject}.csv"),
                             os.path.join(signals_dir, f"{subject}_markers.csv"))
        for feat in subject_features(trace, cfg):
            rows.append(CohortRow(subject=subject, group=group, event=feat.event,
                                  d_p2p=feat.d_p2p, d_max=feat.d_max,
                                  d_mean=feat.d_mean, d_acc=feat.d_acc))
    return rows


def write_feature_table(rows, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(FEATURE_TABLE_HEADER)
        for r in rows:
            w.writerow([r.subject, r.group, r.event,
                        f"{r.d_p2p:.9g}", f"{r.d_max:.9g}",
                        f"{r.d_mean:.9g}", f"{r.d_acc:.9g}"])


def read_feature_table(path: str) -> list[CohortRow]:
    rows: list[CohortRow] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in FEATURE_TABLE_HEADER if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        for i, row in enumerate(reader, start=2):
            try:
                rows.append(CohortRow(
                    subject=row["subject"], group=row["group"], event=row["event"],
                    d_p2p=float(row["dP2P"]), d_max=float(row["dMax"]),
                    d_mean=float(row["dMean"]), d_acc=float(row["dAcc"])))
            except (ValueError, KeyError) as exc:
                raise ValueError(f"{path}: row {i}: {exc}") from None
    return rows


def features_from_signal_files(pairs, group_of, cfg: PhysioConfig | None = None) -> list[CohortRow]:
    """Feature rows from recorded signal files.

    `pairs` is an iterable of (subject_id, signal_path, marker_path); recorded
    data is accepted interchangeably with synthetic traces.
    """
    from .physio import read_signal_csv

    cfg = cfg or PhysioConfig()
    rows: list[CohortRow] = []
    for subject_id, signal_path, marker_path in pairs:
        trace = read_signal_csv(signal_path, marker_path, subject_id=subject_id,
                                baseline_s=cfg.baseline_s)
        for feat in subject_features(trace, cfg):
            rows.append(CohortRow(subject=subject_id, group=group_of(subject_id),
                                  event=feat.event, d_p2p=feat.d_p2p, d_max=feat.d_max,
                                  d_mean=feat.d_mean, d_acc=feat.d_acc))
    return rows
