"""Synthetic sessions with known ground truth.

`gen_eda` builds a single trace as tonic ramp + normalized response pulses +
white noise, exactly in that additive order, so tests can hold the generator
to bit-level accounting. `gen_session` lays out a full session directory
(EDA, environment, events, ratings, self-reports) and can plant a monotone
relation between one environment channel and the strength of in-band
sympathetic activity, which downstream models are expected to rediscover.

Environment values mimic plausible indoor magnitudes only so the synthetic
data exercises realistic ranges; they carry no empirical claim. Noise is
white Gaussian; slow physiological drift beyond the linear term is omitted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidSpec
from .ingest import (
    ENV_CHANNELS,
    EnvTrace,
    EventTimeline,
    RawEdaTrace,
    SamResponse,
    SelfReport,
    TimelineEvent,
    write_eda_csv,
    write_env_csv,
    write_events_csv,
    write_reports_csv,
    write_sam_csv,
)

__all__ = ["SynthSpec", "GroundTruth", "gen_eda", "gen_session", "RELATIONS",
           "SESSION_FILES"]

BATEMAN_TAU = (2.0, 0.7)
RELATIONS = ("co2_suppresses_feature", "ir_raises_feature", "none")
SESSION_FILES = ("eda.csv", "env.csv", "events.csv", "sam.csv", "reports.csv",
                 "ground_truth.json")

_ENV_RANGES = {
    "noise_db": (35.0, 70.0),
    "ir": (50.0, 900.0),
    "dust": (5.0, 80.0),
    "co2_ppm": (450.0, 1800.0),
    "temp_c": (20.0, 34.0),
    "rh_pct": (30.0, 85.0),
    "pressure": (990.0, 1030.0),
    "wind": (0.0, 3.0),
}


@dataclass(frozen=True)
class SynthSpec:
    duration_s: float
    sample_rate: float = 10.0
    tonic_level: float = 1.0       # uS
    tonic_drift: float = 0.0       # uS per minute
    scr_times: tuple = ()          # s
    scr_amplitudes: tuple = ()     # uS
    noise_std: float = 0.0         # uS
    seed: int = 0
    start_ms: int = 0

    def __post_init__(self):
        if self.duration_s <= 0 or self.sample_rate <= 0:
            raise InvalidSpec("duration and sample_rate must be positive")
        if len(self.scr_times) != len(self.scr_amplitudes):
            raise InvalidSpec("scr_times and scr_amplitudes lengths differ")
        for t in self.scr_times:
            if not (0.0 <= t <= self.duration_s):
                raise InvalidSpec(f"response time {t} outside [0, duration]")
        for a in self.scr_amplitudes:
            if a <= 0:
                raise InvalidSpec("response amplitudes must be positive")
        if self.noise_std < 0:
            raise InvalidSpec("noise_std must be nonnegative")


@dataclass(frozen=True)
class GroundTruth:
    tonic: np.ndarray = field(repr=False)
    phasic: np.ndarray = field(repr=False)
    scr_times_s: tuple
    scr_amplitudes: tuple
    relation: dict | None = None


def _pulse(n, sample_rate, t_pulse, amplitude, tau0, tau1):
    """Sampled response pulse, normalized so its on-grid maximum equals the
    requested amplitude even when the pulse time falls between samples."""
    k0 = math.ceil(t_pulse * sample_rate - 1e-9)
    span = int(math.ceil(6.0 * tau0 * sample_rate))
    offs = (k0 + np.arange(span)) / sample_rate - t_pulse
    h = np.exp(-offs / tau0) - np.exp(-offs / tau1)
    peak = h.max()
    out = np.zeros(n)
    take = min(span, n - k0)
    if take > 0 and peak > 0:
        out[k0:k0 + take] = amplitude * h[:take] / peak
    return out


def gen_eda(spec: SynthSpec):
    """Deterministic trace = tonic + sum of pulses + noise; returns the trace
    and its ground truth. The caller must keep tonic_level high enough that
    noise cannot push conductance negative."""
    tau0, tau1 = BATEMAN_TAU
    n = int(round(spec.duration_s * spec.sample_rate))
    t = np.arange(n) / spec.sample_rate
    tonic = spec.tonic_level + spec.tonic_drift * (t / 60.0)
    phasic = np.zeros(n)
    for tp, amp in zip(spec.scr_times, spec.scr_amplitudes):
        phasic += _pulse(n, spec.sample_rate, tp, amp, tau0, tau1)
    samples = tonic + phasic
    if spec.noise_std > 0:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(spec.seed)))
        samples = samples + rng.normal(0.0, spec.noise_std, n)
    trace = RawEdaTrace(start_time=spec.start_ms, sample_rate=spec.sample_rate,
                        samples=samples)
    truth = GroundTruth(
        tonic=tonic,
        phasic=phasic,
        scr_times_s=tuple(spec.scr_times),
        scr_amplitudes=tuple(spec.scr_amplitudes),
    )
    return trace, truth


# --- full session -----------------------------------------------------------

_STIMULUS_INTENSITY = {
    "baseline": 0.12,
    "stimulus_pristine": 0.20,
    "prompting": 0.55,
    "stimulus_polluted": 0.70,
    "stimulus_genfill": 0.92,
}


def _intensity_to_rate(intensity):
    # capped at 10/min so discrete responses stay separated (no merge losses)
    return 2.0 + 8.0 * intensity       # responses per minute


def _intensity_to_amp(intensity):
    # bigger responses with arousal; the denser+bigger pulse train is itself
    # the in-band spectral content that drives the time-varying index
    return 0.12 + 0.50 * intensity     # uS


def _intensity_to_osc(intensity):
    # kept below the response-masking threshold: a 0.1 Hz tone of amplitude a
    # has slope 0.63*a, which must stay under the ~0.28*amp decay slope of
    # the discrete responses for their local maxima to survive
    return 0.04 + 0.22 * intensity     # in-band oscillation amplitude, uS


def _event_scr_times(rng, start_s, dur_s, rate_per_min):
    count = int(round(rate_per_min * dur_s / 60.0))
    if count <= 0:
        return []
    spacing = dur_s / count
    jitter = rng.uniform(-0.2, 0.2, count) * spacing
    times = start_s + (np.arange(count) + 0.5) * spacing + jitter
    return [float(x) for x in times if start_s + 1.0 < x < start_s + dur_s - 3.0]


def _tapered_tone(t, start_s, dur_s, amp, freq=0.1, ramp_s=5.0):
    mask = (t >= start_s) & (t < start_s + dur_s)
    local = t[mask] - start_s
    env = np.ones(local.size)
    if ramp_s > 0:
        up = local < ramp_s
        env[up] = 0.5 * (1 - np.cos(np.pi * local[up] / ramp_s))
        down = local > dur_s - ramp_s
        env[down] = 0.5 * (1 - np.cos(np.pi * (dur_s - local[down]) / ramp_s))
    out = np.zeros(t.size)
    out[mask] = amp * env * np.sin(2 * np.pi * freq * local)
    return out


def _sam_for(rng, label, intensity):
    def clip19(v):
        return int(min(9, max(1, round(v))))

    arousal = clip19(1 + 8 * (intensity + rng.normal(0, 0.04)))
    if label in ("stimulus_polluted", "stimulus_genfill"):
        valence = clip19(9 - 8 * (intensity + rng.normal(0, 0.04)))
    elif label == "stimulus_pristine":
        valence = clip19(7 + rng.normal(0, 0.5))
    else:
        valence = clip19(5 + rng.normal(0, 1.0))
    dominance = clip19(1 + 8 * (0.25 + 0.5 * intensity + rng.normal(0, 0.06)))
    return arousal, valence, dominance


def gen_session(out_dir, n_windows: int = 8, relation: str = "none", seed: int = 0,
                *, task_s: float = 120.0, baseline_s: float = 30.0,
                survey_s: float = 30.0, stimuli_blocks: int = 0,
                sample_rate: float = 10.0, env_rate: float = 1.0,
                noise_std: float = 0.01) -> dict:
    """Write a complete session directory and return its manifest.

    Each window contributes a baseline, a task, and a survey event; optional
    stimulus blocks append baseline/pristine/polluted/genfill/prompting
    events with graded planted intensities. Under a non-'none' relation the
    chosen environment channel monotonically drives each task window's
    response rate and in-band oscillation amplitude.
    """
    if n_windows < 2:
        raise InvalidSpec("need at least 2 windows")
    if relation not in RELATIONS:
        raise InvalidSpec(f"relation must be one of {RELATIONS}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))

    # --- timeline ---
    events = []
    cursor = 0.0

    def add_event(eid, label, dur):
        nonlocal cursor
        events.append((eid, cursor, cursor + dur, label))
        cursor += dur

    for w in range(n_windows):
        add_event(f"b{w:02d}", "baseline", baseline_s)
        add_event(f"w{w:02d}", "task", task_s)
        add_event(f"s{w:02d}", "survey", survey_s)
    for k in range(stimuli_blocks):
        add_event(f"xb{k:02d}", "baseline", 90.0)
        add_event(f"xp{k:02d}", "stimulus_pristine", 90.0)
        add_event(f"xo{k:02d}", "stimulus_polluted", 90.0)
        add_event(f"xg{k:02d}", "stimulus_genfill", 90.0)
        add_event(f"xr{k:02d}", "prompting", 90.0)
    total_s = cursor + 2.0

    # --- environment bases and planted intensities ---
    env_base = {name: rng.uniform(*_ENV_RANGES[name], size=len(events))
                for name in ENV_CHANNELS}
    intensities = np.zeros(len(events))
    if relation == "co2_suppresses_feature":
        drive_chan, direction = "co2_ppm", -1.0
    elif relation == "ir_raises_feature":
        drive_chan, direction = "ir", +1.0
    else:
        drive_chan, direction = None, 0.0
    for k, (eid, start, end, label) in enumerate(events):
        if label == "task":
            if drive_chan is None:
                intensities[k] = rng.uniform(0.05, 0.95)
            else:
                lo, hi = _ENV_RANGES[drive_chan]
                frac = (env_base[drive_chan][k] - lo) / (hi - lo)
                raw = frac if direction > 0 else 1.0 - frac
                intensities[k] = float(np.clip(raw + rng.normal(0, 0.02), 0.0, 1.0))
        elif label in _STIMULUS_INTENSITY:
            intensities[k] = float(np.clip(
                _STIMULUS_INTENSITY[label] + rng.normal(0, 0.03), 0.0, 1.0
            ))
        else:  # survey
            intensities[k] = 0.15

    # --- EDA construction ---
    n = int(round(total_s * sample_rate))
    t = np.arange(n) / sample_rate
    tonic_level = 1.6
    tonic_drift = 0.004   # uS per minute
    tonic = tonic_level + tonic_drift * (t / 60.0)
    phasic = np.zeros(n)
    oscillation = np.zeros(n)
    window_truth = []
    all_times, all_amps = [], []
    tau0, tau1 = BATEMAN_TAU
    for k, (eid, start, end, label) in enumerate(events):
        dur = end - start
        if label == "baseline":
            rate, amp_mid, osc_amp = 2.5, 0.14, 0.04
        elif label == "survey":
            rate, amp_mid, osc_amp = 4.0, 0.18, 0.05
        else:
            rate = _intensity_to_rate(intensities[k])
            amp_mid = _intensity_to_amp(intensities[k])
            osc_amp = _intensity_to_osc(intensities[k])
        times = _event_scr_times(rng, start, dur, rate)
        amps = [float(a) for a in amp_mid * rng.uniform(0.8, 1.2, len(times))]
        for tp, amp in zip(times, amps):
            phasic += _pulse(n, sample_rate, tp, amp, tau0, tau1)
        oscillation += _tapered_tone(t, start, dur, osc_amp)
        all_times.extend(times)
        all_amps.extend(amps)
        window_truth.append(
            {
                "event_id": eid,
                "label": label,
                "intensity": float(intensities[k]),
                "scr_rate_per_min": float(60.0 * len(times) / dur),
                "scr_amplitude_mid": float(amp_mid),
                "osc_amplitude": float(osc_amp),
                "scr_times_s": times,
                "env": {name: float(env_base[name][k]) for name in ENV_CHANNELS},
            }
        )
    noise = rng.normal(0.0, noise_std, n) if noise_std > 0 else np.zeros(n)
    eda = RawEdaTrace(start_time=0, sample_rate=sample_rate,
                      samples=tonic + phasic + oscillation + noise)

    # --- environment trace at env_rate ---
    n_env = int(round(total_s * env_rate))
    env_t = np.arange(n_env) / env_rate
    starts = np.asarray([start for _, start, _, _ in events])
    # samples after the last event hold its value
    owner = np.clip(np.searchsorted(starts, env_t, side="right") - 1, 0, len(events) - 1)
    env_channels = {}
    for name in ENV_CHANNELS:
        lo, hi = _ENV_RANGES[name]
        jitter = rng.normal(0, 0.002 * (hi - lo), n_env)
        env_channels[name] = env_base[name][owner] + jitter
    env = EnvTrace(start_time=0, sample_rate=env_rate, channels=env_channels)

    # --- labels ---
    sam_rows = []
    report_rows = []
    for k, (eid, start, end, label) in enumerate(events):
        if label in ("task", "stimulus_pristine", "stimulus_polluted",
                     "stimulus_genfill", "prompting"):
            arousal, valence, dominance = _sam_for(rng, label, intensities[k])
            sam_rows.append(SamResponse(event_id=eid, valence=valence,
                                        arousal=arousal, dominance=dominance))
        if label == "task":
            iv = intensities[k]
            if iv > 0.66:
                difficulty = int(rng.integers(7, 10))
                stress = int(rng.integers(5, 8))
            elif iv < 0.33:
                difficulty = int(rng.integers(1, 3))
                stress = int(rng.integers(1, 3))
            else:
                difficulty = int(rng.integers(4, 7))
                stress = int(rng.integers(3, 5))
            report_rows.append(SelfReport(window_id=eid, difficulty=difficulty,
                                          stress=stress))

    timeline = EventTimeline(events=tuple(
        TimelineEvent(event_id=eid, start_ms=int(round(start * 1000)),
                      end_ms=int(round(end * 1000)), label=label)
        for eid, start, end, label in events
    ))

    write_eda_csv(eda, out_dir / "eda.csv")
    write_env_csv(env, out_dir / "env.csv")
    write_events_csv(timeline, out_dir / "events.csv")
    write_sam_csv(sam_rows, out_dir / "sam.csv")
    write_reports_csv(report_rows, out_dir / "reports.csv")

    relation_desc = None
    if drive_chan is not None:
        relation_desc = {
            "type": relation,
            "channel": drive_chan,
            "direction": int(direction),
            "drives": ["scr_rate_per_min", "osc_amplitude"],
        }
    ground_truth = {
        "params": {
            "n_windows": n_windows,
            "relation": relation,
            "seed": seed,
            "task_s": task_s,
            "baseline_s": baseline_s,
            "survey_s": survey_s,
            "stimuli_blocks": stimuli_blocks,
            "sample_rate": sample_rate,
            "env_rate": env_rate,
            "noise_std": noise_std,
            "tonic_level": tonic_level,
            "tonic_drift_per_min": tonic_drift,
            "bateman_tau": list(BATEMAN_TAU),
        },
        "relation": relation_desc,
        "windows": window_truth,
        "n_scr_total": len(all_times),
    }
    (out_dir / "ground_truth.json").write_text(
        json.dumps(ground_truth, indent=2), encoding="utf-8"
    )
    return ground_truth
