"""Per-window sympathetic indices on the 2 Hz analysis stream.

Three indices are produced per analysis window:

* response rate (count/min) from trough-to-peak events on the phasic wave,
* a time-varying index: mean instantaneous spectral amplitude of the
  0.08-0.24 Hz band obtained by fixed-band complex demodulation of the
  unit-variance signal,
* band power 0.045-0.25 Hz from a Blackman-windowed averaged periodogram,
  both raw and as a fraction of total power above DC.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import dsp
from .errors import TooShort, ZeroDuration
from .ingest import ENV_CHANNELS, AlignedWindow

__all__ = [
    "ScrEvent",
    "FeatureParams",
    "WindowFeatureRow",
    "FEATURE_NAMES",
    "FEATURE_COLUMNS",
    "detect_scrs",
    "nsscr",
    "cdm_decompose",
    "cdm_band_centers",
    "tvsymp",
    "tvsymp_series",
    "edasymp",
    "extract_window_features",
    "write_features_csv",
    "read_features_csv",
    "attach_labels",
]

FEATURE_NAMES = ("tvsymp", "edasymp", "edasymp_n", "nsscr")


@dataclass(frozen=True)
class ScrEvent:
    """One phasic response: onset at the preceding trough, amplitude
    trough-to-peak."""

    onset_s: float
    peak_s: float
    amplitude: float

    def __post_init__(self):
        if self.peak_s <= self.onset_s:
            raise ValueError("peak must follow onset")
        if self.amplitude <= 0:
            raise ValueError("amplitude must be positive")


@dataclass(frozen=True)
class FeatureParams:
    scr_min_amplitude: float = 0.01        # uS, trough-to-peak
    tvsymp_band: tuple = (0.08, 0.24)      # Hz, fixed
    edasymp_band: tuple = (0.045, 0.25)    # Hz, fixed
    psd_window_len: int = 128              # samples per periodogram segment
    psd_overlap_fraction: float = 0.5
    strict_overlap: bool = False           # True: segments overlap by 1 sample
    cdm_num_bands: int = 8
    cdm_bandwidth: float = 0.125           # Hz

    def __post_init__(self):
        if self.scr_min_amplitude <= 0:
            raise ValueError("scr_min_amplitude must be positive")
        if not (0 <= self.psd_overlap_fraction < 1):
            raise ValueError("psd_overlap_fraction must be in [0, 1)")
        if self.psd_window_len < 8:
            raise ValueError("psd_window_len too small")
        if self.cdm_num_bands < 1 or self.cdm_bandwidth <= 0:
            raise ValueError("bad demodulation band layout")


@dataclass(frozen=True)
class WindowFeatureRow:
    window_id: str
    label: str
    tvsymp: float
    edasymp: float
    edasymp_n: float
    nsscr: float
    env: dict                      # the 8 aggregated channels
    stress_label: str | None = None
    valence: int | None = None
    arousal: int | None = None
    dominance: int | None = None

    def __post_init__(self):
        if self.nsscr < 0:
            raise ValueError("nsscr must be nonnegative")
        if not (0.0 <= self.edasymp_n <= 1.0):
            raise ValueError("normalized band power must be in [0, 1]")
        if self.tvsymp < 0:
            raise ValueError("tvsymp must be nonnegative")


def detect_scrs(phasic, sample_rate: float, params: FeatureParams = FeatureParams()):
    """Find transient events on a phasic wave.

    Local maxima qualify when the rise from the preceding trough reaches
    ``scr_min_amplitude``; peaks closer than 1 s are merged into the larger
    event. Returns events sorted by onset (possibly empty).
    """
    x = np.asarray(phasic, dtype=np.float64)
    if x.size < 2 * sample_rate:
        raise TooShort("need at least 2 s of phasic signal")
    # strict rise on the left, non-strict fall on the right picks the first
    # sample of a plateau
    interior = np.arange(1, x.size - 1)
    is_peak = (x[interior] > x[interior - 1]) & (x[interior] >= x[interior + 1])
    peaks = interior[is_peak]

    events = []
    prev_peak = -1
    for pk in peaks:
        lo = prev_peak + 1
        trough = lo + int(np.argmin(x[lo:pk + 1]))
        if trough == pk:  # monotone segment, no rise
            prev_peak = pk
            continue
        amp = float(x[pk] - x[trough])
        if amp >= params.scr_min_amplitude:
            events.append(
                ScrEvent(onset_s=float(trough / sample_rate),
                         peak_s=float(pk / sample_rate), amplitude=amp)
            )
        prev_peak = pk

    # refractory merge: nearby peaks collapse into the larger event
    merged = True
    while merged and len(events) > 1:
        merged = False
        for k in range(len(events) - 1):
            if events[k + 1].peak_s - events[k].peak_s < 1.0:
                drop = k if events[k].amplitude < events[k + 1].amplitude else k + 1
                del events[drop]
                merged = True
                break
    return events


def nsscr(events, duration_s: float) -> float:
    """Events per minute."""
    if duration_s <= 0:
        raise ZeroDuration("window duration must be positive")
    return 60.0 * len(events) / duration_s


def cdm_band_centers(params: FeatureParams):
    """Demodulation centers: integer multiples of the bandwidth."""
    return [(k + 1) * params.cdm_bandwidth for k in range(params.cdm_num_bands)]


def cdm_decompose(x, sample_rate: float, params: FeatureParams = FeatureParams()):
    """Complex demodulation into fixed bands.

    Each band center f_k gets the signal mixed down by exp(-j 2 pi f_k t) and
    lowpassed at half the band spacing (4th-order zero-phase Butterworth);
    twice the magnitude of the result is that band's instantaneous amplitude.
    Returns an (n_bands, n) array.
    """
    x = np.asarray(x, dtype=np.float64)
    cutoff = params.cdm_bandwidth / 2.0
    settle = int(math.ceil(4.0 * sample_rate / cutoff))
    if x.size < settle:
        raise TooShort(f"need at least {settle} samples for the demodulation lowpass")
    lp = dsp.design_butterworth("lowpass", cutoff, 4, sample_rate)
    t = np.arange(x.size) / sample_rate
    out = np.empty((params.cdm_num_bands, x.size))
    for k, fc in enumerate(cdm_band_centers(params)):
        phase = 2.0 * np.pi * fc * t
        re = dsp.zero_phase_filter(lp, x * np.cos(phase))
        im = dsp.zero_phase_filter(lp, -x * np.sin(phase))
        out[k] = 2.0 * np.hypot(re, im)
    return out


def _band_amplitude_sum(x, sample_rate, params):
    """Unit-variance input -> summed instantaneous amplitude of the
    demodulation bands whose centers fall inside ``tvsymp_band``."""
    lo, hi = params.tvsymp_band
    idx = [k for k, fc in enumerate(cdm_band_centers(params)) if lo <= fc <= hi]
    if not idx:
        raise ValueError("no demodulation band center falls inside tvsymp_band")
    amps = cdm_decompose(x, sample_rate, params)
    return amps[idx].sum(axis=0)


def tvsymp(x, sample_rate: float, params: FeatureParams = FeatureParams()):
    """Time-varying sympathetic index of one window.

    The input is brought to unit variance, the instantaneous amplitudes of
    the in-band demodulation bands are summed, and the window statistic is
    the mean of that series (already in normalized units given the
    unit-variance input). A zero-variance input yields a zero series and a 0
    statistic; scaling the input leaves the result unchanged.
    """
    x = np.asarray(x, dtype=np.float64)
    sd = float(x.std())
    if sd == 0.0:
        return np.zeros(x.size), 0.0
    xs = (x - x.mean()) / sd
    series = _band_amplitude_sum(xs, sample_rate, params)
    return series, float(series.mean())


def tvsymp_series(x, sample_rate: float, params: FeatureParams = FeatureParams()):
    """Recording-scope index series: the summed in-band amplitude of the
    unit-variance recording, itself normalized to unit variance.

    Averaging this series over event windows preserves between-window
    contrast (quiet windows fall below 1, bursts rise above), which the
    per-window statistic deliberately discards.
    """
    x = np.asarray(x, dtype=np.float64)
    sd = float(x.std())
    if sd == 0.0:
        return np.zeros(x.size)
    series = _band_amplitude_sum((x - x.mean()) / sd, sample_rate, params)
    s_sd = float(series.std())
    if s_sd == 0.0:
        return np.zeros(x.size)
    return series / s_sd


def _segment_starts(n, seg_len, params):
    if params.strict_overlap:
        hop = seg_len - 1
    else:
        hop = seg_len - int(seg_len * params.psd_overlap_fraction)
    hop = max(hop, 1)
    return range(0, n - seg_len + 1, hop)


def edasymp(x, sample_rate: float, params: FeatureParams = FeatureParams()):
    """Band power in ``edasymp_band`` from a Blackman-windowed averaged
    periodogram, plus the fraction of total above-DC power it represents.
    """
    x = np.asarray(x, dtype=np.float64)
    seg_len = params.psd_window_len
    if x.size < seg_len:
        raise TooShort(f"need at least {seg_len} samples, got {x.size}")
    win = np.blackman(seg_len)
    scale = 1.0 / (sample_rate * float(win @ win))
    psd = np.zeros(seg_len // 2 + 1)
    n_seg = 0
    for start in _segment_starts(x.size, seg_len, params):
        seg = x[start:start + seg_len]
        seg = (seg - seg.mean()) * win
        spec = np.abs(np.fft.rfft(seg)) ** 2 * scale
        spec[1:-1] *= 2.0  # one-sided density
        psd += spec
        n_seg += 1
    psd /= n_seg
    freqs = np.fft.rfftfreq(seg_len, 1.0 / sample_rate)
    df = sample_rate / seg_len
    lo, hi = params.edasymp_band
    band = (freqs >= lo) & (freqs <= hi)
    band_power = float(psd[band].sum() * df)
    total = float(psd[freqs > 0].sum() * df)
    normalized = band_power / total if total > 0 else 0.0
    return band_power, normalized


def extract_window_features(window: AlignedWindow, decomposition,
                            params: FeatureParams = FeatureParams(), *,
                            analysis_rate: float = 2.0,
                            highpass_hz: float = 0.01,
                            highpass_order: int = 8,
                            tvsymp_value: float | None = None) -> WindowFeatureRow:
    """Full per-window feature chain.

    The response rate comes from the decomposition's phasic wave at the
    window's native rate; the spectral indices come from the window signal
    decimated to the analysis rate and detrended by a high-pass filter.
    ``tvsymp_value`` substitutes a recording-scope index mean (see
    :func:`tvsymp_series`) for the window-local statistic.
    """
    min_s = params.psd_window_len / analysis_rate
    if window.duration_s < min_s:
        raise TooShort(
            f"window {window.window_id}: {window.duration_s:.1f} s is shorter than "
            f"the {min_s:.0f} s needed for one periodogram segment"
        )
    events = detect_scrs(decomposition.phasic, window.sample_rate, params)
    rate = nsscr(events, window.duration_s)

    x2 = dsp.decimate(window.samples, window.sample_rate, analysis_rate)
    hp = dsp.design_butterworth("highpass", highpass_hz, highpass_order, analysis_rate)
    xh = dsp.zero_phase_filter(hp, x2)
    if tvsymp_value is None:
        _, tv = tvsymp(xh, analysis_rate, params)
    else:
        tv = float(tvsymp_value)
    band_power, normalized = edasymp(xh, analysis_rate, params)

    return WindowFeatureRow(
        window_id=window.window_id,
        label=window.label,
        tvsymp=tv,
        edasymp=band_power,
        edasymp_n=normalized,
        nsscr=rate,
        env=dict(window.env_means),
    )


# --- feature matrix CSV -------------------------------------------------------

FEATURE_COLUMNS = (
    ("window_id", "label", "stress_label")
    + FEATURE_NAMES
    + ENV_CHANNELS
    + ("valence", "arousal", "dominance")
)


def write_features_csv(rows, path) -> None:
    """One WindowFeatureRow per line in the fixed column order."""
    from pathlib import Path

    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(FEATURE_COLUMNS) + "\n")
        for r in rows:
            vals = [
                r.window_id,
                r.label,
                r.stress_label if r.stress_label is not None else "",
                repr(r.tvsymp),
                repr(r.edasymp),
                repr(r.edasymp_n),
                repr(r.nsscr),
            ]
            vals += [repr(float(r.env[name])) for name in ENV_CHANNELS]
            for field in ("valence", "arousal", "dominance"):
                v = getattr(r, field)
                vals.append("" if v is None else str(v))
            fh.write(",".join(vals) + "\n")


def read_features_csv(path):
    """Inverse of :func:`write_features_csv`."""
    import csv
    from pathlib import Path

    from .errors import EmptyFile, MalformedRow, MissingChannel

    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFile(f"{path}: empty file") from None
        if header != list(FEATURE_COLUMNS):
            missing = set(FEATURE_COLUMNS) - set(header)
            if missing:
                raise MissingChannel(f"{path}: missing column(s) {sorted(missing)}")
            raise MalformedRow(f"{path}: unexpected header")
        rows = []
        for k, raw in enumerate(reader):
            if len(raw) != len(FEATURE_COLUMNS):
                raise MalformedRow(f"{path}:{k + 2}: wrong field count")
            rec = dict(zip(FEATURE_COLUMNS, raw))
            try:
                rows.append(
                    WindowFeatureRow(
                        window_id=rec["window_id"],
                        label=rec["label"],
                        stress_label=rec["stress_label"] or None,
                        tvsymp=float(rec["tvsymp"]),
                        edasymp=float(rec["edasymp"]),
                        edasymp_n=float(rec["edasymp_n"]),
                        nsscr=float(rec["nsscr"]),
                        env={name: float(rec[name]) for name in ENV_CHANNELS},
                        valence=int(rec["valence"]) if rec["valence"] else None,
                        arousal=int(rec["arousal"]) if rec["arousal"] else None,
                        dominance=int(rec["dominance"]) if rec["dominance"] else None,
                    )
                )
            except ValueError as exc:
                raise MalformedRow(f"{path}:{k + 2}: {exc}") from None
    return rows


def attach_labels(row: WindowFeatureRow, stress_label=None, sam=None) -> WindowFeatureRow:
    """Join a stress label and/or SAM ratings onto a feature row."""
    updates = {}
    if stress_label is not None:
        updates["stress_label"] = stress_label
    if sam is not None:
        updates["valence"] = sam.valence
        updates["arousal"] = sam.arousal
        updates["dominance"] = sam.dominance
    return replace(row, **updates) if updates else row
