import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dermalab import errors, features, ingest
from dermalab.cvxeda import decompose
from conftest import make_pulse_trace, simple_env_trace


def bateman_pulse_train(times, amp, duration_s, fs=10.0):
    trace, truth = make_pulse_trace(times, amp=amp, duration_s=duration_s, fs=fs)
    return truth.phasic


class TestDetectScrs:
    def test_zero_signal(self):
        assert features.detect_scrs(np.zeros(200), 10.0) == []

    def test_five_pulses_found_at_their_times(self):
        times = [5.0, 15.0, 25.0, 35.0, 45.0]
        phasic = bateman_pulse_train(times, 0.5, 55.0)
        events = features.detect_scrs(phasic, 10.0)
        assert len(events) == 5
        peak_offset = 1.13  # kernel maximum lag
        for ev, t0 in zip(events, times):
            assert ev.peak_s == pytest.approx(t0 + peak_offset, abs=0.3)
            assert ev.amplitude == pytest.approx(0.5, abs=0.05)

    def test_below_threshold_ignored(self):
        phasic = bateman_pulse_train([5.0, 15.0], 0.005, 25.0)
        assert features.detect_scrs(phasic, 10.0) == []

    def test_nearby_peaks_merge_into_larger(self):
        fs = 10.0
        t = np.arange(300) / fs
        x = np.zeros(t.size)
        # two sharp bumps 0.6 s apart; the larger survives the 1 s refractory
        x += 0.3 * np.exp(-0.5 * ((t - 10.0) / 0.15) ** 2)
        x += 0.5 * np.exp(-0.5 * ((t - 10.6) / 0.15) ** 2)
        events = features.detect_scrs(x, fs)
        assert len(events) == 1
        assert events[0].peak_s == pytest.approx(10.6, abs=0.15)

    def test_well_separated_peaks_not_merged(self):
        fs = 10.0
        t = np.arange(300) / fs
        x = 0.4 * np.exp(-0.5 * ((t - 10.0) / 0.15) ** 2)
        x += 0.4 * np.exp(-0.5 * ((t - 12.0) / 0.15) ** 2)
        assert len(features.detect_scrs(x, fs)) == 2

    def test_events_sorted_by_onset(self):
        phasic = bateman_pulse_train([40.0, 10.0, 25.0], 0.4, 55.0)
        events = features.detect_scrs(phasic, 10.0)
        onsets = [e.onset_s for e in events]
        assert onsets == sorted(onsets)

    def test_too_short(self):
        with pytest.raises(errors.TooShort):
            features.detect_scrs(np.zeros(10), 10.0)


class TestNsscr:
    def test_zero_events(self):
        assert features.nsscr([], 60.0) == 0.0

    def test_five_events_over_five_minutes(self):
        evs = [features.ScrEvent(onset_s=i * 60.0, peak_s=i * 60.0 + 1, amplitude=0.2)
               for i in range(5)]
        assert features.nsscr(evs, 300.0) == pytest.approx(1.0)

    def test_zero_duration(self):
        with pytest.raises(errors.ZeroDuration):
            features.nsscr([], 0.0)

    def test_monotone_in_pulse_count(self):
        # more planted responses never yields fewer detections (merge-safe spacing)
        rates = []
        for count in (2, 4, 6, 8, 10):
            times = np.linspace(10.0, 110.0, count)
            phasic = bateman_pulse_train(times, 0.4, 120.0)
            events = features.detect_scrs(phasic, 10.0)
            rates.append(features.nsscr(events, 120.0))
        assert all(b >= a for a, b in zip(rates, rates[1:]))


class TestCdm:
    def test_tone_at_band_center_recovered(self):
        fs = 2.0
        t = np.arange(600) / fs
        amp = 0.8
        x = amp * np.sin(2 * np.pi * 0.25 * t)  # band center k=2
        amps = features.cdm_decompose(x, fs)
        centers = features.cdm_band_centers(features.FeatureParams())
        k = centers.index(0.25)
        interior = slice(60, -60)
        assert np.median(amps[k][interior]) == pytest.approx(amp, rel=0.05)
        for j in range(len(centers)):
            if abs(centers[j] - 0.25) > 0.13:
                assert np.median(amps[j][interior]) < 0.05 * amp

    def test_zero_input(self):
        amps = features.cdm_decompose(np.zeros(400), 2.0)
        assert np.abs(amps).max() == 0.0

    def test_two_tones_separate(self):
        fs = 2.0
        t = np.arange(800) / fs
        x = 0.5 * np.sin(2 * np.pi * 0.125 * t) + 0.7 * np.sin(2 * np.pi * 0.5 * t)
        amps = features.cdm_decompose(x, fs)
        centers = features.cdm_band_centers(features.FeatureParams())
        ka = centers.index(0.125)
        kb = centers.index(0.5)
        interior = slice(80, -80)
        assert np.median(amps[ka][interior]) == pytest.approx(0.5, rel=0.05)
        assert np.median(amps[kb][interior]) == pytest.approx(0.7, rel=0.05)

    def test_too_short(self):
        with pytest.raises(errors.TooShort):
            features.cdm_decompose(np.zeros(100), 2.0)


class TestTvsymp:
    def test_unit_variance_tone_gives_sqrt2(self):
        fs = 2.0
        t = np.arange(600) / fs
        x = np.sqrt(2.0) * np.sin(2 * np.pi * 0.1 * t)
        _, mean = features.tvsymp(x, fs)
        assert mean == pytest.approx(np.sqrt(2.0), rel=0.05)

    def test_out_of_band_tone_rejected(self):
        fs = 2.0
        t = np.arange(600) / fs
        _, mean = features.tvsymp(np.sin(2 * np.pi * 0.5 * t), fs)
        assert mean < 0.1

    def test_zero_input(self):
        series, mean = features.tvsymp(np.zeros(300), 2.0)
        assert mean == 0.0
        assert np.abs(series).max() == 0.0

    def test_scale_invariance(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=500)
        _, a = features.tvsymp(x, 2.0)
        _, b = features.tvsymp(123.4 * x, 2.0)
        assert abs(a - b) < 1e-6

    def test_series_scope_preserves_contrast(self):
        # a quiet half and a loud half: recording-scope means must differ
        fs = 2.0
        t = np.arange(1200) / fs
        x = np.sin(2 * np.pi * 0.1 * t)
        x[: 600] *= 0.1
        series = features.tvsymp_series(x, fs)
        assert series[100:500].mean() < 0.5 * series[700:1100].mean()


class TestEdasymp:
    def test_in_band_tone(self):
        fs = 2.0
        t = np.arange(600) / fs
        _, normalized = features.edasymp(np.sin(2 * np.pi * 0.1 * t), fs)
        assert normalized >= 0.95

    def test_out_of_band_tone(self):
        fs = 2.0
        t = np.arange(600) / fs
        _, normalized = features.edasymp(np.sin(2 * np.pi * 0.5 * t), fs)
        assert normalized <= 0.05

    def test_white_noise_band_fraction(self):
        vals = []
        for seed in range(50):
            rng = np.random.default_rng(seed)
            _, normalized = features.edasymp(rng.normal(size=600), 2.0)
            vals.append(normalized)
        assert np.mean(vals) == pytest.approx(0.205, abs=0.05)

    def test_parseval(self):
        # total one-sided power ~ variance of the signal
        rng = np.random.default_rng(9)
        x = rng.normal(size=128)
        win = np.blackman(128)
        seg = (x - x.mean()) * win
        spec = np.abs(np.fft.rfft(seg)) ** 2 / (2.0 * float(win @ win))
        spec[1:-1] *= 2.0
        total = spec.sum() * (2.0 / 128)
        assert total == pytest.approx(np.var((x - x.mean()) * win) * x.size / (win @ win),
                                      rel=0.05)

    def test_strict_overlap_mode(self):
        fs = 2.0
        t = np.arange(600) / fs
        x = np.sin(2 * np.pi * 0.1 * t)
        strict = features.FeatureParams(strict_overlap=True)
        _, normalized = features.edasymp(x, fs, strict)
        assert normalized >= 0.95

    def test_band_power_nonnegative_and_fraction_bounded(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            x = rng.normal(size=256) * rng.uniform(0.1, 5)
            power, frac = features.edasymp(x, 2.0)
            assert power >= 0.0
            assert 0.0 <= frac <= 1.0

    def test_too_short(self):
        with pytest.raises(errors.TooShort):
            features.edasymp(np.zeros(100), 2.0)


class TestExtractWindow:
    def _window(self, duration_s=120.0, rate_per_min=5.0, amp=0.4, seed=0):
        count = int(round(rate_per_min * duration_s / 60.0))
        times = np.linspace(8.0, duration_s - 10.0, count)
        trace, truth = make_pulse_trace(times, amp=amp, duration_s=duration_s,
                                        noise_std=0.005, seed=seed)
        win = ingest.AlignedWindow(
            window_id="w0", label="task", start_ms=0,
            end_ms=int(duration_s * 1000), sample_rate=10.0,
            samples=trace.samples, env_means={c: 1.0 for c in ingest.ENV_CHANNELS},
        )
        return win, times

    def test_synthetic_window_rates_and_spectra(self):
        win, times = self._window(rate_per_min=5.0)
        dec = decompose(win.samples, win.sample_rate)
        row = features.extract_window_features(win, dec)
        assert row.nsscr == pytest.approx(5.0, abs=0.5)
        assert row.tvsymp > 0.0
        assert 0.0 <= row.edasymp_n <= 1.0

    def test_near_constant_window(self):
        n = 1200
        samples = np.full(n, 1.0) + 1e-4 * np.sin(np.arange(n) / 100.0)
        win = ingest.AlignedWindow(
            window_id="w0", label="baseline", start_ms=0, end_ms=120_000,
            sample_rate=10.0, samples=samples,
            env_means={c: 1.0 for c in ingest.ENV_CHANNELS},
        )
        dec = decompose(win.samples, win.sample_rate)
        row = features.extract_window_features(win, dec)
        assert row.nsscr == 0.0
        assert row.edasymp < 1e-6

    def test_short_window_rejected(self):
        win, _ = self._window(duration_s=120.0)
        short = ingest.AlignedWindow(
            window_id="w0", label="task", start_ms=0, end_ms=50_000,
            sample_rate=10.0, samples=win.samples[:500],
            env_means=win.env_means,
        )
        dec = decompose(short.samples, short.sample_rate)
        with pytest.raises(errors.TooShort):
            features.extract_window_features(short, dec)


class TestFeatureCsv:
    def test_round_trip(self, tmp_path):
        rows = [
            features.WindowFeatureRow(
                window_id="w0", label="task", tvsymp=1.25, edasymp=0.61,
                edasymp_n=0.83, nsscr=7.5,
                env={c: float(k) for k, c in enumerate(ingest.ENV_CHANNELS)},
                stress_label="high", valence=5, arousal=7, dominance=3,
            ),
            features.WindowFeatureRow(
                window_id="b0", label="baseline", tvsymp=0.4, edasymp=0.05,
                edasymp_n=0.5, nsscr=2.0,
                env={c: 0.0 for c in ingest.ENV_CHANNELS},
            ),
        ]
        p = tmp_path / "features.csv"
        features.write_features_csv(rows, p)
        back = features.read_features_csv(p)
        assert back == rows

    def test_header_is_fixed_order(self, tmp_path):
        p = tmp_path / "features.csv"
        features.write_features_csv([], p)
        header = p.read_text().splitlines()[0].split(",")
        assert header[:7] == ["window_id", "label", "stress_label", "tvsymp",
                              "edasymp", "edasymp_n", "nsscr"]
        assert tuple(header[7:15]) == ingest.ENV_CHANNELS
