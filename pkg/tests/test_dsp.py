import csv

import numpy as np
import pytest

from errors import ConfigurationError, PreconditionError
from schemas.feature_schemas import FilterSpec
from schemas.recording_schemas import GeneratorConfig, RecordingSet
from services import dsp
from services.dataio import generate_synthetic

FS = 500.0
N_LONG = 2500


def _db(value):
    return 10 * np.log10(value)


def _sinusoid(freq, n=N_LONG, phase=0.0):
    return np.sin(2 * np.pi * freq * np.arange(n) / FS + phase)


def _recording(samples):
    samples = np.asarray(samples, dtype=np.float32)
    n = samples.shape[0]
    return RecordingSet(
        n_channels=samples.shape[1],
        n_samples=samples.shape[2],
        sample_rate_hz=FS,
        subject_ids=np.zeros(n, dtype=np.uint32),
        chrono_indices=np.arange(n, dtype=np.uint32),
        labels=(np.arange(n) % 2).astype(np.uint8),
        samples=samples,
    )


@pytest.fixture(scope="module")
def taps():
    return dsp.design_bandpass(FilterSpec(sample_rate_hz=FS))


# --- design_bandpass ---

def test_taps_are_symmetric(taps):
    assert len(taps) == 101
    np.testing.assert_allclose(taps, taps[::-1], atol=1e-15)


def test_passband_gain_near_unity(taps):
    gain = np.abs(dsp.frequency_response(taps, 10.2, FS))
    assert abs(20 * np.log10(gain)) <= 0.5


@pytest.mark.parametrize("freq", [0.0, 2.0, 30.0])
def test_stopband_of_forward_backward_response(taps, freq):
    power = np.abs(dsp.frequency_response(taps, freq, FS)) ** 2
    assert _db(power) <= -40


def test_effective_response_never_exceeds_ripple(taps):
    grid = np.linspace(0, FS / 2, 2001)
    power = np.abs(dsp.frequency_response(taps, grid, FS)) ** 2
    assert power.max() <= 10 ** (0.5 / 10)


@pytest.mark.parametrize(
    "overrides, field",
    [({"low_hz": 0.0}, "low_hz"), ({"high_hz": 7.0}, "high_hz"), ({"high_hz": 260.0}, "high_hz"), ({"n_taps": 100}, "n_taps")],
)
def test_invalid_filter_spec(overrides, field):
    with pytest.raises(ConfigurationError) as info:
        dsp.design_bandpass(FilterSpec(**overrides))
    assert info.value.field == field


# --- filter_zero_phase ---

def test_zero_in_zero_out(taps):
    out = dsp.filter_zero_phase(np.zeros(400), taps)
    assert out.shape == (400,)
    assert not out.any()


def test_short_input_rejected(taps):
    with pytest.raises(PreconditionError):
        dsp.filter_zero_phase(np.ones(303), taps)


def test_in_band_sinusoid_has_no_lag(taps):
    x = _sinusoid(10.0)
    out = dsp.filter_zero_phase(x, taps)
    expected_gain = np.abs(dsp.frequency_response(taps, 10.0, FS)) ** 2
    central = slice(int(0.2 * N_LONG), int(0.8 * N_LONG))
    # Mesma fase: a saída é a entrada escalada por |H|².
    np.testing.assert_allclose(out[central], expected_gain * x[central], atol=0.03 * expected_gain)


def test_out_of_band_sinusoid_rejected(taps):
    x = _sinusoid(40.0)
    out = dsp.filter_zero_phase(x, taps)
    central = slice(int(0.2 * N_LONG), int(0.8 * N_LONG))
    rms = lambda v: np.sqrt(np.mean(v ** 2))
    assert rms(out[central]) <= 1e-2 * rms(x[central])


def test_filtered_energy_does_not_grow(taps):
    x = np.random.default_rng(0).standard_normal(N_LONG)
    out = dsp.filter_zero_phase(x, taps)
    assert np.sum(out ** 2) <= np.sum(x ** 2)


# --- analytic_signal ---

def test_analytic_signal_of_cosine():
    omega = 2 * np.pi * 10.5 / FS
    z = dsp.analytic_signal(np.cos(omega * np.arange(N_LONG)))
    central = z[dsp.central_window(N_LONG)]
    np.testing.assert_allclose(np.abs(central), 1.0, rtol=0.01)
    advance = np.diff(np.unwrap(np.angle(central)))
    np.testing.assert_allclose(advance, omega, rtol=0.01)


def test_analytic_signal_of_constant():
    z = dsp.analytic_signal(np.full(17, 3.0))
    np.testing.assert_allclose(z.real, 3.0, atol=1e-12)
    np.testing.assert_allclose(z.imag, 0.0, atol=1e-12)


@pytest.mark.parametrize("n", [2, 7, 64, 501])
def test_real_part_is_input(n):
    x = np.random.default_rng(n).standard_normal(n)
    np.testing.assert_allclose(dsp.analytic_signal(x).real, x, rtol=1e-9, atol=1e-12)


def test_analytic_signal_needs_two_samples():
    with pytest.raises(PreconditionError):
        dsp.analytic_signal(np.ones(1))


def test_central_window():
    window = dsp.central_window(500)
    assert (window.start, window.stop) == (50, 450)


# --- extract_features ---

def test_single_active_channel(taps):
    samples = np.zeros((1, 5, N_LONG))
    samples[0, 3] = _sinusoid(10.0)
    features = dsp.extract_features(_recording(samples))
    expected = np.abs(dsp.frequency_response(taps, 10.0, FS)) ** 2
    amplitudes = features.values[0, 0::2]
    assert amplitudes[3] == pytest.approx(expected, rel=0.03)
    assert np.all(np.delete(amplitudes, 3) <= 1e-6)


def test_zero_trial_gives_zero_features():
    features = dsp.extract_features(_recording(np.zeros((1, 3, 400))))
    assert not features.values.any()


def test_feature_layout(small_recordings):
    features = dsp.extract_features(small_recordings)
    assert features.n_rows == small_recordings.n_trials
    assert features.n_cols == 2 * small_recordings.n_channels
    assert [name.label for name in features.feature_names[:4]] == ["ch0_amp", "ch0_phase", "ch1_amp", "ch1_phase"]
    assert features.row_meta[7] == (1, 1, int(small_recordings.labels[7]))
    assert np.all(features.values[:, 0::2] >= 0)
    phases = features.values[:, 1::2]
    assert np.all((phases > -np.pi) & (phases <= np.pi))
    assert np.all(np.isfinite(features.values))


def test_full_montage_width():
    cfg = GeneratorConfig(n_subjects=1, trials_per_subject=2, n_samples=400)
    features = dsp.extract_features(generate_synthetic(cfg))
    assert features.n_cols == 258


def test_amplitude_ignores_carrier_phase():
    samples = np.zeros((2, 1, N_LONG))
    samples[0, 0] = _sinusoid(10.0)
    samples[1, 0] = _sinusoid(10.0, phase=1.0)
    values = dsp.extract_features(_recording(samples)).values
    assert values[1, 0] == pytest.approx(values[0, 0], rel=5e-3)


def test_scaling_scales_amplitude_only(small_recordings):
    scaled = small_recordings.take(range(small_recordings.n_trials))
    scaled.samples = scaled.samples * np.float32(2.0)
    base = dsp.extract_features(small_recordings).values
    doubled = dsp.extract_features(scaled).values
    np.testing.assert_allclose(doubled[:, 0::2], 2 * base[:, 0::2], rtol=1e-9)
    np.testing.assert_allclose(doubled[:, 1::2], base[:, 1::2], atol=1e-6)


def test_permuting_trials_permutes_rows(small_recordings):
    order = np.random.default_rng(1).permutation(small_recordings.n_trials)
    base = dsp.extract_features(small_recordings)
    permuted = dsp.extract_features(small_recordings.take(order))
    np.testing.assert_allclose(permuted.values, base.values[order], rtol=1e-12, atol=1e-15)
    assert permuted.row_meta == [base.row_meta[i] for i in order]


def test_threads_match_sequential():
    cfg = GeneratorConfig(n_subjects=3, trials_per_subject=30, n_channels=3, n_samples=400, set_a=[0], set_b=[1])
    recordings = generate_synthetic(cfg)
    sequential = dsp.extract_features(recordings, threads=0)
    parallel = dsp.extract_features(recordings, threads=4)
    assert np.array_equal(sequential.values, parallel.values)


def test_short_trial_names_subject_and_chrono():
    cfg = GeneratorConfig(n_subjects=1, trials_per_subject=2, n_channels=2, n_samples=300, set_a=[0], set_b=[1])
    with pytest.raises(PreconditionError, match="subject=0 chrono_index=0"):
        dsp.extract_features(generate_synthetic(cfg))


# --- CSV ---

def test_export_csv(tmp_path, small_recordings):
    features = dsp.extract_features(small_recordings)
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    dsp.export_features_csv(features, first)
    dsp.export_features_csv(features, second)
    assert first.read_bytes() == second.read_bytes()

    with open(first, newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0][:5] == ["subject", "chrono_index", "label", "ch0_amp", "ch0_phase"]
    assert len(rows) == 1 + small_recordings.n_trials
    assert all(len(row) == 3 + 2 * small_recordings.n_channels for row in rows)
    assert float(rows[1][3]) == pytest.approx(features.values[0, 0], rel=1e-8)


def test_export_empty_matrix_is_header_only(tmp_path):
    features = dsp.extract_features(RecordingSet.empty(n_channels=2, n_samples=400))
    path = tmp_path / "empty.csv"
    dsp.export_features_csv(features, path)
    assert path.read_text() == "subject,chrono_index,label,ch0_amp,ch0_phase,ch1_amp,ch1_phase\n"
