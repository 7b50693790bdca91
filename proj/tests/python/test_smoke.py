import math

import pytest

faultdx = pytest.importorskip("faultdx")

FS = 2048.0
N = 1024
FR = 20.0


def make_baseline(seed=1):
    return faultdx.gen_baseline_surrogate(
        rotation_hz=FR,
        sample_rate_hz=FS,
        n=N,
        seed=seed,
        tone_amplitude=0.3,
        noise_std=1.0,
        extra_tones=2,
        tone_freq_max=900.0,
        tone_amp_min=0.005,
        tone_amp_max=0.02,
    )


def test_labels_and_versions():
    names = faultdx.label_names()
    assert len(names) == 7
    assert names[0] == "Normal"
    assert "Unbalance" in names
    assert faultdx.__version__


def test_surrogate_and_spectrum():
    x = make_baseline()
    assert len(x) == N

    mags, df = faultdx.fft_magnitude(x, FS)
    assert df == FS / N
    assert len(mags) == N // 2 + 1
    peak_hz = mags.index(max(mags[1:])) * df
    assert abs(peak_hz - FR) <= df


def test_preprocess_zscore():
    x = make_baseline()
    mags, df = faultdx.preprocess(x, FS, f_max_hz=300.0)
    assert len(mags) == int(300.0 / df) + 1
    mean = sum(mags) / len(mags)
    var = sum((v - mean) ** 2 for v in mags) / len(mags)
    assert abs(mean) < 1e-9
    assert abs(math.sqrt(var) - 1.0) < 1e-9


def test_augment_identities():
    x = make_baseline()
    assert faultdx.signal_translation(x, FS, 0) == x
    assert faultdx.amplitude_shift(x, FS, 1.0) == x
    assert faultdx.masking_noise(x, FS, 0.0, seed=3) == x
    stretched = faultdx.time_stretch(x, FS, 1.0)
    assert max(abs(a - b) for a, b in zip(stretched, x)) <= 1e-12

    masked = faultdx.masking_noise(x, FS, 0.25, seed=3)
    assert sum(1 for v in masked if v == 0.0) == round(0.25 * N)

    noisy = faultdx.gaussian_noise(x, FS, 0.1, seed=4)
    assert len(noisy) == N and noisy != x


def test_q_aug():
    assert faultdx.compute_q_aug(5250, 30) == 5
    assert faultdx.compute_q_aug(35, 1) == 1


def test_unbalance_injection_lifts_rotation_bin():
    x = make_baseline()
    faulty = faultdx.gen_condition(x, FS, "Unbalance", rotation_hz=FR, seed=9)
    before, df = faultdx.fft_magnitude(x, FS)
    after, _ = faultdx.fft_magnitude(faulty, FS)
    k = round(FR / df)
    gain_db = 20.0 * math.log10(after[k] / before[k])
    assert gain_db >= 3.0


def test_train_diagnose_explain_round_trip(tmp_path):
    spectra = []
    labels = []
    machine = dict(
        rotation_hz=FR,
        gmf_hz=160.0,
        bpfo_hz=107.0,
        bpfi_hz=156.0,
        impact_resonance_hz=256.0,
    )
    for b in range(6):
        base = make_baseline(seed=100 + b)
        for idx, name in enumerate(faultdx.label_names()):
            sig = faultdx.gen_condition(base, FS, name, seed=1000 + 7 * b + idx, **machine)
            mags, df = faultdx.preprocess(sig, FS, f_max_hz=300.0)
            spectra.append(mags)
            labels.append(idx)

    model_path = str(tmp_path / "model.fdx")
    best_val = faultdx.train_model(
        spectra,
        labels,
        df_hz=df,
        path=model_path,
        conv_filters=4,
        kernel_size=3,
        pool_size=2,
        dropout_rate=0.3,
        dense_units=8,
        batch_size=16,
        learning_rate=0.003,
        max_epochs=3,
        patience=2,
        seed=5,
        val_every=7,
    )
    assert 0.0 <= best_val <= 1.0

    probe = faultdx.gen_condition(
        make_baseline(seed=999), FS, "Misalignment", seed=77, **machine
    )
    label, probs = faultdx.diagnose(model_path, probe, FS, f_max_hz=300.0)
    assert label in faultdx.label_names()
    assert len(probs) == 7
    assert abs(sum(probs) - 1.0) < 1e-9

    report = faultdx.explain(model_path, probe, FS, f_max_hz=300.0)
    assert report["label"] == label
    assert len(report["relevance"]) == len(spectra[0])
    assert all(0.0 <= v <= 1.0 for v in report["relevance"])
    for hz, relevance in report["top_frequencies"]:
        assert 0.0 <= hz <= 300.0
        assert relevance > 0.0
