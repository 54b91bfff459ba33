"""Readout-noise channel, calibration, and simplex-constrained mitigation."""

import numpy as np
import pytest

from lfvqe import (
    CalibrationMatrix,
    Encoding,
    ReadoutNoise,
    calibrate,
    corrupt,
    encode_compact,
    exact_calibration,
    measure_term,
    mitigate,
    mode_state,
    pauli_term_expectation,
)
from lfvqe.exceptions import ValidationError
from lfvqe.mitigation import load_calibration, load_noise, save_calibration, save_noise


def test_corrupt_noiseless_identity():
    noise = ReadoutNoise(((0.0, 0.0),))
    assert np.allclose(corrupt(np.array([0.3, 0.7]), noise), [0.3, 0.7])


def test_corrupt_single_qubit():
    noise = ReadoutNoise(((0.1, 0.1),))
    assert np.allclose(corrupt(np.array([1.0, 0.0]), noise), [0.9, 0.1])


def test_corrupt_two_qubit_tensor():
    # tensor product of the 1-qubit case
    noise = ReadoutNoise.uniform(2, 0.1)
    out = corrupt(np.array([1.0, 0.0, 0.0, 0.0]), noise)
    assert np.allclose(out, [0.81, 0.09, 0.09, 0.01])


def test_corrupt_rejects_bad_distribution():
    noise = ReadoutNoise.uniform(1, 0.1)
    with pytest.raises(ValidationError):
        corrupt(np.array([0.7, 0.7]), noise)


def test_noise_validation():
    with pytest.raises(ValidationError):
        ReadoutNoise(((0.6, 0.1),))
    with pytest.raises(ValidationError):
        ReadoutNoise(())


def test_exact_calibration_noiseless_is_identity():
    cal = exact_calibration(ReadoutNoise.uniform(2, 0.0))
    assert np.array_equal(cal.matrix, np.eye(4))


def test_calibrate_estimated_close_to_channel():
    # binomial confidence oracle: each entry within 0.02 at 8192 shots,
    # allowing the ~1% of seeds where a 4-sigma excursion lands
    noise = ReadoutNoise(((0.1, 0.1),))
    exact = noise.confusion_matrix()
    hits = 0
    for seed in range(200):
        cal = calibrate(noise, shots_per_state=8192, seed=seed)
        if np.abs(cal.matrix - exact).max() <= 0.02:
            hits += 1
    assert hits >= 198


def test_calibrate_deterministic():
    noise = ReadoutNoise.uniform(2, 0.05)
    a = calibrate(noise, 4096, seed=8)
    b = calibrate(noise, 4096, seed=8)
    assert np.array_equal(a.matrix, b.matrix)
    assert a.source == "estimated" and a.shots == 4096 and a.seed == 8


def test_mitigate_identity_calibration_returns_histogram():
    cal = exact_calibration(ReadoutNoise.uniform(1, 0.0))
    out = mitigate(np.array([30.0, 70.0]), cal)
    assert np.allclose(out, [0.3, 0.7])


def test_mitigate_inverts_channel_exactly():
    # infinite statistics: feeding the corrupted distribution itself
    rng = np.random.default_rng(60)
    noise = ReadoutNoise.uniform(2, 0.12)
    cal = exact_calibration(noise)
    for _ in range(20):
        dist = rng.dirichlet(np.ones(4))
        recovered = mitigate(corrupt(dist, noise) * 10000, cal)
        assert np.abs(recovered - dist).max() < 1e-9


def test_mitigate_output_is_distribution():
    rng = np.random.default_rng(61)
    noise = ReadoutNoise.uniform(2, 0.2)
    cal = exact_calibration(noise)
    for seed in range(50):
        gen = np.random.default_rng(seed)
        counts = gen.multinomial(256, rng.dirichlet(np.ones(4)))
        out = mitigate(counts.astype(float), cal)
        assert out.min() >= 0.0
        assert out.sum() == pytest.approx(1.0, abs=1e-12)


def test_mitigate_rejects_empty_histogram():
    cal = exact_calibration(ReadoutNoise.uniform(1, 0.1))
    with pytest.raises(ValidationError):
        mitigate(np.array([0.0, 0.0]), cal)


def test_mitigated_zz_estimate_beats_raw(pion_operator, pion_ground):
    # Monte-Carlo comparison oracle on the ZZ term of the compact pion
    # operator: mitigation should land closer in >= 95% of 200 seeds
    _, vec = pion_ground
    state = mode_state(vec, Encoding.COMPACT)
    exact_zz = pauli_term_expectation(state, "ZZ")
    noise = ReadoutNoise.uniform(2, 0.1)
    cal = exact_calibration(noise)
    wins = 0
    for seed in range(200):
        raw = measure_term(state, "ZZ", 8192, seed=seed, noise=noise)
        fixed = measure_term(state, "ZZ", 8192, seed=seed, noise=noise,
                             calibration=cal)
        if abs(fixed.mean - exact_zz) < abs(raw.mean - exact_zz):
            wins += 1
    assert wins >= 190


def test_calibration_matrix_validation():
    with pytest.raises(ValidationError):
        CalibrationMatrix(1, np.array([[0.5, 0.0], [0.4, 1.0]]), source="exact")
    with pytest.raises(ValidationError):
        CalibrationMatrix(1, np.array([[1.2, 0.0], [-0.2, 1.0]]), source="exact")


def test_noise_json_roundtrip(tmp_path):
    noise = ReadoutNoise(((0.03, 0.05), (0.02, 0.04)))
    path = tmp_path / "noise.json"
    save_noise(noise, path)
    assert load_noise(path) == noise


def test_calibration_json_roundtrip(tmp_path):
    cal = calibrate(ReadoutNoise.uniform(2, 0.05), 2048, seed=4)
    path = tmp_path / "cal.json"
    save_calibration(cal, path)
    again = load_calibration(path)
    assert np.array_equal(again.matrix, cal.matrix)
    assert (again.n_qubits, again.source, again.shots, again.seed) == (
        cal.n_qubits, cal.source, cal.shots, cal.seed)
