"""Measurement model: exact forward map, calibrated noise, CSV dump."""

import csv

import numpy as np
import pytest

from sspursuit.channel import ChannelSpec, generate_channel
from sspursuit.measurement import measurement_to_csv, simulate_measurement
from sspursuit.pilots import build_sensing_matrix, design_pilots


@pytest.fixture(scope="module")
def operator():
    cfg = design_pilots(64, 24, 3, 21)
    return build_sensing_matrix(cfg, 12)


def test_no_noise_marker_is_exact(operator):
    rng = np.random.default_rng(0)
    H = rng.standard_normal((36, 2)) + 1j * rng.standard_normal((36, 2))
    block = simulate_measurement(operator, H, None, rng)
    assert np.linalg.norm(block.Y - operator.data @ H) <= 1e-10
    assert block.snr_db is None
    assert block.noise_var == 0.0


def test_no_noise_is_linear_in_h(operator):
    rng = np.random.default_rng(5)
    for _ in range(10):
        H1 = rng.standard_normal((36, 2)) + 1j * rng.standard_normal((36, 2))
        H2 = rng.standard_normal((36, 2)) + 1j * rng.standard_normal((36, 2))
        ya = simulate_measurement(operator, H1 + H2, None, rng).Y
        yb = (
            simulate_measurement(operator, H1, None, rng).Y
            + simulate_measurement(operator, H2, None, rng).Y
        )
        assert np.linalg.norm(ya - yb) <= 1e-10


def test_block_shape_matches_channel(operator):
    spec = ChannelSpec(M=3, L=12, K=2, R=4)
    chan = generate_channel(spec, None, np.random.default_rng(1))
    block = simulate_measurement(operator, chan, 10.0, np.random.default_rng(2))
    assert block.Y.shape == (24, 4)


def test_vector_channel_becomes_a_column(operator):
    h = np.ones(36, dtype=complex)
    block = simulate_measurement(operator, h, None, np.random.default_rng(0))
    assert block.Y.shape == (24, 1)


def test_noise_variance_calibration():
    """Empirical noise energy per sample matches the stated variance to 1%."""
    cfg = design_pilots(256, 100, 2, 3)
    phi = build_sensing_matrix(cfg, 20)
    rng = np.random.default_rng(44)
    H = rng.standard_normal((40, 4)) + 1j * rng.standard_normal((40, 4))
    signal = phi.data @ H
    snr_db = 10.0
    var = float(np.linalg.norm(signal) ** 2) / (signal.size * 10.0 ** (snr_db / 10.0))
    total = 0.0
    trials = 10_000 // 4
    for _ in range(trials):
        block = simulate_measurement(phi, H, snr_db, rng)
        assert block.noise_var == pytest.approx(var)
        total += float(np.linalg.norm(block.Y - signal) ** 2)
    empirical = total / (trials * signal.size)
    assert abs(empirical - var) / var < 0.01, f"{empirical:.5g} vs {var:.5g}"


def test_noise_parts_each_carry_half_the_variance(operator):
    rng = np.random.default_rng(8)
    H = rng.standard_normal((36, 4)) + 1j * rng.standard_normal((36, 4))
    signal = operator.data @ H
    samples = []
    while len(samples) * signal.size < 40_000:
        samples.append(simulate_measurement(operator, H, 7.0, rng))
    noise = np.concatenate([(b.Y - signal).ravel() for b in samples])
    var = samples[0].noise_var
    assert abs(np.var(noise.real) - var / 2) / (var / 2) < 0.02
    assert abs(np.var(noise.imag) - var / 2) / (var / 2) < 0.02


def test_zero_channel_with_finite_snr_stays_zero(operator):
    H = np.zeros((36, 2), dtype=complex)
    block = simulate_measurement(operator, H, 10.0, np.random.default_rng(0))
    assert np.all(block.Y == 0)
    assert block.noise_var == 0.0


def test_dimension_mismatch_rejected(operator):
    with pytest.raises(ValueError, match="does not match"):
        simulate_measurement(operator, np.ones((35, 2)), None, np.random.default_rng(0))


def test_csv_dump_round_trips_values(operator, tmp_path):
    rng = np.random.default_rng(12)
    H = rng.standard_normal((36, 3)) + 1j * rng.standard_normal((36, 3))
    block = simulate_measurement(operator, H, None, rng)
    path = tmp_path / "y.csv"
    measurement_to_csv(block, path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 24 and len(rows[0]) == 3
    for q, row in enumerate(rows):
        for r, cell in enumerate(row):
            re, im = (float(tok) for tok in cell.split(","))
            assert complex(re, im) == block.Y[q, r]
