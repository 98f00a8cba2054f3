"""Pilot design, sensing-matrix assembly, overhead arithmetic, serialization."""

import numpy as np
import pytest

from sspursuit.pilots import (
    PilotConfig,
    build_sensing_matrix,
    design_pilots,
    format_pilot_config,
    overhead_report,
    parse_pilot_config,
    pilot_subcarriers,
)


class TestPilotSubcarriers:
    def test_floor_decimation(self):
        assert pilot_subcarriers(16, 4).tolist() == [0, 4, 8, 12]
        assert pilot_subcarriers(10, 3).tolist() == [0, 3, 6]

    def test_full_grid(self):
        assert pilot_subcarriers(5, 5).tolist() == [0, 1, 2, 3, 4]

    def test_full_scale_grid_is_strictly_increasing(self):
        idx = pilot_subcarriers(4096, 800)
        assert idx.size == 800
        assert np.all(np.diff(idx) >= 1)
        assert idx[-1] < 4096

    def test_bounds(self):
        with pytest.raises(ValueError):
            pilot_subcarriers(8, 0)
        with pytest.raises(ValueError):
            pilot_subcarriers(8, 9)


class TestDesignPilots:
    def test_deterministic_given_seed(self):
        a = design_pilots(64, 16, 4, 5)
        b = design_pilots(64, 16, 4, 5)
        assert np.array_equal(a.sequences, b.sequences)
        assert np.array_equal(a.pilot_indices, b.pilot_indices)
        assert a.seed == 5

    def test_sequences_are_plus_minus_one_and_distinct(self):
        cfg = design_pilots(256, 32, 16, 99)
        assert set(np.unique(cfg.sequences)) == {-1, 1}
        assert np.unique(cfg.sequences, axis=0).shape[0] == 16

    def test_generator_source_leaves_seed_unknown(self):
        cfg = design_pilots(64, 16, 2, np.random.default_rng(3))
        assert cfg.seed is None

    def test_impossible_distinctness_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            design_pilots(16, 2, 5, 0)

    def test_collisions_are_redrawn(self):
        # N_p=3 with M=8 = 2^3 forces the redraw loop to fill every pattern
        cfg = design_pilots(8, 3, 8, 1)
        assert np.unique(cfg.sequences, axis=0).shape[0] == 8


class TestSensingMatrix:
    def test_tiny_hand_case(self):
        """N=4, N_p=2 picks subcarriers {0, 2}; with sequences (+1,+1) and
        (+1,-1) the 2x4 operator is sign-checkable by hand."""
        cfg = PilotConfig(
            N=4,
            N_p=2,
            pilot_indices=np.array([0, 2]),
            sequences=np.array([[1, 1], [1, -1]]),
        )
        phi = build_sensing_matrix(cfg, 2)
        expected = np.array([[1, 1, 1, 1], [1, -1, -1, 1]], dtype=complex)
        assert np.allclose(phi.data, expected, atol=1e-12)

    def test_unit_modulus(self):
        cfg = design_pilots(128, 24, 6, 2)
        phi = build_sensing_matrix(cfg, 16)
        assert np.max(np.abs(np.abs(phi.data) - 1.0)) < 1e-12

    def test_matches_closed_form_at_random_entries(self):
        cfg = design_pilots(512, 64, 8, 12)
        L = 32
        phi = build_sensing_matrix(cfg, L)
        rng = np.random.default_rng(0)
        for _ in range(200):
            q = int(rng.integers(cfg.N_p))
            m = int(rng.integers(cfg.M))
            tau = int(rng.integers(L))
            want = cfg.sequences[m, q] * np.exp(
                -2j * np.pi * cfg.pilot_indices[q] * tau / cfg.N
            )
            got = phi.data[q, m * L + tau]
            assert abs(got - want) < 1e-12

    def test_all_antennas_share_the_subcarrier_rows(self):
        """Each antenna block is diag(p_m) times the same restricted DFT, so
        up to sign flips the row magnitudes and phases agree across blocks."""
        cfg = design_pilots(64, 12, 3, 8)
        L = 6
        phi = build_sensing_matrix(cfg, L)
        base = phi.data[:, :L] / cfg.sequences[0][:, None]
        for m in range(1, cfg.M):
            block = phi.data[:, m * L : (m + 1) * L] / cfg.sequences[m][:, None]
            assert np.allclose(block, base, atol=1e-12)

    def test_plain_dft_when_sequences_are_ones(self):
        cfg = PilotConfig(
            N=8,
            N_p=8,
            pilot_indices=np.arange(8),
            sequences=np.ones((1, 8), dtype=int),
        )
        phi = build_sensing_matrix(cfg, 4)
        dft = np.fft.fft(np.eye(8))[:, :4]
        assert np.allclose(phi.data, dft, atol=1e-12)

    def test_window_bounds(self):
        cfg = design_pilots(32, 8, 2, 0)
        with pytest.raises(ValueError):
            build_sensing_matrix(cfg, 33)
        with pytest.raises(ValueError):
            build_sensing_matrix(cfg, 0)


class TestOverheadReport:
    def test_full_scale_figures(self):
        cfg = design_pilots(4096, 800, 64, 1)
        rep = overhead_report(cfg, 64, 6)
        assert rep.fraction == pytest.approx(0.1953125)
        assert rep.per_antenna == pytest.approx(12.5)
        assert rep.cs_limit == 12
        assert rep.orthogonal_total == 51200

    def test_single_antenna(self):
        cfg = design_pilots(4096, 800, 64, 1)
        assert overhead_report(cfg, 1, 6).per_antenna == pytest.approx(800.0)

    def test_direct_arithmetic(self):
        cfg = design_pilots(1000, 100, 10, 3)
        rep = overhead_report(cfg, 10, 6)
        assert rep.fraction == pytest.approx(0.1)
        assert rep.per_antenna == pytest.approx(10.0)
        assert rep.cs_limit == 12

    def test_format_mentions_the_numbers(self):
        text = overhead_report(design_pilots(4096, 800, 64, 1), 64, 6).format()
        assert "19.53" in text and "12.50" in text and "12" in text

    def test_validation(self):
        cfg = design_pilots(64, 8, 2, 0)
        with pytest.raises(ValueError):
            overhead_report(cfg, 0, 6)
        with pytest.raises(ValueError):
            overhead_report(cfg, 2, 0)


class TestSerialization:
    def test_round_trip_is_exact(self):
        cfg = design_pilots(256, 40, 5, 77)
        back = parse_pilot_config(format_pilot_config(cfg))
        assert back.N == cfg.N and back.N_p == cfg.N_p and back.seed == 77
        assert np.array_equal(back.pilot_indices, cfg.pilot_indices)
        assert np.array_equal(back.sequences, cfg.sequences)

    def test_unknown_seed_round_trips_as_none(self):
        cfg = design_pilots(64, 8, 2, np.random.default_rng(0))
        back = parse_pilot_config(format_pilot_config(cfg))
        assert back.seed is None

    def test_missing_field_rejected(self):
        with pytest.raises(ValueError, match="missing"):
            parse_pilot_config("N = 8\nN_p = 2\nseed = 0\n")

    def test_gap_in_sequence_rows_rejected(self):
        cfg = design_pilots(64, 8, 3, 1)
        text = format_pilot_config(cfg).replace("sequence_1", "sequence_9")
        with pytest.raises(ValueError, match="non-contiguous"):
            parse_pilot_config(text)


class TestPilotConfigValidation:
    def test_rejects_unsorted_indices(self):
        with pytest.raises(ValueError):
            PilotConfig(
                N=8,
                N_p=2,
                pilot_indices=np.array([4, 2]),
                sequences=np.array([[1, -1]]),
            )

    def test_rejects_non_binary_sequences(self):
        with pytest.raises(ValueError):
            PilotConfig(
                N=8,
                N_p=2,
                pilot_indices=np.array([0, 4]),
                sequences=np.array([[1, 2]]),
            )

    def test_rejects_duplicate_rows(self):
        with pytest.raises(ValueError, match="distinct"):
            PilotConfig(
                N=8,
                N_p=2,
                pilot_indices=np.array([0, 4]),
                sequences=np.array([[1, -1], [1, -1]]),
            )

    def test_rejects_out_of_range_index(self):
        with pytest.raises(ValueError):
            PilotConfig(
                N=8,
                N_p=2,
                pilot_indices=np.array([0, 8]),
                sequences=np.array([[1, -1]]),
            )
