import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tonereserve import (ConfigurationError, FreqSymbol, SystemConfig,
                         data_waveform, dft, dft_bin, idft, modulate,
                         random_frame, symbol_rng, tr_waveform)
from tonereserve.ofdm import CONSTELLATIONS, bin_index


def brute_dft(x):
    """O(N^2) unitary DFT used as an oracle for the FFT-based transforms."""
    n = len(x)
    grid = np.arange(n)
    kernel = np.exp(-2j * np.pi * np.outer(grid, grid) / n)
    return kernel @ x / np.sqrt(n)


class TestTransforms:
    def test_dft_matches_brute_force(self, rng):
        x = rng.normal(size=48) + 1j * rng.normal(size=48)
        assert np.allclose(dft(x), brute_dft(x), atol=1e-12)

    def test_round_trip(self, rng):
        x = rng.normal(size=64) + 1j * rng.normal(size=64)
        assert np.allclose(idft(dft(x)), x, atol=1e-12)
        assert np.allclose(dft(idft(x)), x, atol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 10).map(lambda k: 2 ** k), st.integers(0, 2**32 - 1))
    def test_round_trip_any_size(self, n, seed):
        gen = np.random.default_rng(seed)
        x = gen.normal(size=n) + 1j * gen.normal(size=n)
        assert np.allclose(idft(dft(x)), x, atol=1e-10)

    def test_energy_preserved(self, rng):
        x = rng.normal(size=128) + 1j * rng.normal(size=128)
        assert np.isclose(np.sum(np.abs(dft(x)) ** 2), np.sum(np.abs(x) ** 2))

    def test_single_bin_and_negative_index(self, rng):
        x = rng.normal(size=32) + 1j * rng.normal(size=32)
        full = brute_dft(x)
        assert np.isclose(dft_bin(x, 5), full[5])
        assert np.isclose(dft_bin(x, -3), full[29])

    def test_bin_index_wraps_negative(self):
        assert bin_index(-1, 64) == 63
        assert bin_index(5, 64) == 5
        assert bin_index(-32, 64) == 32


class TestConstellations:
    @pytest.mark.parametrize("name", sorted(CONSTELLATIONS))
    def test_unit_average_power(self, name):
        pts = CONSTELLATIONS[name]
        assert np.isclose(np.mean(np.abs(pts) ** 2), 1.0)

    def test_sizes(self):
        assert len(CONSTELLATIONS["qpsk"]) == 4
        assert len(CONSTELLATIONS["qam16"]) == 16
        assert len(CONSTELLATIONS["qam64"]) == 64


class TestSystemConfig:
    def test_counts(self, small_cfg):
        assert small_cfg.n_data == 11
        assert small_cfg.n_tr == 3

    def test_bins_wrap(self, small_cfg):
        assert list(small_cfg.tr_bins()) == [59, 55, 14]

    @pytest.mark.parametrize("kwargs", [
        dict(n_fft=48, n_cp=4, data_indices=(1,), tr_indices=(2,)),
        dict(n_fft=64, n_cp=64, data_indices=(1,), tr_indices=(2,)),
        dict(n_fft=64, n_cp=4, data_indices=(1, 2), tr_indices=(2,)),
        dict(n_fft=64, n_cp=4, data_indices=(0,), tr_indices=(2,)),
        dict(n_fft=64, n_cp=4, data_indices=(64,), tr_indices=(2,)),
        dict(n_fft=64, n_cp=4, data_indices=(1, 1), tr_indices=(2,)),
        dict(n_fft=64, n_cp=4, data_indices=(1,), tr_indices=(2, 2)),
        dict(n_fft=64, n_cp=4, data_indices=(1,), tr_indices=(2,),
             constellation="bpsk"),
    ])
    def test_invalid_configs_rejected(self, kwargs):
        with pytest.raises(ConfigurationError):
            SystemConfig(**kwargs)


class TestModulation:
    def test_matches_direct_subcarrier_sum(self, small_cfg, rng):
        sym = random_frame(small_cfg, rng)
        sym.d_tr[:] = rng.normal(size=3) + 1j * rng.normal(size=3)
        core = modulate(small_cfg, sym).core
        n = small_cfg.n_fft
        grid = np.arange(n)
        expected = np.zeros(n, dtype=complex)
        for k, d in zip(small_cfg.data_indices + small_cfg.tr_indices,
                        np.concatenate([sym.d_dc, sym.d_tr])):
            expected += d * np.exp(2j * np.pi * k * grid / n) / np.sqrt(n)
        assert np.allclose(core, expected, atol=1e-12)

    def test_superposition(self, small_cfg, rng):
        sym = random_frame(small_cfg, rng)
        sym.d_tr[:] = rng.normal(size=3) + 1j * rng.normal(size=3)
        total = modulate(small_cfg, sym).samples
        parts = (data_waveform(small_cfg, sym).samples
                 + tr_waveform(small_cfg, sym).samples)
        assert np.allclose(total, parts, atol=1e-12)

    def test_cyclic_prefix_copies_tail(self, small_cfg, rng):
        frame = modulate(small_cfg, random_frame(small_cfg, rng))
        assert len(frame.samples) == small_cfg.n_fft + small_cfg.n_cp
        assert np.array_equal(frame.samples[:8], frame.core[-8:])

    def test_core_strips_prefix(self, small_cfg, rng):
        frame = modulate(small_cfg, random_frame(small_cfg, rng))
        assert np.array_equal(frame.core, frame.samples[small_cfg.n_cp:])

    def test_zero_prefix(self, rng):
        cfg = SystemConfig(32, 0, data_indices=(1, 2), tr_indices=(5,))
        frame = modulate(cfg, random_frame(cfg, rng))
        assert len(frame.samples) == 32

    def test_shape_mismatch_rejected(self, small_cfg):
        sym = FreqSymbol(np.zeros(4, complex), np.zeros(3, complex))
        with pytest.raises(ConfigurationError):
            modulate(small_cfg, sym)


class TestRandomSymbols:
    def test_rng_streams_reproducible_and_distinct(self, small_cfg):
        a = symbol_rng(small_cfg, 7).normal(size=4)
        b = symbol_rng(small_cfg, 7).normal(size=4)
        c = symbol_rng(small_cfg, 8).normal(size=4)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_data_from_constellation_tones_zero(self, small_cfg):
        sym = random_frame(small_cfg, symbol_rng(small_cfg, 0))
        pts = CONSTELLATIONS[small_cfg.constellation]
        for d in sym.d_dc:
            assert np.min(np.abs(pts - d)) < 1e-12
        assert np.all(sym.d_tr == 0)

    def test_copy_is_deep(self, small_cfg):
        sym = random_frame(small_cfg, symbol_rng(small_cfg, 0))
        dup = sym.copy()
        dup.d_dc[0] = 99.0
        assert sym.d_dc[0] != 99.0
