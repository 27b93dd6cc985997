import numpy as np
import pytest

from tonereserve import (BaselineConfig, ConfigurationError, SystemConfig,
                         count_ops_baseline, random_frame, solve_ncc_tr,
                         solve_papr_tr, symbol_rng)
from tonereserve.baselines import NCC_TR, PAPR_TR, _data_core, _tr_core


class TestConfig:
    @pytest.mark.parametrize("kwargs", [
        dict(algorithm="clipping"),
        dict(algorithm=PAPR_TR, stop_delta=0.0),
        dict(algorithm=PAPR_TR, max_iters=0),
        dict(algorithm=NCC_TR),  # missing clipping threshold
    ])
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ConfigurationError):
            BaselineConfig(**kwargs)


class TestOperationCounts:
    def test_spot_values(self):
        assert count_ops_baseline(NCC_TR, 1024) == 81933.0
        assert count_ops_baseline(NCC_TR, 1024, theta=10) == 82073.0
        expected = (14 * 1024 * 10 + 10 * 1024 + 26 * 121
                    + (8 * 11**3 + 11) / 3 + 28)
        assert count_ops_baseline(PAPR_TR, 1024, beta=11) == expected

    def test_unknown_algorithm_rejected(self):
        with pytest.raises(ConfigurationError):
            count_ops_baseline("other", 1024)

    def test_non_power_of_two_rejected(self):
        with pytest.raises(ConfigurationError):
            count_ops_baseline(NCC_TR, 100)


class TestPeakMinimizer:
    def test_never_increases_peak(self, small_cfg):
        for i in range(20):
            sym = random_frame(small_cfg, symbol_rng(small_cfg, i))
            x = _data_core(small_cfg, sym)
            initial = np.max(np.abs(x))
            out, diag = solve_papr_tr(small_cfg, sym)
            final = np.max(np.abs(x + _tr_core(small_cfg, out.d_tr)))
            assert final <= initial + 1e-12
            assert diag.final_objective == pytest.approx(final)

    def test_meaningfully_reduces_peak(self, small_cfg):
        reductions = []
        for i in range(10):
            sym = random_frame(small_cfg, symbol_rng(small_cfg, i))
            x = _data_core(small_cfg, sym)
            out, _ = solve_papr_tr(small_cfg, sym)
            final = np.max(np.abs(x + _tr_core(small_cfg, out.d_tr)))
            reductions.append(np.max(np.abs(x)) / final)
        assert np.mean(reductions) > 1.05

    def test_data_symbols_bit_identical(self, small_cfg):
        sym = random_frame(small_cfg, symbol_rng(small_cfg, 0))
        out, _ = solve_papr_tr(small_cfg, sym)
        assert np.array_equal(out.d_dc, sym.d_dc)

    def test_near_optimal_single_tone(self):
        """Brute-force oracle: refine a complex grid over the one tone symbol."""
        cfg = SystemConfig(32, 4, data_indices=(1, 2, 3, -2, -4, 5, -6, 7),
                           tr_indices=(4,), seed=5)
        tone = _tr_core(cfg, np.array([1.0 + 0j]))
        for i in range(5):
            sym = random_frame(cfg, symbol_rng(cfg, i))
            x = _data_core(cfg, sym)

            def peak(d):
                return float(np.max(np.abs(x + d * tone)))

            best, best_d = np.inf, 0j
            grid = np.linspace(-3, 3, 61)
            for re in grid:
                for im in grid:
                    if peak(re + 1j * im) < best:
                        best, best_d = peak(re + 1j * im), re + 1j * im
            for _ in range(3):
                offsets = np.linspace(-0.1, 0.1, 41)
                for re in offsets:
                    for im in offsets:
                        cand = best_d + re + 1j * im
                        if peak(cand) < best:
                            best, best_d = peak(cand), cand
            out, _ = solve_papr_tr(cfg, sym)
            assert 0.98 * best <= peak(complex(out.d_tr[0])) <= 1.05 * best

    def test_ops_accounting(self, small_cfg):
        sym = random_frame(small_cfg, symbol_rng(small_cfg, 0))
        _, diag = solve_papr_tr(small_cfg, sym)
        per_iter = count_ops_baseline(PAPR_TR, small_cfg.n_fft, small_cfg.n_tr)
        assert diag.ops_formula == diag.iterations * per_iter
        assert diag.ops_counted == diag.ops_formula

    def test_no_reserved_tones_is_noop(self):
        cfg = SystemConfig(64, 8, data_indices=tuple(range(1, 12)), tr_indices=())
        sym = random_frame(cfg, symbol_rng(cfg, 0))
        out, diag = solve_papr_tr(cfg, sym)
        assert diag.converged
        assert diag.iterations == 0


class TestClippingNoiseCancellation:
    def make(self, cfg, v_sat, **kwargs):
        return BaselineConfig(NCC_TR, v_sat=v_sat, **kwargs)

    def test_reduces_clipping_noise_power(self, small_cfg):
        from tonereserve import soft_limit
        sigma2 = small_cfg.n_data / small_cfg.n_fft
        v_sat = float(np.sqrt(sigma2 * 10 ** 0.4))  # 4 dB back-off
        improved = total = 0
        for i in range(10):
            sym = random_frame(small_cfg, symbol_rng(small_cfg, i))
            x = _data_core(small_cfg, sym)
            out, diag = solve_ncc_tr(small_cfg, sym, self.make(small_cfg, v_sat))
            if diag.iterations <= 1:
                continue  # already near the fixed point
            total += 1
            y = x + _tr_core(small_cfg, out.d_tr)
            before = np.sum(np.abs(x - soft_limit(v_sat, x)) ** 2)
            after = np.sum(np.abs(y - soft_limit(v_sat, y)) ** 2)
            if after < before:
                improved += 1
            assert len(diag.theta_per_iter) == diag.iterations
        assert total >= 3 and improved == total

    def test_no_clipping_converges_with_zero_iterations(self, small_cfg):
        sym = random_frame(small_cfg, symbol_rng(small_cfg, 0))
        out, diag = solve_ncc_tr(small_cfg, sym, self.make(small_cfg, 1e6))
        assert diag.converged
        assert diag.iterations == 0
        assert np.array_equal(out.d_tr, sym.d_tr)

    def test_data_symbols_bit_identical(self, small_cfg):
        sym = random_frame(small_cfg, symbol_rng(small_cfg, 1))
        out, _ = solve_ncc_tr(small_cfg, sym, self.make(small_cfg, 0.5))
        assert np.array_equal(out.d_dc, sym.d_dc)

    def test_ops_use_recorded_clip_counts(self, small_cfg):
        sym = random_frame(small_cfg, symbol_rng(small_cfg, 2))
        _, diag = solve_ncc_tr(small_cfg, sym, self.make(small_cfg, 0.5))
        expected = sum(count_ops_baseline(NCC_TR, small_cfg.n_fft, theta=t)
                       for t in diag.theta_per_iter)
        assert diag.ops_counted == expected
        assert diag.ops_formula == expected

    def test_wrong_algorithm_tag_rejected(self, small_cfg):
        sym = random_frame(small_cfg, symbol_rng(small_cfg, 0))
        with pytest.raises(ConfigurationError):
            solve_ncc_tr(small_cfg, sym, BaselineConfig(PAPR_TR))

    def test_damping_scales_first_update(self, small_cfg):
        sigma2 = small_cfg.n_data / small_cfg.n_fft
        v_sat = float(np.sqrt(sigma2 * 10 ** 0.4))
        sym = random_frame(small_cfg, symbol_rng(small_cfg, 3))
        full, _ = solve_ncc_tr(small_cfg, sym,
                               self.make(small_cfg, v_sat, step=1.0, max_iters=1))
        half, _ = solve_ncc_tr(small_cfg, sym,
                               self.make(small_cfg, v_sat, step=0.5, max_iters=1))
        assert np.allclose(half.d_tr, 0.5 * full.d_tr)
