"""Ensemble measurements: PAPR and its CCDF, Welch PSD, lambda and SDR.

run_ensemble generates random OFDM symbols, applies a tone-reservation
algorithm (or none), pushes the waveform through the amplifier and reduces
the ensemble to the quantities plotted in the simulation study: one ensemble
correlation coefficient, wideband SDR, per-symbol PAPR, optional PSDs of the
total output and of the uncorrelated distortion, and mean iteration /
operation counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import welch

from .baselines import NCC_TR, PAPR_TR, BaselineConfig, solve_ncc_tr, solve_papr_tr
from .ofdm import (ConfigurationError, SystemConfig, modulate, random_frame,
                   symbol_rng)
from .pa import RappPa, bussgang_lambda, sdr_db
from .solver import AcTrConfig, solve_ac_tr

REFERENCE = "reference"
AC_TR = "ac_tr"
ALGORITHMS = (REFERENCE, AC_TR, PAPR_TR, NCC_TR)


@dataclass
class RunMetrics:
    """Reduced measurements of one (algorithm, configuration) ensemble."""

    algorithm: str
    lambda_emp: float
    sdr_db: float
    papr_samples: np.ndarray
    mean_iters: float
    mean_ops_counted: float
    mean_ops_formula: float
    converged_fraction: float
    freq_grid: np.ndarray | None = None
    psd_total_db: np.ndarray | None = None
    psd_distortion_db: np.ndarray | None = None
    theta_mean: float = 0.0
    objective_monotone: bool = True
    lambda_symbols: np.ndarray | None = None


def papr(core_samples: np.ndarray) -> float:
    """Peak-to-average power ratio in dB over the N core samples."""
    power = np.abs(np.asarray(core_samples)) ** 2
    mean = power.mean()
    if mean == 0:
        raise ValueError("PAPR undefined for an all-zero frame")
    return float(10.0 * np.log10(power.max() / mean))


def ccdf(papr_samples, thresholds_db):
    """Empirical P(PAPR > threshold) for each threshold in dB."""
    samples = np.asarray(papr_samples, dtype=float)
    if samples.size == 0:
        raise ValueError("CCDF needs at least one sample")
    thresholds = np.asarray(thresholds_db, dtype=float)
    probs = np.array([(samples > t).mean() for t in thresholds])
    return thresholds, probs


def welch_psd(signals: np.ndarray, segment_len: int = 256, overlap: float = 0.5):
    """Welch-averaged two-sided PSD of a complex baseband ensemble.

    signals has one symbol per row.  Returns (normalized frequencies in
    [-0.5, 0.5), linear PSD averaged over the ensemble).
    """
    signals = np.atleast_2d(np.asarray(signals))
    if segment_len & (segment_len - 1) or segment_len > signals.shape[-1]:
        raise ConfigurationError("segment_len must be a power of two <= symbol length")
    freqs, pxx = welch(signals, window="hann", nperseg=segment_len,
                       noverlap=int(segment_len * overlap), detrend=False,
                       return_onesided=False, scaling="density", axis=-1)
    pxx = pxx.mean(axis=0)
    return np.fft.fftshift(freqs), np.fft.fftshift(pxx)


def _solver_model(pa: RappPa, p_cap: float = 10.0) -> RappPa:
    """AC-TR internal amplifier model: the true PA with smoothness capped."""
    p = min(pa.p, p_cap) if not math.isinf(pa.p) else p_cap
    return RappPa(p, pa.v_sat, pa.gain)


def run_ensemble(cfg: SystemConfig, pa: RappPa, algorithm: str, n_symbols: int,
                 actr_cfg: AcTrConfig | None = None,
                 baseline_cfg: BaselineConfig | None = None,
                 solver_p_cap: float = 10.0,
                 compute_psd: bool = False, psd_segment: int = 256,
                 per_symbol_lambda: bool = False) -> RunMetrics:
    """Run one algorithm over n_symbols random OFDM symbols and reduce.

    The reported correlation coefficient and SDR use a single ensemble-wide
    correlation; set per_symbol_lambda to additionally record one coefficient
    per OFDM symbol.  RNG streams derive from (cfg.seed, symbol index), so
    results are reproducible and independent of the processing order.
    """
    if algorithm not in ALGORITHMS:
        raise ConfigurationError(f"unknown algorithm {algorithm!r}")
    if n_symbols < 1:
        raise ConfigurationError("n_symbols must be >= 1")

    if algorithm == AC_TR:
        actr_cfg = actr_cfg or AcTrConfig()
        model = _solver_model(pa, solver_p_cap)
    elif algorithm == PAPR_TR:
        baseline_cfg = baseline_cfg or BaselineConfig(PAPR_TR)
    elif algorithm == NCC_TR:
        baseline_cfg = baseline_cfg or BaselineConfig(NCC_TR, v_sat=pa.v_sat)

    n_fft = cfg.n_fft
    cross = 0.0 + 0.0j
    in_power = 0.0
    out_power = 0.0
    papr_samples = np.empty(n_symbols)
    iters = np.zeros(n_symbols)
    ops_counted = np.zeros(n_symbols)
    ops_formula = np.zeros(n_symbols)
    converged = np.zeros(n_symbols, dtype=bool)
    thetas: list = []
    monotone = True
    y_store = np.empty((n_symbols, n_fft), dtype=complex) if compute_psd else None
    yo_store = np.empty((n_symbols, n_fft), dtype=complex) if compute_psd else None
    lam_store = np.empty(n_symbols) if per_symbol_lambda else None

    for i in range(n_symbols):
        sym = random_frame(cfg, symbol_rng(cfg, i))
        if algorithm == AC_TR:
            sym, diag = solve_ac_tr(cfg, model, sym, actr_cfg)
            trace = np.asarray(diag.objective_trace)
            if trace.size > 1 and np.any(np.diff(trace) > 1e-9 * (1 + trace[0])):
                monotone = False
        elif algorithm == PAPR_TR:
            sym, diag = solve_papr_tr(cfg, sym, baseline_cfg)
        elif algorithm == NCC_TR:
            sym, diag = solve_ncc_tr(cfg, sym, baseline_cfg)
            thetas.extend(diag.theta_per_iter)
        else:
            diag = None
        y = modulate(cfg, sym).core
        y_out = pa.amplify(y)
        cross += np.sum(y_out * np.conj(y))
        in_power += float(np.sum(np.abs(y) ** 2))
        out_power += float(np.sum(np.abs(y_out) ** 2))
        papr_samples[i] = papr(y)
        if diag is not None:
            iters[i] = diag.iterations
            ops_counted[i] = diag.ops_counted
            ops_formula[i] = diag.ops_formula
            converged[i] = diag.converged
        else:
            converged[i] = True
        if per_symbol_lambda:
            lam_store[i] = np.real(bussgang_lambda(y, y_out))
        if compute_psd:
            y_store[i] = y
            yo_store[i] = y_out

    lam = cross / in_power
    count = n_symbols * n_fft
    distortion_power = max((out_power - abs(cross) ** 2 / in_power) / count, 0.0)
    lam_real = float(np.real(lam))
    sdr = sdr_db(lam, cfg.n_data, distortion_power, n_fft)

    metrics = RunMetrics(
        algorithm=algorithm,
        lambda_emp=lam_real,
        sdr_db=sdr,
        papr_samples=papr_samples,
        mean_iters=float(iters.mean()),
        mean_ops_counted=float(ops_counted.mean()),
        mean_ops_formula=float(ops_formula.mean()),
        converged_fraction=float(converged.mean()),
        theta_mean=float(np.mean(thetas)) if thetas else 0.0,
        objective_monotone=monotone,
        lambda_symbols=lam_store,
    )
    if compute_psd:
        distortion = yo_store - lam * y_store
        freqs, psd_total = welch_psd(yo_store, psd_segment)
        _, psd_dist = welch_psd(distortion, psd_segment)
        metrics.freq_grid = freqs
        metrics.psd_total_db = 10.0 * np.log10(np.maximum(psd_total, 1e-300))
        metrics.psd_distortion_db = 10.0 * np.log10(np.maximum(psd_dist, 1e-300))
    return metrics
