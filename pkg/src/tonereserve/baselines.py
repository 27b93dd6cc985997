"""Comparison tone-reservation algorithms with matched stopping rule.

PAPR-TR approximately solves min_d max_n |x_n + TR part| with an iteratively
reweighted least-squares scheme (Lawson weights): each iteration solves a
small weighted normal-equation system for the reserved tones, with the Gram
matrix and right-hand side read off two N-point FFTs, then re-concentrates
the weights on the current envelope peaks.

NCC-TR assumes a soft-limiter amplifier with known clipping threshold V:
each iteration clips the waveform at V, projects the clipping noise onto the
reserved tones with one DFT, and subtracts it from the tone symbols.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .ofdm import ConfigurationError, FreqSymbol, SystemConfig, idft
from .pa import soft_limit
from .solver import SolveDiagnostics

PAPR_TR = "papr_tr"
NCC_TR = "ncc_tr"


@dataclass(frozen=True)
class BaselineConfig:
    algorithm: str
    stop_delta: float = 0.01
    max_iters: int = 50
    v_sat: float = 0.0       # clipping threshold, NCC-TR only
    # Projection damping (NCC-TR only).  Full-step cancellation over-corrects
    # under deep clipping, where the clipped sample set changes between
    # iterations; half steps keep the fixed-point iteration contractive.
    step: float = 0.5

    def __post_init__(self):
        if self.algorithm not in (PAPR_TR, NCC_TR):
            raise ConfigurationError(f"unknown baseline algorithm {self.algorithm!r}")
        if not self.stop_delta > 0:
            raise ConfigurationError("stop_delta must be positive")
        if self.max_iters < 1:
            raise ConfigurationError("max_iters must be positive")
        if self.algorithm == NCC_TR and not self.v_sat > 0:
            raise ConfigurationError("NCC-TR requires a positive clipping threshold")


def count_ops_baseline(algorithm: str, n_fft: int, beta: int = 0, theta: int = 0) -> float:
    """Per-iteration operation count of a baseline algorithm."""
    if not (n_fft >= 2 and (n_fft & (n_fft - 1)) == 0):
        raise ConfigurationError("operation count assumes a power-of-two FFT size")
    if algorithm == PAPR_TR:
        return (14 * n_fft * math.log2(n_fft) + 10 * n_fft
                + 26 * beta**2 + (8 * beta**3 + beta) / 3 + 28)
    if algorithm == NCC_TR:
        return 8 * n_fft * math.log2(n_fft) + 14 * theta + 13
    raise ConfigurationError(f"unknown baseline algorithm {algorithm!r}")


def _data_core(cfg: SystemConfig, sym: FreqSymbol) -> np.ndarray:
    spectrum = np.zeros(cfg.n_fft, dtype=complex)
    spectrum[cfg.data_bins()] = sym.d_dc
    return idft(spectrum)


def _tr_core(cfg: SystemConfig, d: np.ndarray) -> np.ndarray:
    spectrum = np.zeros(cfg.n_fft, dtype=complex)
    spectrum[cfg.tr_bins()] = d
    return idft(spectrum)


def solve_papr_tr(cfg: SystemConfig, sym: FreqSymbol,
                  baseline_cfg: BaselineConfig | None = None):
    """Minimize the peak envelope amplitude over the reserved-tone symbols.

    Returns (FreqSymbol with the best-peak iterate, SolveDiagnostics).  Data
    symbols are never modified; the zero start keeps the final peak at or
    below the input peak.
    """
    bcfg = baseline_cfg or BaselineConfig(PAPR_TR)
    n_fft, beta = cfg.n_fft, cfg.n_tr
    diag = SolveDiagnostics()
    out = sym.copy()
    if beta == 0:
        diag.converged = True
        return out, diag

    tr_bins = cfg.tr_bins()
    t_idx = np.asarray(cfg.tr_indices)
    minus = (t_idx[:, None] - t_idx[None, :]) % n_fft
    root_n = np.sqrt(n_fft)
    per_iter_ops = count_ops_baseline(PAPR_TR, n_fft, beta)

    x = _data_core(cfg, sym)
    d = np.asarray(sym.d_tr, dtype=complex).copy()
    y = x + _tr_core(cfg, d)
    best_d, best_peak = d.copy(), float(np.max(np.abs(y)))
    # Start with envelope-proportional weights; uniform weights would make the
    # first normal-equation solve return the zero update (x has no reserved-tone
    # content) and trip the stopping rule immediately.
    env = np.abs(y)
    weights = env / env.sum() if env.sum() > 0 else np.full(n_fft, 1.0 / n_fft)

    for it in range(1, bcfg.max_iters + 1):
        diag.iterations = it
        diag.ops_counted += per_iter_ops
        w_spec = np.fft.fft(weights) / root_n
        gram = w_spec[minus] / root_n
        rhs = (np.fft.fft(weights * x) / root_n)[tr_bins]
        ridge = 1e-12 * np.real(np.trace(gram)) / beta
        try:
            d_new = -cho_solve(
                cho_factor(gram + ridge * np.eye(beta), lower=True), rhs)
        except np.linalg.LinAlgError:
            diag.regularized = True
            break
        y = x + _tr_core(cfg, d_new)
        peak = float(np.max(np.abs(y)))
        if peak < best_peak:
            best_peak, best_d = peak, d_new.copy()
        move = float(np.max(np.abs(d_new - d)))
        d = d_new
        # Squared-envelope reweighting concentrates mass on the peak set
        # faster than the classical |y| update and reaches a lower peak
        # within the iteration budget.
        weights = weights * np.abs(y) ** 2
        total = weights.sum()
        if total <= 0:
            diag.converged = True
            break
        weights /= total
        if move < bcfg.stop_delta:
            diag.converged = True
            break

    diag.ops_formula = diag.iterations * per_iter_ops
    diag.final_objective = best_peak
    out.d_tr = best_d
    return out, diag


def solve_ncc_tr(cfg: SystemConfig, sym: FreqSymbol, baseline_cfg: BaselineConfig):
    """Iterative clipping-noise cancellation on the reserved tones.

    Returns (FreqSymbol, SolveDiagnostics); diagnostics record the number of
    clipped samples per iteration.
    """
    bcfg = baseline_cfg
    if bcfg.algorithm != NCC_TR:
        raise ConfigurationError("baseline_cfg.algorithm must be 'ncc_tr'")
    n_fft, beta = cfg.n_fft, cfg.n_tr
    diag = SolveDiagnostics()
    out = sym.copy()
    if beta == 0:
        diag.converged = True
        return out, diag

    tr_bins = cfg.tr_bins()
    root_n = np.sqrt(n_fft)
    x = _data_core(cfg, sym)
    d = np.asarray(sym.d_tr, dtype=complex).copy()

    for _ in range(bcfg.max_iters):
        y = x + _tr_core(cfg, d)
        clip_noise = y - soft_limit(bcfg.v_sat, y)
        theta = int(np.count_nonzero(clip_noise))
        if theta == 0:
            diag.converged = True
            break
        diag.iterations += 1
        diag.theta_per_iter.append(theta)
        diag.ops_counted += count_ops_baseline(NCC_TR, n_fft, theta=theta)
        projection = (np.fft.fft(clip_noise) / root_n)[tr_bins]
        d = d - bcfg.step * projection
        if bcfg.step * float(np.max(np.abs(projection))) < bcfg.stop_delta:
            diag.converged = True
            break

    diag.ops_formula = diag.ops_counted
    out.d_tr = d
    return out, diag
