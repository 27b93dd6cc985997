"""Amplifier-coupled tone reservation: convex Newton solver with FFT kernels.

For one OFDM symbol with data waveform x_n fixed, the reserved-tone symbols
d_TR are chosen to minimize

    f(d_TR) = sum_{n=-N_CP}^{N-1} |y_out_n - K*y_n|^2,   y = x + TR part,

where y_out is the Rapp amplifier output and K >= 1 keeps the problem convex.
Cyclic-prefix samples duplicate the tail of the core symbol, so the sum folds
onto n = 0..N-1 with the last N_CP samples weighted twice; the Gamma/Lambda
weight vectors below carry that factor.  The Jacobian and Hessian of f have
closed forms that reduce to a handful of N-point FFTs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .ofdm import ConfigurationError, FreqSymbol, SystemConfig, TimeFrame, idft
from .pa import RappPa


@dataclass(frozen=True)
class AcTrConfig:
    """Solver knobs: target factor K, stopping rule and Hessian evaluation mode."""

    k_param: float = 1.0
    stop_delta: float = 0.01
    max_iters: int = 50
    hessian_mode: str = "fast"  # "fast" (FFT) or "direct" (per-element sums)
    line_search: bool = True

    def __post_init__(self):
        if self.k_param < 1.0:
            raise ConfigurationError(
                f"k_param must be >= 1 (convexity region), got {self.k_param}")
        if not self.stop_delta > 0:
            raise ConfigurationError("stop_delta must be positive")
        if self.max_iters < 1:
            raise ConfigurationError("max_iters must be positive")
        if self.hessian_mode not in ("fast", "direct"):
            raise ConfigurationError(f"unknown hessian_mode {self.hessian_mode!r}")


@dataclass
class SolveDiagnostics:
    """Flat per-symbol solve record consumed by the experiments module."""

    iterations: int = 0
    converged: bool = False
    final_objective: float = 0.0
    final_grad_inf: float = 0.0
    ops_counted: float = 0.0
    ops_formula: float = 0.0
    rejected_steps: int = 0
    regularized: bool = False
    objective_trace: list = field(default_factory=list)
    theta_per_iter: list = field(default_factory=list)

    def as_record(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "ops_counted": self.ops_counted,
            "ops_formula": self.ops_formula,
            "final_objective": self.final_objective,
            "final_grad_inf": self.final_grad_inf,
        }


# -- split-radix operation counts (real add/sub/mul/div/power/comparison) ----

def complex_fft_ops(n_fft: int) -> float:
    """Split-radix op count of one N-point complex FFT."""
    return 4 * n_fft * math.log2(n_fft) - 6 * n_fft + 8


def count_ops_ac_tr(n_fft: int, beta: int) -> float:
    """Closed-form AC-TR operations per Newton iteration."""
    if not (n_fft >= 2 and (n_fft & (n_fft - 1)) == 0):
        raise ConfigurationError("operation count assumes a power-of-two FFT size")
    return (14 * n_fft * math.log2(n_fft) + 13 * n_fft
            + 12 * beta**2 + (8 * beta**3 + 4 * beta) / 3 + 28)


_PREP_OPS_PER_SAMPLE = 20   # |y|^2, b_n, Gamma_n, Lambda_n
_HESSIAN_FFT_CONST = 12     # one complex + one real-input N-point FFT


def _iteration_kernel_ops(n_fft: int, beta: int) -> dict:
    """Per-kernel op costs of one Newton iteration (sums to count_ops_ac_tr)."""
    return {
        "prep": _PREP_OPS_PER_SAMPLE * n_fft,
        "jacobian": 2 * n_fft + complex_fft_ops(n_fft),
        "hessian_fft": 6 * n_fft * math.log2(n_fft) + n_fft + _HESSIAN_FFT_CONST,
        "hessian_fill": beta * (beta + 1) + beta**2,
        "cholesky": (8 * beta**3 + beta) / 3 + 2 * beta**2,
        "substitution": 8 * beta**2,
        "update": complex_fft_ops(n_fft) + 2 * n_fft,
    }


# -- per-sample weight vectors -----------------------------------------------

def _fold_weights(n_fft: int, n_cp: int) -> np.ndarray:
    w = np.ones(n_fft)
    if n_cp:
        w[n_fft - n_cp:] = 2.0
    return w


def rapp_b(y: np.ndarray, pa: RappPa) -> np.ndarray:
    """b_n = 1 + |y_n|^{2p} / V^{2p}."""
    return 1.0 + (np.abs(y) / pa.v_sat) ** (2.0 * pa.p)


def objective_core(y: np.ndarray, pa: RappPa, k_param: float, n_cp: int) -> float:
    """CP-folded objective from the N core samples."""
    b = rapp_b(y, pa)
    terms = np.abs(y) ** 2 * (b ** (-1.0 / (2.0 * pa.p)) - k_param) ** 2
    return float(np.sum(_fold_weights(len(y), n_cp) * terms))


def objective(cfg: SystemConfig, pa: RappPa, frame: TimeFrame, k_param: float = 1.0) -> float:
    """Objective f = sum_n |y_out_n - K*y_n|^2 over the CP-extended symbol."""
    return objective_core(frame.core, pa, k_param, cfg.n_cp)


def gamma_lambda(y: np.ndarray, pa: RappPa, k_param: float, n_cp: int):
    """First/second-derivative weight vectors of the folded objective.

    Entries for the CP-mirrored tail n in {N-N_CP, ..., N-1} carry twice the
    base factor.  Requires p >= 1 (|y|^{2p-2} is singular at zero otherwise).
    """
    if pa.p < 1:
        raise ConfigurationError(f"solver requires smoothness p >= 1, got {pa.p}")
    p = pa.p
    c = 2.0 * _fold_weights(len(y), n_cp)
    b = rapp_b(y, pa)
    b_a = b ** (-1.0 / (2.0 * p))        # b^{-1/(2p)}
    b_c = b_a / b                        # b^{-1/(2p)-1}
    gamma = c * (k_param - b_a) * (k_param - b_c)
    amp_pow = np.abs(y) ** (2.0 * p - 2.0)
    lam = (c / pa.v_sat ** (2.0 * p)) * amp_pow * b_c * (
        (k_param - b_c) + (1.0 + 2.0 * p) * (k_param - b_a) / b)
    return gamma, lam


# -- Jacobian and Hessian, fast (FFT) and direct (per-element) forms ---------

def fourier_columns(n_fft: int, tr_indices) -> np.ndarray:
    """Matrix F with F[n, l] = (1/sqrt(N)) exp(-i 2 pi n T_l / N)."""
    n = np.arange(n_fft)[:, None]
    t = np.asarray(tr_indices)[None, :]
    return np.exp(-2j * np.pi * n * t / n_fft) / np.sqrt(n_fft)


def jacobian_fast(gamma: np.ndarray, y: np.ndarray, tr_bins: np.ndarray) -> np.ndarray:
    """Gradient [q; w] via one DFT of Gamma (*) y sampled at the reserved bins."""
    g = np.fft.fft(gamma * y) / np.sqrt(len(y))
    g = g[tr_bins]
    return np.concatenate([g.real, g.imag])


def jacobian_direct(gamma: np.ndarray, y: np.ndarray, fmat: np.ndarray) -> np.ndarray:
    """Gradient from the per-element derivative sums (oracle form)."""
    yf = y[:, None] * fmat
    q = gamma @ yf.real
    w = gamma @ yf.imag
    return np.concatenate([q, w])


def hessian_fast(gamma: np.ndarray, lam: np.ndarray, y: np.ndarray,
                 tr_indices) -> np.ndarray:
    """Hessian blocks A, B, D from two DFTs indexed at T_l +/- T_m."""
    n_fft = len(y)
    root_n = np.sqrt(n_fft)
    u = np.fft.fft(lam * y * y) / root_n
    w = np.fft.fft(gamma + 0.5 * lam * np.abs(y) ** 2) / root_n
    t = np.asarray(tr_indices)
    plus = (t[:, None] + t[None, :]) % n_fft
    minus = (t[:, None] - t[None, :]) % n_fft
    up = u[plus]
    wm = w[minus]
    a = (0.5 / root_n) * up.real + (1.0 / root_n) * wm.real
    b = (0.5 / root_n) * up.imag - (1.0 / root_n) * wm.imag
    d = -(0.5 / root_n) * up.real + (1.0 / root_n) * wm.real
    return np.block([[a, b], [b.T, d]])


def hessian_direct(gamma: np.ndarray, lam: np.ndarray, y: np.ndarray,
                   fmat: np.ndarray) -> np.ndarray:
    """Hessian from the per-element second-derivative sums (oracle form)."""
    fr, fi = fmat.real, fmat.imag
    yf = y[:, None] * fmat
    t, u = yf.real, yf.imag  # t_l = Re(y F_l), u_l = Im(y F_l)
    gram_sym = np.einsum("n,nl,nm->lm", gamma, fr, fr) + \
        np.einsum("n,nl,nm->lm", gamma, fi, fi)
    gram_skew = np.einsum("n,nl,nm->lm", gamma, fr, fi) - \
        np.einsum("n,nl,nm->lm", gamma, fi, fr)
    a = gram_sym + np.einsum("n,nl,nm->lm", lam, t, t)
    b = gram_skew + np.einsum("n,nl,nm->lm", lam, t, u)
    d = gram_sym + np.einsum("n,nl,nm->lm", lam, u, u)
    return np.block([[a, b], [b.T, d]])


def solve_newton_system(hessian: np.ndarray, grad: np.ndarray):
    """Cholesky solve of H*step = grad with a trace-scaled fallback ridge.

    Returns (step, regularized_flag).
    """
    try:
        return cho_solve(cho_factor(hessian, lower=True), grad), False
    except np.linalg.LinAlgError:
        eps = 1e-8 * np.trace(hessian) / hessian.shape[0]
        ridge = hessian + max(eps, 1e-300) * np.eye(hessian.shape[0])
        return cho_solve(cho_factor(ridge, lower=True), grad), True


_MAX_HALVINGS = 20


def solve_ac_tr(cfg: SystemConfig, pa: RappPa, sym: FreqSymbol,
                actr_cfg: AcTrConfig | None = None):
    """Optimize the reserved-tone symbols of one OFDM symbol.

    Data symbols are returned unchanged.  Iterates damped Newton steps until
    the largest reserved-symbol update falls below stop_delta.

    Returns (optimized FreqSymbol, SolveDiagnostics).
    """
    actr_cfg = actr_cfg or AcTrConfig()
    if math.isinf(pa.p):
        raise ConfigurationError("AC-TR needs a finite Rapp smoothness; cap p instead")
    n_fft, n_cp, beta = cfg.n_fft, cfg.n_cp, cfg.n_tr
    k = actr_cfg.k_param
    diag = SolveDiagnostics()
    out = sym.copy()
    if beta == 0:
        diag.converged = True
        return out, diag

    tr_bins = cfg.tr_bins()
    fmat = None
    if actr_cfg.hessian_mode == "direct":
        fmat = fourier_columns(n_fft, cfg.tr_indices)

    spectrum = np.zeros(n_fft, dtype=complex)
    spectrum[cfg.data_bins()] = sym.d_dc
    x = idft(spectrum)

    def tr_core(d):
        s = np.zeros(n_fft, dtype=complex)
        s[tr_bins] = d
        return idft(s)

    d = np.asarray(sym.d_tr, dtype=complex).copy()
    y = x + tr_core(d)
    f_cur = objective_core(y, pa, k, n_cp)
    diag.objective_trace.append(f_cur)
    kernel = _iteration_kernel_ops(n_fft, beta)
    grad = np.zeros(2 * beta)

    for it in range(1, actr_cfg.max_iters + 1):
        gamma, lam = gamma_lambda(y, pa, k, n_cp)
        diag.ops_counted += kernel["prep"]
        if actr_cfg.hessian_mode == "direct":
            grad = jacobian_direct(gamma, y, fmat)
        else:
            grad = jacobian_fast(gamma, y, tr_bins)
        diag.ops_counted += kernel["jacobian"]
        diag.iterations = it
        if np.max(np.abs(grad)) == 0.0:
            diag.converged = True
            break
        if actr_cfg.hessian_mode == "direct":
            hess = hessian_direct(gamma, lam, y, fmat)
        else:
            hess = hessian_fast(gamma, lam, y, cfg.tr_indices)
        diag.ops_counted += kernel["hessian_fft"] + kernel["hessian_fill"]
        step_vec, regularized = solve_newton_system(hess, grad)
        diag.regularized |= regularized
        diag.ops_counted += kernel["cholesky"] + kernel["substitution"]

        delta = step_vec[:beta] + 1j * step_vec[beta:]
        scale = 1.0
        accepted = False
        for _ in range(_MAX_HALVINGS + 1):
            d_try = d - scale * delta
            y_try = x + tr_core(d_try)
            f_try = objective_core(y_try, pa, k, n_cp)
            if not actr_cfg.line_search or f_try <= f_cur * (1 + 1e-12) + 1e-300:
                accepted = True
                break
            diag.rejected_steps += 1
            scale *= 0.5
        diag.ops_counted += kernel["update"]
        if not accepted:
            break
        move = float(np.max(np.abs(d_try - d)))
        d, y, f_cur = d_try, y_try, f_try
        diag.objective_trace.append(f_cur)
        if move < actr_cfg.stop_delta:
            diag.converged = True
            break

    gamma, _ = gamma_lambda(y, pa, k, n_cp)
    final_grad = jacobian_fast(gamma, y, tr_bins)
    diag.final_grad_inf = float(np.max(np.abs(final_grad))) if beta else 0.0
    diag.final_objective = f_cur
    diag.ops_formula = diag.iterations * count_ops_ac_tr(n_fft, beta)
    out.d_tr = d
    return out, diag
