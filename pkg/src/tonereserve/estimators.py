"""Scikit-learn style wrappers around the tone-reservation solvers.

Each optimizer is a stateless transformer: X holds one OFDM symbol's data
subcarrier values per row (complex, shape (n_symbols, alpha)) and transform
returns the optimized reserved-tone symbols (shape (n_symbols, beta)).
Per-row solve diagnostics are kept in ``diagnostics_`` after transform.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .baselines import (NCC_TR, PAPR_TR, BaselineConfig, solve_ncc_tr,
                        solve_papr_tr)
from .ofdm import ConfigurationError, FreqSymbol, SystemConfig
from .pa import RappPa
from .solver import AcTrConfig, solve_ac_tr


def _validate_symbols(X: np.ndarray, n_data: int) -> np.ndarray:
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != n_data:
        raise ConfigurationError(
            f"expected data symbols of shape (n_symbols, {n_data}), got {X.shape}")
    return X.astype(complex, copy=False)


class _ToneOptimizerBase(BaseEstimator, TransformerMixin):
    """Shared fit/transform plumbing for the per-symbol solvers."""

    def fit(self, X=None, y=None):
        if not isinstance(self.system, SystemConfig):
            raise ConfigurationError("system must be a SystemConfig")
        self._build()
        self.n_features_in_ = self.system.n_data
        return self

    def transform(self, X):
        if not hasattr(self, "n_features_in_"):
            raise NotFittedError("call fit before transform")
        X = _validate_symbols(X, self.system.n_data)
        beta = self.system.n_tr
        out = np.empty((X.shape[0], beta), dtype=complex)
        self.diagnostics_ = []
        for i, row in enumerate(X):
            sym = FreqSymbol(row, np.zeros(beta, dtype=complex))
            solved, diag = self._solve(sym)
            out[i] = solved.d_tr
            self.diagnostics_.append(diag)
        return out


class AcTrOptimizer(_ToneOptimizerBase):
    """Newton minimizer of the amplifier input/output mismatch."""

    def __init__(self, system, pa, k_param=1.0, stop_delta=0.01, max_iters=50,
                 hessian_mode="fast", line_search=True):
        self.system = system
        self.pa = pa
        self.k_param = k_param
        self.stop_delta = stop_delta
        self.max_iters = max_iters
        self.hessian_mode = hessian_mode
        self.line_search = line_search

    def _build(self):
        if not isinstance(self.pa, RappPa):
            raise ConfigurationError("pa must be a RappPa")
        self._cfg = AcTrConfig(self.k_param, self.stop_delta, self.max_iters,
                               self.hessian_mode, self.line_search)

    def _solve(self, sym):
        return solve_ac_tr(self.system, self.pa, sym, self._cfg)


class PaprTrOptimizer(_ToneOptimizerBase):
    """Min-max (peak amplitude) tone-reservation optimizer."""

    def __init__(self, system, stop_delta=0.01, max_iters=50):
        self.system = system
        self.stop_delta = stop_delta
        self.max_iters = max_iters

    def _build(self):
        self._cfg = BaselineConfig(PAPR_TR, self.stop_delta, self.max_iters)

    def _solve(self, sym):
        return solve_papr_tr(self.system, sym, self._cfg)


class NccTrOptimizer(_ToneOptimizerBase):
    """Clipping-noise cancellation optimizer for a soft-limiter amplifier."""

    def __init__(self, system, v_sat, stop_delta=0.01, max_iters=50, step=0.5):
        self.system = system
        self.v_sat = v_sat
        self.stop_delta = stop_delta
        self.max_iters = max_iters
        self.step = step

    def _build(self):
        self._cfg = BaselineConfig(NCC_TR, self.stop_delta, self.max_iters,
                                   v_sat=self.v_sat, step=self.step)

    def _solve(self, sym):
        return solve_ncc_tr(self.system, sym, self._cfg)
