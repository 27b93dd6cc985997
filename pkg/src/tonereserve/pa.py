"""Rapp amplifier model, soft-limiter limit, Bussgang decomposition and SDR.

The Rapp AM-AM characteristic is y_out = G*y / (1 + |y|^{2p}/V^{2p})^{1/(2p)}.
For p -> infinity it approaches an ideal soft limiter clipping at amplitude V.
The output of any memoryless nonlinearity splits into a scaled replica
lambda*y of the input plus a distortion term uncorrelated with the input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad


class NumericalError(ArithmeticError):
    """A numerical routine failed to reach its accuracy target."""


@dataclass(frozen=True)
class RappPa:
    """Solid-state amplifier parameters: smoothness p, input saturation V, gain G.

    p = math.inf selects the ideal soft limiter.
    """

    p: float
    v_sat: float
    gain: float = 1.0

    def __post_init__(self):
        if not self.p > 0:
            raise ValueError(f"smoothness p must be positive, got {self.p}")
        if not self.v_sat > 0:
            raise ValueError(f"saturation amplitude must be positive, got {self.v_sat}")
        if not self.gain > 0:
            raise ValueError(f"gain must be positive, got {self.gain}")

    def ibo(self, mean_power: float) -> float:
        """Input back-off V^2 / sigma^2 (linear)."""
        return self.v_sat**2 / mean_power

    def ibo_db(self, mean_power: float) -> float:
        return 10.0 * np.log10(self.ibo(mean_power))

    def amplify(self, y: np.ndarray) -> np.ndarray:
        if math.isinf(self.p):
            return self.gain * soft_limit(self.v_sat, y)
        return rapp_amplify(self, y)


def v_sat_for_ibo(ibo_db: float, mean_power: float) -> float:
    """Clipping amplitude that realizes a given input back-off in dB."""
    return float(np.sqrt(mean_power * 10.0 ** (ibo_db / 10.0)))


def rapp_amplify(pa: RappPa, y: np.ndarray) -> np.ndarray:
    """Apply the Rapp AM-AM characteristic elementwise (phase preserved).

    Evaluated in the log domain so that large p or large |y|/V cannot
    overflow the |y|^{2p} term.
    """
    y = np.asarray(y, dtype=complex)
    r = np.abs(y) / pa.v_sat
    with np.errstate(divide="ignore"):
        t = 2.0 * pa.p * np.log(r, out=np.full(r.shape, -np.inf), where=r > 0)
    # (1 + r^{2p})^{1/(2p)} = exp(logaddexp(0, 2p*log r) / (2p))
    denom = np.exp(np.logaddexp(0.0, t) / (2.0 * pa.p))
    return pa.gain * y / denom


def soft_limit(v_sat: float, y: np.ndarray) -> np.ndarray:
    """Clip amplitudes above v_sat, preserving phase."""
    y = np.asarray(y, dtype=complex)
    r = np.abs(y)
    scale = np.where(r > v_sat, v_sat / np.where(r > 0, r, 1.0), 1.0)
    return y * scale


@dataclass
class BussgangSplit:
    """Decomposition y_out = lambda*y + s with s uncorrelated with y."""

    lam: complex
    correlated: np.ndarray
    distortion: np.ndarray
    mean_power: float


def bussgang_lambda(y: np.ndarray, y_out: np.ndarray) -> complex:
    """Ensemble correlation coefficient sum(y_out * conj(y)) / sum(|y|^2)."""
    y = np.asarray(y)
    y_out = np.asarray(y_out)
    if y.shape != y_out.shape:
        raise ValueError(f"ensemble shapes differ: {y.shape} vs {y_out.shape}")
    denom = np.sum(np.abs(y) ** 2)
    if denom == 0:
        raise NumericalError("correlation coefficient undefined for all-zero input")
    return complex(np.sum(y_out * np.conj(y)) / denom)


def bussgang_split(y: np.ndarray, y_out: np.ndarray) -> BussgangSplit:
    """Split an output ensemble into correlated and distortion parts."""
    lam = bussgang_lambda(y, y_out)
    correlated = lam * np.asarray(y)
    distortion = np.asarray(y_out) - correlated
    return BussgangSplit(lam, correlated, distortion, float(np.mean(np.abs(y) ** 2)))


_XI_MAX = 6.4  # exp(-xi^2) < 1e-17 beyond this point


def lambda_analytic(p: float, ibo_db: float, abs_tol: float = 1e-10) -> float:
    """Correlation coefficient of a Rapp PA driven by complex Gaussian input.

    Numerically integrates
        lambda = int_0^inf 2 xi^3 (1 + (xi^2/IBO)^p)^{-1/(2p)} exp(-xi^2) dxi
    with IBO in linear scale.
    """
    if not p > 0:
        raise ValueError(f"smoothness p must be positive, got {p}")
    ibo = 10.0 ** (ibo_db / 10.0)

    def integrand(xi):
        if xi == 0.0:
            return 0.0
        t = p * math.log(xi * xi / ibo)
        attenuation = math.exp(-np.logaddexp(0.0, t) / (2.0 * p))
        return 2.0 * xi**3 * attenuation * math.exp(-xi * xi)

    value, err = quad(integrand, 0.0, _XI_MAX, epsabs=abs_tol, limit=200)
    if err > 100 * abs_tol:
        raise NumericalError(f"lambda quadrature residual {err:.2e} exceeds tolerance")
    return float(value)


def sdr_db(lam: complex, data_power_sum: float, distortion_mean_power: float,
           n_fft: int) -> float:
    """Signal-to-distortion ratio |lambda|^2 * sum E|d|^2 / (N * E|s|^2), in dB.

    Signal power counts only data subcarriers; distortion power is wideband.
    Returns +inf when the distortion power is zero.
    """
    if distortion_mean_power < 0:
        raise ValueError("distortion power must be nonnegative")
    if distortion_mean_power == 0:
        return float("inf")
    ratio = abs(lam) ** 2 * data_power_sum / (n_fft * distortion_mean_power)
    return float(10.0 * np.log10(ratio))
