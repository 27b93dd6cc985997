"""OFDM symbol synthesis and the unitary DFT conventions shared by all solvers.

Subcarriers are addressed on the centered index set {-N/2, ..., N/2-1};
a centered index m maps to the FFT array position m mod N.  Forward and
inverse transforms both carry a 1/sqrt(N) normalization so that energy is
preserved and the solver formulas can use a single Fourier convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ConfigurationError(ValueError):
    """Inconsistent system configuration or mismatched input shapes."""


def _square_qam(order: int) -> np.ndarray:
    m = int(np.sqrt(order))
    levels = np.arange(-(m - 1), m, 2, dtype=float)
    re, im = np.meshgrid(levels, levels)
    pts = (re + 1j * im).ravel()
    return pts / np.sqrt(np.mean(np.abs(pts) ** 2))


CONSTELLATIONS = {
    "qpsk": _square_qam(4),
    "qam16": _square_qam(16),
    "qam64": _square_qam(64),
}


def _is_pow2(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class SystemConfig:
    """OFDM numerology: FFT size, cyclic prefix and subcarrier allocation."""

    n_fft: int
    n_cp: int
    data_indices: tuple
    tr_indices: tuple
    constellation: str = "qpsk"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "data_indices", tuple(int(i) for i in self.data_indices))
        object.__setattr__(self, "tr_indices", tuple(int(i) for i in self.tr_indices))
        n = self.n_fft
        if not _is_pow2(n):
            raise ConfigurationError(f"n_fft must be a power of two, got {n}")
        if not 0 <= self.n_cp < n:
            raise ConfigurationError(f"n_cp must satisfy 0 <= n_cp < n_fft, got {self.n_cp}")
        lo, hi = -n // 2, n // 2 - 1
        occupied = self.data_indices + self.tr_indices
        for k in occupied:
            if not lo <= k <= hi:
                raise ConfigurationError(f"subcarrier index {k} outside [{lo}, {hi}]")
        if 0 in occupied:
            raise ConfigurationError("the 0-th subcarrier must not be modulated")
        if set(self.data_indices) & set(self.tr_indices):
            raise ConfigurationError("data and reserved subcarrier sets must be disjoint")
        if len(set(self.data_indices)) != len(self.data_indices):
            raise ConfigurationError("duplicate data subcarrier index")
        if len(set(self.tr_indices)) != len(self.tr_indices):
            raise ConfigurationError("duplicate reserved subcarrier index")
        if self.constellation not in CONSTELLATIONS:
            raise ConfigurationError(f"unknown constellation {self.constellation!r}")

    @property
    def n_data(self) -> int:
        return len(self.data_indices)

    @property
    def n_tr(self) -> int:
        return len(self.tr_indices)

    def data_bins(self) -> np.ndarray:
        """FFT array positions of the data subcarriers."""
        return np.asarray(self.data_indices) % self.n_fft

    def tr_bins(self) -> np.ndarray:
        """FFT array positions of the reserved subcarriers."""
        return np.asarray(self.tr_indices) % self.n_fft


@dataclass
class FreqSymbol:
    """One OFDM symbol in the frequency domain: data plus reserved tones."""

    d_dc: np.ndarray
    d_tr: np.ndarray

    def copy(self) -> "FreqSymbol":
        return FreqSymbol(self.d_dc.copy(), self.d_tr.copy())


@dataclass
class TimeFrame:
    """Time-domain OFDM symbol with cyclic prefix: n = -n_cp, ..., n_fft-1."""

    samples: np.ndarray
    n_cp: int

    @property
    def core(self) -> np.ndarray:
        """The n_fft samples n = 0, ..., n_fft-1 (cyclic prefix stripped)."""
        return self.samples[self.n_cp:]


def bin_index(m: int, n_fft: int) -> int:
    """FFT array position of centered subcarrier index m."""
    return int(m) % n_fft


def dft(x: np.ndarray) -> np.ndarray:
    """Unitary forward DFT, F(x)_m = (1/sqrt(N)) sum_n x_n e^{-i2pi nm/N}."""
    x = np.asarray(x)
    return np.fft.fft(x, axis=-1) / np.sqrt(x.shape[-1])


def dft_bin(x: np.ndarray, m: int) -> complex:
    """Single bin of the unitary DFT at centered index m."""
    return dft(x)[..., bin_index(m, np.asarray(x).shape[-1])]


def idft(spectrum: np.ndarray) -> np.ndarray:
    """Unitary inverse DFT; idft(dft(x)) == x."""
    spectrum = np.asarray(spectrum)
    return np.fft.ifft(spectrum, axis=-1) * np.sqrt(spectrum.shape[-1])


def _check_symbol(cfg: SystemConfig, sym: FreqSymbol) -> None:
    if len(sym.d_dc) != cfg.n_data or len(sym.d_tr) != cfg.n_tr:
        raise ConfigurationError(
            f"symbol lengths ({len(sym.d_dc)}, {len(sym.d_tr)}) do not match "
            f"config ({cfg.n_data}, {cfg.n_tr})"
        )


def _core_from_spectrum(cfg: SystemConfig, bins: np.ndarray, values: np.ndarray) -> np.ndarray:
    spectrum = np.zeros(cfg.n_fft, dtype=complex)
    spectrum[bins] = values
    return idft(spectrum)


def _with_cp(core: np.ndarray, n_cp: int) -> TimeFrame:
    if n_cp:
        samples = np.concatenate([core[-n_cp:], core])
    else:
        samples = core.copy()
    return TimeFrame(samples, n_cp)


def modulate(cfg: SystemConfig, sym: FreqSymbol) -> TimeFrame:
    """Synthesize the full time-domain symbol (data + reserved tones) with CP."""
    _check_symbol(cfg, sym)
    core = _core_from_spectrum(cfg, cfg.data_bins(), sym.d_dc)
    if cfg.n_tr:
        core = core + _core_from_spectrum(cfg, cfg.tr_bins(), sym.d_tr)
    return _with_cp(core, cfg.n_cp)


def data_waveform(cfg: SystemConfig, sym: FreqSymbol) -> TimeFrame:
    """Data-only part of the time-domain symbol (reserved tones nulled)."""
    _check_symbol(cfg, sym)
    return _with_cp(_core_from_spectrum(cfg, cfg.data_bins(), sym.d_dc), cfg.n_cp)


def tr_waveform(cfg: SystemConfig, sym: FreqSymbol) -> TimeFrame:
    """Reserved-tone part of the time-domain symbol."""
    _check_symbol(cfg, sym)
    if cfg.n_tr == 0:
        return _with_cp(np.zeros(cfg.n_fft, dtype=complex), cfg.n_cp)
    return _with_cp(_core_from_spectrum(cfg, cfg.tr_bins(), sym.d_tr), cfg.n_cp)


def symbol_rng(cfg: SystemConfig, symbol_index: int) -> np.random.Generator:
    """Independent, reproducible RNG stream for one OFDM symbol."""
    return np.random.default_rng([cfg.seed, symbol_index])


def random_frame(cfg: SystemConfig, rng: np.random.Generator) -> FreqSymbol:
    """Draw unit-average-power data symbols; reserved tones start at zero."""
    points = CONSTELLATIONS[cfg.constellation]
    d_dc = rng.choice(points, size=cfg.n_data)
    return FreqSymbol(d_dc, np.zeros(cfg.n_tr, dtype=complex))
