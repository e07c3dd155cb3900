"""Channel impairments: calibrated AWGN, carrier frequency offset, timing delay.

SNR here is referenced to the full sampled band fs: the complex noise
variance is set against the mean signal power with no in-band filtering.
In-band SNR over bw is higher by 10*log10(osf) (about +9 dB for osf=8).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .phy import ChirpParams

Seed = int | tuple[int, ...]


@dataclass(frozen=True)
class ChannelConfig:
    """One impairment setting: SNR, CFO, integer delay, and the RNG seed."""

    snr_db: float
    cfo_hz: float = 0.0
    delay_samples: int = 0
    seed: Seed = 0

    def __post_init__(self) -> None:
        if math.isnan(self.snr_db):
            raise ValueError("snr_db must not be NaN")
        if self.delay_samples < 0:
            raise ValueError("delay_samples must be non-negative")


def signal_power(buf: np.ndarray) -> float:
    """Mean of |s|^2 over all samples."""
    buf = np.asarray(buf)
    if buf.size == 0:
        raise ValueError("empty buffer")
    return float(np.mean(np.abs(buf) ** 2))


def add_awgn(buf: np.ndarray, snr_db: float, seed: Seed = 0) -> np.ndarray:
    """Add circularly-symmetric complex Gaussian noise at the requested SNR.

    Per-sample noise variance is signal_power(buf) / 10^(snr_db/10), split
    evenly between the real and imaginary components.  snr_db = +inf is the
    no-noise sentinel.  The realization is fully determined by the seed.
    """
    buf = np.asarray(buf, dtype=np.complex128)
    if buf.size == 0:
        raise ValueError("empty buffer")
    if math.isinf(snr_db) and snr_db > 0:
        return buf.copy()
    sigma2 = signal_power(buf) / 10.0 ** (snr_db / 10.0)
    rng = np.random.default_rng(seed)
    scale = math.sqrt(sigma2 / 2.0)
    noise = scale * (rng.standard_normal(buf.size) + 1j * rng.standard_normal(buf.size))
    return buf + noise


def apply_cfo(buf: np.ndarray, cfo_hz: float, params: ChirpParams) -> np.ndarray:
    """Rotate sample i by exp(j*2*pi*cfo_hz*i/fs)."""
    if abs(cfo_hz) >= params.fs / 2:
        raise ValueError(f"cfo {cfo_hz} Hz aliases at fs={params.fs}")
    buf = np.asarray(buf, dtype=np.complex128)
    if cfo_hz == 0.0:
        return buf.copy()
    i = np.arange(buf.size, dtype=np.float64)
    return buf * np.exp(2j * np.pi * cfo_hz * i / params.fs)


def apply_delay(buf: np.ndarray, delay_samples: int) -> np.ndarray:
    """Prepend zero samples; they become noise-floor samples once AWGN is added."""
    if delay_samples < 0:
        raise ValueError("delay must be non-negative")
    buf = np.asarray(buf, dtype=np.complex128)
    if delay_samples == 0:
        return buf.copy()
    return np.concatenate([np.zeros(delay_samples, dtype=np.complex128), buf])


def measure_snr(noisy: np.ndarray, clean: np.ndarray) -> float:
    """Empirical SNR in dB: 10*log10(power(clean) / power(noisy - clean))."""
    noisy = np.asarray(noisy)
    clean = np.asarray(clean)
    if noisy.shape != clean.shape:
        raise ValueError(f"length mismatch: {noisy.shape} vs {clean.shape}")
    noise_power = signal_power(noisy - clean) if noisy.size else 0.0
    if noise_power == 0.0:
        return math.inf
    return 10.0 * math.log10(signal_power(clean) / noise_power)


def apply_channel(buf: np.ndarray, config: ChannelConfig, params: ChirpParams) -> np.ndarray:
    """Delay, then CFO, then AWGN, per one ChannelConfig."""
    out = apply_delay(buf, config.delay_samples)
    out = apply_cfo(out, config.cfo_hz, params)
    return add_awgn(out, config.snr_db, config.seed)
