"""AWGN augmentation matching the benchmark harness's noise, draw for draw.

SNR is referenced to the full sampled bandwidth.  Paired evaluation against
the dechirp baseline relies on both sides drawing identical noise, so the
recipe here is a contract, not an implementation detail:

- per-trial generator: `default_rng((master_seed, sf, snr_seed_key(snr_db),
  trial))`
- within a trial, index draws come first, then the noise vector as one
  length-n `standard_normal` call for the real part followed by one for the
  imaginary part.
"""

from __future__ import annotations

import math

import numpy as np


def snr_seed_key(snr_db: float) -> int:
    """Stable 32-bit key for an SNR value (millidecibel resolution)."""
    return round(snr_db * 1000.0) & 0xFFFFFFFF


def trial_rng(master_seed: int, sf: int, snr_db: float, trial: int) -> np.random.Generator:
    return np.random.default_rng((master_seed, sf, snr_seed_key(snr_db), trial))


def noise_scale(signal_power: float, snr_db: float) -> float:
    """Per-component standard deviation hitting snr_db over the full band."""
    if signal_power < 0 or not math.isfinite(signal_power):
        raise ValueError(f"signal power must be finite and >= 0, got {signal_power}")
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    return math.sqrt(signal_power * 10.0 ** (-snr_db / 10.0) / 2.0)


def sample_noise(rng: np.random.Generator, n: int, scale: float) -> np.ndarray:
    # real part drawn before imaginary: the order other runners reproduce
    re = rng.standard_normal(n)
    im = rng.standard_normal(n)
    return scale * (re + 1j * im)


def add_awgn(iq: np.ndarray, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """iq plus white noise at snr_db relative to iq's own mean power."""
    power = float(np.mean(np.abs(iq) ** 2))
    return iq + sample_noise(rng, iq.size, noise_scale(power, snr_db))
