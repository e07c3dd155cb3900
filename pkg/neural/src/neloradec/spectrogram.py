"""Symbol waveforms -> 2-channel time-frequency tensors for the networks.

The full-rate symbol is first decimated to chip rate by averaging each
consecutive block of osf samples (boxcar low-pass), then short-time Fourier
transformed: Hann window of 2^(sf-2) chips, hop 2^(sf-5), zero padded to
2^sf frequency bins, frequencies fftshifted so bin 0 is the most negative.
That geometry yields exactly 25 frames at every supported sf, and one
frequency bin per symbol value, so a clean symbol appears as a wrapped
diagonal whose start frequency encodes the value.

Channel 0 carries the real part of the STFT, channel 1 the imaginary part.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dataio import Geometry, SymbolRecord
from .noise import noise_scale, sample_noise


@dataclass(frozen=True)
class SpectrogramConfig:
    sf: int
    window_len: int = 0  # 0 means the 2^(sf-2) default
    hop: int = 0         # 0 means the 2^(sf-5) default

    def __post_init__(self) -> None:
        n_chips = Geometry(self.sf).n_chips
        if self.window_len == 0:
            object.__setattr__(self, "window_len", n_chips // 4)
        if self.hop == 0:
            object.__setattr__(self, "hop", n_chips // 32)
        if not 0 < self.window_len <= n_chips:
            raise ValueError(f"window_len {self.window_len} not in (0, {n_chips}]")
        if self.hop < 1 or (n_chips - self.window_len) % self.hop != 0:
            raise ValueError(
                f"hop {self.hop} must tile {n_chips - self.window_len} chips exactly")

    @property
    def fft_bins(self) -> int:
        return Geometry(self.sf).n_chips

    @property
    def frames(self) -> int:
        return (self.fft_bins - self.window_len) // self.hop + 1


@lru_cache(maxsize=None)
def _hann(window_len: int) -> np.ndarray:
    w = np.hanning(window_len)
    w.flags.writeable = False
    return w


def decimate_to_chips(iq: np.ndarray, osf: int) -> np.ndarray:
    """Average consecutive osf-sample blocks down to chip rate."""
    if iq.ndim != 1 or iq.size == 0 or iq.size % osf != 0:
        raise ValueError(f"buffer of {iq.shape} does not tile into blocks of {osf}")
    return iq.reshape(-1, osf).mean(axis=1)


def make_spectrograms(iq_batch: np.ndarray, cfg: SpectrogramConfig,
                      geometry: Geometry | None = None) -> np.ndarray:
    """(B, symbol_len) full-rate symbols -> (B, 2, fft_bins, frames) float32."""
    geo = geometry if geometry is not None else Geometry(cfg.sf)
    iq_batch = np.asarray(iq_batch)
    if iq_batch.ndim != 2 or iq_batch.shape[1] < geo.symbol_len:
        raise ValueError(
            f"need (B, >={geo.symbol_len}) full-rate samples, got {iq_batch.shape}")
    chips = iq_batch[:, : geo.symbol_len].reshape(-1, geo.n_chips, geo.osf).mean(axis=2)
    windows = np.lib.stride_tricks.sliding_window_view(
        chips, cfg.window_len, axis=1)[:, :: cfg.hop, :]
    spectra = np.fft.fft(windows * _hann(cfg.window_len), n=cfg.fft_bins, axis=-1)
    spectra = np.fft.fftshift(spectra, axes=-1)
    # (B, frames, bins) -> (B, 2, bins, frames)
    out = np.stack([spectra.real, spectra.imag], axis=1).swapaxes(2, 3)
    return np.ascontiguousarray(out, dtype=np.float32)


def make_spectrogram(iq: np.ndarray, cfg: SpectrogramConfig,
                     geometry: Geometry | None = None) -> np.ndarray:
    """One full-rate symbol -> (2, fft_bins, frames) float32."""
    iq = np.asarray(iq)
    if iq.ndim != 1:
        raise ValueError(f"expected a 1-d sample buffer, got shape {iq.shape}")
    return make_spectrograms(iq[np.newaxis], cfg, geometry)[0]


def _rms_rows(x: np.ndarray) -> np.ndarray:
    rms = np.sqrt(np.mean(np.abs(x) ** 2, axis=1, keepdims=True))
    # all-zeros rows pass through unscaled instead of dividing by zero
    return np.where(rms > 0, rms, 1.0)


def augment(record: SymbolRecord, snr_db: float,
            seed: int | np.random.Generator,
            cfg: SpectrogramConfig | None = None) -> tuple[np.ndarray, np.ndarray, int]:
    """Clean record -> (noisy_spec, clean_spec, label) at the requested SNR.

    Noise is added at the full sample rate before decimation.  Both tensors
    are normalized by the noisy buffer's RMS so the network input has unit
    scale while the denoising target keeps the true clean/noisy ratio.
    """
    if record.iq is None:
        raise ValueError("record has no samples loaded")
    cfg = cfg if cfg is not None else SpectrogramConfig(record.sf)
    geo = Geometry(record.sf)
    iq = record.iq[: geo.symbol_len].astype(np.complex128)
    if iq.size < geo.symbol_len:
        raise ValueError(f"record holds {iq.size} < symbol_len {geo.symbol_len} samples")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    power = float(np.mean(np.abs(iq) ** 2))
    noisy = iq + sample_noise(rng, iq.size, noise_scale(power, snr_db))
    inv = 1.0 / _rms_rows(noisy[np.newaxis])[0, 0]
    return (make_spectrogram(noisy * inv, cfg, geo),
            make_spectrogram(iq * inv, cfg, geo),
            record.truth)


def batch_augment(clean: np.ndarray, powers: np.ndarray, snrs_db: np.ndarray,
                  rng: np.random.Generator, cfg: SpectrogramConfig,
                  geometry: Geometry | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized training-path variant of augment over (B, symbol_len) rows.

    Draws one (B, n) normal matrix per component, so its stream differs from
    per-record augment calls; training determinism only needs this batch
    recipe to be fixed.
    """
    geo = geometry if geometry is not None else Geometry(cfg.sf)
    b, n = clean.shape
    scales = np.array([noise_scale(float(p), float(s))
                       for p, s in zip(powers, snrs_db)])
    noise = rng.standard_normal((b, n)) + 1j * rng.standard_normal((b, n))
    noisy = clean + scales[:, np.newaxis] * noise
    inv = 1.0 / _rms_rows(noisy)
    return (make_spectrograms(noisy * inv, cfg, geo),
            make_spectrograms(clean * inv, cfg, geo))
