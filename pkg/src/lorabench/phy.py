"""LoRa chirp-spread-spectrum baseband waveform generation.

A symbol is an up-chirp sweeping -BW/2 to +BW/2 whose initial frequency
encodes one of 2^SF values.  A packet is 8 base up-chirps (preamble),
2.25 base down-chirps (SFD), then the modulated payload.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

VALID_SFS = (7, 8, 9, 10)

PREAMBLE_CHIRPS = 8
SFD_CHIRPS = 2.25


@dataclass(frozen=True)
class ChirpParams:
    """Spreading factor, bandwidth, and sample rate, with derived geometry."""

    sf: int
    bw: int = 125_000
    fs: int = 1_000_000

    def __post_init__(self) -> None:
        if self.sf not in VALID_SFS:
            raise ValueError(f"sf must be one of {VALID_SFS}, got {self.sf}")
        if self.bw <= 0 or self.fs <= 0:
            raise ValueError("bw and fs must be positive")
        if self.fs % self.bw != 0:
            raise ValueError(f"fs ({self.fs}) must be an integer multiple of bw ({self.bw})")

    @property
    def osf(self) -> int:
        """Oversampling factor fs/bw."""
        return self.fs // self.bw

    @property
    def n_chips(self) -> int:
        """Number of chips (and of symbol values), 2^sf."""
        return 1 << self.sf

    @property
    def symbol_len(self) -> int:
        """Samples per symbol, osf * 2^sf."""
        return self.osf * self.n_chips

    @property
    def bin_spacing(self) -> float:
        """Frequency distance between adjacent symbol values, bw / 2^sf, in Hz."""
        return self.bw / self.n_chips

    @property
    def symbol_time(self) -> float:
        """Symbol duration in seconds."""
        return self.n_chips / self.bw


@dataclass(frozen=True)
class PacketFrame:
    """A packet to be assembled: preamble + SFD layout constants plus a payload."""

    params: ChirpParams
    payload: tuple[int, ...]
    n_preamble: int = PREAMBLE_CHIRPS
    sfd_chirps: float = SFD_CHIRPS

    def __post_init__(self) -> None:
        object.__setattr__(self, "payload", tuple(int(v) for v in self.payload))
        for v in self.payload:
            if not 0 <= v < self.params.n_chips:
                raise ValueError(f"payload value {v} out of range [0, {self.params.n_chips})")

    @property
    def n_samples(self) -> int:
        """Total assembled length in samples."""
        n_sym = self.n_preamble + self.sfd_chirps + len(self.payload)
        return round(n_sym * self.params.symbol_len)


def header_len(params: ChirpParams) -> int:
    """Samples occupied by preamble + SFD (8 + 2.25 symbols)."""
    return round((PREAMBLE_CHIRPS + SFD_CHIRPS) * params.symbol_len)


@lru_cache(maxsize=16)
def _cached_chirps(params: ChirpParams) -> tuple[np.ndarray, np.ndarray]:
    """Read-only (up, down) base chirps for reuse in hot loops."""
    n = np.arange(params.symbol_len, dtype=np.float64)
    u = n / params.osf  # position in chips
    phase = np.pi * u * (u / params.n_chips - 1.0)
    up = np.exp(1j * phase)
    down = np.conj(up)
    up.flags.writeable = False
    down.flags.writeable = False
    return up, down


def base_upchirp(params: ChirpParams) -> np.ndarray:
    """Base up-chirp: frequency sweeps -BW/2 to +BW/2 linearly, phase 0 at sample 0."""
    return _cached_chirps(params)[0].copy()


def base_downchirp(params: ChirpParams) -> np.ndarray:
    """Base down-chirp, the elementwise conjugate of the base up-chirp."""
    return _cached_chirps(params)[1].copy()


def modulate_symbol(params: ChirpParams, value: int) -> np.ndarray:
    """Chirp for one symbol value.

    Implemented as a cyclic left-rotation of the base up-chirp by
    value*osf samples, which starts the sweep at
    f_s = -BW/2 + value * bin_spacing and wraps at +BW/2.
    """
    value = int(value)
    if not 0 <= value < params.n_chips:
        raise ValueError(f"symbol value {value} out of range [0, {params.n_chips})")
    up = _cached_chirps(params)[0]
    return np.roll(up, -value * params.osf)


def assemble_packet(frame: PacketFrame) -> np.ndarray:
    """Concatenate preamble, SFD, and modulated payload into one baseband buffer.

    Each chirp starts at phase 0; the quarter chirp of the SFD is the first
    quarter of a base down-chirp.
    """
    if not frame.payload:
        raise ValueError("packet payload must be non-empty")
    params = frame.params
    up, down = _cached_chirps(params)
    full_downs = int(frame.sfd_chirps)
    frac_samples = round((frame.sfd_chirps - full_downs) * params.symbol_len)
    parts = [up] * frame.n_preamble
    parts += [down] * full_downs
    if frac_samples:
        parts.append(down[:frac_samples])
    parts += [modulate_symbol(params, v) for v in frame.payload]
    return np.concatenate(parts)
