"""Software LoRa PHY: chirp modulation, AWGN channel, dechirp receiver, and benchmarks."""

from .phy import ChirpParams, PacketFrame, assemble_packet, base_downchirp, base_upchirp, modulate_symbol
from .channel import ChannelConfig, add_awgn, apply_cfo, apply_channel, apply_delay, measure_snr, signal_power
from .receiver import (
    DechirpSpectrum,
    DecodeResult,
    DetectorConfig,
    SyncEstimate,
    SyncError,
    compensate_cfo,
    dechirp_spectrum,
    decode_packet,
    demodulate,
    demodulate_batch,
    detect_preamble,
    estimate_offsets,
)

__version__ = "0.1.0"

__all__ = [
    "ChirpParams",
    "PacketFrame",
    "ChannelConfig",
    "DechirpSpectrum",
    "DecodeResult",
    "DetectorConfig",
    "SyncEstimate",
    "SyncError",
    "add_awgn",
    "apply_cfo",
    "apply_channel",
    "apply_delay",
    "assemble_packet",
    "base_downchirp",
    "base_upchirp",
    "compensate_cfo",
    "dechirp_spectrum",
    "decode_packet",
    "demodulate",
    "demodulate_batch",
    "detect_preamble",
    "estimate_offsets",
    "measure_snr",
    "modulate_symbol",
    "signal_power",
    "__version__",
]
