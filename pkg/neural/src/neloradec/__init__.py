"""Neural chirp-symbol decoder paired against the dechirp baseline via files."""

from .dataio import (
    DatasetFormatError,
    FilenameError,
    Geometry,
    SymbolRecord,
    VALID_SFS,
    decode_symbol_file,
    fnv1a64,
    load_record,
    parse_filename,
    scan_tree,
    split_key,
    split_records,
)
from .noise import add_awgn, noise_scale, sample_noise, snr_seed_key, trial_rng
from .spectrogram import (
    SpectrogramConfig,
    augment,
    batch_augment,
    decimate_to_chips,
    make_spectrogram,
    make_spectrograms,
)
from .model import Classifier, Denoiser, NeloraNet
from .train import CHECKPOINT_FORMAT, TrainConfig, load_checkpoint, train
from .evaluate import (
    CSV_HEADER,
    EvalConfig,
    EvalPoint,
    EvalResult,
    classify_clean,
    emit_csv,
    evaluate,
    render_csv,
)

__version__ = "0.1.0"

__all__ = [
    "CHECKPOINT_FORMAT",
    "CSV_HEADER",
    "Classifier",
    "DatasetFormatError",
    "Denoiser",
    "EvalConfig",
    "EvalPoint",
    "EvalResult",
    "FilenameError",
    "Geometry",
    "NeloraNet",
    "SpectrogramConfig",
    "SymbolRecord",
    "TrainConfig",
    "VALID_SFS",
    "add_awgn",
    "augment",
    "batch_augment",
    "classify_clean",
    "decimate_to_chips",
    "decode_symbol_file",
    "emit_csv",
    "evaluate",
    "fnv1a64",
    "load_checkpoint",
    "load_record",
    "make_spectrogram",
    "make_spectrograms",
    "noise_scale",
    "parse_filename",
    "render_csv",
    "sample_noise",
    "scan_tree",
    "snr_seed_key",
    "split_key",
    "split_records",
    "train",
    "trial_rng",
]
