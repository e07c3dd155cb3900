"""Reading the shared symbol-capture format and deriving train/test splits.

This package is deliberately self-contained: it re-implements the dataset
contracts (binary layout, filename convention, split hash) rather than
importing the baseline toolkit, so the two decoders stay comparable across
a pure file/CSV boundary.  The contracts are:

- one file per symbol, headerless little-endian float32 interleaved as
  real, imag, real, imag, ...
- basename `<symbol_index>_<truth>_<packet_id>_<sf>` with no extension
- tree layout `<root>/sf<SF>/<packet_id>/<files>`
- train/test split ordered by 64-bit FNV-1a over `f"{seed}:{packet_id}:
  {symbol_index}"`, first round(train_fraction * n) records are train
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

VALID_SFS = (7, 8, 9, 10)

_FILENAME_RE = re.compile(r"^(\d+)_(\d+)_(\d+)_(\d+)$")

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = 0xFFFFFFFFFFFFFFFF


class DatasetFormatError(ValueError):
    """File bytes or tree structure violate the capture format."""


class FilenameError(ValueError):
    """Basename does not follow `<symbol_index>_<truth>_<packet_id>_<sf>`."""


@dataclass(frozen=True)
class Geometry:
    """Sample-rate bookkeeping for one spreading factor."""

    sf: int
    bw: int = 125_000
    fs: int = 1_000_000

    def __post_init__(self) -> None:
        if self.sf not in VALID_SFS:
            raise ValueError(f"sf must be one of {VALID_SFS}, got {self.sf}")
        if self.bw <= 0 or self.fs <= 0 or self.fs % self.bw != 0:
            raise ValueError(f"fs {self.fs} must be a positive multiple of bw {self.bw}")

    @property
    def osf(self) -> int:
        return self.fs // self.bw

    @property
    def n_chips(self) -> int:
        return 1 << self.sf

    @property
    def symbol_len(self) -> int:
        return self.osf * self.n_chips


@dataclass
class SymbolRecord:
    symbol_index: int
    truth: int
    packet_id: int
    sf: int
    path: Path | None = None
    iq: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.sf not in VALID_SFS:
            raise ValueError(f"sf must be one of {VALID_SFS}, got {self.sf}")
        if not 0 <= self.truth < (1 << self.sf):
            raise ValueError(f"truth {self.truth} out of range for sf {self.sf}")
        if self.symbol_index < 0 or self.packet_id < 0:
            raise ValueError("symbol_index and packet_id must be non-negative")

    @property
    def ident(self) -> tuple[int, int]:
        return (self.packet_id, self.symbol_index)


def parse_filename(name: str) -> tuple[int, int, int, int]:
    """Basename -> (symbol_index, truth, packet_id, sf)."""
    m = _FILENAME_RE.match(name)
    if m is None:
        raise FilenameError(f"{name!r} is not a symbol filename")
    return tuple(int(g) for g in m.groups())


def decode_symbol_file(data: bytes) -> np.ndarray:
    """Interleaved little-endian float32 bytes -> complex64 samples."""
    if len(data) == 0:
        raise DatasetFormatError("empty symbol file")
    if len(data) % 8 != 0:
        raise DatasetFormatError(
            f"file length {len(data)} is not a whole number of complex samples")
    flat = np.frombuffer(data, dtype="<f4")
    if not np.all(np.isfinite(flat)):
        raise DatasetFormatError("symbol file holds non-finite samples")
    return (flat[0::2] + 1j * flat[1::2]).astype(np.complex64)


def load_record(record: SymbolRecord) -> SymbolRecord:
    if record.path is None:
        raise ValueError("record has no backing file")
    record.iq = decode_symbol_file(Path(record.path).read_bytes())
    return record


def scan_tree(root: str | Path, sf: int | None = None,
              load_iq: bool = False) -> list[SymbolRecord]:
    """Collect records under `<root>/sf<SF>/...`, deterministically ordered.

    Files whose basenames do not parse are ignored; a file whose embedded sf
    contradicts its folder raises, since mixing SFs corrupts every statistic
    downstream.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset root {root} is not a directory")
    records: list[SymbolRecord] = []
    for sf_dir in sorted(root.glob("sf*")):
        m = re.fullmatch(r"sf(\d+)", sf_dir.name)
        if m is None or not sf_dir.is_dir():
            continue
        folder_sf = int(m.group(1))
        if folder_sf not in VALID_SFS or (sf is not None and folder_sf != sf):
            continue
        for path in sorted(sf_dir.rglob("*")):
            if not path.is_file():
                continue
            try:
                idx, truth, pid, file_sf = parse_filename(path.name)
            except FilenameError:
                continue
            if file_sf != folder_sf:
                raise DatasetFormatError(
                    f"{path} claims sf {file_sf} inside folder {sf_dir.name}")
            rec = SymbolRecord(idx, truth, pid, file_sf, path=path)
            if load_iq:
                load_record(rec)
            records.append(rec)
    records.sort(key=lambda r: (r.sf, r.packet_id, r.symbol_index))
    return records


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a, the cross-implementation split hash."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _U64
    return h


def split_key(packet_id: int, symbol_index: int, seed: int) -> int:
    # seed leads the hashed string: FNV-1a mixes early bytes through every
    # later round, while trailing-byte changes only reach the low ~48 bits
    return fnv1a64(f"{seed}:{packet_id}:{symbol_index}".encode())


def split_records(records: list[SymbolRecord], train_fraction: float = 0.8,
                  seed: int = 0) -> tuple[list[SymbolRecord], list[SymbolRecord]]:
    """Hash-ordered (train, test) partition, identical in any implementation."""
    if not records:
        raise ValueError("cannot split an empty record list")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    order = sorted(
        records,
        key=lambda r: (split_key(r.packet_id, r.symbol_index, seed),
                       r.packet_id, r.symbol_index),
    )
    n_train = round(train_fraction * len(records))
    return order[:n_train], order[n_train:]
