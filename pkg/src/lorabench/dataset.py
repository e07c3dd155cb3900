"""Symbol-file IO, synthetic dataset generation, corpus ingestion, and splits.

A symbol file is a headerless binary array of little-endian IEEE-754
single-precision floats, two per complex sample (real then imaginary).
Files are named `<symbol_index>_<truth>_<packet_id>_<sf>` and live under
`<root>/sf<SF>/<packet_id>/`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .phy import ChirpParams, VALID_SFS, modulate_symbol


class DatasetFormatError(ValueError):
    """Raised for malformed symbol-file bytes or an inconsistent directory tree."""


class FilenameError(ValueError):
    """Raised when a filename does not match `<int>_<int>_<int>_<int>`."""


_FILENAME_RE = re.compile(r"^(\d+)_(\d+)_(\d+)_(\d+)$")

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = 0xFFFFFFFFFFFFFFFF


def _validate_fields(symbol_index: int, truth: int, packet_id: int, sf: int) -> None:
    if sf not in VALID_SFS:
        raise ValueError(f"sf must be one of {VALID_SFS}, got {sf}")
    if not 0 <= truth < 2**sf:
        raise ValueError(f"truth {truth} out of range [0, {2**sf}) for sf={sf}")
    if symbol_index < 0 or packet_id < 0:
        raise ValueError("symbol_index and packet_id must be non-negative")


@dataclass
class SymbolRecord:
    """One dataset entry; iq is None until the file contents are loaded."""

    symbol_index: int
    truth: int
    packet_id: int
    sf: int
    iq: np.ndarray | None = None
    path: str | None = None

    def __post_init__(self) -> None:
        _validate_fields(self.symbol_index, self.truth, self.packet_id, self.sf)

    @property
    def filename(self) -> str:
        return format_filename(self.symbol_index, self.truth, self.packet_id, self.sf)


@dataclass
class DatasetManifest:
    """Per-SF folder paths and record counts for one dataset root."""

    root: str
    folders: dict[int, str] = field(default_factory=dict)
    counts: dict[int, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def summary_lines(self) -> list[str]:
        return [f"{self.folders[sf]},{sf},{self.counts[sf]}" for sf in sorted(self.counts)]


def encode_symbol_file(iq: np.ndarray) -> bytes:
    """Serialize a complex buffer as interleaved little-endian float32 pairs."""
    iq = np.asarray(iq)
    if iq.size == 0:
        raise DatasetFormatError("cannot encode an empty buffer")
    if not np.all(np.isfinite(iq)):
        raise DatasetFormatError("buffer contains non-finite samples")
    out = np.empty(2 * iq.size, dtype="<f4")
    out[0::2] = iq.real
    out[1::2] = iq.imag
    return out.tobytes()


def decode_symbol_file(data: bytes) -> np.ndarray:
    """Inverse of encode_symbol_file; returns a complex64 buffer."""
    if len(data) == 0:
        raise DatasetFormatError("empty symbol file")
    if len(data) % 8 != 0:
        raise DatasetFormatError(f"byte length {len(data)} not divisible by 8")
    floats = np.frombuffer(data, dtype="<f4")
    if not np.all(np.isfinite(floats)):
        raise DatasetFormatError("symbol file contains non-finite values")
    return (floats[0::2] + 1j * floats[1::2]).astype(np.complex64)


def parse_filename(name: str) -> tuple[int, int, int, int]:
    """Parse `<symbol_index>_<truth>_<packet_id>_<sf>` and validate the ranges."""
    m = _FILENAME_RE.match(name)
    if m is None:
        raise FilenameError(f"filename {name!r} does not match <int>_<int>_<int>_<int>")
    symbol_index, truth, packet_id, sf = (int(g) for g in m.groups())
    _validate_fields(symbol_index, truth, packet_id, sf)
    return symbol_index, truth, packet_id, sf


def format_filename(symbol_index: int, truth: int, packet_id: int, sf: int) -> str:
    _validate_fields(symbol_index, truth, packet_id, sf)
    return f"{symbol_index}_{truth}_{packet_id}_{sf}"


def load_record(record: SymbolRecord) -> SymbolRecord:
    """Fill record.iq from record.path; returns the same record."""
    if record.path is None:
        raise ValueError("record has no path to load from")
    try:
        data = Path(record.path).read_bytes()
    except OSError as e:
        raise OSError(f"failed reading {record.path}: {e}") from e
    record.iq = decode_symbol_file(data)
    return record


def generate_dataset(params: ChirpParams, out_dir: str | Path, n_packets: int = 100,
                     symbols_per_packet: int = 60, seed: int = 0) -> DatasetManifest:
    """Write a synthetic clean-symbol tree for one SF; deterministic under seed.

    Every packet gets a subfolder of uniformly drawn symbol values; each
    symbol is written as a clean modulated chirp in the binary file format.
    """
    if n_packets < 1 or symbols_per_packet < 1:
        raise ValueError("n_packets and symbols_per_packet must be >= 1")
    root = Path(out_dir)
    sf_dir = root / f"sf{params.sf}"
    for pid in range(n_packets):
        pkt_dir = sf_dir / str(pid)
        try:
            pkt_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise OSError(f"failed creating {pkt_dir}: {e}") from e
        rng = np.random.default_rng((seed, params.sf, pid))
        values = rng.integers(0, params.n_chips, size=symbols_per_packet)
        for i, v in enumerate(values):
            path = pkt_dir / format_filename(i, int(v), pid, params.sf)
            try:
                path.write_bytes(encode_symbol_file(modulate_symbol(params, int(v))))
            except OSError as e:
                raise OSError(f"failed writing {path}: {e}") from e
    return DatasetManifest(
        root=str(root),
        folders={params.sf: str(sf_dir)},
        counts={params.sf: n_packets * symbols_per_packet},
    )


def scan_dataset(root: str | Path, sf: int | None = None,
                 load_iq: bool = False) -> list[SymbolRecord]:
    """Collect records from `<root>/sf<SF>/...` trees, sorted deterministically.

    Packet subfolder naming is discovered from the files themselves: any file
    anywhere under an sf folder whose basename parses as a symbol filename is
    ingested; other files are ignored.  A parsed sf that contradicts its
    folder raises, since that would silently corrupt per-SF statistics.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset root {root} is not a directory")
    records: list[SymbolRecord] = []
    for sf_dir in sorted(root.glob("sf*")):
        if not sf_dir.is_dir():
            continue
        m = re.fullmatch(r"sf(\d+)", sf_dir.name)
        if m is None:
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
                    f"{path} declares sf={file_sf} inside folder {sf_dir.name}")
            records.append(SymbolRecord(idx, truth, pid, file_sf, path=str(path)))
    records.sort(key=lambda r: (r.sf, r.packet_id, r.symbol_index))
    if load_iq:
        for r in records:
            load_record(r)
    return records


def build_manifest(root: str | Path) -> DatasetManifest:
    root = Path(root)
    records = scan_dataset(root)
    counts: dict[int, int] = {}
    for r in records:
        counts[r.sf] = counts.get(r.sf, 0) + 1
    folders = {sf: str(root / f"sf{sf}") for sf in counts}
    return DatasetManifest(root=str(root), folders=folders, counts=counts)


def write_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    Path(path).write_text("\n".join(manifest.summary_lines()) + "\n")


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a; the cross-language split hash."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _U64
    return h


def split_key(packet_id: int, symbol_index: int, seed: int) -> int:
    # seed leads the string: FNV-1a mixes early bytes through every later
    # round, while trailing-byte changes reach only the low ~48 bits
    return fnv1a64(f"{seed}:{packet_id}:{symbol_index}".encode())


def split_dataset(records: list[SymbolRecord], train_fraction: float = 0.8,
                  seed: int = 0) -> tuple[list[SymbolRecord], list[SymbolRecord]]:
    """Deterministic hash-ordered partition into (train, test).

    Records are ordered by (split_key, packet_id, symbol_index) and the first
    round(train_fraction * n) go to train, so any language with the same
    64-bit FNV-1a produces the same partition.
    """
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
