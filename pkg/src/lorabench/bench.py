"""SNR sweep harness: Monte-Carlo SER curves, threshold crossings, CSV, plots.

Per-trial noise is keyed by (master_seed, sf, snr_key, trial_index) where
snr_key = round(snr_db * 1000) mod 2^32, so any runner that evaluates the
same SNR value reproduces the exact same noise realizations regardless of
grid layout, chunking, or worker count.  External decoders are compared
through the CSV schema `decoder,sf,snr_db,trials,errors,ser` rather than
in-process calls.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import SymbolRecord, load_record, scan_dataset, split_dataset
from .phy import ChirpParams, VALID_SFS, modulate_symbol
from .receiver import demodulate_batch

CSV_HEADER = "decoder,sf,snr_db,trials,errors,ser"

# dechirp SNR at the SER=10% crossing, full-band convention, frozen from a
# calibration sweep on a 0.5 dB grid (1e5 trials/point at SF7-8, 4e4 at SF9-10)
GOLDEN_THRESHOLDS_DB = {7: -16.14, 8: -18.95, 9: -21.69, 10: -24.47}

DEFAULT_SNR_GRID = [float(s) for s in range(-40, 16)]


def default_snr_grid() -> list[float]:
    return list(DEFAULT_SNR_GRID)


@dataclass
class SweepConfig:
    """Inputs that fully determine a sweep's output."""

    sfs: tuple[int, ...] = (7, 8, 9, 10)
    snr_grid: list[float] = field(default_factory=default_snr_grid)
    trials: int = 10_000
    decoder: str = "dechirp"
    master_seed: int = 1234
    dataset: str | None = None
    train_fraction: float = 0.8
    bw: int = 125_000
    fs: int = 1_000_000

    def __post_init__(self) -> None:
        for sf in self.sfs:
            if sf not in VALID_SFS:
                raise ValueError(f"sf must be one of {VALID_SFS}, got {sf}")
        if self.trials < 100:
            raise ValueError(f"trials must be >= 100, got {self.trials}")
        if len(self.snr_grid) == 0:
            raise ValueError("snr grid is empty")
        diffs = np.diff(self.snr_grid)
        if len(diffs) and not np.all(diffs > 0):
            raise ValueError("snr grid must be strictly increasing")
        if self.decoder != "dechirp":
            raise ValueError(
                f"unknown decoder {self.decoder!r}; external decoders enter via CSV")


@dataclass
class SerPoint:
    snr_db: float
    trials: int
    errors: int

    @property
    def ser(self) -> float:
        return self.errors / self.trials


@dataclass
class SerCurve:
    decoder: str
    sf: int
    points: list[SerPoint] = field(default_factory=list)

    def sorted_points(self) -> list[SerPoint]:
        return sorted(self.points, key=lambda p: p.snr_db)


def snr_seed_key(snr_db: float) -> int:
    """Stable 32-bit key for an SNR value (millidecibel resolution)."""
    return round(snr_db * 1000.0) & 0xFFFFFFFF


def trial_rng(master_seed: int, sf: int, snr_db: float, trial: int) -> np.random.Generator:
    """The per-trial generator contract shared with external decoder runners."""
    return np.random.default_rng((master_seed, sf, snr_seed_key(snr_db), trial))


class _SymbolSource:
    """Clean symbols for one SF, either synthesized or from a test split."""

    def __init__(self, params: ChirpParams, config: SweepConfig):
        self.params = params
        self.records: list[SymbolRecord] | None = None
        if config.dataset is not None:
            records = scan_dataset(config.dataset, sf=params.sf)
            if not records:
                raise FileNotFoundError(
                    f"no sf{params.sf} records under {config.dataset}")
            _, test = split_dataset(records, config.train_fraction, config.master_seed)
            self.records = test
            self._cache: dict[int, tuple[np.ndarray, float]] = {}

    def draw(self, rng: np.random.Generator) -> tuple[np.ndarray, int, float]:
        """(clean_iq, truth, signal_power) using exactly one draw from rng."""
        if self.records is None:
            v = int(rng.integers(0, self.params.n_chips))
            return modulate_symbol(self.params, v), v, 1.0
        i = int(rng.integers(0, len(self.records)))
        hit = self._cache.get(i)
        if hit is None:
            rec = self.records[i]
            if rec.iq is None:
                load_record(rec)
            iq = rec.iq[: self.params.symbol_len]
            if iq.size < self.params.symbol_len:
                raise ValueError(f"{rec.path} holds fewer than symbol_len samples")
            iq = iq.astype(np.complex128)
            hit = (iq, float(np.mean(np.abs(iq) ** 2)))
            self._cache[i] = hit
        return hit[0], self.records[i].truth, hit[1]


def _point_errors(source: _SymbolSource, snr_db: float, trials: int,
                  master_seed: int, chunk: int = 1024) -> int:
    params = source.params
    n = params.symbol_len
    inv_snr = 10.0 ** (-snr_db / 10.0)
    errors = 0
    for start in range(0, trials, chunk):
        m = min(chunk, trials - start)
        noisy = np.empty((m, n), dtype=np.complex128)
        truths = np.empty(m, dtype=np.int64)
        for t in range(m):
            rng = trial_rng(master_seed, params.sf, snr_db, start + t)
            clean, truth, power = source.draw(rng)
            scale = np.sqrt(power * inv_snr / 2.0)
            noisy[t] = clean + scale * (rng.standard_normal(n)
                                        + 1j * rng.standard_normal(n))
            truths[t] = truth
        decided = demodulate_batch(noisy, params)
        errors += int(np.sum(decided != truths))
    return errors


def run_snr_sweep(config: SweepConfig) -> list[SerCurve]:
    """One SerCurve per configured SF; a pure function of the config."""
    curves = []
    for sf in config.sfs:
        params = ChirpParams(sf=sf, bw=config.bw, fs=config.fs)
        source = _SymbolSource(params, config)
        points = [
            SerPoint(snr, config.trials,
                     _point_errors(source, snr, config.trials, config.master_seed))
            for snr in config.snr_grid
        ]
        curves.append(SerCurve(decoder=config.decoder, sf=sf, points=points))
    return curves


def snr_at_ser(curve: SerCurve, target: float = 0.10) -> float:
    """SNR of the highest crossing of the target SER, linear in (dB, SER)."""
    pts = curve.sorted_points()
    if len(pts) < 2:
        raise ValueError("need at least two points to interpolate a threshold")
    for i in range(len(pts) - 2, -1, -1):
        lo, hi = pts[i], pts[i + 1]
        if min(lo.ser, hi.ser) <= target <= max(lo.ser, hi.ser):
            if lo.ser == hi.ser:
                return float(hi.snr_db)
            frac = (target - lo.ser) / (hi.ser - lo.ser)
            return float(lo.snr_db + frac * (hi.snr_db - lo.snr_db))
    raise ValueError(
        f"curve {curve.decoder}/sf{curve.sf} never brackets SER={target}")


def snr_gain(candidate: SerCurve, baseline: SerCurve, target: float = 0.10) -> float:
    """baseline threshold minus candidate threshold; positive favors the candidate."""
    return snr_at_ser(baseline, target) - snr_at_ser(candidate, target)


def _fmt(x: float) -> str:
    return repr(float(x))


def render_csv(curves: list[SerCurve], include_header: bool = True) -> str:
    """Curves in the shared schema as text; byte-stable for identical inputs."""
    lines = [CSV_HEADER] if include_header else []
    for curve in curves:
        for p in curve.sorted_points():
            lines.append(
                f"{curve.decoder},{curve.sf},{_fmt(p.snr_db)},{p.trials},"
                f"{p.errors},{_fmt(p.ser)}")
    return "\n".join(lines) + "\n"


def emit_csv(curves: list[SerCurve], path: str | Path, append: bool = False) -> None:
    """Write curves to a CSV file; append skips the header on non-empty files."""
    path = Path(path)
    fresh = not (append and path.exists() and path.stat().st_size > 0)
    with open(path, "w" if fresh else "a") as f:
        f.write(render_csv(curves, include_header=fresh))


def load_csv(path: str | Path) -> list[SerCurve]:
    """Parse the shared schema back into curves grouped by (decoder, sf)."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path} is empty") from None
        if header != CSV_HEADER.split(","):
            raise ValueError(f"{path} header {header!r} != {CSV_HEADER!r}")
        grouped: dict[tuple[str, int], SerCurve] = {}
        for row in reader:
            if not row:
                continue
            decoder, sf, snr_db, trials, errors, _ser = row
            key = (decoder, int(sf))
            curve = grouped.setdefault(key, SerCurve(decoder=decoder, sf=int(sf)))
            curve.points.append(SerPoint(float(snr_db), int(trials), int(errors)))
    for curve in grouped.values():
        curve.points.sort(key=lambda p: p.snr_db)
    return list(grouped.values())


def emit_plot(curves: list[SerCurve], path: str | Path) -> None:
    """Log-scale SER vs SNR, one series per (decoder, sf); dechirp dashed."""
    if not curves:
        raise ValueError("no curves to plot")
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for curve in curves:
        pts = curve.sorted_points()
        snr = np.array([p.snr_db for p in pts])
        ser = np.array([p.ser for p in pts], dtype=float)
        ser = np.where(ser > 0, ser, np.nan)  # zeros have no place on a log axis
        style = "--" if curve.decoder == "dechirp" else "-"
        ax.semilogy(snr, ser, style, marker=".", label=f"{curve.decoder} SF{curve.sf}")
    ax.axhline(0.1, color="gray", linewidth=0.8, linestyle=":")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("SER")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
