"""Paired SER evaluation of a trained checkpoint into the shared CSV schema.

Each (master_seed, sf, snr_db, trial) tuple seeds its own generator, which
draws the test-split record index and then the noise vector, in exactly the
order the dechirp benchmark uses.  A sweep of this module and a sweep of
the baseline with the same master seed therefore decode the same noisy
waveforms, making per-point SER differences paired comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .dataio import Geometry, SymbolRecord, load_record, scan_tree, split_records
from .noise import noise_scale, sample_noise, trial_rng
from .spectrogram import SpectrogramConfig, make_spectrograms, _rms_rows
from .train import load_checkpoint

CSV_HEADER = "decoder,sf,snr_db,trials,errors,ser"


@dataclass
class EvalConfig:
    checkpoint: str
    dataset: str
    snr_grid: list[float] = field(default_factory=lambda: [float(s) for s in range(-25, 1)])
    trials: int = 5000
    master_seed: int = 1234
    train_fraction: float = 0.8
    decoder: str = "nelora"
    batch_size: int = 512

    def __post_init__(self) -> None:
        if self.trials < 1 or self.batch_size < 1:
            raise ValueError("trials and batch_size must be >= 1")
        if not self.snr_grid:
            raise ValueError("snr grid is empty")
        if not all(b > a for a, b in zip(self.snr_grid, self.snr_grid[1:])):
            raise ValueError("snr grid must be strictly increasing")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")
        if not self.decoder or "," in self.decoder:
            raise ValueError(f"bad decoder id {self.decoder!r}")


@dataclass
class EvalPoint:
    snr_db: float
    trials: int
    errors: int

    @property
    def ser(self) -> float:
        return self.errors / self.trials


@dataclass
class EvalResult:
    decoder: str
    sf: int
    points: list[EvalPoint] = field(default_factory=list)


def _classify(model, specs: np.ndarray) -> np.ndarray:
    with torch.no_grad():
        _, logits = model(torch.from_numpy(specs))
    return logits.argmax(dim=1).numpy()


def classify_clean(model, records: list[SymbolRecord],
                   batch_size: int = 512) -> np.ndarray:
    """Predictions for clean records (each once, RMS-normalized), no noise."""
    geo = Geometry(model.sf)
    cfg = SpectrogramConfig(model.sf)
    preds = np.empty(len(records), dtype=np.int64)
    for start in range(0, len(records), batch_size):
        chunk = records[start: start + batch_size]
        rows = np.empty((len(chunk), geo.symbol_len), dtype=np.complex128)
        for k, rec in enumerate(chunk):
            if rec.iq is None:
                load_record(rec)
            rows[k] = rec.iq[: geo.symbol_len].astype(np.complex128)
        specs = make_spectrograms(rows / _rms_rows(rows), cfg, geo)
        preds[start: start + len(chunk)] = _classify(model, specs)
    return preds


def _test_split_arrays(cfg: EvalConfig, sf: int, train_ids) -> tuple:
    records = scan_tree(cfg.dataset, sf=sf)
    if not records:
        raise FileNotFoundError(f"no sf{sf} records under {cfg.dataset}")
    _, test = split_records(records, cfg.train_fraction, cfg.master_seed)
    overlap = {r.ident for r in test} & set(map(tuple, train_ids))
    if overlap:
        raise RuntimeError(
            f"{len(overlap)} evaluation records were part of training; "
            "master_seed/train_fraction must match the training config")
    geo = Geometry(sf)
    clean = np.empty((len(test), geo.symbol_len), dtype=np.complex128)
    truths = np.empty(len(test), dtype=np.int64)
    powers = np.empty(len(test))
    for k, rec in enumerate(test):
        load_record(rec)
        iq = rec.iq[: geo.symbol_len].astype(np.complex128)
        if iq.size < geo.symbol_len:
            raise ValueError(f"{rec.path} holds fewer than {geo.symbol_len} samples")
        clean[k] = iq
        truths[k] = rec.truth
        powers[k] = float(np.mean(np.abs(iq) ** 2))
        rec.iq = None
    return test, clean, truths, powers


def evaluate(cfg: EvalConfig) -> EvalResult:
    """SER at every grid point; deterministic in the config alone."""
    model, tcfg, _, train_ids = load_checkpoint(cfg.checkpoint)
    sf = tcfg["sf"]
    test, clean, truths, powers = _test_split_arrays(cfg, sf, train_ids)
    geo = Geometry(sf)
    spec_cfg = SpectrogramConfig(sf)
    n = geo.symbol_len
    result = EvalResult(decoder=cfg.decoder, sf=sf)
    for snr in cfg.snr_grid:
        errors = 0
        for start in range(0, cfg.trials, cfg.batch_size):
            m = min(cfg.batch_size, cfg.trials - start)
            noisy = np.empty((m, n), dtype=np.complex128)
            want = np.empty(m, dtype=np.int64)
            for t in range(m):
                rng = trial_rng(cfg.master_seed, sf, snr, start + t)
                i = int(rng.integers(0, len(test)))
                noisy[t] = clean[i] + sample_noise(rng, n, noise_scale(powers[i], snr))
                want[t] = truths[i]
            specs = make_spectrograms(noisy / _rms_rows(noisy), spec_cfg, geo)
            errors += int(np.sum(_classify(model, specs) != want))
        result.points.append(EvalPoint(float(snr), cfg.trials, errors))
    return result


def _fmt(x: float) -> str:
    return repr(float(x))


def render_csv(result: EvalResult, include_header: bool = True) -> str:
    """Rows in the shared schema, byte-stable for identical inputs."""
    lines = [CSV_HEADER] if include_header else []
    for p in sorted(result.points, key=lambda p: p.snr_db):
        lines.append(f"{result.decoder},{result.sf},{_fmt(p.snr_db)},{p.trials},"
                     f"{p.errors},{_fmt(p.ser)}")
    return "\n".join(lines) + "\n"


def emit_csv(result: EvalResult, path: str | Path, append: bool = False) -> None:
    path = Path(path)
    fresh = not (append and path.exists() and path.stat().st_size > 0)
    with open(path, "w" if fresh else "a") as f:
        f.write(render_csv(result, include_header=fresh))
