"""Joint training of the denoiser and classifier on one spreading factor.

Each epoch reshuffles the training split and draws a fresh SNR per example
uniformly from the configured range, adds matching full-band noise, and
optimizes MSE(denoised, clean) + loss_weight * cross_entropy(logits, truth)
with Adam under a cosine-annealed learning rate (peak lr decaying to zero
over the configured epochs).  Everything is seeded, so a config reproduces
its checkpoint exactly on CPU (accelerators are best-effort).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable

import numpy as np
import torch
import torch.nn.functional as F

from .dataio import Geometry, VALID_SFS, load_record, scan_tree, split_records
from .model import NeloraNet
from .spectrogram import SpectrogramConfig, batch_augment

CHECKPOINT_FORMAT = "neloradec-checkpoint-v1"


@dataclass
class TrainConfig:
    sf: int
    dataset: str
    checkpoint: str
    epochs: int = 72
    batch_size: int = 32
    lr: float = 3e-3
    loss_weight: float = 1.0
    snr_low: float = -30.0
    snr_high: float = 0.0
    seed: int = 1234
    train_fraction: float = 0.8
    base_channels: int = 12

    def __post_init__(self) -> None:
        if self.sf not in VALID_SFS:
            raise ValueError(f"sf must be one of {VALID_SFS}, got {self.sf}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.loss_weight <= 0:
            raise ValueError(f"loss_weight must be > 0, got {self.loss_weight}")
        if self.lr <= 0:
            raise ValueError(f"lr must be > 0, got {self.lr}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")
        clean = math.isinf(self.snr_low) and math.isinf(self.snr_high) \
            and self.snr_low > 0 and self.snr_high > 0
        bounded = -40.0 <= self.snr_low <= self.snr_high <= 15.0
        if not (clean or bounded):
            raise ValueError(
                f"snr range [{self.snr_low}, {self.snr_high}] must sit inside "
                "[-40, 15] dB (or be the +inf no-noise sentinel)")


def _load_split(cfg: TrainConfig):
    records = scan_tree(cfg.dataset, sf=cfg.sf)
    if not records:
        raise FileNotFoundError(f"no sf{cfg.sf} records under {cfg.dataset}")
    train, _ = split_records(records, cfg.train_fraction, cfg.seed)
    geo = Geometry(cfg.sf)
    clean = np.empty((len(train), geo.symbol_len), dtype=np.complex128)
    labels = np.empty(len(train), dtype=np.int64)
    for k, rec in enumerate(train):
        load_record(rec)
        if rec.iq.size < geo.symbol_len:
            raise ValueError(f"{rec.path} holds fewer than {geo.symbol_len} samples")
        clean[k] = rec.iq[: geo.symbol_len].astype(np.complex128)
        labels[k] = rec.truth
        rec.iq = None
    powers = np.mean(np.abs(clean) ** 2, axis=1)
    ids = [rec.ident for rec in train]
    return clean, powers, labels, ids


def _draw_snrs(rng: np.random.Generator, m: int, low: float, high: float) -> np.ndarray:
    if low == high:
        return np.full(m, low)
    return rng.uniform(low, high, size=m)


def train(cfg: TrainConfig,
          progress: Callable[[int, float, float], None] | None = None) -> Path:
    """Run the configured training job; returns the checkpoint path.

    progress, when given, is called as progress(epoch, mean_loss, accuracy)
    after every epoch.
    """
    torch.manual_seed(cfg.seed)
    clean, powers, labels, train_ids = _load_split(cfg)
    geo = Geometry(cfg.sf)
    spec_cfg = SpectrogramConfig(cfg.sf)
    model = NeloraNet(cfg.sf, cfg.base_channels)
    model.train()
    opt = torch.optim.Adam(model.parameters(), lr=cfg.lr)
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(opt, T_max=cfg.epochs)

    history: dict = {"step_loss": [], "epoch_loss": [], "epoch_acc": []}
    n = len(clean)
    for epoch in range(cfg.epochs):
        rng = np.random.default_rng((cfg.seed, epoch))
        order = rng.permutation(n)
        total_loss = 0.0
        correct = 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start: start + cfg.batch_size]
            snrs = _draw_snrs(rng, len(idx), cfg.snr_low, cfg.snr_high)
            noisy_spec, clean_spec = batch_augment(
                clean[idx], powers[idx], snrs, rng, spec_cfg, geo)
            x = torch.from_numpy(noisy_spec)
            target = torch.from_numpy(clean_spec)
            y = torch.from_numpy(labels[idx])
            denoised, logits = model(x)
            mse = F.mse_loss(denoised, target)
            ce = F.cross_entropy(logits, y)
            loss = mse + cfg.loss_weight * ce
            if not torch.isfinite(loss):
                raise RuntimeError(
                    f"training diverged at epoch {epoch} step {start // cfg.batch_size}: "
                    f"mse={mse.item():.6g} ce={ce.item():.6g}")
            opt.zero_grad()
            loss.backward()
            opt.step()
            history["step_loss"].append(float(loss.item()))
            total_loss += float(loss.item()) * len(idx)
            correct += int((logits.argmax(dim=1) == y).sum().item())
        sched.step()
        history["epoch_loss"].append(total_loss / n)
        history["epoch_acc"].append(correct / n)
        if progress is not None:
            progress(epoch, history["epoch_loss"][-1], history["epoch_acc"][-1])

    path = Path(cfg.checkpoint)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save({
        "format": CHECKPOINT_FORMAT,
        "config": asdict(cfg),
        "state_dict": model.state_dict(),
        "history": history,
        "train_ids": train_ids,
    }, path)
    return path


def load_checkpoint(path: str | Path):
    """-> (model in eval mode, config dict, history dict, train id list)."""
    payload = torch.load(path, weights_only=True)
    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{path} is not a {CHECKPOINT_FORMAT} checkpoint")
    cfg = payload["config"]
    model = NeloraNet(cfg["sf"], cfg["base_channels"])
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, cfg, payload["history"], payload["train_ids"]
