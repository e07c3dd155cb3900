"""Command line entry points: train, evaluate."""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields

from .evaluate import EvalConfig, emit_csv, evaluate, render_csv
from .train import TrainConfig, train

# one source of truth for defaults: the config dataclasses
_TD = {f.name: f.default for f in fields(TrainConfig)}
_ED = {f.name: f.default for f in fields(EvalConfig)}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neloradec",
        description="Neural chirp symbol decoder: train and evaluate per-SF models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a denoise+classify model for one SF")
    t.add_argument("--sf", type=int, required=True)
    t.add_argument("--dataset", required=True, help="symbol dataset root")
    t.add_argument("--checkpoint", required=True, help="output checkpoint path")
    t.add_argument("--epochs", type=int, default=_TD["epochs"])
    t.add_argument("--batch-size", type=int, default=_TD["batch_size"])
    t.add_argument("--lr", type=float, default=_TD["lr"])
    t.add_argument("--loss-weight", type=float, default=_TD["loss_weight"],
                   help="classification weight against the denoising MSE")
    t.add_argument("--snr-low", type=float, default=_TD["snr_low"])
    t.add_argument("--snr-high", type=float, default=_TD["snr_high"])
    t.add_argument("--seed", type=int, default=_TD["seed"])
    t.add_argument("--train-fraction", type=float, default=_TD["train_fraction"])
    t.add_argument("--base-channels", type=int, default=_TD["base_channels"])

    e = sub.add_parser("evaluate", help="SER sweep of a checkpoint into shared CSV")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--dataset", required=True)
    e.add_argument("--snr-min", type=float, default=-25.0)
    e.add_argument("--snr-max", type=float, default=0.0)
    e.add_argument("--snr-step", type=float, default=1.0)
    e.add_argument("--trials", type=int, default=_ED["trials"])
    e.add_argument("--seed", type=int, default=_ED["master_seed"],
                   help="master seed; must match the baseline sweep for pairing")
    e.add_argument("--train-fraction", type=float, default=_ED["train_fraction"])
    e.add_argument("--decoder", default=_ED["decoder"], help="decoder id in the CSV")
    e.add_argument("--out", default=None, help="CSV path (default: stdout)")
    return parser


def _snr_grid(lo: float, hi: float, step: float) -> list[float]:
    if step <= 0:
        raise ValueError("--snr-step must be positive")
    count = int((hi - lo) / step + 1e-9) + 1
    return [lo + k * step for k in range(count)]


def _cmd_train(args: argparse.Namespace) -> int:
    cfg = TrainConfig(
        sf=args.sf,
        dataset=args.dataset,
        checkpoint=args.checkpoint,
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        loss_weight=args.loss_weight,
        snr_low=args.snr_low,
        snr_high=args.snr_high,
        seed=args.seed,
        train_fraction=args.train_fraction,
        base_channels=args.base_channels,
    )
    def report(epoch: int, loss: float, acc: float) -> None:
        print(f"epoch {epoch + 1}/{cfg.epochs} loss {loss:.4f} acc {acc:.3f}",
              file=sys.stderr)

    path = train(cfg, progress=report)
    print(f"wrote {path}", file=sys.stderr)
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = EvalConfig(
        checkpoint=args.checkpoint,
        dataset=args.dataset,
        snr_grid=_snr_grid(args.snr_min, args.snr_max, args.snr_step),
        trials=args.trials,
        master_seed=args.seed,
        train_fraction=args.train_fraction,
        decoder=args.decoder,
    )
    result = evaluate(cfg)
    if args.out is None:
        sys.stdout.write(render_csv(result))
    else:
        emit_csv(result, args.out)
        print(f"wrote {args.out}", file=sys.stderr)
    return 0


_COMMANDS = {"train": _cmd_train, "evaluate": _cmd_evaluate}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
