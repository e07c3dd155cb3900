"""Command line entry points: generate, decode, sweep, gain, plot."""

from __future__ import annotations

import argparse
import sys

from . import bench
from .dataset import decode_symbol_file, generate_dataset
from .phy import ChirpParams
from .receiver import decode_packet


def _add_radio_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bw", type=int, default=125_000, help="chirp bandwidth in Hz")
    p.add_argument("--fs", type=int, default=1_000_000, help="sampling rate in Hz")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lorabench",
        description="Chirp-spread-spectrum PHY toolkit: datasets, decoding, SER benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic clean-symbol dataset")
    g.add_argument("--sf", type=int, nargs="+", default=[7], help="spreading factors")
    g.add_argument("--packets", type=int, default=100, help="packets per SF")
    g.add_argument("--symbols-per-packet", type=int, default=60)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="dataset root directory")
    _add_radio_args(g)

    d = sub.add_parser("decode", help="decode one packet from a raw IQ stream file")
    d.add_argument("iqfile", help="interleaved float32 I/Q file")
    d.add_argument("--sf", type=int, required=True)
    d.add_argument("--max-symbols", type=int, default=None)
    _add_radio_args(d)

    s = sub.add_parser("sweep", help="Monte-Carlo SER curves over an SNR grid")
    s.add_argument("--sf", type=int, nargs="+", default=[7, 8, 9, 10])
    s.add_argument("--snr-min", type=float, default=-40.0)
    s.add_argument("--snr-max", type=float, default=15.0)
    s.add_argument("--snr-step", type=float, default=1.0)
    s.add_argument("--trials", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=1234)
    s.add_argument("--dataset", default=None,
                   help="draw clean symbols from this dataset's test split "
                        "instead of synthesizing them")
    s.add_argument("--decoder", default="dechirp")
    s.add_argument("--out", default=None, help="CSV path (default: stdout)")
    _add_radio_args(s)

    gn = sub.add_parser("gain", help="SNR thresholds and gain at a target SER")
    gn.add_argument("csvs", nargs="+", help="CSV files in the shared schema")
    gn.add_argument("--baseline", default="dechirp")
    gn.add_argument("--candidate", default=None,
                    help="decoder to compare against the baseline "
                         "(default: the only other decoder present)")
    gn.add_argument("--target", type=float, default=0.10)
    gn.add_argument("--sf", type=int, nargs="+", default=None)

    pl = sub.add_parser("plot", help="render SER curves from CSV files")
    pl.add_argument("csvs", nargs="+")
    pl.add_argument("--out", required=True, help="image path (.png, .pdf, ...)")
    return parser


def _snr_grid(lo: float, hi: float, step: float) -> list[float]:
    if step <= 0:
        raise ValueError("--snr-step must be positive")
    count = int((hi - lo) / step + 1e-9) + 1
    return [lo + k * step for k in range(count)]


def _cmd_generate(args: argparse.Namespace) -> int:
    for sf in args.sf:
        params = ChirpParams(sf=sf, bw=args.bw, fs=args.fs)
        manifest = generate_dataset(params, args.out, n_packets=args.packets,
                                    symbols_per_packet=args.symbols_per_packet,
                                    seed=args.seed)
        for line in manifest.summary_lines():
            print(line)
    return 0


def _cmd_decode(args: argparse.Namespace) -> int:
    params = ChirpParams(sf=args.sf, bw=args.bw, fs=args.fs)
    with open(args.iqfile, "rb") as f:
        stream = decode_symbol_file(f.read())
    result = decode_packet(stream.astype(complex), params, max_symbols=args.max_symbols)
    if not result.found:
        print("no packet detected", file=sys.stderr)
        return 1
    assert result.sync is not None
    print(" ".join(str(v) for v in result.payload))
    print(f"cfo_hz={result.sync.cfo_hz:.3f} "
          f"timing_offset={result.sync.timing_offset_samples:.3f} "
          f"frame_start={result.sync.frame_start}", file=sys.stderr)
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = bench.SweepConfig(
        sfs=tuple(args.sf),
        snr_grid=_snr_grid(args.snr_min, args.snr_max, args.snr_step),
        trials=args.trials,
        decoder=args.decoder,
        master_seed=args.seed,
        dataset=args.dataset,
        bw=args.bw,
        fs=args.fs,
    )
    curves = bench.run_snr_sweep(config)
    if args.out is None:
        sys.stdout.write(bench.render_csv(curves))
    else:
        bench.emit_csv(curves, args.out)
        print(f"wrote {args.out}", file=sys.stderr)
    return 0


def _cmd_gain(args: argparse.Namespace) -> int:
    curves: list[bench.SerCurve] = []
    for path in args.csvs:
        curves.extend(bench.load_csv(path))
    by_key = {(c.decoder, c.sf): c for c in curves}
    decoders = sorted({c.decoder for c in curves})
    if args.baseline not in decoders:
        print(f"baseline {args.baseline!r} not in {decoders}", file=sys.stderr)
        return 2
    candidate = args.candidate
    if candidate is None:
        others = [d for d in decoders if d != args.baseline]
        if len(others) > 1:
            print(f"several candidates {others}; pick one with --candidate",
                  file=sys.stderr)
            return 2
        candidate = others[0] if others else None

    sfs = args.sf or sorted({c.sf for c in curves if c.decoder == args.baseline})
    status = 0
    for sf in sfs:
        base = by_key.get((args.baseline, sf))
        if base is None:
            print(f"SF{sf}: no {args.baseline} curve", file=sys.stderr)
            status = 1
            continue
        try:
            thr_base = bench.snr_at_ser(base, args.target)
        except ValueError as e:
            print(f"SF{sf}: {e}", file=sys.stderr)
            status = 1
            continue
        if candidate is None:
            print(f"SF{sf} target={args.target:g}: {args.baseline} {thr_base:.3f} dB")
            continue
        cand = by_key.get((candidate, sf))
        if cand is None:
            print(f"SF{sf}: no {candidate} curve", file=sys.stderr)
            status = 1
            continue
        try:
            thr_cand = bench.snr_at_ser(cand, args.target)
        except ValueError as e:
            print(f"SF{sf}: {e}", file=sys.stderr)
            status = 1
            continue
        gain = thr_base - thr_cand
        print(f"SF{sf} target={args.target:g}: {args.baseline} {thr_base:.3f} dB, "
              f"{candidate} {thr_cand:.3f} dB, gain {gain:.3f} dB")
    return status


def _cmd_plot(args: argparse.Namespace) -> int:
    curves: list[bench.SerCurve] = []
    for path in args.csvs:
        curves.extend(bench.load_csv(path))
    bench.emit_plot(curves, args.out)
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "decode": _cmd_decode,
    "sweep": _cmd_sweep,
    "gain": _cmd_gain,
    "plot": _cmd_plot,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
