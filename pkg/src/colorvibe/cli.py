"""Command-line entry point: ``colorvibe <subcommand> ...``.

The ``COLORVIBE_SEED`` environment variable is reserved; nothing in the
package is randomized, so it is currently ignored.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from colorvibe.bench import run_benchmark
from colorvibe.codec import (
    BlockLayout,
    DisplayParams,
    FramePair,
    decode_blocks,
    decode_report,
    embed_blocks,
    encode_png,
    make_testcard,
    read_png,
)
from colorvibe.colorspace import LabColor, SrgbColor, lab_to_srgb, srgb_to_lab
from colorvibe.errors import ColorVibeError, ConfigError, InputDomainError, OutOfGamutError
from colorvibe.feasibility import (
    SearchConfig,
    export_filename,
    export_matrix,
    feasibility_matrix,
    fmt6,
    plot_matrix,
    round6,
)
from colorvibe.search import BitPattern, Thresholds, VibrationGrid, batch_search, serial_search

SUBCOMMANDS = ("convert", "search", "matrix", "bench", "testcard", "embed", "decode")


def write_atomic(files: dict[Path, bytes]) -> None:
    """Write every file via temp-and-rename; on error nothing is left behind."""
    temps: list[tuple[str, Path]] = []
    umask = os.umask(0)
    os.umask(umask)
    try:
        for path, data in files.items():
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
            temps.append((tmp, path))
            with os.fdopen(fd, "wb") as f:
                f.write(data)
            os.chmod(tmp, 0o666 & ~umask)
        for tmp, path in temps:
            os.replace(tmp, path)
    except BaseException:
        for tmp, _ in temps:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise


def emit(data: bytes, out: str | None) -> None:
    if out is None:
        sys.stdout.write(data.decode())
    else:
        write_atomic({Path(out): data})


def _size(text: str) -> tuple[int, int]:
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from exc
    return w, h


def _typed(parser_fn):
    def parse(text: str):
        try:
            return parser_fn(text)
        except InputDomainError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc

    return parse


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON search config (defaults reproduce the standard sweep)")
    common.add_argument("--grid", type=_typed(VibrationGrid.parse), help="rmin:rmax:rstep,amin:amax:astep (degrees)")
    common.add_argument("--workers", type=int, help="thread cap for the batched search")
    common.add_argument("--out", help="output path (stdout if omitted)")

    thresholds = argparse.ArgumentParser(add_help=False)
    thresholds.add_argument("--vth", type=float, required=True)
    thresholds.add_argument("--rnovib", type=float, required=True)

    display = argparse.ArgumentParser(add_help=False)
    display.add_argument("--refresh-hz", type=float, default=60.0)

    p = argparse.ArgumentParser(prog="colorvibe", description="Imperceptible color-vibration search and embedding.")
    sub = p.add_subparsers(dest="command", required=True, metavar="{" + ",".join(SUBCOMMANDS) + "}")

    c = sub.add_parser("convert", help="sRGB <-> CIELAB")
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--rgb", type=_typed(SrgbColor.parse))
    g.add_argument("--lab", help="L,a,b")

    s = sub.add_parser("search", parents=[common, thresholds], help="list pairs for one color and pattern")
    s.add_argument("--rgb", type=_typed(SrgbColor.parse), required=True)
    s.add_argument("--pattern", type=_typed(BitPattern.parse), required=True)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--serial", action="store_true", help="use the serial loop instead of the batched search")

    m = sub.add_parser("matrix", parents=[common], help="feasibility matrix over the whole sweep")
    m.add_argument("--format", choices=("csv", "json"), default="csv")
    m.add_argument("--aggregated", action="store_true", help="one flag per (pattern, color)")
    m.add_argument("--plot", help="also render the aggregated matrix to this image path")

    b = sub.add_parser("bench", parents=[common], help="time serial vs batched search")
    b.add_argument("--repetitions", type=int, default=3)

    t = sub.add_parser("testcard", parents=[common, thresholds, display], help="single-block frame pair")
    t.add_argument("--rgb", type=_typed(SrgbColor.parse), required=True)
    t.add_argument("--pattern", type=_typed(BitPattern.parse), required=True)
    t.add_argument("--size", type=_size, default=(64, 64), help="WxH pixels")

    e = sub.add_parser("embed", parents=[common, thresholds, display], help="embed blocks into a PNG")
    e.add_argument("--base", required=True, help="base PNG")
    e.add_argument("--layout", required=True, help="block layout JSON")

    d = sub.add_parser("decode", parents=[thresholds], help="decode blocks from a frame pair")
    d.add_argument("--frame-a", required=True)
    d.add_argument("--frame-b", required=True)
    d.add_argument("--layout", required=True)
    d.add_argument("--out")
    return p


def load_config(args: argparse.Namespace) -> SearchConfig:
    cfg = SearchConfig.load(args.config) if getattr(args, "config", None) else SearchConfig()
    if getattr(args, "grid", None) is not None:
        cfg = replace(cfg, grid=args.grid)
    if getattr(args, "workers", None) is not None:
        cfg = replace(cfg, workers=args.workers)
    return cfg


def _thresholds(args: argparse.Namespace) -> Thresholds:
    try:
        return Thresholds(args.vth, args.rnovib)
    except InputDomainError as exc:
        raise ConfigError(str(exc)) from exc


def _frame_paths(out: str) -> tuple[Path, Path, Path]:
    base = Path(out)
    stem = base.with_suffix("") if base.suffix == ".png" else base
    return (
        stem.with_name(stem.name + "_a.png"),
        stem.with_name(stem.name + "_b.png"),
        stem.with_name(stem.name + "_layout.json"),
    )


def cmd_convert(args: argparse.Namespace) -> int:
    if args.rgb is not None:
        lab = srgb_to_lab(args.rgb)
        print(f"L*={fmt6(lab.l_star)} a*={fmt6(lab.a_star + 0.0)} b*={fmt6(lab.b_star + 0.0)}")
        return 0
    try:
        values = [float(v) for v in args.lab.split(",")]
    except ValueError as exc:
        raise InputDomainError(f"expected L,a,b, got {args.lab!r}") from exc
    if len(values) != 3:
        raise InputDomainError(f"expected L,a,b, got {args.lab!r}")
    lab = LabColor(*values)
    try:
        rgb = lab_to_srgb(lab)
    except OutOfGamutError:
        print("out of gamut", file=sys.stderr)
        return 1
    print(f"{rgb.r},{rgb.g},{rgb.b}")
    return 0


def cmd_search(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    th = _thresholds(args)
    if args.serial:
        pairs = serial_search(args.rgb, cfg.grid, args.pattern, th, **cfg.search_kwargs())
    else:
        pairs = batch_search(args.rgb, cfg.grid, args.pattern, th, workers=cfg.workers, **cfg.search_kwargs())
    if args.format == "json":
        doc = [
            {
                "radius": round6(p.radius),
                "angle": round6(p.angle),
                "plus": list(p.plus.as_tuple()),
                "minus": list(p.minus.as_tuple()),
                "deltas": [round6(d) for d in p.deltas.as_tuple()],
            }
            for p in pairs
        ]
        data = (json.dumps(doc, indent=2) + "\n").encode()
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["radius", "angle", "plus", "minus", "d_r", "d_g", "d_b"])
        for p in pairs:
            w.writerow(
                [fmt6(p.radius), fmt6(p.angle), " ".join(map(str, p.plus.as_tuple())),
                 " ".join(map(str, p.minus.as_tuple())), *(fmt6(d) for d in p.deltas.as_tuple())]
            )
        data = buf.getvalue().encode()
    emit(data, args.out)
    return 0


def cmd_matrix(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    m = feasibility_matrix(cfg)
    data = export_matrix(m, args.format, args.aggregated)
    out = args.out
    if out is not None and Path(out).is_dir():
        out = str(Path(out) / export_filename(args.format, args.aggregated))
    emit(data, out)
    if args.plot:
        plot_matrix(m, args.plot)
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    report = run_benchmark(cfg, repetitions=args.repetitions)
    emit(report.to_json().encode(), args.out)
    return 0


def _write_frames(fp, out: str) -> None:
    a, b, layout = _frame_paths(out)
    write_atomic({a: encode_png(fp.frame_a), b: encode_png(fp.frame_b), layout: fp.block_layout.to_json().encode()})


def cmd_testcard(args: argparse.Namespace) -> int:
    if args.out is None:
        raise ConfigError("testcard requires --out PREFIX")
    cfg = load_config(args)
    fp = make_testcard(
        args.rgb, args.pattern, _thresholds(args), cfg.grid, DisplayParams(args.refresh_hz), args.size,
        wp=cfg.white_point, delta_mode=cfg.delta_mode, swing=cfg.swing, workers=cfg.workers,
    )
    _write_frames(fp, args.out)
    return 0


def cmd_embed(args: argparse.Namespace) -> int:
    if args.out is None:
        raise ConfigError("embed requires --out PREFIX")
    cfg = load_config(args)
    layout = BlockLayout.load(args.layout)
    th = _thresholds(args)
    disp = DisplayParams(args.refresh_hz)
    fp = embed_blocks(
        read_png(args.base), layout, th, cfg.grid, disp,
        wp=cfg.white_point, delta_mode=cfg.delta_mode, swing=cfg.swing, workers=cfg.workers,
    )
    _write_frames(fp, args.out)
    return 0


def cmd_decode(args: argparse.Namespace) -> int:
    th = _thresholds(args)
    fp = FramePair(read_png(args.frame_a), read_png(args.frame_b), BlockLayout.load(args.layout))
    decode_blocks(fp, th)
    emit((json.dumps(decode_report(fp, th), indent=2) + "\n").encode(), args.out)
    return 0


COMMANDS = {
    "convert": cmd_convert,
    "search": cmd_search,
    "matrix": cmd_matrix,
    "bench": cmd_bench,
    "testcard": cmd_testcard,
    "embed": cmd_embed,
    "decode": cmd_decode,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (ColorVibeError, OSError) as exc:
        print(f"colorvibe {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
