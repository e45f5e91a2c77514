"""Command-line toolkit: inspect, validate, create, convert, resample, diff.

Exit codes form a contract across all subcommands: 0 success, 1 semantic
failure (validation violations, mismatched content, bad request), 2 when an
input cannot be read or decoded.  Reports go to standard output, diagnostics
to standard error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .codec import decode_document, encode_document, load, save
from .csvio import manifest_path_for, read_csv, track_names, write_csv
from .errors import ChunkError, FormatError, GmsError
from .example import example_document
from .model import (
    fatal_violations,
    frame_byte_size,
    padded_frame_stride,
    scene_track_count,
    validate_scene,
)
from .signal import classify_rate, decimate, smooth_decimate, track_stats

EXIT_OK = 0
EXIT_SEMANTIC = 1
EXIT_UNREADABLE = 2

_MAX_DIFF_REPORT = 10


def _err(message: str):
    print(f"gms: {message}", file=sys.stderr)


def _bands(freq: float) -> str:
    names = sorted(band.label for band in classify_rate(freq))
    return "{" + ", ".join(names) + "}"


def _cmd_info(args) -> int:
    doc = load(args.file)
    scene = doc.scene
    duration = scene.nb_frame / scene.freq
    print(f"file: {args.file}")
    print(f"version: {doc.version[0]}.{doc.version[1]}")
    print(f"scene: {scene.name}")
    print(f"frames: {scene.nb_frame}")
    print(f"freq: {scene.freq:g} Hz")
    print(f"duration: {duration:g} s")
    print(f"rate bands: {_bands(scene.freq)}")
    print(f"sample type: {scene.sample_type.label}")
    print(f"scale: {scene.scale:g}")
    print(f"block size: {scene.block_size}")
    print(f"frame bytes: {frame_byte_size(scene)} (stride {padded_frame_stride(scene)})")
    n_channels = sum(len(u.channels) for u in scene.units)
    print(
        f"units: {len(scene.units)}, channels: {n_channels}, "
        f"tracks: {scene_track_count(scene)}"
    )
    if doc.unknown_chunks:
        ids = ", ".join(c.id.decode("ascii") for c in doc.unknown_chunks)
        print(f"unknown chunks preserved: {ids}")
    for unit in scene.units:
        print(f"unit {unit.name} ({len(unit.channels)} channels)")
        for channel in unit.channels:
            dim = channel.dimension
            print(
                f"  channel {channel.name} [{dim.label}, {channel.var_type.label}, "
                f"{channel.var_type.category}, {dim.track_count} track"
                f"{'s' if dim.track_count > 1 else ''}]"
            )
    if args.stats:
        for column, name in enumerate(track_names(scene)):
            if scene.nb_frame == 0:
                print(f"track {name}: empty")
                continue
            s = track_stats(doc.frames[:, column])
            print(
                f"track {name}: min {s.min:g} max {s.max:g} "
                f"mean {s.mean:g} rms {s.rms:g}"
            )
    return EXIT_OK


def _cmd_validate(args) -> int:
    doc = load(args.file)
    violations = validate_scene(doc.scene, doc.frames)
    for v in violations:
        print(v)
    if fatal_violations(violations):
        return EXIT_SEMANTIC
    if args.strict and violations:
        return EXIT_SEMANTIC
    return EXIT_OK


def _cmd_create_example(args) -> int:
    doc = example_document(args.fluid_n, args.frames, args.freq)
    save(doc, args.out)
    print(
        f"wrote {args.out}: {len(doc.scene.units)} units, "
        f"{scene_track_count(doc.scene)} tracks, {doc.scene.nb_frame} frames "
        f"at {doc.scene.freq:g} Hz"
    )
    return EXIT_OK


def _cmd_convert(args) -> int:
    src, dst = Path(args.input), Path(args.output)
    if src.suffix == ".gms" and dst.suffix == ".csv":
        doc = load(src)
        manifest = write_csv(doc, dst)
        print(f"wrote {dst} and {manifest}")
    elif src.suffix == ".csv" and dst.suffix == ".gms":
        doc = read_csv(src)
        save(doc, dst)
        print(f"wrote {dst} ({doc.scene.nb_frame} frames)")
    else:
        _err(
            f"cannot infer conversion direction from {src.name!r} -> {dst.name!r}; "
            "use .gms and .csv extensions"
        )
        return EXIT_SEMANTIC
    return EXIT_OK


def _cmd_resample(args) -> int:
    if args.factor < 1:
        _err(f"--factor must be at least 1, got {args.factor}")
        return EXIT_SEMANTIC
    doc = load(args.input)
    op = smooth_decimate if args.smooth else decimate
    scene, frames = op(doc.scene, doc.frames, args.factor)
    save(type(doc)(scene=scene, frames=frames, unknown_chunks=doc.unknown_chunks), args.output)
    print(
        f"rate: {doc.scene.freq:g} Hz {_bands(doc.scene.freq)} -> "
        f"{scene.freq:g} Hz {_bands(scene.freq)}"
    )
    print(f"frames: {doc.scene.nb_frame} -> {scene.nb_frame}")
    return EXIT_OK


def _structure_mismatches(a, b) -> list[str]:
    out = []
    if a.scene.name != b.scene.name:
        out.append(f"scene name differs: {a.scene.name!r} vs {b.scene.name!r}")
    if a.scene.freq != b.scene.freq:
        out.append(f"freq differs: {a.scene.freq:g} vs {b.scene.freq:g}")
    if a.scene.nb_frame != b.scene.nb_frame:
        out.append(f"frame count differs: {a.scene.nb_frame} vs {b.scene.nb_frame}")
    names_a = [u.name for u in a.scene.units]
    names_b = [u.name for u in b.scene.units]
    if names_a != names_b:
        out.append(f"unit list differs: {names_a} vs {names_b}")
        return out
    for ua, ub in zip(a.scene.units, b.scene.units):
        if ua.channels != ub.channels:
            out.append(f"channels of unit {ua.name!r} differ")
    return out


def _cmd_diff(args) -> int:
    a = load(args.a)
    b = load(args.b)
    mismatches = _structure_mismatches(a, b)
    sample_count = 0
    if not mismatches and a.frames.shape == b.frames.shape and a.frames.size:
        delta = np.abs(a.frames - b.frames)
        bad = np.argwhere(delta > args.tolerance)
        sample_count = len(bad)
        for frame, track in bad[:_MAX_DIFF_REPORT]:
            mismatches.append(
                f"sample [frame {frame}, track {track}]: "
                f"{a.frames[frame, track]!r} vs {b.frames[frame, track]!r} "
                f"(|delta| {delta[frame, track]:g} > tolerance {args.tolerance:g})"
            )
        if sample_count > _MAX_DIFF_REPORT:
            mismatches.append(f"... and {sample_count - _MAX_DIFF_REPORT} more samples")
    if mismatches:
        for line in mismatches:
            print(line)
        return EXIT_SEMANTIC
    print("identical" if args.tolerance == 0 else f"equal within {args.tolerance:g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gms", description="GMS gesture/motion signal file toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("info", help="print scene metadata and the channel tree")
    p.add_argument("file")
    p.add_argument("--stats", action="store_true", help="also print per-track statistics")
    p.set_defaults(func=_cmd_info)

    p = sub.add_parser("validate", help="check structural invariants")
    p.add_argument("file")
    p.add_argument(
        "--strict", action="store_true", help="treat advisory diagnostics as fatal"
    )
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("create-example", help="write the built-in reference scene")
    p.add_argument("out")
    p.add_argument("--fluid-n", type=int, default=10, help="number of fluid masses")
    p.add_argument("--frames", type=int, default=100, help="frame count")
    p.add_argument("--freq", type=float, default=1000.0, help="sampling rate in Hz")
    p.set_defaults(func=_cmd_create_example)

    p = sub.add_parser("convert", help="convert between .gms and .csv (+manifest)")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("resample", help="decimate to a lower rate")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--factor", type=int, required=True, help="keep every k-th frame")
    p.add_argument(
        "--smooth", action="store_true", help="boxcar-average each window instead"
    )
    p.set_defaults(func=_cmd_resample)

    p = sub.add_parser("diff", help="compare two files")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--tolerance", type=float, default=0.0)
    p.set_defaults(func=_cmd_diff)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, ChunkError, OSError) as exc:
        _err(str(exc))
        return EXIT_UNREADABLE
    except GmsError as exc:
        _err(str(exc))
        return EXIT_SEMANTIC


def run():
    sys.exit(main())
