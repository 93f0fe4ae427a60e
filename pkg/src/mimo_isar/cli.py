"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 I/O or file-format error,
4 numeric or degenerate-input error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import ALGORITHM_CHOICES, ScenarioConfig, default_config_text, load_config, parse_config
from .exceptions import (
    ConfigError,
    CubeFormatError,
    DegenerateInputError,
    ParameterError,
    SceneError,
    StageError,
)
from .export import export_image
from .imaging import image_from_profiles, nci, range_profiles
from .io import describe_format, read_cube, write_cube
from .params import TABLE1_DERIVED, RadarParams, validate_params
from .pipeline import SISO_CHANNEL, compensate_cube, compensated_cube, mocomp_options, process_cubes, run_pipeline, simulate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

log = logging.getLogger("mimo_isar")


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, StageError):
        exc = exc.cause
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, (OSError, CubeFormatError)):
        return EXIT_IO
    if isinstance(exc, (DegenerateInputError, ParameterError, SceneError, ArithmeticError, ValueError)):
        return EXIT_NUMERIC
    raise exc


def _frames(text):
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated frame start times in seconds, got {text!r}") from None


def _u64(text):
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _threads(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("threads must be >= 0 (0 = one per CPU)")
    return value


def load(args) -> ScenarioConfig:
    """Config from ``--config`` (or the shipped default) with CLI overrides applied."""
    cfg = load_config(args.config) if args.config else parse_config(default_config_text())
    overrides = {}
    if getattr(args, "frames", None) is not None:
        overrides["pipeline__frames"] = args.frames
    if getattr(args, "seed", None) is not None:
        overrides["pipeline__seed"] = args.seed
    if getattr(args, "threads", None) is not None:
        overrides["pipeline__threads"] = args.threads
    if getattr(args, "out", None) is not None:
        overrides["output__dir"] = args.out
    algo = getattr(args, "algo", None)
    if algo is not None:
        overrides["pipeline__algorithms"] = ("none",) if algo == "none" else ("none", algo)
    return cfg.with_overrides(**overrides) if overrides else cfg


def _check_radar(cfg):
    # the measurement table's printed derived values only describe the default radar
    validate_params(cfg.radar, TABLE1_DERIVED if cfg.radar == RadarParams() else None)


def _read_cubes(paths, cfg):
    return [read_cube(p, params=cfg.radar) for p in paths]


def _out_dir(cfg):
    out = cfg.output.dir or "."
    os.makedirs(out, exist_ok=True)
    return out


def cmd_simulate(args):
    cfg = load(args)
    _check_radar(cfg)
    targets, blanks, _ = simulate(cfg)
    out = os.path.join(_out_dir(cfg), "cubes")
    os.makedirs(out, exist_ok=True)
    for prefix, cubes in (("frame", targets), ("blank", blanks)):
        for cube in cubes:
            path = os.path.join(out, f"{prefix}_{cube.frame_index:04d}.cube")
            write_cube(path, cube)
            print(path)
    return EXIT_OK


def cmd_mocomp(args):
    cfg = load(args)
    options = mocomp_options(cfg)
    cubes = _read_cubes(args.cubes, cfg)
    out = _out_dir(cfg)
    for path, cube in zip(args.cubes, cubes):
        profiles, results = compensate_cube(cube, args.algo, options)
        dest = os.path.join(out, f"{os.path.splitext(os.path.basename(path))[0]}_{args.algo}.cube")
        write_cube(dest, compensated_cube(cube, profiles))
        est = results[SISO_CHANNEL][-1].estimates if results[SISO_CHANNEL] else {}
        scalars = {k: v for k, v in est.items() if isinstance(v, (int, float))}
        print(dest, scalars if scalars else "")
    return EXIT_OK


def cmd_image(args):
    cfg = load(args)
    cubes = _read_cubes(args.cubes, cfg)
    out = _out_dir(cfg)
    rw = None if cfg.pipeline.range_window == "none" else cfg.pipeline.range_window
    dw = None if cfg.pipeline.doppler_window == "none" else cfg.pipeline.doppler_window
    for path, cube in zip(args.cubes, cubes):
        images = {
            ch: image_from_profiles(range_profiles(cube, *ch, rw), channel=ch, frame_index=cube.frame_index, params=cube.params, doppler_window=dw)
            for ch in cube.channels()
        }
        stem = os.path.splitext(os.path.basename(path))[0]
        for label, img in (("siso", images[SISO_CHANNEL]), ("mimo", nci(images.values()))):
            for fmt in cfg.output.formats:
                dest = os.path.join(out, f"{stem}_{label}.{fmt}")
                export_image(img, dest, fmt, cfg.output.db_floor)
                print(dest)
    return EXIT_OK


def cmd_metrics(args):
    cfg = load(args)
    targets = _read_cubes(args.cubes, cfg)
    blanks = _read_cubes(args.blank, cfg)
    report, _, _ = process_cubes(targets, blanks, cfg, target_present=not args.no_target)
    text = report.render()
    print(text, end="")
    if args.out is not None:
        out = _out_dir(cfg)
        for name, body in (("report.txt", text), ("report.csv", report.to_csv())):
            with open(os.path.join(out, name), "w", encoding="utf-8", newline="\n") as fh:
                fh.write(body)
    return EXIT_OK


def cmd_run(args):
    cfg = load(args)
    _check_radar(cfg)
    result = run_pipeline(cfg)
    print(result.report.render(), end="")
    log.info("wrote %d files", len(result.artifacts))
    return EXIT_OK


def cmd_formats(args):
    print(describe_format())
    print()
    print("config: UTF-8 lines 'section.key = value', sections radar, scene, pipeline, output; '#' starts a comment")
    print("images: binary PGM (P5, 16-bit big-endian, dB between peak + db_floor and peak) or CSV (dB, 4 decimals,")
    print("        one row per range bin), each with a '<name>.axes.txt' sidecar")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mimo-isar", description="MIMO-ISAR simulation, motion compensation and evaluation")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="log progress (-vv for per-task detail)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, frames=False, seed=False, threads=False, algo=None):
        p.add_argument("--config", metavar="PATH", help="scenario config (default: shipped config)")
        p.add_argument("--out", metavar="DIR", help="output directory (overrides output.dir)")
        if frames:
            p.add_argument("--frames", type=_frames, metavar="LIST", help="frame start times in seconds, e.g. 8.1,8.4")
        if seed:
            p.add_argument("--seed", type=_u64, metavar="U64")
        if threads:
            p.add_argument("--threads", type=_threads, metavar="N", help="worker threads, 0 = one per CPU")
        if algo == "required":
            p.add_argument("--algo", choices=ALGORITHM_CHOICES, required=True)
        elif algo == "optional":
            p.add_argument("--algo", choices=ALGORITHM_CHOICES, help="run only this algorithm next to 'none'")

    p = sub.add_parser("simulate", help="synthesize target and blank cubes")
    common(p, frames=True, seed=True, threads=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mocomp", help="motion-compensate cube files channel by channel")
    p.add_argument("cubes", nargs="+", metavar="CUBE")
    common(p, algo="required")
    p.set_defaults(func=cmd_mocomp)

    p = sub.add_parser("image", help="SISO and MIMO range-Doppler images of cube files")
    p.add_argument("cubes", nargs="+", metavar="CUBE")
    common(p)
    p.set_defaults(func=cmd_image)

    p = sub.add_parser("metrics", help="compare algorithms on target and blank cube files")
    p.add_argument("cubes", nargs="*", metavar="CUBE")
    p.add_argument("--blank", nargs="+", required=True, metavar="CUBE", help="target-free frames for the noise floor")
    p.add_argument("--no-target", action="store_true", help="treat the target cubes as target-free")
    common(p, threads=True, algo="optional")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("run", help="simulate, compensate, image and compare end to end")
    common(p, frames=True, seed=True, threads=True, algo="optional")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("formats", help="print the cube, config and image layouts")
    p.set_defaults(func=cmd_formats)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Exception as exc:
        code = exit_code_for(exc)
        print(f"mimo-isar: error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
