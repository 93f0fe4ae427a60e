"""End-to-end run: simulate, compensate each channel, image, integrate, compare."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .config import ScenarioConfig, serialize_config
from .exceptions import StageError
from .export import export_image
from .imaging import FrameStack, image_from_profiles, nci, profiles_to_cube_channel, range_profiles
from .io import write_cube
from .metrics import CellResult, MetricsReport, comparison_table
from .mocomp import compensate
from .scene import builtin_scenarios, single_point_scene
from .synth import RawCube, synthesize_frame

log = logging.getLogger(__name__)

SISO_CHANNEL = (0, 0)


@dataclass
class FrameOutput:
    """Per-frame result of one algorithm: both images plus per-channel estimates."""

    siso: object
    mimo: object
    estimates: dict = field(default_factory=dict)
    no_target: bool = False


@dataclass
class PipelineResult:
    report: MetricsReport
    frames: dict  # (algorithm, frame_index) -> FrameOutput
    blank: dict  # (algorithm, frame_index) -> FrameOutput
    artifacts: list = field(default_factory=list)
    channels_per_frame: int = 0


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def build_scenes(cfg: ScenarioConfig):
    """Target scene and the target-free scene that supplies blank frames."""
    sc = cfg.scene
    seed = cfg.pipeline.seed
    presets = builtin_scenarios(seed=seed, noise_power=sc.noise_power)
    blank = presets["blank"]
    if sc.preset == "single-point":
        target = single_point_scene(
            range0_m=sc.point_range_m,
            velocity_mps=sc.point_velocity_mps,
            acceleration_mps2=sc.point_acceleration_mps2,
            azimuth_rad=sc.point_azimuth_rad,
            noise_power=sc.noise_power,
            clutter=blank.clutter,
            seed=seed,
        )
    else:
        target = presets[sc.preset]
    if not sc.clutter:
        target, blank = replace(target, clutter=()), replace(blank, clutter=())
    if sc.reflectivity_jitter:
        target = replace(target, reflectivity_jitter=sc.reflectivity_jitter)
    return target, blank


def _grid(lo, hi, step):
    n = int(round((hi - lo) / step))
    return np.round(lo + step * np.arange(n + 1), 10)


def mocomp_options(cfg: ScenarioConfig) -> dict:
    """Keyword arguments for :func:`mimo_isar.mocomp.compensate` from the pipeline block."""
    pc = cfg.pipeline
    floor = pc.min_peak_to_floor_db
    return {
        "params": cfg.radar,
        "coarse": {"min_peak_to_floor_db": floor},
        "em": {
            "velocities": _grid(pc.em_velocity_min, pc.em_velocity_max, pc.em_velocity_step),
            "accelerations": _grid(pc.em_accel_min, pc.em_accel_max, pc.em_accel_step),
            "migration": pc.em_migration,
            "min_peak_to_floor_db": floor,
        },
        "ccr": {
            "max_iters": pc.ccr_max_iters,
            "conv_tol": pc.ccr_conv_tol,
            "reference": pc.ccr_reference,
            "min_peak_to_floor_db": floor,
        },
        "pga": {
            "max_iters": pc.pga_max_iters,
            "rms_tol_rad": pc.pga_rms_tol_rad,
            "num_bins": pc.pga_num_bins,
            "min_peak_to_floor_db": floor,
        },
    }


def _window(name):
    return None if name == "none" else name


def compensate_cube(cube: RawCube, algorithm: str, options: dict, range_window=None):
    """Compensate every channel of ``cube`` independently.

    Returns
    -------
    profiles : dict
        ``(p, q) -> [range, slow]`` compensated profiles.
    results : dict
        ``(p, q) -> list of MocompResult``.
    """
    profiles, results = {}, {}
    for p, q in cube.channels():
        x = range_profiles(cube, p, q, range_window)
        profiles[(p, q)], results[(p, q)] = compensate(x, algorithm, **options)
    return profiles, results


def compensated_cube(cube: RawCube, profiles: dict) -> RawCube:
    """Fast-time cube holding compensated channels (unwindowed profiles only)."""
    data = np.empty_like(cube.data)
    for (p, q), x in profiles.items():
        data[p, q] = profiles_to_cube_channel(x)
    return RawCube(data=data, frame_index=cube.frame_index, frame_start_s=cube.frame_start_s, params=cube.params, provenance=dict(cube.provenance))


def image_cube(cube: RawCube, algorithm: str, options: dict, range_window=None, doppler_window=None) -> FrameOutput:
    """MOCOMP per channel, range-Doppler per channel, then SISO and MIMO images."""
    profiles, results = compensate_cube(cube, algorithm, options, range_window)
    images = [
        image_from_profiles(x, channel=ch, frame_index=cube.frame_index, params=cube.params, doppler_window=doppler_window)
        for ch, x in profiles.items()
    ]
    by_channel = dict(zip(profiles, images))
    estimates = {ch: [(r.algorithm, r.estimates) for r in res] for ch, res in results.items()}
    no_target = all(r.diagnostics.get("no_target", False) for res in results.values() for r in res) if algorithm != "none" else None
    return FrameOutput(siso=by_channel[SISO_CHANNEL], mimo=nci(images), estimates=estimates, no_target=no_target)


def _map(fn, items, threads):
    items = list(items)
    if threads == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads or None) as pool:
        return list(pool.map(fn, items))


def process_cubes(target_cubes, blank_cubes, cfg: ScenarioConfig, threads=None, target_present=True):
    """Run every configured algorithm over the given cubes and build the comparison.

    Returns
    -------
    report : MetricsReport
    frames, blank : dict
        ``(algorithm, frame_index) -> FrameOutput``.
    """
    threads = cfg.pipeline.threads if threads is None else threads
    options = mocomp_options(cfg)
    rw, dw = _window(cfg.pipeline.range_window), _window(cfg.pipeline.doppler_window)
    algorithms = cfg.pipeline.algorithms

    def work(task):
        kind, algo, cube = task
        log.debug("%s frame %d, %s: %d channels", kind, cube.frame_index, algo, len(cube.channels()))
        return _stage(f"mocomp/image {kind} frame {cube.frame_index} ({algo})", image_cube, cube, algo, options, rw, dw)

    tasks = [("target", a, c) for a in algorithms for c in target_cubes]
    tasks += [("blank", a, c) for a in algorithms for c in blank_cubes]
    outputs = _map(work, tasks, threads)
    frames, blank = {}, {}
    for (kind, algo, cube), out in zip(tasks, outputs):
        (frames if kind == "target" else blank)[(algo, cube.frame_index)] = out

    results = {}
    for algo in algorithms:
        for config, attr in (("SISO", "siso"), ("MIMO", "mimo")):
            blank_stack = FrameStack([getattr(blank[(algo, c.frame_index)], attr) for c in blank_cubes])
            target_stack = None
            if target_present and target_cubes:
                target_stack = FrameStack([getattr(frames[(algo, c.frame_index)], attr) for c in target_cubes])
            results[(config, algo)] = CellResult(blank=blank_stack, frames=target_stack)
    report = _stage(
        "metrics",
        comparison_table,
        results,
        primary_definition=cfg.pipeline.cov_definition,
        require_all=False,
    )
    return report, frames, blank


def simulate(cfg: ScenarioConfig, threads=None):
    """Synthesize the configured target frames and the blank frames."""
    threads = cfg.pipeline.threads if threads is None else threads
    target, blank_scene = build_scenes(cfg)
    jobs = [(target, i) for i in cfg.frame_indices()]
    jobs += [(blank_scene, i) for i in range(cfg.pipeline.blank_frames)]
    cubes = _map(lambda job: _stage(f"simulate {job[0].name} frame {job[1]}", synthesize_frame, job[0], cfg.radar, job[1]), jobs, threads)
    n_target = len(cfg.frame_indices())
    return cubes[:n_target], cubes[n_target:], target


def _write_outputs(out_dir, cfg, target_cubes, blank_cubes, frames, report):
    written = []
    os.makedirs(out_dir, exist_ok=True)

    def put_text(name, text):
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        written.append(path)

    put_text("config.cfg", serialize_config(cfg))
    if cfg.output.write_cubes:
        cube_dir = os.path.join(out_dir, "cubes")
        os.makedirs(cube_dir, exist_ok=True)
        for prefix, cubes in (("frame", target_cubes), ("blank", blank_cubes)):
            for cube in cubes:
                path = os.path.join(cube_dir, f"{prefix}_{cube.frame_index:04d}.cube")
                write_cube(path, cube)
                written.append(path)
    for (algo, index), out in sorted(frames.items()):
        img_dir = os.path.join(out_dir, "images", algo)
        os.makedirs(img_dir, exist_ok=True)
        for label, img in (("siso", out.siso), ("mimo", out.mimo)):
            for fmt in cfg.output.formats:
                path = os.path.join(img_dir, f"{label}_frame_{index:04d}.{fmt}")
                written.append(path)
                written.append(export_image(img, path, fmt, cfg.output.db_floor))
    put_text("report.txt", report.render())
    put_text("report.csv", report.to_csv())
    return written


def run_pipeline(cfg: ScenarioConfig, out_dir=None, threads=None) -> PipelineResult:
    """Simulate, compensate, image and evaluate the configured scenario.

    Parameters
    ----------
    cfg : ScenarioConfig
    out_dir : path-like, optional
        Overrides ``cfg.output.dir``; when both are None nothing is written.
    threads : int, optional
        Overrides ``cfg.pipeline.threads`` (0 = one per CPU). Outputs do
        not depend on it.

    Raises
    ------
    StageError
        Wrapping the failure of the named stage.
    """
    out_dir = cfg.output.dir if out_dir is None else out_dir
    target_cubes, blank_cubes, target = simulate(cfg, threads)
    channels = cfg.radar.num_channels
    for cube in target_cubes:
        log.info("frame %d (%.3f s): %d channels", cube.frame_index, cube.frame_start_s, channels)
    report, frames, blank = process_cubes(
        target_cubes, blank_cubes, cfg, threads, target_present=bool(target.scatterers)
    )
    artifacts = []
    if out_dir is not None:
        artifacts = _stage("write outputs", _write_outputs, out_dir, cfg, target_cubes, blank_cubes, frames, report)
    return PipelineResult(report=report, frames=frames, blank=blank, artifacts=artifacts, channels_per_frame=channels)
