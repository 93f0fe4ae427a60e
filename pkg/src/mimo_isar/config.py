"""Scenario configuration in a line-oriented ``section.key = value`` dialect.

Blank lines and ``#`` comments are ignored. Every key belongs to one of the
sections ``radar``, ``scene``, ``pipeline`` or ``output``; unknown or
repeated keys are rejected with the offending line number. Lists are
comma-separated, booleans are ``true``/``false`` and ``none`` clears an
optional value. :func:`serialize_config` writes every key in a fixed order,
so ``serialize_config(parse_config(text))`` is the normal form of ``text``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from importlib import resources

from .exceptions import ConfigError, ParameterError
from .params import RadarParams, derive_params

SECTIONS = ("radar", "scene", "pipeline", "output")
SCENE_PRESETS = ("uturn-car", "blank", "single-point")
WINDOWS = ("none", "hann", "hamming")
ALGORITHM_CHOICES = ("none", "em", "ccr", "pga")
FORMAT_CHOICES = ("pgm", "csv")
FRAME_TIME_TOL = 1e-6


@dataclass(frozen=True)
class SceneConfig:
    preset: str = "uturn-car"
    noise_power: float = 1.0
    reflectivity_jitter: float = 0.0
    clutter: bool = True
    point_range_m: float = 10.0
    point_velocity_mps: float = 0.0
    point_acceleration_mps2: float = 0.0
    point_azimuth_rad: float = 0.0


@dataclass(frozen=True)
class PipelineConfig:
    algorithms: tuple = ALGORITHM_CHOICES
    frames: tuple = (8.1, 8.4, 8.6, 8.7, 9.0)
    blank_frames: int = 5
    seed: int = 0
    threads: int = 1
    range_window: str = "none"
    doppler_window: str = "none"
    min_peak_to_floor_db: float = 6.0
    em_velocity_min: float = -5.0
    em_velocity_max: float = 5.0
    em_velocity_step: float = 0.25
    em_accel_min: float = -2.5
    em_accel_max: float = 2.5
    em_accel_step: float = 0.25
    em_migration: bool = True
    ccr_max_iters: int = 97
    ccr_conv_tol: float = 1e-3
    ccr_reference: str = "mean"
    pga_max_iters: int = 10
    pga_rms_tol_rad: float = 1e-3
    pga_num_bins: int = 16
    cov_definition: str = "paper"


@dataclass(frozen=True)
class OutputConfig:
    dir: str | None = "out"
    formats: tuple = FORMAT_CHOICES
    write_cubes: bool = True
    db_floor: float = -120.0


@dataclass(frozen=True)
class ScenarioConfig:
    """Radar, scene, pipeline and output blocks of one run."""

    radar: RadarParams = field(default_factory=RadarParams)
    scene: SceneConfig = field(default_factory=SceneConfig)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def frame_indices(self) -> list:
        """Frame index for each configured frame start time."""
        return [frame_index_for_time(t, self.radar.t_cpi_s) for t in self.pipeline.frames]

    def with_overrides(self, **changes) -> "ScenarioConfig":
        """Replace ``"section.key"`` values (given with ``__`` for the dot) and revalidate."""
        blocks = {name: getattr(self, name) for name in SECTIONS}
        for dotted, value in changes.items():
            section, key = dotted.split("__", 1)
            blocks[section] = replace(blocks[section], **{key: value})
        cfg = ScenarioConfig(**blocks)
        _check_config(cfg, {})
        return cfg


def frame_index_for_time(t_s: float, t_cpi_s: float) -> int:
    """Index of the frame starting at ``t_s``; frames start on multiples of the CPI."""
    idx = round(t_s / t_cpi_s)
    if idx < 0 or abs(idx * t_cpi_s - t_s) > FRAME_TIME_TOL * max(1.0, abs(t_s)):
        raise ConfigError(f"frame time {t_s} s is not a non-negative multiple of the CPI ({t_cpi_s} s)", key="pipeline.frames")
    return int(idx)


# value codecs: (parse str -> value, format value -> str)


def _parse_bool(text):
    low = text.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"expected true/false, got {text!r}")


def _parse_int(text):
    return int(text, 10)


def _parse_float(text):
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"expected a finite number, got {text!r}")
    return value


def _fmt_float(value):
    return repr(float(value))


def _list_of(parse):
    def _parse(text):
        items = [item.strip() for item in text.split(",")]
        if items == [""]:
            return ()
        if any(item == "" for item in items):
            raise ValueError("empty list item")
        return tuple(parse(item) for item in items)

    return _parse


def _optional(parse):
    def _parse(text):
        return None if text.lower() == "none" else parse(text)

    return _parse


def _choice(options):
    def _parse(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return text

    return _parse


_CODECS = {
    int: (_parse_int, str),
    float: (_parse_float, _fmt_float),
    bool: (_parse_bool, lambda v: "true" if v else "false"),
    str: (str, str),
}


def _schema():
    """``{"section.key": (parse, fmt)}`` in canonical order."""
    schema = {}
    for f in fields(RadarParams):
        schema[f"radar.{f.name}"] = _CODECS[float if f.type in ("float", float) else int]
    for f in fields(SceneConfig):
        schema[f"scene.{f.name}"] = _CODECS[{"str": str, "float": float, "bool": bool}[f.type]]
    schema["scene.preset"] = (_choice(SCENE_PRESETS), str)
    for f in fields(PipelineConfig):
        kind = {"int": int, "float": float, "bool": bool, "str": str}.get(f.type)
        schema[f"pipeline.{f.name}"] = _CODECS.get(kind)  # list-valued keys are filled in below
    schema["pipeline.algorithms"] = (_list_of(_choice(ALGORITHM_CHOICES)), ", ".join)
    schema["pipeline.frames"] = (_list_of(_parse_float), lambda v: ", ".join(_fmt_float(x) for x in v))
    schema["pipeline.range_window"] = (_choice(WINDOWS), str)
    schema["pipeline.doppler_window"] = (_choice(WINDOWS), str)
    schema["pipeline.ccr_reference"] = (_choice(("mean", "adjacent")), str)
    schema["pipeline.cov_definition"] = (_choice(("paper", "conventional")), str)
    schema["output.dir"] = (_optional(str), lambda v: "none" if v is None else v)
    schema["output.formats"] = (_list_of(_choice(FORMAT_CHOICES)), ", ".join)
    schema["output.write_cubes"] = _CODECS[bool]
    schema["output.db_floor"] = _CODECS[float]
    return schema


SCHEMA = _schema()
REQUIRED_KEYS = ("scene.preset",)


def _split_line(raw, lineno):
    line = raw.split("#", 1)[0].strip()
    if not line:
        return None
    if "=" not in line:
        raise ConfigError("expected 'section.key = value'", line=lineno)
    key, value = (part.strip() for part in line.split("=", 1))
    if key.count(".") != 1 or not all(key.split(".")):
        raise ConfigError("keys must have the form 'section.key'", key=key, line=lineno)
    return key, value


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate configuration text.

    Raises
    ------
    ConfigError
        Unknown, repeated or missing key, malformed value or an invalid
        combination of values; the message names the key and line.
    """
    values, lines = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        item = _split_line(raw, lineno)
        if item is None:
            continue
        key, value = item
        if key not in SCHEMA:
            section = key.split(".", 1)[0]
            what = "unknown section" if section not in SECTIONS else "unknown key"
            raise ConfigError(what, key=key, line=lineno)
        if key in values:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", key=key, line=lineno)
        parse, _ = SCHEMA[key]
        try:
            values[key] = parse(value)
        except ValueError as exc:
            raise ConfigError(f"bad value: {exc}", key=key, line=lineno) from None
        lines[key] = lineno
    for key in REQUIRED_KEYS:
        if key not in values:
            raise ConfigError("missing required key", key=key)

    blocks = {name: {} for name in SECTIONS}
    for key, value in values.items():
        section, name = key.split(".")
        blocks[section][name] = value
    cfg = ScenarioConfig(
        radar=RadarParams(**blocks["radar"]),
        scene=SceneConfig(**blocks["scene"]),
        pipeline=PipelineConfig(**blocks["pipeline"]),
        output=OutputConfig(**blocks["output"]),
    )
    _check_config(cfg, lines)
    return cfg


def _check_config(cfg: ScenarioConfig, lines: dict):
    def fail(key, message):
        raise ConfigError(message, key=key, line=lines.get(key))

    try:
        derive_params(cfg.radar)
    except ParameterError as exc:
        msg = str(exc)
        named = [(msg.find(k.split(".")[1]), k) for k in SCHEMA if k.startswith("radar.") and k.split(".")[1] in msg]
        fail(min(named)[1] if named else None, msg)
    pipe = cfg.pipeline
    if pipe.threads < 0:
        fail("pipeline.threads", "must be >= 0")
    if pipe.blank_frames < 1:
        fail("pipeline.blank_frames", "noise-floor metrics need at least one blank frame")
    for key in ("ccr_max_iters", "pga_max_iters", "pga_num_bins"):
        if getattr(pipe, key) < 1:
            fail(f"pipeline.{key}", "must be >= 1")
    if not 0 <= pipe.seed < 2**64:
        fail("pipeline.seed", "must fit in an unsigned 64-bit integer")
    for axis in ("velocity", "accel"):
        lo, hi, step = (getattr(pipe, f"em_{axis}_{k}") for k in ("min", "max", "step"))
        if step <= 0:
            fail(f"pipeline.em_{axis}_step", "must be > 0")
        if hi < lo:
            fail(f"pipeline.em_{axis}_max", f"must be >= em_{axis}_min")
    if not pipe.algorithms:
        fail("pipeline.algorithms", "needs at least one algorithm")
    if len(set(pipe.algorithms)) != len(pipe.algorithms):
        fail("pipeline.algorithms", "repeated algorithm")
    for t in pipe.frames:
        try:
            frame_index_for_time(t, cfg.radar.t_cpi_s)
        except ConfigError as exc:
            fail("pipeline.frames", str(exc).split(": ", 1)[-1])
    scene = cfg.scene
    if scene.noise_power < 0:
        fail("scene.noise_power", "must be >= 0")
    if scene.reflectivity_jitter < 0:
        fail("scene.reflectivity_jitter", "must be >= 0")
    if cfg.output.db_floor >= 0:
        fail("output.db_floor", "must be negative")


def serialize_config(cfg: ScenarioConfig) -> str:
    """Canonical text of ``cfg``; every key, one per line, grouped by section."""
    out = []
    previous = None
    for key, (_, fmt) in SCHEMA.items():
        section, name = key.split(".")
        if previous is not None and section != previous:
            out.append("")
        previous = section
        out.append(f"{key} = {fmt(getattr(getattr(cfg, section), name))}")
    return "\n".join(out) + "\n"


def normalize_config(text: str) -> str:
    return serialize_config(parse_config(text))


def default_config_text() -> str:
    """The shipped default configuration (measurement radar parameters, U-turn scene)."""
    return resources.files(__package__).joinpath("default.cfg").read_text(encoding="utf-8")


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
