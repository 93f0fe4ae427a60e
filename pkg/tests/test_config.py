import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mimo_isar.config import (
    SCHEMA,
    ScenarioConfig,
    default_config_text,
    frame_index_for_time,
    load_config,
    normalize_config,
    parse_config,
    serialize_config,
)
from mimo_isar.exceptions import ConfigError
from mimo_isar.params import RadarParams


def test_default_config_is_measurement_radar():
    cfg = parse_config(default_config_text())
    assert cfg.radar == RadarParams()
    assert cfg.scene.preset == "uturn-car"
    assert cfg.pipeline.frames == (8.1, 8.4, 8.6, 8.7, 9.0)
    assert cfg.frame_indices() == [81, 84, 86, 87, 90]
    assert cfg.pipeline.algorithms == ("none", "em", "ccr", "pga")


def test_round_trip_is_normalized_identity():
    text = default_config_text()
    cfg = parse_config(text)
    assert serialize_config(cfg) == normalize_config(text)
    assert parse_config(serialize_config(cfg)) == cfg
    assert normalize_config(serialize_config(cfg)) == serialize_config(cfg)


def test_minimal_config_gets_defaults():
    cfg = parse_config("scene.preset = blank\n")
    assert cfg.scene.preset == "blank"
    assert cfg.radar == RadarParams()
    assert cfg == ScenarioConfig(scene=cfg.scene)


def test_serialized_text_lists_every_key():
    text = serialize_config(parse_config("scene.preset = blank"))
    keys = [line.split(" = ")[0] for line in text.splitlines() if line]
    assert keys == list(SCHEMA)


def test_comments_and_whitespace():
    cfg = parse_config("# header\n\n  scene.preset=single-point   # inline\nscene.point_range_m = 12.5\n")
    assert cfg.scene.point_range_m == 12.5


@pytest.mark.parametrize(
    "text,key,line",
    [
        ("scene.preset = uturn-car\nradar.num_tx = -1\n", "radar.num_tx", 2),
        ("scene.preset = uturn-car\nradar.num_tx = three\n", "radar.num_tx", 2),
        ("scene.preset = uturn-car\nradar.colour = red\n", "radar.colour", 2),
        ("scene.preset = uturn-car\nantenna.gain = 3\n", "antenna.gain", 2),
        ("scene.preset = uturn-car\nscene.preset = blank\n", "scene.preset", 2),
        ("scene.preset = truck\n", "scene.preset", 1),
        ("radar.num_rx = 4\n", "scene.preset", None),
        ("scene.preset = blank\npipeline.frames = 8.15\n", "pipeline.frames", 2),
        ("scene.preset = blank\npipeline.blank_frames = 0\n", "pipeline.blank_frames", 2),
        ("scene.preset = blank\n\npipeline.algorithms = em, em\n", "pipeline.algorithms", 3),
        ("scene.preset = blank\noutput.formats = png\n", "output.formats", 2),
        ("scene.preset = blank\nno equals sign here\n", None, 2),
    ],
)
def test_errors_name_key_and_line(text, key, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    err = info.value
    assert err.key == key
    assert err.line == line
    if line is not None:
        assert f"line {line}" in str(err)
    if key is not None:
        assert key in str(err)


def test_frame_times_map_to_indices():
    assert frame_index_for_time(8.4, 0.1) == 84
    assert frame_index_for_time(0.0, 0.1) == 0
    with pytest.raises(ConfigError):
        frame_index_for_time(-0.1, 0.1)


def test_overrides_revalidate():
    cfg = parse_config(default_config_text())
    assert cfg.with_overrides(pipeline__seed=7).pipeline.seed == 7
    with pytest.raises(ConfigError):
        cfg.with_overrides(pipeline__threads=-1)


def test_load_config_from_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("scene.preset = blank\npipeline.seed = 12\n", encoding="utf-8")
    assert load_config(path).pipeline.seed == 12


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(0, 2**64 - 1),
    noise=st.floats(0, 100, allow_nan=False),
    step=st.floats(0.01, 1.0),
    frames=st.lists(st.integers(0, 140), min_size=1, max_size=6, unique=True),
)
def test_round_trip_property(seed, noise, step, frames):
    cfg = parse_config(default_config_text()).with_overrides(
        pipeline__seed=seed,
        scene__noise_power=noise,
        pipeline__em_velocity_step=step,
        pipeline__frames=tuple(f / 10 for f in frames),
    )
    assert parse_config(serialize_config(cfg)) == cfg
